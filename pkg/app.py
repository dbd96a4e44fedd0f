"""
Crowd/IoT design-space explorer - command-line entry point
Validate a run manifest, simulate one (model, configuration, scenario) point, or sweep them all
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from config import Config
from modules.analysis import (RunSettings, SweepOutcome, optimal_lines, rows_frame, run_point, run_sweep,
                              sweep_metadata, write_results)
from modules.catalog import RunManifest, load_manifest, load_pack, validate_manifest
from modules.errors import ManifestError, SimulationError, SweepPointError
from utils.charts import occupancy_chart, tradeoff_chart
from utils.pdf_generator import PDFGenerator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARTIAL = 2


def emit(record: Dict) -> None:
    """One JSON diagnostic per line on standard output"""
    print(json.dumps(record, sort_keys=True))


def _settings(manifest: RunManifest, seed: Optional[int]) -> RunSettings:
    return RunSettings(
        root_seed=manifest.seed if seed is None else seed,
        dt=manifest.dt,
        horizon=manifest.horizon,
        common_random_numbers=Config.COMMON_RANDOM_NUMBERS,
        use_cache=Config.TRACE_CACHE_ENABLED,
        cache_dir=Config.TRACE_CACHE_DIR,
    )


def _out_dir(args: argparse.Namespace, manifest: RunManifest) -> Path:
    return Path(args.out or manifest.output_dir)


def cmd_validate(args: argparse.Namespace) -> int:
    diagnostics = validate_manifest(args.manifest)
    for diagnostic in diagnostics:
        emit({'kind': 'diagnostic', **diagnostic})
        logger.error(f"{diagnostic['file']}: {diagnostic['message']}")
    if diagnostics:
        print(f"[validate] FAIL ({len(diagnostics)} diagnostics)", file=sys.stderr)
        return EXIT_INVALID
    print("[validate] OK", file=sys.stderr)
    return EXIT_OK


def _pick(items: Sequence, name: str, what: str):
    for item in items:
        if item.name == name:
            return item
    raise ManifestError(what, f"no entry named {name!r}", field=what)


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        manifest = load_manifest(args.manifest)
        pack = load_pack(manifest)
        scenario = _pick(pack.scenarios, args.scenario, 'scenarios')
        model = _pick(pack.models, args.model, 'models')
        configuration = _pick(pack.configurations, args.configuration, 'configurations')
        goals = pack.goals.get(scenario.name)
        if goals is None:
            raise ManifestError(str(manifest.goals), f"no goals for scenario {scenario.name}", field='goals')
    except SimulationError as e:
        emit({'kind': 'diagnostic', **e.to_dict()})
        return EXIT_INVALID

    settings = _settings(manifest, args.seed)
    try:
        point = run_point(pack.plan, scenario, model, configuration, pack.energy_model, goals, settings)
    except SweepPointError as e:
        emit({'kind': 'failure', **e.to_dict()})
        return EXIT_INVALID

    out_dir = _out_dir(args, manifest)
    written = point.trace.export(out_dir, args.format)
    iot_path = out_dir / 'iot_result.json'
    iot_path.write_text(json.dumps(point.iot.to_dict(), indent=2, sort_keys=True), encoding='utf-8')
    written.append(iot_path)
    if args.format == 'json':
        row_path = out_dir / 'row.json'
        row_path.write_text(json.dumps(point.row.to_dict(), indent=2, sort_keys=True), encoding='utf-8')
    else:
        row_path = out_dir / 'row.csv'
        rows_frame([point.row]).to_csv(row_path, index=False, float_format='%.10g')
    written.append(row_path)
    if args.charts:
        chart_path = out_dir / 'occupancy.html'
        chart_path.write_text(occupancy_chart(point.trace.occupancy_frame(), point.iot.captures_per_window,
                                              goals.window, title=f"{scenario.name} / {model.name}"),
                              encoding='utf-8')
        written.append(chart_path)

    for path in written:
        logger.info(f"Wrote {path}")
    print(f"t_s={point.row.t_s:.6f}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        manifest = load_manifest(args.manifest)
        pack = load_pack(manifest)
    except SimulationError as e:
        emit({'kind': 'diagnostic', **e.to_dict()})
        return EXIT_INVALID

    settings = _settings(manifest, args.seed)
    try:
        outcome: SweepOutcome = run_sweep(pack.plan, pack.scenarios, pack.models, pack.configurations,
                                          pack.goals, pack.energy_model, settings, jobs=args.jobs)
    except SimulationError as e:
        emit({'kind': 'diagnostic', **e.to_dict()})
        return EXIT_INVALID

    out_dir = _out_dir(args, manifest)
    metadata = sweep_metadata(outcome, pack.goals, pack.energy_model, settings)
    write_results(outcome, out_dir, metadata)
    lines = optimal_lines(outcome.rows)

    if args.pdf:
        pdf = PDFGenerator().generate_pdf({
            'rows': [r.to_dict() for r in outcome.rows],
            'metadata': metadata,
            'optimal': lines,
        })
        (out_dir / f"{Config.RESULTS_BASENAME}.pdf").write_bytes(pdf)
    if args.charts:
        frame = rows_frame(outcome.rows)
        for scenario in sorted(set(frame['scenario'])):
            (out_dir / f"tradeoff_{scenario}.html").write_text(tradeoff_chart(frame, scenario), encoding='utf-8')

    for failure in outcome.failures:
        emit({'kind': 'failure', **failure.to_dict()})
    print(f"[sweep] {len(outcome.rows)} rows, {len(outcome.failures)} failed points -> {out_dir}")
    for line in lines:
        print(line)
    return EXIT_PARTIAL if outcome.failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='app.py',
        description="Explore IoT architecture models and configurations against simulated crowds.",
    )
    sub = parser.add_subparsers(dest='command', required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument('--manifest', type=Path, required=True, help="Run manifest (JSON)")
        p.add_argument('--seed', type=int, default=None, help="Root seed (default: manifest seed)")
        p.add_argument('--out', type=Path, default=None, help="Output directory (default: manifest output_dir)")
        p.add_argument('--format', choices=('csv', 'json'), default='csv',
                       help="Trace and row format for simulate")

    validate = sub.add_parser('validate', help="Run every loader and validator")
    validate.add_argument('--manifest', type=Path, required=True, help="Run manifest (JSON)")
    validate.set_defaults(handler=cmd_validate)

    simulate = sub.add_parser('simulate', help="Run one (model, configuration, scenario) point")
    common(simulate)
    simulate.add_argument('--model', required=True)
    simulate.add_argument('--configuration', required=True)
    simulate.add_argument('--scenario', required=True)
    simulate.add_argument('--charts', action='store_true', help="Also write an occupancy chart (HTML)")
    simulate.set_defaults(handler=cmd_simulate)

    sweep = sub.add_parser('sweep', help="Run every model x configuration x scenario point")
    common(sweep)
    sweep.add_argument('--jobs', type=int, default=None,
                       help="Worker processes (default: SWEEP_JOBS, 0 = all cores)")
    sweep.add_argument('--pdf', action='store_true', help="Also write a PDF report")
    sweep.add_argument('--charts', action='store_true', help="Also write trade-off charts (HTML)")
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    settings_status = Config.validate_settings()
    if not settings_status['ready']:
        for issue in settings_status['issues']:
            emit({'kind': 'diagnostic', 'error': 'ConfigError', 'message': issue, 'file': '.env'})
        return EXIT_INVALID
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
