"""
Trade-off analysis
QoS/QoE satisfaction, the weighted trade-off score, the model x configuration x scenario sweep and optimum selection
"""

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from config import Config
from modules.cache_manager import TraceCache
from modules.engine import Trace, run_abss
from modules.errors import DomainError, SimulationError, SweepPointError
from modules.iotsim import ArchitectureModel, Configuration, EnergyModel, IoTResult, simulate
from modules.population import ScenarioSpec, sample_population
from modules.space import FloorPlan
from utils.performance_optimizer import fast_parallel_process
from utils.rng import derive_seed

logger = logging.getLogger(__name__)

WEIGHT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Goals:
    energy_budget: float  # J over the whole run
    capture_goal: float  # movements per window
    w_s: float
    w_e: float
    window: float = Config.CAPTURE_WINDOW_S
    weights_source: str = 'default'  # 'default' when the weights are a calibration choice

    @property
    def weights(self) -> Tuple[float, float]:
        return self.w_s, self.w_e

    def validate(self) -> None:
        if not self.energy_budget > 0:
            raise DomainError(f"energy_budget must be > 0, got {self.energy_budget}", field='energy_budget')
        if not self.capture_goal > 0:
            raise DomainError(f"capture_goal must be > 0, got {self.capture_goal}", field='capture_goal')
        if not self.window > 0:
            raise DomainError(f"window must be > 0, got {self.window}", field='window')
        check_weights(self.weights)


@dataclass(frozen=True)
class TradeoffRow:
    model: str
    configuration: str
    scenario: str
    total_energy: float
    min_window_captures: int
    mean_window_captures: float
    q_s: float
    q_e: float
    t_s: float
    run_seed: int
    crowd_seed: int
    crossings: int = 0
    entered: int = 0
    exited: int = 0
    remaining: int = 0
    mean_wait: float = 0.0
    max_wait: float = 0.0

    def to_dict(self) -> Dict:
        return asdict(self)


ROW_COLUMNS = [f for f in TradeoffRow.__dataclass_fields__]


@dataclass
class SweepOutcome:
    rows: List[TradeoffRow]
    failures: List[SweepPointError] = field(default_factory=list)
    crowd_seeds: Dict[str, int] = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return not self.failures


def check_weights(weights: Tuple[float, float]) -> None:
    w_s, w_e = weights
    if not (0 <= w_s <= 1 and 0 <= w_e <= 1):
        raise DomainError(f"weights must lie in [0, 1], got {weights}", field='weights')
    if abs(w_s + w_e - 1.0) > WEIGHT_TOLERANCE:
        raise DomainError(f"weights must sum to 1, got {w_s + w_e}", field='weights')


def normalize_weights(w_s: float, w_e: float) -> Tuple[float, float]:
    total = w_s + w_e
    if not total > 0:
        raise DomainError("weights must have a positive sum", field='weights')
    return w_s / total, w_e / total


def qos_satisfaction(energy: float, energy_goal: float) -> float:
    """1 within budget, falling linearly to 0 at twice the budget"""
    if not energy_goal > 0:
        raise DomainError(f"energy goal must be > 0, got {energy_goal}", field='energy_budget')
    if energy < 0:
        raise DomainError(f"energy must be >= 0, got {energy}", field='total_energy')
    if energy <= energy_goal:
        return 1.0
    return max(0.0, 1.0 - (energy - energy_goal) / energy_goal)


def qoe_satisfaction(captures_per_window: Sequence[float], capture_goal: float) -> float:
    """Mean over windows of min(1, captures / goal)"""
    if not capture_goal > 0:
        raise DomainError(f"capture goal must be > 0, got {capture_goal}", field='capture_goal')
    if len(captures_per_window) == 0:
        raise DomainError("no capture windows", field='captures_per_window')
    return sum(min(1.0, c / capture_goal) for c in captures_per_window) / len(captures_per_window)


def tradeoff_score(q_s: float, q_e: float, weights: Tuple[float, float]) -> float:
    check_weights(weights)
    for name, value in (('q_s', q_s), ('q_e', q_e)):
        if not 0 <= value <= 1:
            raise DomainError(f"{name} must lie in [0, 1], got {value}", field=name)
    w_s, w_e = weights
    return w_s * q_s + w_e * q_e


def score(result: IoTResult, goals: Goals) -> Tuple[float, float, float]:
    q_s = qos_satisfaction(result.total_energy, goals.energy_budget)
    q_e = qoe_satisfaction(result.captures_per_window, goals.capture_goal)
    return q_s, q_e, tradeoff_score(q_s, q_e, goals.weights)


def _rank_key(row: TradeoffRow):
    return -row.t_s, row.total_energy, row.model, row.configuration


def rank_rows(rows: Sequence[TradeoffRow], scenario: str) -> List[TradeoffRow]:
    return sorted((r for r in rows if r.scenario == scenario), key=_rank_key)


def select_optimal(rows: Sequence[TradeoffRow], scenario: str) -> TradeoffRow:
    """Highest t_s; ties go to lower energy, then (model, configuration) name"""
    ranked = rank_rows(rows, scenario)
    if not ranked:
        raise DomainError(f"no rows for scenario {scenario}", field='rows')
    return ranked[0]


# --- one pipeline run -------------------------------------------------------

@dataclass(frozen=True)
class RunSettings:
    root_seed: int = Config.ROOT_SEED
    dt: float = Config.SIM_DT
    horizon: Optional[float] = None  # None keeps each scenario's own horizon
    common_random_numbers: bool = Config.COMMON_RANDOM_NUMBERS
    use_cache: bool = Config.TRACE_CACHE_ENABLED
    cache_dir: str = Config.TRACE_CACHE_DIR


def run_seed_for(root_seed: int, model: str, configuration: str, scenario: str) -> int:
    return derive_seed(root_seed, model, configuration, scenario)


def crowd_seed_for(settings: RunSettings, model: str, configuration: str, scenario: str) -> int:
    if settings.common_random_numbers:
        return derive_seed(settings.root_seed, 'crowd', scenario)
    return run_seed_for(settings.root_seed, model, configuration, scenario)


def run_crowd(plan: FloorPlan, scenario: ScenarioSpec, seed: int, settings: RunSettings) -> Trace:
    """Population and engine stages; the trace depends on the seed, never on the sweep point"""
    horizon = settings.horizon if settings.horizon is not None else scenario.horizon
    spec = replace(scenario, seed=seed, horizon=horizon)
    cache = TraceCache(settings.cache_dir) if settings.use_cache else None
    key = cache.trace_key(plan, spec, settings.dt, horizon) if cache else None
    if cache:
        cached = cache.get_trace(key)
        if cached is not None:
            return cached

    agents, groups = sample_population(spec, plan)
    trace = run_abss(plan, agents, groups, dt=settings.dt, horizon=horizon, seed=seed)
    if cache:
        cache.set_trace(key, trace)
    return trace


@dataclass
class PointResult:
    row: TradeoffRow
    trace: Trace
    iot: IoTResult


def run_point(plan: FloorPlan, scenario: ScenarioSpec, model: ArchitectureModel,
              configuration: Configuration, energy_model: EnergyModel, goals: Goals,
              settings: RunSettings = RunSettings(), trace: Optional[Trace] = None) -> PointResult:
    """
    One full pipeline run for a (model, configuration, scenario) point

    Any failure is re-raised as SweepPointError naming the point and the stage.
    """
    names = (scenario.name, model.name, configuration.name)
    stage = 'validate'
    try:
        model.validate(plan)
        configuration.validate(model.device_types())
        energy_model.validate(model.device_types())
        goals.validate()

        run_seed = run_seed_for(settings.root_seed, model.name, configuration.name, scenario.name)
        crowd_seed = crowd_seed_for(settings, model.name, configuration.name, scenario.name)
        if trace is None:
            stage = 'crowd'
            trace = run_crowd(plan, scenario, crowd_seed, settings)

        stage = 'iotsim'
        result = simulate(trace, model, configuration, energy_model, window=goals.window, plan=plan)

        stage = 'score'
        q_s, q_e, t_s = score(result, goals)
    except SimulationError as e:
        raise SweepPointError(*names, stage, e) from e

    captures = result.captures_per_window
    waits = [w for w in trace.wait_stats.values() if w.count]
    waited = sum(w.count for w in waits)
    row = TradeoffRow(
        model=model.name,
        configuration=configuration.name,
        scenario=scenario.name,
        total_energy=result.total_energy,
        min_window_captures=min(captures),
        mean_window_captures=sum(captures) / len(captures),
        q_s=q_s,
        q_e=q_e,
        t_s=t_s,
        run_seed=run_seed,
        crowd_seed=crowd_seed,
        crossings=len(trace.crossings),
        entered=trace.entered,
        exited=trace.exited,
        remaining=trace.remaining,
        mean_wait=sum(w.mean * w.count for w in waits) / waited if waited else 0.0,
        max_wait=max((w.max for w in waits), default=0.0),
    )
    logger.info(f"Point {scenario.name} / {model.name} / {configuration.name}: t_s={t_s:.4f}")
    return PointResult(row=row, trace=trace, iot=result)


# --- sweep ------------------------------------------------------------------

def _crowd_task(args) -> Dict:
    plan, scenario, seed, settings = args
    try:
        return {'success': True, 'trace': run_crowd(plan, scenario, seed, settings)}
    except SimulationError as e:
        return {'success': False, 'error': e}


def _point_task(args) -> Dict:
    try:
        return {'success': True, 'row': run_point(*args).row}
    except SweepPointError as e:
        return {'success': False, 'error': e}


def run_sweep(plan: FloorPlan, scenarios: Sequence[ScenarioSpec], models: Sequence[ArchitectureModel],
              configurations: Sequence[Configuration], goals: Dict[str, Goals], energy_model: EnergyModel,
              settings: RunSettings = RunSettings(), jobs: Optional[int] = None) -> SweepOutcome:
    """
    Every (scenario, model, configuration) point, rows in catalog nesting order

    Failed points are collected, the rest still run. Output depends only on the
    inputs and the root seed, never on the job count.
    """
    if not (scenarios and models and configurations):
        raise DomainError("sweep needs non-empty scenario, model and configuration catalogs")

    crowd_seeds: Dict[str, int] = {}
    shared: Dict[str, Dict] = {}
    if settings.common_random_numbers:
        crowd_seeds = {s.name: derive_seed(settings.root_seed, 'crowd', s.name) for s in scenarios}
        outcomes = fast_parallel_process(
            _crowd_task, [(plan, s, crowd_seeds[s.name], settings) for s in scenarios], jobs)
        shared = {s.name: outcome for s, outcome in zip(scenarios, outcomes)}

    tasks, failures_by_index = [], {}
    for scenario in scenarios:
        for model in models:
            for configuration in configurations:
                index = len(tasks) + len(failures_by_index)
                crowd = shared.get(scenario.name)
                if crowd is not None and not crowd['success']:
                    failures_by_index[index] = SweepPointError(
                        scenario.name, model.name, configuration.name, 'crowd', crowd['error'])
                    continue
                scenario_goals = goals.get(scenario.name)
                if scenario_goals is None:
                    failures_by_index[index] = SweepPointError(
                        scenario.name, model.name, configuration.name, 'validate',
                        DomainError(f"no goals for scenario {scenario.name}", field='goals'))
                    continue
                trace = crowd['trace'] if crowd is not None else None
                tasks.append((index, (plan, scenario, model, configuration, energy_model,
                                      scenario_goals, settings, trace)))

    results = fast_parallel_process(_point_task, [t for _, t in tasks], jobs)

    outcome = SweepOutcome(rows=[], crowd_seeds=crowd_seeds)
    ordered = dict(failures_by_index)
    ordered.update({index: result for (index, _), result in zip(tasks, results)})
    for index in sorted(ordered):
        item = ordered[index]
        if isinstance(item, SweepPointError):
            outcome.failures.append(item)
        elif item['success']:
            outcome.rows.append(item['row'])
        else:
            outcome.failures.append(item['error'])
    for failure in outcome.failures:
        logger.warning(f"Sweep point failed: {failure}")
    logger.info(f"Sweep finished: {len(outcome.rows)} rows, {len(outcome.failures)} failures")
    return outcome


def sweep(plan: FloorPlan, scenarios: Sequence[ScenarioSpec], models: Sequence[ArchitectureModel],
          configurations: Sequence[Configuration], goals: Dict[str, Goals], energy_model: EnergyModel,
          settings: RunSettings = RunSettings(), jobs: Optional[int] = None) -> List[TradeoffRow]:
    """Strict sweep: raises the first point failure"""
    outcome = run_sweep(plan, scenarios, models, configurations, goals, energy_model, settings, jobs)
    if outcome.failures:
        raise outcome.failures[0]
    return outcome.rows


# --- exports ----------------------------------------------------------------

def rows_frame(rows: Sequence[TradeoffRow]) -> pd.DataFrame:
    return pd.DataFrame([r.to_dict() for r in rows], columns=ROW_COLUMNS)


def sweep_metadata(outcome: SweepOutcome, goals: Dict[str, Goals], energy_model: EnergyModel,
                   settings: RunSettings) -> Dict:
    return {
        'root_seed': settings.root_seed,
        'dt': settings.dt,
        'horizon': settings.horizon,
        'common_random_numbers': settings.common_random_numbers,
        'crowd_seeds': dict(sorted(outcome.crowd_seeds.items())),
        'goals': {
            name: {
                'energy_budget': g.energy_budget,
                'capture_goal': g.capture_goal,
                'window': g.window,
                'w_s': g.w_s,
                'w_e': g.w_e,
                'weights_source': g.weights_source,
            }
            for name, g in sorted(goals.items())
        },
        'energy_model': {
            t: {'e_read': c.e_read, 'e_tx': c.e_tx, 'c_max': energy_model.c_max.get(t)}
            for t, c in sorted(energy_model.costs.items())
        },
        'failures': [f.to_dict() for f in outcome.failures],
    }


def optimal_lines(rows: Sequence[TradeoffRow]) -> List[str]:
    lines = []
    for scenario in sorted({r.scenario for r in rows}):
        best = select_optimal(rows, scenario)
        lines.append(f"optimal {scenario}: {best.model} x {best.configuration} "
                     f"(t_s={best.t_s:.4f}, energy={best.total_energy:.2f} J, Q_e={best.q_e:.4f})")
    return lines


def ranked_report(rows: Sequence[TradeoffRow], metadata: Dict) -> str:
    """Plain-text report: every scenario's ranking followed by its optimum"""
    out = [f"{Config.PDF_TITLE}", f"root seed {metadata['root_seed']}", ""]
    for scenario in sorted({r.scenario for r in rows}):
        goals = metadata['goals'].get(scenario, {})
        out.append(f"== {scenario} ==")
        if goals:
            out.append(f"goals: {goals['energy_budget']} J, {goals['capture_goal']} per {goals['window']:.0f} s, "
                       f"w_s={goals['w_s']}, w_e={goals['w_e']} ({goals['weights_source']} weights)")
        for rank, row in enumerate(rank_rows(rows, scenario), start=1):
            out.append(f"{rank:>3}. {row.model:<34} {row.configuration:<24} t_s={row.t_s:.4f} "
                       f"Q_s={row.q_s:.4f} Q_e={row.q_e:.4f} E={row.total_energy:.2f} J")
        out.append("")
    out.extend(optimal_lines(rows))
    failures = metadata.get('failures', [])
    if failures:
        out.append("")
        out.append(f"{len(failures)} failed points:")
        out.extend(f"  {f['message']}" for f in failures)
    return "\n".join(out) + "\n"


def write_results(outcome: SweepOutcome, out_dir: Path, metadata: Dict) -> List[Path]:
    """CSV table, JSON table with metadata header, ranked text report"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = out_dir / Config.RESULTS_BASENAME

    csv_path = base.with_suffix('.csv')
    rows_frame(outcome.rows).to_csv(csv_path, index=False, float_format='%.10g')

    json_path = base.with_suffix('.json')
    payload = {'metadata': metadata, 'rows': [r.to_dict() for r in outcome.rows]}
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding='utf-8')

    report_path = out_dir / 'report.txt'
    report_path.write_text(ranked_report(outcome.rows, metadata), encoding='utf-8')
    return [csv_path, json_path, report_path]
