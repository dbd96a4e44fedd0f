"""
Catalog loaders
Run manifest, architecture models, configurations, energy model and goals from JSON files
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from config import Config
from modules.aidc import DevicePlacement
from modules.analysis import Goals
from modules.errors import ManifestError, SimulationError
from modules.iotsim import ArchitectureModel, Configuration, DeviceCost, EnergyModel, ModeConfig
from modules.population import ScenarioSpec, load_scenario
from modules.space import FloorPlan, load_floor_plan

logger = logging.getLogger(__name__)

_MANIFEST_KEYS = {'plan', 'scenarios', 'models', 'configurations', 'energy_model', 'goals',
                  'seed', 'dt', 'horizon', 'output_dir'}
_REQUIRED_MANIFEST_KEYS = {'plan', 'scenarios', 'models', 'configurations', 'goals'}


@dataclass(frozen=True)
class RunManifest:
    path: Path
    plan: Path
    scenarios: Tuple[Path, ...]
    models: Path
    configurations: Path
    goals: Path
    energy_model: Optional[Path] = None
    seed: int = Config.ROOT_SEED
    dt: float = Config.SIM_DT
    horizon: Optional[float] = None
    output_dir: str = Config.OUTPUT_DIR

    def referenced_files(self) -> List[Tuple[str, Path]]:
        files = [('plan', self.plan)]
        files += [(f'scenarios[{i}]', p) for i, p in enumerate(self.scenarios)]
        files += [('models', self.models), ('configurations', self.configurations), ('goals', self.goals)]
        if self.energy_model is not None:
            files.append(('energy_model', self.energy_model))
        return files


@dataclass
class Pack:
    """Everything a manifest points at, loaded"""
    manifest: RunManifest
    plan: FloorPlan
    scenarios: List[ScenarioSpec]
    models: List[ArchitectureModel]
    configurations: List[Configuration]
    energy_model: EnergyModel
    goals: Dict[str, Goals] = field(default_factory=dict)


def _read_json(path: Path) -> Any:
    path = Path(path)
    if not path.exists():
        raise ManifestError(str(path), "file not found")
    try:
        return json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ManifestError(str(path), f"line {e.lineno}, column {e.colno}: {e.msg}") from e


def _entries(data: Any, key: str, path: Path) -> List[Dict]:
    """A catalog file holds either {key: [...]} or a single object"""
    if isinstance(data, dict) and key in data:
        data = data[key]
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list) or not all(isinstance(e, dict) for e in data):
        raise ManifestError(str(path), f"expected a list of objects under {key!r}", field=key)
    return data


def load_manifest(path: Union[str, Path]) -> RunManifest:
    """Parse a manifest; referenced paths resolve relative to the manifest's directory"""
    path = Path(path)
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ManifestError(str(path), "manifest must be an object")
    unknown = sorted(set(data) - _MANIFEST_KEYS)
    if unknown:
        raise ManifestError(str(path), f"unknown keys {', '.join(unknown)}", field=unknown[0])
    missing = sorted(_REQUIRED_MANIFEST_KEYS - set(data))
    if missing:
        raise ManifestError(str(path), f"missing {', '.join(missing)}", field=missing[0])

    base = path.parent
    scenarios = data['scenarios']
    if isinstance(scenarios, str):
        scenarios = [scenarios]
    try:
        manifest = RunManifest(
            path=path,
            plan=base / data['plan'],
            scenarios=tuple(base / s for s in scenarios),
            models=base / data['models'],
            configurations=base / data['configurations'],
            goals=base / data['goals'],
            energy_model=base / data['energy_model'] if data.get('energy_model') else None,
            seed=int(data.get('seed', Config.ROOT_SEED)),
            dt=float(data.get('dt', Config.SIM_DT)),
            horizon=None if data.get('horizon') is None else float(data['horizon']),
            output_dir=str(data.get('output_dir', Config.OUTPUT_DIR)),
        )
    except (TypeError, ValueError) as e:
        raise ManifestError(str(path), str(e)) from e
    if not scenarios:
        raise ManifestError(str(path), "no scenarios listed", field='scenarios')
    if manifest.horizon is not None and not manifest.horizon > 0:
        raise ManifestError(str(path), f"horizon must be > 0, got {manifest.horizon}", field='horizon')
    if not 0 <= manifest.seed < 2 ** 64:
        raise ManifestError(str(path), "seed must be an unsigned 64-bit integer", field='seed')
    if not 0 < manifest.dt <= 2:
        raise ManifestError(str(path), f"dt must lie in (0, 2], got {manifest.dt}", field='dt')
    return manifest


def model_from_dict(data: Dict) -> ArchitectureModel:
    placements = []
    for raw in data.get('placements', []):
        coverage = raw.get('coverage_length')
        placements.append(DevicePlacement(
            device_id=str(raw['device_id']),
            device_type=str(raw['type']),
            site=str(raw['portal']),
            coverage_length=None if coverage is None else float(coverage),
        ))
    return ArchitectureModel(name=str(data['name']), placements=tuple(placements))


def configuration_from_dict(data: Dict) -> Configuration:
    modes = {
        str(device_type): ModeConfig(float(m['f_normal']), float(m['f_critical']))
        for device_type, m in data['modes'].items()
    }
    return Configuration(
        name=str(data['name']),
        modes=modes,
        theta=float(data.get('theta', Config.MODE_THRESHOLD)),
        hysteresis=float(data.get('hysteresis', Config.MODE_HYSTERESIS)),
    )


def energy_model_from_dict(data: Dict) -> EnergyModel:
    devices = data.get('devices', data)
    return EnergyModel(
        costs={t: DeviceCost(float(d['e_read']), float(d['e_tx'])) for t, d in devices.items()},
        c_max={t: int(d['c_max']) for t, d in devices.items()},
    )


def goals_from_dict(data: Dict) -> Goals:
    return Goals(
        energy_budget=float(data['energy_budget']),
        capture_goal=float(data['capture_goal']),
        w_s=float(data['w_s']),
        w_e=float(data['w_e']),
        window=float(data.get('window', Config.CAPTURE_WINDOW_S)),
        weights_source=str(data.get('weights_source', 'default')),
    )


def _build(path: Path, key: str, builder) -> List:
    built = []
    for i, raw in enumerate(_entries(_read_json(path), key, path)):
        try:
            built.append(builder(raw))
        except KeyError as e:
            raise ManifestError(str(path), f"{key}[{i}] missing {e.args[0]}", field=str(e.args[0])) from e
        except (TypeError, ValueError, AttributeError) as e:
            raise ManifestError(str(path), f"{key}[{i}]: {e}") from e
    return built


def load_models(path: Union[str, Path]) -> List[ArchitectureModel]:
    """Entries are built but not validated; invalid ones fail only their own sweep points"""
    return _build(Path(path), 'models', model_from_dict)


def load_configurations(path: Union[str, Path]) -> List[Configuration]:
    return _build(Path(path), 'configurations', configuration_from_dict)


def load_energy_model(path: Optional[Union[str, Path]] = None) -> EnergyModel:
    if path is None:
        return EnergyModel.default()
    path = Path(path)
    data = _read_json(path)
    try:
        return energy_model_from_dict(data)
    except KeyError as e:
        raise ManifestError(str(path), f"missing {e.args[0]}", field=str(e.args[0])) from e
    except (TypeError, ValueError, AttributeError) as e:
        raise ManifestError(str(path), str(e)) from e


def load_goals(path: Union[str, Path]) -> Dict[str, Goals]:
    path = Path(path)
    data = _read_json(path)
    per_scenario = data.get('goals', data) if isinstance(data, dict) else None
    if not isinstance(per_scenario, dict):
        raise ManifestError(str(path), "goals must map scenario names to goal objects", field='goals')
    goals = {}
    for name, raw in per_scenario.items():
        try:
            goals[name] = goals_from_dict(raw)
        except KeyError as e:
            raise ManifestError(str(path), f"goals.{name} missing {e.args[0]}", field=str(e.args[0])) from e
        except (TypeError, ValueError, AttributeError) as e:
            raise ManifestError(str(path), f"goals.{name}: {e}") from e
    return goals


def load_pack(manifest: RunManifest) -> Pack:
    """Load every referenced file; plans and scenarios are validated here, catalog entries later"""
    return Pack(
        manifest=manifest,
        plan=load_floor_plan(_existing(manifest.plan)),
        scenarios=[load_scenario(_existing(p)) for p in manifest.scenarios],
        models=load_models(manifest.models),
        configurations=load_configurations(manifest.configurations),
        energy_model=load_energy_model(manifest.energy_model),
        goals=load_goals(manifest.goals),
    )


def _existing(path: Path) -> Path:
    if not Path(path).exists():
        raise ManifestError(str(path), "file not found")
    return Path(path)


def _diagnostic(file: Path, error: SimulationError, field_name: Optional[str] = None) -> Dict:
    entry = error.to_dict()
    entry['file'] = str(file)
    if field_name and not entry.get('field'):
        entry['field'] = field_name
    return entry


def validate_manifest(path: Union[str, Path]) -> List[Dict]:
    """
    Run every loader and validator, collecting all violations

    Returns:
        One diagnostic dict per problem (file, field, invariant, message); empty when valid
    """
    path = Path(path)
    try:
        manifest = load_manifest(path)
    except SimulationError as e:
        return [_diagnostic(path, e)]

    diagnostics: List[Dict] = []
    for name, file in manifest.referenced_files():
        if not file.exists():
            diagnostics.append(_diagnostic(file, ManifestError(str(file), "file not found", field=name)))

    plan = None
    try:
        plan = load_floor_plan(_existing(manifest.plan))
    except SimulationError as e:
        if manifest.plan.exists():
            diagnostics.append(_diagnostic(manifest.plan, e))

    scenario_names = []
    for scenario_path in manifest.scenarios:
        if not scenario_path.exists():
            continue
        try:
            scenario_names.append(load_scenario(scenario_path).name)
        except SimulationError as e:
            diagnostics.append(_diagnostic(scenario_path, e))

    energy_model = None
    if manifest.energy_model is None or manifest.energy_model.exists():
        try:
            energy_model = load_energy_model(manifest.energy_model)
            energy_model.validate()
        except SimulationError as e:
            diagnostics.append(_diagnostic(manifest.energy_model or path, e))

    models = []
    if manifest.models.exists():
        try:
            models = load_models(manifest.models)
        except SimulationError as e:
            diagnostics.append(_diagnostic(manifest.models, e))
    for model in models:
        try:
            model.validate(plan)
        except SimulationError as e:
            diagnostics.append(_diagnostic(manifest.models, e, f'models.{model.name}'))

    used_types = sorted({t for m in models for t in m.device_types()})
    if manifest.configurations.exists():
        try:
            for configuration in load_configurations(manifest.configurations):
                try:
                    configuration.validate(used_types)
                except SimulationError as e:
                    diagnostics.append(_diagnostic(manifest.configurations, e,
                                                   f'configurations.{configuration.name}'))
        except SimulationError as e:
            diagnostics.append(_diagnostic(manifest.configurations, e))

    if manifest.goals.exists():
        try:
            goals = load_goals(manifest.goals)
            for name, g in goals.items():
                try:
                    g.validate()
                except SimulationError as e:
                    diagnostics.append(_diagnostic(manifest.goals, e, f'goals.{name}'))
            for name in scenario_names:
                if name not in goals:
                    diagnostics.append(_diagnostic(manifest.goals, ManifestError(
                        str(manifest.goals), f"no goals for scenario {name}", field=f'goals.{name}')))
        except SimulationError as e:
            diagnostics.append(_diagnostic(manifest.goals, e))

    if manifest.horizon is not None:
        steps = round(manifest.horizon / manifest.dt)
        if abs(steps * manifest.dt - manifest.horizon) > 1e-6:
            diagnostics.append(_diagnostic(path, ManifestError(
                str(path), f"horizon {manifest.horizon} is not a multiple of dt {manifest.dt}", field='horizon')))

    logger.info(f"Validated {path}: {len(diagnostics)} diagnostics")
    return diagnostics
