""" Run configuration: YAML documents checked against a dataclass schema.

A document is merged over a preset (desk or paper) and overridden by command
line flags, then walked field by field. Unknown keys and wrong types raise
ConfigError with the dotted path of the offending field. dB quantities stay in
dB here; the simulation objects derive linear values from them.
"""
import copy
import dataclasses
import typing
from dataclasses import dataclass, field
from typing import Optional, Tuple

import yaml

from hpdcfar.averaging.config import BW_METHODS, SolverConfig
from hpdcfar.detectors import DetectorSpec
from hpdcfar.errors import ConfigError, InvalidInput
from hpdcfar.montecarlo.scenario import ScenarioConfig, config_hash, default_detectors, to_plain
from hpdcfar.robustness import ContaminationSpec, OutlierModel, parse_averaging
from hpdcfar.simulation.clutter import ClutterParams, Interference
from hpdcfar.simulation.steering import SteeringSpec

SWEEPS = ('scr', 'fd', 'mismatch')

PRESETS = {
    'desk': {
        'detect': {'pfa': 1e-2, 'calib_trials': 10000, 'trials_pd': 200},
        'influence': {'repeats': 100, 'n_range': [1, 5, 10, 20, 40]},
    },
    'paper': {
        'detect': {'pfa': 1e-3, 'calib_trials': 100000, 'trials_pd': 2000},
        'influence': {'m': 50, 'repeats': 1000, 'n_range': list(range(1, 41))},
    },
}


@dataclass(frozen=True)
class ClutterSection:
    cnr_db: float = 20.
    rho: float = 0.9
    fc: float = 0.2
    shape_alpha: float = 4.
    scale_beta: float = 3.
    texture_on: bool = True

    def build(self, n: int) -> ClutterParams:
        return ClutterParams(n=n, **dataclasses.asdict(self))


@dataclass(frozen=True)
class SteeringSection:
    mode: str = 'ideal'
    fd: float = 0.2
    theta_mis_deg: float = 0.
    orthogonal_draw_seed: int = 0

    def build(self, n: int) -> SteeringSpec:
        return SteeringSpec(n=n, **dataclasses.asdict(self))


@dataclass(frozen=True)
class InterferenceSection:
    enabled: bool = True
    fi: float = 0.2
    inr_db: float = 10.
    count: int = 2

    def build(self) -> Optional[Interference]:
        if not self.enabled:
            return None
        return Interference(fi=self.fi, inr_db=self.inr_db, count=self.count)


@dataclass(frozen=True)
class SolverSection:
    tol: float = 1e-5
    max_iter: int = 500
    bw_method: str = 'rgd'

    def build(self) -> SolverConfig:
        if self.bw_method not in BW_METHODS:
            raise InvalidInput(f'bw_method must be one of {BW_METHODS}, got {self.bw_method!r}')
        return SolverConfig(tol=self.tol, max_iter=self.max_iter, bw_method=self.bw_method)


@dataclass(frozen=True)
class DetectSection:
    """ Detection experiments; every grid is kept, the sweep picks one.

    Attributes:
        m (int, optional): Secondary snapshots, N if None.
        calib_trials (int, optional): ceil(100 / pfa) if None.
        scr_db (float): SCR of the fd and mismatch sweeps.
    """
    n: int = 8
    m: Optional[int] = None
    pfa: float = 1e-2
    trials_pd: int = 200
    calib_trials: Optional[int] = None
    scr_db: float = 25.
    scr_grid_db: Tuple[float, ...] = (10., 12.5, 15., 17.5, 20., 22.5, 25.)
    fd_grid: Tuple[float, ...] = tuple(k / 21 for k in range(21))
    theta_grid: Tuple[float, ...] = (1., 15., 30.)
    detectors: Tuple[str, ...] = tuple(d.name for d in default_detectors())
    clutter: ClutterSection = field(default_factory=ClutterSection)
    steering: SteeringSection = field(default_factory=SteeringSection)
    interference: InterferenceSection = field(default_factory=InterferenceSection)
    solver: SolverSection = field(default_factory=lambda: SolverSection(tol=1e-3))

    def scenario(self, sweep: str, seed: int) -> ScenarioConfig:
        """ ScenarioConfig whose only axis is the grid of sweep.
        """
        if sweep not in SWEEPS:
            raise ConfigError('sweep', f'must be one of {SWEEPS}, got {sweep!r}')
        grid_name = {'scr': 'scr_grid_db', 'fd': 'fd_grid', 'mismatch': 'theta_grid'}[sweep]
        grid = getattr(self, grid_name)
        if not grid:
            raise ConfigError(f'detect.{grid_name}', f'the {sweep} sweep needs a nonempty grid')
        detectors = []
        for i, name in enumerate(self.detectors):
            try:
                detectors.append(DetectorSpec.parse(name))
            except InvalidInput as err:
                raise ConfigError(f'detect.detectors[{i}]', str(err)) from None
        axes = {'scr_grid_db': (), 'fd_grid': (), 'theta_grid': ()}
        axes[grid_name] = tuple(grid)
        try:
            return ScenarioConfig(
                n=self.n, m=self.n if self.m is None else self.m,
                clutter=self.clutter.build(self.n), steering=self.steering.build(self.n),
                interference=self.interference.build(), pfa=self.pfa, trials_pd=self.trials_pd,
                calib_trials=self.calib_trials, detectors=tuple(detectors), scr_db=self.scr_db,
                master_seed=seed, solver=self.solver.build(), **axes,
            )
        except InvalidInput as err:
            raise ConfigError('detect', str(err)) from None


@dataclass(frozen=True)
class InfluenceSection:
    """ Influence experiments, one per entry of averagings.
    """
    n: int = 8
    m: int = 50
    n_range: Tuple[int, ...] = (1, 5, 10, 20, 40)
    repeats: int = 100
    averagings: Tuple[str, ...] = ('AIRM:mean', 'AIRM:median', 'LE:mean', 'LE:median',
                                   'BW:mean', 'BW:median')
    fd: float = 0.2
    scr_db: float = 40.
    fix_clean: bool = False
    clutter: ClutterSection = field(default_factory=lambda: ClutterSection(texture_on=False))
    solver: SolverSection = field(default_factory=SolverSection)

    def specs(self, seed: int) -> Tuple[ContaminationSpec, ...]:
        if not self.averagings:
            raise ConfigError('influence.averagings', 'at least one averaging is required')
        out = []
        for i, name in enumerate(self.averagings):
            try:
                averaging = parse_averaging(name)
            except (InvalidInput, ValueError) as err:
                raise ConfigError(f'influence.averagings[{i}]', str(err)) from None
            try:
                model = OutlierModel(fd=self.fd, scr_db=self.scr_db, clutter=self.clutter.build(self.n))
                out.append(ContaminationSpec(
                    m=self.m, n_range=self.n_range, outlier_model=model, averaging=averaging,
                    repeats=self.repeats, master_seed=seed, fix_clean=self.fix_clean,
                    solver=self.solver.build(),
                ))
            except InvalidInput as err:
                raise ConfigError('influence', str(err)) from None
        return tuple(out)


@dataclass(frozen=True)
class BenchSection:
    """ BW mean solver benchmark; ordering_instances > 0 adds the ordering study.
    """
    m: int = 10
    n: int = 8
    tol: float = 1e-5
    max_iter: int = 500
    ordering_instances: int = 0

    def __post_init__(self):
        if self.m < 2 or self.n < 1:
            raise InvalidInput('bench needs m >= 2 matrices of dimension n >= 1')
        if not self.tol > 0. or self.max_iter < 1 or self.ordering_instances < 0:
            raise InvalidInput('bench tol, max_iter and ordering_instances are out of range')


@dataclass(frozen=True)
class RunConfig:
    """ Everything a command needs.

    Attributes:
        seed (int): Master seed, 0 <= seed < 2^64.
        workers (int): Thread cap; outputs do not depend on it.
        out (str): Output directory.
    """
    seed: int = 0
    workers: int = 1
    out: str = 'results'
    detect: DetectSection = field(default_factory=DetectSection)
    influence: InfluenceSection = field(default_factory=InfluenceSection)
    bench: BenchSection = field(default_factory=BenchSection)

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidInput(f'seed must be an unsigned 64-bit integer, got {self.seed}')
        if self.workers < 1:
            raise InvalidInput(f'workers must be at least 1, got {self.workers}')

    def hash_document(self) -> dict:
        """ The configuration that determines results (workers and out excluded).
        """
        doc = to_plain(self)
        doc.pop('workers')
        doc.pop('out')
        return doc

    @property
    def config_hash(self) -> str:
        return config_hash(self.hash_document())


def _join(path: str, key) -> str:
    if isinstance(key, int):
        return f'{path}[{key}]'
    return f'{path}.{key}' if path else str(key)


def _convert(tp, value, path: str):
    origin, args = typing.get_origin(tp), typing.get_args(tp)
    if origin is typing.Union:
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _convert(inner[0], value, path)
    if dataclasses.is_dataclass(tp):
        return from_document(tp, value, path)
    if origin in (tuple, list):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(path, f'expected a list, got {type(value).__name__}')
        return tuple(_convert(args[0], v, _join(path, i)) for i, v in enumerate(value))
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f'expected true or false, got {value!r}')
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f'expected an integer, got {value!r}')
        return value
    if tp is float:
        # YAML 1.1 reads 1e-3 (no dot) as a string.
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                raise ConfigError(path, f'expected a number, got {value!r}') from None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f'expected a number, got {value!r}')
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(path, f'expected a string, got {value!r}')
        return value
    raise ConfigError(path, f'unsupported field type {tp}')


def from_document(cls, doc, path: str = ''):
    """ Builds the dataclass cls from a mapping, rejecting unknown keys.

    Args:
        cls (type): Frozen dataclass of the schema.
        doc (dict): Parsed YAML mapping; None is an empty mapping.
        path (str): Dotted path of doc in the full document.

    Returns:
        cls instance.

    Raises:
        ConfigError: with the dotted path of the first offending field.
    """
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(path, f'expected a mapping, got {type(doc).__name__}')
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(str(k) for k in doc if k not in names)
    if unknown:
        raise ConfigError(_join(path, unknown[0]), 'unknown key')
    kwargs = {f.name: _convert(hints[f.name], doc[f.name], _join(path, f.name))
              for f in dataclasses.fields(cls) if f.name in doc}
    try:
        return cls(**kwargs)
    except InvalidInput as err:
        raise ConfigError(path, str(err)) from None


def merge(base: dict, overlay: dict) -> dict:
    """ Recursive dict merge; overlay wins, base is not modified.
    """
    out = copy.deepcopy(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def read_document(path: str) -> dict:
    """ Parses a YAML configuration file; empty and non-mapping documents are errors.
    """
    try:
        with open(path) as y:
            doc = yaml.safe_load(y.read())
    except OSError as err:
        raise ConfigError('', f'cannot read {path}: {err.strerror}') from None
    except yaml.YAMLError as err:
        raise ConfigError('', f'cannot parse {path}: {err}') from None
    if doc is None:
        raise ConfigError('', f'{path} is empty')
    if not isinstance(doc, dict):
        raise ConfigError('', f'{path} must hold a mapping at the top level')
    return doc


def load_config(path: Optional[str] = None, preset: str = 'desk',
                overrides: Optional[dict] = None) -> RunConfig:
    """ Effective configuration: preset < file < overrides.

    Args:
        path (str, optional): YAML file.
        preset (str): 'desk' or 'paper'.
        overrides (dict, optional): Partial document from command line flags.

    Returns:
        RunConfig: Validated configuration.
    """
    if preset not in PRESETS:
        raise ConfigError('preset', f'must be one of {sorted(PRESETS)}, got {preset!r}')
    doc = PRESETS[preset]
    if path is not None:
        doc = merge(doc, read_document(path))
    if overrides:
        doc = merge(doc, overrides)
    return from_document(RunConfig, doc)


def dump(cfg: RunConfig) -> str:
    """ YAML text of the effective configuration.
    """
    return yaml.safe_dump(to_plain(cfg), sort_keys=True, default_flow_style=False)
