""" Detection experiment description and its reproducibility hash.
"""
import dataclasses
import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from hpdcfar.averaging.config import SolverConfig, Statistic
from hpdcfar.detectors import DetectorKind, DetectorSpec
from hpdcfar.errors import InvalidInput
from hpdcfar.metrics import MetricKind
from hpdcfar.simulation.clutter import ClutterParams, Interference
from hpdcfar.simulation.steering import SteeringSpec

# Stream id of Pd trial k at axis point j is (j + 1) * POINT_STRIDE + k;
# calibration trial k uses stream id k.
POINT_STRIDE = 10 ** 7


def default_detectors() -> Tuple[DetectorSpec, ...]:
    specs = [DetectorSpec(DetectorKind.AMF), DetectorSpec(DetectorKind.ANMF)]
    for kind in (MetricKind.AIRM, MetricKind.LE, MetricKind.BW):
        for statistic in Statistic:
            specs.append(DetectorSpec(DetectorKind.MATRIX_CFAR, kind, statistic))
    return tuple(specs)


def calib_stream(trial: int) -> int:
    return trial


def pd_stream(point: int, trial: int) -> int:
    return (point + 1) * POINT_STRIDE + trial


@dataclass(frozen=True)
class ScenarioConfig:
    """ One detection experiment.

    Attributes:
        n (int): Pulses N.
        m (int): Secondary snapshots per trial.
        clutter (ClutterParams): Clutter statistics (clutter.n == n).
        steering (SteeringSpec): Target model (steering.n == n).
        interference (Interference, optional): Interference in secondary data.
        pfa (float): False-alarm rate in (0, 1).
        trials_pd (int): H1 trials per axis point.
        calib_trials (int, optional): H0 calibration trials, ceil(100/pfa) if None.
        detectors (tuple): DetectorSpec entries.
        scr_grid_db (tuple): SCR axis; exactly one of the three axes is nonempty.
        fd_grid (tuple): Target Doppler axis.
        theta_grid (tuple): Mismatch angle axis (degrees).
        scr_db (float): SCR of the fd and mismatch sweeps.
        master_seed (int): Seed of every trial stream.
        solver (SolverConfig): Controls of the per-trial averaging.
    """
    n: int = 8
    m: int = 8
    clutter: ClutterParams = field(default_factory=ClutterParams)
    steering: SteeringSpec = field(default_factory=SteeringSpec)
    interference: Optional[Interference] = field(default_factory=Interference)
    pfa: float = 1e-2
    trials_pd: int = 200
    calib_trials: Optional[int] = None
    detectors: Tuple[DetectorSpec, ...] = field(default_factory=default_detectors)
    scr_grid_db: Tuple[float, ...] = ()
    fd_grid: Tuple[float, ...] = ()
    theta_grid: Tuple[float, ...] = ()
    scr_db: float = 25.
    master_seed: int = 0
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(tol=1e-3))

    def __post_init__(self):
        if not 0. < self.pfa < 1.:
            raise InvalidInput(f'pfa must lie in (0, 1), got {self.pfa}')
        if self.calib_trials is None:
            object.__setattr__(self, 'calib_trials', math.ceil(100. / self.pfa - 1e-9))
        if self.calib_trials < math.ceil(1. / self.pfa - 1e-9):
            raise InvalidInput(f'calib_trials must be at least ceil(1/pfa), got {self.calib_trials}')
        if self.m < 1 or self.trials_pd < 1:
            raise InvalidInput('m and trials_pd must be positive')
        if max(self.calib_trials, self.trials_pd) > POINT_STRIDE:
            raise InvalidInput(f'trial counts are limited to {POINT_STRIDE} per phase')
        if self.clutter.n != self.n or self.steering.n != self.n:
            raise InvalidInput(f'clutter and steering must both have N={self.n}')
        if self.interference is not None and self.interference.count > self.m:
            raise InvalidInput(f'interference count {self.interference.count} exceeds m={self.m}')
        if not self.detectors:
            raise InvalidInput('at least one detector is required')
        axes = [a for a in (self.scr_grid_db, self.fd_grid, self.theta_grid) if len(a)]
        if len(axes) != 1:
            raise InvalidInput('exactly one of scr_grid_db, fd_grid, theta_grid must be nonempty')
        if any(not 0. <= fd < 1. for fd in self.fd_grid):
            raise InvalidInput('fd_grid values must lie in [0, 1)')
        if any(not 0. <= t <= 90. for t in self.theta_grid):
            raise InvalidInput('theta_grid values must lie in [0, 90]')

    @property
    def axis(self) -> Tuple[str, Tuple[float, ...]]:
        """ (name, values) of the nonempty sweep axis.
        """
        if self.scr_grid_db:
            return 'scr_db', tuple(self.scr_grid_db)
        if self.fd_grid:
            return 'fd', tuple(self.fd_grid)
        return 'theta_deg', tuple(self.theta_grid)

    def to_dict(self) -> dict:
        return to_plain(self)

    @property
    def config_hash(self) -> str:
        return config_hash(self.to_dict())


def to_plain(obj):
    """ JSON-ready view of nested dataclasses, enums and tuples.
    """
    if isinstance(obj, DetectorSpec):
        return obj.name
    if dataclasses.is_dataclass(obj):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.compare or getattr(obj, f.name) is not None}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if hasattr(obj, 'tolist'):
        return obj.tolist()
    return obj


def config_hash(document: dict) -> str:
    """ First 16 hex digits of SHA-256 over the canonical JSON of document.
    """
    canonical = json.dumps(to_plain(document), sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]
