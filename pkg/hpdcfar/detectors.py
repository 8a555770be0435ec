""" Detection statistics and threshold decisions.

AMF and ANMF whiten with the sample covariance of the secondary data; the
matrix-CFAR statistic is the geodesic distance between a geometric average of
the secondary Toeplitz covariances and the CUT covariance; the geometric AMF
runs the AMF with that average in place of the SCM.
"""
import enum
from dataclasses import dataclass
from typing import Optional, Union

import jax.numpy as jnp
from jax import jit

from hpdcfar.averaging.config import Statistic
from hpdcfar.errors import InvalidInput
from hpdcfar.kernel import check_same_dim
from hpdcfar.metrics import MetricKind, distance
from hpdcfar.primitives import MatrixLike, as_hpd
from hpdcfar.simulation.clutter import Hypothesis


class DetectorKind(enum.Enum):
    AMF = 'AMF'
    ANMF = 'ANMF'
    MATRIX_CFAR = 'MatrixCFAR'
    GEOMETRIC_AMF = 'GeometricAMF'


@dataclass(frozen=True)
class DetectorSpec:
    """ A detector, with its averaging choice when it needs one.

    Attributes:
        kind (DetectorKind): Detector family.
        metric (MetricKind, optional): Geometry for MatrixCFAR / GeometricAMF.
        statistic (Statistic, optional): mean or median for those two.
    """
    kind: DetectorKind
    metric: Optional[MetricKind] = None
    statistic: Optional[Statistic] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', DetectorKind(self.kind))
        if self.kind in (DetectorKind.AMF, DetectorKind.ANMF):
            if self.metric is not None or self.statistic is not None:
                raise InvalidInput(f'{self.kind.value} takes no averaging choice')
            return
        if self.metric is None or self.statistic is None:
            raise InvalidInput(f'{self.kind.value} needs a metric and a statistic')
        object.__setattr__(self, 'metric', MetricKind.parse(self.metric))
        object.__setattr__(self, 'statistic', Statistic.parse(self.statistic))

    @classmethod
    def parse(cls, text: str) -> 'DetectorSpec':
        """ 'AMF', 'ANMF', 'MatrixCFAR:BW:mean' or 'GeometricAMF:AIRM:median'.
        """
        parts = [p.strip() for p in str(text).split(':')]
        try:
            kind = DetectorKind(parts[0])
        except ValueError:
            raise InvalidInput(f'unknown detector {parts[0]!r}') from None
        if len(parts) == 1:
            return cls(kind)
        if len(parts) != 3:
            raise InvalidInput(f"detector must read 'Kind:metric:statistic', got {text!r}")
        return cls(kind, MetricKind.parse(parts[1]), Statistic.parse(parts[2]))

    @property
    def name(self) -> str:
        if self.metric is None:
            return self.kind.value
        return f'{self.kind.value}:{self.metric.value}:{self.statistic.value}'

    @property
    def averaging(self) -> Optional[tuple]:
        """ (metric, statistic) of the secondary-data average, if any.
        """
        if self.metric is None:
            return None
        return self.metric, self.statistic

    @property
    def uses_steering(self) -> bool:
        """ Whether the H0 statistic depends on the assumed steering vector.
        """
        return self.kind is not DetectorKind.MATRIX_CFAR


@dataclass(frozen=True)
class DetectionStatistic:
    """ A finite, non-negative test statistic value.
    """
    value: float
    detector: DetectorSpec

    def __post_init__(self):
        v = float(self.value)
        if not (jnp.isfinite(v) and v >= 0.):
            raise InvalidInput(f'detection statistic must be finite and >= 0, got {v}')


@jit
def _whitened(x, s, r):
    rinv_s = jnp.linalg.solve(r, s)
    num = jnp.abs(jnp.vdot(rinv_s, x)) ** 2
    ss = jnp.real(jnp.vdot(s, rinv_s))
    xx = jnp.real(jnp.vdot(x, jnp.linalg.solve(r, x)))
    return num, ss, xx


def _vectors(x, s, n):
    x = jnp.asarray(x, dtype=jnp.complex128)
    s = jnp.asarray(s, dtype=jnp.complex128)
    if x.shape != (n,) or s.shape != (n,):
        raise InvalidInput(f'snapshot and steering must have shape ({n},), got {x.shape} and {s.shape}')
    return x, s


def amf_stat(x: jnp.ndarray, s: jnp.ndarray, rhat: MatrixLike) -> float:
    """ |x^H R^-1 s|^2 / (s^H R^-1 s).

    Args:
        x (jnp.ndarray): CUT snapshot.
        s (jnp.ndarray): Assumed steering vector.
        rhat (MatrixLike): HPD covariance estimate.

    Returns:
        float: AMF statistic, >= 0.
    """
    rhat = as_hpd(rhat)
    x, s = _vectors(x, s, rhat.dim)
    num, ss, _ = _whitened(x, s, rhat())
    return float(num / ss)


def anmf_stat(x: jnp.ndarray, s: jnp.ndarray, rhat: MatrixLike) -> float:
    """ |x^H R^-1 s|^2 / ((x^H R^-1 x)(s^H R^-1 s)), in [0, 1].
    """
    rhat = as_hpd(rhat)
    x, s = _vectors(x, s, rhat.dim)
    if not bool(jnp.any(x != 0.)):
        raise InvalidInput('ANMF is undefined for a zero snapshot')
    num, ss, xx = _whitened(x, s, rhat())
    return float(jnp.clip(num / (ss * xx), 0., 1.))


def matrix_cfar_stat(rg: MatrixLike, rcut: MatrixLike, kind: Union[str, MetricKind]) -> float:
    """ d(R_g, R_CUT) under the chosen geometry.
    """
    rg, rcut = as_hpd(rg), as_hpd(rcut)
    check_same_dim(rg, rcut)
    return distance(kind, rg, rcut)


def geometric_amf_stat(x: jnp.ndarray, s: jnp.ndarray, rg: MatrixLike) -> float:
    """ AMF whitened by a geometric mean or median R_g.
    """
    return amf_stat(x, s, rg)


def decide(stat: Union[DetectionStatistic, float], gamma: float) -> Hypothesis:
    """ H1 iff the statistic strictly exceeds gamma.
    """
    value = stat.value if isinstance(stat, DetectionStatistic) else float(stat)
    return Hypothesis.H1 if value > gamma else Hypothesis.H0
