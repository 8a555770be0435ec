""" Riemannian geometries of the HPD manifold.

Each geometry is a Metric subclass whose methods work on raw arrays: the base
point is a single N x N matrix, the second argument may carry leading batch
dimensions. The module-level functions validate typed inputs and dispatch on
MetricKind.
"""
import enum
from typing import Union

import jax.numpy as jnp
from jax import jit

from hpdcfar.errors import DomainError, InvalidInput
from hpdcfar.kernel import check_same_dim
from hpdcfar.operations.matfuncs import (
    dexpm, dlogm, eigvalsh, expm_h, frobenius, frobenius_inner, hermitize,
    invm_h, logm_h, lyapunov, powm_h, sqrt_pair, sqrtm_h
)
from hpdcfar.primitives import HermitianMatrix, HpdMatrix, MatrixLike, as_hermitian, as_hpd


class MetricKind(enum.Enum):
    """ Geometry used for distances and averaging.
    """
    AIRM = 'AIRM'
    LE = 'LE'
    BW = 'BW'
    EUCLIDEAN = 'Euclidean'

    @classmethod
    def parse(cls, value: Union[str, 'MetricKind']) -> 'MetricKind':
        """ Accepts an enum member or its name/value, case-insensitively.
        """
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for kind in cls:
            if key in (kind.name.lower(), kind.value.lower()):
                return kind
        raise InvalidInput(f'unknown metric {value!r}')


def _trace(a: jnp.ndarray) -> jnp.ndarray:
    return jnp.real(jnp.trace(a, axis1=-2, axis2=-1))


# --- AIRM -------------------------------------------------------------------

@jit
def _airm_distance(p, q):
    _, si = sqrt_pair(p)
    w = eigvalsh(si @ q @ si)
    return jnp.sqrt(jnp.sum(jnp.log(w) ** 2, axis=-1))


@jit
def _airm_log(p, q):
    s, si = sqrt_pair(p)
    return hermitize(s @ logm_h(si @ q @ si) @ s)


@jit
def _airm_exp(p, v):
    s, si = sqrt_pair(p)
    return hermitize(s @ expm_h(si @ v @ si) @ s)


@jit
def _airm_geodesic(p1, p2, t):
    s, si = sqrt_pair(p1)
    return hermitize(s @ powm_h(si @ p2 @ si, t) @ s)


@jit
def _airm_inner(p, a, b):
    pinv = invm_h(p)
    return _trace(pinv @ a @ pinv @ b)


# --- LE ---------------------------------------------------------------------

@jit
def _le_distance(p, q):
    return frobenius(logm_h(q) - logm_h(p))


@jit
def _le_log(p, q):
    lp = logm_h(p)
    return dexpm(lp, logm_h(q) - lp)


@jit
def _le_exp(p, v):
    return expm_h(logm_h(p) + dlogm(p, v))


@jit
def _le_geodesic(p1, p2, t):
    return expm_h((1. - t) * logm_h(p1) + t * logm_h(p2))


@jit
def _le_inner(p, a, b):
    return frobenius_inner(dlogm(p, a), dlogm(p, b))


# --- BW ---------------------------------------------------------------------

@jit
def bw_transport(p, q):
    """ P^{-1} # Q, the optimal transport map from P to Q.

    Args:
        p (jnp.ndarray): N x N HPD matrix.
        q (jnp.ndarray): (..., N, N) HPD matrices.

    Returns:
        jnp.ndarray: (..., N, N) HPD matrices.
    """
    s, si = sqrt_pair(p)
    return hermitize(si @ sqrtm_h(s @ q @ s) @ si)


@jit
def _bw_distance(p, q):
    s, _ = sqrt_pair(p)
    w = jnp.clip(eigvalsh(s @ q @ s), 0., None)
    d2 = _trace(p) + _trace(q) - 2. * jnp.sum(jnp.sqrt(w), axis=-1)
    return jnp.sqrt(jnp.clip(d2, 0., None))


@jit
def _bw_log(p, q):
    m = bw_transport(p, q)
    return hermitize(p @ m + m @ p - 2. * p)


@jit
def _bw_exp_factor(p, v):
    n = p.shape[-1]
    return jnp.eye(n, dtype=p.dtype) + lyapunov(p, v)


@jit
def _bw_exp(p, v):
    f = _bw_exp_factor(p, v)
    return hermitize(f @ p @ f)


@jit
def _bw_geodesic(p1, p2, t):
    m = bw_transport(p1, p2)
    return hermitize(
        (1. - t) ** 2 * p1 + t ** 2 * p2 + t * (1. - t) * (p1 @ m + m @ p1)
    )


@jit
def _bw_inner(p, a, b):
    return 0.5 * _trace(lyapunov(p, a) @ b)


@jit
def _bw_grad_sq_dist(pref, r):
    n = r.shape[-1]
    g = jnp.eye(n, dtype=r.dtype) - bw_transport(r, pref)
    return hermitize(2. * (r @ g + g @ r))


# --- Euclidean --------------------------------------------------------------

@jit
def _euclidean_distance(p, q):
    return frobenius(q - p)


class Metric(object):
    """ Base class: a Riemannian geometry on HPD matrices. Subclasses fill in
        the array kernels.
    """
    kind = None

    def distance(self, p: jnp.ndarray, q: jnp.ndarray) -> jnp.ndarray:
        raise NotImplementedError

    def log(self, p: jnp.ndarray, q: jnp.ndarray) -> jnp.ndarray:
        """ Logarithm map at p toward q.
        """
        raise NotImplementedError

    def exp(self, p: jnp.ndarray, v: jnp.ndarray) -> jnp.ndarray:
        """ Exponential map at p along v, unchecked.
        """
        raise NotImplementedError

    def geodesic(self, p1: jnp.ndarray, p2: jnp.ndarray, t: float) -> jnp.ndarray:
        raise NotImplementedError

    def inner(self, p: jnp.ndarray, a: jnp.ndarray, b: jnp.ndarray) -> jnp.ndarray:
        """ Metric inner product <a, b>_p.
        """
        raise NotImplementedError

    def grad_sq_dist(self, pref: jnp.ndarray, r: jnp.ndarray) -> jnp.ndarray:
        """ Riemannian gradient at r of r -> d^2(pref, r). pref may be batched.
        """
        return -2. * self.log(r, pref)

    def exp_checked(self, p: jnp.ndarray, v: jnp.ndarray) -> jnp.ndarray:
        """ Exponential map that raises DomainError when the result is not HPD.
        """
        out = self.exp(p, v)
        w = eigvalsh(out)
        lo = float(jnp.min(w))
        if not bool(jnp.all(jnp.isfinite(w))) or lo <= 0.:
            raise DomainError(f'{self.kind.value} exponential left the HPD cone', eigenvalue=lo)
        return out


class AIRM(Metric):
    """ Affine invariant metric <A, B>_P = tr(P^-1 A P^-1 B).
    """
    kind = MetricKind.AIRM

    def distance(self, p, q):
        return _airm_distance(p, q)

    def log(self, p, q):
        return _airm_log(p, q)

    def exp(self, p, v):
        return _airm_exp(p, v)

    def geodesic(self, p1, p2, t):
        return _airm_geodesic(p1, p2, t)

    def inner(self, p, a, b):
        return _airm_inner(p, a, b)


class LogEuclidean(Metric):
    """ Log-Euclidean metric <V1, V2>_P = <D_P Log V1, D_P Log V2>_F.
    """
    kind = MetricKind.LE

    def distance(self, p, q):
        return _le_distance(p, q)

    def log(self, p, q):
        return _le_log(p, q)

    def exp(self, p, v):
        return _le_exp(p, v)

    def geodesic(self, p1, p2, t):
        return _le_geodesic(p1, p2, t)

    def inner(self, p, a, b):
        return _le_inner(p, a, b)


class BuresWasserstein(Metric):
    """ Bures-Wasserstein metric <A, B>_P = tr(L_P[A] B) / 2.
    """
    kind = MetricKind.BW

    def distance(self, p, q):
        return _bw_distance(p, q)

    def log(self, p, q):
        return _bw_log(p, q)

    def exp(self, p, v):
        return _bw_exp(p, v)

    def exp_checked(self, p, v):
        # (I + L_P[V]) P (I + L_P[V]) is HPD iff the factor is nonsingular.
        w = eigvalsh(_bw_exp_factor(p, v))
        lo = float(jnp.min(w))
        if not bool(jnp.all(jnp.isfinite(w))) or lo <= 0.:
            raise DomainError('BW exponential left the HPD cone: I + L_P[V] is not '
                              f'positive definite (smallest eigenvalue {lo:.3e})', eigenvalue=lo)
        return self.exp(p, v)

    def geodesic(self, p1, p2, t):
        return _bw_geodesic(p1, p2, t)

    def inner(self, p, a, b):
        return _bw_inner(p, a, b)

    def grad_sq_dist(self, pref, r):
        return _bw_grad_sq_dist(pref, r)


class Euclidean(Metric):
    """ Flat Frobenius geometry; its mean is the arithmetic mean.
    """
    kind = MetricKind.EUCLIDEAN

    def distance(self, p, q):
        return _euclidean_distance(p, q)

    def log(self, p, q):
        return q - p

    def exp(self, p, v):
        return p + v

    def geodesic(self, p1, p2, t):
        return (1. - t) * p1 + t * p2

    def inner(self, p, a, b):
        return frobenius_inner(a, b)


metric_map = {
    MetricKind.AIRM: AIRM(),
    MetricKind.LE: LogEuclidean(),
    MetricKind.BW: BuresWasserstein(),
    MetricKind.EUCLIDEAN: Euclidean(),
}


def get_metric(kind: Union[str, MetricKind]) -> Metric:
    return metric_map[MetricKind.parse(kind)]


def distance(kind: Union[str, MetricKind], p1: MatrixLike, p2: MatrixLike) -> float:
    """ Geodesic distance between two HPD matrices.

    Args:
        kind (MetricKind): Geometry.
        p1 (MatrixLike): HPD matrix.
        p2 (MatrixLike): HPD matrix of the same dimension.

    Returns:
        float: d(P1, P2) >= 0.
    """
    metric = get_metric(kind)
    p1, p2 = as_hpd(p1), as_hpd(p2)
    check_same_dim(p1, p2)
    return float(metric.distance(p1(), p2()))


def geodesic(kind: Union[str, MetricKind], p1: MatrixLike, p2: MatrixLike, t: float) -> HpdMatrix:
    """ Point at parameter t in [0, 1] on the geodesic from P1 to P2.
    """
    metric = get_metric(kind)
    p1, p2 = as_hpd(p1), as_hpd(p2)
    check_same_dim(p1, p2)
    t = float(t)
    if not 0. <= t <= 1.:
        raise InvalidInput(f'geodesic parameter must lie in [0, 1], got {t}')
    return HpdMatrix(metric.geodesic(p1(), p2(), t))


def exp_map(kind: Union[str, MetricKind], p: MatrixLike, v: MatrixLike) -> HpdMatrix:
    """ Riemannian exponential map at P along the tangent vector V.

    Raises:
        DomainError: the BW (or Euclidean) result leaves the HPD cone.
    """
    metric = get_metric(kind)
    p, v = as_hpd(p), as_hermitian(v)
    check_same_dim(p, v)
    return HpdMatrix(metric.exp_checked(p(), v()))


def log_map(kind: Union[str, MetricKind], p1: MatrixLike, p2: MatrixLike) -> HermitianMatrix:
    """ Riemannian logarithm map at P1 toward P2.
    """
    metric = get_metric(kind)
    p1, p2 = as_hpd(p1), as_hpd(p2)
    check_same_dim(p1, p2)
    return HermitianMatrix(metric.log(p1(), p2()))


def grad_sq_dist(kind: Union[str, MetricKind], pref: MatrixLike, r: MatrixLike) -> HermitianMatrix:
    """ Riemannian gradient at R of R -> d^2(Pref, R).
    """
    metric = get_metric(kind)
    pref, r = as_hpd(pref), as_hpd(r)
    check_same_dim(pref, r)
    return HermitianMatrix(metric.grad_sq_dist(pref(), r()))


def inner_product(kind: Union[str, MetricKind], p: MatrixLike, a: MatrixLike, b: MatrixLike) -> float:
    """ Metric inner product of two tangent vectors at P.
    """
    metric = get_metric(kind)
    p, a, b = as_hpd(p), as_hermitian(a), as_hermitian(b)
    check_same_dim(p, a, b)
    return float(metric.inner(p(), a(), b()))


def tangent_norm(kind: Union[str, MetricKind], p: MatrixLike, v: MatrixLike) -> float:
    """ Metric norm of a tangent vector at P.
    """
    return max(inner_product(kind, p, v, v), 0.) ** 0.5
