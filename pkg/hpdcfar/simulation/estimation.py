""" Covariance estimators: Toeplitz autocovariance of one snapshot and the
sample covariance matrix of several.
"""
from typing import Sequence

import jax.numpy as jnp
from jax import jit

from hpdcfar.errors import InvalidInput
from hpdcfar.operations.matfuncs import eigvalsh, hermitize
from hpdcfar.primitives import HpdMatrix

# Relative diagonal loading delta; applied when lambda_min < delta * tr / N.
LOAD_DELTA = 1e-6


def _as_snapshots(x) -> jnp.ndarray:
    x = jnp.asarray(x, dtype=jnp.complex128)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise InvalidInput('snapshot must be a nonempty vector')
    if not bool(jnp.all(jnp.isfinite(x))):
        raise InvalidInput('snapshot has non-finite entries')
    return x


@jit
def load(a: jnp.ndarray) -> jnp.ndarray:
    """ Adds delta * (tr A / N) * I where lambda_min(A) < delta * tr A / N.

    Args:
        a (jnp.ndarray): (..., N, N) Hermitian PSD matrices.

    Returns:
        jnp.ndarray: Loaded matrices.
    """
    n = a.shape[-1]
    level = jnp.maximum(jnp.real(jnp.trace(a, axis1=-2, axis2=-1)) / n, jnp.finfo(jnp.float64).tiny)
    floor = LOAD_DELTA * level
    need = eigvalsh(a)[..., 0] < floor
    eye = jnp.eye(n, dtype=a.dtype)
    return a + jnp.where(need, floor, 0.)[..., None, None] * eye


@jit
def autocorr_array(x: jnp.ndarray) -> jnp.ndarray:
    """ r_k = (1/N) sum_l x_l conj(x_{l+k}), k = 0..N-1, over the last axis.
    """
    n = x.shape[-1]
    lags = [jnp.sum(x[..., :n - k] * jnp.conj(x[..., k:]), axis=-1) for k in range(n)]
    return jnp.stack(lags, axis=-1) / n


@jit
def toeplitz_array(x: jnp.ndarray) -> jnp.ndarray:
    """ Loaded Hermitian Toeplitz matrices R(i, j) = r_{i-j}, conjugated above
        the diagonal, for (..., N) snapshots.
    """
    r = autocorr_array(x)
    n = x.shape[-1]
    idx = jnp.arange(n)
    lag = idx[:, None] - idx[None, :]
    vals = r[..., jnp.abs(lag)]
    t = jnp.where(lag >= 0, vals, jnp.conj(vals))
    return load(hermitize(t))


@jit
def scm_array(xs: jnp.ndarray) -> jnp.ndarray:
    """ Loaded (1/m) sum x_i x_i^H over the second-to-last axis.
    """
    m = xs.shape[-2]
    s = jnp.einsum('...ki,...kj->...ij', xs, jnp.conj(xs)) / m
    return load(hermitize(s))


def autocorr_estimate(x: jnp.ndarray) -> jnp.ndarray:
    """ Biased autocorrelation estimate of one snapshot.

    Args:
        x (jnp.ndarray): N complex samples.

    Returns:
        jnp.ndarray: r_0 .. r_{N-1}; r_0 = |x|^2 / N.
    """
    return autocorr_array(_as_snapshots(x))


def toeplitz_cov(x: jnp.ndarray) -> HpdMatrix:
    """ Toeplitz autocovariance matrix of the snapshot x.
    """
    x = _as_snapshots(x)
    if x.ndim != 1:
        raise InvalidInput(f'expected one snapshot, got shape {x.shape}')
    return HpdMatrix(toeplitz_array(x))


def scm(snapshots: Sequence[jnp.ndarray]) -> HpdMatrix:
    """ Sample covariance matrix (1/m) sum x_i x_i^H, loaded when singular.

    Args:
        snapshots (Sequence): m >= 1 snapshots of length N, or an (m, N) array.

    Returns:
        HpdMatrix: The estimate.
    """
    if len(snapshots) == 0:
        raise InvalidInput('sample covariance needs at least one snapshot')
    xs = _as_snapshots(jnp.stack([jnp.asarray(x) for x in snapshots]))
    return HpdMatrix(scm_array(xs))
