""" Compound-Gaussian clutter, interference and observation synthesis.

Clutter is c = sqrt(tau) z with speckle z ~ CN(0, Sigma) and texture
tau ~ Gamma(alpha, beta), which makes |c| K-distributed. Sigma is the
Toeplitz covariance Sigma_0 + I with
Sigma_0(i, j) = cnr * rho^|i-j| * e^{i 2 pi fc (i-j)}.
"""
import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import jax
import jax.numpy as jnp

from hpdcfar.errors import InvalidInput
from hpdcfar.operations.matfuncs import sqrtm_h
from hpdcfar.primitives import HpdMatrix, MatrixLike, as_hpd
from hpdcfar.simulation.rng import RngStream, as_key, complex_normal
from hpdcfar.simulation.steering import steering_ideal


class Hypothesis(enum.Enum):
    H0 = 'H0'
    H1 = 'H1'


def db_to_linear(db: float) -> float:
    return 0. if db == float('-inf') else 10. ** (db / 10.)


@dataclass(frozen=True)
class ClutterParams:
    """ Clutter statistics.

    Attributes:
        n (int): Pulses per snapshot, N >= 2.
        cnr_db (float): Clutter-to-noise ratio in dB; -inf disables clutter.
        rho (float): One-lag coefficient in (0, 1).
        fc (float): Normalized clutter Doppler in [0, 1).
        shape_alpha (float): Gamma texture shape.
        scale_beta (float): Gamma texture scale.
        texture_on (bool): False gives the Gaussian clutter benchmark.
    """
    n: int = 8
    cnr_db: float = 20.
    rho: float = 0.9
    fc: float = 0.2
    shape_alpha: float = 4.
    scale_beta: float = 3.
    texture_on: bool = True

    def __post_init__(self):
        if int(self.n) < 2:
            raise InvalidInput(f'clutter needs N >= 2 pulses, got {self.n}')
        if not 0. < self.rho < 1.:
            raise InvalidInput(f'one-lag coefficient must lie in (0, 1), got {self.rho}')
        if not 0. <= self.fc < 1.:
            raise InvalidInput(f'clutter Doppler must lie in [0, 1), got {self.fc}')
        if not (self.shape_alpha > 0. and self.scale_beta > 0.):
            raise InvalidInput('gamma shape and scale must be positive')

    @property
    def cnr_linear(self) -> float:
        return db_to_linear(self.cnr_db)

    @property
    def texture_mean(self) -> float:
        """ E[tau]: alpha * beta with texture, 1 without.
        """
        return self.shape_alpha * self.scale_beta if self.texture_on else 1.


@dataclass(frozen=True)
class Interference:
    """ Narrowband interference added to the first `count` secondary snapshots.
    """
    fi: float = 0.2
    inr_db: float = 10.
    count: int = 2

    def __post_init__(self):
        if not 0. <= self.fi < 1.:
            raise InvalidInput(f'interference Doppler must lie in [0, 1), got {self.fi}')
        if int(self.count) < 0:
            raise InvalidInput(f'interference count must be non-negative, got {self.count}')


@lru_cache(maxsize=64)
def _sigma(params: ClutterParams) -> jnp.ndarray:
    idx = jnp.arange(params.n)
    lag = idx[:, None] - idx[None, :]
    sigma0 = params.cnr_linear * params.rho ** jnp.abs(lag) * jnp.exp(2j * jnp.pi * params.fc * lag)
    return sigma0 + jnp.eye(params.n, dtype=jnp.complex128)


@lru_cache(maxsize=64)
def _sigma_sqrt(params: ClutterParams) -> jnp.ndarray:
    return sqrtm_h(_sigma(params))


def sigma_matrix(params: ClutterParams) -> HpdMatrix:
    """ Speckle covariance Sigma = Sigma_0 + I.

    Args:
        params (ClutterParams): Clutter statistics.

    Returns:
        HpdMatrix: Hermitian Toeplitz, diagonal cnr + 1.
    """
    return HpdMatrix(_sigma(params))


def clutter_covariance(params: ClutterParams) -> HpdMatrix:
    """ Second moment of the clutter, E[tau] * Sigma; the R of the SCR definition.
    """
    return HpdMatrix(params.texture_mean * _sigma(params))


def sample_clutter(params: ClutterParams, rng: Union[RngStream, jnp.ndarray],
                   size: Optional[int] = None) -> jnp.ndarray:
    """ c = sqrt(tau) Sigma^{1/2} w.

    Args:
        params (ClutterParams): Clutter statistics.
        rng (RngStream): Stream or raw key.
        size (int, optional): Number of independent snapshots; None for one.

    Returns:
        jnp.ndarray: (N,) or (size, N) complex snapshots.
    """
    shape = () if size is None else (int(size),)
    k_speckle, k_texture = jax.random.split(as_key(rng))
    w = complex_normal(k_speckle, shape + (params.n,))
    z = jnp.einsum('ij,...j->...i', _sigma_sqrt(params), w)
    if not params.texture_on:
        return z
    tau = jax.random.gamma(k_texture, params.shape_alpha, shape, dtype=jnp.float64) * params.scale_beta
    return jnp.sqrt(tau)[..., None] * z


def amplitude_from_scr(scr_db: float, s: jnp.ndarray, r: MatrixLike) -> float:
    """ |a| with SCR = |a|^2 s^H R^{-1} s.

    Args:
        scr_db (float): Signal-to-clutter ratio in dB.
        s (jnp.ndarray): Nonzero steering vector.
        r (MatrixLike): Clutter covariance R.

    Returns:
        float: sqrt(10^{scr_db/10} / (s^H R^{-1} s)).
    """
    s = jnp.asarray(s, dtype=jnp.complex128)
    r = as_hpd(r)
    if s.shape != (r.dim,):
        raise InvalidInput(f'steering has shape {s.shape}, expected ({r.dim},)')
    quad = float(jnp.real(jnp.vdot(s, jnp.linalg.solve(r(), s))))
    if not quad > 0.:
        raise InvalidInput('steering vector must be nonzero')
    return (db_to_linear(scr_db) / quad) ** 0.5


def make_observation(hypothesis: Hypothesis, params: ClutterParams, steering: jnp.ndarray,
                     scr_db: float, rng: Union[RngStream, jnp.ndarray]) -> jnp.ndarray:
    """ CUT snapshot: clutter under H0, a s + clutter under H1 (a real, >= 0).
    """
    c = sample_clutter(params, rng)
    if Hypothesis(hypothesis) is Hypothesis.H0:
        return c
    a = amplitude_from_scr(scr_db, steering, clutter_covariance(params))
    return a * jnp.asarray(steering, dtype=jnp.complex128) + c


def make_secondary_set(m: int, params: ClutterParams, interference: Optional[Interference],
                       rng: Union[RngStream, jnp.ndarray]) -> jnp.ndarray:
    """ m target-free snapshots; the first interference.count of them also
        carry b * steering_ideal(N, fi) with b set from inr_db like an SCR.

    Args:
        m (int): Number of snapshots, >= 1.
        params (ClutterParams): Clutter statistics.
        interference (Interference, optional): None for clean secondary data.
        rng (RngStream): Stream or raw key.

    Returns:
        jnp.ndarray: (m, N) complex snapshots.
    """
    if int(m) < 1:
        raise InvalidInput(f'secondary set needs m >= 1, got {m}')
    xs = sample_clutter(params, rng, size=int(m))
    if interference is None or interference.count == 0:
        return xs
    if interference.count > m:
        raise InvalidInput(f'interference count {interference.count} exceeds m={m}')
    v = steering_ideal(params.n, interference.fi)
    b = amplitude_from_scr(interference.inr_db, v, clutter_covariance(params))
    return xs.at[:interference.count].add(b * v)
