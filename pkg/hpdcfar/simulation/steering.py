""" Target steering vectors.
"""
import logging
from dataclasses import dataclass
from typing import Union

import jax
import jax.numpy as jnp

from hpdcfar.errors import InvalidInput, NumericalFailure
from hpdcfar.simulation.rng import RngStream, as_key, complex_normal

logger = logging.getLogger(__name__)

# Redraws allowed when the projected y degenerates.
MAX_REDRAWS = 10


def steering_ideal(n: int, fd: float) -> jnp.ndarray:
    """ (1/sqrt(N)) (1, e^{-i 2 pi fd}, ..., e^{-i 2 pi fd (N-1)}).

    Args:
        n (int): N >= 1 pulses.
        fd (float): Normalized Doppler frequency in [0, 1).

    Returns:
        jnp.ndarray: Unit-norm complex N-vector.
    """
    if int(n) < 1:
        raise InvalidInput(f'steering dimension must be positive, got {n}')
    if not 0. <= fd < 1.:
        raise InvalidInput(f'normalized Doppler must lie in [0, 1), got {fd}')
    k = jnp.arange(int(n))
    return jnp.exp(-2j * jnp.pi * fd * k) / jnp.sqrt(float(n))


def steering_mismatched(n: int, theta_mis_deg: float, rng: Union[RngStream, jnp.ndarray]) -> jnp.ndarray:
    """ (1/sqrt(N)) e^{i 2 pi} (e_1 cos(theta) + (y/|y|) sin(theta)), y ~ CN(0, I)
        projected orthogonal to e_1, so that |s^H e_1|^2 / |s|^2 = cos^2(theta).

    Args:
        n (int): N >= 2.
        theta_mis_deg (float): Mismatch angle in [0, 90] degrees.
        rng (RngStream): Stream for y.

    Returns:
        jnp.ndarray: Complex N-vector of norm 1/sqrt(N).
    """
    if int(n) < 2:
        raise InvalidInput(f'mismatched steering needs N >= 2, got {n}')
    if not 0. <= theta_mis_deg <= 90.:
        raise InvalidInput(f'mismatch angle must lie in [0, 90] degrees, got {theta_mis_deg}')
    n = int(n)
    theta = jnp.deg2rad(theta_mis_deg)
    e1 = jnp.zeros(n, dtype=jnp.complex128).at[0].set(1.)
    key = as_key(rng)
    for attempt in range(MAX_REDRAWS):
        key, sub = jax.random.split(key)
        y = complex_normal(sub, (n,)).at[0].set(0.)
        norm = float(jnp.linalg.norm(y))
        if norm >= 1e-12:
            break
        logger.debug('degenerate mismatch direction on attempt %d; redrawing', attempt + 1)
    else:
        raise NumericalFailure(f'mismatch direction degenerate after {MAX_REDRAWS} draws')
    # e^{i 2 pi} kept as written; it is one up to roundoff.
    phase = jnp.exp(2j * jnp.pi)
    return phase * (e1 * jnp.cos(theta) + (y / norm) * jnp.sin(theta)) / jnp.sqrt(float(n))


def nominal_direction(n: int) -> jnp.ndarray:
    """ e_1, the steering a detector assumes in the mismatch scenario.
    """
    return jnp.zeros(int(n), dtype=jnp.complex128).at[0].set(1.)


@dataclass(frozen=True)
class SteeringSpec:
    """ Target model.

    Attributes:
        n (int): Pulses N.
        mode (str): 'ideal' or 'mismatched'.
        fd (float): Target Doppler (ideal mode).
        theta_mis_deg (float): Mismatch angle (mismatched mode).
        orthogonal_draw_seed (int): Seed of the mismatch direction y.
    """
    n: int = 8
    mode: str = 'ideal'
    fd: float = 0.2
    theta_mis_deg: float = 0.
    orthogonal_draw_seed: int = 0

    def __post_init__(self):
        if self.mode not in ('ideal', 'mismatched'):
            raise InvalidInput(f"steering mode must be 'ideal' or 'mismatched', got {self.mode!r}")
        if not 0. <= self.fd < 1.:
            raise InvalidInput(f'normalized Doppler must lie in [0, 1), got {self.fd}')
        if not 0. <= self.theta_mis_deg <= 90.:
            raise InvalidInput(f'mismatch angle must lie in [0, 90] degrees, got {self.theta_mis_deg}')

    def target(self) -> jnp.ndarray:
        """ Steering vector carried by the H1 data.
        """
        if self.mode == 'ideal':
            return steering_ideal(self.n, self.fd)
        return steering_mismatched(
            self.n, self.theta_mis_deg, RngStream(self.orthogonal_draw_seed, 0)
        )

    def assumed(self) -> jnp.ndarray:
        """ Steering vector the AMF-type detectors match against.
        """
        if self.mode == 'ideal':
            return steering_ideal(self.n, self.fd)
        return nominal_direction(self.n)
