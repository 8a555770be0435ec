""" Counter-based random streams.

A stream is identified by (master_seed, stream_id) alone, so a trial draws the
same numbers whichever worker runs it and in whatever order.
"""
from typing import List, Union

import jax
import jax.numpy as jnp

from hpdcfar.errors import InvalidInput

_U32 = 2 ** 32


class RngStream(object):
    """ Key for one independent trial stream.
    """
    def __init__(self, master_seed: int, stream_id: int) -> None:
        """
        Args:
            master_seed (int): 0 <= seed < 2^64.
            stream_id (int): 0 <= id < 2^32, usually phase offset + trial index.

        Attributes:
            key (jnp.ndarray): fold_in(PRNGKey(master_seed), stream_id).
        """
        master_seed, stream_id = int(master_seed), int(stream_id)
        if not 0 <= master_seed < _U32 * _U32:
            raise InvalidInput(f'master seed must be an unsigned 64-bit integer, got {master_seed}')
        if not 0 <= stream_id < _U32:
            raise InvalidInput(f'stream id must fit in 32 bits, got {stream_id}')
        self.master_seed = master_seed
        self.stream_id = stream_id
        self.key = jax.random.fold_in(master_key(master_seed), stream_id)

    def __call__(self) -> jnp.ndarray:
        return self.key

    def __repr__(self) -> str:
        return f'RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})'

    def split(self, num: int) -> List[jnp.ndarray]:
        """ num independent sub-keys of this stream.
        """
        return list(jax.random.split(self.key, num))


def master_key(master_seed: int) -> jnp.ndarray:
    """ PRNGKey of a 64-bit seed: low word seeds the key, high word is folded in.
    """
    key = jax.random.PRNGKey(master_seed % _U32)
    return jax.random.fold_in(key, master_seed // _U32)


def as_key(rng: Union[RngStream, jnp.ndarray]) -> jnp.ndarray:
    return rng() if isinstance(rng, RngStream) else rng


def complex_normal(key: jnp.ndarray, shape: tuple) -> jnp.ndarray:
    """ Standard circular complex normal draws: E|w|^2 = 1, real and imaginary
        parts of variance 1/2 each.
    """
    k_re, k_im = jax.random.split(key)
    re = jax.random.normal(k_re, shape, dtype=jnp.float64)
    im = jax.random.normal(k_im, shape, dtype=jnp.float64)
    return (re + 1j * im) / jnp.sqrt(2.)
