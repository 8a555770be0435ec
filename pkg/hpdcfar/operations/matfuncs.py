""" Array-level Hermitian matrix functions.

All functions accept arrays with optional leading batch dimensions
(..., N, N) and return re-symmetrized results. No validation happens here;
the typed wrappers in hpdcfar.kernel own the domain checks.
"""
import jax.numpy as jnp
from jax import jit

# Eigenvalue pairs closer than this (relative to the spectral radius) use the
# derivative instead of the divided difference.
DEGENERATE_GAP = 1e-12


def ct(a: jnp.ndarray) -> jnp.ndarray:
    """ Conjugate transpose over the last two axes.
    """
    return jnp.conj(jnp.swapaxes(a, -1, -2))


@jit
def hermitize(a: jnp.ndarray) -> jnp.ndarray:
    """ Returns (A + A^H) / 2.

    Args:
        a (jnp.ndarray): (..., N, N) square matrix.

    Returns:
        jnp.ndarray: Hermitian part of a.
    """
    return 0.5 * (a + ct(a))


@jit
def eigh_desc(a: jnp.ndarray) -> tuple:
    """ Hermitian eigendecomposition with eigenvalues in descending order.

    Args:
        a (jnp.ndarray): (..., N, N) Hermitian matrix.

    Returns:
        tuple: (..., N) real eigenvalues and (..., N, N) unitary U with
            A = U diag(w) U^H.
    """
    w, u = jnp.linalg.eigh(hermitize(a))
    return w[..., ::-1], u[..., :, ::-1]


@jit
def eigvalsh(a: jnp.ndarray) -> jnp.ndarray:
    """ Eigenvalues of a Hermitian matrix, ascending.
    """
    return jnp.linalg.eigvalsh(hermitize(a))


@jit
def spectral(w: jnp.ndarray, u: jnp.ndarray) -> jnp.ndarray:
    """ Reassembles U diag(w) U^H.
    """
    return hermitize(jnp.matmul(u * w[..., None, :].astype(u.dtype), ct(u)))


@jit
def expm_h(a: jnp.ndarray) -> jnp.ndarray:
    w, u = jnp.linalg.eigh(hermitize(a))
    return spectral(jnp.exp(w), u)


@jit
def logm_h(a: jnp.ndarray) -> jnp.ndarray:
    w, u = jnp.linalg.eigh(hermitize(a))
    return spectral(jnp.log(w), u)


@jit
def sqrtm_h(a: jnp.ndarray) -> jnp.ndarray:
    w, u = jnp.linalg.eigh(hermitize(a))
    return spectral(jnp.sqrt(w), u)


@jit
def invm_h(a: jnp.ndarray) -> jnp.ndarray:
    w, u = jnp.linalg.eigh(hermitize(a))
    return spectral(1. / w, u)


@jit
def powm_h(a: jnp.ndarray, t: float) -> jnp.ndarray:
    w, u = jnp.linalg.eigh(hermitize(a))
    return spectral(jnp.power(w, t), u)


@jit
def sqrt_pair(a: jnp.ndarray) -> tuple:
    """ Returns (A^{1/2}, A^{-1/2}) from a single eigendecomposition.
    """
    w, u = jnp.linalg.eigh(hermitize(a))
    sw = jnp.sqrt(w)
    return spectral(sw, u), spectral(1. / sw, u)


@jit
def frobenius(a: jnp.ndarray) -> jnp.ndarray:
    """ Frobenius norm over the last two axes.
    """
    return jnp.sqrt(jnp.sum(jnp.abs(a) ** 2, axis=(-2, -1)))


@jit
def frobenius_inner(a: jnp.ndarray, b: jnp.ndarray) -> jnp.ndarray:
    """ Real Frobenius inner product Re tr(A^H B).
    """
    return jnp.real(jnp.sum(jnp.conj(a) * b, axis=(-2, -1)))


@jit
def sylvester(a: jnp.ndarray, b: jnp.ndarray, c: jnp.ndarray) -> jnp.ndarray:
    """ Solves A X + X B = C for Hermitian A, B with spectra whose pairwise
        sums never vanish.

    Args:
        a (jnp.ndarray): N x N Hermitian.
        b (jnp.ndarray): N x N Hermitian.
        c (jnp.ndarray): (..., N, N) right-hand side.

    Returns:
        jnp.ndarray: (..., N, N) solution X.
    """
    wa, ua = jnp.linalg.eigh(hermitize(a))
    wb, ub = jnp.linalg.eigh(hermitize(b))
    ct_ = jnp.matmul(ct(ua), jnp.matmul(c, ub))
    xt = ct_ / (wa[..., :, None] + wb[..., None, :])
    return jnp.matmul(ua, jnp.matmul(xt, ct(ub)))


@jit
def lyapunov(p: jnp.ndarray, a: jnp.ndarray) -> jnp.ndarray:
    """ Solves P X + X P = A in the eigenbasis of P: X~_ij = A~_ij / (l_i + l_j).

    Args:
        p (jnp.ndarray): N x N HPD matrix.
        a (jnp.ndarray): (..., N, N) Hermitian right-hand side.

    Returns:
        jnp.ndarray: (..., N, N) Hermitian solution.
    """
    w, u = jnp.linalg.eigh(hermitize(p))
    at = jnp.matmul(ct(u), jnp.matmul(a, u))
    xt = at / (w[..., :, None] + w[..., None, :])
    return hermitize(jnp.matmul(u, jnp.matmul(xt, ct(u))))


@jit
def midpoint(p1: jnp.ndarray, p2: jnp.ndarray) -> jnp.ndarray:
    """ P1 # P2 = P1^{1/2} (P1^{-1/2} P2 P1^{-1/2})^{1/2} P1^{1/2}.

    Args:
        p1 (jnp.ndarray): N x N HPD matrix.
        p2 (jnp.ndarray): (..., N, N) HPD matrices.

    Returns:
        jnp.ndarray: (..., N, N) geometric midpoints.
    """
    s, si = sqrt_pair(p1)
    inner = sqrtm_h(jnp.matmul(si, jnp.matmul(p2, si)))
    return hermitize(jnp.matmul(s, jnp.matmul(inner, s)))


def _close(w: jnp.ndarray) -> jnp.ndarray:
    scale = jnp.max(jnp.abs(w), axis=-1, keepdims=True)[..., None]
    gap = w[..., :, None] - w[..., None, :]
    return jnp.abs(gap) <= DEGENERATE_GAP * jnp.maximum(scale, 1.), gap


@jit
def dexpm(h: jnp.ndarray, x: jnp.ndarray) -> jnp.ndarray:
    """ Frechet derivative of the matrix exponential at Hermitian H along X,
        by the Daleckii-Krein formula in the eigenbasis of H.

    Args:
        h (jnp.ndarray): N x N Hermitian base point.
        x (jnp.ndarray): (..., N, N) Hermitian direction.

    Returns:
        jnp.ndarray: (..., N, N) derivative.
    """
    w, u = jnp.linalg.eigh(hermitize(h))
    close, gap = _close(w)
    safe = jnp.where(close, 1., gap)
    ew = jnp.exp(w)
    dd = jnp.where(
        close,
        jnp.exp(0.5 * (w[..., :, None] + w[..., None, :])),
        ew[..., None, :] * jnp.expm1(gap) / safe
    )
    xt = jnp.matmul(ct(u), jnp.matmul(x, u))
    return hermitize(jnp.matmul(u, jnp.matmul(xt * dd, ct(u))))


@jit
def dlogm(p: jnp.ndarray, v: jnp.ndarray) -> jnp.ndarray:
    """ Frechet derivative of the matrix logarithm at HPD P along V.

    Args:
        p (jnp.ndarray): N x N HPD base point.
        v (jnp.ndarray): (..., N, N) Hermitian direction.

    Returns:
        jnp.ndarray: (..., N, N) derivative.
    """
    w, u = jnp.linalg.eigh(hermitize(p))
    close, gap = _close(w)
    safe = jnp.where(close, 1., gap)
    dd = jnp.where(
        close,
        2. / (w[..., :, None] + w[..., None, :]),
        jnp.log1p(gap / w[..., None, :]) / safe
    )
    vt = jnp.matmul(ct(u), jnp.matmul(v, u))
    return hermitize(jnp.matmul(u, jnp.matmul(vt * dd, ct(u))))
