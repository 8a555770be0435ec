""" Validated Hermitian/HPD matrix algebra on typed primitives.
"""
from functools import lru_cache
from typing import Optional

import jax.numpy as jnp

from hpdcfar.errors import DomainError, InvalidInput
from hpdcfar.operations import matfuncs
from hpdcfar.primitives import (
    EigenDecomposition, HermitianBasis, HermitianMatrix, HpdMatrix, MatrixLike,
    as_array, as_hermitian, as_hpd
)

# Maps a matrix function name to (needs HPD input, output is HPD, kernel).
matrix_fn_map = {
    'exp': (False, True, lambda a, t: matfuncs.expm_h(a)),
    'log': (True, False, lambda a, t: matfuncs.logm_h(a)),
    'sqrt': (True, True, lambda a, t: matfuncs.sqrtm_h(a)),
    'inv': (True, True, lambda a, t: matfuncs.invm_h(a)),
    'pow': (True, True, lambda a, t: matfuncs.powm_h(a, t)),
}


def check_same_dim(*mats: HermitianMatrix) -> int:
    """ Returns the common dimension or raises InvalidInput.
    """
    dims = {m.dim for m in mats}
    if len(dims) != 1:
        raise InvalidInput(f'dimension mismatch: {sorted(dims)}')
    return dims.pop()


def eig_hermitian(a: MatrixLike) -> EigenDecomposition:
    """ Eigendecomposition of a Hermitian matrix.

    Args:
        a (MatrixLike): N x N Hermitian matrix with finite entries.

    Returns:
        EigenDecomposition: unitary U and descending eigenvalues.
    """
    return as_hermitian(a).get_eig()


def matrix_fn(a: MatrixLike, fn: str, t: Optional[float] = None) -> HermitianMatrix:
    """ Applies a scalar function to the spectrum of a Hermitian matrix.

    Args:
        a (MatrixLike): Input matrix. HPD is required for every fn but 'exp'.
        fn (str): One of 'exp', 'log', 'sqrt', 'inv', 'pow'.
        t (float, optional): Exponent, required for 'pow'.

    Returns:
        HermitianMatrix: HpdMatrix for exp/sqrt/inv/pow, HermitianMatrix for log.
    """
    if fn not in matrix_fn_map:
        raise InvalidInput(f'unknown matrix function {fn!r}')
    needs_hpd, hpd_out, kernel = matrix_fn_map[fn]
    if fn == 'pow' and t is None:
        raise InvalidInput("matrix_fn 'pow' needs an exponent t")
    src = as_hpd(a) if needs_hpd else as_hermitian(a)
    out = kernel(src(), t)
    # Outputs only need positive eigenvalues; exp and pow stretch the spectrum.
    return HpdMatrix(out, eps_pd=0.) if hpd_out else HermitianMatrix(out)


def lyapunov_solve(p: MatrixLike, a: MatrixLike) -> HermitianMatrix:
    """ Lyapunov operator L_P[A]: the Hermitian X with P X + X P = A.

    Args:
        p (MatrixLike): HPD matrix.
        a (MatrixLike): Hermitian right-hand side.

    Returns:
        HermitianMatrix: X.
    """
    p, a = as_hpd(p), as_hermitian(a)
    check_same_dim(p, a)
    return HermitianMatrix(matfuncs.lyapunov(p(), a()))


def sylvester_solve(a: MatrixLike, b: MatrixLike, c: jnp.ndarray) -> jnp.ndarray:
    """ Solves A X + X B = C for Hermitian A and B.

    Args:
        a (MatrixLike): N x N Hermitian.
        b (MatrixLike): N x N Hermitian.
        c (jnp.ndarray): N x N right-hand side (not necessarily Hermitian).

    Returns:
        jnp.ndarray: N x N solution X.
    """
    a, b = as_hermitian(a), as_hermitian(b)
    c = jnp.asarray(c, dtype=jnp.complex128)
    n = check_same_dim(a, b)
    if c.shape != (n, n):
        raise InvalidInput(f'right-hand side has shape {c.shape}, expected {(n, n)}')
    sums = matfuncs.eigvalsh(a())[:, None] + matfuncs.eigvalsh(b())[None, :]
    smallest = float(jnp.min(jnp.abs(sums)))
    if smallest <= 1e-14 * max(float(jnp.max(jnp.abs(sums))), 1.):
        raise DomainError('Sylvester operator is singular', eigenvalue=smallest)
    return matfuncs.sylvester(a(), b(), c)


def geometric_midpoint(p1: MatrixLike, p2: MatrixLike) -> HpdMatrix:
    """ P1 # P2, the Pusz-Woronowicz geometric mean of two HPD matrices.

    Args:
        p1 (MatrixLike): HPD matrix.
        p2 (MatrixLike): HPD matrix of the same dimension.

    Returns:
        HpdMatrix: the unique HPD solution X of X P1^{-1} X = P2.
    """
    p1, p2 = as_hpd(p1), as_hpd(p2)
    check_same_dim(p1, p2)
    return HpdMatrix(matfuncs.midpoint(p1(), p2()))


def dexp(h: MatrixLike, x: MatrixLike) -> HermitianMatrix:
    """ Frechet derivative of exp at Hermitian H along X.
    """
    h, x = as_hermitian(h), as_hermitian(x)
    check_same_dim(h, x)
    return HermitianMatrix(matfuncs.dexpm(h(), x()))


def dlog(p: MatrixLike, v: MatrixLike) -> HermitianMatrix:
    """ Frechet derivative of Log at HPD P along V.
    """
    p, v = as_hpd(p), as_hermitian(v)
    check_same_dim(p, v)
    return HermitianMatrix(matfuncs.dlogm(p(), v()))


@lru_cache(maxsize=None)
def _basis_elements(n: int) -> jnp.ndarray:
    eye = jnp.eye(n, dtype=jnp.complex128)
    elements = [jnp.outer(eye[i], eye[i]) for i in range(n)]
    r2 = jnp.sqrt(2.)
    for i in range(n):
        for j in range(i + 1, n):
            eij = jnp.outer(eye[i], eye[j])
            elements.append((eij + eij.T) / r2)
            elements.append(1j * (eij - eij.T) / r2)
    return jnp.stack(elements)


def hermitian_basis(n: int) -> HermitianBasis:
    """ Orthonormal basis of N x N Hermitian matrices: N diagonal units,
        then for each i < j the symmetric pair (e_i e_j^T + e_j e_i^T)/sqrt(2)
        followed by i (e_i e_j^T - e_j e_i^T)/sqrt(2).

    Args:
        n (int): N >= 1.

    Returns:
        HermitianBasis: N^2 elements.
    """
    if int(n) < 1:
        raise InvalidInput(f'basis dimension must be positive, got {n}')
    return HermitianBasis(int(n), _basis_elements(int(n)))


def frobenius_norm(a: MatrixLike) -> float:
    """ sqrt(tr(A A^H)).
    """
    a = as_array(a)
    if not bool(jnp.all(jnp.isfinite(a))):
        raise InvalidInput('matrix has non-finite entries')
    return float(matfuncs.frobenius(a))
