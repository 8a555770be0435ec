"""
Matrix primitives. Every manifold point is an HpdMatrix and every tangent
vector a HermitianMatrix; both store a dense complex128 array and, like any
primitive here, return it when called.
"""
from typing import Union

import jax.numpy as jnp

from hpdcfar.errors import DomainError, InvalidInput, NumericalFailure
from hpdcfar.operations import matfuncs

# Smallest admissible eigenvalue, relative to the largest.
EPS_PD = 1e-12


class HermitianMatrix(object):
    """ Dense complex Hermitian matrix. Input is symmetrized on construction,
        so the imaginary part of the diagonal is exactly zero.
    """
    def __init__(self, matrix: jnp.ndarray) -> None:
        """
        Args:
            matrix (jnp.ndarray): N x N array-like, real or complex.

        Attributes:
            matrix (jnp.ndarray): N x N complex128 Hermitian array.
        """
        a = jnp.asarray(matrix, dtype=jnp.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise InvalidInput(f'expected a non-empty square matrix, got shape {a.shape}')
        if not bool(jnp.all(jnp.isfinite(a))):
            raise InvalidInput('matrix has non-finite entries')
        self.matrix = matfuncs.hermitize(a)

    def __call__(self) -> jnp.ndarray:
        """ Call returns the matrix attribute.

        Returns:
            jnp.ndarray: self.matrix
        """
        return self.matrix

    def __repr__(self) -> str:
        return f'{self.__class__.__name__}(dim={self.dim})'

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def get_eig(self) -> 'EigenDecomposition':
        """ Hermitian eigendecomposition, eigenvalues descending.

        Returns:
            EigenDecomposition: U and eigenvalues of self.matrix.
        """
        w, u = matfuncs.eigh_desc(self.matrix)
        if not bool(jnp.all(jnp.isfinite(w))):
            raise NumericalFailure('Hermitian eigensolver did not converge')
        return EigenDecomposition(u, w)


class HpdMatrix(HermitianMatrix):
    """ Hermitian positive-definite matrix: a point of the HPD manifold.
    """
    def __init__(self, matrix: jnp.ndarray, eps_pd: float = EPS_PD) -> None:
        """
        Args:
            matrix (jnp.ndarray): N x N array-like.
            eps_pd (float): Rejects matrices whose smallest eigenvalue is at
                most eps_pd times the largest.
        """
        super().__init__(matrix)
        w = matfuncs.eigvalsh(self.matrix)
        lo, hi = float(w[0]), float(w[-1])
        if not hi > 0. or lo <= eps_pd * hi:
            raise DomainError(
                f'matrix is not positive definite (smallest eigenvalue {lo:.3e}, '
                f'largest {hi:.3e})', eigenvalue=lo
            )


class EigenDecomposition(object):
    """ A = U diag(eigenvalues) U^H with eigenvalues in descending order.
    """
    def __init__(self, unitary: jnp.ndarray, eigenvalues: jnp.ndarray) -> None:
        self.unitary = unitary
        self.eigenvalues = eigenvalues

    def __call__(self) -> jnp.ndarray:
        """ Reconstructs the decomposed matrix.
        """
        return matfuncs.spectral(self.eigenvalues, self.unitary)


class HermitianBasis(object):
    """ Frobenius-orthonormal basis of the real vector space of N x N
        Hermitian matrices.
    """
    def __init__(self, dim: int, elements: jnp.ndarray) -> None:
        """
        Attributes:
            dim (int): N.
            elements (jnp.ndarray): N^2 x N x N stack of basis matrices.
        """
        self.dim = dim
        self.elements = elements

    def __call__(self) -> jnp.ndarray:
        return self.elements

    def __len__(self) -> int:
        return self.elements.shape[0]

    def coefficients(self, a: jnp.ndarray) -> jnp.ndarray:
        """ Real coordinates <E_a, A>_F of a Hermitian matrix.

        Args:
            a (jnp.ndarray): (..., N, N) Hermitian matrices.

        Returns:
            jnp.ndarray: (..., N^2) real coefficients.
        """
        return matfuncs.frobenius_inner(self.elements, jnp.asarray(a)[..., None, :, :])

    def assemble(self, coeffs: jnp.ndarray) -> jnp.ndarray:
        """ Inverse of coefficients: sum_a c_a E_a.
        """
        return jnp.tensordot(jnp.asarray(coeffs, dtype=jnp.complex128), self.elements, axes=1)


MatrixLike = Union[HermitianMatrix, jnp.ndarray]


def as_array(a: MatrixLike) -> jnp.ndarray:
    """ Unwraps a primitive, or converts an array-like to complex128.
    """
    if isinstance(a, HermitianMatrix):
        return a()
    return jnp.asarray(a, dtype=jnp.complex128)


def as_hpd(a: MatrixLike) -> HpdMatrix:
    """ Returns a as an HpdMatrix, validating raw arrays and plain
        HermitianMatrix instances.
    """
    if isinstance(a, HpdMatrix):
        return a
    return HpdMatrix(as_array(a))


def as_hermitian(a: MatrixLike) -> HermitianMatrix:
    if isinstance(a, HermitianMatrix):
        return a
    return HermitianMatrix(a)
