""" Flat-geometry averaging.
"""
from typing import Sequence

from hpdcfar.averaging.config import stack_matrices
from hpdcfar.averaging.descent import arithmetic_init
from hpdcfar.primitives import HpdMatrix, MatrixLike


def arithmetic_mean(matrices: Sequence[MatrixLike]) -> HpdMatrix:
    """ (1/m) sum_i R_i, the minimizer of the Euclidean mean objective.

    Args:
        matrices (Sequence[MatrixLike]): m >= 1 HPD matrices of equal dimension.

    Returns:
        HpdMatrix: The arithmetic mean.
    """
    return HpdMatrix(arithmetic_init(stack_matrices(matrices)))
