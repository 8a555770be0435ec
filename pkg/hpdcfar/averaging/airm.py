""" Affine invariant geometric mean and median.
"""
from typing import Optional, Sequence

from hpdcfar.averaging.config import SolverConfig, SolverReport, Statistic, stack_matrices
from hpdcfar.averaging.descent import riemannian_descent
from hpdcfar.metrics import MetricKind
from hpdcfar.primitives import MatrixLike


def airm_mean(matrices: Sequence[MatrixLike], cfg: Optional[SolverConfig] = None) -> SolverReport:
    """ Karcher mean by Riemannian gradient descent:
        R <- R^{1/2} exp(-(2 eta/m) sum Log(R^{1/2} R_i^{-1} R^{1/2})) R^{1/2}.

    Args:
        matrices (Sequence[MatrixLike]): m >= 1 HPD matrices.
        cfg (SolverConfig, optional): Defaults to SolverConfig().

    Returns:
        SolverReport: stationarity_residual is |(1/m) sum log_R(R_i)|_F.
    """
    return riemannian_descent(
        MetricKind.AIRM, stack_matrices(matrices), Statistic.MEAN,
        cfg or SolverConfig(), label='AIRM mean'
    )


def airm_median(matrices: Sequence[MatrixLike], cfg: Optional[SolverConfig] = None) -> SolverReport:
    """ Geometric median by distance-weighted exponential steps.

    Returns:
        SolverReport: stationarity_residual is |sum log_R(R_i) / d(R, R_i)|_F.
    """
    return riemannian_descent(
        MetricKind.AIRM, stack_matrices(matrices), Statistic.MEDIAN,
        cfg or SolverConfig(), label='AIRM median'
    )
