""" Uniform entry point over the concrete mean and median solvers.
"""
from typing import Optional

from hpdcfar.averaging.airm import airm_mean, airm_median
from hpdcfar.averaging.bureswasserstein import (
    bw_mean_fixed_a, bw_mean_fixed_b, bw_mean_rgd, bw_median_rgd
)
from hpdcfar.averaging.config import (
    AveragingProblem, SolverConfig, SolverReport, Statistic, stack_matrices
)
from hpdcfar.averaging.descent import mean_objective, riemannian_descent
from hpdcfar.averaging.euclidean import arithmetic_mean
from hpdcfar.averaging.logeuclidean import le_mean, le_median
from hpdcfar.metrics import MetricKind

bw_mean_map = {
    'rgd': bw_mean_rgd,
    'fixed_a': bw_mean_fixed_a,
    'fixed_b': bw_mean_fixed_b,
}


def _closed_form(kind: MetricKind, fn):
    def solver(matrices, cfg):
        result = fn(matrices)
        return SolverReport(
            result=result, iterations=0, final_delta=0., stationarity_residual=0.,
            converged=True, objective_trace=[mean_objective(kind, matrices, result)]
        )
    return solver


solver_map = {
    (MetricKind.EUCLIDEAN, Statistic.MEAN): _closed_form(MetricKind.EUCLIDEAN, arithmetic_mean),
    (MetricKind.EUCLIDEAN, Statistic.MEDIAN): lambda mats, cfg: riemannian_descent(
        MetricKind.EUCLIDEAN, stack_matrices(mats), Statistic.MEDIAN, cfg,
        label='Euclidean median'),
    (MetricKind.AIRM, Statistic.MEAN): airm_mean,
    (MetricKind.AIRM, Statistic.MEDIAN): airm_median,
    (MetricKind.LE, Statistic.MEAN): _closed_form(MetricKind.LE, le_mean),
    (MetricKind.LE, Statistic.MEDIAN): le_median,
    (MetricKind.BW, Statistic.MEAN): lambda mats, cfg: bw_mean_map[cfg.bw_method](mats, cfg),
    (MetricKind.BW, Statistic.MEDIAN): bw_median_rgd,
}


def solve(problem: AveragingProblem, cfg: Optional[SolverConfig] = None) -> SolverReport:
    """ Solves a mean or median problem with the solver for its geometry.

    Args:
        problem (AveragingProblem): Data, metric and statistic.
        cfg (SolverConfig, optional): Controls; cfg.bw_method picks the BW mean solver.

    Returns:
        SolverReport: Closed forms (Euclidean and LE means) report zero iterations.
    """
    cfg = cfg or SolverConfig()
    return solver_map[(problem.kind, problem.statistic)](list(problem.matrices), cfg)
