""" Log-Euclidean mean (closed form) and median (log-domain fixed point).
"""
import logging
from typing import Optional, Sequence

import jax.numpy as jnp

from hpdcfar.averaging.config import SolverConfig, SolverReport, stack_matrices
from hpdcfar.averaging.descent import D_FLOOR, build_report, initial_point
from hpdcfar.operations.matfuncs import expm_h, frobenius, logm_h
from hpdcfar.primitives import HpdMatrix, MatrixLike

logger = logging.getLogger(__name__)


def le_mean(matrices: Sequence[MatrixLike]) -> HpdMatrix:
    """ exp((1/m) sum Log R_i).
    """
    logs = logm_h(stack_matrices(matrices))
    return HpdMatrix(expm_h(jnp.mean(logs, axis=0)))


def _weiszfeld_weights(lr: jnp.ndarray, logs: jnp.ndarray, floor: float) -> tuple:
    d = frobenius(logs - lr)
    keep = d >= floor
    wd = jnp.where(keep, 1. / jnp.where(keep, d, 1.), 0.)
    return wd, d, float(jnp.mean(jnp.where(keep, 0., 1.)))


def _log_residual(lr: jnp.ndarray, logs: jnp.ndarray, floor: float) -> float:
    wd, _, _ = _weiszfeld_weights(lr, logs, floor)
    total = float(jnp.sum(wd))
    if total == 0.:
        return 0.
    return float(frobenius(lr - jnp.tensordot(wd, logs, axes=1) / total))


def le_median(matrices: Sequence[MatrixLike], cfg: Optional[SolverConfig] = None) -> SolverReport:
    """ Log-Euclidean median: the Weiszfeld iteration on the matrix logarithms,
        Log R <- sum (Log R_i / d_i) / sum (1 / d_i), d_i = |Log R - Log R_i|_F.

    Args:
        matrices (Sequence[MatrixLike]): m >= 1 HPD matrices.
        cfg (SolverConfig, optional): tol applies to |R_{t+1} - R_t|_F.

    Returns:
        SolverReport: stationarity_residual is the log-domain fixed-point
            residual |Log R - sum (Log R_i / d_i) / sum (1 / d_i)|_F.
    """
    cfg = cfg or SolverConfig()
    stack = stack_matrices(matrices)
    logs = logm_h(stack)
    if bool(jnp.all(frobenius(stack - stack[0]) == 0.)):
        return build_report('LE median', stack[0], [], [0.], True, 0., cfg)

    r = initial_point(stack, cfg)
    lr = logm_h(r)
    objectives, deltas = [float(jnp.mean(frobenius(logs - lr)))], []
    converged = False
    for _ in range(int(cfg.max_iter)):
        floor = D_FLOOR * float(frobenius(r))
        wd, _, excluded = _weiszfeld_weights(lr, logs, floor)
        if excluded > 0.5:
            logger.debug('LE median: iterate carries %.2f of the weight; stopping', excluded)
            converged = True
            break
        lr = jnp.tensordot(wd, logs, axes=1) / jnp.sum(wd)
        r_new = expm_h(lr)
        delta = float(frobenius(r_new - r))
        r = r_new
        deltas.append(delta)
        objectives.append(float(jnp.mean(frobenius(logs - lr))))
        if delta <= cfg.tol:
            converged = True
            break
    residual = _log_residual(lr, logs, D_FLOOR * float(frobenius(r)))
    return build_report('LE median', r, deltas, objectives, converged, residual, cfg)
