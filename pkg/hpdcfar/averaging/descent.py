""" Riemannian gradient descent on the mean and median objectives.

The update is R <- Exp_R(-step * grad F(R)). For means the default fixed step
1/2 turns this into the Karcher flow (AIRM) or the averaged conjugation
T R T with T = (1/m) sum R_i # R^-1 (BW). For medians the step is scaled by
sum w_i / sum (w_i / d_i), so a unit step is the Weiszfeld update.
"""
import logging
from typing import Callable, Optional, Sequence, Union

import jax.numpy as jnp

from hpdcfar.averaging.config import (
    Armijo, FixedStep, SolverConfig, SolverReport, Statistic, stack_matrices
)
from hpdcfar.errors import DomainError, InvalidInput, NumericalFailure
from hpdcfar.metrics import Metric, MetricKind, get_metric
from hpdcfar.operations.matfuncs import frobenius, hermitize
from hpdcfar.primitives import HpdMatrix, MatrixLike, as_hpd

logger = logging.getLogger(__name__)

# Median terms closer than D_FLOOR * |R|_F to the iterate are excluded.
D_FLOOR = 1e-9

# Relative slack on objective comparisons; below it F is roundoff.
_F_SLACK = 1e-12

# Domain-error halvings allowed for a fixed step.
_MAX_DOMAIN_HALVINGS = 30


def arithmetic_init(stack: jnp.ndarray) -> jnp.ndarray:
    return hermitize(jnp.mean(stack, axis=0))


def initial_point(stack: jnp.ndarray, cfg: SolverConfig) -> jnp.ndarray:
    """ cfg.init if given (validated against the data), else the arithmetic mean.
    """
    if cfg.init is None:
        return arithmetic_init(stack)
    r = as_hpd(cfg.init)()
    if r.shape != stack.shape[1:]:
        raise InvalidInput(f'initial point has shape {r.shape}, data {stack.shape[1:]}')
    return r


def _normalized(weights: Optional[jnp.ndarray], m: int) -> jnp.ndarray:
    if weights is None:
        return jnp.full((m,), 1. / m)
    w = jnp.asarray(weights, dtype=jnp.float64)
    if w.shape != (m,) or bool(jnp.any(w < 0.)) or not float(jnp.sum(w)) > 0.:
        raise InvalidInput('weights must be m non-negative values with a positive sum')
    return w / jnp.sum(w)


def objective(metric: Metric, stack: jnp.ndarray, weights: jnp.ndarray,
              r: jnp.ndarray, statistic: Statistic) -> float:
    """ Weighted sum of d^2 (mean) or d (median); weights sum to one.
    """
    d = metric.distance(r, stack)
    terms = d ** 2 if statistic is Statistic.MEAN else d
    return float(jnp.sum(weights * terms))


def mean_objective(kind: Union[str, MetricKind], matrices: Sequence[MatrixLike], r: MatrixLike) -> float:
    """ (1/m) sum_i d^2(R_i, R).
    """
    stack = stack_matrices(matrices)
    return objective(get_metric(kind), stack, _normalized(None, stack.shape[0]),
                     as_hpd(r)(), Statistic.MEAN)


def median_objective(kind: Union[str, MetricKind], matrices: Sequence[MatrixLike], r: MatrixLike) -> float:
    """ (1/m) sum_i d(R_i, R).
    """
    stack = stack_matrices(matrices)
    return objective(get_metric(kind), stack, _normalized(None, stack.shape[0]),
                     as_hpd(r)(), Statistic.MEDIAN)


def median_weights(metric: Metric, stack: jnp.ndarray, weights: jnp.ndarray, r: jnp.ndarray) -> tuple:
    """ Weiszfeld weights w_i / d_i with near-coincident terms zeroed.

    Returns:
        tuple: (w_i / d_i array, distances, excluded weight fraction)
    """
    d = metric.distance(r, stack)
    keep = d >= D_FLOOR * float(frobenius(r))
    wd = jnp.where(keep, weights / jnp.where(keep, d, 1.), 0.)
    excluded = float(jnp.sum(jnp.where(keep, 0., weights)))
    return wd, d, excluded


def gradient(metric: Metric, stack: jnp.ndarray, weights: jnp.ndarray,
             r: jnp.ndarray, statistic: Statistic) -> tuple:
    """ Riemannian gradient of the weighted objective at r.

    Returns:
        tuple: (gradient, Weiszfeld step scale, excluded weight fraction)
    """
    g2 = metric.grad_sq_dist(stack, r)
    if statistic is Statistic.MEAN:
        return jnp.tensordot(weights.astype(g2.dtype), g2, axes=1), 1., 0.
    wd, _, excluded = median_weights(metric, stack, weights, r)
    total = float(jnp.sum(wd))
    if total == 0.:
        return jnp.zeros_like(r), 1., excluded
    grad = 0.5 * jnp.tensordot(wd.astype(g2.dtype), g2, axes=1)
    return grad, float(jnp.sum(weights)) / total, excluded


def karcher_residual(metric: Metric, stack: jnp.ndarray, weights: jnp.ndarray, r: jnp.ndarray) -> float:
    """ |sum_i w_i log_R(R_i)|_F.
    """
    logs = metric.log(r, stack)
    return float(frobenius(jnp.tensordot(weights.astype(logs.dtype), logs, axes=1)))


def weiszfeld_residual(metric: Metric, stack: jnp.ndarray, r: jnp.ndarray) -> float:
    """ |sum_i log_R(R_i) / d(R, R_i)|_F over terms outside the floor.
    """
    m = stack.shape[0]
    wd, _, _ = median_weights(metric, stack, jnp.ones((m,)), r)
    logs = metric.log(r, stack)
    return float(frobenius(jnp.tensordot(wd.astype(logs.dtype), logs, axes=1)))


def build_report(label: str, r: jnp.ndarray, deltas: list, objectives: list,
                 converged: bool, residual: float, cfg: SolverConfig) -> SolverReport:
    """ Wraps a finished iteration and logs its outcome.
    """
    final_delta = deltas[-1] if deltas else 0.
    if converged:
        logger.debug('%s converged after %d iterations (|dR|=%.3e)', label, len(deltas), final_delta)
    else:
        logger.warning('%s did not converge after %d iterations (|dR|=%.3e, residual=%.3e, tol=%.1e)',
                       label, len(deltas), final_delta, residual, cfg.tol)
    return SolverReport(
        result=HpdMatrix(r, eps_pd=0.),
        iterations=len(deltas),
        final_delta=float(final_delta),
        stationarity_residual=float(residual),
        converged=converged,
        objective_trace=list(objectives),
        delta_trace=list(deltas),
    )


def _line_search(metric, stack, weights, statistic, r, f, grad, scale, rule: Armijo):
    """ (R, F, moved) after an Armijo search; moved is False when every
        trial step was rejected. None when every step left the cone.
    """
    gnorm2 = max(float(metric.inner(r, grad, grad)), 0.)
    t = rule.initial
    domain_only = True
    for _ in range(rule.max_halvings + 1):
        try:
            cand = metric.exp_checked(r, -(t * scale) * grad)
        except DomainError:
            t *= rule.shrink
            continue
        domain_only = False
        f_cand = objective(metric, stack, weights, cand, statistic)
        if f_cand <= f - rule.c * t * scale * gnorm2 + _F_SLACK * abs(f):
            return cand, f_cand, True
        t *= rule.shrink
    if domain_only:
        return None
    logger.debug('line search exhausted at F=%.6e', f)
    return r, f, False


def _fixed_step(metric, stack, weights, statistic, r, f, grad, scale, rule: FixedStep):
    t = rule.eta
    for _ in range(_MAX_DOMAIN_HALVINGS + 1):
        try:
            cand = metric.exp_checked(r, -(t * scale) * grad)
        except DomainError:
            t *= 0.5
            continue
        f_cand = objective(metric, stack, weights, cand, statistic)
        if f_cand <= f + _F_SLACK * abs(f):
            return cand, f_cand, True
        logger.debug('fixed step raised F from %.6e to %.6e; backtracking', f, f_cand)
        return _line_search(metric, stack, weights, statistic, r, f, grad, scale, Armijo())
    return None


def riemannian_descent(
        kind: Union[str, MetricKind],
        stack: jnp.ndarray,
        statistic: Statistic,
        cfg: SolverConfig,
        weights: Optional[jnp.ndarray] = None,
        residual: Optional[Callable[[jnp.ndarray], float]] = None,
        label: Optional[str] = None,
    ) -> SolverReport:
    """ Minimizes sum_i w_i d^2(R_i, R) or sum_i w_i d(R_i, R).

    Args:
        kind (MetricKind): Geometry.
        stack (jnp.ndarray): m x N x N validated HPD data.
        statistic (Statistic): mean or median.
        cfg (SolverConfig): Controls.
        weights (jnp.ndarray, optional): m non-negative weights, uniform if None.
        residual (callable, optional): Stationarity residual of the returned
            point; defaults to the Karcher (mean) or Weiszfeld (median) form.
        label (str, optional): Name used in log messages.

    Returns:
        SolverReport: converged=False if max_iter was reached, or if the line
            search stalled at a point whose stationarity residual exceeds tol.

    Raises:
        NumericalFailure: every trial step left the HPD cone.
    """
    metric = get_metric(kind)
    statistic = Statistic.parse(statistic)
    label = label or f'{metric.kind.value} {statistic.value}'
    w = _normalized(weights, stack.shape[0])
    rule = cfg.step_for(statistic)
    step = _fixed_step if isinstance(rule, FixedStep) else _line_search

    if residual is None:
        if statistic is Statistic.MEAN:
            residual = lambda x: karcher_residual(metric, stack, w, x)
        else:
            residual = lambda x: weiszfeld_residual(metric, stack, x)

    r = initial_point(stack, cfg)
    f = objective(metric, stack, w, r, statistic)
    objectives, deltas = [f], []
    converged = False
    for _ in range(int(cfg.max_iter)):
        grad, scale, excluded = gradient(metric, stack, w, r, statistic)
        if excluded > 0.5:
            # More than half the mass sits at R: it is the median.
            logger.debug('%s: iterate carries %.2f of the weight; stopping', label, excluded)
            converged = True
            break
        out = step(metric, stack, w, statistic, r, f, grad, scale, rule)
        if out is None:
            raise NumericalFailure(f'{label}: every trial step left the HPD cone',
                                   trace=deltas, iterates=[r])
        r_new, f, moved = out
        if not moved:
            # No acceptable step: only a stationary iterate counts as converged.
            converged = residual(r) <= cfg.tol
            break
        delta = float(frobenius(r_new - r))
        r = r_new
        deltas.append(delta)
        objectives.append(f)
        if delta <= cfg.tol:
            converged = True
            break

    return build_report(label, r, deltas, objectives, converged, residual(r), cfg)
