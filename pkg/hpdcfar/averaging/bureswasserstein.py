""" Bures-Wasserstein barycenter and median.

Three mean solvers share one limit, the fixed point of
R = (1/m) sum (R^{1/2} R_i R^{1/2})^{1/2}:

    fixed_a: R <- (1/m) sum (R^{1/2} R_i R^{1/2})^{1/2}
    fixed_b: R <- R^{-1/2} ((1/m) sum (R^{1/2} R_i R^{1/2})^{1/2})^2 R^{-1/2}
    rgd:     R <- T R T,  T = (1/m) sum R_i # R^{-1}

The median follows R <- S R S with S = I - eta sum (I - R_i # R^{-1}) / d_i.
"""
from typing import Optional, Sequence

import jax.numpy as jnp
from jax import jit

from hpdcfar.averaging.config import SolverConfig, SolverReport, Statistic, stack_matrices
from hpdcfar.averaging.descent import build_report, initial_point, riemannian_descent
from hpdcfar.errors import InvalidInput, NumericalFailure
from hpdcfar.kernel import sylvester_solve
from hpdcfar.metrics import MetricKind, bw_transport, get_metric
from hpdcfar.operations.matfuncs import eigvalsh, frobenius, hermitize, sqrt_pair, sqrtm_h
from hpdcfar.primitives import MatrixLike, as_hpd


@jit
def _fixed_a_step(r, stack):
    s, _ = sqrt_pair(r)
    return hermitize(jnp.mean(sqrtm_h(s @ stack @ s), axis=0))


@jit
def _fixed_b_step(r, stack):
    s, si = sqrt_pair(r)
    k = jnp.mean(sqrtm_h(s @ stack @ s), axis=0)
    return hermitize(si @ k @ k @ si)


@jit
def _reduced_residual(r, stack):
    n = r.shape[-1]
    return frobenius(jnp.eye(n, dtype=r.dtype) - jnp.mean(bw_transport(r, stack), axis=0))


def bw_mean_residual(stack: jnp.ndarray, r: jnp.ndarray) -> float:
    """ |(1/m) sum (I - R_i # R^{-1})|_F.
    """
    return float(_reduced_residual(r, stack))


def _bw_mean_objective(stack, r) -> float:
    return float(jnp.mean(get_metric(MetricKind.BW).distance(r, stack) ** 2))


def _fixed_point(label: str, update, stack: jnp.ndarray, cfg: SolverConfig) -> SolverReport:
    r = initial_point(stack, cfg)
    objectives, deltas, iterates = [_bw_mean_objective(stack, r)], [], [r]
    converged = False
    for _ in range(int(cfg.max_iter)):
        r_new = update(r, stack)
        iterates.append(r_new)
        w = eigvalsh(r_new)
        if not bool(jnp.all(jnp.isfinite(w))) or float(w[0]) <= 0.:
            raise NumericalFailure(
                f'{label}: iterate {len(deltas) + 1} is not positive definite',
                trace=deltas, iterates=iterates
            )
        delta = float(frobenius(r_new - r))
        r = r_new
        deltas.append(delta)
        objectives.append(_bw_mean_objective(stack, r))
        if delta <= cfg.tol:
            converged = True
            break
    return build_report(label, r, deltas, objectives, converged, bw_mean_residual(stack, r), cfg)


def bw_mean_fixed_a(matrices: Sequence[MatrixLike], cfg: Optional[SolverConfig] = None) -> SolverReport:
    """ BW barycenter by R <- (1/m) sum (R^{1/2} R_i R^{1/2})^{1/2}.

    Raises:
        NumericalFailure: an iterate left the HPD cone; trace holds the deltas,
            iterates the matrices up to the failing one.
    """
    return _fixed_point('BW mean (fixed_a)', _fixed_a_step, stack_matrices(matrices), cfg or SolverConfig())


def bw_mean_fixed_b(matrices: Sequence[MatrixLike], cfg: Optional[SolverConfig] = None) -> SolverReport:
    """ BW barycenter by the squared, conjugated fixed-point form.
    """
    return _fixed_point('BW mean (fixed_b)', _fixed_b_step, stack_matrices(matrices), cfg or SolverConfig())


def bw_mean_rgd(matrices: Sequence[MatrixLike], cfg: Optional[SolverConfig] = None) -> SolverReport:
    """ BW barycenter by Riemannian gradient descent. With the default step 1/2
        each update is the conjugation R <- T R T, T = (1/m) sum R_i # R^{-1}.

    Args:
        matrices (Sequence[MatrixLike]): m >= 1 HPD matrices.
        cfg (SolverConfig, optional): Defaults to SolverConfig().

    Returns:
        SolverReport: stationarity_residual is |(1/m) sum (I - R_i # R^{-1})|_F.
    """
    stack = stack_matrices(matrices)
    return riemannian_descent(
        MetricKind.BW, stack, Statistic.MEAN, cfg or SolverConfig(),
        residual=lambda r: bw_mean_residual(stack, r), label='BW mean (rgd)'
    )


def bw_median_rgd(matrices: Sequence[MatrixLike], cfg: Optional[SolverConfig] = None) -> SolverReport:
    """ BW geometric median, R <- S R S with Weiszfeld-scaled S. A step whose S
        loses positivity is halved and retried.
    """
    return riemannian_descent(
        MetricKind.BW, stack_matrices(matrices), Statistic.MEDIAN,
        cfg or SolverConfig(), label='BW median'
    )


def bw_stationarity(matrices: Sequence[MatrixLike], r: MatrixLike) -> tuple:
    """ Both forms of the BW barycenter first-order condition at R.

    The gradient of (1/m) sum d^2(R_i, R) is 2 (R G + G R) with
    G = (1/m) sum (I - R_i # R^{-1}); recovering G from the gradient is a
    Sylvester solve, which reduces the condition to G = 0.

    Args:
        matrices (Sequence[MatrixLike]): The data R_i.
        r (MatrixLike): Candidate barycenter.

    Returns:
        tuple: (|gradient|_F, |G|_F with G from the Sylvester solve)
    """
    stack = stack_matrices(matrices)
    r = as_hpd(r)
    if r.dim != stack.shape[-1]:
        raise InvalidInput(f'dimension mismatch: {r.dim} vs {stack.shape[-1]}')
    grad = jnp.mean(get_metric(MetricKind.BW).grad_sq_dist(stack, r()), axis=0)
    g = sylvester_solve(r, r, 0.5 * grad)
    return float(frobenius(grad)), float(frobenius(g))
