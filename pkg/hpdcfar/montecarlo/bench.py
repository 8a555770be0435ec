""" Convergence benchmark of the three BW barycenter solvers.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List

import jax.numpy as jnp

from hpdcfar.averaging.bureswasserstein import bw_mean_fixed_a, bw_mean_fixed_b, bw_mean_rgd
from hpdcfar.averaging.config import SolverConfig
from hpdcfar.errors import InvalidInput, NumericalFailure
from hpdcfar.operations.matfuncs import frobenius
from hpdcfar.simulation.rng import RngStream, complex_normal

logger = logging.getLogger(__name__)

bw_solver_map = {
    'fixed_a': bw_mean_fixed_a,
    'fixed_b': bw_mean_fixed_b,
    'rgd': bw_mean_rgd,
}


@dataclass
class BenchRow:
    """ One solver's run.

    Attributes:
        solver (str): 'fixed_a', 'fixed_b' or 'rgd'.
        iterations (int): Updates performed.
        seconds (float): Wall time.
        final_delta (float): Last |Delta R|_F.
        pairwise_dist (float): Largest relative Frobenius distance to the
            other solvers' results (NaN when this solver failed).
        converged (bool): Reached tol.
        delta_trace (list): |Delta R|_F per iteration.
        error (str): Failure message, '' on success.
    """
    solver: str
    iterations: int
    seconds: float
    final_delta: float
    pairwise_dist: float = float('nan')
    converged: bool = False
    delta_trace: List[float] = field(default_factory=list)
    error: str = ''


@dataclass
class BenchResult:
    rows: List[BenchRow]
    agreement: Dict[str, Dict[str, float]]

    def row(self, solver: str) -> BenchRow:
        return next(r for r in self.rows if r.solver == solver)

    @property
    def failed(self) -> bool:
        return any(r.error for r in self.rows)


def random_hpd_set(count_m: int, n: int, stream: RngStream) -> jnp.ndarray:
    """ count_m complex Wishart matrices W W^H / (2N) with 2N degrees of freedom.
    """
    w = complex_normal(stream(), (count_m, n, 2 * n))
    return w @ jnp.conj(jnp.swapaxes(w, -1, -2)) / (2 * n)


def _relative(a: jnp.ndarray, b: jnp.ndarray) -> float:
    return float(frobenius(a - b) / jnp.maximum(frobenius(a), frobenius(b)))


def run_solvers(stack: jnp.ndarray, cfg: SolverConfig) -> BenchResult:
    """ Times every BW mean solver on one data set from the arithmetic-mean init.
    """
    mats = list(stack)
    # Compile every kernel before timing.
    for fn in bw_solver_map.values():
        fn(mats, SolverConfig(tol=cfg.tol, max_iter=1))

    rows, results = [], {}
    for name, fn in bw_solver_map.items():
        start = time.perf_counter()
        try:
            report = fn(mats, cfg)
        except NumericalFailure as err:
            seconds = time.perf_counter() - start
            logger.error('%s failed: %s', name, err)
            delta = err.trace[-1] if err.trace else float('nan')
            rows.append(BenchRow(name, len(err.trace), seconds, delta,
                                 delta_trace=list(err.trace), error=str(err)))
            continue
        seconds = time.perf_counter() - start
        results[name] = report.result()
        rows.append(BenchRow(name, report.iterations, seconds, report.final_delta,
                             converged=report.converged, delta_trace=report.delta_trace))

    agreement = {a: {b: _relative(results[a], results[b]) for b in results} for a in results}
    for row in rows:
        others = [v for k, v in agreement.get(row.solver, {}).items() if k != row.solver]
        if others:
            row.pairwise_dist = max(others)
    return BenchResult(rows, agreement)


def bench_bw_solvers(count_m: int = 10, n: int = 8, tol: float = 1e-5, seed: int = 0,
                     max_iter: int = 500) -> BenchResult:
    """ BW barycenter of count_m random N x N HPD matrices by each solver.

    Args:
        count_m (int): Number of matrices, >= 2.
        n (int): Dimension.
        tol (float): |Delta R|_F tolerance.
        seed (int): Master seed; the data come from stream 0.
        max_iter (int): Iteration cap per solver.

    Returns:
        BenchResult: Rows in the order fixed_a, fixed_b, rgd and the relative
            Frobenius agreement matrix.
    """
    if int(count_m) < 2:
        raise InvalidInput(f'benchmark needs at least two matrices, got {count_m}')
    stack = random_hpd_set(int(count_m), int(n), RngStream(seed, 0))
    return run_solvers(stack, SolverConfig(tol=tol, max_iter=max_iter))


@dataclass
class OrderingSummary:
    """ Fractions of instances satisfying each convergence ordering.
    """
    instances: int
    rgd_not_slower: float
    fixed_b_faster_wall: float
    monotone_tail: float
    max_disagreement: float


def _monotone_after(trace: List[float], skip: int = 3) -> bool:
    tail = trace[skip:]
    return all(b < a for a, b in zip(tail, tail[1:]))


def convergence_ordering(instances: int = 50, count_m: int = 10, n: int = 8,
                         tol: float = 1e-5, seed: int = 0) -> OrderingSummary:
    """ Aggregates solver orderings over seeded instances (instance i uses stream i).

    Returns:
        OrderingSummary: share with rgd iterations <= fixed_a iterations, share
            with fixed_b wall time < fixed_a wall time, share of instances whose
            every |Delta R| trace decreases strictly after the third iteration,
            and the worst relative disagreement seen.
    """
    cfg = SolverConfig(tol=tol)
    rgd_ok = wall_ok = mono_ok = 0
    worst = 0.
    for i in range(int(instances)):
        result = run_solvers(random_hpd_set(count_m, n, RngStream(seed, i)), cfg)
        a, b, r = result.row('fixed_a'), result.row('fixed_b'), result.row('rgd')
        rgd_ok += r.iterations <= a.iterations
        wall_ok += b.seconds < a.seconds
        mono_ok += all(_monotone_after(row.delta_trace) for row in result.rows)
        worst = max([worst] + [row.pairwise_dist for row in result.rows if row.pairwise_dist == row.pairwise_dist])
    k = float(max(int(instances), 1))
    return OrderingSummary(int(instances), rgd_ok / k, wall_ok / k, mono_ok / k, worst)
