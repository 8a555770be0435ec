""" Influence of outlier contamination on the geometric means and medians.

Clean data R_1..R_m and outliers P_1..P_n with mass eps define the objective

    F_eps(R) = (1 - eps) (1/m) sum_i d^k(R_i, R) + eps (1/n) sum_j d^k(P_j, R)

with k = 2 for means and k = 1 for medians. The first-order shift of its
minimizer, H = dR/d eps at eps = 0, solves D grad F_clean(Rbar)[H] = -grad F_out(Rbar),
and the influence value is f = |H|_F / |Rbar|_F.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple, Union

import jax.numpy as jnp

from hpdcfar.averaging.config import AveragingProblem, SolverConfig, Statistic, stack_matrices
from hpdcfar.averaging.descent import D_FLOOR, gradient, objective, riemannian_descent
from hpdcfar.averaging.dispatch import solve
from hpdcfar.errors import (
    DegenerateMedian, DomainError, InvalidInput, NumericalFailure, SingularHessian
)
from hpdcfar.kernel import check_same_dim, hermitian_basis
from hpdcfar.metrics import Metric, MetricKind, get_metric
from hpdcfar.montecarlo.scenario import config_hash
from hpdcfar.montecarlo.trials import map_trials
from hpdcfar.operations.matfuncs import frobenius, hermitize
from hpdcfar.primitives import HermitianBasis, HermitianMatrix, HpdMatrix, MatrixLike, as_array, as_hpd
from hpdcfar.simulation.clutter import (
    ClutterParams, amplitude_from_scr, clutter_covariance, sample_clutter
)
from hpdcfar.simulation.estimation import toeplitz_array
from hpdcfar.simulation.rng import RngStream
from hpdcfar.simulation.steering import steering_ideal

logger = logging.getLogger(__name__)

# Hessian systems with a larger condition number are rejected.
MAX_CONDITION = 1e12

# Central-difference step, relative to |Rbar|_F.
FD_STEP = 1e-5

Averaging = Tuple[MetricKind, Statistic]


def parse_averaging(value: Union[str, Sequence]) -> Averaging:
    """ (MetricKind, Statistic) from a pair or a 'METRIC:statistic' string.
    """
    if isinstance(value, str):
        parts = value.split(':')
        if len(parts) != 2:
            raise InvalidInput(f"averaging must look like 'AIRM:mean', got {value!r}")
        value = parts
    kind, statistic = value
    return MetricKind.parse(kind), Statistic.parse(statistic)


def averaging_name(averaging: Averaging) -> str:
    return f'{averaging[0].value}:{averaging[1].value}'


def _field(metric: Metric, statistic: Statistic, stack: jnp.ndarray, r: jnp.ndarray) -> jnp.ndarray:
    """ Gradient at r of the uniformly weighted objective over stack.
    """
    m = stack.shape[0]
    grad, _, _ = gradient(metric, stack, jnp.full((m,), 1. / m), r, statistic)
    return hermitize(grad)


def _stacks(clean, outliers, r) -> tuple:
    clean_stack, out_stack = stack_matrices(clean), stack_matrices(outliers)
    r = as_hpd(r)
    if clean_stack.shape[1:] != out_stack.shape[1:] or clean_stack.shape[-1] != r.dim:
        raise InvalidInput('clean data, outliers and R must share one dimension')
    return clean_stack, out_stack, r()


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0. <= eps < 1.:
        raise InvalidInput(f'contamination mass must lie in [0, 1), got {eps}')
    return eps


def contaminated_grad(averaging, clean: Sequence[MatrixLike], outliers: Sequence[MatrixLike],
                      eps: float, r: MatrixLike) -> HermitianMatrix:
    """ Riemannian gradient of F_eps at R.

    Args:
        averaging (tuple or str): (MetricKind, Statistic) or 'AIRM:mean'.
        clean (Sequence): m clean HPD matrices.
        outliers (Sequence): n outlier HPD matrices.
        eps (float): Contamination mass in [0, 1).
        r (MatrixLike): HPD evaluation point.

    Returns:
        HermitianMatrix: (1 - eps) grad F_clean(R) + eps grad F_out(R). Median
            terms within D_FLOOR of R contribute nothing.
    """
    kind, statistic = parse_averaging(averaging)
    eps = _check_eps(eps)
    metric = get_metric(kind)
    clean_stack, out_stack, r = _stacks(clean, outliers, r)
    g = (1. - eps) * _field(metric, statistic, clean_stack, r) \
        + eps * _field(metric, statistic, out_stack, r)
    return HermitianMatrix(g)


def contaminated_objective(averaging, clean: Sequence[MatrixLike], outliers: Sequence[MatrixLike],
                           eps: float, r: MatrixLike) -> float:
    """ F_eps(R).
    """
    kind, statistic = parse_averaging(averaging)
    eps = _check_eps(eps)
    metric = get_metric(kind)
    clean_stack, out_stack, r = _stacks(clean, outliers, r)
    m, n = clean_stack.shape[0], out_stack.shape[0]
    return (1. - eps) * objective(metric, clean_stack, jnp.full((m,), 1. / m), r, statistic) \
        + eps * objective(metric, out_stack, jnp.full((n,), 1. / n), r, statistic)


@dataclass
class HessianSystem:
    """ Linearized clean gradient field at Rbar in an orthonormal Hermitian basis.

    Attributes:
        rbar (jnp.ndarray): Clean mean or median.
        matrix (jnp.ndarray): N^2 x N^2 real matrix A; column a is the
            derivative of the gradient field along basis element a.
        basis (HermitianBasis): Basis of the coordinates.
        condition (float): 2-norm condition number of A.
        step (float): Central-difference step used.
    """
    rbar: jnp.ndarray
    matrix: jnp.ndarray
    basis: HermitianBasis
    condition: float
    step: float

    def solve(self, rhs: jnp.ndarray) -> jnp.ndarray:
        """ Hermitian H with A coeffs(H) = -coeffs(rhs).
        """
        c = jnp.linalg.solve(self.matrix, -self.basis.coefficients(rhs))
        return hermitize(self.basis.assemble(c))


def hessian_system(averaging, clean: Sequence[MatrixLike], rbar: MatrixLike) -> HessianSystem:
    """ Builds A by central differences of the clean gradient field at Rbar.

    Args:
        averaging (tuple or str): (MetricKind, Statistic).
        clean (Sequence): m clean HPD matrices.
        rbar (MatrixLike): Converged clean mean or median.

    Returns:
        HessianSystem: A together with its basis and diagnostics.

    Raises:
        DegenerateMedian: a median Rbar lies within D_FLOOR of a clean point.
        SingularHessian: cond(A) > MAX_CONDITION.
    """
    kind, statistic = parse_averaging(averaging)
    metric = get_metric(kind)
    stack = stack_matrices(clean)
    rbar = as_hpd(rbar)
    if stack.shape[-1] != rbar.dim:
        raise InvalidInput(f'Rbar has dimension {rbar.dim}, data {stack.shape[-1]}')
    rbar = rbar()
    scale = float(frobenius(rbar))
    if statistic is Statistic.MEDIAN:
        closest = float(jnp.min(metric.distance(rbar, stack)))
        if closest < D_FLOOR * scale:
            raise DegenerateMedian(f'{kind.value} median lies on a data point (d={closest:.3e})')

    basis = hermitian_basis(rbar.shape[-1])
    h = FD_STEP * scale
    columns = []
    for e in basis():
        plus = _field(metric, statistic, stack, rbar + h * e)
        minus = _field(metric, statistic, stack, rbar - h * e)
        columns.append(basis.coefficients((plus - minus) / (2. * h)))
    a = jnp.stack(columns, axis=1)

    cond = float(jnp.linalg.cond(a))
    if not cond <= MAX_CONDITION:
        raise SingularHessian(f'{averaging_name((kind, statistic))} Hessian system has '
                              f'condition number {cond:.3e}', condition=cond)
    return HessianSystem(rbar, a, basis, cond, h)


def influence_matrix(averaging, clean: Sequence[MatrixLike], outliers: Sequence[MatrixLike],
                     rbar: Optional[MatrixLike] = None,
                     cfg: Optional[SolverConfig] = None) -> HermitianMatrix:
    """ First-order shift H of the clean mean or median under contamination.

    Args:
        averaging (tuple or str): (MetricKind, Statistic).
        clean (Sequence): m clean HPD matrices.
        outliers (Sequence): n outlier HPD matrices.
        rbar (MatrixLike, optional): Converged clean estimate; solved with
            cfg (default SolverConfig()) if None.
        cfg (SolverConfig, optional): Controls of the clean solve.

    Returns:
        HermitianMatrix: H.
    """
    kind, statistic = parse_averaging(averaging)
    if rbar is None:
        report = solve(AveragingProblem(list(clean), kind, statistic), cfg or SolverConfig())
        rbar = report.result
    clean_stack, out_stack, _ = _stacks(clean, outliers, rbar)
    system = hessian_system((kind, statistic), clean_stack, rbar)
    return HermitianMatrix(system.solve(_field(get_metric(kind), statistic, out_stack, system.rbar)))


def influence_value(h: MatrixLike, rbar: MatrixLike) -> float:
    """ f = |H|_F / |Rbar|_F.
    """
    return float(frobenius(as_array(h)) / frobenius(as_array(rbar)))


@dataclass
class OracleResult:
    """ Small-eps recomputation of the contaminated estimate.

    Attributes:
        rbar (HpdMatrix): Clean estimate.
        perturbed (HpdMatrix): Minimizer of F_eps.
        derivative (HermitianMatrix): (perturbed - rbar) / eps.
        converged (bool): Both solves reached tol.
    """
    rbar: HpdMatrix
    perturbed: HpdMatrix
    derivative: HermitianMatrix
    converged: bool


def perturbation_oracle(averaging, clean: Sequence[MatrixLike], outliers: Sequence[MatrixLike],
                        eps: float = 1e-4, cfg: Optional[SolverConfig] = None) -> OracleResult:
    """ Solves the clean and the contaminated problems with the same descent.

    The contaminated solve starts from Rbar with weights (1 - eps)/m on the
    clean data and eps/n on the outliers.

    Args:
        averaging (tuple or str): (MetricKind, Statistic).
        clean (Sequence): m clean HPD matrices.
        outliers (Sequence): n outlier HPD matrices.
        eps (float): Contamination mass in (0, 1).
        cfg (SolverConfig, optional): Defaults to tol 1e-11, 5000 iterations.

    Returns:
        OracleResult: Both estimates and their difference quotient.
    """
    kind, statistic = parse_averaging(averaging)
    eps = _check_eps(eps)
    if eps == 0.:
        raise InvalidInput('the oracle needs a positive contamination mass')
    cfg = cfg or SolverConfig(tol=1e-11, max_iter=5000)
    clean_stack, out_stack = stack_matrices(clean), stack_matrices(outliers)
    check_same_dim(as_hpd(clean_stack[0]), as_hpd(out_stack[0]))
    name = averaging_name((kind, statistic))

    base = riemannian_descent(kind, clean_stack, statistic, cfg, label=f'{name} clean')
    m, n = clean_stack.shape[0], out_stack.shape[0]
    weights = jnp.concatenate([jnp.full((m,), (1. - eps) / m), jnp.full((n,), eps / n)])
    pert = riemannian_descent(kind, jnp.concatenate([clean_stack, out_stack]), statistic,
                              replace(cfg, init=base.result), weights=weights,
                              label=f'{name} contaminated')
    converged = base.converged and pert.converged
    if not converged:
        logger.warning('%s oracle solves did not both converge', name)
    diff = (pert.result() - base.result()) / eps
    return OracleResult(base.result, pert.result, HermitianMatrix(diff), converged)


@dataclass(frozen=True)
class OutlierModel:
    """ Outliers are Toeplitz covariances of a s + c with s = steering_ideal(N, fd),
        |a| set from scr_db, and c drawn from clutter. Clean data use the same clutter.
    """
    fd: float = 0.2
    scr_db: float = 40.
    clutter: ClutterParams = field(default_factory=lambda: ClutterParams(texture_on=False))

    def __post_init__(self):
        if not 0. <= self.fd < 1.:
            raise InvalidInput(f'outlier Doppler must lie in [0, 1), got {self.fd}')


@dataclass(frozen=True)
class ContaminationSpec:
    """ One influence experiment.

    Attributes:
        m (int): Clean samples per repeat, >= 2.
        n_range (tuple): Outlier counts, each >= 1.
        outlier_model (OutlierModel): Outlier and clean-data generation.
        averaging (tuple): (MetricKind, Statistic).
        repeats (int): Independent repeats per n.
        master_seed (int): Repeat k uses stream k of this seed.
        fix_clean (bool): Reuse the clean set of repeat 0 in every repeat.
        solver (SolverConfig): Controls of the clean solve.
    """
    m: int = 50
    n_range: Tuple[int, ...] = (1, 5, 10, 20, 40)
    outlier_model: OutlierModel = field(default_factory=OutlierModel)
    averaging: Averaging = (MetricKind.AIRM, Statistic.MEAN)
    repeats: int = 100
    master_seed: int = 0
    fix_clean: bool = False
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        object.__setattr__(self, 'averaging', parse_averaging(self.averaging))
        object.__setattr__(self, 'n_range', tuple(int(n) for n in self.n_range))
        if int(self.m) < 2:
            raise InvalidInput(f'influence needs m >= 2 clean samples, got {self.m}')
        if not self.n_range or min(self.n_range) < 1:
            raise InvalidInput('n_range must be nonempty with every n >= 1')
        if int(self.repeats) < 1:
            raise InvalidInput(f'repeats must be positive, got {self.repeats}')

    @property
    def dim(self) -> int:
        return self.outlier_model.clutter.n


@dataclass
class InfluencePoint:
    """ Influence statistics at one outlier count.
    """
    n: int
    f_mean: float
    f_stderr: float
    repeats: int
    h_norm: float


@dataclass
class InfluenceResult:
    """ Influence curve of one averaging over n_range.

    Attributes:
        averaging (tuple): (MetricKind, Statistic).
        points (list): One InfluencePoint per n, in n_range order.
        rbar_norm (float): Mean |Rbar|_F over kept repeats.
        dropped (int): Repeats lost to solver failures.
        max_condition (float): Worst Hessian condition number seen.
        non_converged (int): Clean solves that hit max_iter.
        config_hash (str): Hash of the ContaminationSpec.
        seed (int): Master seed.
    """
    averaging: Averaging
    points: List[InfluencePoint] = field(default_factory=list)
    rbar_norm: float = float('nan')
    dropped: int = 0
    max_condition: float = float('nan')
    non_converged: int = 0
    config_hash: str = ''
    seed: int = 0


def clean_covariances(model: OutlierModel, m: int, key: jnp.ndarray) -> jnp.ndarray:
    """ m Toeplitz covariances of clutter snapshots, (m, N, N).
    """
    return toeplitz_array(sample_clutter(model.clutter, key, size=m))


def outlier_covariances(model: OutlierModel, count: int, key: jnp.ndarray) -> jnp.ndarray:
    """ count Toeplitz covariances of a s + clutter snapshots, (count, N, N).
    """
    s = steering_ideal(model.clutter.n, model.fd)
    a = amplitude_from_scr(model.scr_db, s, clutter_covariance(model.clutter))
    return toeplitz_array(a * s + sample_clutter(model.clutter, key, size=count))


@dataclass
class _Repeat:
    f: jnp.ndarray
    h_norm: jnp.ndarray
    rbar_norm: float
    condition: float
    converged: bool


def _run_repeat(spec: ContaminationSpec, k: int) -> Optional[_Repeat]:
    kind, statistic = spec.averaging
    k_clean, k_out = RngStream(spec.master_seed, k).split(2)
    if spec.fix_clean:
        k_clean = RngStream(spec.master_seed, 0).split(2)[0]
    try:
        clean = clean_covariances(spec.outlier_model, spec.m, k_clean)
        report = solve(AveragingProblem(list(clean), kind, statistic), spec.solver)
        system = hessian_system(spec.averaging, clean, report.result)
        pool = outlier_covariances(spec.outlier_model, max(spec.n_range), k_out)
        metric = get_metric(kind)
        rbar_norm = float(frobenius(system.rbar))
        h_norms = [float(frobenius(system.solve(_field(metric, statistic, pool[:n], system.rbar))))
                   for n in spec.n_range]
    except (NumericalFailure, DomainError) as err:
        logger.warning('influence repeat %d dropped: %s', k, err)
        return None
    h_norms = jnp.asarray(h_norms)
    return _Repeat(h_norms / rbar_norm, h_norms, rbar_norm, system.condition, report.converged)


def influence_curve(spec: ContaminationSpec, workers: int = 1, progress: bool = False) -> InfluenceResult:
    """ Mean influence value per outlier count over spec.repeats repeats.

    Each repeat draws a clean set and one pool of max(n_range) outliers; the
    count n uses the first n outliers of the pool. Repeats whose solver fails
    are dropped and logged.

    Args:
        spec (ContaminationSpec): Experiment.
        workers (int): Thread count; results do not depend on it.
        progress (bool): Show a progress bar.

    Returns:
        InfluenceResult: f_mean and f_stderr = std / sqrt(kept repeats) per n.
    """
    name = averaging_name(spec.averaging)
    logger.info('influence of %s: m=%d, %d repeats, n in %s', name, spec.m, spec.repeats, list(spec.n_range))
    outcomes = map_trials(lambda k: _run_repeat(spec, k), range(int(spec.repeats)),
                          workers=workers, desc=f'influence {name}', progress=progress)
    kept = [o for o in outcomes if o is not None]
    result = InfluenceResult(spec.averaging, dropped=len(outcomes) - len(kept),
                             config_hash=config_hash(spec), seed=spec.master_seed)
    if result.dropped:
        logger.warning('%s: %d of %d influence repeats dropped', name, result.dropped, len(outcomes))
    if not kept:
        result.points = [InfluencePoint(n, float('nan'), float('nan'), 0, float('nan')) for n in spec.n_range]
        return result

    f = jnp.stack([o.f for o in kept])
    h = jnp.stack([o.h_norm for o in kept])
    k = len(kept)
    stderr = jnp.std(f, axis=0, ddof=1) / math.sqrt(k) if k > 1 else jnp.full((f.shape[1],), jnp.nan)
    result.points = [InfluencePoint(n, float(f[:, i].mean()), float(stderr[i]), k, float(h[:, i].mean()))
                     for i, n in enumerate(spec.n_range)]
    result.rbar_norm = float(jnp.mean(jnp.asarray([o.rbar_norm for o in kept])))
    result.max_condition = max(o.condition for o in kept)
    result.non_converged = sum(not o.converged for o in kept)
    return result
