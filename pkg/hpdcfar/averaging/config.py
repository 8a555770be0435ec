""" Averaging problems, solver controls and convergence reports.
"""
import enum
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import jax.numpy as jnp

from hpdcfar.errors import InvalidInput
from hpdcfar.kernel import check_same_dim
from hpdcfar.metrics import MetricKind
from hpdcfar.primitives import HpdMatrix, MatrixLike, as_hpd


class Statistic(enum.Enum):
    """ Minimize the sum of squared distances (mean) or of distances (median).
    """
    MEAN = 'mean'
    MEDIAN = 'median'

    @classmethod
    def parse(cls, value: Union[str, 'Statistic']) -> 'Statistic':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidInput(f'unknown statistic {value!r}') from None


@dataclass(frozen=True)
class FixedStep:
    """ Constant step size eta.
    """
    eta: float = 0.5

    def __post_init__(self):
        if not self.eta > 0.:
            raise InvalidInput(f'fixed step must be positive, got {self.eta}')


@dataclass(frozen=True)
class Armijo:
    """ Backtracking line search: try initial, initial*shrink, ... until
        F(new) <= F - c * step * |grad|^2 or max_halvings trials failed.
    """
    initial: float = 1.
    shrink: float = 0.5
    max_halvings: int = 30
    c: float = 1e-4

    def __post_init__(self):
        if not self.initial > 0.:
            raise InvalidInput(f'Armijo initial step must be positive, got {self.initial}')
        if not 0. < self.shrink < 1.:
            raise InvalidInput(f'Armijo shrink must lie in (0, 1), got {self.shrink}')
        if self.max_halvings < 0:
            raise InvalidInput('Armijo max_halvings must be non-negative')


StepRule = Union[FixedStep, Armijo]

BW_METHODS = ('rgd', 'fixed_a', 'fixed_b')


@dataclass(frozen=True)
class SolverConfig:
    """ Numerical controls shared by every iterative solver.

    Attributes:
        init (MatrixLike, optional): Starting point, None for the arithmetic mean.
        tol (float): Stop when |R_{t+1} - R_t|_F <= tol.
        max_iter (int): Iteration cap; hitting it is reported, not raised.
        step (StepRule, optional): None picks FixedStep(0.5) for means and
            Armijo() for medians.
        bw_method (str): Which BW mean solver solve() dispatches to.
    """
    init: Optional[MatrixLike] = field(default=None, compare=False)
    tol: float = 1e-5
    max_iter: int = 500
    step: Optional[StepRule] = None
    bw_method: str = 'rgd'

    def __post_init__(self):
        if not self.tol > 0.:
            raise InvalidInput(f'tol must be positive, got {self.tol}')
        if int(self.max_iter) < 1:
            raise InvalidInput(f'max_iter must be at least 1, got {self.max_iter}')
        if self.bw_method not in BW_METHODS:
            raise InvalidInput(f'bw_method must be one of {BW_METHODS}, got {self.bw_method!r}')

    def step_for(self, statistic: Statistic) -> StepRule:
        if self.step is not None:
            return self.step
        return FixedStep(0.5) if statistic is Statistic.MEAN else Armijo()


@dataclass
class SolverReport:
    """ Outcome of an averaging solver.

    Attributes:
        result (HpdMatrix): Last iterate.
        iterations (int): Number of updates performed.
        final_delta (float): |R_{t+1} - R_t|_F of the last update.
        stationarity_residual (float): Solver-specific first-order residual.
        converged (bool): final_delta <= tol reached before max_iter, the
            median stopped on a data point, or a stalled line search left a
            stationarity residual <= tol.
        objective_trace (list): Objective value at every iterate.
        delta_trace (list): |Delta R| of every update.
    """
    result: HpdMatrix
    iterations: int
    final_delta: float
    stationarity_residual: float
    converged: bool
    objective_trace: List[float] = field(default_factory=list)
    delta_trace: List[float] = field(default_factory=list)


def stack_matrices(matrices: Sequence[MatrixLike]) -> jnp.ndarray:
    """ Validates a collection of HPD matrices and stacks it into (m, N, N).
    """
    mats = [as_hpd(m) for m in matrices]
    if not mats:
        raise InvalidInput('cannot average an empty collection')
    check_same_dim(*mats)
    return jnp.stack([m() for m in mats])


@dataclass
class AveragingProblem:
    """ A mean or median instance.

    Attributes:
        matrices (list): m >= 1 HPD matrices of equal dimension.
        kind (MetricKind): Geometry.
        statistic (Statistic): mean or median.
    """
    matrices: Sequence[MatrixLike]
    kind: MetricKind = MetricKind.AIRM
    statistic: Statistic = Statistic.MEAN

    def __post_init__(self):
        self.kind = MetricKind.parse(self.kind)
        self.statistic = Statistic.parse(self.statistic)
        self.stack = stack_matrices(self.matrices)

    @property
    def m(self) -> int:
        return self.stack.shape[0]

    @property
    def dim(self) -> int:
        return self.stack.shape[-1]
