from hpdcfar.averaging.airm import airm_mean, airm_median
from hpdcfar.averaging.bureswasserstein import (
    bw_mean_fixed_a, bw_mean_fixed_b, bw_mean_rgd, bw_median_rgd, bw_stationarity
)
from hpdcfar.averaging.config import (
    Armijo, AveragingProblem, FixedStep, SolverConfig, SolverReport, Statistic
)
from hpdcfar.averaging.descent import mean_objective, median_objective
from hpdcfar.averaging.dispatch import solve
from hpdcfar.averaging.euclidean import arithmetic_mean
from hpdcfar.averaging.logeuclidean import le_mean, le_median
