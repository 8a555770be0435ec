from hpdcfar.montecarlo.bench import bench_bw_solvers, convergence_ordering
from hpdcfar.montecarlo.calibration import (
    ThresholdEntry, ThresholdTable, calibrate, calibrate_threshold, threshold_from_statistics
)
from hpdcfar.montecarlo.scenario import ScenarioConfig
from hpdcfar.montecarlo.sweeps import (
    PdCurve, PdEstimate, estimate_pd, run_fd_sweep, run_mismatch_sweep, run_scr_sweep
)
