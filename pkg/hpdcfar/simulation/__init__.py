from hpdcfar.simulation.clutter import (
    ClutterParams, Hypothesis, Interference, amplitude_from_scr, clutter_covariance,
    make_observation, make_secondary_set, sample_clutter, sigma_matrix
)
from hpdcfar.simulation.estimation import autocorr_estimate, scm, toeplitz_cov
from hpdcfar.simulation.rng import RngStream
from hpdcfar.simulation.steering import (
    SteeringSpec, nominal_direction, steering_ideal, steering_mismatched
)
