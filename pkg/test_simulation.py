import math
import unittest

import jax.numpy as jnp

from hpdcfar.errors import InvalidInput
from hpdcfar.simulation import (
    ClutterParams, Hypothesis, Interference, RngStream, SteeringSpec, amplitude_from_scr,
    autocorr_estimate, clutter_covariance, make_observation, make_secondary_set,
    nominal_direction, sample_clutter, scm, sigma_matrix, steering_ideal,
    steering_mismatched, toeplitz_cov
)


def max_abs(a) -> float:
    return float(jnp.max(jnp.abs(a)))


class TestSteering(unittest.TestCase):
    """ Tests for the target steering vectors.
    """
    def test_zero_doppler(self):
        """ N = 4, fd = 0 gives (1/2, 1/2, 1/2, 1/2).
        """
        s = steering_ideal(4, 0.)
        self.assertLess(max_abs(s - 0.5), 1e-15)

    def test_quarter_doppler(self):
        """ N = 4, fd = 0.25 gives (1, -i, -1, i) / 2.
        """
        s = steering_ideal(4, 0.25)
        target = jnp.array([1., -1j, -1., 1j]) / 2.
        self.assertLess(max_abs(s - target), 1e-15)

    def test_unit_norm(self):
        """ Ideal steering vectors have unit norm.
        """
        self.assertAlmostEqual(float(jnp.linalg.norm(steering_ideal(8, 0.37))), 1.)

    def test_doppler_range(self):
        """ fd = 1 is outside [0, 1).
        """
        with self.assertRaises(InvalidInput):
            steering_ideal(4, 1.)

    def test_mismatch_angle(self):
        """ |s^H e_1|^2 / |s|^2 = cos^2(theta).
        """
        for theta, target in ((30., 0.75), (0., 1.), (90., 0.)):
            s = steering_mismatched(8, theta, RngStream(0, 0))
            e1 = nominal_direction(8)
            ratio = float(jnp.abs(jnp.vdot(s, e1)) ** 2 / jnp.real(jnp.vdot(s, s)))
            self.assertAlmostEqual(ratio, target, places=10,
                                   msg=f'Incorrect mismatch at {theta} degrees.')

    def test_mismatch_norm(self):
        """ Mismatched steering has norm 1 / sqrt(N).
        """
        s = steering_mismatched(8, 15., RngStream(3, 0))
        self.assertAlmostEqual(float(jnp.linalg.norm(s)), 1. / math.sqrt(8.))

    def test_mismatch_reproducible(self):
        """ The mismatch direction depends only on the seed.
        """
        a = SteeringSpec(mode='mismatched', theta_mis_deg=30., orthogonal_draw_seed=4).target()
        b = SteeringSpec(mode='mismatched', theta_mis_deg=30., orthogonal_draw_seed=4).target()
        self.assertLess(max_abs(a - b), 1e-15)

    def test_spec(self):
        """ In mismatched mode the detectors assume e_1.
        """
        spec = SteeringSpec(n=4, mode='mismatched', theta_mis_deg=15.)
        self.assertLess(max_abs(spec.assumed() - nominal_direction(4)), 1e-15)
        with self.assertRaises(InvalidInput):
            SteeringSpec(mode='squint')


class TestClutter(unittest.TestCase):
    """ Tests for the compound-Gaussian clutter model.
    """
    def test_sigma(self):
        """ Sigma has diagonal cnr + 1 and Sigma(2, 1) = 90 e^{i 0.4 pi}.
        """
        sigma = sigma_matrix(ClutterParams())()
        for i in range(8):
            self.assertAlmostEqual(float(jnp.real(sigma[i, i])), 101.)
        self.assertAlmostEqual(float(jnp.real(sigma[1, 0])), 27.811529493745, places=8)
        self.assertAlmostEqual(float(jnp.imag(sigma[1, 0])), 85.595086466419, places=8)

    def test_covariance(self):
        """ Clutter covariance is E[tau] Sigma.
        """
        params = ClutterParams()
        self.assertLess(max_abs(clutter_covariance(params)() - 12. * sigma_matrix(params)()), 1e-10)
        gaussian = ClutterParams(texture_on=False)
        self.assertLess(max_abs(clutter_covariance(gaussian)() - sigma_matrix(gaussian)()), 1e-12)

    def test_invalid(self):
        """ rho outside (0, 1) is rejected.
        """
        with self.assertRaises(InvalidInput):
            ClutterParams(rho=1.)

    def test_reproducible(self):
        """ A stream reproduces its draws; another stream does not.
        """
        params = ClutterParams()
        a = sample_clutter(params, RngStream(5, 3), size=4)
        b = sample_clutter(params, RngStream(5, 3), size=4)
        c = sample_clutter(params, RngStream(5, 4), size=4)
        self.assertEqual(a.shape, (4, 8))
        self.assertLess(max_abs(a - b), 1e-15)
        self.assertGreater(max_abs(a - c), 1e-3)

    def test_second_moment(self):
        """ The SCM of many snapshots approaches E[tau] Sigma, with and without texture.
        """
        for params in (ClutterParams(n=4, texture_on=False), ClutterParams(n=4)):
            xs = sample_clutter(params, RngStream(11, 0), size=20000)
            est = jnp.einsum('ki,kj->ij', xs, jnp.conj(xs)) / xs.shape[0]
            r = clutter_covariance(params)()
            rel = float(jnp.linalg.norm(est - r) / jnp.linalg.norm(r))
            self.assertLess(rel, 0.05, msg=f'second moment off by {rel:.3f}')


class TestObservation(unittest.TestCase):
    """ Tests for the CUT and secondary data synthesis.
    """
    def test_amplitude(self):
        """ SCR = |a|^2 s^H R^-1 s.
        """
        s = steering_ideal(4, 0.1)
        self.assertAlmostEqual(amplitude_from_scr(0., s, jnp.eye(4)), 1.)
        self.assertAlmostEqual(amplitude_from_scr(0., s, 2. * jnp.eye(4)), math.sqrt(2.))
        self.assertAlmostEqual(amplitude_from_scr(10., s, jnp.eye(4)), math.sqrt(10.))

    def test_amplitude_zero_steering(self):
        """ A zero steering vector is rejected.
        """
        with self.assertRaises(InvalidInput):
            amplitude_from_scr(0., jnp.zeros(4), jnp.eye(4))

    def test_signal(self):
        """ H1 adds a s to the H0 clutter of the same stream.
        """
        params = ClutterParams(n=4)
        s = steering_ideal(4, 0.3)
        h0 = make_observation(Hypothesis.H0, params, s, 5., RngStream(2, 7))
        h1 = make_observation(Hypothesis.H1, params, s, 5., RngStream(2, 7))
        a = amplitude_from_scr(5., s, clutter_covariance(params))
        self.assertLess(max_abs(h1 - h0 - a * s), 1e-9)

    def test_interference(self):
        """ Only the first count secondary snapshots carry the interference.
        """
        params = ClutterParams(n=4)
        interference = Interference(fi=0.2, inr_db=10., count=2)
        xs = make_secondary_set(5, params, interference, RngStream(1, 0))
        clean = make_secondary_set(5, params, None, RngStream(1, 0))
        v = steering_ideal(4, 0.2)
        b = amplitude_from_scr(10., v, clutter_covariance(params))
        self.assertLess(max_abs(xs[:2] - clean[:2] - b * v), 1e-9)
        self.assertLess(max_abs(xs[2:] - clean[2:]), 1e-15)

    def test_interference_count(self):
        """ More interfered snapshots than secondary data is rejected.
        """
        with self.assertRaises(InvalidInput):
            make_secondary_set(2, ClutterParams(n=4), Interference(count=3), RngStream(0, 0))


class TestEstimation(unittest.TestCase):
    """ Tests for the Toeplitz and sample covariance estimators.
    """
    def test_autocorr(self):
        """ Autocorrelation of (1, 1, 1, 1) is (1, 3/4, 1/2, 1/4).
        """
        r = autocorr_estimate(jnp.ones(4))
        for got, want in zip(r, (1., 0.75, 0.5, 0.25)):
            self.assertAlmostEqual(float(jnp.real(got)), want)

    def test_toeplitz_structure(self):
        """ The estimate is Hermitian Toeplitz: r_k below the diagonal, conj(r_k) above.
        """
        x = sample_clutter(ClutterParams(n=6), RngStream(8, 0))
        t = toeplitz_cov(x)()
        r = autocorr_estimate(x)
        for i in range(6):
            self.assertAlmostEqual(complex(t[i, i]), complex(t[0, 0]), places=10)
        for k in range(1, 6):
            for i in range(k, 6):
                self.assertAlmostEqual(complex(t[i, i - k]), complex(r[k]), places=10)
                self.assertAlmostEqual(complex(t[i - k, i]), complex(jnp.conj(r[k])), places=10)

    def test_toeplitz_phase(self):
        """ A common phase rotation of the snapshot leaves the estimate unchanged.
        """
        x = sample_clutter(ClutterParams(n=6), RngStream(9, 0))
        a = toeplitz_cov(x)()
        b = toeplitz_cov(jnp.exp(0.7j) * x)()
        self.assertLess(max_abs(a - b), 1e-9)

    def test_toeplitz_spike(self):
        """ (1, 0, 0, 0) gives I / 4.
        """
        t = toeplitz_cov(jnp.array([1., 0., 0., 0.]))()
        self.assertLess(max_abs(t - 0.25 * jnp.eye(4)), 1e-15)

    def test_scm_loaded(self):
        """ The SCM of one snapshot is loaded to positive definite.
        """
        x = jnp.array([1., 2., 0., 1j])
        w = jnp.linalg.eigvalsh(scm([x])())
        floor = 1e-6 * 6. / 4.
        self.assertAlmostEqual(float(w[0]) / floor, 1., places=6)

    def test_scm_empty(self):
        """ No snapshots is rejected.
        """
        with self.assertRaises(InvalidInput):
            scm([])

    def test_non_finite(self):
        """ NaN samples are rejected.
        """
        with self.assertRaises(InvalidInput):
            toeplitz_cov(jnp.array([1., jnp.nan]))


if __name__ == '__main__':
    unittest.main()
