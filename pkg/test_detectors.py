import math
import unittest

import jax.numpy as jnp

from hpdcfar.averaging import Statistic
from hpdcfar.detectors import (
    DetectionStatistic, DetectorKind, DetectorSpec, amf_stat, anmf_stat, decide,
    geometric_amf_stat, matrix_cfar_stat
)
from hpdcfar.errors import InvalidInput
from hpdcfar.metrics import MetricKind
from hpdcfar.simulation import Hypothesis, steering_ideal


class TestDetectorSpec(unittest.TestCase):
    """ Tests for detector names and parsing.
    """
    def test_parse(self):
        """ 'MatrixCFAR:BW:mean' round-trips through its name.
        """
        spec = DetectorSpec.parse('MatrixCFAR:BW:mean')
        self.assertIs(spec.kind, DetectorKind.MATRIX_CFAR)
        self.assertIs(spec.metric, MetricKind.BW)
        self.assertIs(spec.statistic, Statistic.MEAN)
        self.assertEqual(spec.name, 'MatrixCFAR:BW:mean')
        self.assertFalse(spec.uses_steering)

    def test_plain(self):
        """ AMF takes no averaging and depends on the steering.
        """
        spec = DetectorSpec.parse('AMF')
        self.assertIsNone(spec.averaging)
        self.assertTrue(spec.uses_steering)
        self.assertEqual(DetectorSpec.parse('GeometricAMF:airm:median').averaging,
                         (MetricKind.AIRM, Statistic.MEDIAN))

    def test_invalid(self):
        """ Unknown kinds, missing averagings and stray averagings are rejected.
        """
        for text in ('CFAR', 'MatrixCFAR', 'MatrixCFAR:BW', 'AMF:AIRM:mean'):
            with self.assertRaises(InvalidInput, msg=text):
                DetectorSpec.parse(text)

    def test_statistic_value(self):
        """ Negative and non-finite statistic values are rejected.
        """
        spec = DetectorSpec.parse('AMF')
        self.assertEqual(DetectionStatistic(0., spec).value, 0.)
        for bad in (-1., float('nan'), float('inf')):
            with self.assertRaises(InvalidInput):
                DetectionStatistic(bad, spec)


class TestStatistics(unittest.TestCase):
    """ Tests for the test statistics.
    """
    def test_amf_matched(self):
        """ AMF of x = s with R = I and |s| = 1 is 1; x = 2 s gives 4.
        """
        s = steering_ideal(4, 0.2)
        self.assertAlmostEqual(amf_stat(s, s, jnp.eye(4)), 1.)
        self.assertAlmostEqual(amf_stat(2. * s, s, jnp.eye(4)), 4.)

    def test_amf_scaled_covariance(self):
        """ AMF scales as 1 / c with the covariance c R.
        """
        s = steering_ideal(4, 0.)
        x = jnp.array([1., 0.5j, -0.3, 2.])
        self.assertAlmostEqual(amf_stat(x, s, 2. * jnp.eye(4)), amf_stat(x, s, jnp.eye(4)) / 2.)

    def test_anmf_range(self):
        """ ANMF is 1 along s and 0 orthogonal to it.
        """
        s = steering_ideal(4, 0.)
        self.assertAlmostEqual(anmf_stat(3. * s, s, jnp.eye(4)), 1.)
        x = jnp.array([1., -1., 0., 0.])
        self.assertAlmostEqual(anmf_stat(x, s, jnp.eye(4)), 0.)

    def test_anmf_scale_invariance(self):
        """ ANMF does not change when x or R is scaled.
        """
        s = steering_ideal(4, 0.1)
        x = jnp.array([1., 0.5j, -0.3, 2.])
        r = jnp.diag(jnp.array([1., 2., 3., 4.]))
        base = anmf_stat(x, s, r)
        self.assertAlmostEqual(anmf_stat(5. * x, s, r), base)
        self.assertAlmostEqual(anmf_stat(x, s, 7. * r), base)

    def test_anmf_zero(self):
        """ A zero snapshot is rejected.
        """
        with self.assertRaises(InvalidInput):
            anmf_stat(jnp.zeros(4), steering_ideal(4, 0.), jnp.eye(4))

    def test_shape(self):
        """ A snapshot of the wrong length is rejected.
        """
        with self.assertRaises(InvalidInput):
            amf_stat(jnp.ones(3), steering_ideal(4, 0.), jnp.eye(4))

    def test_matrix_cfar(self):
        """ Matrix-CFAR statistic is the geodesic distance.
        """
        rg = jnp.array([[2.]])
        rcut = jnp.array([[8.]])
        self.assertAlmostEqual(matrix_cfar_stat(rg, rcut, 'AIRM'), math.log(4.))
        self.assertAlmostEqual(matrix_cfar_stat(jnp.eye(2), jnp.eye(2), 'LE'), 0.)

    def test_geometric_amf(self):
        """ Geometric AMF is the AMF whitened by R_g.
        """
        s = steering_ideal(4, 0.3)
        x = jnp.array([0.2, 1j, 1., -0.5])
        rg = jnp.diag(jnp.array([1., 2., 1., 3.]))
        self.assertAlmostEqual(geometric_amf_stat(x, s, rg), amf_stat(x, s, rg))


class TestDecide(unittest.TestCase):
    """ Tests for the threshold decision.
    """
    def test_strict(self):
        """ H1 only when the statistic strictly exceeds gamma.
        """
        self.assertIs(decide(2., 1.), Hypothesis.H1)
        self.assertIs(decide(1., 1.), Hypothesis.H0)
        self.assertIs(decide(0.5, 1.), Hypothesis.H0)

    def test_wrapped(self):
        """ DetectionStatistic values are unwrapped.
        """
        stat = DetectionStatistic(3., DetectorSpec.parse('ANMF'))
        self.assertIs(decide(stat, 2.), Hypothesis.H1)

    def test_infinite_threshold(self):
        """ An infinite threshold never detects.
        """
        self.assertIs(decide(1e300, float('inf')), Hypothesis.H0)


if __name__ == '__main__':
    unittest.main()
