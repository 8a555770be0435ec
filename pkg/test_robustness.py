import os
import unittest

import jax.numpy as jnp
from jax import random

from hpdcfar.averaging import (
    AveragingProblem, SolverConfig, Statistic, arithmetic_mean, le_mean, solve
)
from hpdcfar.errors import DegenerateMedian, InvalidInput, SingularHessian
from hpdcfar.metrics import MetricKind, distance, exp_map, inner_product
from hpdcfar.robustness import (
    ContaminationSpec, OutlierModel, clean_covariances, contaminated_grad,
    contaminated_objective, hessian_system, influence_curve, influence_matrix,
    influence_value, outlier_covariances, parse_averaging, perturbation_oracle
)
from hpdcfar.simulation import ClutterParams, RngStream
from hpdcfar.simulation.rng import complex_normal

SLOW = os.environ.get('HPDCFAR_SLOW') == '1'

TIGHT = SolverConfig(tol=1e-11, max_iter=5000)


def random_hpd_set(seed: int, m: int, n: int, scale: float = 1.) -> list:
    w = complex_normal(random.PRNGKey(seed), (m, n, 2 * n))
    stack = scale * w @ jnp.conj(jnp.swapaxes(w, -1, -2)) / (2 * n)
    return [stack[i] for i in range(m)]


def rel_diff(a, b) -> float:
    return float(jnp.linalg.norm(a - b) / jnp.linalg.norm(b))


def small_spec(**kwargs) -> ContaminationSpec:
    base = dict(m=6, n_range=(1, 3), repeats=3, averaging='LE:mean',
                outlier_model=OutlierModel(clutter=ClutterParams(n=4, texture_on=False)))
    base.update(kwargs)
    return ContaminationSpec(**base)


class TestContaminatedObjective(unittest.TestCase):
    """ Tests for the contaminated objective and its gradient.
    """
    def test_parse(self):
        """ 'BW:median' and pairs parse to the same averaging.
        """
        self.assertEqual(parse_averaging('BW:median'), (MetricKind.BW, Statistic.MEDIAN))
        self.assertEqual(parse_averaging(('bw', 'median')), (MetricKind.BW, Statistic.MEDIAN))
        with self.assertRaises(InvalidInput):
            parse_averaging('BW')

    def test_clean_stationary(self):
        """ Without contamination the gradient vanishes at the clean mean.
        """
        clean = random_hpd_set(0, 5, 3)
        outliers = random_hpd_set(1, 2, 3, scale=5.)
        rbar = solve(AveragingProblem(clean, 'AIRM', 'mean'), TIGHT).result
        g = contaminated_grad('AIRM:mean', clean, outliers, 0., rbar)
        self.assertLess(float(jnp.linalg.norm(g())), 1e-7)

    def test_objective_blend(self):
        """ F_eps blends the clean and outlier objectives.
        """
        clean = random_hpd_set(2, 4, 3)
        outliers = random_hpd_set(3, 2, 3)
        r = arithmetic_mean(clean)
        f0 = contaminated_objective('BW:mean', clean, outliers, 0., r)
        f_clean = sum(distance('BW', c, r) ** 2 for c in clean) / 4.
        f_out = sum(distance('BW', p, r) ** 2 for p in outliers) / 2.
        self.assertAlmostEqual(f0, f_clean, places=10)
        self.assertAlmostEqual(contaminated_objective('BW:mean', clean, outliers, 0.25, r),
                               0.75 * f_clean + 0.25 * f_out, places=10)

    def test_gradient_difference(self):
        """ <grad F_eps, V> matches a central difference of F_eps along exp_R(tV).
        """
        clean = random_hpd_set(4, 4, 3)
        outliers = random_hpd_set(5, 2, 3, scale=3.)
        r = arithmetic_mean(clean)
        v = 0.1 * (clean[0] - clean[1])
        h = 1e-5
        for averaging in ('AIRM:mean', 'BW:median', 'LE:median'):
            kind = parse_averaging(averaging)[0]
            g = contaminated_grad(averaging, clean, outliers, 0.3, r)
            up = contaminated_objective(averaging, clean, outliers, 0.3, exp_map(kind, r, h * v))
            down = contaminated_objective(averaging, clean, outliers, 0.3, exp_map(kind, r, -h * v))
            self.assertAlmostEqual(inner_product(kind, r, g, v), (up - down) / (2. * h), places=5,
                                   msg=f'{averaging} gradient fails the difference check.')

    def test_eps_range(self):
        """ eps = 1 is rejected.
        """
        clean = random_hpd_set(6, 3, 2)
        with self.assertRaises(InvalidInput):
            contaminated_grad('AIRM:mean', clean, clean, 1., clean[0])


class TestInfluence(unittest.TestCase):
    """ Tests for the linearized influence of outliers.
    """
    def test_euclidean_closed_form(self):
        """ For the arithmetic mean, H = mean(P_j) - Rbar.
        """
        clean = random_hpd_set(7, 5, 3)
        outliers = random_hpd_set(8, 3, 3, scale=4.)
        rbar = arithmetic_mean(clean)()
        h = influence_matrix('Euclidean:mean', clean, outliers)
        target = jnp.mean(jnp.stack(outliers), axis=0) - rbar
        self.assertLess(rel_diff(h(), target), 1e-7)

    def test_outlier_at_mean(self):
        """ An outlier sitting on the clean mean has no influence.
        """
        clean = random_hpd_set(9, 5, 3)
        for averaging in ('AIRM:mean', 'BW:mean', 'LE:mean'):
            kind, statistic = parse_averaging(averaging)
            rbar = solve(AveragingProblem(clean, kind, statistic), TIGHT).result
            h = influence_matrix(averaging, clean, [rbar], rbar=rbar)
            self.assertLess(influence_value(h, rbar), 1e-6, msg=averaging)

    def test_oracle_means(self):
        """ The linearized shift matches a small-eps recomputation within 5%.
        """
        clean = random_hpd_set(10, 6, 3)
        outliers = random_hpd_set(11, 2, 3, scale=5.)
        for averaging in ('AIRM:mean', 'BW:mean'):
            oracle = perturbation_oracle(averaging, clean, outliers, eps=1e-4)
            self.assertTrue(oracle.converged)
            h = influence_matrix(averaging, clean, outliers, rbar=oracle.rbar)
            self.assertLess(rel_diff(oracle.derivative(), h()), 0.05, msg=averaging)

    def test_oracle_median(self):
        """ The LE median linearization matches a small-eps recomputation within 5%.
        """
        clean = random_hpd_set(10, 6, 3)
        outliers = random_hpd_set(11, 2, 3, scale=5.)
        oracle = perturbation_oracle('LE:median', clean, outliers, eps=1e-4)
        h = influence_matrix('LE:median', clean, outliers, rbar=oracle.rbar)
        self.assertLess(rel_diff(oracle.derivative(), h()), 0.05)

    def test_oracle_zero_eps(self):
        """ The oracle needs a positive contamination mass.
        """
        clean = random_hpd_set(12, 3, 2)
        with self.assertRaises(InvalidInput):
            perturbation_oracle('AIRM:mean', clean, clean, eps=0.)

    def test_degenerate_median(self):
        """ A median on a clean point has no Hessian system.
        """
        p = jnp.diag(jnp.array([1., 2.]))
        q = jnp.diag(jnp.array([3., 1.]))
        with self.assertRaises(DegenerateMedian):
            hessian_system('AIRM:median', [p, p, q], p)

    def test_singular(self):
        """ The scalar Euclidean median has a flat gradient field between data points.
        """
        clean = [jnp.array([[1.]]), jnp.array([[2.]]), jnp.array([[4.]])]
        with self.assertRaises(SingularHessian):
            hessian_system('Euclidean:median', clean, jnp.array([[2.5]]))

    def test_influence_value(self):
        """ f = |H|_F / |Rbar|_F.
        """
        rbar = jnp.diag(jnp.array([3., 4.]))
        self.assertAlmostEqual(influence_value(jnp.zeros((2, 2)), rbar), 0.)
        self.assertAlmostEqual(influence_value(rbar, rbar), 1.)
        self.assertAlmostEqual(influence_value(jnp.eye(2), rbar), 2. ** 0.5 / 5.)


class TestInfluenceCurve(unittest.TestCase):
    """ Tests for the influence experiment.
    """
    def test_validation(self):
        """ m < 2, an empty n_range and unknown averagings are rejected.
        """
        with self.assertRaises(InvalidInput):
            small_spec(m=1)
        with self.assertRaises(InvalidInput):
            small_spec(n_range=())
        with self.assertRaises(InvalidInput):
            small_spec(averaging='Hellinger:mean')

    def test_data(self):
        """ Clean and outlier sets are stacks of HPD Toeplitz covariances.
        """
        model = small_spec().outlier_model
        clean = clean_covariances(model, 5, RngStream(0, 0)())
        pool = outlier_covariances(model, 3, RngStream(0, 1)())
        self.assertEqual(clean.shape, (5, 4, 4))
        self.assertEqual(pool.shape, (3, 4, 4))
        # 40 dB outliers dominate the clutter power.
        self.assertGreater(float(jnp.mean(jnp.real(pool[:, 0, 0]))),
                           float(jnp.mean(jnp.real(clean[:, 0, 0]))))

    def test_curve(self):
        """ One point per outlier count with every repeat kept.
        """
        result = influence_curve(small_spec())
        self.assertEqual([p.n for p in result.points], [1, 3])
        self.assertEqual(result.dropped, 0)
        for p in result.points:
            self.assertEqual(p.repeats, 3)
            self.assertGreater(p.f_mean, 0.)
            self.assertGreater(p.f_stderr, 0.)
        self.assertGreaterEqual(result.max_condition, 1.)
        self.assertEqual(len(result.config_hash), 16)

    def test_workers(self):
        """ The curve does not depend on the worker count.
        """
        one = influence_curve(small_spec(), workers=1)
        two = influence_curve(small_spec(), workers=2)
        self.assertEqual([p.f_mean for p in one.points], [p.f_mean for p in two.points])

    def test_fix_clean(self):
        """ With fix_clean every repeat shares the clean set of repeat 0.
        """
        spec = small_spec(fix_clean=True, repeats=2)
        result = influence_curve(spec)
        key = RngStream(spec.master_seed, 0).split(2)[0]
        clean = clean_covariances(spec.outlier_model, spec.m, key)
        rbar = le_mean(list(clean))()
        self.assertAlmostEqual(result.rbar_norm, float(jnp.linalg.norm(rbar)), places=8)

    def test_nondecreasing(self):
        """ f does not drop with more outliers beyond three standard errors.
        """
        result = influence_curve(small_spec(n_range=(1, 5, 10, 20, 40), repeats=8))
        self.assertEqual([p.n for p in result.points], [1, 5, 10, 20, 40])
        for a, b in zip(result.points, result.points[1:]):
            noise = 3. * (a.f_stderr ** 2 + b.f_stderr ** 2) ** 0.5
            self.assertGreaterEqual(b.f_mean, a.f_mean - noise, msg=f'n={a.n}->{b.n}')

    def test_single_repeat(self):
        """ One repeat has no standard error.
        """
        result = influence_curve(small_spec(repeats=1))
        self.assertTrue(all(p.f_stderr != p.f_stderr for p in result.points))


@unittest.skipUnless(SLOW, 'set HPDCFAR_SLOW=1 for the oracle runs')
class TestOracleAcceptance(unittest.TestCase):
    """ Linearization against recomputation on simulated radar data.
    """
    def test_all_averagings(self):
        """ N = 4, m = 10, n = 2: every averaging within 5% of the oracle.
        """
        model = OutlierModel(clutter=ClutterParams(n=4, texture_on=False))
        clean = list(clean_covariances(model, 10, RngStream(0, 0)()))
        outliers = list(outlier_covariances(model, 2, RngStream(0, 1)()))
        for kind in ('AIRM', 'LE', 'BW'):
            for statistic in ('mean', 'median'):
                averaging = f'{kind}:{statistic}'
                oracle = perturbation_oracle(averaging, clean, outliers, eps=1e-5)
                h = influence_matrix(averaging, clean, outliers, rbar=oracle.rbar)
                self.assertLess(rel_diff(oracle.derivative(), h()), 0.05, msg=averaging)


if __name__ == '__main__':
    unittest.main()
