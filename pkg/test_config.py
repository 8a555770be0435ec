import os
import tempfile
import unittest

import yaml

from hpdcfar.config import (
    DetectSection, InfluenceSection, RunConfig, dump, from_document, load_config, merge
)
from hpdcfar.errors import ConfigError
from hpdcfar.io import PD_HEADER, write_csv


def write_yaml(directory: str, text: str) -> str:
    path = os.path.join(directory, 'run.yaml')
    with open(path, 'w') as f:
        f.write(text)
    return path


class TestLoadConfig(unittest.TestCase):
    """ Tests for presets, files and overrides.
    """
    def test_presets(self):
        """ desk and paper presets set the detection budgets.
        """
        desk = load_config()
        paper = load_config(preset='paper')
        self.assertEqual(desk.detect.pfa, 1e-2)
        self.assertEqual(desk.detect.calib_trials, 10000)
        self.assertEqual(paper.detect.pfa, 1e-3)
        self.assertEqual(paper.detect.trials_pd, 2000)
        self.assertEqual(paper.influence.n_range, tuple(range(1, 41)))

    def test_unknown_preset(self):
        """ Unknown presets are configuration errors.
        """
        with self.assertRaises(ConfigError):
            load_config(preset='lab')

    def test_file_and_overrides(self):
        """ The file overrides the preset and flags override the file.
        """
        with tempfile.TemporaryDirectory() as tmp:
            path = write_yaml(tmp, 'seed: 7\ndetect:\n  pfa: 1e-3\n  m: 24\n')
            cfg = load_config(path, overrides={'detect': {'pfa': 0.05}})
        self.assertEqual(cfg.seed, 7)
        self.assertEqual(cfg.detect.m, 24)
        self.assertEqual(cfg.detect.pfa, 0.05)
        self.assertEqual(cfg.detect.calib_trials, 10000)

    def test_exponent_string(self):
        """ 1e-3 without a dot still reads as a number.
        """
        with tempfile.TemporaryDirectory() as tmp:
            cfg = load_config(write_yaml(tmp, 'detect:\n  pfa: 1e-3\n'))
        self.assertEqual(cfg.detect.pfa, 1e-3)

    def test_empty_file(self):
        """ An empty file is a configuration error.
        """
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ConfigError):
                load_config(write_yaml(tmp, ''))

    def test_unknown_key(self):
        """ Unknown keys are reported with their dotted path.
        """
        with tempfile.TemporaryDirectory() as tmp:
            path = write_yaml(tmp, 'detect:\n  clutter:\n    cnr: 20\n')
            with self.assertRaises(ConfigError) as ctx:
                load_config(path)
        self.assertEqual(ctx.exception.path, 'detect.clutter.cnr')

    def test_wrong_type(self):
        """ A number where a boolean belongs is reported with its path.
        """
        with self.assertRaises(ConfigError) as ctx:
            from_document(RunConfig, {'detect': {'clutter': {'texture_on': 3}}})
        self.assertEqual(ctx.exception.path, 'detect.clutter.texture_on')
        with self.assertRaises(ConfigError) as ctx:
            from_document(RunConfig, {'influence': {'n_range': [1, 'two']}})
        self.assertEqual(ctx.exception.path, 'influence.n_range[1]')

    def test_invalid_value(self):
        """ Values the schema types accept but the model rejects are configuration errors.
        """
        with self.assertRaises(ConfigError):
            from_document(RunConfig, {'workers': 0})
        with self.assertRaises(ConfigError):
            from_document(RunConfig, {'bench': {'m': 1}})

    def test_merge(self):
        """ Nested mappings merge; the base is left untouched.
        """
        base = {'detect': {'pfa': 0.1, 'n': 8}}
        out = merge(base, {'detect': {'pfa': 0.2}})
        self.assertEqual(out, {'detect': {'pfa': 0.2, 'n': 8}})
        self.assertEqual(base['detect']['pfa'], 0.1)


class TestHash(unittest.TestCase):
    """ Tests for the configuration hash.
    """
    def test_workers_excluded(self):
        """ workers and out do not change the hash; the seed does.
        """
        base = load_config()
        self.assertEqual(base.config_hash, load_config(overrides={'workers': 8, 'out': 'x'}).config_hash)
        self.assertNotEqual(base.config_hash, load_config(overrides={'seed': 1}).config_hash)
        self.assertEqual(len(base.config_hash), 16)

    def test_dump_roundtrip(self):
        """ The dumped YAML reloads to the same configuration.
        """
        cfg = load_config(preset='paper', overrides={'seed': 3})
        again = from_document(RunConfig, yaml.safe_load(dump(cfg)))
        self.assertEqual(again.config_hash, cfg.config_hash)


class TestSections(unittest.TestCase):
    """ Tests for building experiments from the sections.
    """
    def test_default_grids(self):
        """ Default sweep grids.
        """
        detect = DetectSection()
        self.assertEqual(len(detect.scr_grid_db), 7)
        self.assertEqual(len(detect.fd_grid), 21)
        self.assertEqual(detect.fd_grid[0], 0.)
        self.assertAlmostEqual(detect.fd_grid[7], 1. / 3.)
        self.assertLess(max(detect.fd_grid), 1.)
        steps = [b - a for a, b in zip(detect.fd_grid, detect.fd_grid[1:])]
        for step in steps:
            self.assertAlmostEqual(step, 1. / 21.)
        self.assertEqual(detect.theta_grid, (1., 15., 30.))

    def test_scenario(self):
        """ Each sweep keeps only its own grid; m defaults to N.
        """
        scenario = DetectSection().scenario('fd', 5)
        self.assertEqual(scenario.axis[0], 'fd')
        self.assertEqual(scenario.m, 8)
        self.assertEqual(scenario.master_seed, 5)
        self.assertEqual(len(scenario.detectors), 8)

    def test_scenario_errors(self):
        """ Bad sweeps, empty grids and unknown detectors name their field.
        """
        with self.assertRaises(ConfigError):
            DetectSection().scenario('range', 0)
        with self.assertRaises(ConfigError) as ctx:
            DetectSection(theta_grid=()).scenario('mismatch', 0)
        self.assertEqual(ctx.exception.path, 'detect.theta_grid')
        with self.assertRaises(ConfigError) as ctx:
            DetectSection(detectors=('AMF', 'Bogus')).scenario('scr', 0)
        self.assertEqual(ctx.exception.path, 'detect.detectors[1]')

    def test_influence_specs(self):
        """ One contamination experiment per averaging.
        """
        specs = InfluenceSection(averagings=('AIRM:mean', 'BW:median')).specs(2)
        self.assertEqual(len(specs), 2)
        self.assertEqual(specs[1].averaging[0].value, 'BW')
        self.assertEqual(specs[0].master_seed, 2)
        with self.assertRaises(ConfigError):
            InfluenceSection(averagings=()).specs(0)
        with self.assertRaises(ConfigError):
            InfluenceSection(averagings=('AIRM:mode',)).specs(0)


class TestCsv(unittest.TestCase):
    """ Tests for the CSV writer.
    """
    def test_provenance(self):
        """ A provenance line precedes the exact header; floats use repr.
        """
        with tempfile.TemporaryDirectory() as tmp:
            path = write_csv(os.path.join(tmp, 'sub', 'pd.csv'), PD_HEADER,
                             [(10., 'AMF', '', '', 0.1, 0.05, 20, 3.25)], 'abcdef0123456789', 4)
            with open(path) as f:
                lines = f.read().splitlines()
        self.assertEqual(lines[0], '# config_hash=abcdef0123456789 seed=4')
        self.assertEqual(lines[1], 'axis,detector,metric,statistic,pd,stderr,trials,gamma')
        self.assertEqual(lines[2], '10.0,AMF,,,0.1,0.05,20,3.25')


if __name__ == '__main__':
    unittest.main()
