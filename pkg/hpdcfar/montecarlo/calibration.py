""" CFAR threshold calibration from H0 trials.
"""
import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import Dict, Optional, Sequence

import jax.numpy as jnp

from hpdcfar.detectors import DetectorSpec
from hpdcfar.errors import CalibrationDegraded, InvalidInput
from hpdcfar.montecarlo.scenario import ScenarioConfig, calib_stream
from hpdcfar.montecarlo.trials import collect, evaluate_trial, map_trials
from hpdcfar.simulation.clutter import Hypothesis
from hpdcfar.simulation.rng import RngStream

logger = logging.getLogger(__name__)

# Fraction of dropped calibration trials that flags a detector as degraded.
DEGRADED_FRACTION = 0.01


@dataclass
class ThresholdEntry:
    """ Calibrated threshold of one detector (for one assumed steering).

    Attributes:
        detector (DetectorSpec): The detector.
        gamma (float): Threshold.
        calib_trials (int): Trials that produced a statistic.
        exceedances (int): Calibration statistics strictly above gamma.
        dropped (int): Trials whose averaging solver failed.
        degraded (bool): dropped exceeded 1% of the trials.
    """
    detector: DetectorSpec
    gamma: float
    calib_trials: int
    exceedances: int
    dropped: int = 0
    degraded: bool = False


def threshold_from_statistics(values: Sequence[float], pfa: float) -> tuple:
    """ gamma = K-th largest value, K = ceil(pfa * n), over the finite values.

    Returns:
        tuple: (gamma, strict exceedance count, number of finite values)
    """
    v = jnp.asarray(values, dtype=jnp.float64).ravel()
    v = v[jnp.isfinite(v)]
    n = int(v.shape[0])
    if n == 0:
        raise InvalidInput('no finite statistics to calibrate on')
    k = max(1, math.ceil(pfa * n - 1e-9))
    gamma = float(jnp.sort(v)[::-1][k - 1])
    return gamma, int(jnp.sum(v > gamma)), n


class ThresholdTable(object):
    """ Per-detector thresholds; entries hold one ThresholdEntry per assumed
        steering vector.
    """
    def __init__(self, entries: Dict[str, list]) -> None:
        self.entries = entries

    def __getitem__(self, name: str) -> ThresholdEntry:
        return self.entries[name][0]

    def at(self, name: str, index: int) -> ThresholdEntry:
        """ Entry for the assumed steering with this index.
        """
        column = self.entries[name]
        return column[index if len(column) > 1 else 0]

    def __iter__(self):
        return iter(self.entries)


def calibrate(cfg: ScenarioConfig, assumed: jnp.ndarray,
              detectors: Optional[Sequence[DetectorSpec]] = None,
              workers: int = 1, progress: bool = False) -> ThresholdTable:
    """ Runs cfg.calib_trials H0 trials and sets every detector's threshold.

    Args:
        cfg (ScenarioConfig): Experiment.
        assumed (jnp.ndarray): S x N assumed steering vectors; steering-dependent
            detectors get one threshold per row, matrix-CFAR detectors one.
        detectors (Sequence, optional): Subset of cfg.detectors.
        workers (int): Thread count.
        progress (bool): Show a progress bar.

    Returns:
        ThresholdTable: Thresholds by detector name.
    """
    if detectors is not None:
        cfg = replace(cfg, detectors=tuple(detectors))
    assumed = jnp.atleast_2d(jnp.asarray(assumed, dtype=jnp.complex128))
    logger.info('calibrating %d detectors on %d H0 trials (pfa=%g)',
                len(cfg.detectors), cfg.calib_trials, cfg.pfa)

    def trial(k):
        return evaluate_trial(cfg, RngStream(cfg.master_seed, calib_stream(k)), Hypothesis.H0, assumed)

    results = map_trials(trial, range(cfg.calib_trials), workers=workers,
                         desc='calibration', progress=progress)
    stats = collect(results, [d.name for d in cfg.detectors])

    entries = {}
    for det in cfg.detectors:
        values = stats[det.name]
        columns = range(values.shape[1]) if det.uses_steering else range(1)
        column_entries = []
        for c in columns:
            gamma, exceed, used = threshold_from_statistics(values[:, c], cfg.pfa)
            dropped = cfg.calib_trials - used
            degraded = dropped > DEGRADED_FRACTION * cfg.calib_trials
            if degraded:
                msg = f'{det.name}: {dropped} of {cfg.calib_trials} calibration trials dropped'
                logger.warning(msg)
                warnings.warn(msg, CalibrationDegraded)
            column_entries.append(ThresholdEntry(det, gamma, used, exceed, dropped, degraded))
        entries[det.name] = column_entries
        logger.info('%s: gamma=%.6g', det.name, column_entries[0].gamma)
    return ThresholdTable(entries)


def calibrate_threshold(cfg: ScenarioConfig, detector: DetectorSpec,
                        workers: int = 1, progress: bool = False) -> ThresholdEntry:
    """ Threshold of a single detector for the scenario's assumed steering.
    """
    return calibrate(cfg, cfg.steering.assumed(), [detector], workers, progress)[detector.name]
