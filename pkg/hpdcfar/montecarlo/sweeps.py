""" Detection probability estimation and the three experiment sweeps.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Union

import jax.numpy as jnp

from hpdcfar.detectors import DetectorSpec
from hpdcfar.montecarlo.calibration import ThresholdTable, calibrate
from hpdcfar.montecarlo.scenario import ScenarioConfig, pd_stream
from hpdcfar.montecarlo.trials import collect, evaluate_trial, map_trials
from hpdcfar.simulation.clutter import Hypothesis
from hpdcfar.simulation.rng import RngStream
from hpdcfar.simulation.steering import steering_ideal

logger = logging.getLogger(__name__)


@dataclass
class PdEstimate:
    """ Fraction of H1 trials above gamma, with its binomial standard error.
    """
    pd: float
    stderr: float
    trials: int
    gamma: float


@dataclass
class PdPoint:
    axis: float
    detector: DetectorSpec
    estimate: PdEstimate


@dataclass
class PdCurve:
    """ Pd versus one axis for every detector.

    Attributes:
        axis_name (str): 'scr_db', 'fd' or 'theta_deg'.
        axis_values (list): Monotone axis.
        points (list): PdPoint entries, axis-major in detector order.
        config_hash (str): Hash of the scenario.
        seed (int): Master seed.
        thresholds (ThresholdTable): Calibration used.
    """
    axis_name: str
    axis_values: List[float]
    points: List[PdPoint] = field(default_factory=list)
    config_hash: str = ''
    seed: int = 0
    thresholds: Optional[ThresholdTable] = None

    def series(self, name: str) -> List[PdEstimate]:
        """ Estimates of one detector along the axis.
        """
        return [p.estimate for p in self.points if p.detector.name == name]


def _binomial(hits: int, trials: int) -> tuple:
    if trials == 0:
        return float('nan'), float('nan')
    p = hits / trials
    return p, (p * (1. - p) / trials) ** 0.5


def estimate_pd(
        cfg: ScenarioConfig,
        detectors: Union[DetectorSpec, Sequence[DetectorSpec]],
        gammas: Union[float, Dict[str, float]],
        scr_db: float,
        target: Optional[jnp.ndarray] = None,
        assumed: Optional[jnp.ndarray] = None,
        point: int = 0,
        workers: int = 1,
        progress: bool = False,
    ) -> Dict[str, PdEstimate]:
    """ Runs cfg.trials_pd H1 trials at one axis point.

    Args:
        cfg (ScenarioConfig): Experiment.
        detectors (DetectorSpec or Sequence): Detectors to score.
        gammas (float or dict): Threshold, or thresholds by detector name.
        scr_db (float): SCR of the target.
        target (jnp.ndarray, optional): Steering carried by the data;
            cfg.steering.target() if None.
        assumed (jnp.ndarray, optional): Steering the detectors assume;
            cfg.steering.assumed() if None.
        point (int): Axis index; selects the trial streams.
        workers (int): Thread count.
        progress (bool): Show a progress bar.

    Returns:
        dict: detector name -> PdEstimate. Dropped trials are excluded from
            the trial count.
    """
    if isinstance(detectors, DetectorSpec):
        detectors = [detectors]
    if not isinstance(gammas, dict):
        gammas = {d.name: float(gammas) for d in detectors}
    cfg = replace(cfg, detectors=tuple(detectors))
    target = cfg.steering.target() if target is None else target
    assumed = cfg.steering.assumed() if assumed is None else assumed
    assumed = jnp.atleast_2d(jnp.asarray(assumed, dtype=jnp.complex128))

    def trial(k):
        return evaluate_trial(cfg, RngStream(cfg.master_seed, pd_stream(point, k)),
                              Hypothesis.H1, assumed, target, scr_db)

    results = map_trials(trial, range(cfg.trials_pd), workers=workers,
                         desc=f'Pd point {point}', progress=progress)
    stats = collect(results, [d.name for d in detectors])
    out = {}
    for det in detectors:
        values = stats[det.name][:, 0]
        valid = jnp.isfinite(values)
        trials = int(jnp.sum(valid))
        if trials < cfg.trials_pd:
            logger.warning('%s: %d of %d Pd trials dropped', det.name, cfg.trials_pd - trials, cfg.trials_pd)
        gamma = gammas[det.name]
        hits = int(jnp.sum(jnp.where(valid, values > gamma, False)))
        pd, stderr = _binomial(hits, trials)
        out[det.name] = PdEstimate(pd, stderr, trials, gamma)
    return out


def _sweep(cfg: ScenarioConfig, thresholds: ThresholdTable, targets, assumeds, scrs,
           workers: int, progress: bool) -> PdCurve:
    name, values = cfg.axis
    curve = PdCurve(name, list(values), config_hash=cfg.config_hash,
                    seed=cfg.master_seed, thresholds=thresholds)
    for j, value in enumerate(values):
        gammas = {d.name: thresholds.at(d.name, j).gamma for d in cfg.detectors}
        estimates = estimate_pd(cfg, cfg.detectors, gammas, scrs[j], targets[j], assumeds[j],
                                point=j, workers=workers, progress=progress)
        for det in cfg.detectors:
            curve.points.append(PdPoint(value, det, estimates[det.name]))
        logger.info('%s=%g: %s', name, value,
                    ', '.join(f'{k}={v.pd:.3f}' for k, v in estimates.items()))
    return curve


def run_scr_sweep(cfg: ScenarioConfig, workers: int = 1, progress: bool = False) -> PdCurve:
    """ Calibrates once, then estimates Pd across cfg.scr_grid_db. The data
        carry cfg.steering.target(), ideal or mismatched.
    """
    assumed = cfg.steering.assumed()
    thresholds = calibrate(cfg, assumed, workers=workers, progress=progress)
    grid = cfg.scr_grid_db
    target = cfg.steering.target()
    return _sweep(cfg, thresholds, [target] * len(grid), [assumed] * len(grid),
                  list(grid), workers, progress)


def run_fd_sweep(cfg: ScenarioConfig, workers: int = 1, progress: bool = False) -> PdCurve:
    """ Pd versus target Doppler at cfg.scr_db. Steering-dependent detectors
        get a threshold per fd from one shared set of H0 trials.
    """
    steerings = [steering_ideal(cfg.n, fd) for fd in cfg.fd_grid]
    thresholds = calibrate(cfg, jnp.stack(steerings), workers=workers, progress=progress)
    return _sweep(cfg, thresholds, steerings, steerings,
                  [cfg.scr_db] * len(steerings), workers, progress)


def run_mismatch_sweep(cfg: ScenarioConfig, workers: int = 1, progress: bool = False) -> PdCurve:
    """ Pd versus mismatch angle at cfg.scr_db. Detectors assume e_1; the data
        carry the mismatched steering drawn from cfg.steering.orthogonal_draw_seed.
    """
    specs = [replace(cfg.steering, mode='mismatched', theta_mis_deg=float(t)) for t in cfg.theta_grid]
    assumed = specs[0].assumed()
    thresholds = calibrate(cfg, assumed, workers=workers, progress=progress)
    targets = [s.target() for s in specs]
    return _sweep(cfg, thresholds, targets, [assumed] * len(specs),
                  [cfg.scr_db] * len(specs), workers, progress)

