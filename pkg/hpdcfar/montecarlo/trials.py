""" Single detection trials and their parallel execution.

A trial draws its secondary set and CUT from its own RngStream, estimates the
per-snapshot Toeplitz covariances, computes every geometric average the
detectors need once, and evaluates every detector against each assumed
steering vector. A detector whose averaging solver hard-fails yields NaN.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

import jax.numpy as jnp
from jax import jit
from tqdm import tqdm

from hpdcfar.averaging.config import AveragingProblem
from hpdcfar.averaging.dispatch import solve
from hpdcfar.detectors import DetectorKind, DetectorSpec
from hpdcfar.errors import DomainError, NumericalFailure
from hpdcfar.metrics import get_metric
from hpdcfar.montecarlo.scenario import ScenarioConfig
from hpdcfar.simulation.clutter import Hypothesis, make_observation, make_secondary_set
from hpdcfar.simulation.estimation import scm_array, toeplitz_array
from hpdcfar.simulation.rng import RngStream

logger = logging.getLogger(__name__)


@jit
def amf_values(x: jnp.ndarray, steerings: jnp.ndarray, r: jnp.ndarray) -> jnp.ndarray:
    """ AMF statistic of one snapshot against S steering vectors (S x N).
    """
    rinv_s = jnp.linalg.solve(r, steerings.T).T
    num = jnp.abs(jnp.sum(jnp.conj(rinv_s) * x, axis=-1)) ** 2
    ss = jnp.real(jnp.sum(jnp.conj(steerings) * rinv_s, axis=-1))
    return num / ss


@jit
def anmf_values(x: jnp.ndarray, steerings: jnp.ndarray, r: jnp.ndarray) -> jnp.ndarray:
    xx = jnp.real(jnp.vdot(x, jnp.linalg.solve(r, x)))
    return jnp.clip(amf_values(x, steerings, r) / xx, 0., 1.)


def evaluate_trial(
        cfg: ScenarioConfig,
        stream: RngStream,
        hypothesis: Hypothesis,
        assumed: jnp.ndarray,
        target: Optional[jnp.ndarray] = None,
        scr_db: float = 0.,
    ) -> Dict[str, jnp.ndarray]:
    """ Runs one trial.

    Args:
        cfg (ScenarioConfig): Experiment.
        stream (RngStream): This trial's stream.
        hypothesis (Hypothesis): H0 (target-free CUT) or H1.
        assumed (jnp.ndarray): S x N steering vectors the detectors match against.
        target (jnp.ndarray, optional): Steering carried by the H1 CUT.
        scr_db (float): SCR of the H1 CUT.

    Returns:
        dict: detector name -> S statistics (NaN where the trial was dropped).
    """
    k_sec, k_cut = stream.split(2)
    xs = make_secondary_set(cfg.m, cfg.clutter, cfg.interference, k_sec)
    x = make_observation(hypothesis, cfg.clutter, target, scr_db, k_cut)
    s_count = assumed.shape[0]

    averages = {}
    needed = {d.averaging for d in cfg.detectors if d.averaging is not None}
    if needed:
        covs = toeplitz_array(xs)
        for kind, statistic in sorted(needed, key=lambda a: (a[0].value, a[1].value)):
            try:
                report = solve(AveragingProblem(list(covs), kind, statistic), cfg.solver)
                averages[(kind, statistic)] = report.result()
            except (NumericalFailure, DomainError) as err:
                logger.warning('stream %d: %s %s average failed (%s); trial dropped',
                               stream.stream_id, kind.value, statistic.value, err)
                averages[(kind, statistic)] = None
        rcut = toeplitz_array(x)

    r_scm = scm_array(xs) if any(
        d.kind in (DetectorKind.AMF, DetectorKind.ANMF) for d in cfg.detectors) else None

    out = {}
    for det in cfg.detectors:
        if det.kind is DetectorKind.AMF:
            out[det.name] = amf_values(x, assumed, r_scm)
        elif det.kind is DetectorKind.ANMF:
            out[det.name] = anmf_values(x, assumed, r_scm)
        else:
            rg = averages[det.averaging]
            if rg is None:
                out[det.name] = jnp.full((s_count,), jnp.nan)
            elif det.kind is DetectorKind.MATRIX_CFAR:
                value = get_metric(det.metric).distance(rg, rcut)
                out[det.name] = jnp.full((s_count,), value)
            else:
                out[det.name] = amf_values(x, assumed, rg)
    return out


def map_trials(fn: Callable[[int], object], ids: Sequence[int], workers: int = 1,
               desc: Optional[str] = None, progress: bool = False) -> List[object]:
    """ Applies fn to every id, returning results in id order.

    Args:
        fn (callable): Trial function of a stream id.
        ids (Sequence[int]): Stream ids.
        workers (int): Thread count; results do not depend on it.
        desc (str, optional): Progress bar label.
        progress (bool): Show a tqdm progress bar.
    """
    ids = list(ids)
    if workers <= 1:
        return [fn(i) for i in tqdm(ids, desc=desc, disable=not progress)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(fn, ids), total=len(ids), desc=desc, disable=not progress))


def collect(results: List[Dict[str, jnp.ndarray]], names: Sequence[str]) -> Dict[str, jnp.ndarray]:
    """ Stacks per-trial outputs into detector name -> (trials, S) arrays.
    """
    return {name: jnp.stack([r[name] for r in results]) for name in names}
