""" CSV and JSON outputs of the commands.

Every CSV starts with a '# config_hash=<hash> seed=<seed>' line followed by the
header row; floats are written with repr so reruns are byte-identical.
"""
import csv
import dataclasses
import json
import os
from typing import Dict, Iterable, List, Sequence

from hpdcfar.montecarlo.bench import BenchResult, OrderingSummary
from hpdcfar.montecarlo.calibration import ThresholdTable
from hpdcfar.montecarlo.sweeps import PdCurve
from hpdcfar.robustness import InfluenceResult

PD_HEADER = ('axis', 'detector', 'metric', 'statistic', 'pd', 'stderr', 'trials', 'gamma')
BENCH_HEADER = ('solver', 'iterations', 'seconds', 'final_delta', 'pairwise_dist')
TRACE_HEADER = ('solver', 'iteration', 'delta')
INFLUENCE_HEADER = ('n', 'metric', 'statistic', 'f_mean', 'f_stderr', 'repeats')


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return '' if value is None else str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence],
              config_hash: str, seed: int) -> str:
    """ Writes rows under header, preceded by the provenance line.

    Returns:
        str: path.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', newline='') as f:
        f.write(f'# config_hash={config_hash} seed={seed}\n')
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_summary(path: str, document: dict) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w') as f:
        json.dump(document, f, indent=2, sort_keys=True, allow_nan=True)
        f.write('\n')
    return path


def pd_rows(curve: PdCurve) -> List[tuple]:
    rows = []
    for p in curve.points:
        det = p.detector
        rows.append((
            float(p.axis), det.kind.value,
            det.metric.value if det.metric is not None else '',
            det.statistic.value if det.statistic is not None else '',
            float(p.estimate.pd), float(p.estimate.stderr), int(p.estimate.trials),
            float(p.estimate.gamma),
        ))
    return rows


def bench_rows(result: BenchResult) -> List[tuple]:
    return [(r.solver, int(r.iterations), float(r.seconds), float(r.final_delta), float(r.pairwise_dist))
            for r in result.rows]


def trace_rows(result: BenchResult) -> List[tuple]:
    return [(r.solver, i + 1, float(d)) for r in result.rows for i, d in enumerate(r.delta_trace)]


def influence_rows(results: Sequence[InfluenceResult]) -> List[tuple]:
    rows = []
    for res in results:
        kind, statistic = res.averaging
        for p in res.points:
            rows.append((int(p.n), kind.value, statistic.value, float(p.f_mean),
                         float(p.f_stderr), int(p.repeats)))
    return rows


def threshold_summary(table: ThresholdTable) -> Dict[str, list]:
    """ JSON view: detector name -> one record per assumed steering.
    """
    return {
        name: [{'gamma': e.gamma, 'calib_trials': e.calib_trials, 'exceedances': e.exceedances,
                'dropped': e.dropped, 'degraded': e.degraded} for e in table.entries[name]]
        for name in table
    }


def ordering_summary(summary: OrderingSummary) -> dict:
    return dataclasses.asdict(summary)
