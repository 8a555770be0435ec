""" Command line front end.

    hpdcfar validate    [--config PATH] [--preset desk|paper]
    hpdcfar bench-mean  [...]
    hpdcfar detect --sweep {scr,fd,mismatch} [...]
    hpdcfar influence   [--averaging AIRM:mean ...] [...]

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

import jax.numpy as jnp

from hpdcfar import __version__
from hpdcfar.config import PRESETS, SWEEPS, RunConfig, dump, load_config
from hpdcfar.errors import ConfigError, HpdCfarError
from hpdcfar.io import (
    BENCH_HEADER, INFLUENCE_HEADER, PD_HEADER, TRACE_HEADER, bench_rows, influence_rows,
    ordering_summary, pd_rows, threshold_summary, trace_rows, write_csv, write_summary
)
from hpdcfar.montecarlo.bench import bench_bw_solvers, convergence_ordering
from hpdcfar.montecarlo.sweeps import run_fd_sweep, run_mismatch_sweep, run_scr_sweep
from hpdcfar.montecarlo.trials import evaluate_trial
from hpdcfar.robustness import averaging_name, influence_curve
from hpdcfar.simulation.clutter import Hypothesis
from hpdcfar.simulation.rng import RngStream

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2

sweep_map = {
    'scr': run_scr_sweep,
    'fd': run_fd_sweep,
    'mismatch': run_mismatch_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help='YAML run configuration')
    common.add_argument('--preset', choices=sorted(PRESETS), default='desk',
                        help='base configuration the file overrides (default: desk)')
    common.add_argument('--seed', type=int, help='master seed (unsigned 64-bit)')
    common.add_argument('--workers', type=int, help='worker thread cap')
    common.add_argument('--out', metavar='DIR', help='output directory')
    common.add_argument('--pfa', type=float, help='false-alarm rate of the detect sweeps')
    common.add_argument('--trials', type=int, help='H1 trials per detect sweep point')
    common.add_argument('-v', '--verbose', action='count', default=0, help='-v info, -vv debug')
    common.add_argument('--quiet', action='store_true', help='no progress bars')

    parser = argparse.ArgumentParser(prog='hpdcfar', description='Matrix-CFAR detection on HPD manifolds')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('validate', parents=[common], help='check a configuration and dry-run one trial')
    sub.add_parser('bench-mean', parents=[common], help='BW mean solver benchmark')
    detect = sub.add_parser('detect', parents=[common], help='calibrate and sweep Pd')
    detect.add_argument('--sweep', choices=SWEEPS, required=True)
    influence = sub.add_parser('influence', parents=[common], help='influence functions of the averages')
    influence.add_argument('--averaging', action='append', metavar='METRIC:STAT',
                           help='restrict to these averagings (repeatable)')
    return parser


def overrides_from(args: argparse.Namespace) -> dict:
    """ Partial configuration document from the command line flags.
    """
    doc, detect = {}, {}
    for key in ('seed', 'workers', 'out'):
        if getattr(args, key) is not None:
            doc[key] = getattr(args, key)
    if args.pfa is not None:
        detect['pfa'] = args.pfa
    if args.trials is not None:
        detect['trials_pd'] = args.trials
    if detect:
        doc['detect'] = detect
    if getattr(args, 'averaging', None):
        doc['influence'] = {'averagings': list(args.averaging)}
    return doc


def _summary(command: str, cfg: RunConfig, **extra) -> dict:
    doc = {'command': command, 'config': cfg.hash_document(),
           'config_hash': cfg.config_hash, 'seed': cfg.seed}
    doc.update(extra)
    return doc


def cmd_validate(cfg: RunConfig, args: argparse.Namespace) -> int:
    """ Builds every experiment of cfg and evaluates one H0 trial of each sweep.
    """
    print(dump(cfg), end='')
    print(f'config_hash: {cfg.config_hash}')
    for spec in cfg.influence.specs(cfg.seed):
        logger.info('influence %s: m=%d, n_range=%s', averaging_name(spec.averaging), spec.m, list(spec.n_range))
    grids = {'scr': cfg.detect.scr_grid_db, 'fd': cfg.detect.fd_grid, 'mismatch': cfg.detect.theta_grid}
    for sweep in SWEEPS:
        if not grids[sweep]:
            continue
        scenario = cfg.detect.scenario(sweep, cfg.seed)
        assumed = jnp.atleast_2d(scenario.steering.assumed())
        values = evaluate_trial(scenario, RngStream(cfg.seed, 0), Hypothesis.H0, assumed)
        for name, v in values.items():
            logger.info('dry run %s %s: %.6g', sweep, name, float(v[0]))
    return EXIT_OK


def cmd_bench_mean(cfg: RunConfig, args: argparse.Namespace) -> int:
    """ Runs the three BW mean solvers; exit 1 when one failed (outputs still written).
    """
    b = cfg.bench
    result = bench_bw_solvers(b.m, b.n, b.tol, cfg.seed, b.max_iter)
    write_csv(os.path.join(cfg.out, 'bench.csv'), BENCH_HEADER, bench_rows(result),
              cfg.config_hash, cfg.seed)
    write_csv(os.path.join(cfg.out, 'bench_trace.csv'), TRACE_HEADER, trace_rows(result),
              cfg.config_hash, cfg.seed)
    extra = {'agreement': result.agreement,
             'converged': {r.solver: r.converged for r in result.rows},
             'errors': {r.solver: r.error for r in result.rows if r.error}}
    if b.ordering_instances:
        extra['ordering'] = ordering_summary(
            convergence_ordering(b.ordering_instances, b.m, b.n, b.tol, cfg.seed))
    write_summary(os.path.join(cfg.out, 'summary.json'), _summary('bench-mean', cfg, **extra))
    for r in result.rows:
        logger.info('%s: %d iterations, %.3fs, delta=%.3e', r.solver, r.iterations, r.seconds, r.final_delta)
    return EXIT_FAILURE if result.failed else EXIT_OK


def cmd_detect(cfg: RunConfig, args: argparse.Namespace) -> int:
    """ Calibrates thresholds and writes the Pd curve of one sweep.
    """
    scenario = cfg.detect.scenario(args.sweep, cfg.seed)
    curve = sweep_map[args.sweep](scenario, workers=cfg.workers, progress=not args.quiet)
    write_csv(os.path.join(cfg.out, f'pd_{args.sweep}.csv'), PD_HEADER, pd_rows(curve),
              cfg.config_hash, cfg.seed)
    write_summary(os.path.join(cfg.out, 'summary.json'), _summary(
        'detect', cfg, sweep=args.sweep, scenario_hash=curve.config_hash,
        thresholds=threshold_summary(curve.thresholds)))
    return EXIT_OK


def cmd_influence(cfg: RunConfig, args: argparse.Namespace) -> int:
    """ Influence curves of every configured averaging.
    """
    results = [influence_curve(spec, workers=cfg.workers, progress=not args.quiet)
               for spec in cfg.influence.specs(cfg.seed)]
    write_csv(os.path.join(cfg.out, 'influence.csv'), INFLUENCE_HEADER, influence_rows(results),
              cfg.config_hash, cfg.seed)
    write_summary(os.path.join(cfg.out, 'summary.json'), _summary(
        'influence', cfg,
        dropped={averaging_name(r.averaging): r.dropped for r in results},
        max_condition={averaging_name(r.averaging): r.max_condition for r in results},
        non_converged={averaging_name(r.averaging): r.non_converged for r in results}))
    if all(r.dropped == cfg.influence.repeats for r in results):
        logger.error('every influence repeat failed')
        return EXIT_FAILURE
    return EXIT_OK


command_map = {
    'validate': cmd_validate,
    'bench-mean': cmd_bench_mean,
    'detect': cmd_detect,
    'influence': cmd_influence,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(format='%(levelname)s:%(name)s:%(message)s', level=level)
    try:
        cfg = load_config(args.config, args.preset, overrides_from(args))
        return command_map[args.command](cfg, args)
    except ConfigError as err:
        print(f'hpdcfar: configuration error: {err}', file=sys.stderr)
        return EXIT_CONFIG
    except HpdCfarError as err:
        logger.error('%s failed: %s', args.command, err)
        return EXIT_FAILURE
