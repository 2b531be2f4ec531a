"""
Command-line entry point.

    penstock-mpc simulate        one closed-loop experiment
    penstock-mpc compare         base run plus benchmarks, comparison table
    penstock-mpc tune-lpf        low-pass cutoff matching the MPC's CC
    penstock-mpc fatigue         rainflow and Miner damage of a stress table
    penstock-mpc linearize-check linear model against the nonlinear plant
"""
import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from . import harness, results
from .config import default_config_path, dump_config, load_config, load_sn_curve, override, run_directory
from .errors import PenstockError, TuningError
from .fatigue import analyze_stress_table

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _experiment_arguments(parser):
    parser.add_argument('--config', type=Path, default=default_config_path,
                        help='TOML configuration or a config.json echo (default: bundled 230 MW plant)')
    parser.add_argument('--freq', help="'synthetic' or a CSV of (time_s, freq_hz)")
    parser.add_argument('--seed', type=int, help='seed of the synthetic frequency trace')
    parser.add_argument('--duration', type=float, help='experiment length, s')
    parser.add_argument('--out', type=Path, help='run directory; relative paths go under $PENSTOCK_MPC_RUNS')
    parser.add_argument('--plots', action='store_true', help='also write PNG figures')


def build_parser():
    parser = argparse.ArgumentParser(prog='penstock-mpc', description=__doc__.split('\n\n')[0].strip())
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    commands = parser.add_subparsers(dest='command', required=True)

    simulate = commands.add_parser('simulate', help='run one experiment')
    _experiment_arguments(simulate)
    simulate.add_argument('--controller', choices=harness.CONTROLLERS)

    compare = commands.add_parser('compare', help='compare controllers on one trace')
    _experiment_arguments(compare)
    compare.add_argument('--controllers', help='comma-separated, must include base')
    compare.add_argument('--workers', type=int, help='parallel experiments')
    compare.add_argument('--tune', action='store_true',
                         help='tune the benchmarks to the MPC (LPF on CC, fatigue filter on max RDI)')

    tune = commands.add_parser('tune-lpf', help='low-pass cutoff matching a target CC')
    _experiment_arguments(tune)
    tune.add_argument('--target-cc', type=float, help='defaults to the CC of an MPC run')

    fatigue = commands.add_parser('fatigue', help='standalone fatigue analysis of a stress CSV')
    fatigue.add_argument('--stress', type=Path, required=True, help='stress in Pa, one column per series')
    fatigue.add_argument('--sn', type=Path, help='TOML with an [sn_curve] table')
    fatigue.add_argument('--out', type=Path)

    check = commands.add_parser('linearize-check', help='linear model fidelity against the nonlinear plant')
    check.add_argument('--config', type=Path, default=default_config_path)
    check.add_argument('--amplitude', type=float, default=0.02, help='vane square-wave amplitude, pu')
    check.add_argument('--period', type=float, default=2.0, help='square-wave period, s')
    check.add_argument('--duration', type=float, default=20.0)
    check.add_argument('--out', type=Path)
    check.add_argument('--plots', action='store_true')

    return parser


def configure_logging(args):
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


def experiment_config(args):
    """Configuration with the command-line overrides folded in, so config.json reproduces the run."""
    config = load_config(args.config)
    if args.freq is not None:
        config = override(config, 'experiment', frequency_source=args.freq)
    if args.seed is not None:
        config = override(config, 'frequency', seed=args.seed)
    if args.duration is not None:
        config = override(config, 'simulation', duration=args.duration)
    if getattr(args, 'controller', None) is not None:
        config = override(config, 'experiment', controller=args.controller)
    if getattr(args, 'controllers', None) is not None:
        names = tuple(name.strip() for name in args.controllers.split(',') if name.strip())
        config = override(config, 'experiment', controllers=names)
    if getattr(args, 'workers', None) is not None:
        config = override(config, 'experiment', workers=args.workers)
    return config


def _write_json(data, path):
    Path(path).write_text(json.dumps(data, indent=2, allow_nan=False) + '\n')
    return path


def simulate(args):
    config = experiment_config(args)
    out = run_directory(args.out or 'simulate')
    result = harness.run_simulation(harness.ExperimentSpec(config))
    results.write_result(result, out)
    if args.plots:
        from combined_figures import RunReport
        RunReport()(result, out)
    print(f"{result.label}: status={result.status} CC={result.cc:.4f} "
          f"max D={result.damage.max(initial=0.0):.4g} -> {out}")
    return 0


def compare(args):
    config = experiment_config(args)
    out = run_directory(args.out or 'compare')
    trace = harness.load_trace(config)

    if args.tune:
        comparison = harness.reproduce_comparison(config, trace=trace, workers=config.experiment.workers)
    else:
        specs = [harness.ExperimentSpec(config, controller=name, trace=trace)
                 for name in config.experiment.controllers]
        comparison = harness.compare_controllers(specs, workers=config.experiment.workers)

    dump_config(config, out / results.CONFIG_FILE)
    table_path = results.write_comparison(comparison, out)
    if args.plots:
        from combined_figures import ComparisonReport
        ComparisonReport()(comparison, out)
    print(comparison.table[['label', 'status', 'cc', 'max_rdi', 'worst_element', 'mean_solve_ms']]
          .to_string(index=False, float_format=lambda v: f'{v:.4f}'))
    print(f"-> {table_path}")
    return 0


def tune_lpf(args):
    config = experiment_config(args)
    out = run_directory(args.out or 'tune-lpf')
    trace = harness.load_trace(config)

    base = harness.run_simulation(harness.ExperimentSpec(config, controller='base', trace=trace))
    reference = base.traces['y_star'].to_numpy()
    target = args.target_cc
    if target is None:
        mpc = harness.run_simulation(harness.ExperimentSpec(config, controller='mpc', trace=trace),
                                     reference=reference, base_damage=base.damage)
        target = mpc.cc

    summary = {'target_cc': target, 'converged': True}
    try:
        summary['cutoff'] = harness.tune_lpf(config, target, trace, reference, base.damage)
    except TuningError as error:
        logger.warning("%s", error)
        summary.update(converged=False, message=str(error),
                       cutoff=error.best[0] if error.best else None)
        if error.best is None:
            raise

    dump_config(override(config, 'lpf', cutoff=summary['cutoff']), out / results.CONFIG_FILE)
    _write_json(summary, out / 'tune_lpf.json')
    print(f"cutoff {summary['cutoff']:.4f} Hz for CC {target:.4f} -> {out}")
    return 0 if summary['converged'] else 1


def fatigue(args):
    sn = load_sn_curve(args.sn) if args.sn is not None else load_config().sn_curve
    if not args.stress.is_file():
        raise PenstockError(f"stress table not found: {args.stress}")
    out = run_directory(args.out or 'fatigue')

    frame = pd.read_csv(args.stress, float_precision='round_trip')
    cycles, damage = analyze_stress_table(frame, sn)
    cycles.to_csv(out / 'cycles.csv', index=False)
    _write_json({'damage': damage, 'worst': max(damage, key=damage.get)}, out / 'damage.json')

    for name, value in damage.items():
        print(f"{name}: D={value:.6g}")
    return 0


def linearize_check(args):
    config = load_config(args.config)
    out = run_directory(args.out or 'linearize-check')
    report = harness.linear_fidelity(config, amplitude=args.amplitude, period=args.period,
                                     duration=args.duration)

    per_element = pd.DataFrame({
        'element': np.arange(1, report.relative_mae.size + 1),
        'relative_mae': report.relative_mae,
        'excursion_mae': report.excursion_mae,
    })
    per_element.to_csv(out / 'fidelity.csv', index=False)
    report.frame.to_csv(out / 'heads.csv', index=False)
    _write_json({
        'max_relative_mae': float(report.relative_mae.max()),
        'max_error_m': report.max_error,
        'linear_time_s': report.linear_time,
        'nonlinear_time_s': report.nonlinear_time,
    }, out / 'fidelity.json')
    if args.plots:
        from combined_figures import FidelityFigures
        FidelityFigures()(report, out)

    print(f"worst relative MAE {report.relative_mae.max():.3g}, max head error {report.max_error:.3g} m -> {out}")
    return 0


commands = {
    'simulate': simulate,
    'compare': compare,
    'tune-lpf': tune_lpf,
    'fatigue': fatigue,
    'linearize-check': linearize_check,
}


def cli_main(argv=None):
    """Run one subcommand; returns 0 on success, 1 on a run failure and 2 on a usage error."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config_path = getattr(args, 'config', None)
        if config_path is not None and not Path(config_path).is_file():
            parser.error(f"configuration file not found: {config_path}")
    except SystemExit as stop:
        return stop.code if isinstance(stop.code, int) else 2

    configure_logging(args)
    try:
        return commands[args.command](args)
    except PenstockError as error:
        print(f"penstock-mpc {args.command}: {error}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(cli_main())
