"""
Run directories.

    traces.csv        recorded traces, one row per record step
    metrics.json      CC, damage, RDI, status and provenance hash
    config.json       resolved configuration; reloads with load_config
    solver_stats.csv  per-step QP statistics (MPC runs only)

Wall-clock times appear only in solver_stats.csv, so everything else is
identical between reruns of the same configuration.
"""
import json
import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd

from .config import FORMAT_VERSION, dump_config, load_config
from .errors import ConfigError
from .harness import STATS_COLUMNS, SimulationResult

logger = logging.getLogger(__name__)

TRACES_FILE = 'traces.csv'
METRICS_FILE = 'metrics.json'
CONFIG_FILE = 'config.json'
STATS_FILE = 'solver_stats.csv'
COMPARISON_FILE = 'comparison.csv'


def _finite_or_none(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, list):
        return [_finite_or_none(v) for v in value]
    return value


def write_result(result, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    result.traces.to_csv(out / TRACES_FILE, index=False)
    result.solver_stats.to_csv(out / STATS_FILE, index=False)
    dump_config(result.config, out / CONFIG_FILE)

    metrics = {'format_version': FORMAT_VERSION}
    metrics.update({key: _finite_or_none(value) for key, value in result.metrics().items()})
    (out / METRICS_FILE).write_text(json.dumps(metrics, indent=2, allow_nan=False) + '\n')

    logger.info("%s written to %s", result.label, out)
    return out


def read_result(out_dir):
    out = Path(out_dir)
    metrics_path = out / METRICS_FILE
    if not metrics_path.is_file():
        raise ConfigError(f"no {METRICS_FILE} in {out}")

    metrics = json.loads(metrics_path.read_text())
    if metrics.get('format_version') != FORMAT_VERSION:
        raise ConfigError(f"{metrics_path}: unsupported format_version {metrics.get('format_version')!r}")

    traces = pd.read_csv(out / TRACES_FILE, float_precision='round_trip')
    stats_path = out / STATS_FILE
    solver_stats = pd.read_csv(stats_path) if stats_path.is_file() and stats_path.stat().st_size else \
        pd.DataFrame(columns=STATS_COLUMNS)

    cc = metrics['cc']
    return SimulationResult(
        label=metrics['label'],
        controller=metrics['controller'],
        config=load_config(out / CONFIG_FILE),
        traces=traces,
        damage=np.asarray(metrics['damage'], dtype=float),
        cc=math.nan if cc is None else cc,
        rdi=None if metrics['rdi'] is None else np.asarray(metrics['rdi'], dtype=float),
        solver_stats=solver_stats,
        status=metrics['status'],
        message=metrics['message'],
        trace_source=metrics['trace_source'],
        provenance=metrics['provenance'],
    )


def write_comparison(comparison, out_dir):
    """comparison.csv plus one run directory per experiment, named by label."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for result in comparison.results:
        write_result(result, out / result.label)
    comparison.table.to_csv(out / COMPARISON_FILE, index=False)
    logger.info("comparison of %d runs written to %s", len(comparison.results), out)
    return out / COMPARISON_FILE
