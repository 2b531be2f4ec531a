"""
Penstock fatigue: hoop stress, rainflow cycle counting, S-N life and Miner damage.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import rainflow

from .errors import ParameterError, UndefinedMetricError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SNCurve:
    """Two-slope Wohler curve with its knee at the fatigue limit.

    Ranges at or above ``fatigue_limit`` follow ``slope_below_knee`` (fewer
    cycles than the knee), ranges under it follow ``slope_above_knee``.
    """

    slope_below_knee: float = 3.0
    fatigue_limit: float = 23e6
    slope_above_knee: float = 5.0
    knee_cycles: float = 1e7

    def __post_init__(self):
        if self.slope_below_knee <= 0 or self.slope_above_knee <= 0:
            raise ParameterError("S-N slopes must be positive")
        if self.fatigue_limit <= 0:
            raise ParameterError("fatigue limit must be positive")
        if self.knee_cycles <= 0:
            raise ParameterError("knee cycle count must be positive")


@dataclass
class CycleSet:
    ranges: np.ndarray = field(default_factory=lambda: np.empty(0))
    counts: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self):
        return self.ranges.size

    def to_frame(self):
        return pd.DataFrame({'range': self.ranges, 'count': self.counts})


@dataclass
class StressSeries:
    stress: np.ndarray
    elevation: float
    nominal_stress: float = float('nan')

    def __len__(self):
        return self.stress.size


def stress_factor(params):
    """Pa of hoop stress per m of pressure head, k D / (2 e)."""
    return params.pressure_factor * params.penstock_diameter / (2 * params.wall_thickness)


def head_to_stress(h_series, z, params, nominal_head=None):
    if params.wall_thickness <= 0 or params.penstock_diameter <= 0:
        raise ParameterError("wall thickness and diameter must be positive")

    factor = stress_factor(params)
    stress = (np.asarray(h_series, dtype=float) - z) * factor
    nominal = float('nan') if nominal_head is None else (nominal_head - z) * factor
    return StressSeries(stress=stress, elevation=float(z), nominal_stress=nominal)


def stress_matrix(heads, params):
    """Hoop stress of every element for a (samples, elements) head array."""
    return (np.asarray(heads, dtype=float) - params.elevations) * stress_factor(params)


def rainflow_cycles(series):
    """ASTM E1049 rainflow count; unclosed residual ranges weigh 0.5."""
    values = series.stress if isinstance(series, StressSeries) else np.asarray(series, dtype=float)
    if values.size < 2:
        raise ParameterError("rainflow counting needs at least two samples")

    ranges = []
    counts = []
    for rng, _mean, count, _start, _end in rainflow.extract_cycles(values):
        if rng > 0:
            ranges.append(rng)
            counts.append(count)

    return CycleSet(ranges=np.asarray(ranges, dtype=float), counts=np.asarray(counts, dtype=float))


def cycles_to_failure(stress_range, sn):
    stress_range = np.asarray(stress_range, dtype=float)
    if np.any(stress_range <= 0):
        raise ParameterError("stress ranges must be positive")

    ratio = sn.fatigue_limit / stress_range
    slope = np.where(stress_range >= sn.fatigue_limit, sn.slope_below_knee, sn.slope_above_knee)
    life = sn.knee_cycles * ratio ** slope
    return float(life) if life.ndim == 0 else life


def damage_index(cycles, sn):
    """Miner's sum of n_j / N(range_j)."""
    if len(cycles) == 0:
        return 0.0
    return float(np.sum(cycles.counts / cycles_to_failure(cycles.ranges, sn)))


def element_damage(heads, params, sn):
    """Miner damage of every element from a (samples, elements) head array."""
    stress = stress_matrix(heads, params)
    return np.array([damage_index(rainflow_cycles(stress[:, i]), sn) for i in range(stress.shape[1])])


def rdi(damage_ctrl, damage_base):
    """Relative damage index against the worst base-case element."""
    damage_ctrl = np.asarray(damage_ctrl, dtype=float)
    damage_base = np.asarray(damage_base, dtype=float)
    if damage_ctrl.shape != damage_base.shape:
        raise ParameterError(f"damage vectors differ in shape: {damage_ctrl.shape} vs {damage_base.shape}")

    anchor = damage_base.max()
    if not anchor > 0:
        raise UndefinedMetricError("RDI undefined: base-case damage is zero on every element")
    return damage_ctrl / anchor


def analyze_stress_table(frame, sn):
    """Cycle table and per-column damage for a stress table in Pa.

    A ``time_s`` column, if present, is ignored; every other column is one
    stress series.
    """
    columns = [c for c in frame.columns if c != 'time_s']
    if not columns:
        raise ParameterError("stress table has no stress columns")

    tables = []
    damage = {}
    for column in columns:
        cycles = rainflow_cycles(frame[column].to_numpy(dtype=float))
        table = cycles.to_frame()
        table.insert(0, 'series', column)
        tables.append(table)
        damage[column] = damage_index(cycles, sn)
        logger.debug("%s: %d cycle entries, D=%.4g", column, len(cycles), damage[column])

    return pd.concat(tables, ignore_index=True), damage
