"""
Grid-frequency traces: CSV ingestion with validation, and seeded synthesis.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import signal

from .errors import IngestionError, ParameterError

logger = logging.getLogger(__name__)

# plausibility gate, Hz
FREQUENCY_RANGE = (45.0, 55.0)


@dataclass(frozen=True)
class SynthFrequencyParams:
    """Ornstein-Uhlenbeck frequency around its mean, plus optional extras.

    ``noise_std`` adds white measurement noise; ``step_interval`` and
    ``step_std`` add a piecewise-constant offset redrawn at fixed intervals,
    like the deterministic deviations at market time boundaries.
    """

    mean: float = 50.0
    stddev: float = 0.02
    reversion_time: float = 60.0
    seed: int = 7
    noise_std: float = 0.0
    step_interval: float = 0.0
    step_std: float = 0.0

    def __post_init__(self):
        if self.stddev < 0 or self.noise_std < 0 or self.step_std < 0:
            raise ParameterError("standard deviations must be >= 0")
        if self.reversion_time <= 0:
            raise ParameterError("reversion time must be positive")
        if self.step_interval < 0:
            raise ParameterError("step interval must be >= 0")


@dataclass
class FrequencyTrace:
    period: float
    samples: np.ndarray
    source: str = 'file'

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.period <= 0:
            raise ParameterError(f"sample period must be positive, got {self.period}")
        outside = np.flatnonzero((self.samples < FREQUENCY_RANGE[0]) | (self.samples > FREQUENCY_RANGE[1]))
        if outside.size:
            row = int(outside[0])
            raise IngestionError(
                f"sample {row} = {self.samples[row]:.4f} Hz outside plausibility gate {FREQUENCY_RANGE}",
                row=row,
            )

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size * self.period

    @property
    def times(self):
        return self.period * np.arange(self.samples.size)

    def resample(self, period):
        """Zero-order-hold resampling onto a grid of ``period``."""
        count = int(round(self.duration / period))
        grid = period * np.arange(count)
        index = np.searchsorted(self.times, grid + 1e-9 * period, side='right') - 1
        return FrequencyTrace(period=period, samples=self.samples[np.clip(index, 0, None)], source=self.source)

    def to_frame(self):
        return pd.DataFrame({'time_s': self.times, 'freq_hz': self.samples})


def _first_bad(mask):
    bad = np.flatnonzero(mask)
    return int(bad[0]) if bad.size else None


def load_frequency_csv(path, expected_period, target_period=None):
    """Read a (time_s, freq_hz) CSV onto a uniform grid.

    The header row is optional. Row numbers in errors count data rows from 0.
    """
    try:
        frame = pd.read_csv(path, header=None, comment="#", skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise IngestionError(f"{path}: unreadable CSV ({error})") from error

    if frame.shape[1] < 2:
        raise IngestionError(f"{path}: expected two columns (time_s, freq_hz), found {frame.shape[1]}")
    frame = frame.iloc[:, :2]

    numeric = frame.apply(pd.to_numeric, errors='coerce')
    if numeric.iloc[0].isna().any() and not frame.iloc[0].isna().any():
        # header line
        numeric = numeric.iloc[1:].reset_index(drop=True)
    if len(numeric) < 1:
        raise IngestionError(f"{path}: no data rows")

    row = _first_bad(numeric.isna().any(axis=1).to_numpy())
    if row is not None:
        raise IngestionError(f"{path}: malformed row {row}", row=row)

    times = numeric.iloc[:, 0].to_numpy(dtype=float)
    values = numeric.iloc[:, 1].to_numpy(dtype=float)

    steps = np.diff(times)
    row = _first_bad(steps <= 0)
    if row is not None:
        raise IngestionError(f"{path}: time not increasing at row {row + 1}", row=row + 1)
    row = _first_bad(steps > 1.5 * expected_period)
    if row is not None:
        raise IngestionError(
            f"{path}: gap of {steps[row]:.4g} s before row {row + 1} exceeds 1.5 x {expected_period} s",
            row=row + 1,
        )
    row = _first_bad((values < FREQUENCY_RANGE[0]) | (values > FREQUENCY_RANGE[1]))
    if row is not None:
        raise IngestionError(
            f"{path}: row {row} = {values[row]:.4f} Hz outside plausibility gate {FREQUENCY_RANGE}",
            row=row,
        )

    period = expected_period if target_period is None else target_period
    span = times[-1] - times[0] + expected_period
    grid = times[0] + period * np.arange(int(round(span / period)))
    index = np.searchsorted(times, grid + 1e-9 * period, side='right') - 1

    logger.info("loaded %d frequency samples from %s, resampled to %d at %.4g s",
                values.size, path, grid.size, period)
    return FrequencyTrace(period=period, samples=values[index], source=f'file:{path}')


def synth_frequency(params, duration, period):
    """Seeded Ornstein-Uhlenbeck frequency trace with exact discretization."""
    if duration <= 0 or period <= 0:
        raise ParameterError("duration and period must be positive")

    count = int(round(duration / period))
    rng = np.random.default_rng(params.seed)

    decay = math.exp(-period / params.reversion_time)
    spread = params.stddev * math.sqrt(1 - decay ** 2)
    shocks = rng.standard_normal(count)

    # AR(1) recursion, started from the stationary distribution
    innovations = spread * shocks
    innovations[0] = params.stddev * shocks[0]
    deviation = signal.lfilter([1.0], [1.0, -decay], innovations)

    if params.step_interval > 0 and params.step_std > 0:
        blocks = int(math.ceil(count * period / params.step_interval))
        offsets = params.step_std * rng.standard_normal(blocks)
        deviation += offsets[(np.arange(count) * period // params.step_interval).astype(int)]

    if params.noise_std > 0:
        deviation += params.noise_std * rng.standard_normal(count)

    source = f'synthetic(seed={params.seed}, mean={params.mean}, stddev={params.stddev}, tau={params.reversion_time})'
    return FrequencyTrace(period=period, samples=params.mean + deviation, source=source)


def step_trace(duration, period, step, at=10.0, nominal=50.0):
    """Constant frequency with one step of ``step`` Hz at time ``at``."""
    times = period * np.arange(int(round(duration / period)))
    return FrequencyTrace(period=period, samples=np.where(times >= at, nominal + step, nominal),
                          source=f'step({step:+g} Hz at {at:g} s)')


def write_frequency_csv(trace, path):
    trace.to_frame().to_csv(path, index=False)
    return path
