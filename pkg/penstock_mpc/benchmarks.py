"""
Benchmark controllers that reshape the grid-frequency signal fed to the governor.

- a first-order low-pass filter
- a fatigue-aware filter: predict penstock stress from frequency with a
  linear model, trim stress beyond half the fatigue limit, and invert the
  model to recover a frequency signal that produces the trimmed stress
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal

from .errors import FilterError, ParameterError, TuningError
from .fatigue import stress_factor
from .linearize import ContinuousStateSpace, discretize, head_selector, linearize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LpfConfig:
    cutoff: float = 1.46
    # bisection bracket for cutoff tuning, Hz
    bracket: tuple = (0.005, 5.0)
    tolerance: float = 0.002
    max_steps: int = 30


@dataclass
class LowPassFilter:
    """First-order low-pass, zero-order-hold exact discretization."""

    cutoff: float
    dt: float = 0.1
    output: float | None = None
    last_input: float | None = None
    _coefficients: tuple = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if not self.cutoff > 0:
            raise ParameterError(f"cutoff must be positive, got {self.cutoff}")
        if not self.dt > 0:
            raise ParameterError(f"time step must be positive, got {self.dt}")
        self._coefficients = lpf_coefficients(self.cutoff, self.dt)

    def reset(self, value):
        self.output = float(value)
        self.last_input = float(value)

    def step(self, value):
        if self.output is None:
            self.reset(value)
            return self.output
        b, a = self._coefficients
        self.output = -a[1] * self.output + b[1] * self.last_input
        self.last_input = float(value)
        return self.output


def lpf_coefficients(cutoff, dt):
    """(b, a) of 1 / (1 + s / omega_c) held over ``dt``."""
    omega = 2 * math.pi * cutoff
    num, den, _ = signal.cont2discrete(([1.0], [1.0 / omega, 1.0]), dt, method='zoh')
    return np.ravel(num), np.ravel(den)


def lpf_step(f_grid, dt, filt):
    """Feed one frequency sample through ``filt`` and return its output, Hz."""
    if dt <= 0:
        raise ParameterError(f"time step must be positive, got {dt}")
    if dt != filt.dt:
        filt.dt = dt
        filt._coefficients = lpf_coefficients(filt.cutoff, dt)
    return filt.step(f_grid)


def lpf_trace(samples, cutoff, dt):
    """Filter a whole trace, starting at rest on its first sample."""
    samples = np.asarray(samples, dtype=float)
    b, a = lpf_coefficients(cutoff, dt)
    zi = signal.lfilter_zi(b, a) * samples[0]
    filtered, _ = signal.lfilter(b, a, samples, zi=zi)
    return filtered


def bisect_monotone(evaluate, target, bracket, tolerance, max_steps, label):
    """Log-scale bisection of an increasing metric onto ``target``.

    Returns (argument, value). Raises ``TuningError`` carrying the closest
    candidate when the target lies outside the bracket or steps run out.
    """
    low, high = bracket
    best = None

    def consider(arg):
        nonlocal best
        value = evaluate(arg)
        logger.info("%s: %.5g -> %.5f (target %.5f)", label, arg, value, target)
        if best is None or abs(value - target) < abs(best[1] - target):
            best = (arg, value)
        return value

    value_high = consider(high)
    if abs(value_high - target) <= tolerance:
        return high, value_high
    if value_high < target:
        raise TuningError(f"{label}: target {target:.5f} above bracket maximum {value_high:.5f}", best=best)

    value_low = consider(low)
    if abs(value_low - target) <= tolerance:
        return low, value_low
    if value_low > target:
        raise TuningError(f"{label}: target {target:.5f} below bracket minimum {value_low:.5f}", best=best)

    for _ in range(max_steps):
        mid = math.sqrt(low * high)
        value = consider(mid)
        if abs(value - target) <= tolerance:
            return mid, value
        if value < target:
            low = mid
        else:
            high = mid

    raise TuningError(f"{label}: no match within {max_steps} bisection steps", best=best)


def tune_lpf_cutoff(target_cc, runner, config=None):
    """Cutoff at which the filtered run's CC matches ``target_cc``.

    ``runner(cutoff)`` performs one experiment and returns its CC.
    """
    config = config or LpfConfig()
    cutoff, cc = bisect_monotone(runner, target_cc, config.bracket, config.tolerance,
                                 config.max_steps, 'lpf cutoff')
    logger.info("low-pass cutoff tuned to %.4f Hz (CC %.4f)", cutoff, cc)
    return cutoff


@dataclass(frozen=True)
class FatigueFilterConfig:
    regularization: float = 1e-3
    # multiplies the half-fatigue-limit stress trim
    trim_scale: float = 1.0
    step: float = 0.1
    # impulse-response taps below this fraction of the peak are dropped
    response_tolerance: float = 1e-4
    max_taps: int = 300
    bracket: tuple = (0.1, 10.0)
    rdi_tolerance: float = 0.05
    max_steps: int = 20


@dataclass
class FatigueFilter:
    # stress response of each element to a unit frequency deviation, (taps, I), Pa/Hz
    taps: np.ndarray
    nominal_frequency: float
    half_width: float
    regularization: float = 1e-3

    def __post_init__(self):
        if self.half_width <= 0:
            raise ParameterError("stress trim half-width must be positive")
        if self.regularization <= 0:
            raise FilterError("inverse filter needs a positive regularization weight")

    def predict_stress(self, deviation):
        """Stress deviation of every element for a frequency deviation trace, (N, I)."""
        return np.column_stack([
            signal.lfilter(self.taps[:, i], [1.0], deviation) for i in range(self.taps.shape[1])
        ])

    def preprocess(self, samples):
        return fatigue_filter_preprocess(samples, self)


def governor_plant_model(ss, governor, power_gain):
    """Continuous model from frequency deviation (Hz) to plant deviations.

    The governor is linearized with a quasi-static power measurement
    P = power_gain * y, so the PI and droop reduce to one integrator state
    appended after the hydraulic states.
    """
    size = ss.A.shape[0]
    droop = -1.0 / (governor.nominal_frequency * governor.permanent_droop)
    loop = 1.0 + governor.kp * power_gain

    A = np.zeros((size + 1, size + 1))
    A[:size, :size] = ss.A
    A[:size, size] = ss.B_y * governor.ki / loop
    A[size, size] = -power_gain * governor.ki / loop

    B = np.zeros(size + 1)
    B[:size] = ss.B_y * governor.kp * droop / loop
    B[size] = droop / loop

    return ContinuousStateSpace(
        A=A, B_y=B, B_z=np.zeros((size + 1, 2)), mu=0.0,
        x0=np.zeros(size + 1), y0=ss.y0, element_count=ss.element_count,
    )


def build_fatigue_filter(circuit, params, x0, y0, governor, sn, config=None, plant_step=0.005, power_gain=1.0):
    """Identify the frequency-to-stress model at (x0, y0) and wrap it in a filter."""
    config = config or FatigueFilterConfig()
    ss = linearize(circuit, x0, y0, params)
    combined = governor_plant_model(ss, governor, power_gain)
    substeps = max(1, math.ceil(config.step / plant_step - 1e-9))
    dss = discretize(combined, config.step, substeps=substeps)

    n = ss.element_count
    C = np.hstack([head_selector(n), np.zeros((n, 1))]) * stress_factor(params)

    markov = np.empty((config.max_taps, n))
    v = dss.B_y.copy()
    for k in range(config.max_taps):
        markov[k] = C @ v
        v = dss.A @ v

    peak = np.max(np.abs(markov))
    if not peak > 0:
        raise FilterError("frequency-to-stress model has zero gain")
    significant = np.flatnonzero(np.max(np.abs(markov), axis=1) >= config.response_tolerance * peak)
    length = significant[-1] + 1
    # stress at step k+1 responds to the frequency held over step k
    taps = np.vstack([np.zeros((1, n)), markov[:length]])

    half_width = config.trim_scale * sn.fatigue_limit / 2
    logger.info("fatigue filter: %d taps, stress trim +/- %.2f MPa", taps.shape[0], half_width / 1e6)
    return FatigueFilter(
        taps=taps,
        nominal_frequency=governor.nominal_frequency,
        half_width=half_width,
        regularization=config.regularization,
    )


def _normal_matrix_banded(taps, count, weight):
    """Upper banded form of sum_i T_i' T_i + weight * I for Toeplitz T_i of ``count`` rows."""
    K = taps.shape[0]
    # cumulative lagged products, summed over elements: C[l, j] = sum_{j' <= j} h_j' h_{j'+l}
    cumulative = np.zeros((K, K))
    for lag in range(K):
        products = np.sum(taps[:K - lag] * taps[lag:], axis=1)
        cumulative[lag, :K - lag] = np.cumsum(products)
        cumulative[lag, K - lag:] = cumulative[lag, K - lag - 1]

    remaining = count - 1 - np.arange(count)
    banded = np.zeros((K, count))
    for lag in range(K):
        row = cumulative[lag, np.minimum(remaining, K - 1 - lag)]
        row[:lag] = 0.0
        banded[K - 1 - lag] = row
    banded[K - 1] += weight
    return banded


def fatigue_filter_preprocess(f_trace, model, limits=None):
    """Frequency trace whose predicted stress stays inside the trim band.

    ``limits`` overrides the model's stress half-width (Pa). The inverse is a
    Tikhonov-regularized least-squares deconvolution over the whole trace;
    when no stress sample needs trimming the input comes back unchanged.
    """
    samples = np.asarray(f_trace, dtype=float)
    half_width = model.half_width if limits is None else limits
    deviation = samples - model.nominal_frequency

    predicted = model.predict_stress(deviation)
    trimmed = np.clip(predicted, -half_width, half_width)
    clipped = np.count_nonzero(trimmed != predicted)
    if clipped == 0:
        return samples.copy()

    scale = math.sqrt(np.sum(model.taps ** 2))
    taps = model.taps / scale
    target = trimmed / scale

    rhs = model.regularization * deviation
    for i in range(taps.shape[1]):
        rhs += signal.lfilter(taps[:, i], [1.0], target[::-1, i])[::-1]

    banded = _normal_matrix_banded(taps, samples.size, model.regularization)
    try:
        solution = linalg.solveh_banded(banded, rhs)
    except linalg.LinAlgError as error:
        raise FilterError(f"inverse filter is ill-conditioned: {error}") from error
    if not np.all(np.isfinite(solution)):
        raise FilterError("inverse filter produced non-finite frequencies")

    logger.info("fatigue filter trimmed %d stress samples (%.3f%%)",
                clipped, 100 * clipped / predicted.size)
    return model.nominal_frequency + solution


def tune_fatigue_filter(target_rdi, runner, config=None):
    """Trim scale at which the filtered run's max RDI matches ``target_rdi``.

    ``runner(trim_scale)`` performs one experiment and returns its max RDI.
    """
    config = config or FatigueFilterConfig()
    scale, value = bisect_monotone(runner, target_rdi, config.bracket, config.rdi_tolerance,
                                   config.max_steps, 'fatigue filter trim')
    logger.info("fatigue filter trim scale tuned to %.4f (max RDI %.4f)", scale, value)
    return scale
