"""
Governor, synchronous generator and grid coupling.

The grid is an infinite bus: its frequency is imposed by a trace and the plant
never feeds back on it.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import find_peaks

from .errors import InstabilityError, LossOfSynchronism, ParameterError, TuningError
from .hydraulics import rk4_step

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GovernorConfig:
    """PI speed governor with permanent droop on measured power."""

    kp: float = 0.3
    ki: float = 0.15
    permanent_droop: float = 0.02
    vane_rate_limit: float = 0.1
    vane_limits: tuple = (0.0, 1.0)
    deadband: float = 0.0
    nominal_frequency: float = 50.0

    def __post_init__(self):
        object.__setattr__(self, 'vane_limits', tuple(float(v) for v in self.vane_limits))
        if self.permanent_droop <= 0:
            raise ParameterError(f"permanent droop must be positive, got {self.permanent_droop}")
        if self.vane_rate_limit <= 0:
            raise ParameterError(f"vane rate limit must be positive, got {self.vane_rate_limit}")
        if self.deadband < 0:
            raise ParameterError(f"deadband must be >= 0, got {self.deadband}")
        low, high = self.vane_limits
        if not 0 <= low < high <= 1:
            raise ParameterError(f"vane limits must satisfy 0 <= low < high <= 1, got {self.vane_limits}")
        if self.kp < 0 or self.ki < 0:
            raise ParameterError("governor gains must be non-negative")


@dataclass(frozen=True)
class GovernorState:
    config: GovernorConfig
    # integrator output, already in pu of guide-vane opening
    integral: float
    y_star: float

    @classmethod
    def initial(cls, config, y0):
        return cls(config=config, integral=float(y0), y_star=float(y0))


def frequency_error(f_grid, config):
    """Droop-scaled frequency error in pu power, after the deadband."""
    deviation = f_grid - config.nominal_frequency
    if abs(deviation) <= config.deadband:
        return 0.0
    deviation -= math.copysign(config.deadband, deviation)
    return -deviation / config.nominal_frequency / config.permanent_droop


def governor_step(state, f_grid, P_ref, dt, p_feedback=None):
    """Advance the governor by ``dt`` and return the new state.

    The PI acts on eps = (f0 - f)/(f0 R_p) + P_ref - P_feedback. When no
    power measurement is passed, the governor's own set-point serves as gate
    feedback. Output is rate limited, then clamped to the vane limits, and the
    integrator is back-calculated whenever either limit bites.
    """
    if dt <= 0:
        raise ParameterError(f"time step must be positive, got {dt}")

    cfg = state.config
    feedback = state.y_star if p_feedback is None else p_feedback
    error = frequency_error(f_grid, cfg) + P_ref - feedback

    integral = state.integral + cfg.ki * error * dt
    raw = integral + cfg.kp * error

    max_move = cfg.vane_rate_limit * dt
    y_star = min(max(raw, state.y_star - max_move), state.y_star + max_move)
    y_star = min(max(y_star, cfg.vane_limits[0]), cfg.vane_limits[1])

    if y_star != raw:
        integral = y_star - cfg.kp * error
        logger.debug("governor output limited: raw=%.5f applied=%.5f", raw, y_star)

    return GovernorState(config=cfg, integral=integral, y_star=y_star)


@dataclass(frozen=True)
class GeneratorConfig:
    inertia_constant: float = 4.0
    # rotor angle at which nominal torque is transferred, degrees
    rated_angle: float = 30.0
    damping_ratio: float = 0.3

    def __post_init__(self):
        if self.inertia_constant <= 0:
            raise ParameterError("inertia constant must be positive")
        if not 0 < self.rated_angle < 90:
            raise ParameterError("rated angle must lie in (0, 90) degrees")
        if self.damping_ratio < 0:
            raise ParameterError("damping ratio must be >= 0")


@dataclass(frozen=True)
class GeneratorState:
    delta: float
    omega: float
    inertia: float
    damping: float
    sync_coefficient: float
    pole_pairs: int = 8

    def __post_init__(self):
        if self.inertia <= 0:
            raise ParameterError("rotor inertia must be positive")
        if self.omega <= 0:
            raise ParameterError("rotor speed must be positive")

    def electrical_torque(self):
        return self.sync_coefficient * math.sin(self.delta)


def grid_speed(f_grid, pole_pairs):
    """Mechanical speed synchronous with the grid, rad/s."""
    return 2 * math.pi * f_grid / pole_pairs


def build_generator(params, config, T_m, f_grid=None):
    """Size the machine from the plant ratings and place it at equilibrium with ``T_m``."""
    f_grid = params.grid_frequency_nominal if f_grid is None else f_grid
    omega0 = params.nominal_speed

    inertia = 2 * config.inertia_constant * params.rated_power / omega0 ** 2
    sync = params.nominal_torque / math.sin(math.radians(config.rated_angle))
    if abs(T_m) >= sync:
        raise LossOfSynchronism(f"mechanical torque {T_m:.4g} N·m exceeds pull-out torque {sync:.4g} N·m")
    delta = math.asin(T_m / sync)

    natural = math.sqrt(sync * math.cos(delta) / inertia)
    damping = 2 * config.damping_ratio * natural * inertia

    return GeneratorState(
        delta=delta,
        omega=grid_speed(f_grid, params.pole_pairs),
        inertia=inertia,
        damping=damping,
        sync_coefficient=sync,
        pole_pairs=params.pole_pairs,
    )


def generator_step(gen, T_m, f_grid, dt):
    """Swing-equation step; returns the new state and the electrical torque.

    Raises
    ------
    LossOfSynchronism
        If the rotor angle leaves (-pi/2, pi/2).
    """
    if dt <= 0:
        raise ParameterError(f"time step must be positive, got {dt}")

    omega_grid = grid_speed(f_grid, gen.pole_pairs)

    def swing(s):
        delta, omega = s
        slip = omega - omega_grid
        T_e = gen.sync_coefficient * math.sin(delta)
        return np.array([slip, (T_m - T_e - gen.damping * slip) / gen.inertia])

    delta, omega = rk4_step(swing, np.array([gen.delta, gen.omega]), dt)

    if not math.isfinite(delta) or abs(delta) > math.pi / 2:
        raise LossOfSynchronism(f"rotor angle {delta:.3f} rad beyond pi/2")

    new = replace(gen, delta=float(delta), omega=float(omega))
    return new, new.electrical_torque()


@dataclass(frozen=True)
class PiTuning:
    kp: float
    ki: float
    ultimate_gain: float
    ultimate_period: float
    converged: bool = True


def oscillation_growth(response, dt):
    """Log growth per peak of the oscillating part of ``response`` and its period.

    Peaks are taken on the first difference, so static offsets left by a
    proportional-only loop do not matter. Returns (growth, period); growth is
    +inf for a diverged response and nan when fewer than three peaks exist.
    """
    response = np.asarray(response, dtype=float)
    if not np.all(np.isfinite(response)):
        return math.inf, math.nan

    rate = np.diff(response)
    scale = np.max(np.abs(rate)) if rate.size else 0.0
    if scale == 0:
        return math.nan, math.nan

    peaks, _ = find_peaks(np.abs(rate), height=1e-9 * scale)
    if peaks.size < 3:
        return math.nan, math.nan

    amplitudes = np.abs(rate[peaks])
    # first peak carries the initial kick
    first, last = amplitudes[1], amplitudes[-1]
    growth = math.log(last / first) / (peaks.size - 2)
    # peaks of abs() come twice per cycle
    period = 2 * dt * float(np.mean(np.diff(peaks)))
    return growth, period


def tune_pi(run_loop, dt, gains=None, refine_steps=20, fallback=None):
    """Ziegler-Nichols PI tuning by ultimate-gain search.

    Parameters
    ----------
    run_loop : callable
        ``run_loop(kp)`` runs the proportional-only closed loop and returns the
        sampled loop signal (sample period ``dt``).
    dt : float
        Sample period of the loop output, s.
    gains : array_like, optional
        Increasing proportional gains to sweep. Defaults to a log grid 0.01..10.
    refine_steps : int
        Bisection steps between the last stable and the first oscillating gain.
    fallback : tuple of float, optional
        (kp, ki) returned with ``converged=False`` when no oscillation is found.
        Without it the failure raises ``TuningError``.
    """
    gains = np.geomspace(0.01, 10.0, 31) if gains is None else np.asarray(gains, dtype=float)

    def measure(k):
        try:
            return oscillation_growth(run_loop(k), dt)
        except InstabilityError:
            return math.inf, math.nan

    stable_gain = None
    unstable_gain = None
    period = math.nan
    for k in gains:
        growth, p = measure(k)
        if growth >= 0:
            unstable_gain, period = k, p
            break
        stable_gain = k

    if unstable_gain is None:
        message = f"no sustained oscillation up to kp={gains[-1]:.4g}"
        if fallback is None:
            raise TuningError(message, best=stable_gain)
        logger.warning("%s; falling back to kp=%.4g ki=%.4g", message, *fallback)
        return PiTuning(kp=fallback[0], ki=fallback[1], ultimate_gain=math.nan,
                        ultimate_period=math.nan, converged=False)

    if stable_gain is not None:
        low, high = stable_gain, unstable_gain
        for _ in range(refine_steps):
            mid = math.sqrt(low * high)
            growth, p = measure(mid)
            if growth >= 0:
                high = mid
                if math.isfinite(p):
                    period = p
            else:
                low = mid
        unstable_gain = high

    if not math.isfinite(period):
        message = f"oscillation at kp={unstable_gain:.4g} has no measurable period"
        if fallback is None:
            raise TuningError(message, best=unstable_gain)
        logger.warning("%s; falling back to kp=%.4g ki=%.4g", message, *fallback)
        return PiTuning(kp=fallback[0], ki=fallback[1], ultimate_gain=unstable_gain,
                        ultimate_period=math.nan, converged=False)

    tuning = PiTuning(
        kp=0.45 * unstable_gain,
        ki=0.54 * unstable_gain / period,
        ultimate_gain=unstable_gain,
        ultimate_period=period,
    )
    logger.info("Ziegler-Nichols: K_u=%.4g T_u=%.4g s -> kp=%.4g ki=%.4g",
                tuning.ultimate_gain, tuning.ultimate_period, tuning.kp, tuning.ki)
    return tuning
