"""
Nonlinear equivalent-circuit model of a medium-head hydropower plant.

The penstock is split into I elements, each an RLC cell: a series inductance
and flow-dependent resistance carrying Q_i, and a shunt capacitance holding the
piezometric head h_i at the element's downstream end. The last head feeds a
quasi-static turbine branch with its own inductance. The state vector is

    x = [Q_1 .. Q_I, h_1 .. h_I, Q_t]
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import bisect

from .errors import InfeasibleOperatingPoint, InstabilityError, ParameterError

logger = logging.getLogger(__name__)

# smallest guide-vane opening the turbine surrogate accepts
Y_MIN = 1e-4


@dataclass(frozen=True)
class PlantParameters:
    """Physical constants of the plant.

    Defaults describe the 230 MW case study. Values absent from the plant
    data sheet (friction, wall thickness, reservoir split, elevation profile,
    turbine inductance, pole pairs) are assumptions and can be overridden.
    """

    rated_power: float = 230e6
    nominal_head: float = 315.0
    nominal_discharge: float = 85.3
    nominal_speed: float = 2 * math.pi * 375 / 60
    nominal_torque: float = 5.86e6
    penstock_length: float = 1100.0
    penstock_diameter: float = 5.0
    wave_speed: float = 1100.0
    element_count: int = 20
    wall_thickness: float = 0.05
    darcy_friction: float = 0.02
    water_density: float = 1000.0
    gravity: float = 9.81
    # None -> inductance of one penstock element
    turbine_inductance: float | None = None
    # None -> rated_power / (rho g Q H) at the nominal point
    turbine_efficiency: float | None = None
    upstream_head: float = 320.0
    downstream_head: float = 5.0
    intake_elevation: float = 300.0
    # explicit per-element elevations override the linear intake->turbine drop
    elevation_profile: tuple | None = None
    pole_pairs: int = 8
    grid_frequency_nominal: float = 50.0

    def __post_init__(self):
        if self.elevation_profile is not None:
            object.__setattr__(self, 'elevation_profile', tuple(float(z) for z in self.elevation_profile))
        for name, value in self._derivations().items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        self.validate()

    def _derivations(self):
        hydraulic_power = self.water_density * self.gravity * self.nominal_discharge * self.nominal_head
        return {
            'turbine_inductance': self.dx / (self.gravity * self.area),
            'turbine_efficiency': self.rated_power / hydraulic_power,
        }

    def updated(self, **values):
        """Copy with ``values`` replaced.

        Derived values that still match their derivation follow the new
        inputs; ones set explicitly are kept.
        """
        for name, value in self._derivations().items():
            if name not in values and getattr(self, name) == value:
                values[name] = None
        return replace(self, **values)

    @property
    def area(self):
        return math.pi * self.penstock_diameter ** 2 / 4

    @property
    def dx(self):
        return self.penstock_length / self.element_count

    @property
    def pressure_factor(self):
        """k = rho * g, converting head in m to pressure in Pa."""
        return self.water_density * self.gravity

    @property
    def elevations(self):
        if self.elevation_profile is not None:
            return np.asarray(self.elevation_profile, dtype=float)
        return np.linspace(self.intake_elevation, 0.0, self.element_count)

    @property
    def positions(self):
        """Distance of each element's downstream end from the upper reservoir, m."""
        return self.dx * np.arange(1, self.element_count + 1)

    def validate(self):
        if int(self.element_count) != self.element_count or self.element_count < 2:
            raise ParameterError(f"element_count must be an integer >= 2, got {self.element_count}")

        positive = [
            'rated_power', 'nominal_head', 'nominal_discharge', 'nominal_speed',
            'nominal_torque', 'penstock_length', 'penstock_diameter', 'wave_speed',
            'wall_thickness', 'water_density', 'gravity', 'turbine_inductance',
            'grid_frequency_nominal', 'pole_pairs',
        ]
        for name in positive:
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be finite and positive, got {value}")

        if not math.isfinite(self.darcy_friction) or self.darcy_friction < 0:
            raise ParameterError(f"darcy_friction must be finite and >= 0, got {self.darcy_friction}")
        if not 0 < self.turbine_efficiency <= 1:
            raise ParameterError(f"turbine_efficiency must lie in (0, 1], got {self.turbine_efficiency:.4f}")
        if not self.upstream_head > self.downstream_head >= 0:
            raise ParameterError("reservoir heads must satisfy upstream_head > downstream_head >= 0")

        torque = self.rated_power / self.nominal_speed
        if abs(torque - self.nominal_torque) > 0.005 * self.nominal_torque:
            raise ParameterError(
                f"nominal_torque {self.nominal_torque:.4g} N·m inconsistent with "
                f"rated_power / nominal_speed = {torque:.4g} N·m"
            )

        z = self.elevations
        if z.shape != (self.element_count,):
            raise ParameterError(f"elevation_profile needs {self.element_count} values, got {z.size}")
        if np.any(np.diff(z) > 0):
            raise ParameterError("elevation_profile must be non-increasing towards the turbine")


@dataclass
class CircuitModel:
    """Per-element circuit constants of the penstock ladder.

    ``resistance`` holds R evaluated at the reference flow; the nonlinear
    right-hand side recomputes it from the instantaneous flow through
    ``friction_coefficient`` (R = friction_coefficient * abs(Q)).
    """

    resistance: np.ndarray
    inductance: np.ndarray
    capacitance: np.ndarray
    friction_coefficient: np.ndarray
    dx: float
    turbine_inductance: float
    params: PlantParameters = field(repr=False)

    @property
    def element_count(self):
        return self.inductance.size

    @property
    def state_size(self):
        return 2 * self.element_count + 1


@dataclass(frozen=True)
class HydraulicInputs:
    y: float
    upstream_head: float
    downstream_head: float
    omega: float

    def __post_init__(self):
        if not 0 <= self.y <= 1:
            raise ParameterError(f"guide-vane opening must lie in [0, 1], got {self.y}")
        if not self.upstream_head > self.downstream_head >= 0:
            raise ParameterError("inputs must satisfy H_u > H_d >= 0")
        if self.omega <= 0:
            raise ParameterError(f"rotational speed must be positive, got {self.omega}")


def split_state(x, element_count):
    """Views (Q, h, Q_t) into a state vector."""
    return x[:element_count], x[element_count:2 * element_count], x[2 * element_count]


def make_state(Q, h, Q_t):
    return np.concatenate([np.asarray(Q, dtype=float), np.asarray(h, dtype=float), [float(Q_t)]])


def build_circuit(params, Q_ref):
    """Evaluate the ladder constants of every element at flow ``Q_ref``."""
    if not math.isfinite(Q_ref) or Q_ref <= 0:
        raise ParameterError(f"reference flow must be finite and positive, got {Q_ref}")

    n = params.element_count
    A = params.area
    dx = params.dx
    g = params.gravity

    k_f = params.darcy_friction * dx / (2 * g * params.penstock_diameter * A ** 2)
    friction = np.full(n, k_f)
    resistance = friction * abs(Q_ref)
    inductance = np.full(n, dx / (g * A))
    capacitance = np.full(n, g * A * dx / params.wave_speed ** 2)

    if not (np.all(np.isfinite(resistance)) and np.all(inductance > 0) and np.all(capacitance > 0)):
        raise ParameterError("circuit constants must be finite with positive L and C")

    return CircuitModel(
        resistance=resistance,
        inductance=inductance,
        capacitance=capacitance,
        friction_coefficient=friction,
        dx=dx,
        turbine_inductance=params.turbine_inductance,
        params=params,
    )


def clamp_opening(y):
    """Return the opening the surrogate can evaluate and whether it was clamped."""
    if y <= Y_MIN:
        return Y_MIN, True
    return y, False


def turbine_head(Q_t, y, params):
    """Quasi-static turbine head, valve-analogy law anchored at the nominal point."""
    y_eff, clamped = clamp_opening(y)
    if clamped:
        logger.debug("guide-vane opening %.3g below %.0e clamped in turbine surrogate", y, Y_MIN)
    ratio = Q_t / (y_eff * params.nominal_discharge)
    # signed square keeps the law odd for reverse flow during violent transients
    return params.nominal_head * ratio * abs(ratio)


def turbine_torque(Q_t, H_t, omega, params):
    if omega <= 0:
        raise ParameterError(f"rotational speed must be positive, got {omega}")
    return params.turbine_efficiency * params.pressure_factor * Q_t * H_t / omega


def turbine_power(Q_t, H_t, params):
    """Mechanical power at the shaft, W."""
    return params.turbine_efficiency * params.pressure_factor * Q_t * H_t


def derivative(x, u, circuit):
    """Right-hand side of the circuit ODE.

    Raises
    ------
    InstabilityError
        If the state is non-finite or any head leaves [-2 H_u, 2 H_u].
    """
    n = circuit.element_count
    Q, h, Q_t = split_state(x, n)

    if not np.all(np.isfinite(x)) or np.any(np.abs(h) > 2 * u.upstream_head):
        raise InstabilityError("penstock state diverged: non-finite value or head beyond 2 H_u")

    h_upstream = np.concatenate(([u.upstream_head], h[:-1]))
    Q_downstream = np.concatenate((Q[1:], [Q_t]))

    dQ = (h_upstream - h - circuit.friction_coefficient * np.abs(Q) * Q) / circuit.inductance
    dh = (Q - Q_downstream) / circuit.capacitance
    dQ_t = (h[-1] - u.downstream_head - turbine_head(Q_t, u.y, circuit.params)) / circuit.turbine_inductance

    return np.concatenate((dQ, dh, [dQ_t]))


def rk4_step(f, x, dt):
    """One classical Runge-Kutta step of x' = f(x)."""
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def step_rk4(x, u, circuit, dt):
    if dt <= 0:
        raise ParameterError(f"time step must be positive, got {dt}")
    transit = circuit.dx / circuit.params.wave_speed
    if dt > transit:
        raise ParameterError(f"time step {dt} s exceeds element wave-transit time {transit} s")

    return rk4_step(lambda state: derivative(state, u, circuit), x, dt)


def steady_state(circuit, y, upstream_head, downstream_head, params):
    """Fixed point of the circuit for a constant guide-vane opening.

    Flow is uniform along the ladder; heads fall from H_u by the accumulated
    friction drops, and the turbine takes what is left of the gross head.
    The total flow is found by bisection.
    """
    if not 0 < y <= 1:
        raise ParameterError(f"steady state needs an opening in (0, 1], got {y}")

    friction_total = circuit.friction_coefficient.sum()
    gross = upstream_head - downstream_head

    def residual(Q):
        return gross - friction_total * Q * abs(Q) - turbine_head(Q, y, params)

    q_max = 2 * params.nominal_discharge
    if residual(q_max) > 0:
        raise InfeasibleOperatingPoint(
            f"no steady flow in (0, {q_max:.4g}] m³/s for opening {y}"
        )

    Q = bisect(residual, 0.0, q_max, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200)

    drops = circuit.friction_coefficient * Q * abs(Q)
    h = upstream_head - np.cumsum(drops)
    x = make_state(np.full(circuit.element_count, Q), h, Q)

    logger.debug("steady state at y=%.4f: Q=%.6f m³/s, h_I=%.4f m", y, Q, h[-1])
    return x
