"""
Linear state-space models of the hydraulic circuit around an operating point.

The continuous model is

    dx/dt = A x + B_y y + B_z z,    z = [H_u, mu - H_d]

with the resistance frozen at the operating-point flows and the turbine head
replaced by its first-order Taylor expansion; every constant of that expansion
is collected in mu. Rotor speed is not a state of this model.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .errors import DiscretizationError, InfeasibleOperatingPoint, ParameterError
from .hydraulics import clamp_opening, split_state, turbine_head

logger = logging.getLogger(__name__)


@dataclass
class ContinuousStateSpace:
    A: np.ndarray
    B_y: np.ndarray
    B_z: np.ndarray
    mu: float
    x0: np.ndarray
    y0: float
    element_count: int

    def inputs(self, upstream_head, downstream_head):
        """Input vector z for the given reservoir heads."""
        return np.array([upstream_head, self.mu - downstream_head])

    def derivative(self, x, y, z):
        return self.A @ x + self.B_y * y + self.B_z @ z


@dataclass
class DiscreteStateSpace:
    A: np.ndarray
    B_y: np.ndarray
    B_z: np.ndarray
    C: np.ndarray
    dt: float
    mu: float
    x0: np.ndarray
    y0: float
    element_count: int

    def inputs(self, upstream_head, downstream_head):
        return np.array([upstream_head, self.mu - downstream_head])

    def step(self, x, y, z):
        return self.A @ x + self.B_y * y + self.B_z @ z

    def heads(self, x):
        return self.C @ x

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(linalg.eigvals(self.A))))


def turbine_partials(Q_t, y, params):
    """Analytic (dH_t/dQ_t, dH_t/dy) of the turbine surrogate."""
    y_eff, _ = clamp_opening(y)
    H_t = turbine_head(Q_t, y_eff, params)
    dH_dQ = 2 * params.nominal_head * abs(Q_t) / (y_eff * params.nominal_discharge) ** 2
    dH_dy = -2 * H_t / y_eff
    return dH_dQ, dH_dy


def linearize(circuit, x0, y0, params):
    """Continuous linear model of the circuit around (x0, y0).

    Raises
    ------
    InfeasibleOperatingPoint
        If the linearized system matrix has an eigenvalue with non-negative
        real part.
    """
    if not 0 < y0 <= 1:
        raise ParameterError(f"linearization needs an opening in (0, 1], got {y0}")

    n = circuit.element_count
    size = circuit.state_size
    Q, _, Q_t = split_state(np.asarray(x0, dtype=float), n)

    L = circuit.inductance
    C = circuit.capacitance
    L_t = circuit.turbine_inductance
    R = circuit.friction_coefficient * np.abs(Q)

    idx = np.arange(n)
    A = np.zeros((size, size))

    # element flows: L dQ_i = h_{i-1} - h_i - R_i Q_i
    A[idx, idx] = -R / L
    A[idx, n + idx] = -1 / L
    A[idx[1:], n + idx[:-1]] = 1 / L[1:]

    # heads: C dh_i = Q_i - Q_{i+1}, with Q_{I+1} = Q_t
    A[n + idx, idx] = 1 / C
    A[n + idx[:-1], idx[1:]] = -1 / C[:-1]
    A[2 * n - 1, 2 * n] = -1 / C[-1]

    dH_dQ, dH_dy = turbine_partials(Q_t, y0, params)
    H_t0 = turbine_head(Q_t, y0, params)

    A[2 * n, 2 * n - 1] = 1 / L_t
    A[2 * n, 2 * n] = -dH_dQ / L_t

    B_y = np.zeros(size)
    B_y[2 * n] = -dH_dy / L_t

    B_z = np.zeros((size, 2))
    B_z[0, 0] = 1 / L[0]
    B_z[2 * n, 1] = 1 / L_t

    mu = -H_t0 + dH_dQ * Q_t + dH_dy * y0

    eigenvalues = linalg.eigvals(A)
    worst = float(np.max(eigenvalues.real))
    if worst >= 0:
        raise InfeasibleOperatingPoint(
            f"linearization at y={y0:.4f} is not asymptotically stable (max Re(lambda)={worst:.3g})"
        )

    return ContinuousStateSpace(
        A=A, B_y=B_y, B_z=B_z, mu=mu,
        x0=np.array(x0, dtype=float), y0=float(y0), element_count=n,
    )


def head_selector(element_count):
    """Output matrix stacking every C_i, i.e. picking h_1..h_I out of x."""
    C = np.zeros((element_count, 2 * element_count + 1))
    C[np.arange(element_count), element_count + np.arange(element_count)] = 1.0
    return C


def discretize(ss, dt, substeps=1, require_stable=True):
    """RK4 transition of the continuous model over ``dt`` with held inputs.

    ``substeps`` composes that many RK4 steps of size dt/substeps; one substep
    is the plain 4-term truncated exponential. ``require_stable=False`` admits
    marginally stable models such as pure integrators.

    Raises
    ------
    DiscretizationError
        If the discrete transition has spectral radius >= 1.
    """
    if dt <= 0:
        raise ParameterError(f"discretization step must be positive, got {dt}")
    substeps = int(substeps)
    if substeps < 1:
        raise ParameterError(f"substeps must be >= 1, got {substeps}")

    size = ss.A.shape[0]
    eye = np.eye(size)
    hA = ss.A * (dt / substeps)
    hA2 = hA @ hA
    hA3 = hA2 @ hA

    step = eye + hA + hA2 / 2 + hA3 / 6 + hA3 @ hA / 24
    quadrature = (dt / substeps) * (eye + hA / 2 + hA2 / 6 + hA3 / 24)

    transition = eye
    accumulated = np.zeros_like(eye)
    for _ in range(substeps):
        accumulated = accumulated + transition
        transition = step @ transition

    B_y = accumulated @ quadrature @ ss.B_y
    B_z = accumulated @ quadrature @ ss.B_z

    dss = DiscreteStateSpace(
        A=transition, B_y=B_y, B_z=B_z,
        C=head_selector(ss.element_count),
        dt=float(dt), mu=ss.mu, x0=ss.x0, y0=ss.y0,
        element_count=ss.element_count,
    )

    radius = dss.spectral_radius
    if require_stable and radius >= 1:
        raise DiscretizationError(
            f"discrete model unstable at dt={dt} s with {substeps} substep(s): spectral radius {radius:.4f}"
        )
    return dss


def impulse_decay(dss, steps):
    """Infinity norm of the vane impulse response on all heads, for k = 0..steps."""
    response = np.empty(steps + 1)
    v = dss.B_y.copy()
    for k in range(steps + 1):
        response[k] = np.max(np.abs(dss.C @ v))
        v = dss.A @ v
    return response


def settle_horizon(dss, decay_threshold=0.01, cap=200):
    """Steps after which a vane move no longer moves any head noticeably.

    Returns the smallest T >= 1 beyond which the impulse response stays below
    ``decay_threshold`` times its peak, limited to ``cap``.
    """
    response = impulse_decay(dss, cap)
    peak = response.max()
    if peak == 0:
        return 1

    above = np.flatnonzero(response >= decay_threshold * peak)
    return int(min(max(above[-1] + 1, 1), cap))


class Prediction(NamedTuple):
    """Stacked head predictions h = Phi x + Gamma y + Psi z over a horizon.

    Rows are grouped per step: rows (k-1)*I .. k*I-1 hold h_1..h_I at step k.
    """

    Phi: np.ndarray
    Gamma: np.ndarray
    Psi: np.ndarray


def prediction_matrices(dss, horizon):
    """Unroll the one-step model ``horizon`` times.

    The decision vector has horizon + 1 vane values; the last one reaches no
    predicted head, so its column of Gamma is zero.
    """
    n = dss.element_count
    size = dss.A.shape[0]

    Phi = np.zeros((horizon * n, size))
    Gamma = np.zeros((horizon * n, horizon + 1))
    Psi = np.zeros((horizon * n, dss.B_z.shape[1]))

    markov_y = []
    z_sum = np.zeros((n, dss.B_z.shape[1]))
    power = np.eye(size)
    for k in range(1, horizon + 1):
        markov_y.append(dss.C @ power @ dss.B_y)
        z_sum = z_sum + dss.C @ power @ dss.B_z
        power = dss.A @ power

        rows = slice((k - 1) * n, k * n)
        Phi[rows] = dss.C @ power
        Psi[rows] = z_sum
        for j in range(k):
            Gamma[rows, j] = markov_y[k - 1 - j]

    return Prediction(Phi=Phi, Gamma=Gamma, Psi=Psi)


def simulate_discrete(dss, x0, y_sequence, z):
    """States x(1..K) of the discrete model driven by ``y_sequence``."""
    x = np.array(x0, dtype=float)
    trajectory = []
    for y in y_sequence:
        x = dss.step(x, y, z)
        trajectory.append(x)
    return np.array(trajectory)
