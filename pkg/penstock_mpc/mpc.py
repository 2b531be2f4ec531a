"""
Stress-informed model-predictive control of the guide vane.

Each step the plant is relinearized at the measured state, the governor
set-point is held constant over the horizon (persistence forecast), and a
condensed QP picks the vane trajectory closest to that set-point whose
predicted heads stay inside the fatigue band of every penstock element. Only
the first move is actuated.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import qp
from .errors import ConfigError, InfeasibleOperatingPoint, ParameterError, QpConstructionError
from .fatigue import stress_factor
from .linearize import discretize, linearize, prediction_matrices, settle_horizon

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MpcConfig:
    # look-ahead, s
    horizon: float = 2.0
    # model and actuation step, s
    step: float = 0.1
    slack_weight: float = 1e4
    tolerance: float = 1e-9
    max_iterations: int = 500
    backend: str = 'active-set'
    # derive the horizon from impulse-response decay, capped by ``horizon``
    auto_horizon: bool = False
    decay_threshold: float = 0.01
    relinearize: bool = True

    def __post_init__(self):
        if self.horizon < 0 or self.step <= 0:
            raise ParameterError("MPC horizon must be >= 0 and step > 0")
        if self.slack_weight <= 0:
            raise ParameterError("slack weight must be positive")
        if self.backend not in qp.backends:
            raise ParameterError(f"unknown QP backend {self.backend!r}")

    @property
    def horizon_steps(self):
        return int(round(self.horizon / self.step))


@dataclass
class HeadBounds:
    lower: np.ndarray
    upper: np.ndarray
    nominal: np.ndarray

    @property
    def half_band(self):
        return (self.upper - self.lower) / 2


def half_band(sn, params):
    """Head excursion whose stress range equals half the fatigue limit, m."""
    return sn.fatigue_limit / (2 * stress_factor(params))


def head_bounds(sn, params, nominal_head):
    """Head band around the nominal heads keeping every stress range under the fatigue limit."""
    band = half_band(sn, params)
    if not band > 0:
        raise ConfigError(f"fatigue band must be positive, got {band}")

    nominal = np.asarray(nominal_head, dtype=float)
    return HeadBounds(lower=nominal - band, upper=nominal + band, nominal=nominal)


@dataclass
class MpcProblem:
    qp: qp.QpProblem
    horizon: int
    element_count: int
    y_star: np.ndarray
    # predicted heads for an all-zero vane sequence, (horizon * I,)
    free_response: np.ndarray
    Gamma: np.ndarray
    bounds: HeadBounds

    def predicted_heads(self, y):
        """Heads at steps 1..T for a vane sequence, shape (T, I)."""
        heads = self.free_response + self.Gamma @ np.asarray(y, dtype=float)
        return heads.reshape(self.horizon, self.element_count)


@dataclass
class MpcSolution:
    y: np.ndarray
    first: float
    slack: np.ndarray
    # (step, element) pairs of head constraints active at the optimum
    active_heads: list
    iterations: int
    wall_time: float
    degraded: bool
    certificate: qp.KktCertificate
    objective: float

    @property
    def max_slack(self):
        return float(self.slack.max(initial=0.0))


def build_qp(dss, x_t, y_star_forecast, bounds, horizon, z, slack_weight=1e4, limits=(0.0, 1.0)):
    """Condensed QP over T+1 vane moves and T step slacks.

    Variables are v = [y(0..T), s(1..T)]; the objective is
    sum (y - y*)^2 + slack_weight * sum s^2 and every predicted head satisfies
    lower - s_k <= h_i(k) <= upper + s_k.
    """
    y_star = np.asarray(y_star_forecast, dtype=float)
    x_t = np.asarray(x_t, dtype=float)
    T = int(horizon)
    n = dss.element_count

    if T < 0:
        raise QpConstructionError(f"horizon must be >= 0, got {T}")
    if y_star.shape != (T + 1,):
        raise QpConstructionError(f"forecast needs {T + 1} values, got {y_star.size}")
    if x_t.shape != (dss.A.shape[0],):
        raise QpConstructionError(f"state has {x_t.size} entries, model expects {dss.A.shape[0]}")
    if slack_weight <= 0:
        raise QpConstructionError("slack weight must be positive for a positive definite Hessian")

    lower = np.broadcast_to(bounds.lower, (n,))
    upper = np.broadcast_to(bounds.upper, (n,))
    low, high = limits

    weights = np.concatenate([np.ones(T + 1), np.full(T, slack_weight)])
    H = np.diag(2 * weights)
    g = np.concatenate([-2 * y_star, np.zeros(T)])

    size = 2 * T + 1
    eye_y = np.eye(T + 1)
    box = np.vstack([
        np.hstack([eye_y, np.zeros((T + 1, T))]),
        np.hstack([-eye_y, np.zeros((T + 1, T))]),
        np.hstack([np.zeros((T, T + 1)), -np.eye(T)]),
    ])
    box_h = np.concatenate([np.full(T + 1, high), np.full(T + 1, -low), np.zeros(T)])

    if T == 0:
        free = np.empty(0)
        Gamma = np.zeros((0, 1))
        G, h = box, box_h
    else:
        prediction = prediction_matrices(dss, T)
        free = prediction.Phi @ x_t + prediction.Psi @ z
        Gamma = prediction.Gamma
        spread = np.kron(np.eye(T), np.ones((n, 1)))

        G = np.vstack([
            np.hstack([Gamma, -spread]),
            np.hstack([-Gamma, -spread]),
            box,
        ])
        h = np.concatenate([
            np.tile(upper, T) - free,
            free - np.tile(lower, T),
            box_h,
        ])

    problem = qp.QpProblem(H=H, g=g, G=G, h=h)
    if problem.size != size:
        raise QpConstructionError("internal variable count mismatch")

    return MpcProblem(
        qp=problem, horizon=T, element_count=n, y_star=y_star,
        free_response=free, Gamma=Gamma, bounds=bounds,
    )


def solve_qp(problem, tol=1e-9, max_iter=500, backend='active-set'):
    T = problem.horizon
    n = problem.element_count
    result = qp.solve(problem.qp, tol=tol, max_iter=max_iter, backend=backend)

    y = np.clip(result.x[:T + 1], 0.0, 1.0)
    slack = result.x[T + 1:]

    active = []
    for row in result.active:
        if row < 2 * T * n:
            step, element = divmod(int(row) % (T * n), n)
            active.append((step + 1, element))

    return MpcSolution(
        y=y,
        first=float(y[0]),
        slack=slack,
        active_heads=active,
        iterations=result.iterations,
        wall_time=result.wall_time,
        degraded=result.degraded,
        certificate=result.certificate,
        objective=result.objective,
    )


@dataclass
class SolverStats:
    time: float
    horizon: int
    iterations: int
    wall_time: float
    max_slack: float
    active_heads: int
    degraded: bool


@dataclass
class MpcController:
    """Receding-horizon controller bound to one plant and one fatigue band."""

    circuit: object
    params: object
    bounds: HeadBounds
    config: MpcConfig = field(default_factory=MpcConfig)
    # plant integration step the discrete model must reproduce
    plant_step: float = 0.005
    stats: list = field(default_factory=list)
    model: object = None

    @property
    def substeps(self):
        return max(1, math.ceil(self.config.step / self.plant_step - 1e-9))

    def update_model(self, x_t, y_lin):
        """Relinearize and discretize at the measured state; keeps the last model on failure."""
        try:
            ss = linearize(self.circuit, x_t, y_lin, self.params)
            self.model = discretize(ss, self.config.step, substeps=self.substeps)
        except InfeasibleOperatingPoint as error:
            if self.model is None:
                raise
            logger.warning("relinearization rejected (%s); keeping previous model", error)
        return self.model

    def horizon_for(self, dss):
        cap = self.config.horizon_steps
        if self.config.auto_horizon and cap > 0:
            return settle_horizon(dss, self.config.decay_threshold, cap=cap)
        return cap

    def mpc_step(self, x_t, y_star_t, y_applied, time=0.0):
        """Return the vane opening to actuate now.

        ``y_applied`` is the opening currently on the plant and serves as the
        linearization point.
        """
        T = self.config.horizon_steps
        if T == 0:
            return float(np.clip(y_star_t, 0.0, 1.0))

        if self.config.relinearize or self.model is None:
            self.update_model(x_t, max(y_applied, 1e-3))
        dss = self.model
        T = self.horizon_for(dss)

        z = dss.inputs(self.params.upstream_head, self.params.downstream_head)
        problem = build_qp(
            dss, x_t, np.full(T + 1, y_star_t), self.bounds, T, z,
            slack_weight=self.config.slack_weight,
        )
        solution = solve_qp(
            problem, tol=self.config.tolerance,
            max_iter=self.config.max_iterations, backend=self.config.backend,
        )

        if solution.degraded:
            logger.warning("t=%.2f s: degraded QP solution actuated (KKT %s)", time, solution.certificate)
        if solution.max_slack > 1e-6:
            logger.debug("t=%.2f s: head band softened by %.4f m", time, solution.max_slack)

        self.stats.append(SolverStats(
            time=time,
            horizon=T,
            iterations=solution.iterations,
            wall_time=solution.wall_time,
            max_slack=solution.max_slack,
            active_heads=len(solution.active_heads),
            degraded=solution.degraded,
        ))
        return solution.first
