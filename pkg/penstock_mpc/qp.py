"""
Dense strictly convex quadratic programs

    minimize    1/2 x' H x + g' x
    subject to  G x <= h

solved by a dual active-set method, with an optional quadprog backend.
Both return a KKT certificate so callers can judge the answer without
trusting the algorithm.
"""
import logging
import time
from dataclasses import dataclass
from functools import wraps

import numpy as np
from scipy import linalg

from .errors import ParameterError, QpConstructionError

logger = logging.getLogger(__name__)


@dataclass
class QpProblem:
    H: np.ndarray
    g: np.ndarray
    G: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        n = self.g.size
        if self.H.shape != (n, n):
            raise QpConstructionError(f"Hessian shape {self.H.shape} does not match {n} variables")
        if self.G.ndim != 2 or self.G.shape[1] != n:
            raise QpConstructionError(f"constraint matrix shape {self.G.shape} does not match {n} variables")
        if self.h.shape != (self.G.shape[0],):
            raise QpConstructionError(f"constraint bound shape {self.h.shape} does not match {self.G.shape[0]} rows")

    @property
    def size(self):
        return self.g.size

    def objective(self, x):
        return float(0.5 * x @ self.H @ x + self.g @ x)


@dataclass
class KktCertificate:
    primal: float
    stationarity: float
    dual: float
    complementarity: float

    def satisfied(self, tol):
        return max(self.primal, self.stationarity, self.dual, self.complementarity) <= tol


@dataclass
class QpSolution:
    x: np.ndarray
    multipliers: np.ndarray
    active: np.ndarray
    iterations: int
    objective: float
    certificate: KktCertificate
    degraded: bool = False
    wall_time: float = 0.0
    backend: str = 'active-set'


def kkt_certificate(problem, x, multipliers):
    residual = problem.G @ x - problem.h
    return KktCertificate(
        primal=float(max(residual.max(initial=0.0), 0.0)),
        stationarity=float(np.max(np.abs(problem.H @ x + problem.g + problem.G.T @ multipliers))),
        dual=float(max(-multipliers.min(initial=0.0), 0.0)),
        complementarity=float(np.max(np.abs(multipliers * residual), initial=0.0)),
    )


def timed(func):
    """Stamp the wall-clock time of a solve onto the returned solution."""

    @wraps(func)
    def run_timed(*args, **kwargs):
        start = time.perf_counter()
        solution = func(*args, **kwargs)
        solution.wall_time = time.perf_counter() - start
        return solution

    return run_timed


def _step_directions(H_solve, G_w, normal):
    """Primal step z, dual step r and H^-1 n for adding constraint normal n.

    The working-set normals are the columns of -G_w'.
    """
    Hn = H_solve(normal)
    if G_w.shape[0] == 0:
        return Hn, np.empty(0), Hn
    N = -G_w.T
    HN = H_solve(N)
    M = N.T @ HN
    rhs = N.T @ Hn
    try:
        r = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        r = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return Hn - HN @ r, r, Hn


@timed
def solve_active_set(problem, tol=1e-9, max_iter=500):
    """Dual active-set method of Goldfarb and Idnani.

    Starts from the unconstrained minimum and adds the most violated
    constraint each pass, dropping a working constraint whenever its
    multiplier would turn negative. Every iterate is optimal for the
    constraints taken so far, so a problem with a handful of binding rows
    among hundreds finishes in a handful of passes. Ties go to the lowest
    index, so identical inputs always take the identical path.

    Raises
    ------
    ParameterError
        If the constraints are inconsistent.
    QpConstructionError
        If H is not positive definite.
    """
    H, g, G, h = problem.H, problem.g, problem.G, problem.h
    m = h.size
    try:
        factor = linalg.cho_factor(H)
    except linalg.LinAlgError as error:
        raise QpConstructionError("Hessian is not positive definite") from error

    def H_solve(b):
        return linalg.cho_solve(factor, b)

    x = H_solve(-g)
    working = []
    u = np.empty(0)
    margin = tol * (1.0 + np.abs(h))
    degraded = False
    iterations = 0

    while not degraded:
        slack = h - G @ x
        violated = slack < -margin
        violated[working] = False
        if not violated.any():
            break
        p = int(np.argmin(np.where(violated, slack, np.inf)))
        normal = -G[p]
        u_plus = np.append(u, 0.0)

        while True:
            if iterations >= max_iter:
                degraded = True
                u = u_plus[:-1]
                break
            iterations += 1

            z, r, Hn = _step_directions(H_solve, G[working], normal)
            partial, leaving = np.inf, None
            blocking = r > tol
            if blocking.any():
                ratios = np.full(r.size, np.inf)
                ratios[blocking] = u_plus[:-1][blocking] / r[blocking]
                leaving = int(np.argmin(ratios))
                partial = ratios[leaving]

            curvature = z @ normal
            full = np.inf
            if curvature > 1e-10 * (normal @ Hn):
                full = (G[p] @ x - h[p]) / curvature

            step = min(partial, full)
            if not np.isfinite(step):
                raise ParameterError("QP constraints are inconsistent")

            # a dependent normal only shifts multipliers
            if np.isfinite(full):
                x = x + step * z
            u_plus[:-1] -= step * r
            u_plus[-1] += step

            if full <= partial:
                working.append(p)
                u = u_plus
                break
            working.pop(leaving)
            u_plus = np.delete(u_plus, leaving)

    if degraded:
        logger.warning("active-set QP hit the iteration cap (%d); returning last iterate", max_iter)

    multipliers = np.zeros(m)
    if working:
        multipliers[working] = u

    certificate = kkt_certificate(problem, x, multipliers)
    return QpSolution(
        x=x,
        multipliers=multipliers,
        active=np.array(sorted(working), dtype=int),
        iterations=iterations,
        objective=problem.objective(x),
        certificate=certificate,
        degraded=degraded,
    )


@timed
def solve_quadprog(problem, tol=1e-9, max_iter=None):
    """Goldfarb-Idnani dual method through the quadprog package."""
    import quadprog

    x, objective, _, iterations, multipliers, active = quadprog.solve_qp(
        np.array(problem.H, dtype=float), -problem.g.astype(float),
        np.ascontiguousarray(-problem.G.T, dtype=float), -problem.h.astype(float), 0,
    )
    multipliers = np.asarray(multipliers, dtype=float)
    certificate = kkt_certificate(problem, x, multipliers)
    return QpSolution(
        x=x,
        multipliers=multipliers,
        active=np.asarray(active[active > 0] - 1, dtype=int),
        iterations=int(iterations[0]),
        objective=problem.objective(x),
        certificate=certificate,
        degraded=not certificate.satisfied(max(tol, 1e-6)),
        backend='quadprog',
    )


backends = {
    'active-set': solve_active_set,
    'quadprog': solve_quadprog,
}


def solve(problem, tol=1e-9, max_iter=500, backend='active-set'):
    try:
        solver = backends[backend]
    except KeyError:
        raise ParameterError(f"unknown QP backend {backend!r}; choose from {sorted(backends)}") from None
    return solver(problem, tol=tol, max_iter=max_iter)
