import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

project_root = Path(__file__).resolve().parent.parent
# report_figures and combined_figures live beside the package
sys.path.insert(0, str(project_root))

from penstock_mpc.config import ExperimentConfig, override  # noqa: E402
from penstock_mpc.hydraulics import PlantParameters, build_circuit, steady_state  # noqa: E402
from penstock_mpc.traces import FrequencyTrace  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: closed-loop runs of a minute of plant time or more')


@pytest.fixture
def params():
    return PlantParameters()


@pytest.fixture
def frictionless():
    return PlantParameters(darcy_friction=0.0)


@pytest.fixture
def circuit(params):
    return build_circuit(params, params.nominal_discharge)


@pytest.fixture
def x0(circuit, params):
    return steady_state(circuit, 0.9, params.upstream_head, params.downstream_head, params)


@pytest.fixture
def short_config():
    # ten seconds, metrics over the whole run
    config = ExperimentConfig()
    config = override(config, 'simulation', duration=10.0, warmup=0.0)
    return config


@pytest.fixture
def constant_trace():
    return FrequencyTrace(period=0.1, samples=[50.0] * 1200, source='constant')


@pytest.fixture
def stepped_trace():
    # -100 mHz at 2 s
    samples = [50.0] * 20 + [49.9] * 580
    return FrequencyTrace(period=0.1, samples=samples, source='step')


def enumerate_optimum(problem):
    """Exhaustive active-set search, smallest sets first.

    The first set whose equality-constrained solution is feasible with
    non-negative multipliers holds the unique optimum of a strictly convex QP.
    """
    n, m = problem.size, problem.h.size
    for k in range(min(n, m) + 1):
        for subset in itertools.combinations(range(m), k):
            rows = list(subset)
            G_w = problem.G[rows]
            kkt = np.block([[problem.H, G_w.T], [G_w, np.zeros((k, k))]])
            rhs = np.concatenate([-problem.g, problem.h[rows]])
            try:
                solution = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            x, lam = solution[:n], solution[n:]
            if np.all(problem.G @ x <= problem.h + 1e-9) and np.all(lam >= -1e-9):
                return x
    return None


@pytest.fixture
def qp_oracle():
    return enumerate_optimum
