from .config import ExperimentConfig, load_config
from .errors import PenstockError
from .fatigue import SNCurve, rainflow_cycles, damage_index, rdi
from .harness import ExperimentSpec, SimulationResult, compare_controllers, correlation, run_simulation
from .hydraulics import PlantParameters, build_circuit, steady_state, step_rk4
from .linearize import discretize, linearize
from .mpc import MpcController, build_qp, solve_qp
from .traces import FrequencyTrace, load_frequency_csv, synth_frequency

__all__ = [
    'ExperimentConfig', 'load_config', 'PenstockError',
    'SNCurve', 'rainflow_cycles', 'damage_index', 'rdi',
    'ExperimentSpec', 'SimulationResult', 'compare_controllers', 'correlation', 'run_simulation',
    'PlantParameters', 'build_circuit', 'steady_state', 'step_rk4',
    'discretize', 'linearize',
    'MpcController', 'build_qp', 'solve_qp',
    'FrequencyTrace', 'load_frequency_csv', 'synth_frequency',
]
