"""
Closed-loop experiments.

One experiment reads the grid frequency, lets the governor compute its
set-point, optionally passes it through the MPC, integrates the nonlinear
plant and generator, and finally scores penstock fatigue on the recorded
nonlinear heads. Cadences nest: the plant steps every ``dt``, the governor
and the MPC at multiples of it, and traces are recorded on their own grid.
"""
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import stats

from . import benchmarks
from .config import ExperimentConfig, override, resolved
from .electromech import (
    GovernorState, build_generator, generator_step, governor_step, grid_speed, tune_pi,
)
from .errors import (
    ComparisonError, ConfigError, InstabilityError, LossOfSynchronism, TuningError, UndefinedMetricError,
)
from .fatigue import element_damage, rdi, stress_matrix
from .hydraulics import (
    HydraulicInputs, build_circuit, split_state, step_rk4, steady_state, turbine_head, turbine_power,
    turbine_torque,
)
from .linearize import discretize, linearize, simulate_discrete
from .mpc import MpcController, head_bounds
from .traces import FrequencyTrace, load_frequency_csv, step_trace, synth_frequency

logger = logging.getLogger(__name__)

CONTROLLERS = ('base', 'mpc', 'lpf', 'fatigue_filter')

STATS_COLUMNS = ['time', 'horizon', 'iterations', 'wall_time', 'max_slack', 'active_heads', 'degraded']


def head_columns(count):
    return [f'h_{i}' for i in range(1, count + 1)]


def stress_columns(count):
    return [f'sigma_{i}' for i in range(1, count + 1)]


@dataclass
class ExperimentSpec:
    """One experiment: a configuration, the controller to run and its frequency input.

    Every setting that shapes the run lives in ``config``; ``trace`` only
    saves re-reading or re-synthesizing the frequency input.
    """

    config: ExperimentConfig
    controller: str | None = None
    trace: FrequencyTrace | None = None
    label: str | None = None

    def __post_init__(self):
        if self.controller is None:
            self.controller = self.config.experiment.controller
        if self.controller not in CONTROLLERS:
            raise ConfigError(f"unknown controller {self.controller!r}; choose from {', '.join(CONTROLLERS)}")
        if self.label is None:
            self.label = self.controller
        if self.trace is None:
            self.trace = load_trace(self.config)

        duration = self.config.simulation.duration
        if self.trace.duration + self.trace.period < duration - 1e-9:
            raise ConfigError(
                f"frequency trace covers {self.trace.duration:.1f} s, experiment needs {duration:.1f} s"
            )

    @property
    def duration(self):
        return self.config.simulation.duration


def load_trace(config):
    """Frequency input named by ``[experiment] frequency_source``."""
    source = config.experiment.frequency_source
    period = config.experiment.frequency_period
    if source == 'synthetic':
        return synth_frequency(config.frequency, config.simulation.duration, period)

    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"frequency trace not found: {path}")
    return load_frequency_csv(path, expected_period=period)


def provenance_hash(config, trace, controller):
    """sha256 over the resolved configuration, the controller and the frequency samples."""
    digest = hashlib.sha256()
    digest.update(json.dumps(resolved(config), sort_keys=True).encode())
    digest.update(controller.encode())
    digest.update(np.float64(trace.period).tobytes())
    digest.update(np.ascontiguousarray(trace.samples, dtype=np.float64).tobytes())
    return digest.hexdigest()


@dataclass
class SimulationResult:
    label: str
    controller: str
    config: ExperimentConfig
    # recorded traces on one time grid, see ``trace_columns``
    traces: pd.DataFrame
    damage: np.ndarray
    cc: float
    rdi: np.ndarray | None = None
    solver_stats: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=STATS_COLUMNS))
    status: str = 'ok'
    message: str = ''
    trace_source: str = ''
    provenance: str = ''

    @property
    def aborted(self):
        return self.status == 'aborted'

    @property
    def max_rdi(self):
        return float(np.max(self.rdi)) if self.rdi is not None else math.nan

    @property
    def worst_element(self):
        """1-based index of the most damaged element."""
        return int(np.argmax(self.damage)) + 1 if self.damage.size else None

    @property
    def element_count(self):
        return self.damage.size

    def heads(self):
        return self.traces[head_columns(self.element_count)].to_numpy()

    def metrics(self):
        def number(value):
            return None if value is None or not math.isfinite(value) else float(value)

        solve = self.solver_stats['wall_time'].to_numpy(dtype=float) if len(self.solver_stats) else np.empty(0)
        return {
            'label': self.label,
            'controller': self.controller,
            'status': self.status,
            'message': self.message,
            'cc': number(self.cc),
            'max_rdi': number(self.max_rdi),
            'worst_element': self.worst_element,
            'damage': [float(d) for d in self.damage],
            'rdi': None if self.rdi is None else [float(r) for r in self.rdi],
            'warmup': self.config.simulation.warmup,
            'duration': self.config.simulation.duration,
            'mpc_steps': int(solve.size),
            'degraded_steps': int(self.solver_stats['degraded'].astype(bool).sum()) if len(self.solver_stats) else 0,
            'trace_source': self.trace_source,
            'provenance': self.provenance,
        }


def correlation(y, y_star):
    """Pearson correlation between the actuated opening and the set-point."""
    y = np.asarray(y, dtype=float)
    y_star = np.asarray(y_star, dtype=float)
    if y.shape != y_star.shape or y.size < 2:
        raise UndefinedMetricError(f"CC needs two equal traces of length >= 2, got {y.size} and {y_star.size}")
    if np.ptp(y) == 0 or np.ptp(y_star) == 0:
        raise UndefinedMetricError("CC undefined: a trace has zero variance")
    return float(stats.pearsonr(y, y_star)[0])


def trace_metrics(traces, params, sn, warmup):
    """(damage per element, CC) from recorded traces past the warm-up.

    CC compares the actuated opening with ``y_star_ref`` when the traces carry
    one, otherwise with the run's own set-point; it is nan when undefined.
    """
    window = traces[traces['time_s'] >= warmup - 1e-9]
    heads = window[head_columns(params.element_count)].to_numpy(dtype=float)
    if len(window) >= 2:
        damage = element_damage(heads, params, sn)
    else:
        damage = np.zeros(params.element_count)

    reference = 'y_star_ref' if 'y_star_ref' in traces else 'y_star'
    try:
        cc = correlation(window['y_applied'].to_numpy(), window[reference].to_numpy())
    except UndefinedMetricError as error:
        logger.info("%s", error)
        cc = math.nan
    return damage, cc


def _ratio(period, dt, name):
    ratio = period / dt
    steps = int(round(ratio))
    if steps < 1 or abs(ratio - steps) > 1e-6:
        raise ConfigError(f"{name} {period} s is not a whole multiple of the plant step {dt} s")
    return steps


def _power_gain(circuit, params, y0, delta=1e-3):
    """Slope of steady per-unit power with respect to the opening."""

    def power(y):
        x = steady_state(circuit, y, params.upstream_head, params.downstream_head, params)
        Q_t = x[-1]
        return turbine_power(Q_t, turbine_head(Q_t, y, params), params) / params.rated_power

    low, high = max(y0 - delta, 1e-3), min(y0 + delta, 1.0)
    return (power(high) - power(low)) / (high - low)


@dataclass
class PlantSetup:
    circuit: object
    x0: np.ndarray
    y0: float
    mechanical_torque: float
    power: float


def prepare_plant(config):
    """Circuit and steady state at the configured initial opening."""
    params = config.plant
    y0 = config.simulation.initial_opening
    circuit = build_circuit(params, params.nominal_discharge)
    x0 = steady_state(circuit, y0, params.upstream_head, params.downstream_head, params)

    omega0 = grid_speed(params.grid_frequency_nominal, params.pole_pairs)
    Q_t = x0[-1]
    H_t = turbine_head(Q_t, y0, params)
    T_m = turbine_torque(Q_t, H_t, omega0, params)
    return PlantSetup(circuit=circuit, x0=x0, y0=y0, mechanical_torque=T_m, power=T_m * omega0)


def governor_input(spec, setup):
    """Frequency signal the governor reads, as a callable of time, and its trace for recording."""
    config = spec.config
    trace = spec.trace

    if spec.controller == 'fatigue_filter':
        step = config.fatigue_filter.step
        gain = _power_gain(setup.circuit, config.plant, setup.y0)
        model = benchmarks.build_fatigue_filter(
            setup.circuit, config.plant, setup.x0, setup.y0, config.governor, config.sn_curve,
            config=config.fatigue_filter, plant_step=config.simulation.dt, power_gain=gain,
        )
        resampled = trace.resample(step)
        trace = FrequencyTrace(period=step, samples=model.preprocess(resampled.samples),
                               source=f'fatigue-filter({trace.source})')
    return trace


def _sample(trace, t):
    index = min(int(t / trace.period + 1e-9), len(trace) - 1)
    return trace.samples[index]


def run_simulation(spec, reference=None, base_damage=None):
    """Run one closed-loop experiment.

    Parameters
    ----------
    spec : ExperimentSpec
    reference : array_like, optional
        Set-point trace on the record grid that CC is computed against,
        typically the base run's ``y_star``.
    base_damage : array_like, optional
        Per-element damage of the base run; anchors the RDI. A base run
        without it is normalized by its own worst element.

    Plant divergence and loss of synchronism end the run early; the result
    then has status ``'aborted'`` and keeps the traces recorded so far.
    """
    config = spec.config
    params = config.plant
    sim = config.simulation
    n = params.element_count

    dt = sim.dt
    governor_every = _ratio(sim.governor_period, dt, 'governor period')
    record_every = _ratio(sim.record_period, dt, 'record period')
    mpc_every = _ratio(config.mpc.step, dt, 'MPC step') if spec.controller == 'mpc' else 1
    steps = int(round(sim.duration / dt))

    logger.info("%s: %s controller, %.0f s at dt=%g s", spec.label, spec.controller, sim.duration, dt)
    setup = prepare_plant(config)
    circuit = setup.circuit
    x = setup.x0.copy()

    generator = build_generator(params, config.generator, setup.mechanical_torque, f_grid=spec.trace.samples[0])
    governor = GovernorState.initial(config.governor, setup.y0)
    P_ref = setup.power / params.rated_power
    P_e = P_ref

    controller = None
    if spec.controller == 'mpc':
        _, h0, _ = split_state(setup.x0, n)
        bounds = head_bounds(config.sn_curve, params, h0)
        controller = MpcController(circuit, params, bounds, config=config.mpc, plant_step=dt)

    governor_trace = governor_input(spec, setup)
    lpf = benchmarks.LowPassFilter(config.lpf.cutoff, dt=sim.governor_period) if spec.controller == 'lpf' else None

    y_star = setup.y0
    y_applied = setup.y0
    f_governor = spec.trace.samples[0]
    records = []
    status, message = 'ok', ''

    started = time.perf_counter()
    try:
        for k in range(steps):
            t = k * dt
            f_grid = _sample(spec.trace, t)

            if k % governor_every == 0:
                f_governor = _sample(governor_trace, t)
                if lpf is not None:
                    f_governor = benchmarks.lpf_step(f_governor, sim.governor_period, lpf)
                governor = governor_step(governor, f_governor, P_ref, sim.governor_period, p_feedback=P_e)
                y_star = governor.y_star
                if controller is None:
                    y_applied = y_star

            if controller is not None and k % mpc_every == 0:
                y_applied = controller.mpc_step(x, y_star, y_applied, time=t)

            if k % record_every == 0:
                _, h, _ = split_state(x, n)
                records.append((t, f_grid, f_governor, y_star, y_applied, generator.omega, P_e, *h))

            u = HydraulicInputs(y_applied, params.upstream_head, params.downstream_head, generator.omega)
            x = step_rk4(x, u, circuit, dt)
            Q_t = x[-1]
            T_m = turbine_torque(Q_t, turbine_head(Q_t, y_applied, params), generator.omega, params)
            generator, T_e = generator_step(generator, T_m, f_grid, dt)
            P_e = T_e * generator.omega / params.rated_power

    except (InstabilityError, LossOfSynchronism) as error:
        status, message = 'aborted', str(error)
        logger.error("%s aborted at t=%.3f s: %s", spec.label, k * dt, error)

    logger.info("%s: simulated in %.1f s wall time", spec.label, time.perf_counter() - started)

    columns = ['time_s', 'f_grid', 'f_governor', 'y_star', 'y_applied', 'omega', 'power', *head_columns(n)]
    traces = pd.DataFrame.from_records(records, columns=columns)
    stress = stress_matrix(traces[head_columns(n)].to_numpy(dtype=float), params) if len(traces) else np.empty((0, n))
    traces = pd.concat([traces, pd.DataFrame(stress, columns=stress_columns(n))], axis=1)

    if reference is not None:
        reference = np.asarray(reference, dtype=float)
        if reference.size < len(traces):
            raise ComparisonError(f"reference set-point has {reference.size} samples, run recorded {len(traces)}")
        traces['y_star_ref'] = reference[:len(traces)]

    damage, cc = trace_metrics(traces, params, config.sn_curve, sim.warmup)

    relative = None
    if base_damage is not None:
        relative = rdi(damage, base_damage)
    elif spec.controller == 'base' and damage.max(initial=0.0) > 0:
        relative = rdi(damage, damage)

    solver_stats = pd.DataFrame([asdict(s) for s in controller.stats], columns=STATS_COLUMNS) \
        if controller is not None else pd.DataFrame(columns=STATS_COLUMNS)

    result = SimulationResult(
        label=spec.label,
        controller=spec.controller,
        config=config,
        traces=traces,
        damage=damage,
        cc=cc,
        rdi=relative,
        solver_stats=solver_stats,
        status=status,
        message=message,
        trace_source=spec.trace.source,
        provenance=provenance_hash(config, spec.trace, spec.controller),
    )
    logger.info("%s: CC=%.4f max D=%.4g (element %s) max RDI=%.4f",
                spec.label, cc, damage.max(initial=0.0), result.worst_element, result.max_rdi)
    return result


def sweep(specs, workers=1, reference=None, base_damage=None):
    """Run independent experiments, in parallel when ``workers`` > 1; results keep spec order."""
    run = partial(run_simulation, reference=reference, base_damage=base_damage)
    if workers <= 1 or len(specs) <= 1:
        return [run(spec) for spec in specs]

    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(run, specs))


@dataclass
class Comparison:
    table: pd.DataFrame
    results: list

    def result(self, label):
        for result in self.results:
            if result.label == label:
                return result
        raise KeyError(label)


def _check_comparable(specs):
    first = specs[0]
    for spec in specs[1:]:
        if spec.config.plant != first.config.plant:
            raise ComparisonError(f"{spec.label}: plant differs from {first.label}")
        if spec.config.simulation != first.config.simulation:
            raise ComparisonError(f"{spec.label}: simulation settings differ from {first.label}")
        if spec.trace.period != first.trace.period or not np.array_equal(spec.trace.samples, first.trace.samples):
            raise ComparisonError(f"{spec.label}: frequency trace differs from {first.label}")


def comparison_table(results):
    rows = []
    for result in results:
        solve = result.solver_stats['wall_time'].to_numpy(dtype=float) * 1e3 if len(result.solver_stats) else None
        row = {
            'controller': result.controller,
            'label': result.label,
            'status': result.status,
            'cc': result.cc,
            'max_rdi': result.max_rdi,
            'worst_element': result.worst_element,
            'mean_solve_ms': float(np.mean(solve)) if solve is not None else math.nan,
            'p99_solve_ms': float(np.percentile(solve, 99)) if solve is not None else math.nan,
        }
        relative = result.rdi if result.rdi is not None else np.full(result.element_count, math.nan)
        row.update({f'rdi_{i}': float(r) for i, r in enumerate(relative, start=1)})
        rows.append(row)
    return pd.DataFrame(rows)


def compare_controllers(specs, workers=1):
    """Run a base experiment and score every other controller against it.

    All specs must share plant, simulation settings and frequency trace, and
    exactly one must be the base case. CC is taken against the base run's
    set-point; RDI is normalized by the base run's worst element.
    """
    if not specs:
        raise ComparisonError("nothing to compare")
    _check_comparable(specs)

    bases = [spec for spec in specs if spec.controller == 'base']
    if len(bases) != 1:
        raise ComparisonError(f"comparison needs exactly one base run, got {len(bases)}")

    labels = [spec.label for spec in specs]
    if len(set(labels)) != len(labels):
        raise ComparisonError(f"experiment labels must be unique, got {labels}")

    base = run_simulation(bases[0])
    if base.aborted:
        raise ComparisonError(f"base run aborted: {base.message}")
    if not base.damage.max(initial=0.0) > 0:
        raise UndefinedMetricError("base run accumulated no damage; RDI is undefined")

    reference = base.traces['y_star'].to_numpy()
    base.traces['y_star_ref'] = reference

    others = [spec for spec in specs if spec is not bases[0]]
    results = dict(zip(
        [spec.label for spec in others],
        sweep(others, workers=workers, reference=reference, base_damage=base.damage),
    ))
    results[base.label] = base
    ordered = [results[spec.label] for spec in specs]

    return Comparison(table=comparison_table(ordered), results=ordered)


def tune_lpf(config, target_cc, trace=None, reference=None, base_damage=None):
    """Low-pass cutoff whose run matches ``target_cc``."""

    def runner(cutoff):
        spec = ExperimentSpec(override(config, 'lpf', cutoff=float(cutoff)), controller='lpf',
                              trace=trace, label=f'lpf@{cutoff:.4g}')
        return run_simulation(spec, reference=reference, base_damage=base_damage).cc

    return benchmarks.tune_lpf_cutoff(target_cc, runner, config.lpf)


def tune_trim(config, target_rdi, base_damage, trace=None, reference=None):
    """Fatigue-filter trim scale whose run matches ``target_rdi``."""

    def runner(scale):
        spec = ExperimentSpec(override(config, 'fatigue_filter', trim_scale=float(scale)),
                              controller='fatigue_filter', trace=trace, label=f'ff@{scale:.4g}')
        return run_simulation(spec, reference=reference, base_damage=base_damage).max_rdi

    return benchmarks.tune_fatigue_filter(target_rdi, runner, config.fatigue_filter)


def reproduce_comparison(config, trace=None, workers=1):
    """Base and MPC runs, then both benchmarks tuned to the MPC's score.

    The low-pass cutoff is tuned to the MPC's CC, the fatigue filter to its
    max RDI; a tuner that fails keeps its closest candidate.
    """
    trace = trace if trace is not None else load_trace(config)
    base_spec = ExperimentSpec(config, controller='base', trace=trace)
    mpc_spec = ExperimentSpec(config, controller='mpc', trace=trace)
    first = compare_controllers([base_spec, mpc_spec], workers=workers)
    base, mpc = first.results
    reference = base.traces['y_star_ref'].to_numpy()

    try:
        cutoff = tune_lpf(config, mpc.cc, trace, reference, base.damage)
    except TuningError as error:
        cutoff = error.best[0] if error.best else config.lpf.cutoff
        logger.warning("%s; keeping cutoff %.4g Hz", error, cutoff)
    try:
        scale = tune_trim(config, mpc.max_rdi, base.damage, trace, reference)
    except TuningError as error:
        scale = error.best[0] if error.best else config.fatigue_filter.trim_scale
        logger.warning("%s; keeping trim scale %.4g", error, scale)

    benchmark_specs = [
        ExperimentSpec(override(config, 'lpf', cutoff=cutoff), controller='lpf', trace=trace),
        ExperimentSpec(override(config, 'fatigue_filter', trim_scale=scale), controller='fatigue_filter',
                       trace=trace),
    ]
    results = [base, mpc, *sweep(benchmark_specs, workers=workers, reference=reference,
                                 base_damage=base.damage)]
    return Comparison(table=comparison_table(results), results=results)


@dataclass
class FidelityReport:
    # per-element mean absolute head error over mean absolute head
    relative_mae: np.ndarray
    # per-element mean absolute head error over the largest head excursion
    excursion_mae: np.ndarray
    max_error: float
    linear_time: float
    nonlinear_time: float
    frame: pd.DataFrame


def linear_fidelity(config, amplitude=0.02, period=2.0, duration=20.0):
    """Drive the nonlinear plant and the discrete linear model with the same vane square wave."""
    params = config.plant
    sim = config.simulation
    n = params.element_count
    setup = prepare_plant(config)

    step = config.mpc.step
    substeps = _ratio(step, sim.dt, 'MPC step')
    count = int(round(duration / step))
    times = step * np.arange(count)
    y = np.clip(setup.y0 + amplitude * np.where(np.sin(2 * math.pi * times / period) >= 0, 1.0, -1.0), 1e-3, 1.0)

    started = time.perf_counter()
    dss = discretize(linearize(setup.circuit, setup.x0, setup.y0, params), step, substeps=substeps)
    z = dss.inputs(params.upstream_head, params.downstream_head)
    linear = dss.heads(simulate_discrete(dss, setup.x0, y, z).T).T
    linear_time = time.perf_counter() - started

    started = time.perf_counter()
    x = setup.x0.copy()
    nonlinear = np.empty((count, n))
    for k, y_k in enumerate(y):
        u = HydraulicInputs(float(y_k), params.upstream_head, params.downstream_head, params.nominal_speed)
        for _ in range(substeps):
            x = step_rk4(x, u, setup.circuit, sim.dt)
        nonlinear[k] = split_state(x, n)[1]
    nonlinear_time = time.perf_counter() - started

    error = np.abs(linear - nonlinear)
    excursion = np.max(np.abs(nonlinear - split_state(setup.x0, n)[1]), axis=0)
    report = FidelityReport(
        relative_mae=error.mean(axis=0) / np.abs(nonlinear).mean(axis=0),
        excursion_mae=error.mean(axis=0) / np.where(excursion > 0, excursion, np.nan),
        max_error=float(error.max()),
        linear_time=linear_time,
        nonlinear_time=nonlinear_time,
        frame=pd.DataFrame(
            np.column_stack([times + step, y, nonlinear, linear]),
            columns=['time_s', 'y', *head_columns(n), *[f'linear_{c}' for c in head_columns(n)]],
        ),
    )
    logger.info("linear fidelity: worst relative MAE %.3g, max error %.3g m",
                report.relative_mae.max(), report.max_error)
    return report


@dataclass
class StepResponse:
    expected_change: float
    settled_change: float
    traces: pd.DataFrame

    @property
    def relative_error(self):
        return abs(self.settled_change - self.expected_change) / abs(self.expected_change)


def governor_step_response(config, step=-0.1, at=10.0, duration=90.0, initial_opening=0.75, settle_window=10.0):
    """Settled power change after a frequency step, next to the droop characteristic's prediction."""
    config = override(config, 'simulation', duration=duration, warmup=0.0, initial_opening=initial_opening)
    governor = config.governor
    trace = step_trace(duration, config.experiment.frequency_period, step, at=at,
                       nominal=governor.nominal_frequency)
    result = run_simulation(ExperimentSpec(config, controller='base', trace=trace, label='governor-step'))
    if result.aborted:
        raise InstabilityError(f"governor step response aborted: {result.message}")

    traces = result.traces
    before = traces.loc[traces['time_s'] < at, 'power'].iloc[-1]
    after = traces.loc[traces['time_s'] >= duration - settle_window, 'power'].mean()
    expected = -step / governor.nominal_frequency / governor.permanent_droop
    response = StepResponse(expected_change=expected, settled_change=float(after - before), traces=traces)
    logger.info("governor step %+g Hz: power %+.4f pu (droop predicts %+.4f pu)",
                step, response.settled_change, expected)
    return response


def governor_loop(config, step=-0.1, duration=60.0):
    """``run_loop(kp)`` for Ziegler-Nichols tuning: power response of the P-only loop to a frequency step."""
    config = override(config, 'simulation', duration=duration, warmup=0.0)
    trace = step_trace(duration, config.experiment.frequency_period, step, at=1.0,
                       nominal=config.governor.nominal_frequency)

    def run_loop(kp):
        trial = override(config, 'governor', kp=float(kp), ki=0.0)
        result = run_simulation(ExperimentSpec(trial, controller='base', trace=trace, label=f'p-only@{kp:.4g}'))
        if result.aborted:
            raise InstabilityError(result.message)
        return result.traces['power'].to_numpy()

    return run_loop


def tune_governor(config, step=-0.1, duration=60.0):
    """Ziegler-Nichols PI gains on the full plant; falls back to the configured gains."""
    run_loop = governor_loop(config, step=step, duration=duration)
    fallback = (config.governor.kp, config.governor.ki)
    return tune_pi(run_loop, config.simulation.record_period, fallback=fallback)
