import math

import numpy as np
import pandas as pd
import pytest

from penstock_mpc import harness, results
from penstock_mpc.config import ExperimentConfig, override
from penstock_mpc.electromech import oscillation_growth
from penstock_mpc.errors import ComparisonError, ConfigError, InstabilityError, TuningError, UndefinedMetricError
from penstock_mpc.harness import (
    ExperimentSpec, compare_controllers, correlation, governor_step_response, linear_fidelity,
    run_simulation, trace_metrics,
)
from penstock_mpc.hydraulics import split_state
from penstock_mpc.mpc import head_bounds
from penstock_mpc.traces import FrequencyTrace


@pytest.fixture
def stepped_base(short_config, stepped_trace):
    return run_simulation(ExperimentSpec(short_config, controller='base', trace=stepped_trace))


def test_correlation():
    y = np.sin(np.linspace(0, 6, 50))
    assert correlation(y, y) == pytest.approx(1.0)
    assert correlation(y, -y) == pytest.approx(-1.0)
    assert correlation(y, 2 * y + 0.3) == pytest.approx(1.0)


@pytest.mark.parametrize('y, y_star', [
    ([0.5, 0.6], [0.5, 0.6, 0.7]),
    ([0.5], [0.5]),
    ([0.5, 0.5, 0.5], [0.4, 0.5, 0.6]),
])
def test_correlation_undefined(y, y_star):
    with pytest.raises(UndefinedMetricError):
        correlation(y, y_star)


def test_spec_defaults_to_configured_controller(short_config, constant_trace):
    spec = ExperimentSpec(short_config, trace=constant_trace)
    assert spec.controller == 'mpc'
    assert spec.label == 'mpc'
    assert spec.duration == 10.0


def test_spec_rejects_unknown_controller(short_config, constant_trace):
    with pytest.raises(ConfigError):
        ExperimentSpec(short_config, controller='pid', trace=constant_trace)


def test_spec_rejects_short_trace(short_config):
    trace = FrequencyTrace(period=0.1, samples=[50.0] * 50)
    with pytest.raises(ConfigError):
        ExperimentSpec(short_config, controller='base', trace=trace)


def test_missing_trace_file(short_config, tmp_path):
    config = override(short_config, 'experiment', frequency_source=str(tmp_path / 'missing.csv'))
    with pytest.raises(ConfigError):
        ExperimentSpec(config, controller='base')


def test_cadence_must_divide_plant_step(short_config, constant_trace):
    config = override(short_config, 'simulation', governor_period=0.0123)
    with pytest.raises(ConfigError):
        run_simulation(ExperimentSpec(config, controller='base', trace=constant_trace))


def test_constant_frequency_holds_the_plant(short_config, constant_trace):
    result = run_simulation(ExperimentSpec(short_config, controller='base', trace=constant_trace))

    assert result.status == 'ok'
    assert len(result.traces) == 100
    assert result.traces['y_applied'].to_numpy() == pytest.approx(np.full(100, 0.9), abs=1e-9)
    assert result.damage.max() < 1e-20
    assert result.element_count == 20
    assert {'h_1', 'h_20', 'sigma_1', 'sigma_20', 'omega', 'power'} <= set(result.traces.columns)


def test_stress_columns_follow_heads(stepped_base):
    params = stepped_base.config.plant
    heads = stepped_base.heads()
    sigma = stepped_base.traces[harness.stress_columns(20)].to_numpy()
    assert sigma == pytest.approx((heads - params.elevations) * 490500.0)


def test_frequency_step_moves_the_vane(stepped_base):
    y = stepped_base.traces['y_applied'].to_numpy()
    assert y[-1] > y[0] + 0.02
    assert np.all(np.abs(np.diff(y)) <= 0.1 * 0.1 + 1e-12)
    assert stepped_base.cc == pytest.approx(1.0)
    assert stepped_base.damage.max() > 0
    assert stepped_base.max_rdi == pytest.approx(1.0)
    assert stepped_base.worst_element == int(np.argmax(stepped_base.damage)) + 1


def test_warmup_is_excluded(stepped_base):
    params = stepped_base.config.plant
    sn = stepped_base.config.sn_curve
    damage, cc = trace_metrics(stepped_base.traces, params, sn, warmup=0.0)
    assert np.array_equal(damage, stepped_base.damage)

    damage, cc = trace_metrics(stepped_base.traces, params, sn, warmup=100.0)
    assert np.all(damage == 0)
    assert math.isnan(cc)


def test_diverging_plant_aborts_with_partial_traces(short_config, constant_trace, monkeypatch):
    calls = {'count': 0}
    original = harness.step_rk4

    def failing_step(*args):
        calls['count'] += 1
        if calls['count'] > 50:
            raise InstabilityError("penstock state diverged")
        return original(*args)

    monkeypatch.setattr(harness, 'step_rk4', failing_step)
    result = run_simulation(ExperimentSpec(short_config, controller='base', trace=constant_trace))

    assert result.aborted
    assert 'diverged' in result.message
    assert 0 < len(result.traces) < 100
    assert result.metrics()['status'] == 'aborted'


def test_identical_runs_are_identical(short_config):
    first = run_simulation(ExperimentSpec(short_config, controller='base'))
    second = run_simulation(ExperimentSpec(short_config, controller='base'))
    pd.testing.assert_frame_equal(first.traces, second.traces)
    assert first.provenance == second.provenance

    reseeded = override(short_config, 'frequency', seed=8)
    assert run_simulation(ExperimentSpec(reseeded, controller='base')).provenance != first.provenance


def test_result_directory_round_trip(stepped_base, tmp_path):
    out = results.write_result(stepped_base, tmp_path / 'run')
    loaded = results.read_result(out)

    assert loaded.config == stepped_base.config
    assert loaded.provenance == stepped_base.provenance
    assert loaded.cc == stepped_base.cc
    assert np.array_equal(loaded.damage, stepped_base.damage)

    damage, cc = trace_metrics(loaded.traces, loaded.config.plant, loaded.config.sn_curve,
                               loaded.config.simulation.warmup)
    assert np.array_equal(damage, loaded.damage)
    assert cc == loaded.cc


def test_metrics_are_json_ready(short_config, constant_trace):
    metrics = run_simulation(ExperimentSpec(short_config, controller='lpf', trace=constant_trace)).metrics()
    assert metrics['controller'] == 'lpf'
    assert metrics['rdi'] is None
    assert metrics['max_rdi'] is None
    assert metrics['mpc_steps'] == 0


def test_comparison_needs_one_base(short_config, stepped_trace):
    mpc = ExperimentSpec(short_config, controller='mpc', trace=stepped_trace)
    with pytest.raises(ComparisonError):
        compare_controllers([mpc])

    base = ExperimentSpec(short_config, controller='base', trace=stepped_trace)
    twin = ExperimentSpec(short_config, controller='base', trace=stepped_trace, label='base-2')
    with pytest.raises(ComparisonError):
        compare_controllers([base, twin])

    with pytest.raises(ComparisonError):
        compare_controllers([])


def test_comparison_needs_unique_labels(short_config, stepped_trace):
    specs = [
        ExperimentSpec(short_config, controller='base', trace=stepped_trace),
        ExperimentSpec(short_config, controller='lpf', trace=stepped_trace, label='x'),
        ExperimentSpec(short_config, controller='mpc', trace=stepped_trace, label='x'),
    ]
    with pytest.raises(ComparisonError):
        compare_controllers(specs)


def test_comparison_needs_shared_inputs(short_config, stepped_trace, constant_trace):
    specs = [
        ExperimentSpec(short_config, controller='base', trace=stepped_trace),
        ExperimentSpec(short_config, controller='lpf', trace=constant_trace),
    ]
    with pytest.raises(ComparisonError):
        compare_controllers(specs)


def test_comparison_without_base_damage(short_config, stepped_trace, monkeypatch):
    monkeypatch.setattr(harness, 'element_damage', lambda heads, params, sn: np.zeros(params.element_count))
    specs = [
        ExperimentSpec(short_config, controller='base', trace=stepped_trace),
        ExperimentSpec(short_config, controller='lpf', trace=stepped_trace),
    ]
    with pytest.raises(UndefinedMetricError):
        compare_controllers(specs)


def test_short_comparison(short_config, stepped_trace):
    specs = [ExperimentSpec(short_config, controller=name, trace=stepped_trace) for name in ('base', 'mpc', 'lpf')]
    comparison = compare_controllers(specs)
    table = comparison.table

    assert list(table['label']) == ['base', 'mpc', 'lpf']
    assert table.loc[0, 'max_rdi'] == pytest.approx(1.0)
    assert table.loc[0, 'cc'] == pytest.approx(1.0)
    assert math.isnan(table.loc[0, 'mean_solve_ms'])
    assert table.loc[1, 'mean_solve_ms'] > 0
    assert {f'rdi_{i}' for i in range(1, 21)} <= set(table.columns)

    mpc = comparison.result('mpc')
    assert len(mpc.solver_stats) == 100
    assert 'y_star_ref' in mpc.traces
    assert np.array_equal(mpc.traces['y_star_ref'], comparison.result('base').traces['y_star'])


def test_comparison_directory(short_config, stepped_trace, tmp_path):
    specs = [ExperimentSpec(short_config, controller=name, trace=stepped_trace) for name in ('base', 'lpf')]
    table_path = results.write_comparison(compare_controllers(specs), tmp_path)
    assert table_path.name == 'comparison.csv'
    assert (tmp_path / 'base' / 'metrics.json').is_file()
    assert (tmp_path / 'lpf' / 'traces.csv').is_file()


def test_lpf_tuning_overrides_the_cutoff(short_config, stepped_trace, monkeypatch):
    seen = []

    class Scored:
        def __init__(self, cc):
            self.cc = cc

    def fake_run(spec, reference=None, base_damage=None):
        cutoff = spec.config.lpf.cutoff
        seen.append(cutoff)
        return Scored(cutoff / (cutoff + 0.25))

    monkeypatch.setattr(harness, 'run_simulation', fake_run)
    config = override(short_config, 'lpf', tolerance=1e-4)
    cutoff = harness.tune_lpf(config, 0.8, trace=stepped_trace)
    assert cutoff == pytest.approx(1.0, rel=2e-3)
    assert seen[0] == config.lpf.bracket[1]


def test_fatigue_filter_run(short_config):
    # half a hertz is far beyond what the trim band lets through
    trace = FrequencyTrace(period=0.1, samples=[50.0] * 20 + [49.5] * 180, source='large step')
    result = run_simulation(ExperimentSpec(short_config, controller='fatigue_filter', trace=trace))
    assert result.status == 'ok'
    shaped = result.traces['f_governor'].to_numpy() - result.traces['f_grid'].to_numpy()
    assert np.max(np.abs(shaped)) > 1e-3


def test_linear_model_tracks_plant():
    report = linear_fidelity(ExperimentConfig())
    assert report.relative_mae.max() < 0.02
    assert report.frame.shape == (200, 42)
    assert report.max_error < 5.0


@pytest.mark.slow
def test_linear_model_tracks_larger_moves():
    report = linear_fidelity(ExperimentConfig(), amplitude=0.05, duration=60.0)
    assert report.relative_mae.max() < 0.02


@pytest.mark.slow
def test_governor_follows_droop():
    response = governor_step_response(ExperimentConfig())
    assert response.expected_change == pytest.approx(0.1)
    assert response.relative_error < 0.05


@pytest.fixture(scope='module')
def stepped_study():
    # ten minutes with 100 mHz-scale steps every 30 s; benchmarks tuned to the MPC
    config = ExperimentConfig()
    config = override(config, 'simulation', duration=600.0, warmup=10.0)
    config = override(config, 'frequency', seed=11, step_interval=30.0, step_std=0.1)
    return harness.reproduce_comparison(config, trace=harness.load_trace(config))


@pytest.mark.slow
def test_mpc_reduces_damage(stepped_study):
    base, mpc = stepped_study.result('base'), stepped_study.result('mpc')
    assert base.max_rdi == pytest.approx(1.0)
    assert mpc.status == 'ok'
    assert mpc.max_rdi <= 0.5
    assert mpc.metrics()['degraded_steps'] == 0


@pytest.mark.slow
def test_lpf_at_equal_tracking_does_more_damage(stepped_study):
    mpc, lpf = stepped_study.result('mpc'), stepped_study.result('lpf')
    assert lpf.cc == pytest.approx(mpc.cc, abs=mpc.config.lpf.tolerance)
    assert mpc.max_rdi < lpf.max_rdi


@pytest.mark.slow
def test_fatigue_filter_at_equal_damage_tracks_worse(stepped_study):
    mpc, trimmed = stepped_study.result('mpc'), stepped_study.result('fatigue_filter')
    assert trimmed.max_rdi == pytest.approx(mpc.max_rdi, abs=mpc.config.fatigue_filter.rdi_tolerance)
    assert mpc.cc > trimmed.cc


@pytest.mark.slow
def test_mpc_hour_stays_in_band_within_solve_budget():
    config = override(ExperimentConfig(), 'simulation', duration=3600.0)
    result = run_simulation(ExperimentSpec(config, controller='mpc'))
    assert result.status == 'ok'

    h0 = split_state(harness.prepare_plant(config).x0, config.plant.element_count)[1]
    bounds = head_bounds(config.sn_curve, config.plant, h0)
    margin = 0.02 * bounds.half_band
    heads = result.heads()
    inside = np.all((heads >= bounds.lower - margin) & (heads <= bounds.upper + margin), axis=1)
    assert inside.mean() >= 0.999

    solve_ms = 1e3 * result.solver_stats['wall_time'].to_numpy(dtype=float)
    assert solve_ms.size == 36000
    assert solve_ms.mean() < 100.0
    assert np.percentile(solve_ms, 99) < 250.0


@pytest.mark.slow
def test_seeded_comparisons_write_identical_metrics(tmp_path):
    config = override(ExperimentConfig(), 'simulation', duration=120.0, warmup=10.0)
    config = override(config, 'frequency', seed=5, step_interval=30.0, step_std=0.1)
    labels = ('base', 'mpc', 'lpf', 'fatigue_filter')

    for name in ('first', 'second'):
        trace = harness.load_trace(config)
        comparison = compare_controllers([ExperimentSpec(config, controller=c, trace=trace) for c in labels])
        results.write_comparison(comparison, tmp_path / name)

    for label in labels:
        first = (tmp_path / 'first' / label / results.METRICS_FILE).read_bytes()
        second = (tmp_path / 'second' / label / results.METRICS_FILE).read_bytes()
        assert first == second


@pytest.mark.slow
def test_governor_tuning_on_full_plant():
    config = ExperimentConfig()
    tuning = harness.tune_governor(config)
    assert math.isfinite(tuning.kp) and tuning.kp > 0
    assert math.isfinite(tuning.ki) and tuning.ki >= 0

    tuned = override(config, 'governor', kp=tuning.kp, ki=tuning.ki)
    response = governor_step_response(tuned, duration=60.0)
    power = response.traces['power'].to_numpy()
    assert np.all(np.isfinite(power))
    growth, _ = oscillation_growth(power, config.simulation.record_period)
    assert not growth >= 0


def test_parallel_sweep_matches_serial(short_config, stepped_trace):
    specs = [ExperimentSpec(short_config, controller=name, trace=stepped_trace) for name in ('base', 'lpf')]
    serial = harness.sweep(specs)
    parallel = harness.sweep(specs, workers=2)
    assert [r.label for r in parallel] == ['base', 'lpf']
    for first, second in zip(serial, parallel):
        pd.testing.assert_frame_equal(first.traces, second.traces)


def test_reproduction_keeps_best_candidates(short_config, stepped_trace, monkeypatch):
    monkeypatch.setattr(harness, 'tune_lpf', lambda *args, **kwargs: 0.7)

    def failing_trim(*args, **kwargs):
        raise TuningError("trim scale did not converge", best=(2.5, 0.4))

    monkeypatch.setattr(harness, 'tune_trim', failing_trim)
    comparison = harness.reproduce_comparison(short_config, trace=stepped_trace)

    assert list(comparison.table['controller']) == ['base', 'mpc', 'lpf', 'fatigue_filter']
    assert comparison.result('lpf').config.lpf.cutoff == 0.7
    assert comparison.result('fatigue_filter').config.fatigue_filter.trim_scale == 2.5


def test_governor_loop_runs_proportional_control(short_config):
    run_loop = harness.governor_loop(short_config, duration=5.0)
    power = run_loop(0.3)
    assert power.shape == (50,)
    assert np.all(np.isfinite(power))


def test_governor_tuning_falls_back_to_configured_gains(short_config, monkeypatch):
    seen = {}

    def fake_tune(run_loop, dt, fallback=None):
        seen.update(dt=dt, fallback=fallback)
        return fallback

    monkeypatch.setattr(harness, 'tune_pi', fake_tune)
    assert harness.tune_governor(short_config) == (0.3, 0.15)
    assert seen == {'dt': 0.1, 'fallback': (0.3, 0.15)}
