import json

import pytest

from penstock_mpc import results
from penstock_mpc.config import (
    ExperimentConfig, RUNS_ENV, SimulationConfig, default_config_path, dump_config, load_config,
    load_sn_curve, override, resolved, run_directory,
)
from penstock_mpc.errors import ConfigError
from penstock_mpc.hydraulics import PlantParameters


@pytest.fixture
def write_toml(tmp_path):
    def write(text, name='plant.toml'):
        path = tmp_path / name
        path.write_text(text)
        return path
    return write


def test_bundled_configuration():
    config = load_config()
    assert config.plant.element_count == 20
    assert config.plant.rated_power == 230e6
    assert config.sn_curve.fatigue_limit == 23e6
    assert config.governor.vane_limits == (0.0, 1.0)
    assert config.experiment.controllers == ('base', 'mpc', 'lpf', 'fatigue_filter')
    assert config.mpc.horizon_steps == 20
    assert load_config(default_config_path) == config


def test_missing_keys_take_defaults(write_toml):
    config = load_config(write_toml("format_version = 1\n[simulation]\nduration = 5.0\n"))
    assert config.simulation.duration == 5.0
    assert config.simulation.dt == SimulationConfig().dt
    assert config.plant == ExperimentConfig().plant


def test_json_echo_reloads_unchanged(tmp_path):
    config = override(load_config(), 'frequency', seed=99)
    config = override(config, 'lpf', cutoff=0.37)
    path = dump_config(config, tmp_path / 'config.json')

    assert load_config(path) == config
    assert json.loads(path.read_text())['format_version'] == 1


def test_resolved_form_materializes_derived_values():
    data = resolved(ExperimentConfig())
    assert data['plant']['turbine_inductance'] > 0
    assert data['governor']['vane_limits'] == [0.0, 1.0]


@pytest.mark.parametrize('text', [
    "format_version = 1\n[plant]\nlength = 1000.0\n",
    "format_version = 1\n[reservoir]\nlevel = 3.0\n",
    "format_version = 2\n",
    "[plant]\nelement_count = 20\n",
    "format_version = 1\n[governor]\npermanent_droop = 0.0\n",
    "format_version = 1\n[simulation]\nwarmup = -1.0\n",
    "format_version = 1\n[plant\n",
])
def test_invalid_configuration(write_toml, text):
    with pytest.raises(ConfigError):
        load_config(write_toml(text))


def test_missing_configuration(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / 'nowhere.toml')


def test_override_is_validated():
    config = ExperimentConfig()
    with pytest.raises(ConfigError):
        override(config, 'plant', length=10.0)
    with pytest.raises(ConfigError):
        override(config, 'pumps', power=1.0)
    with pytest.raises(ConfigError):
        override(config, 'governor', vane_limits=(0.8, 0.2))
    assert override(config, 'mpc', horizon=1.0).mpc.horizon_steps == 10
    assert config.mpc.horizon == 2.0


def test_plant_override_rederives_turbine_constants(tmp_path):
    # the echoed config carries materialized turbine constants
    config = load_config(dump_config(ExperimentConfig(), tmp_path / 'config.json'))

    coarse = override(config, 'plant', element_count=10).plant
    assert coarse.turbine_inductance == pytest.approx(PlantParameters(element_count=10).turbine_inductance)
    assert coarse.turbine_inductance == pytest.approx(2 * config.plant.turbine_inductance)

    uprated = override(config, 'plant', rated_power=240e6, nominal_torque=240e6 / config.plant.nominal_speed)
    assert uprated.plant.turbine_efficiency == pytest.approx(240 / 230 * config.plant.turbine_efficiency)


def test_explicit_turbine_constants_survive_plant_override():
    config = override(ExperimentConfig(), 'plant', turbine_inductance=0.5, turbine_efficiency=0.9)
    config = override(config, 'plant', element_count=10, penstock_length=1000.0)
    assert config.plant.turbine_inductance == 0.5
    assert config.plant.turbine_efficiency == 0.9


def test_run_directory(tmp_path, monkeypatch):
    monkeypatch.setenv(RUNS_ENV, str(tmp_path / 'runs'))
    assert run_directory('first') == tmp_path / 'runs' / 'first'
    assert (tmp_path / 'runs' / 'first').is_dir()
    assert run_directory(tmp_path / 'elsewhere') == tmp_path / 'elsewhere'


def test_sn_curve_file(write_toml):
    sn = load_sn_curve(write_toml("[sn_curve]\nfatigue_limit = 30e6\nknee_cycles = 2e6\n", 'sn.toml'))
    assert sn.fatigue_limit == 30e6
    assert sn.knee_cycles == 2e6
    assert sn.slope_below_knee == 3.0

    with pytest.raises(ConfigError):
        load_sn_curve(write_toml("[curve]\nfatigue_limit = 30e6\n", 'other.toml'))


def test_result_directory_needs_metrics(tmp_path):
    with pytest.raises(ConfigError):
        results.read_result(tmp_path)

    (tmp_path / results.METRICS_FILE).write_text(json.dumps({'format_version': 0}))
    with pytest.raises(ConfigError):
        results.read_result(tmp_path)
