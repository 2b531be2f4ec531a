import json

import numpy as np
import pandas as pd
import pytest

from penstock_mpc.cli import cli_main
from penstock_mpc.config import load_config


@pytest.fixture
def short_toml(tmp_path):
    path = tmp_path / 'short.toml'
    path.write_text(
        "format_version = 1\n"
        "[simulation]\nduration = 5.0\nwarmup = 0.0\n"
        "[experiment]\ncontroller = \"base\"\n"
    )
    return path


@pytest.fixture
def stress_csv(tmp_path):
    t = 0.1 * np.arange(300)
    frame = pd.DataFrame({
        'time_s': t,
        'sigma_1': 5e6 + 20e6 * np.sin(2 * np.pi * t / 3),
        'sigma_2': 5e6 + 40e6 * np.sin(2 * np.pi * t / 3),
    })
    path = tmp_path / 'stress.csv'
    frame.to_csv(path, index=False)
    return path


@pytest.mark.parametrize('argv', [
    [],
    ['bogus'],
    ['simulate', '--nonsense'],
    ['simulate', '--controller', 'pid'],
    ['simulate', '--config', 'no/such/plant.toml'],
    ['fatigue'],
])
def test_usage_errors(argv):
    assert cli_main(argv) == 2


def test_run_failure_is_reported(tmp_path, capsys):
    assert cli_main(['fatigue', '--stress', str(tmp_path / 'missing.csv')]) == 1
    assert 'stress table not found' in capsys.readouterr().err


def test_bad_configuration_is_a_run_failure(tmp_path):
    path = tmp_path / 'bad.toml'
    path.write_text("format_version = 1\n[plant]\nlength = 3.0\n")
    assert cli_main(['simulate', '--config', str(path), '--out', str(tmp_path / 'run')]) == 1


def test_fatigue_command(stress_csv, tmp_path):
    out = tmp_path / 'fatigue'
    assert cli_main(['fatigue', '--stress', str(stress_csv), '--out', str(out)]) == 0

    damage = json.loads((out / 'damage.json').read_text())
    assert set(damage['damage']) == {'sigma_1', 'sigma_2'}
    assert damage['worst'] == 'sigma_2'
    cycles = pd.read_csv(out / 'cycles.csv')
    assert list(cycles.columns) == ['series', 'range', 'count']


def test_fatigue_command_with_sn_file(stress_csv, tmp_path):
    sn = tmp_path / 'sn.toml'
    sn.write_text("[sn_curve]\nfatigue_limit = 46e6\n")
    default_out, custom_out = tmp_path / 'default', tmp_path / 'custom'
    assert cli_main(['fatigue', '--stress', str(stress_csv), '--out', str(default_out)]) == 0
    assert cli_main(['fatigue', '--stress', str(stress_csv), '--sn', str(sn), '--out', str(custom_out)]) == 0

    default = json.loads((default_out / 'damage.json').read_text())['damage']
    custom = json.loads((custom_out / 'damage.json').read_text())['damage']
    assert custom['sigma_2'] < default['sigma_2']


def test_simulate_command(short_toml, tmp_path):
    out = tmp_path / 'run'
    assert cli_main(['-q', 'simulate', '--config', str(short_toml), '--seed', '3', '--out', str(out)]) == 0

    for name in ('traces.csv', 'metrics.json', 'config.json', 'solver_stats.csv'):
        assert (out / name).is_file()
    config = load_config(out / 'config.json')
    assert config.frequency.seed == 3
    assert config.simulation.duration == 5.0
    assert json.loads((out / 'metrics.json').read_text())['controller'] == 'base'
    assert len(pd.read_csv(out / 'traces.csv')) == 50


def test_simulate_from_frequency_file(short_toml, tmp_path):
    trace = tmp_path / 'freq.csv'
    trace.write_text("time_s,freq_hz\n" + "".join(f"{0.1 * k:.1f},{50 - 0.001 * k:.3f}\n" for k in range(60)))
    out = tmp_path / 'run'
    assert cli_main(['-q', 'simulate', '--config', str(short_toml), '--freq', str(trace),
                     '--controller', 'lpf', '--out', str(out)]) == 0

    config = load_config(out / 'config.json')
    assert config.experiment.frequency_source == str(trace)
    assert config.experiment.controller == 'lpf'
    assert json.loads((out / 'metrics.json').read_text())['trace_source'].startswith('file:')


def test_compare_command(short_toml, tmp_path):
    out = tmp_path / 'compare'
    assert cli_main(['-q', 'compare', '--config', str(short_toml), '--controllers', 'base,lpf',
                     '--duration', '3', '--out', str(out)]) == 0

    table = pd.read_csv(out / 'comparison.csv')
    assert list(table['label']) == ['base', 'lpf']
    assert (out / 'base' / 'metrics.json').is_file()
    assert load_config(out / 'config.json').experiment.controllers == ('base', 'lpf')


def test_compare_without_base(short_toml, tmp_path):
    assert cli_main(['-q', 'compare', '--config', str(short_toml), '--controllers', 'lpf',
                     '--out', str(tmp_path / 'compare')]) == 1


def test_linearize_check_command(tmp_path):
    out = tmp_path / 'check'
    assert cli_main(['-q', 'linearize-check', '--duration', '2', '--out', str(out)]) == 0

    report = json.loads((out / 'fidelity.json').read_text())
    assert report['max_relative_mae'] < 0.02
    assert len(pd.read_csv(out / 'fidelity.csv')) == 20
    assert len(pd.read_csv(out / 'heads.csv')) == 20
