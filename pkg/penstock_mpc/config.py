"""
Experiment configuration.

A configuration file is TOML with one table per concern; every table maps onto
a dataclass whose defaults fill any key the file leaves out. The fully resolved
form is echoed as JSON into each run directory and loads back unchanged.
"""
import json
import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .benchmarks import FatigueFilterConfig, LpfConfig
from .electromech import GeneratorConfig, GovernorConfig
from .errors import ConfigError, PenstockError
from .fatigue import SNCurve
from .hydraulics import PlantParameters
from .mpc import MpcConfig
from .traces import SynthFrequencyParams

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

package_root = Path(__file__).resolve().parent
default_config_path = package_root / 'plant_230mw.toml'

# run-directory root for relative output paths
RUNS_ENV = 'PENSTOCK_MPC_RUNS'


@dataclass(frozen=True)
class SimulationConfig:
    # plant integration step, s
    dt: float = 0.005
    governor_period: float = 0.1
    record_period: float = 0.1
    duration: float = 3600.0
    # excluded from fatigue and tracking metrics, s
    warmup: float = 60.0
    initial_opening: float = 0.9

    def __post_init__(self):
        if min(self.dt, self.governor_period, self.record_period, self.duration) <= 0:
            raise ConfigError("simulation steps and duration must be positive")
        if self.warmup < 0:
            raise ConfigError("warm-up must be >= 0")
        if not 0 < self.initial_opening <= 1:
            raise ConfigError("initial opening must lie in (0, 1]")


@dataclass(frozen=True)
class ExperimentSection:
    controller: str = 'mpc'
    controllers: tuple = ('base', 'mpc', 'lpf', 'fatigue_filter')
    # 'synthetic' or a CSV path
    frequency_source: str = 'synthetic'
    # sample period of synthetic traces and expected period of CSV traces, s
    frequency_period: float = 0.1
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'controllers', tuple(self.controllers))


sections = {
    'plant': PlantParameters,
    'sn_curve': SNCurve,
    'governor': GovernorConfig,
    'generator': GeneratorConfig,
    'simulation': SimulationConfig,
    'mpc': MpcConfig,
    'lpf': LpfConfig,
    'fatigue_filter': FatigueFilterConfig,
    'frequency': SynthFrequencyParams,
    'experiment': ExperimentSection,
}


@dataclass(frozen=True)
class ExperimentConfig:
    plant: PlantParameters = field(default_factory=PlantParameters)
    sn_curve: SNCurve = field(default_factory=SNCurve)
    governor: GovernorConfig = field(default_factory=GovernorConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    mpc: MpcConfig = field(default_factory=MpcConfig)
    lpf: LpfConfig = field(default_factory=LpfConfig)
    fatigue_filter: FatigueFilterConfig = field(default_factory=FatigueFilterConfig)
    frequency: SynthFrequencyParams = field(default_factory=SynthFrequencyParams)
    experiment: ExperimentSection = field(default_factory=ExperimentSection)


def _build_section(name, values):
    cls = sections[name]
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"[{name}] has unknown keys: {', '.join(unknown)}")
    # TOML and JSON arrays arrive as lists; dataclass fields hold tuples
    values = {key: tuple(v) if isinstance(v, list) else v for key, v in values.items()}
    try:
        return cls(**values)
    except (PenstockError, TypeError) as error:
        raise ConfigError(f"[{name}] invalid: {error}") from error


def from_mapping(data):
    data = dict(data)
    version = data.pop('format_version', None)
    if version != FORMAT_VERSION:
        raise ConfigError(f"format_version must be {FORMAT_VERSION}, got {version!r}")

    unknown = sorted(set(data) - set(sections))
    if unknown:
        raise ConfigError(f"unknown configuration tables: {', '.join(unknown)}")

    built = {name: _build_section(name, data.get(name, {})) for name in sections}
    return ExperimentConfig(**built)


def load_config(path=None):
    """Load a TOML configuration or a resolved JSON echo."""
    path = Path(path) if path is not None else default_config_path
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")

    try:
        if path.suffix == '.json':
            data = json.loads(path.read_text())
        else:
            with path.open('rb') as file:
                data = tomllib.load(file)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as error:
        raise ConfigError(f"{path}: {error}") from error

    config = from_mapping(data)
    logger.info("configuration loaded from %s", path)
    return config


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def resolved(config):
    """Configuration as a JSON-ready dict with every default materialized."""
    data = {'format_version': FORMAT_VERSION}
    for name in sections:
        section = asdict(getattr(config, name))
        data[name] = {key: _plain(value) for key, value in section.items()}
    return data


def dump_config(config, path):
    Path(path).write_text(json.dumps(resolved(config), indent=2, sort_keys=True) + '\n')
    return path


def run_directory(out):
    """Resolve a run directory, relative paths landing under $PENSTOCK_MPC_RUNS."""
    out = Path(out)
    if not out.is_absolute():
        out = Path(os.environ.get(RUNS_ENV, '.')) / out
    out.mkdir(parents=True, exist_ok=True)
    return out


def override(config, section, **values):
    """Copy of ``config`` with keys of one table replaced."""
    if section not in sections:
        raise ConfigError(f"unknown configuration table {section!r}")
    current = getattr(config, section)
    known = {f.name for f in fields(current)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"[{section}] has unknown keys: {', '.join(unknown)}")
    try:
        updated = current.updated(**values) if section == 'plant' else replace(current, **values)
        return replace(config, **{section: updated})
    except (PenstockError, TypeError) as error:
        raise ConfigError(f"[{section}] invalid: {error}") from error


def load_sn_curve(path):
    """S-N curve from the ``[sn_curve]`` table of a TOML file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"S-N file not found: {path}")
    try:
        with path.open('rb') as file:
            data = tomllib.load(file)
    except tomllib.TOMLDecodeError as error:
        raise ConfigError(f"{path}: {error}") from error
    if 'sn_curve' not in data:
        raise ConfigError(f"{path}: no [sn_curve] table")
    return _build_section('sn_curve', data['sn_curve'])
