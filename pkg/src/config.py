import os
import yaml
from dataclasses import dataclass, asdict
from typing import Dict, Any, Optional
from dotenv import load_dotenv

from src.errors import InvalidArgumentError

load_dotenv()

OUTPUT_FORMATS = ("table", "structured", "csv")

ENV_OVERRIDES = {
    ('engine', 'box'): 'TORIC_BOX',
    ('engine', 'k_max'): 'TORIC_K_MAX',
    ('runner', 'jobs'): 'TORIC_JOBS',
    ('runner', 'output_format'): 'TORIC_FORMAT',
    ('runner', 'log_level'): 'TORIC_LOG_LEVEL',
}


@dataclass
class EngineConfig:
    box: int
    k_max: int
    saturation_max_power: int
    minor_bound: int
    chart_box: int


@dataclass
class RunnerConfig:
    jobs: int
    output_format: str
    log_level: str


@dataclass
class RandomConfig:
    seed: int
    matrix_trials: int
    ideal_trials: int


class Config:
    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path or os.getenv('TORIC_CONFIG', 'config.yaml')
        self.load_config()

    def load_config(self):
        config_data = self.get_default_config()
        if os.path.exists(self.config_path):
            with open(self.config_path, 'r') as file:
                file_data = yaml.safe_load(file) or {}
            for section, values in file_data.items():
                if section in config_data and isinstance(values, dict):
                    config_data[section].update(values)
        for (section, key), variable in ENV_OVERRIDES.items():
            if os.getenv(variable):
                config_data[section][key] = os.getenv(variable)

        self.engine = EngineConfig(**{k: int(v) for k, v in config_data['engine'].items()})
        self.runner = RunnerConfig(
            jobs=int(config_data['runner']['jobs']),
            output_format=str(config_data['runner']['output_format']),
            log_level=str(config_data['runner']['log_level']),
        )
        self.random = RandomConfig(**{k: int(v) for k, v in config_data['random'].items()})
        self.validate()

    def validate(self):
        if self.engine.box < 0:
            raise InvalidArgumentError(f"box must be non-negative, got {self.engine.box}")
        if self.engine.k_max < 1:
            raise InvalidArgumentError(f"k_max must be at least 1, got {self.engine.k_max}")
        if self.engine.saturation_max_power < 1:
            raise InvalidArgumentError("saturation_max_power must be at least 1")
        if self.runner.jobs < 1:
            raise InvalidArgumentError(f"jobs must be at least 1, got {self.runner.jobs}")
        if self.runner.output_format not in OUTPUT_FORMATS:
            raise InvalidArgumentError(
                f"unknown output format {self.runner.output_format!r}, expected one of {OUTPUT_FORMATS}")

    def override(self, **values):
        """Apply command-line overrides; ``None`` values are ignored."""
        for key, value in values.items():
            if value is None:
                continue
            for section in (self.engine, self.runner, self.random):
                if hasattr(section, key):
                    setattr(section, key, value)
                    break
            else:
                raise InvalidArgumentError(f"unknown configuration key {key!r}")
        self.validate()
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            'engine': asdict(self.engine),
            'runner': asdict(self.runner),
            'random': asdict(self.random),
        }

    def get_default_config(self) -> Dict[str, Any]:
        return {
            'engine': {
                'box': 6,
                'k_max': 20,
                'saturation_max_power': 12,
                'minor_bound': 6,
                'chart_box': 4,
            },
            'runner': {
                'jobs': 1,
                'output_format': 'table',
                'log_level': 'INFO',
            },
            'random': {
                'seed': 42,
                'matrix_trials': 200,
                'ideal_trials': 100,
            },
        }
