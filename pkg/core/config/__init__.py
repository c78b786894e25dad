"""
Configuration module for the region editor.

This package provides a centralized way to access configuration models,
runtime settings and state file paths throughout the application.
"""
from .console import console
from .models import (
    AdapterConfig,
    Arm,
    EditConfig,
    ExperimentConfig,
    OverlapDistanceMode,
    TrainConfig,
)
from .paths import PROJECT_ROOT
from .settings import RuntimeSettings, get_runtime_settings, resolve_threads
from .utils import (
    build_experiment_config,
    config_keys,
    config_to_kv,
    load_kv_config,
    parse_overrides,
    parse_value_range,
)

__all__ = [
    'PROJECT_ROOT',
    'console',
    'AdapterConfig',
    'Arm',
    'EditConfig',
    'ExperimentConfig',
    'OverlapDistanceMode',
    'TrainConfig',
    'RuntimeSettings',
    'get_runtime_settings',
    'resolve_threads',
    'build_experiment_config',
    'config_keys',
    'config_to_kv',
    'load_kv_config',
    'parse_overrides',
    'parse_value_range',
]
