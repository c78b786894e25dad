"""
Utility functions for configuration management.

This module provides helper functions for working with configuration files:
parsing ``key = value`` files, mapping flat keys onto the nested config
models, and expanding value ranges for sweeps.
"""
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ValidationError

from core.config.models import AdapterConfig, EditConfig, ExperimentConfig, TrainConfig
from core.exceptions import ConfigError

# Nested sections of ExperimentConfig addressed by flat keys
_SECTIONS: Dict[str, type] = {
    "edit": EditConfig,
    "train": TrainConfig,
    "adapter": AdapterConfig,
}

# Short aliases accepted on the command line
KEY_ALIASES = {"K": "k_regions"}


def _key_targets() -> Dict[str, List[Tuple[Optional[str], str]]]:
    """Map each flat key to the (section, field) pairs it sets."""
    targets: Dict[str, List[Tuple[Optional[str], str]]] = {}
    for name in ExperimentConfig.model_fields:
        if name not in _SECTIONS:
            targets.setdefault(name, []).append((None, name))
    for section, model in _SECTIONS.items():
        for name in model.model_fields:
            targets.setdefault(name, []).append((section, name))
    return targets


def config_keys() -> List[str]:
    """All keys accepted in a config file, in a stable order."""
    return sorted(_key_targets())


def load_kv_config(path: Union[str, Path]) -> Dict[str, str]:
    """
    Parse a ``key = value`` configuration file.

    Blank lines and ``#`` comments are ignored. Duplicate keys are an error.

    Args:
        path: Path to the configuration file

    Returns:
        Raw string values keyed by config key

    Raises:
        ConfigError: If a line is malformed or a key repeats
    """
    values: Dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def parse_overrides(pairs: Iterable[str]) -> Dict[str, str]:
    """Turn ``KEY=VALUE`` command-line overrides into a dict."""
    values: Dict[str, str] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} must look like KEY=VALUE")
        key, value = (part.strip() for part in pair.split("=", 1))
        values[KEY_ALIASES.get(key, key)] = value
    return values


def build_experiment_config(
    values: Mapping[str, Any],
    base: Optional[ExperimentConfig] = None,
) -> ExperimentConfig:
    """
    Build an ExperimentConfig from flat keys.

    The ``seed`` key seeds both the experiment and the trainer.

    Args:
        values: Flat key/value pairs (strings are coerced by pydantic)
        base: Configuration the values are layered on top of

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: On unknown keys or values outside the schema
    """
    targets = _key_targets()
    unknown = sorted(set(values) - set(targets))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    base = base or ExperimentConfig()
    top: Dict[str, Any] = {
        name: getattr(base, name)
        for name in ExperimentConfig.model_fields
        if name not in _SECTIONS
    }
    sections: Dict[str, Dict[str, Any]] = {
        section: getattr(base, section).model_dump() for section in _SECTIONS
    }
    for key, value in values.items():
        for section, field in targets[key]:
            if section is None:
                top[field] = value
            else:
                sections[section][field] = value
    if "seed" in values:
        sections["train"]["seed"] = values["seed"]

    try:
        return ExperimentConfig(**top, **sections)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def config_to_kv(config: ExperimentConfig) -> str:
    """Render a config as a ``key = value`` file that round-trips through the loader."""
    flat: Dict[str, Any] = {}
    for name in ExperimentConfig.model_fields:
        if name in _SECTIONS:
            continue
        flat[name] = getattr(config, name)
    for section in _SECTIONS:
        model: BaseModel = getattr(config, section)
        for name in type(model).model_fields:
            if name == "seed":
                continue
            flat[name] = getattr(model, name)

    lines = []
    for key in sorted(flat):
        value = flat[key]
        if value is None:
            continue
        if key == "arms":
            value = ",".join(arm.value for arm in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        elif hasattr(value, "value"):
            value = value.value
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def parse_value_range(spec: str) -> List[str]:
    """
    Expand a sweep value specification.

    ``"1..8"`` expands to the integers 1 through 8 inclusive; anything else
    is split on commas.
    """
    spec = spec.strip()
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        try:
            start, stop = int(lo), int(hi)
        except ValueError as exc:
            raise ConfigError(f"range {spec!r} must use integer bounds") from exc
        if stop < start:
            raise ConfigError(f"range {spec!r} is empty")
        return [str(v) for v in range(start, stop + 1)]
    parts = [part.strip() for part in spec.split(",") if part.strip()]
    if not parts:
        raise ConfigError("no sweep values given")
    return parts
