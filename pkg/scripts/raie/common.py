"""Shared options, config loading and error handling for the raie commands."""
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd
import typer

from core.config.models import ExperimentConfig
from core.config.paths import EXAMPLES_FILE
from core.config.utils import build_experiment_config, load_kv_config, parse_overrides
from core.data.loader import load_examples_tsv
from core.data.simulator import load_item_vectors
from core.exceptions import ConfigError, RaieError
from core.logger import log_error
from ui.report_display import display_error

EXIT_FAILURE = 1
EXIT_USAGE = 2

ConfigOption = typer.Option(None, "--config", "-c", help="Config file with one 'key = value' per line")
SetOption = typer.Option(None, "--set", help="Override a config key, KEY=VALUE (repeatable)")
SeedOption = typer.Option(None, "--seed", help="Seed for every random choice of the run")
ThreadsOption = typer.Option(None, "--threads", help="Worker threads (default: RAIE_THREADS, then CPU count)")


@contextmanager
def command_errors(command: str) -> Iterator[None]:
    """Turn package errors into a red diagnostic and the documented exit code."""
    try:
        yield
    except ConfigError as exc:
        display_error(str(exc))
        raise typer.Exit(code=EXIT_USAGE)
    except (RaieError, OSError, ValueError) as exc:
        log_error("command_failed", f"{command} failed", exception=exc)
        display_error(str(exc))
        raise typer.Exit(code=EXIT_FAILURE)


def load_config(
    config_path: Optional[Path],
    overrides: Optional[List[str]],
    seed: Optional[int] = None,
    base: Optional[ExperimentConfig] = None,
) -> ExperimentConfig:
    """Layer the config file, then ``--set`` overrides, then ``--seed``."""
    values = {}
    if config_path is not None:
        if not config_path.exists():
            raise ConfigError(f"config file {config_path} does not exist")
        values.update(load_kv_config(config_path))
    values.update(parse_overrides(overrides or []))
    if seed is not None:
        values["seed"] = seed
    return build_experiment_config(values, base=base)


def examples_path(data: Path) -> Path:
    """Accept either a dataset directory or an examples file."""
    return data / EXAMPLES_FILE if data.is_dir() else data


def load_examples(data: Path) -> pd.DataFrame:
    return load_examples_tsv(examples_path(data))


def load_features(path: Optional[Path]) -> Optional[Tuple[Tuple[str, ...], np.ndarray]]:
    return load_item_vectors(path) if path is not None else None
