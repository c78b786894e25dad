"""Dataset commands: ingest a raw log, generate a drift simulation."""
from pathlib import Path
from typing import List, Optional

import typer

from core.config.constants import (
    DEFAULT_BINARIZE_THRESHOLD,
    DEFAULT_K_CORE,
    DEFAULT_Q_F,
    DEFAULT_Q_S,
)
from core.config.paths import STATS_FILE
from core.data.loader import InputFormat
from core.data.pipeline import run_ingest_pipeline, save_pipeline_outputs
from core.data.simulator import PRESETS, generate_stream, load_scenario, stream_examples, write_simulation
from core.exceptions import ConfigError
from scripts.raie.common import ConfigOption, SeedOption, SetOption, command_errors, load_config
from ui.report_display import display_stage_stats, display_success


def ingest(
    input_path: Path = typer.Option(..., "--input", "-i", help="Raw interaction log"),
    fmt: InputFormat = typer.Option(..., "--format", "-f", help="Input format"),
    out: Path = typer.Option(..., "--out", "-o", help="Output dataset directory"),
    binarize_threshold: float = typer.Option(
        DEFAULT_BINARIZE_THRESHOLD, "--binarize-threshold", help="Ratings at or above this are positive"
    ),
    k_core: int = typer.Option(DEFAULT_K_CORE, "--k-core", help="Minimum interactions per user and item"),
    qs: float = typer.Option(DEFAULT_Q_S, "--qs", help="Timestamp quantile ending the set-up segment"),
    qf: float = typer.Option(DEFAULT_Q_F, "--qf", help="Timestamp quantile ending the finetune segment"),
    config: Optional[Path] = ConfigOption,
    overrides: Optional[List[str]] = SetOption,
):
    """Parse a log, binarize, k-core filter, split in time and cut windows."""
    with command_errors("ingest"):
        cfg = load_config(config, overrides)
        result = run_ingest_pipeline(
            input_path, fmt,
            binarize_threshold=binarize_threshold, k_core=k_core, q_s=qs, q_f=qf,
            window_length=cfg.window_length, stride=cfg.stride,
        )
        paths = save_pipeline_outputs(result, out)
    display_stage_stats(result.stats)
    if result.skipped:
        typer.echo(f"Skipped {result.skipped} malformed line(s)")
    display_success(f"Wrote {len(result.examples)} examples to {paths['examples']}")


def simulate(
    out: Path = typer.Option(..., "--out", "-o", help="Output dataset directory"),
    scenario: Optional[Path] = typer.Option(None, "--scenario", help="Scenario file ('key = value')"),
    preset: str = typer.Option("step", "--preset", help=f"Scenario preset: {', '.join(PRESETS)}"),
    seed: Optional[int] = SeedOption,
    config: Optional[Path] = ConfigOption,
    overrides: Optional[List[str]] = SetOption,
):
    """Generate a synthetic drift stream with ground-truth interest labels."""
    with command_errors("simulate"):
        cfg = load_config(config, overrides)
        if scenario is not None:
            chosen = load_scenario(scenario, seed=seed)
        else:
            if preset not in PRESETS:
                raise ConfigError(f"unknown scenario preset {preset!r}")
            chosen = PRESETS[preset](seed=seed or 0, dim=cfg.dim)
        stream = generate_stream(chosen)
        result = stream_examples(stream, window_length=cfg.window_length, stride=cfg.stride)
        paths = write_simulation(stream, result.examples, out)
        result.stats.to_csv(Path(out) / STATS_FILE, sep="\t", index=False, lineterminator="\n")
    display_stage_stats(result.stats, title="Simulated dataset")
    display_success(f"Wrote {len(stream.events)} events and {len(result.examples)} examples to {paths['events'].parent}")
