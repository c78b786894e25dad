"""Experiment commands: set-up, finetune, evaluation and parameter sweeps."""
from pathlib import Path
from typing import List, Optional

import typer

from core.config.models import Arm
from core.config.paths import get_reports_dir
from core.config.utils import parse_value_range
from core.data.splitter import FINETUNE, SETUP, TEST
from core.exceptions import ConfigError
from core.experiment.persistence import load_state, save_state
from core.experiment.reports import sweep_frame
from core.experiment.runner import evaluate, run_experiment, run_finetune, run_setup, split_by_phase
from core.model.vocab import ItemVocab
from scripts.raie.common import (
    ConfigOption,
    SeedOption,
    SetOption,
    ThreadsOption,
    command_errors,
    load_config,
    load_examples,
    load_features,
)
from ui.report_display import display_edit_summary, display_eval_report, display_success, display_sweep

SWEEP_FILE = "sweep.tsv"


def _vocab_for(examples) -> ItemVocab:
    items = []
    for context, target in zip(examples["context"], examples["target"]):
        items.extend(context)
        items.append(target)
    return ItemVocab.from_items(items)


def setup(
    data: Path = typer.Option(..., "--data", "-d", help="Dataset directory or examples file"),
    out_state: Path = typer.Option(..., "--out-state", help="State directory to create"),
    item_vectors: Optional[Path] = typer.Option(
        None, "--item-vectors", help="Item feature vectors used to initialise the embeddings"
    ),
    config: Optional[Path] = ConfigOption,
    overrides: Optional[List[str]] = SetOption,
    seed: Optional[int] = SeedOption,
    threads: Optional[int] = ThreadsOption,
):
    """Train and freeze the backbone on the set-up split and build the regions."""
    with command_errors("setup"):
        cfg = load_config(config, overrides, seed)
        if threads is not None:
            cfg = cfg.model_copy(update={"threads": threads})
        examples = load_examples(data)
        phases = split_by_phase(examples)
        state = run_setup(phases[SETUP], cfg, vocab=_vocab_for(examples), item_features=load_features(item_vectors))
        save_state(state, out_state)
    display_success(f"Set-up built {len(state.region_set)} regions; state saved to {out_state}")


def finetune(
    state_dir: Path = typer.Option(..., "--state", "-s", help="State directory written by setup"),
    data: Path = typer.Option(..., "--data", "-d", help="Dataset directory or examples file"),
    config: Optional[Path] = ConfigOption,
    overrides: Optional[List[str]] = SetOption,
    seed: Optional[int] = SeedOption,
    threads: Optional[int] = ThreadsOption,
):
    """Edit regions with the finetune stream and train every arm's adapters."""
    with command_errors("finetune"):
        state = load_state(state_dir)
        if config is not None or overrides or seed is not None:
            state.config = load_config(config, overrides, seed, base=state.config)
        examples = load_examples(data)
        run_finetune(split_by_phase(examples)[FINETUNE], state, threads=threads)
        save_state(state, state_dir)
    for arm, arm_state in state.arms.items():
        if arm_state.routes and arm is Arm.RAIE:
            display_edit_summary(arm_state.edit_log, arm.value)
    display_success(f"Finetune complete; state saved to {state_dir}")


def eval_command(
    state_dir: Path = typer.Option(..., "--state", "-s", help="State directory"),
    data: Path = typer.Option(..., "--data", "-d", help="Dataset directory or examples file"),
    split: str = typer.Option("all", "--split", help="S, T or all"),
    arms: Optional[str] = typer.Option(None, "--arms", help="Comma-separated arms (default: all in state)"),
    config: Optional[Path] = ConfigOption,
    overrides: Optional[List[str]] = SetOption,
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Report directory (default: <state>/reports)"),
):
    """Evaluate arms with Recall@k and NDCG@k and write the report files."""
    with command_errors("eval"):
        state = load_state(state_dir)
        if config is not None or overrides:
            state.config = load_config(config, overrides, base=state.config)
        phases = split_by_phase(load_examples(data))
        if split == "all":
            chosen = {SETUP: phases[SETUP], TEST: phases[TEST]}
        elif split in (SETUP, TEST):
            chosen = {split: phases[split]}
        else:
            raise ConfigError(f"--split must be S, T or all, got {split!r}")
        arm_list = None
        if arms:
            try:
                arm_list = [Arm(a.strip()) for a in arms.split(",") if a.strip()]
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            missing = [a.value for a in arm_list if a not in state.arms]
            if missing:
                raise ConfigError(f"arm(s) not in this state: {', '.join(missing)}")
        report = evaluate(state, chosen, arm_list)
        report.write(out or get_reports_dir(state_dir))
    display_eval_report(report)


def sweep(
    data: Path = typer.Option(..., "--data", "-d", help="Dataset directory or examples file"),
    param: str = typer.Option(..., "--param", help="Config key to vary (K is k_regions)"),
    values: str = typer.Option(..., "--values", help="Values, e.g. '1..8' or '0.3,0.4,0.5'"),
    out: Path = typer.Option(..., "--out", "-o", help="Directory for sweep.tsv"),
    item_vectors: Optional[Path] = typer.Option(None, "--item-vectors", help="Item feature vectors"),
    config: Optional[Path] = ConfigOption,
    overrides: Optional[List[str]] = SetOption,
    seed: Optional[int] = SeedOption,
    threads: Optional[int] = ThreadsOption,
):
    """Run the whole experiment once per value of one config key."""
    with command_errors("sweep"):
        examples = load_examples(data)
        features = load_features(item_vectors)
        rows = []
        for value in parse_value_range(values):
            cfg = load_config(config, list(overrides or []) + [f"{param}={value}"], seed)
            outcome = run_experiment(examples, cfg, item_features=features, threads=threads)
            rows.append((param, value, outcome.report))
        frame = sweep_frame(rows)
        out.mkdir(parents=True, exist_ok=True)
        frame.to_csv(out / SWEEP_FILE, sep="\t", index=False, lineterminator="\n")
    display_sweep(frame, title=f"Sweep over {param}")
    display_success(f"Wrote {len(rows)} sweep point(s) to {out / SWEEP_FILE}")
