"""Region-aware incremental editing CLI.

A command-line interface for the set-up, finetune and test phases, the drift
simulator and the data pipeline.
"""
from typing import Optional

import typer

from core.logger import setup_logging
from scripts.raie.data_commands import ingest, simulate
from scripts.raie.experiment_commands import eval_command, finetune, setup, sweep
from scripts.raie.inspect_commands import inspect

# Initialize CLI app
app = typer.Typer(help="Region-aware incremental preference editing", no_args_is_help=True)


@app.callback()
def main(
    log_level: Optional[str] = typer.Option(None, "--log-level", help="Console log level (default: RAIE_LOG_LEVEL)"),
):
    setup_logging(log_level)


# Add commands
app.command(name="ingest", help="Ingest a raw log into window examples")(ingest)
app.command(name="simulate", help="Generate a synthetic drift dataset")(simulate)
app.command(name="setup", help="Train the backbone and build the initial regions")(setup)
app.command(name="finetune", help="Edit regions and train adapters on the finetune split")(finetune)
app.command(name="eval", help="Evaluate every arm and write reports")(eval_command)
app.command(name="sweep", help="Repeat the experiment over values of one config key")(sweep)
app.command(name="inspect", help="Show regions, adapter norms and geometry change")(inspect)


if __name__ == "__main__":
    app()
