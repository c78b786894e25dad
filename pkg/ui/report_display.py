"""
UI components for pipeline statistics, evaluation reports and region state.
Uses rich library for terminal output.
"""
from collections import Counter
from typing import Dict, Optional, Sequence

import pandas as pd
from rich.panel import Panel
from rich.table import Table

from core.config.console import console
from core.experiment.reports import EvalReport, GeometryReport, geometry_frame
from core.experiment.state import EditLogEntry
from core.regions.types import RegionSet


def _fmt(value: Optional[float], digits: int = 4) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def display_stage_stats(stats: pd.DataFrame, title: str = "Dataset statistics") -> None:
    """
    Display users/items/interactions per processing stage.

    Args:
        stats (pd.DataFrame): Rows with stage, users, items, interactions, windows
        title (str): Table title
    """
    table = Table(title=title)
    table.add_column("Stage", style="cyan")
    table.add_column("Users", justify="right")
    table.add_column("Items", justify="right")
    table.add_column("Interactions", justify="right", style="green")
    table.add_column("Windows", justify="right", style="magenta")
    for row in stats.itertuples(index=False):
        table.add_row(str(row.stage), str(row.users), str(row.items), str(row.interactions), str(row.windows))
    console.print(table)


def display_eval_report(report: EvalReport) -> None:
    """Display metrics per arm and split, then forgetting and geometry sections."""
    k = report.cutoff
    table = Table(title=f"Evaluation (cutoff {k})")
    table.add_column("Arm", style="arm")
    table.add_column("Split", style="cyan")
    table.add_column("Windows", justify="right")
    table.add_column(f"Recall@{k}", justify="right", style="metric")
    table.add_column(f"NDCG@{k}", justify="right", style="metric")
    for arm, splits in report.metrics.items():
        for split in sorted(splits):
            m = splits[split]
            table.add_row(arm.value, split, str(m.count), f"{m.recall:.4f}", f"{m.ndcg:.4f}")
    console.print(table)

    if report.forgetting:
        forgetting = Table(title="Forgetting on the set-up split")
        forgetting.add_column("Arm", style="arm")
        forgetting.add_column("Recall before", justify="right")
        forgetting.add_column("Recall after", justify="right")
        forgetting.add_column("Delta", justify="right")
        forgetting.add_column("NDCG before", justify="right")
        forgetting.add_column("NDCG after", justify="right")
        forgetting.add_column("Delta", justify="right")
        for row in report.forgetting:
            style = "error" if row.recall_delta < 0 else "success"
            forgetting.add_row(
                row.arm.value,
                f"{row.recall_before:.4f}", f"{row.recall_after:.4f}",
                f"[{style}]{row.recall_delta:+.4f}[/{style}]",
                f"{row.ndcg_before:.4f}", f"{row.ndcg_after:.4f}", f"{row.ndcg_delta:+.4f}",
            )
        console.print(forgetting)

    for arm, geometry in report.geometry.items():
        display_geometry(geometry, title=f"Region geometry ({arm.value})")

    if report.wall_clock_seconds is not None:
        console.print(f"[dim]Evaluated in {report.wall_clock_seconds:.2f} seconds[/dim]")


def display_geometry(
    geometry: GeometryReport,
    title: str = "Region geometry",
    adapter_norms: Optional[Dict[int, float]] = None,
) -> None:
    """Display displacement, area change and separability per region."""
    frame = geometry_frame(geometry)
    table = Table(title=title)
    for column in frame.columns:
        table.add_column(column, justify="right" if column != "status" else "left")
    if adapter_norms is not None:
        table.add_column("adapter_delta_norm", justify="right", style="region")
    for record in frame.itertuples(index=False):
        cells = [str(value) for value in record]
        if adapter_norms is not None:
            cells.append(_fmt(adapter_norms.get(int(record.region_id))))
        table.add_row(*cells)
    console.print(table)
    console.print(
        f"Set separability: {_fmt(geometry.set_separability_pre)} -> "
        f"{_fmt(geometry.set_separability_post)}"
    )


def display_region_set(
    region_set: RegionSet,
    title: str = "Regions",
    adapter_norms: Optional[Dict[int, float]] = None,
) -> None:
    """Display one row per region with its radius, counters and adapter norm."""
    table = Table(title=title)
    table.add_column("Id", style="region", justify="right")
    table.add_column("Radius", justify="right")
    table.add_column("Edits", justify="right")
    table.add_column("Members", justify="right")
    table.add_column("Created", style="cyan")
    table.add_column("Adapter |dW|", justify="right", style="metric")
    for region in region_set.regions:
        norm = adapter_norms.get(region.id) if adapter_norms else None
        table.add_row(
            str(region.id), f"{region.radius:.4f}", str(region.edit_count),
            str(region.member_count), region.created_at_phase.value, _fmt(norm),
        )
    console.print(table)
    console.print(f"[info]Buffered vectors:[/info] {region_set.buffer.size}")


def display_edit_summary(entries: Sequence[EditLogEntry], arm: str) -> None:
    """Display how many finetune windows took each edit action."""
    if not entries:
        console.print(f"[dim]No edit decisions recorded for {arm}[/dim]")
        return
    counts = Counter(entry.action.value for entry in entries)
    lines = [f"{action}: {counts[action]}" for action in sorted(counts)]
    console.print(Panel.fit("\n".join(lines), title=f"Edit decisions ({arm})", border_style="blue"))


def display_sweep(frame: pd.DataFrame, title: str = "Sweep") -> None:
    table = Table(title=title)
    for column in frame.columns:
        table.add_column(str(column), justify="right" if column not in ("param", "arm") else "left")
    for record in frame.itertuples(index=False):
        table.add_row(*[str(value) for value in record])
    console.print(table)


def display_error(message: str) -> None:
    console.print(f"[error]Error:[/error] {message}")


def display_success(message: str) -> None:
    console.print(f"[success]{message}[/success]")
