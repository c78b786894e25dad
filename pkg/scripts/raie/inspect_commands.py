"""Inspect a saved state: regions, adapter norms and geometry change."""
from pathlib import Path
from typing import Optional

import typer

from core.config.paths import get_reports_dir
from core.experiment.persistence import load_state
from core.experiment.reports import region_geometry_report, write_geometry_tsv
from scripts.raie.common import command_errors
from ui.report_display import display_edit_summary, display_geometry, display_region_set, display_success


def inspect(
    state_dir: Path = typer.Option(..., "--state", "-s", help="State directory"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Directory for geometry TSVs (default: <state>/reports)"),
):
    """Print the region table, adapter norms and the pre/post geometry report."""
    with command_errors("inspect"):
        state = load_state(state_dir)
        reports_dir = out or get_reports_dir(state_dir)
        written = []
        for arm, arm_state in state.arms.items():
            if not arm_state.routes:
                continue
            norms = {rid: adapter.delta_norm() for rid, adapter in arm_state.registry.items()}
            display_region_set(arm_state.region_set, title=f"Regions ({arm.value})", adapter_norms=norms)
            display_edit_summary(arm_state.edit_log, arm.value)
            report = region_geometry_report(arm_state.pre_region_set, arm_state.region_set)
            display_geometry(report, title=f"Region geometry ({arm.value})", adapter_norms=norms)
            written.append(write_geometry_tsv(report, Path(reports_dir) / f"geometry_{arm.value}.tsv", norms))
    for path in written:
        display_success(f"Wrote {path}")
