"""
UI module for the region editor.
Contains components for displaying reports in the terminal using rich.
"""
from ui.report_display import (
    display_edit_summary,
    display_error,
    display_eval_report,
    display_geometry,
    display_region_set,
    display_stage_stats,
    display_success,
    display_sweep,
)

__all__ = [
    "display_edit_summary",
    "display_error",
    "display_eval_report",
    "display_geometry",
    "display_region_set",
    "display_stage_stats",
    "display_success",
    "display_sweep",
]
