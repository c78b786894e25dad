"""
Experiment orchestration: set-up, finetune and test phases, comparison arms,
metrics, reports and the on-disk state directory.
"""
from core.experiment.metrics import SplitMetrics, ndcg_at_k, recall_at_k
from core.experiment.persistence import load_edit_log, load_state, save_edit_log, save_state
from core.experiment.reports import (
    EvalReport,
    ForgettingRow,
    GeometryReport,
    GeometryRow,
    region_geometry_report,
    set_separability,
    sweep_frame,
    write_geometry_tsv,
)
from core.experiment.runner import (
    ExperimentOutcome,
    evaluate,
    evaluate_split,
    forgetting_report,
    route_vectors,
    run_experiment,
    run_finetune,
    run_inference,
    run_setup,
    split_by_phase,
)
from core.experiment.state import (
    ArmState,
    EditLogEntry,
    EncodedExamples,
    ExperimentState,
    encode_examples,
)

__all__ = [
    "SplitMetrics",
    "ndcg_at_k",
    "recall_at_k",
    "load_edit_log",
    "load_state",
    "save_edit_log",
    "save_state",
    "EvalReport",
    "ForgettingRow",
    "GeometryReport",
    "GeometryRow",
    "region_geometry_report",
    "set_separability",
    "sweep_frame",
    "write_geometry_tsv",
    "ExperimentOutcome",
    "evaluate",
    "evaluate_split",
    "forgetting_report",
    "route_vectors",
    "run_experiment",
    "run_finetune",
    "run_inference",
    "run_setup",
    "split_by_phase",
    "ArmState",
    "EditLogEntry",
    "EncodedExamples",
    "ExperimentState",
    "encode_examples",
]
