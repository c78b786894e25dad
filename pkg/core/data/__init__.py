"""
Core data module: interaction log ingestion, the temporal protocol and the
drift simulator.
"""
from core.data.loader import (
    InputFormat,
    IngestResult,
    ingest,
    load_examples_tsv,
    save_events_tsv,
    save_examples_tsv,
)

from core.data.cleaner import (
    binarize,
    k_core_filter
)

from core.data.splitter import (
    FINETUNE,
    PHASES,
    SETUP,
    TEST,
    TemporalSplit,
    tag_events,
    temporal_split
)

from core.data.windows import segment_windows

from core.data.pipeline import (
    PipelineResult,
    process_events,
    run_ingest_pipeline,
    save_pipeline_outputs
)

from core.data.simulator import (
    DriftKind,
    DriftScenario,
    SimulatedStream,
    generate_stream,
    load_item_vectors,
    load_scenario,
    load_window_labels,
    new_interest_scenario,
    routing_accuracy,
    step_scenario,
    stream_examples,
    window_label,
    window_labels,
    write_simulation
)

__all__ = [
    "InputFormat",
    "IngestResult",
    "ingest",
    "load_examples_tsv",
    "save_events_tsv",
    "save_examples_tsv",
    "binarize",
    "k_core_filter",
    "FINETUNE",
    "PHASES",
    "SETUP",
    "TEST",
    "TemporalSplit",
    "tag_events",
    "temporal_split",
    "segment_windows",
    "PipelineResult",
    "process_events",
    "run_ingest_pipeline",
    "save_pipeline_outputs",
    "DriftKind",
    "DriftScenario",
    "SimulatedStream",
    "generate_stream",
    "load_item_vectors",
    "load_scenario",
    "load_window_labels",
    "new_interest_scenario",
    "routing_accuracy",
    "step_scenario",
    "stream_examples",
    "window_label",
    "window_labels",
    "write_simulation"
]
