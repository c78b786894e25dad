"""
Tests for ingestion, filtering, the temporal split and window construction.
"""
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.data import (
    FINETUNE,
    SETUP,
    TEST,
    binarize,
    ingest,
    k_core_filter,
    load_examples_tsv,
    process_events,
    run_ingest_pipeline,
    save_examples_tsv,
    save_pipeline_outputs,
    segment_windows,
    temporal_split,
)
from core.exceptions import EmptyEventsError, UnknownFormatError, UnreadableInputError


def _events(rows):
    return pd.DataFrame(rows, columns=["user", "item", "rating", "timestamp"]).astype(
        {"user": str, "item": str, "rating": float, "timestamp": "int64"}
    )


def test_ingest_movielens_skips_malformed(tmp_path):
    path = tmp_path / "ratings.dat"
    path.write_text("1::10::5::100\n1::11::3::101\nnot a rating\n2::10::4::-5\n2::12::x::9\n\n2::10::4::99\n")
    result = ingest(path, "movielens")
    assert result.skipped == 3
    assert result.skipped_lines == (3, 4, 5)
    assert result.events["item"].tolist() == ["10", "11", "10"]
    assert result.events["timestamp"].tolist() == [100, 101, 99]


def test_ingest_tsv_with_header(tmp_path):
    path = tmp_path / "log.tsv"
    path.write_text("user\titem\trating\ttimestamp\nu1\ti1\t4.5\t7\nu1\ti2\t1\n")
    result = ingest(path, "tsv")
    assert len(result.events) == 1
    assert result.skipped_lines == (3,)
    assert result.events.loc[0, "rating"] == 4.5


def test_ingest_errors(tmp_path):
    with pytest.raises(UnknownFormatError):
        ingest(tmp_path / "x", "csv")
    with pytest.raises(UnreadableInputError):
        ingest(tmp_path / "missing.dat", "movielens")


def test_binarize_threshold():
    events = _events([("u", "a", 5, 1), ("u", "b", 3.9, 2), ("u", "c", 4, 3)])
    assert binarize(events, 4.0)["item"].tolist() == ["a", "c"]


def test_k_core_prunes_iteratively():
    """Dropping item c leaves user v below k, so v goes too."""
    events = _events([
        ("u", "a", 5, 1), ("u", "b", 5, 2),
        ("w", "a", 5, 3), ("w", "b", 5, 4),
        ("v", "c", 5, 5), ("v", "a", 5, 6),
    ])
    kept = k_core_filter(events, 2)
    assert sorted(kept["user"].unique()) == ["u", "w"]
    assert sorted(kept["item"].unique()) == ["a", "b"]
    with pytest.raises(ValueError):
        k_core_filter(events, 0)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=60),
    st.integers(1, 4),
)
def test_k_core_is_idempotent(pairs, k):
    events = _events([(f"u{u}", f"i{i}", 5.0, t) for t, (u, i) in enumerate(pairs)])
    once = k_core_filter(events, k)
    assert k_core_filter(once, k).equals(once)
    if not once.empty:
        assert once.groupby("user").size().min() >= k
        assert once.groupby("item").size().min() >= k


def test_temporal_split_nearest_rank():
    events = _events([("u", f"i{t}", 5, t) for t in range(1, 11)])
    split, tagged = temporal_split(events, 0.6, 0.8)
    assert (split.t_s, split.t_f) == (6, 8)
    assert tagged["phase"].tolist() == [SETUP] * 5 + [FINETUNE] * 2 + [TEST] * 3
    assert split.phase_of(7) == FINETUNE


def test_temporal_split_errors():
    with pytest.raises(EmptyEventsError):
        temporal_split(_events([]))
    with pytest.raises(ValueError):
        temporal_split(_events([("u", "a", 5, 1)]), 0.8, 0.5)


def _tagged(rows):
    frame = pd.DataFrame(rows, columns=["user", "item", "timestamp", "phase"])
    frame["rating"] = 5.0
    return frame


def test_windows_are_right_aligned():
    tagged = _tagged([("a", f"x{t}", t, SETUP) for t in range(1, 5)])
    windows = segment_windows(tagged, window_length=2, stride=1)
    assert windows["context"].tolist() == [("x1",), ("x1", "x2"), ("x2", "x3")]
    assert windows["target"].tolist() == ["x2", "x3", "x4"]


def test_windows_respect_stride():
    tagged = _tagged([("a", f"x{t}", t, SETUP) for t in range(1, 6)])
    windows = segment_windows(tagged, window_length=5, stride=2)
    assert windows["position"].tolist() == [2, 4]


def test_windows_never_cross_phases():
    tagged = _tagged([
        ("a", "x1", 1, SETUP), ("a", "x2", 2, SETUP),
        ("a", "x3", 3, FINETUNE), ("a", "x4", 4, FINETUNE),
    ])
    windows = segment_windows(tagged, window_length=5)
    assert windows[["phase", "target"]].values.tolist() == [[SETUP, "x2"], [FINETUNE, "x4"]]
    assert windows.loc[1, "context"] == ("x3",)


def test_windows_skip_equal_timestamps():
    """A target never sees an event stamped at its own time."""
    tagged = _tagged([("a", "x1", 5, SETUP), ("a", "x2", 5, SETUP), ("a", "x3", 6, SETUP)])
    windows = segment_windows(tagged, window_length=5)
    assert windows["target"].tolist() == ["x3"]
    assert windows.loc[0, "context"] == ("x1", "x2")


def test_process_events_counts(tmp_path):
    rows = []
    for user in range(4):
        for t in range(10):
            rows.append((f"u{user}", f"i{t % 5}", 5.0 if t % 3 else 2.0, t * 4 + user))
    result = process_events(_events(rows), k_core=2, window_length=3)
    stats = result.stats.set_index("stage")
    assert stats.loc["raw", "interactions"] == 40
    assert stats.loc["binarized", "interactions"] == 24
    assert stats.loc[[SETUP, FINETUNE, TEST], "windows"].sum() == len(result.examples)
    assert set(result.examples["phase"]) <= {SETUP, FINETUNE, TEST}

    paths = save_pipeline_outputs(result, tmp_path)
    loaded = load_examples_tsv(paths["examples"])
    assert loaded["context"].tolist() == result.examples["context"].tolist()
    assert loaded["target"].tolist() == result.examples["target"].tolist()


def test_run_ingest_pipeline(tmp_path):
    path = tmp_path / "ratings.dat"
    lines = [f"{u}::{i}::5::{u * 100 + i}" for u in range(1, 6) for i in range(1, 7)]
    path.write_text("\n".join(lines) + "\nbroken\n")
    result = run_ingest_pipeline(path, "movielens", k_core=5)
    assert result.skipped == 1
    assert len(result.events) == 30


def test_load_examples_requires_columns(tmp_path):
    path = tmp_path / "examples.tsv"
    path.write_text("user\tcontext\n")
    with pytest.raises(UnreadableInputError):
        load_examples_tsv(path)
    frame = pd.DataFrame({"user": ["u"], "phase": ["S"], "context": [("a", "b")], "target": ["c"]})
    assert load_examples_tsv(save_examples_tsv(frame, path)).loc[0, "context"] == ("a", "b")
