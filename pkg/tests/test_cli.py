"""
Tests for the raie command-line interface.
"""
import pandas as pd
import pytest
from typer.testing import CliRunner

from core.config.paths import (
    BASELINE_FILE,
    CONFIG_FILE,
    EXAMPLES_FILE,
    ITEM_VECTORS_FILE,
    WINDOW_LABELS_FILE,
    get_reports_dir,
)
from scripts.raie.experiment_commands import SWEEP_FILE
from scripts.raie.main import app

runner = CliRunner()

TINY_CONFIG = """\
# small and fast
k_regions = 2
dim = 8
window_length = 3
eval_cutoff = 3
kmeans_restarts = 2
repair_steps = 5
setup_epochs = 1
finetune_epochs = 1
batch_size = 32
buffer_threshold = 4
threads = 1
"""


@pytest.fixture
def workspace(tmp_path):
    config = tmp_path / "tiny.kv"
    config.write_text(TINY_CONFIG, encoding="utf-8")
    data = tmp_path / "data"
    result = runner.invoke(
        app,
        ["simulate", "--out", str(data), "--preset", "step", "--seed", "3", "--config", str(config)],
    )
    assert result.exit_code == 0, result.output
    return tmp_path, config, data


def test_simulate_writes_dataset(workspace):
    _, _, data = workspace
    for name in (EXAMPLES_FILE, ITEM_VECTORS_FILE, WINDOW_LABELS_FILE):
        assert (data / name).exists()
    examples = pd.read_csv(data / EXAMPLES_FILE, sep="\t")
    labels = pd.read_csv(data / WINDOW_LABELS_FILE, sep="\t")
    assert len(examples) == len(labels)
    assert set(examples["phase"]) == {"S", "F", "T"}


def test_full_pipeline(workspace):
    """Test simulate, setup, finetune, eval and inspect in sequence."""
    root, config, data = workspace
    state = root / "state"

    result = runner.invoke(app, [
        "setup", "--data", str(data), "--out-state", str(state), "--config", str(config),
        "--item-vectors", str(data / ITEM_VECTORS_FILE), "--seed", "5",
    ])
    assert result.exit_code == 0, result.output
    assert (state / CONFIG_FILE).exists()
    assert "seed = 5" in (state / CONFIG_FILE).read_text(encoding="utf-8")

    result = runner.invoke(app, ["finetune", "--state", str(state), "--data", str(data), "--threads", "2"])
    assert result.exit_code == 0, result.output
    assert (state / BASELINE_FILE).exists()

    result = runner.invoke(app, ["eval", "--state", str(state), "--data", str(data), "--split", "all"])
    assert result.exit_code == 0, result.output
    kv = (get_reports_dir(state) / "eval_report.kv").read_text(encoding="utf-8")
    assert "raie.T.recall_at_3" in kv
    assert "frozen_base.forgetting.recall_delta = 0.0000000000" in kv

    result = runner.invoke(app, ["inspect", "--state", str(state)])
    assert result.exit_code == 0, result.output
    assert (get_reports_dir(state) / "geometry_raie.tsv").exists()


def test_eval_selected_arm_and_split(workspace):
    root, config, data = workspace
    state = root / "state"
    runner.invoke(app, ["setup", "--data", str(data), "--out-state", str(state), "--config", str(config)])
    out = root / "reports"
    result = runner.invoke(app, [
        "eval", "--state", str(state), "--data", str(data), "--split", "T",
        "--arms", "frozen_base", "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    kv = (out / "eval_report.kv").read_text(encoding="utf-8")
    assert "frozen_base.T.count" in kv
    assert "raie." not in kv
    assert "forgetting" not in kv

    result = runner.invoke(app, ["eval", "--state", str(state), "--data", str(data), "--split", "X"])
    assert result.exit_code == 2


def test_sweep_over_regions(workspace):
    root, config, data = workspace
    out = root / "sweep"
    result = runner.invoke(app, [
        "sweep", "--data", str(data), "--param", "K", "--values", "1..2", "--out", str(out),
        "--config", str(config), "--set", "arms=raie,frozen_base",
    ])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out / SWEEP_FILE, sep="\t")
    assert frame["value"].tolist() == [1, 1, 2, 2]
    assert set(frame["arm"]) == {"raie", "frozen_base"}


def test_invalid_format_is_a_usage_error(tmp_path):
    log = tmp_path / "log.tsv"
    log.write_text("u\ti\t5\t1\n", encoding="utf-8")
    result = runner.invoke(app, ["ingest", "--input", str(log), "--format", "csv", "--out", str(tmp_path / "o")])
    assert result.exit_code == 2


def test_ingest_command(tmp_path):
    log = tmp_path / "ratings.dat"
    lines = [f"{u}::{i}::5::{u * 100 + i}" for u in range(1, 7) for i in range(1, 8)]
    log.write_text("\n".join(lines) + "\n1::2::oops::3\n", encoding="utf-8")
    out = tmp_path / "data"
    result = runner.invoke(app, ["ingest", "--input", str(log), "--format", "movielens", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "Skipped 1 malformed line" in result.output
    assert (out / EXAMPLES_FILE).exists()


def test_missing_state_fails(tmp_path):
    result = runner.invoke(app, ["finetune", "--state", str(tmp_path / "nope"), "--data", str(tmp_path)])
    assert result.exit_code == 1


def test_bad_overrides_are_usage_errors(workspace):
    root, _, data = workspace
    result = runner.invoke(app, [
        "setup", "--data", str(data), "--out-state", str(root / "s"), "--set", "no_such_key=1",
    ])
    assert result.exit_code == 2
    assert not (root / "s").exists()
