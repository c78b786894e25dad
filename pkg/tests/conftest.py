"""
Shared fixtures for the test suite.
"""
import numpy as np
import pytest

from core.config.models import EditConfig, ExperimentConfig, TrainConfig
from core.regions.types import Region, RegionSet
from tests.helpers import unit


@pytest.fixture(autouse=True)
def isolated_logs(tmp_path, monkeypatch):
    """Send JSONL logs to a per-test directory."""
    log_dir = tmp_path / "logs"
    monkeypatch.setenv("RAIE_LOG_DIR", str(log_dir))
    return log_dir


@pytest.fixture
def edit_config() -> EditConfig:
    return EditConfig(buffer_threshold=4, k_add=1)


@pytest.fixture
def axis_regions(edit_config) -> RegionSet:
    """Three regions centred on the coordinate axes of R^3."""
    regions = (
        Region(id=0, center=unit(1, 0, 0), radius=0.3, member_count=10),
        Region(id=1, center=unit(0, 1, 0), radius=0.3, member_count=10),
        Region(id=2, center=unit(0, 0, 1), radius=0.3, member_count=10),
    )
    return RegionSet(regions=regions, dim=3, config=edit_config)


@pytest.fixture
def tiny_experiment_config() -> ExperimentConfig:
    """Small, fast configuration for end-to-end tests."""
    return ExperimentConfig(
        k_regions=2,
        dim=8,
        eval_cutoff=3,
        kmeans_restarts=2,
        repair_steps=5,
        seed=7,
        threads=1,
        edit=EditConfig(buffer_threshold=4, k_add=1),
        train=TrainConfig(setup_epochs=2, finetune_epochs=1, batch_size=16, learning_rate=0.01, seed=7),
    )
