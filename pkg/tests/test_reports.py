"""
Tests for ranking metrics and the evaluation, forgetting and geometry reports.
"""
import math

import numpy as np
import pandas as pd
import pytest

from core.config.models import Arm, EditConfig
from core.exceptions import IdMismatchError, MissingBaselineError
from core.experiment.metrics import SplitMetrics, ndcg_at_k, recall_at_k
from core.experiment.reports import (
    EvalReport,
    build_forgetting_rows,
    geometry_frame,
    metrics_from_kv,
    metrics_to_kv,
    region_geometry_report,
    region_separability,
    set_separability,
    sweep_frame,
    write_geometry_tsv,
)
from core.regions.types import Phase, Region, RegionSet
from tests.helpers import planar


def test_recall_and_ndcg():
    ranked = ["a", "b", "c", "d"]
    assert recall_at_k(ranked, "c", 3) == 1
    assert recall_at_k(ranked, "d", 3) == 0
    assert ndcg_at_k(ranked, "a", 3) == 1.0
    assert ndcg_at_k(ranked, "c", 3) == pytest.approx(1 / math.log2(4))
    assert ndcg_at_k(ranked, "z", 3) == 0.0
    with pytest.raises(ValueError):
        recall_at_k(ranked, "a", 0)


def test_split_metrics_average():
    metrics = SplitMetrics.from_rankings([["a", "b"], ["b", "a"]], ["a", "a"], 2)
    assert metrics.recall == 1.0
    assert metrics.ndcg == pytest.approx((1.0 + 1 / math.log2(3)) / 2)
    assert metrics.count == 2
    assert SplitMetrics.from_rankings([], [], 5).count == 0


def _regions(*specs, phase=Phase.SETUP) -> RegionSet:
    regions = tuple(
        Region(id=rid, center=planar(angle), radius=radius, created_at_phase=phase)
        for rid, angle, radius in specs
    )
    return RegionSet(regions=regions, dim=3, config=EditConfig())


def test_separability_margins():
    region_set = _regions((0, 0.0, 0.1), (1, 1.0, 0.2), (2, 2.0, 0.3))
    per_region = region_separability(region_set)
    assert per_region[0] == pytest.approx(((1.0 - 0.3) + (2.0 - 0.4)) / 2)
    assert set_separability(region_set) == pytest.approx(((1.0 - 0.3) + (2.0 - 0.4) + (1.0 - 0.5)) / 3)
    assert set_separability(_regions((0, 0.0, 0.1))) is None
    assert region_separability(_regions((0, 0.0, 0.1))) == {0: None}


def test_geometry_report_rows():
    pre = _regions((0, 0.0, 0.2), (1, 1.5, 0.0))
    post = RegionSet(
        regions=(
            Region(id=0, center=planar(0.1), radius=0.4),
            Region(id=1, center=planar(1.5), radius=0.1),
            Region(id=2, center=planar(3.0), radius=0.3, created_at_phase=Phase.FINETUNE),
        ),
        dim=3,
        config=EditConfig(),
    )
    report = region_geometry_report(pre, post)
    kept, zero_radius, added = report.rows
    assert kept.displacement == pytest.approx(0.1)
    assert kept.area_change_pct == pytest.approx(300.0)
    assert zero_radius.area_change_pct is None
    assert added.status == "added" and added.displacement is None
    frame = geometry_frame(report)
    assert frame["area_change_pct"].tolist() == ["300.000000", "new", "new"]
    assert report.set_separability_pre == pytest.approx(1.5 - 0.2)


def test_geometry_report_requires_surviving_ids():
    with pytest.raises(IdMismatchError):
        region_geometry_report(_regions((0, 0.0, 0.1), (1, 1.0, 0.1)), _regions((0, 0.0, 0.1)))


def test_write_geometry_with_adapter_norms(tmp_path):
    report = region_geometry_report(_regions((0, 0.0, 0.1)), _regions((0, 0.0, 0.1)))
    path = write_geometry_tsv(report, tmp_path / "geometry.tsv", adapter_norms={0: 0.25})
    frame = pd.read_csv(path, sep="\t", dtype=str)
    assert frame.loc[0, "adapter_delta_norm"] == "0.250000"
    assert frame.loc[0, "separability_pre"] == "n/a"


def test_forgetting_rows():
    baseline = {Arm.RAIE: {"recall": 0.5, "ndcg": 0.4}}
    rows = build_forgetting_rows(baseline, {Arm.RAIE: SplitMetrics(recall=0.45, ndcg=0.42, count=10)})
    assert rows[0].recall_delta == pytest.approx(-0.05)
    assert rows[0].ndcg_delta == pytest.approx(0.02)
    with pytest.raises(MissingBaselineError):
        build_forgetting_rows(None, {Arm.RAIE: SplitMetrics(0.0, 0.0, 0)})
    with pytest.raises(MissingBaselineError):
        build_forgetting_rows(baseline, {Arm.REPLAY: SplitMetrics(0.0, 0.0, 0)})


def test_eval_report_files_are_deterministic(tmp_path):
    report = EvalReport(cutoff=10, wall_clock_seconds=3.5)
    report.add(Arm.FROZEN_BASE, "T", SplitMetrics(recall=0.25, ndcg=0.125, count=8))
    report.add(Arm.RAIE, "T", SplitMetrics(recall=0.5, ndcg=0.25, count=8))
    paths = report.write(tmp_path)
    kv = paths["kv"].read_text(encoding="utf-8")
    assert kv.splitlines()[0] == "frozen_base.T.count = 8"
    assert "raie.T.recall_at_10 = 0.5000000000" in kv
    assert "3.5" not in paths["text"].read_text(encoding="utf-8")
    first = paths["text"].read_bytes()
    report.write(tmp_path)
    assert paths["text"].read_bytes() == first


def test_baseline_kv_round_trip():
    metrics = {Arm.RAIE: {"recall": 1 / 3, "ndcg": 0.2}, Arm.REPLAY: {"recall": 0.0, "ndcg": 0.0}}
    assert metrics_from_kv(metrics_to_kv(metrics)) == metrics


def test_sweep_frame():
    report = EvalReport(cutoff=5)
    report.add(Arm.RAIE, "S", SplitMetrics(0.1, 0.05, 3))
    report.add(Arm.RAIE, "T", SplitMetrics(0.2, 0.1, 3))
    frame = sweep_frame([("k_regions", "2", report)])
    assert frame.loc[0, "value"] == "2"
    assert frame.loc[0, "T_recall_at_5"] == "0.2000000000"


def test_random_ranking_recall_is_chance():
    rng = np.random.default_rng(0)
    vocab_size, k, trials = 50, 10, 10_000
    rankings = [rng.permutation(vocab_size).tolist() for _ in range(trials)]
    targets = rng.integers(vocab_size, size=trials).tolist()
    recall = SplitMetrics.from_rankings(rankings, targets, k).recall
    chance = k / vocab_size
    sigma = math.sqrt(chance * (1 - chance) / trials)
    assert abs(recall - chance) <= 3 * sigma
