"""
Tests for backbone and adapter training and top-k prediction.
"""
import numpy as np
import pytest
import torch

from core.config.models import AdapterConfig, TrainConfig
from core.exceptions import (
    AlreadyFrozenError,
    EmptyRegionDataError,
    FrozenViolationError,
    KExceedsVocabError,
)
from core.model.adapter import AdapterRegistry, LowRankAdapter
from core.model.backbone import Backbone
from core.model.training import (
    ExampleTensors,
    adapter_gradients,
    iter_mixed_batches,
    next_item_loss,
    predict_topk,
    predict_topk_batch,
    predictive_distribution,
    topk_from_logits,
    train_adapters_parallel,
    train_region_adapter,
    train_setup_backbone,
)

NUM_ITEMS = 8


def _successor_examples(count: int = 160) -> ExampleTensors:
    """Item i is always followed by item i + 1 (wrapping)."""
    windows, targets = [], []
    for row in range(count):
        current = row % NUM_ITEMS + 1
        windows.append([current])
        targets.append(current % NUM_ITEMS + 1)
    return ExampleTensors.from_lists(windows, targets)


def _config(**overrides) -> TrainConfig:
    values = dict(setup_epochs=30, finetune_epochs=3, batch_size=16, learning_rate=0.05, seed=0)
    values.update(overrides)
    return TrainConfig(**values)


@pytest.fixture(scope="module")
def trained_backbone() -> Backbone:
    backbone = Backbone(NUM_ITEMS, dim=8, seed=0)
    train_setup_backbone(backbone, _successor_examples(), _config())
    return backbone


def test_setup_training_learns_and_freezes():
    backbone = Backbone(NUM_ITEMS, dim=8, seed=0)
    result = train_setup_backbone(backbone, _successor_examples(), _config())
    assert backbone.frozen
    assert result.epochs == 30
    assert result.epoch_losses[-1] < result.epoch_losses[0]
    hits = sum(predict_topk(backbone, None, [i], 1)[0] == i % NUM_ITEMS + 1 for i in range(1, NUM_ITEMS + 1))
    assert hits >= NUM_ITEMS - 1


def test_setup_training_rejects_frozen_backbone(trained_backbone):
    with pytest.raises(AlreadyFrozenError):
        train_setup_backbone(trained_backbone, _successor_examples(), _config())


def test_adapter_training_leaves_backbone_untouched(trained_backbone):
    """Test that only A and B of the trained adapter change."""
    registry = AdapterRegistry(dim=8, config=AdapterConfig(lora_rank=2, lora_alpha=4), base_seed=0)
    trained = registry.create(0)
    bystander = registry.create(1)
    base_sum = trained_backbone.checksum()
    bystander_sum = bystander.checksum()
    before = trained.checksum()

    shifted = ExampleTensors.from_lists([[i] for i in range(1, NUM_ITEMS + 1)], [1] * NUM_ITEMS)
    result = train_region_adapter(trained_backbone, trained, shifted, ExampleTensors.empty(), _config())

    assert result.steps > 0
    assert trained_backbone.checksum() == base_sum
    assert bystander.checksum() == bystander_sum
    assert trained.checksum() != before
    assert not trained.training


def test_adapter_training_needs_frozen_backbone():
    backbone = Backbone(NUM_ITEMS, dim=4)
    adapter = LowRankAdapter(0, dim=4, rank=2, scale=1.0)
    with pytest.raises(FrozenViolationError):
        train_region_adapter(backbone, adapter, _successor_examples(8), ExampleTensors.empty(), _config())


def test_adapter_gradients_flow_only_into_factors(trained_backbone):
    adapter = LowRankAdapter(0, dim=8, rank=2, scale=1.0, seed=2)
    batch = _successor_examples(8)
    loss, grad_a, grad_b = adapter_gradients(trained_backbone, adapter, batch.contexts, batch.targets)
    assert loss > 0.0
    assert torch.count_nonzero(grad_a) == 0  # B is zero, so dL/dA vanishes
    assert torch.count_nonzero(grad_b) > 0


def test_empty_region_is_skipped(trained_backbone):
    registry = AdapterRegistry(dim=8, config=AdapterConfig(), base_seed=0)
    registry.create(0)
    registry.create(1)
    before = registry[1].checksum()
    with pytest.raises(EmptyRegionDataError):
        train_region_adapter(
            trained_backbone, registry[1], ExampleTensors.empty(), ExampleTensors.empty(), _config()
        )
    results = train_adapters_parallel(
        trained_backbone,
        registry,
        {0: (_successor_examples(16), ExampleTensors.empty()), 1: (ExampleTensors.empty(), ExampleTensors.empty())},
        _config(finetune_epochs=1),
        threads=2,
    )
    assert results[1] is None
    assert results[0].epochs == 1
    assert registry[1].checksum() == before


def test_parallel_training_matches_serial(trained_backbone):
    """Each region trains from its own seed, so thread count does not change results."""
    data = {
        0: (_successor_examples(16), ExampleTensors.empty()),
        1: (ExampleTensors.empty(), _successor_examples(24)),
    }

    def _run(threads: int):
        registry = AdapterRegistry(dim=8, config=AdapterConfig(lora_dropout=0.0), base_seed=3)
        registry.create(0)
        registry.create(1)
        train_adapters_parallel(trained_backbone, registry, data, _config(finetune_epochs=2), threads=threads)
        return registry.checksums()

    assert _run(1) == _run(2)


def test_mixed_batches_count_and_pools():
    rng = np.random.default_rng(0)
    batches = list(iter_mixed_batches(30, 10, 8, 0.7, rng))
    assert len(batches) == 5
    assert all(len(rows) == 8 for _, rows in batches)
    for pool, rows in batches:
        assert rows.max() < (30 if pool == "S" else 10)


def test_mixed_batches_fall_back_to_other_pool():
    rng = np.random.default_rng(1)
    assert {pool for pool, _ in iter_mixed_batches(0, 12, 4, 1.0, rng)} == {"F"}
    assert {pool for pool, _ in iter_mixed_batches(12, 0, 4, 0.0, rng)} == {"S"}


def test_mixing_ratio_controls_pool_frequency():
    rng = np.random.default_rng(2)
    pools = [pool for pool, _ in iter_mixed_batches(5000, 5000, 10, 0.7, rng)]
    assert pools.count("S") / len(pools) == pytest.approx(0.7, abs=0.05)


def test_topk_ties_prefer_lower_position():
    assert topk_from_logits([0.5, 0.9, 0.9, 0.1], 3) == [1, 2, 0]
    with pytest.raises(KExceedsVocabError):
        topk_from_logits([0.1, 0.2], 3)


def test_predict_topk_never_returns_padding(trained_backbone):
    ranking = predict_topk(trained_backbone, None, [3], NUM_ITEMS)
    assert sorted(ranking) == list(range(1, NUM_ITEMS + 1))
    with pytest.raises(KExceedsVocabError):
        predict_topk(trained_backbone, None, [3], NUM_ITEMS + 1)


def test_predict_topk_excludes_seen(trained_backbone):
    ranked = predict_topk_batch(trained_backbone, None, [[1, 2, 3]], 3, exclude_seen=True)[0]
    assert not {1, 2, 3} & set(ranked)
    assert predict_topk_batch(trained_backbone, None, [], 3) == []


def test_predictive_distribution_sums_to_one(trained_backbone):
    probs = predictive_distribution(trained_backbone, None, [5])
    assert probs.shape == (NUM_ITEMS,)
    assert probs.sum() == pytest.approx(1.0)
    assert np.all(probs > 0.0)


def test_example_tensors_concat_widens():
    short = ExampleTensors.from_lists([[1]], [2])
    wide = ExampleTensors.from_lists([[1, 2, 3]], [4])
    joined = short.concat(wide)
    assert joined.contexts.tolist() == [[0, 0, 1], [1, 2, 3]]
    assert joined.targets.tolist() == [2, 4]
    assert len(ExampleTensors.empty().concat(short)) == 1
    with pytest.raises(ValueError):
        ExampleTensors.from_lists([[1]], [])


def test_region_adapters_beat_frozen_base_on_their_data(trained_backbone):
    """Two regions drift to different successor rules; each adapter lowers its own region's loss."""
    registry = AdapterRegistry(
        dim=8, config=AdapterConfig(lora_rank=4, lora_alpha=8, lora_dropout=0.0), base_seed=0
    )
    for region_id, shift in {0: 2, 1: 3}.items():
        items = list(range(1, NUM_ITEMS + 1)) * 4
        drifted = ExampleTensors.from_lists([[i] for i in items], [(i - 1 + shift) % NUM_ITEMS + 1 for i in items])
        adapter = registry.create(region_id)
        train_region_adapter(
            trained_backbone, adapter, ExampleTensors.empty(), drifted, _config(finetune_epochs=20)
        )
        with torch.no_grad():
            routed = next_item_loss(trained_backbone, adapter, drifted.contexts, drifted.targets)
            base = next_item_loss(trained_backbone, None, drifted.contexts, drifted.targets)
        assert float(routed) < float(base)
