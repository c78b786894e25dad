"""
Sequence model: item vocabulary, frozen backbone, per-region low-rank adapters,
training loops and checkpoints.
"""
from .adapter import AdapterRegistry, LowRankAdapter
from .backbone import Backbone, encode_subsequence, encode_windows, pad_windows, score_items
from .checkpoint import load_adapter, load_backbone, save_adapter, save_backbone
from .prompt import build_prompt, parse_prompt
from .training import (
    ExampleTensors,
    TrainResult,
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
from .vocab import PAD_INDEX, ItemVocab

__all__ = [
    'PAD_INDEX',
    'AdapterRegistry',
    'Backbone',
    'ExampleTensors',
    'ItemVocab',
    'LowRankAdapter',
    'TrainResult',
    'adapter_gradients',
    'build_prompt',
    'encode_subsequence',
    'encode_windows',
    'iter_mixed_batches',
    'load_adapter',
    'load_backbone',
    'next_item_loss',
    'pad_windows',
    'parse_prompt',
    'predict_topk',
    'predict_topk_batch',
    'predictive_distribution',
    'save_adapter',
    'save_backbone',
    'score_items',
    'topk_from_logits',
    'train_adapters_parallel',
    'train_region_adapter',
    'train_setup_backbone',
]
