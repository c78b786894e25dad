"""
Application-wide constants and configuration defaults.

This module contains the default hyperparameters of the editing, training and
evaluation protocol, plus the numeric tolerances shared across modules.
"""

# Temporal protocol
DEFAULT_Q_S = 0.5  # Dataset-level timestamp quantile for the Set-up cutoff
DEFAULT_Q_F = 0.8  # Dataset-level timestamp quantile for the Finetune cutoff
DEFAULT_BINARIZE_THRESHOLD = 4.0  # Ratings >= threshold are positive
DEFAULT_K_CORE = 5
DEFAULT_WINDOW_LENGTH = 5  # l_w
DEFAULT_STRIDE = 1

# Region construction and editing
DEFAULT_K_REGIONS = 3
RADIUS_QUANTILE = 0.9
DEFAULT_TAU = 0.4
DEFAULT_DELTA_MIN = 0.05
DEFAULT_BETA = 0.1
DEFAULT_GAMMA = 0.1
DEFAULT_LAMBDA_EXPAND = 0.5
DEFAULT_ALPHA_EXPAND = 0.1
DEFAULT_R_MAX = 1.2  # radians
DEFAULT_BUFFER_THRESHOLD = 32
DEFAULT_K_ADD = 1
DEFAULT_LAMBDA_SEP = 1.0
KMEANS_MAX_ITER = 100
KMEANS_RESTARTS = 8
REPAIR_STEPS = 50
REPAIR_STEP_SIZE = 0.05

# Training
LEARNING_RATE = 5e-4
SETUP_EPOCHS = 5
FINETUNE_EPOCHS = 3
BATCH_SIZE = 64
MIXING_RATIO = 0.7  # Share of batches drawn from S-phase region data
WEIGHT_DECAY = 0.01
GRAD_CLIP = 1.0
REPLAY_FRACTION = 0.1  # Uniform share of S examples mixed into the Replay arm

# Low-rank adapters
LORA_RANK = 8
LORA_ALPHA = 16.0
LORA_DROPOUT = 0.05

# Backbone
DEFAULT_DIM = 32
RECENCY_DECAY = 0.8

# Evaluation
EVAL_CUTOFF = 10

# Tolerances
UNIT_NORM_TOL = 1e-6
DISTRIBUTION_TOL = 1e-6
DEGENERATE_NORM = 1e-9
ZERO_HIDDEN_NORM = 1e-12
QUANTILE_EPS = 1e-12  # Guards ceil(q*n) against float round-up

# Performance settings
MAX_WORKERS = 4  # Fallback worker count when the CPU count is unknown
