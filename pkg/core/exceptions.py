"""
Error hierarchy for the region editor.

Value-shaped failures also derive from ``ValueError`` and file-shaped ones from
``OSError`` so callers catching builtin exceptions keep working.
"""


class RaieError(Exception):
    """Base class for every error raised by this package."""


# Region geometry

class EmptyInputError(RaieError, ValueError):
    """No vectors were supplied to an operation that needs at least one."""


class KTooLargeError(RaieError, ValueError):
    """More clusters were requested than there are distinct vectors."""


class DimensionMismatchError(RaieError, ValueError):
    """A vector or matrix does not have the expected dimension."""


class NotUnitNormError(RaieError, ValueError):
    """A vector that must lie on the unit sphere does not."""


class EmptyMembersError(RaieError, ValueError):
    """A radius was requested for a region with no members."""


class EmptyRegionSetError(RaieError, ValueError):
    """An operation needs at least one region."""


class InvalidDistributionError(RaieError, ValueError):
    """Probabilities do not sum to one."""


class DegenerateCenterError(RaieError, ValueError):
    """An EMA center step produced a (near) zero vector."""


class CorruptSnapshotError(RaieError, ValueError):
    """A binary snapshot or checkpoint failed magic, version or checksum checks."""


# Sequence model

class EmptyHistoryError(RaieError, ValueError):
    """A prompt was requested for an empty history."""


class EmptyWindowError(RaieError, ValueError):
    """A context window has no items."""


class ZeroHiddenError(RaieError, ValueError):
    """The encoder produced a hidden state too small to normalise."""


class FrozenViolationError(RaieError, RuntimeError):
    """A frozen backbone parameter received a gradient."""


class AlreadyFrozenError(RaieError, RuntimeError):
    """Set-up training was requested on a frozen backbone."""


class EmptyRegionDataError(RaieError, ValueError):
    """A region adapter has no examples to train on."""


class KExceedsVocabError(RaieError, ValueError):
    """More recommendations were requested than there are items."""


# Data pipeline and simulation

class UnreadableInputError(RaieError, OSError):
    """An input file cannot be read."""


class UnknownFormatError(RaieError, ValueError):
    """An input format name is not recognised."""


class EmptyEventsError(RaieError, ValueError):
    """An operation needs at least one interaction event."""


class InvalidScenarioError(RaieError, ValueError):
    """A drift scenario is internally inconsistent."""


class LengthMismatchError(RaieError, ValueError):
    """Two parallel sequences have different lengths."""


# Orchestration and configuration

class MissingBaselineError(RaieError, RuntimeError):
    """A forgetting report was requested without pre-finetune metrics."""


class IdMismatchError(RaieError, ValueError):
    """Region ids of two region sets cannot be matched."""


class ConfigError(RaieError, ValueError):
    """A configuration file or override violates the schema."""


class StateNotFoundError(RaieError, FileNotFoundError):
    """A state directory lacks a file the requested phase needs."""
