"""Single-writer publication of immutable RegionSet versions."""
import threading

from core.regions.types import RegionSet


class RegionStore:
    """
    Holds the currently published RegionSet.

    Readers call ``current`` and keep working on the version they got; the
    single writer prepares the next version and ``publish``es it. RegionSet is
    immutable, so a reader never observes a half-applied edit.
    """

    def __init__(self, initial: RegionSet):
        self._lock = threading.Lock()
        self._current = initial
        self._version = 0

    def current(self) -> RegionSet:
        with self._lock:
            return self._current

    @property
    def version(self) -> int:
        with self._lock:
            return self._version

    def publish(self, region_set: RegionSet) -> int:
        """Replace the published set; returns the new version number."""
        with self._lock:
            self._current = region_set
            self._version += 1
            return self._version
