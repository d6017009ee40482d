"""Transition debouncing on the logical clock.

A value change is emitted only once the new value has held for the debounce
window; a change that reverts (or changes again) inside the window is
suppressed. The very first sample is emitted immediately as state seeding.
Consequently any two emitted transitions are at least debounce_ms apart.
"""

from __future__ import annotations

from typing import Any

# an emission: (ts of the original change, value, rider)
Emission = tuple[int, Any, Any]


class Debouncer:
    """Per-signal debouncer. Equality is judged on ``value``; ``rider``
    carries side data (e.g. the luminance mean measured at the change)."""

    def __init__(self, debounce_ms: int):
        if debounce_ms < 0:
            raise ValueError("debounce_ms must be >= 0")
        self.debounce_ms = debounce_ms
        self._stable: Any = None
        self._seeded = False
        self._pending: tuple[int, Any, Any] | None = None

    @property
    def stable(self) -> Any:
        return self._stable

    def feed(self, ts: int, value: Any, rider: Any = None) -> list[Emission]:
        """Observe a sample; returns the emissions it settles."""
        if not self._seeded:
            self._seeded = True
            self._stable = value
            return [(ts, value, rider)]
        out = self.flush(ts)
        if self._pending is None:
            if value != self._stable:
                self._pending = (ts, value, rider)
        elif value == self._stable:
            # reverted inside the window: both transitions suppressed
            self._pending = None
        elif value != self._pending[1]:
            # changed again: the hold restarts for the newest value
            self._pending = (ts, value, rider)
        return out

    def flush(self, now: int) -> list[Emission]:
        """Confirm a pending change once it has held for the window."""
        if self._pending is not None and now - self._pending[0] >= self.debounce_ms:
            emission = self._pending
            self._stable = emission[1]
            self._pending = None
            return [emission]
        return []
