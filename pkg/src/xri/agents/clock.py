"""The runtime clock: scripted (replayable) or wall time.

Scripted mode advances only through explicit ``advance_to`` calls, optionally
paced against wall time by a speed multiplier so a 30-minute script can play
in 30 seconds. Wall mode ignores the multiplier.
"""

from __future__ import annotations

import time
from enum import Enum


class ClockMode(Enum):
    SCRIPTED = "scripted"
    WALL = "wall"


class LogicalClock:
    def __init__(
        self,
        mode: ClockMode = ClockMode.SCRIPTED,
        speed: float | None = None,
        start_ms: int = 0,
    ):
        if speed is not None and speed <= 0:
            raise ValueError("speed must be positive")
        self.mode = mode
        self.speed = speed
        self._now = start_ms
        self._wall_origin = time.monotonic()
        self._start_ms = start_ms

    @property
    def now_ms(self) -> int:
        if self.mode is ClockMode.WALL:
            wall = self._start_ms + int((time.monotonic() - self._wall_origin) * 1000)
            self._now = max(self._now, wall)
        return self._now

    def advance_to(self, ts_ms: int) -> int:
        """Move scripted time forward to ``ts_ms`` (never backward).

        With a speed multiplier, sleeps so the advance takes
        (delta / speed) of wall time.
        """
        if self.mode is ClockMode.WALL:
            return self.now_ms
        if ts_ms > self._now:
            if self.speed is not None:
                time.sleep((ts_ms - self._now) / 1000.0 / self.speed)
            self._now = ts_ms
        return self._now
