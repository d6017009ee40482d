"""Deterministic pixel-statistic detectors.

Presence comes from frame differencing against a background frame, lighting
from mean luminance with hysteresis, activity from scripted labels passed
through a windowed majority vote. The detectors sit behind plain functions so
a learned model could replace any of them without touching the pipeline.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass

from xri._kernels import count_diff_pixels, pixel_sum
from xri.core.events import Activity
from xri.context.frames import Frame


class DetectorError(ValueError):
    """Detector precondition violated (e.g. mismatched frame dimensions)."""


@dataclass(frozen=True)
class DetectorConfig:
    presence_diff_threshold: float = 0.02  # fraction of changed pixels
    pixel_delta_min: int = 25  # per-pixel |delta| that counts as changed
    light_on_threshold: float = 80.0  # mean luminance to switch on
    hysteresis_gap: float = 10.0  # on-threshold minus the off-threshold
    debounce_ms: int = 500
    moisture_low_threshold: float = 0.25

    def __post_init__(self):
        if not 0.0 <= self.presence_diff_threshold <= 1.0:
            raise ValueError(f"presence_diff_threshold {self.presence_diff_threshold} outside [0,1]")
        if not 0 <= self.pixel_delta_min <= 255:
            raise ValueError(f"pixel_delta_min {self.pixel_delta_min} outside [0,255]")
        if not 0.0 <= self.light_on_threshold <= 255.0:
            raise ValueError(f"light_on_threshold {self.light_on_threshold} outside [0,255]")
        if self.hysteresis_gap < 0:
            raise ValueError("hysteresis_gap must be >= 0")
        if self.debounce_ms < 0:
            raise ValueError("debounce_ms must be >= 0")
        if not 0.0 <= self.moisture_low_threshold <= 1.0:
            raise ValueError(f"moisture_low_threshold {self.moisture_low_threshold} outside [0,1]")


def detect_presence(background: Frame, current: Frame, cfg: DetectorConfig) -> bool:
    """True iff strictly more than the threshold fraction of pixels changed."""
    if (background.width, background.height) != (current.width, current.height):
        raise DetectorError(
            f"frame dimensions differ: {background.width}x{background.height} "
            f"vs {current.width}x{current.height}"
        )
    changed = count_diff_pixels(current.pixels, background.pixels, cfg.pixel_delta_min)
    return changed > cfg.presence_diff_threshold * len(current.pixels)


def mean_luminance(frame: Frame) -> float:
    return pixel_sum(frame.pixels) / len(frame.pixels)


def detect_light(current: Frame, previous_state: bool, cfg: DetectorConfig) -> bool:
    """Mean-luminance threshold with hysteresis.

    Turns on at >= light_on_threshold, off below threshold - gap; inside the
    band the previous state holds.
    """
    mean = mean_luminance(current)
    if mean >= cfg.light_on_threshold:
        return True
    if mean < cfg.light_on_threshold - cfg.hysteresis_gap:
        return False
    return previous_state


def classify_activity(samples, previous: Activity, presence: bool = True) -> Activity:
    """Majority label over the window.

    No presence forces Away; an empty window or a tied vote holds the
    previous classification.
    """
    if not presence:
        return Activity.AWAY
    samples = list(samples)
    if not samples:
        return previous
    counts = Counter(samples)
    top = max(counts.values())
    winners = [label for label, n in counts.items() if n == top]
    if len(winners) == 1:
        return winners[0]
    return previous


class ActivityClassifier:
    """Rolling windowed majority with the tie/empty rules above."""

    def __init__(self, window: int = 5, initial: Activity = Activity.AWAY):
        if window < 1:
            raise ValueError("window must be >= 1")
        self._samples: deque[Activity] = deque(maxlen=window)
        self._current = initial

    @property
    def current(self) -> Activity:
        return self._current

    def observe(self, label: Activity, presence: bool = True) -> Activity:
        self._samples.append(label)
        return self.reclassify(presence)

    def reclassify(self, presence: bool = True) -> Activity:
        self._current = classify_activity(self._samples, self._current, presence)
        return self._current
