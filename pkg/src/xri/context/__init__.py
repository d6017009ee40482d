"""Context intelligence: turns frames and scripted signals into context events."""

from xri.context.debounce import Debouncer
from xri.context.detectors import (
    ActivityClassifier,
    DetectorConfig,
    DetectorError,
    classify_activity,
    detect_light,
    detect_presence,
    mean_luminance,
)
from xri.context.frames import Frame, read_pgm, synth_frame, write_pgm
from xri.context.pipeline import PipelineError, SensorScript, run_pipeline

__all__ = [
    "Frame",
    "read_pgm",
    "write_pgm",
    "synth_frame",
    "DetectorConfig",
    "DetectorError",
    "detect_presence",
    "detect_light",
    "mean_luminance",
    "classify_activity",
    "ActivityClassifier",
    "Debouncer",
    "SensorScript",
    "PipelineError",
    "run_pipeline",
]
