"""Pixel-statistic detectors against counting/summing oracles."""

import math

import pytest
from hypothesis import given, strategies as st

from oracles import count_diff_oracle
from xri.context.detectors import (
    ActivityClassifier,
    DetectorConfig,
    DetectorError,
    classify_activity,
    detect_light,
    detect_presence,
    mean_luminance,
)
from xri.context.frames import Frame
from xri.core.events import Activity

CFG = DetectorConfig()


def frame_of(pixels: bytes, width: int | None = None) -> Frame:
    width = width or len(pixels)
    return Frame(width=width, height=len(pixels) // width, pixels=pixels)


def test_identical_frames_no_presence():
    frame = frame_of(bytes(range(100)), width=10)
    assert detect_presence(frame, frame, CFG) is False


def test_half_frame_changed_is_presence():
    background = frame_of(bytes(100), width=10)
    pixels = bytes([255] * 50 + [0] * 50)
    assert detect_presence(background, frame_of(pixels, width=10), CFG) is True


def test_presence_boundary_is_strict():
    """Exactly the threshold fraction must NOT trigger; one more pixel must."""
    n = 1000  # 0.02 * 1000 = 20 pixels exactly
    at_threshold = math.ceil(CFG.presence_diff_threshold * n)
    background = frame_of(bytes(n), width=50)

    changed = bytes([255] * at_threshold + [0] * (n - at_threshold))
    assert count_diff_oracle(changed, background.pixels, CFG.pixel_delta_min) == at_threshold
    assert detect_presence(background, frame_of(changed, width=50), CFG) is False

    changed_plus = bytes([255] * (at_threshold + 1) + [0] * (n - at_threshold - 1))
    assert detect_presence(background, frame_of(changed_plus, width=50), CFG) is True


def test_pixel_delta_min_gates_counting():
    background = frame_of(bytes(100), width=10)
    faint = bytes([CFG.pixel_delta_min - 1] * 100)
    assert detect_presence(background, frame_of(faint, width=10), CFG) is False
    exact = bytes([CFG.pixel_delta_min] * 100)
    assert detect_presence(background, frame_of(exact, width=10), CFG) is True


def test_dimension_mismatch_raises():
    with pytest.raises(DetectorError):
        detect_presence(frame_of(bytes(4), width=2), frame_of(bytes(9), width=3), CFG)


@given(st.binary(min_size=16, max_size=16), st.binary(min_size=16, max_size=16))
def test_presence_symmetric_in_delta_sign(a, b):
    fa, fb = frame_of(a, width=4), frame_of(b, width=4)
    assert detect_presence(fa, fb, CFG) == detect_presence(fb, fa, CFG)


def test_light_all_dark_and_all_bright():
    dark = frame_of(bytes(64), width=8)
    bright = frame_of(bytes([255] * 64), width=8)
    assert detect_light(dark, previous_state=True, cfg=CFG) is False
    assert detect_light(dark, previous_state=False, cfg=CFG) is False
    assert detect_light(bright, previous_state=False, cfg=CFG) is True


def test_light_hysteresis_holds_previous_state():
    # mean 75 sits inside the (70, 80) band: threshold 80, gap 10
    pixels = bytes([75] * 64)
    assert sum(pixels) / len(pixels) == 75.0  # brute-force pixel-sum check
    frame = frame_of(pixels, width=8)
    assert detect_light(frame, previous_state=True, cfg=CFG) is True
    assert detect_light(frame, previous_state=False, cfg=CFG) is False


@given(st.lists(st.integers(min_value=71, max_value=79), min_size=1, max_size=20))
def test_light_never_flips_inside_the_band(means):
    state = True
    for mean in means:
        new_state = detect_light(frame_of(bytes([mean] * 32), width=8), state, CFG)
        assert new_state == state
        state = new_state


def test_mean_luminance_matches_manual_sum():
    pixels = bytes([1, 2, 3, 250])
    assert mean_luminance(frame_of(pixels, width=2)) == sum(pixels) / 4


def test_activity_majority():
    assert (
        classify_activity([Activity.WORKING] * 5, previous=Activity.AWAY) == Activity.WORKING
    )
    samples = [Activity.WORKING, Activity.SITTING, Activity.WORKING]
    assert classify_activity(samples, previous=Activity.AWAY) == Activity.WORKING


def test_activity_tie_retains_previous():
    samples = [Activity.WORKING, Activity.SITTING]
    assert classify_activity(samples, previous=Activity.SITTING) == Activity.SITTING
    assert classify_activity(samples, previous=Activity.AWAY) == Activity.AWAY


def test_activity_empty_window_holds_last():
    assert classify_activity([], previous=Activity.STANDING) == Activity.STANDING


def test_activity_no_presence_forces_away():
    assert (
        classify_activity([Activity.WORKING] * 5, previous=Activity.WORKING, presence=False)
        == Activity.AWAY
    )


def test_activity_classifier_windowing():
    classifier = ActivityClassifier(window=3, initial=Activity.AWAY)
    assert classifier.observe(Activity.SITTING) == Activity.SITTING
    assert classifier.observe(Activity.WORKING) in (Activity.SITTING, Activity.WORKING)
    classifier.observe(Activity.WORKING)
    assert classifier.observe(Activity.WORKING) == Activity.WORKING
    # window of 3 Workings, then presence drops
    assert classifier.reclassify(presence=False) == Activity.AWAY


def test_detector_config_validation():
    with pytest.raises(ValueError):
        DetectorConfig(presence_diff_threshold=1.5)
    with pytest.raises(ValueError):
        DetectorConfig(pixel_delta_min=300)
    with pytest.raises(ValueError):
        DetectorConfig(hysteresis_gap=-1)
    with pytest.raises(ValueError):
        DetectorConfig(debounce_ms=-5)
