"""Plant avatar policy: the decision table and its monotonicity contract."""

import itertools

import pytest

from xri.agents.plant import plant_avatar_policy


def test_decision_table():
    assert plant_avatar_policy(True, True, 0.9) == ("Thriving", 1.0, True)
    assert plant_avatar_policy(False, False, 0.9) == ("NeedsLight", 0.6, False)
    assert plant_avatar_policy(True, False, 0.9) == ("Healthy", 0.8, False)
    assert plant_avatar_policy(True, True, 0.1) == ("NeedsWater", 0.4, False)


def test_water_outranks_light_and_presence():
    """Exhaustive over light x presence x {low, high} moisture."""
    for light, presence in itertools.product((False, True), repeat=2):
        state, _, _ = plant_avatar_policy(light, presence, 0.1)
        assert state == "NeedsWater"
        state, _, _ = plant_avatar_policy(light, presence, 0.9)
        assert state != "NeedsWater"


def test_light_outranks_presence():
    for presence in (False, True):
        state, _, _ = plant_avatar_policy(False, presence, 0.9)
        assert state == "NeedsLight"


def test_moisture_threshold_boundary():
    # strictly below the threshold is dry; the threshold itself is not
    assert plant_avatar_policy(True, True, 0.24)[0] == "NeedsWater"
    assert plant_avatar_policy(True, True, 0.25)[0] == "Thriving"


def test_monotonicity_over_full_grid():
    """More favorable context never shrinks the avatar."""
    moistures = [0.0, 0.1, 0.24, 0.25, 0.5, 1.0]
    for presence in (False, True):
        for moisture in moistures:
            scale_off = plant_avatar_policy(False, presence, moisture)[1]
            scale_on = plant_avatar_policy(True, presence, moisture)[1]
            assert scale_on >= scale_off
    for light in (False, True):
        for moisture in moistures:
            scale_absent = plant_avatar_policy(light, False, moisture)[1]
            scale_present = plant_avatar_policy(light, True, moisture)[1]
            assert scale_present >= scale_absent


def test_ambient_effect_only_when_thriving():
    for light, presence in itertools.product((False, True), repeat=2):
        for moisture in (0.1, 0.9):
            state, _, ambient = plant_avatar_policy(light, presence, moisture)
            assert ambient is (state == "Thriving")


def test_moisture_out_of_range_rejected():
    with pytest.raises(ValueError):
        plant_avatar_policy(True, True, 1.5)
    with pytest.raises(ValueError):
        plant_avatar_policy(True, True, -0.01)
