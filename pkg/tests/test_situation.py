"""Situation classification: examples plus exhaustive agreement with an
independently written restatement of the rules."""

import itertools

from xri.agents.pomodoro import Phase
from xri.agents.situation import classify_situation
from xri.core.events import Activity, PlantAlert, UserMode


def situation_oracle(presence, activity, phase, plant_state):
    """Direct restatement, structured differently from the implementation."""
    if presence is None:
        presence = False
    if activity is None:
        activity = Activity.AWAY
    if not presence:
        mode = UserMode.AWAY
    else:
        on_break = phase is Phase.BREAK
        not_working = activity is not Activity.WORKING
        mode = UserMode.BREAK if (on_break or not_working) else UserMode.WORKING
    alerts = set()
    if plant_state == "NeedsWater":
        alerts.add(PlantAlert.NEEDS_WATER)
    if plant_state == "NeedsLight":
        alerts.add(PlantAlert.NEEDS_LIGHT)
    return mode, frozenset(alerts)


def test_examples():
    s = classify_situation("z", True, Activity.WORKING, Phase.WORK, "Thriving")
    assert (s.user_mode, s.plant_alerts) == (UserMode.WORKING, frozenset())

    s = classify_situation("z", False, None, Phase.WORK, "NeedsWater")
    assert (s.user_mode, s.plant_alerts) == (UserMode.AWAY, frozenset({PlantAlert.NEEDS_WATER}))

    # the pomodoro outranks the activity label
    s = classify_situation("z", True, Activity.WORKING, Phase.BREAK, "Healthy")
    assert s.user_mode is UserMode.BREAK


def test_totality_all_missing():
    s = classify_situation("z", None, None, None, None)
    assert s.user_mode is UserMode.AWAY
    assert s.plant_alerts == frozenset()


def test_exhaustive_agreement_with_oracle():
    presences = [None, False, True]
    activities = [None] + list(Activity)
    phases = [None, Phase.WORK, Phase.BREAK, Phase.PAUSED]
    plant_states = [None, "Healthy", "Thriving", "NeedsWater", "NeedsLight"]
    checked = 0
    for presence, activity, phase, plant in itertools.product(
        presences, activities, phases, plant_states
    ):
        got = classify_situation("z", presence, activity, phase, plant)
        mode, alerts = situation_oracle(presence, activity, phase, plant)
        assert (got.user_mode, got.plant_alerts) == (mode, alerts), (
            presence,
            activity,
            phase,
            plant,
        )
        checked += 1
    assert checked == 3 * 5 * 4 * 5


def test_paused_counts_as_not_in_break():
    s = classify_situation("z", True, Activity.WORKING, Phase.PAUSED, "Healthy")
    assert s.user_mode is UserMode.WORKING
