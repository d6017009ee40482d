"""Zone situation classification: user mode plus plant alerts.

user_mode: Away without presence; otherwise Break when the pomodoro is in
its break phase or the activity is anything but Working; otherwise Working.
The pomodoro outranks the activity label; a paused cycle counts as not in
break. Plant alerts mirror the plant agent's state and are independent of
the user mode. Missing inputs fall back to absent/idle defaults, so the
classification is total.
"""

from __future__ import annotations

from xri.agents.pomodoro import Phase
from xri.core.events import Activity, PlantAlert, SituationSet, UserMode

_ALERT_STATES = {
    "NeedsWater": PlantAlert.NEEDS_WATER,
    "NeedsLight": PlantAlert.NEEDS_LIGHT,
}


def classify_situation(
    zone: str,
    presence: bool | None,
    activity: Activity | None,
    pomodoro_phase: Phase | None,
    plant_state: str | None,
) -> SituationSet:
    presence = bool(presence) if presence is not None else False
    activity = activity if activity is not None else Activity.AWAY
    if not presence:
        mode = UserMode.AWAY
    elif pomodoro_phase is Phase.BREAK or activity is not Activity.WORKING:
        mode = UserMode.BREAK
    else:
        mode = UserMode.WORKING
    alerts = frozenset(
        {_ALERT_STATES[plant_state]} if plant_state in _ALERT_STATES else set()
    )
    return SituationSet(zone=zone, user_mode=mode, plant_alerts=alerts)
