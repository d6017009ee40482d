"""Plant avatar policy: the desk plant's reaction to its context.

Deterministic priority: dry soil outranks missing light, which outranks the
person being away. The numeric scales are display defaults; the contract the
tests hold is the monotone ordering (a more favorable context never shrinks
the avatar).
"""

from __future__ import annotations

PLANT_STATES = ("NeedsWater", "NeedsLight", "Healthy", "Thriving")


def plant_avatar_policy(
    light_on: bool,
    presence: bool,
    moisture: float,
    moisture_low_threshold: float = 0.25,
) -> tuple[str, float, bool]:
    """(state, avatar_scale, ambient_effect) for the given context."""
    if not 0.0 <= moisture <= 1.0:
        raise ValueError(f"moisture {moisture} outside [0, 1]")
    if moisture < moisture_low_threshold:
        return "NeedsWater", 0.4, False
    if not light_on:
        return "NeedsLight", 0.6, False
    if not presence:
        return "Healthy", 0.8, False
    return "Thriving", 1.0, True
