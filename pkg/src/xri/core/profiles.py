"""Agent capability profiles on the mixed-reality agent cube.

Three axes: agency (weak reactive controllers vs strong deliberative ones),
corporeal presence (how much virtual and physical body the agent has), and
interactive capacity (how much it can sense/act virtually and physically).
The presence and capacity axes are split into a (virtual, physical) pair in
[0,1] each.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Agency(Enum):
    WEAK = "weak"
    STRONG = "strong"


class AgencyTrait(Enum):
    AUTONOMY = "autonomy"
    SOCIAL_ABILITY = "social_ability"
    REACTIVITY = "reactivity"
    PROACTIVITY = "proactivity"


class ControllerKind(Enum):
    FSM = "fsm"
    FUZZY = "fuzzy"
    DELIBERATIVE = "deliberative"


# weak agency pairs with reactive controllers, strong with deliberative
WEAK_CONTROLLERS = frozenset({ControllerKind.FSM, ControllerKind.FUZZY})


@dataclass(frozen=True)
class CubeAxis:
    virtual: float
    physical: float


@dataclass(frozen=True)
class MiraProfile:
    agency: Agency
    agency_traits: frozenset[AgencyTrait]
    corporeal_presence: CubeAxis
    interactive_capacity: CubeAxis
    controller_kind: ControllerKind


def validate_profile(profile: MiraProfile) -> list[str]:
    """Every violated profile invariant, as human-readable strings.

    Total and idempotent: never raises, and an empty result means valid.
    """
    violations: list[str] = []
    weak_controller = profile.controller_kind in WEAK_CONTROLLERS
    if profile.agency is Agency.WEAK and not weak_controller:
        violations.append(
            f"weak agency requires an fsm or fuzzy controller, got {profile.controller_kind.value}"
        )
    if profile.agency is Agency.STRONG and weak_controller:
        violations.append(
            f"strong agency requires a deliberative controller, got {profile.controller_kind.value}"
        )
    for axis_name, axis in (
        ("corporeal_presence", profile.corporeal_presence),
        ("interactive_capacity", profile.interactive_capacity),
    ):
        for part in ("virtual", "physical"):
            value = getattr(axis, part)
            if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                violations.append(f"{axis_name}.{part} must lie in [0,1], got {value!r}")
    cp = profile.corporeal_presence
    if (
        isinstance(cp.virtual, (int, float))
        and isinstance(cp.physical, (int, float))
        and cp.virtual + cp.physical <= 0
    ):
        violations.append("corporeal presence is zero on both axes: the agent is unembodied")
    return violations


def profile_to_json(profile: MiraProfile) -> dict:
    """Canonical JSON object form (traits sorted)."""
    return {
        "agency": profile.agency.value,
        "traits": sorted(t.value for t in profile.agency_traits),
        "controller": profile.controller_kind.value,
        "corporeal_presence": {
            "virtual": profile.corporeal_presence.virtual,
            "physical": profile.corporeal_presence.physical,
        },
        "interactive_capacity": {
            "virtual": profile.interactive_capacity.virtual,
            "physical": profile.interactive_capacity.physical,
        },
    }


def profile_from_json(obj: dict) -> MiraProfile:
    """Parse the JSON object form; raises ValueError on unknown fields/values."""
    try:
        return MiraProfile(
            agency=Agency(obj["agency"]),
            agency_traits=frozenset(AgencyTrait(t) for t in obj.get("traits", [])),
            controller_kind=ControllerKind(obj["controller"]),
            corporeal_presence=CubeAxis(
                virtual=float(obj["corporeal_presence"]["virtual"]),
                physical=float(obj["corporeal_presence"]["physical"]),
            ),
            interactive_capacity=CubeAxis(
                virtual=float(obj["interactive_capacity"]["virtual"]),
                physical=float(obj["interactive_capacity"]["physical"]),
            ),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed profile object: {exc}") from None
