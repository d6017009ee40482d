"""Context events, agent state payloads and situation payloads.

All wire payloads are canonical JSON: a fixed field order, compact
separators, an explicit ``v`` version field. Equal values always produce
byte-identical payloads, which makes traces and golden files comparable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from xri.core.profiles import MiraProfile, profile_from_json, profile_to_json

WIRE_VERSION = 1


class SchemaError(ValueError):
    """Payload fails schema validation (unknown version/kind, bad range)."""


class EventKind(Enum):
    PRESENCE = "Presence"
    LIGHT_LEVEL = "LightLevel"
    ACTIVITY = "Activity"
    MOISTURE = "Moisture"
    COMMAND = "Command"


class Activity(Enum):
    SITTING = "Sitting"
    STANDING = "Standing"
    WORKING = "Working"
    AWAY = "Away"


class UserMode(Enum):
    WORKING = "Working"
    BREAK = "Break"
    AWAY = "Away"


class PlantAlert(Enum):
    NEEDS_WATER = "NeedsWater"
    NEEDS_LIGHT = "NeedsLight"


@dataclass(frozen=True)
class LightValue:
    on: bool
    mean_luminance: float  # 8-bit grayscale mean, [0, 255]


@dataclass(frozen=True)
class CommandValue:
    verb: str
    args: tuple[str, ...] = ()


def _check_level(value: str, what: str) -> str:
    if not isinstance(value, str) or not value:
        raise SchemaError(f"{what} must be a non-empty string")
    if any(c in value for c in "/+#"):
        raise SchemaError(f"{what} {value!r} contains a topic-reserved character")
    return value


def _check_value(kind: EventKind, value: Any) -> Any:
    if kind is EventKind.PRESENCE:
        if not isinstance(value, bool):
            raise SchemaError(f"Presence value must be a bool, got {value!r}")
    elif kind is EventKind.LIGHT_LEVEL:
        if not isinstance(value, LightValue):
            raise SchemaError(f"LightLevel value must be a LightValue, got {value!r}")
        if not isinstance(value.on, bool):
            raise SchemaError("LightLevel.on must be a bool")
        if not 0.0 <= value.mean_luminance <= 255.0:
            raise SchemaError(f"mean_luminance {value.mean_luminance} outside [0, 255]")
    elif kind is EventKind.ACTIVITY:
        if not isinstance(value, Activity):
            raise SchemaError(f"Activity value must be an Activity, got {value!r}")
    elif kind is EventKind.MOISTURE:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"Moisture value must be a number, got {value!r}")
        if not 0.0 <= value <= 1.0:
            raise SchemaError(f"Moisture {value} outside [0, 1]")
    elif kind is EventKind.COMMAND:
        if not isinstance(value, CommandValue) or not value.verb:
            raise SchemaError(f"Command value must be a CommandValue with a verb, got {value!r}")
    return value


@dataclass(frozen=True)
class ContextEvent:
    """One timestamped, zone-scoped observation from a sensor source."""

    zone: str
    source: str
    kind: EventKind
    value: Any
    ts: int  # milliseconds on the runtime clock
    seq: int  # monotone per-source counter

    def __post_init__(self):
        _check_level(self.zone, "zone")
        _check_level(self.source, "source")
        _check_value(self.kind, self.value)
        if self.ts < 0 or self.seq < 0:
            raise SchemaError("ts and seq must be non-negative")


def _dump(obj: dict) -> bytes:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _value_to_json(kind: EventKind, value: Any) -> Any:
    if kind is EventKind.LIGHT_LEVEL:
        return {"on": value.on, "mean_luminance": value.mean_luminance}
    if kind is EventKind.ACTIVITY:
        return value.value
    if kind is EventKind.COMMAND:
        return {"verb": value.verb, "args": list(value.args)}
    return value


def _value_from_json(kind: EventKind, raw: Any) -> Any:
    if kind is EventKind.LIGHT_LEVEL:
        if not isinstance(raw, dict) or set(raw) != {"on", "mean_luminance"}:
            raise SchemaError(f"LightLevel value must be {{on, mean_luminance}}, got {raw!r}")
        if not isinstance(raw["mean_luminance"], (int, float)) or isinstance(raw["mean_luminance"], bool):
            raise SchemaError("mean_luminance must be a number")
        return LightValue(on=raw["on"], mean_luminance=float(raw["mean_luminance"]))
    if kind is EventKind.ACTIVITY:
        try:
            return Activity(raw)
        except ValueError:
            raise SchemaError(f"unknown activity {raw!r}") from None
    if kind is EventKind.COMMAND:
        if not isinstance(raw, dict) or "verb" not in raw:
            raise SchemaError(f"Command value must carry a verb, got {raw!r}")
        args = raw.get("args", [])
        if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
            raise SchemaError("Command args must be a list of strings")
        return CommandValue(verb=raw["verb"], args=tuple(args))
    if kind is EventKind.MOISTURE:
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise SchemaError(f"Moisture value must be a number, got {raw!r}")
        return float(raw)
    return raw


def encode_event(event: ContextEvent) -> bytes:
    """Canonical payload: {v, zone, source, kind, value, ts, seq} in order."""
    return _dump(
        {
            "v": WIRE_VERSION,
            "zone": event.zone,
            "source": event.source,
            "kind": event.kind.value,
            "value": _value_to_json(event.kind, event.value),
            "ts": event.ts,
            "seq": event.seq,
        }
    )


def _load(data: bytes, required: set[str]) -> dict:
    try:
        obj = json.loads(data)
    except (ValueError, UnicodeDecodeError) as exc:
        raise SchemaError(f"payload is not JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise SchemaError("payload must be a JSON object")
    if obj.get("v") != WIRE_VERSION:
        raise SchemaError(f"unknown payload version {obj.get('v')!r}")
    missing = required - set(obj)
    if missing:
        raise SchemaError(f"payload missing fields: {sorted(missing)}")
    return obj


def decode_event(data: bytes) -> ContextEvent:
    obj = _load(data, {"v", "zone", "source", "kind", "value", "ts", "seq"})
    try:
        kind = EventKind(obj["kind"])
    except ValueError:
        raise SchemaError(f"unknown event kind {obj['kind']!r}") from None
    if not isinstance(obj["ts"], int) or not isinstance(obj["seq"], int):
        raise SchemaError("ts and seq must be integers")
    try:
        return ContextEvent(
            zone=obj["zone"],
            source=obj["source"],
            kind=kind,
            value=_value_from_json(kind, obj["value"]),
            ts=obj["ts"],
            seq=obj["seq"],
        )
    except SchemaError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from None


@dataclass(frozen=True)
class AgentStatePayload:
    """Retained per-agent state: FSM state name plus actuation outputs."""

    agent_id: str
    state: str
    outputs: dict[str, Any] = field(default_factory=dict)
    profile: MiraProfile | None = None
    ts: int = 0
    seq: int = 0

    def __post_init__(self):
        scale = self.outputs.get("avatar_scale")
        if scale is not None and not 0.0 <= scale <= 1.0:
            raise SchemaError(f"avatar_scale {scale} outside [0, 1]")


def encode_state(payload: AgentStatePayload) -> bytes:
    obj = {
        "v": WIRE_VERSION,
        "agent_id": payload.agent_id,
        "state": payload.state,
        "outputs": {k: payload.outputs[k] for k in sorted(payload.outputs)},
        "profile": profile_to_json(payload.profile) if payload.profile else None,
        "ts": payload.ts,
        "seq": payload.seq,
    }
    return _dump(obj)


def decode_state(data: bytes) -> AgentStatePayload:
    obj = _load(data, {"v", "agent_id", "state", "outputs", "ts", "seq"})
    outputs = obj["outputs"]
    if not isinstance(outputs, dict):
        raise SchemaError("outputs must be an object")
    profile = None
    if obj.get("profile") is not None:
        try:
            profile = profile_from_json(obj["profile"])
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
    return AgentStatePayload(
        agent_id=obj["agent_id"],
        state=obj["state"],
        outputs={k: tuple(v) if isinstance(v, list) else v for k, v in outputs.items()},
        profile=profile,
        ts=obj["ts"],
        seq=obj["seq"],
    )


@dataclass(frozen=True)
class SituationSet:
    """Scenario-level classification: user mode plus independent plant alerts."""

    zone: str
    user_mode: UserMode
    plant_alerts: frozenset[PlantAlert] = frozenset()


def encode_situation(situation: SituationSet, ts: int) -> bytes:
    return _dump(
        {
            "v": WIRE_VERSION,
            "zone": situation.zone,
            "user_mode": situation.user_mode.value,
            "plant_alerts": sorted(a.value for a in situation.plant_alerts),
            "ts": ts,
        }
    )


def decode_situation(data: bytes) -> tuple[SituationSet, int]:
    obj = _load(data, {"v", "zone", "user_mode", "plant_alerts", "ts"})
    try:
        mode = UserMode(obj["user_mode"])
        alerts = frozenset(PlantAlert(a) for a in obj["plant_alerts"])
    except (ValueError, TypeError) as exc:
        raise SchemaError(str(exc)) from None
    return SituationSet(zone=obj["zone"], user_mode=mode, plant_alerts=alerts), obj["ts"]


def payload_to_json(payload: bytes):
    """Best-effort display form of a fabric payload: JSON, else text, else
    a {"_b64": ...} wrapper."""
    import base64

    try:
        return json.loads(payload)
    except (ValueError, UnicodeDecodeError):
        pass
    try:
        return payload.decode("utf-8")
    except UnicodeDecodeError:
        return {"_b64": base64.b64encode(payload).decode("ascii")}


def encode_clock(now_ms: int, end: bool = False) -> bytes:
    return _dump({"v": WIRE_VERSION, "now_ms": now_ms, "end": end})


def decode_clock(data: bytes) -> tuple[int, bool]:
    obj = _load(data, {"v", "now_ms"})
    if not isinstance(obj["now_ms"], int):
        raise SchemaError("now_ms must be an integer")
    return obj["now_ms"], bool(obj.get("end", False))
