"""Table-driven agent state machines with a small JSON predicate DSL.

A rule is an ordered entry: when its conditions all hold for the incoming
event (plus the agent's latest-value blackboard and the zone situation), the
agent moves to the rule's target state and reports the rule's outputs.
Rules are checked in declared order and the first match wins, so rule order
encodes priority. No match means an identity step.

Condition JSON shape::

    {"ctx": "event",     "kind": "Presence",   "op": "eq", "value": true}
    {"ctx": "latest",    "kind": "LightLevel", "field": "on", "op": "eq", "value": false}
    {"ctx": "situation", "field": "user_mode", "op": "eq", "value": "Working"}

Supported ops: eq, ne, lt, le, gt, ge, in.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

from xri.core.events import Activity, CommandValue, ContextEvent, EventKind, LightValue, SituationSet
from xri.core.profiles import MiraProfile, profile_from_json, validate_profile

_OPS = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
    "in": lambda a, b: a in b,
}


class ConfigError(ValueError):
    """Scenario/agent configuration problem; names the offending field."""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


@dataclass(frozen=True)
class Condition:
    ctx: str  # event | latest | situation
    op: str
    value: Any
    kind: EventKind | None = None  # event/latest only
    field: str | None = None


@dataclass(frozen=True)
class Rule:
    to: str
    when: tuple[Condition, ...] = ()
    outputs: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class AgentSpec:
    agent_id: str
    zone: str
    profile: MiraProfile
    states: tuple[str, ...]
    initial: str
    subscribes: frozenset[EventKind]
    rules: tuple[Rule, ...] = ()
    # assumed latest values before the first real observation arrives
    latest_defaults: dict[EventKind, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class AgentInstance:
    spec: AgentSpec
    state: str
    latest: dict[EventKind, Any] = field(default_factory=dict)
    situation: SituationSet | None = None
    outputs: dict[str, Any] = field(default_factory=dict)
    last_transition_ms: int = 0

    @classmethod
    def create(cls, spec: AgentSpec) -> "AgentInstance":
        return cls(spec=spec, state=spec.initial, latest=dict(spec.latest_defaults))


@dataclass(frozen=True)
class PublishState:
    """Output action: the agent's retained state payload must be republished."""


def _plain(value: Any, field_name: str | None) -> Any:
    """Project an event value (or a sub-field of it) to a comparable plain value."""
    if isinstance(value, LightValue):
        if field_name == "on" or field_name is None:
            return value.on
        if field_name == "mean_luminance":
            return value.mean_luminance
        return None
    if isinstance(value, CommandValue):
        if field_name == "verb" or field_name is None:
            return value.verb
        if field_name == "args":
            return list(value.args)
        return None
    if isinstance(value, Activity):
        return value.value
    return value


def _evaluate(cond: Condition, event: ContextEvent, latest: dict, situation: SituationSet | None) -> bool:
    if cond.ctx == "event":
        if cond.kind is not None and event.kind is not cond.kind:
            return False
        actual = _plain(event.value, cond.field)
    elif cond.ctx == "latest":
        if cond.kind not in latest:
            return False
        actual = _plain(latest[cond.kind], cond.field)
    else:  # situation
        if situation is None:
            return False
        if cond.field == "user_mode":
            actual = situation.user_mode.value
        elif cond.field == "plant_alerts":
            actual = sorted(a.value for a in situation.plant_alerts)
        else:
            return False
    if actual is None:
        return False
    try:
        return _OPS[cond.op](actual, cond.value)
    except TypeError:
        return False


def step(
    instance: AgentInstance, event: ContextEvent, now_ms: int
) -> tuple[AgentInstance, list[PublishState]]:
    """Apply the first matching rule; unmatched or unsubscribed events are
    identity steps with no outputs."""
    spec = instance.spec
    if event.kind not in spec.subscribes:
        return instance, []
    latest = dict(instance.latest)
    latest[event.kind] = event.value
    for rule in spec.rules:
        if all(_evaluate(c, event, latest, instance.situation) for c in rule.when):
            changed = rule.to != instance.state or rule.outputs != instance.outputs
            new = replace(
                instance,
                state=rule.to,
                latest=latest,
                outputs=dict(rule.outputs),
                last_transition_ms=now_ms if changed else instance.last_transition_ms,
            )
            return new, ([PublishState()] if changed else [])
    return replace(instance, latest=latest), []


# -- JSON loading ------------------------------------------------------------


def _parse_condition(obj: dict, path: str) -> Condition:
    if not isinstance(obj, dict):
        raise ConfigError(path, "condition must be an object")
    ctx = obj.get("ctx")
    if ctx not in ("event", "latest", "situation"):
        raise ConfigError(f"{path}.ctx", f"must be event|latest|situation, got {ctx!r}")
    op = obj.get("op")
    if op not in _OPS:
        raise ConfigError(f"{path}.op", f"must be one of {sorted(_OPS)}, got {op!r}")
    if "value" not in obj:
        raise ConfigError(f"{path}.value", "missing")
    kind = None
    if ctx in ("event", "latest"):
        if "kind" not in obj:
            raise ConfigError(f"{path}.kind", f"required for ctx={ctx}")
        try:
            kind = EventKind(obj["kind"])
        except ValueError:
            raise ConfigError(f"{path}.kind", f"unknown event kind {obj['kind']!r}") from None
    else:
        if obj.get("field") not in ("user_mode", "plant_alerts"):
            raise ConfigError(f"{path}.field", "situation conditions need field user_mode|plant_alerts")
    return Condition(ctx=ctx, op=op, value=obj["value"], kind=kind, field=obj.get("field"))


def _parse_latest_default(kind: EventKind, raw: Any, path: str) -> Any:
    if kind is EventKind.LIGHT_LEVEL:
        if not isinstance(raw, dict) or "on" not in raw:
            raise ConfigError(path, "LightLevel default must be {on, mean_luminance?}")
        return LightValue(on=bool(raw["on"]), mean_luminance=float(raw.get("mean_luminance", 0.0)))
    if kind is EventKind.ACTIVITY:
        try:
            return Activity(raw)
        except ValueError:
            raise ConfigError(path, f"unknown activity {raw!r}") from None
    return raw


def agent_spec_from_json(obj: dict, path: str = "agent") -> AgentSpec:
    """Parse and validate one agent spec; raises ConfigError naming the field."""
    if not isinstance(obj, dict):
        raise ConfigError(path, "agent spec must be an object")
    for required in ("id", "zone", "profile", "states", "initial", "subscribes"):
        if required not in obj:
            raise ConfigError(f"{path}.{required}", "missing")
    try:
        profile = profile_from_json(obj["profile"])
    except ValueError as exc:
        raise ConfigError(f"{path}.profile", str(exc)) from None
    violations = validate_profile(profile)
    if violations:
        raise ConfigError(f"{path}.profile", "; ".join(violations))
    states = tuple(obj["states"])
    if not states:
        raise ConfigError(f"{path}.states", "must not be empty")
    if obj["initial"] not in states:
        raise ConfigError(f"{path}.initial", f"{obj['initial']!r} not in states")
    try:
        subscribes = frozenset(EventKind(k) for k in obj["subscribes"])
    except ValueError as exc:
        raise ConfigError(f"{path}.subscribes", str(exc)) from None
    rules = []
    for i, rule_obj in enumerate(obj.get("rules", [])):
        rule_path = f"{path}.rules[{i}]"
        if not isinstance(rule_obj, dict) or "to" not in rule_obj:
            raise ConfigError(rule_path, "rule must be an object with a 'to' state")
        if rule_obj["to"] not in states:
            raise ConfigError(f"{rule_path}.to", f"{rule_obj['to']!r} not in states")
        when = tuple(
            _parse_condition(c, f"{rule_path}.when[{j}]")
            for j, c in enumerate(rule_obj.get("when", []))
        )
        outputs = rule_obj.get("outputs", {})
        if not isinstance(outputs, dict):
            raise ConfigError(f"{rule_path}.outputs", "must be an object")
        rules.append(Rule(to=rule_obj["to"], when=when, outputs=outputs))
    latest_defaults = {}
    for key, raw in obj.get("latest_defaults", {}).items():
        try:
            kind = EventKind(key)
        except ValueError:
            raise ConfigError(f"{path}.latest_defaults.{key}", "unknown event kind") from None
        latest_defaults[kind] = _parse_latest_default(kind, raw, f"{path}.latest_defaults.{key}")
    return AgentSpec(
        agent_id=obj["id"],
        zone=obj["zone"],
        profile=profile,
        states=states,
        initial=obj["initial"],
        subscribes=subscribes,
        rules=tuple(rules),
        latest_defaults=latest_defaults,
    )
