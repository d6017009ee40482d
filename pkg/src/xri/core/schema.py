"""The topic tree: constructors and the inverse parser.

    xri/context/{zone}/{source}/{kind}     context events
    xri/agent/{agent_id}/state             retained agent state
    xri/agent/{agent_id}/cmd               commands to one agent
    xri/scenario/{zone}/situation          retained situation (user mode + alerts)
    xri/sys/clock                          logical clock ticks / end-of-script
"""

from __future__ import annotations

from dataclasses import dataclass

from xri.core.events import ContextEvent, EventKind, SchemaError, _check_level

ROOT = "xri"
CLOCK_TOPIC = "xri/sys/clock"

_KIND_LEVEL = {
    EventKind.PRESENCE: "presence",
    EventKind.LIGHT_LEVEL: "light",
    EventKind.ACTIVITY: "activity",
    EventKind.MOISTURE: "moisture",
    EventKind.COMMAND: "command",
}
_LEVEL_KIND = {v: k for k, v in _KIND_LEVEL.items()}


def context_topic(zone: str, source: str, kind: EventKind) -> str:
    _check_level(zone, "zone")
    _check_level(source, "source")
    return f"{ROOT}/context/{zone}/{source}/{_KIND_LEVEL[kind]}"


def agent_state_topic(agent_id: str) -> str:
    _check_level(agent_id, "agent_id")
    return f"{ROOT}/agent/{agent_id}/state"


def agent_cmd_topic(agent_id: str) -> str:
    _check_level(agent_id, "agent_id")
    return f"{ROOT}/agent/{agent_id}/cmd"


def situation_topic(zone: str) -> str:
    _check_level(zone, "zone")
    return f"{ROOT}/scenario/{zone}/situation"


def topic_for(event: ContextEvent) -> str:
    return context_topic(event.zone, event.source, event.kind)


@dataclass(frozen=True)
class ParsedTopic:
    """Structured view of a schema topic. ``category`` is one of
    context | agent_state | agent_cmd | situation | clock."""

    category: str
    zone: str | None = None
    source: str | None = None
    kind: EventKind | None = None
    agent_id: str | None = None


def parse_topic(topic: str) -> ParsedTopic:
    """Inverse of the constructors; raises SchemaError off the schema tree."""
    levels = topic.split("/")
    if topic == CLOCK_TOPIC:
        return ParsedTopic(category="clock")
    if len(levels) == 5 and levels[0] == ROOT and levels[1] == "context":
        kind = _LEVEL_KIND.get(levels[4])
        if kind is None:
            raise SchemaError(f"unknown context kind level {levels[4]!r} in {topic!r}")
        return ParsedTopic(category="context", zone=levels[2], source=levels[3], kind=kind)
    if len(levels) == 4 and levels[0] == ROOT and levels[1] == "agent":
        if levels[3] == "state":
            return ParsedTopic(category="agent_state", agent_id=levels[2])
        if levels[3] == "cmd":
            return ParsedTopic(category="agent_cmd", agent_id=levels[2])
    if len(levels) == 4 and levels[0] == ROOT and levels[1] == "scenario" and levels[3] == "situation":
        return ParsedTopic(category="situation", zone=levels[2])
    raise SchemaError(f"topic {topic!r} is outside the schema tree")
