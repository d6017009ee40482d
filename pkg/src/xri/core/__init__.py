"""Shared domain vocabulary: agent profiles, context events, topic schema."""

from xri.core.events import (
    Activity,
    AgentStatePayload,
    CommandValue,
    ContextEvent,
    EventKind,
    LightValue,
    PlantAlert,
    SchemaError,
    SituationSet,
    UserMode,
    decode_clock,
    decode_event,
    decode_situation,
    decode_state,
    encode_clock,
    encode_event,
    encode_situation,
    encode_state,
)
from xri.core.profiles import (
    Agency,
    AgencyTrait,
    ControllerKind,
    CubeAxis,
    MiraProfile,
    profile_from_json,
    profile_to_json,
    validate_profile,
)
from xri.core.schema import (
    CLOCK_TOPIC,
    agent_cmd_topic,
    agent_state_topic,
    context_topic,
    parse_topic,
    situation_topic,
    topic_for,
)

__all__ = [
    "Agency",
    "AgencyTrait",
    "ControllerKind",
    "CubeAxis",
    "MiraProfile",
    "validate_profile",
    "profile_to_json",
    "profile_from_json",
    "EventKind",
    "Activity",
    "LightValue",
    "CommandValue",
    "ContextEvent",
    "AgentStatePayload",
    "SituationSet",
    "UserMode",
    "PlantAlert",
    "SchemaError",
    "encode_event",
    "decode_event",
    "encode_state",
    "decode_state",
    "encode_situation",
    "decode_situation",
    "encode_clock",
    "decode_clock",
    "CLOCK_TOPIC",
    "context_topic",
    "agent_state_topic",
    "agent_cmd_topic",
    "situation_topic",
    "topic_for",
    "parse_topic",
]
