"""Hierarchical topic names and filters with MQTT wildcard semantics.

``TopicName`` is a concrete address (no wildcards); ``TopicFilter`` may use
'+' for exactly one level and a terminal '#' for all remaining levels,
including zero of them. Validity is enforced at construction so matching can
assume well-formed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

from xri._kernels import topic_matches as _kernel_matches


class TopicError(ValueError):
    """Topic name or filter violates the syntax rules."""


def _split(value: str, what: str) -> tuple[str, ...]:
    if not isinstance(value, str):
        raise TopicError(f"{what} must be a string")
    if value == "":
        raise TopicError(f"{what} must not be empty")
    if "\x00" in value:
        raise TopicError(f"{what} must not contain U+0000")
    return tuple(value.split("/"))


@dataclass(frozen=True)
class TopicName:
    """A concrete topic: one or more levels, joined by '/'. No wildcards."""

    levels: tuple[str, ...]

    def __init__(self, value: str):
        levels = _split(value, "topic name")
        for level in levels:
            if "+" in level or "#" in level:
                raise TopicError(f"wildcard character in topic name {value!r}")
        object.__setattr__(self, "levels", levels)

    def __str__(self) -> str:
        return "/".join(self.levels)


@dataclass(frozen=True)
class TopicFilter:
    """A subscription pattern. '+' fills a whole level; '#' only terminates."""

    levels: tuple[str, ...]

    def __init__(self, value: str):
        levels = _split(value, "topic filter")
        for i, level in enumerate(levels):
            if "#" in level:
                if level != "#" or i != len(levels) - 1:
                    raise TopicError(f"'#' must be the entire final level in {value!r}")
            elif "+" in level and level != "+":
                raise TopicError(f"'+' must occupy an entire level in {value!r}")
        object.__setattr__(self, "levels", levels)

    def __str__(self) -> str:
        return "/".join(self.levels)

    def matches(self, topic: TopicName | str) -> bool:
        return topic_matches(self, topic)


def topic_matches(topic_filter: TopicFilter | str, topic: TopicName | str) -> bool:
    """True iff ``topic_filter`` matches ``topic``.

    Accepts validated objects or plain strings (which get validated first).
    """
    if isinstance(topic_filter, str):
        topic_filter = TopicFilter(topic_filter)
    if isinstance(topic, str):
        topic = TopicName(topic)
    return _kernel_matches(str(topic_filter), str(topic))
