"""Topic name/filter validation and wildcard matching vs the recursive oracle."""

import pytest

from oracles import enumerate_filters, enumerate_topics, match_oracle
from xri.fabric.topics import TopicError, TopicFilter, TopicName, topic_matches


@pytest.mark.parametrize("bad", ["", "a/+/b", "a/#", "#", "a/b+", "nul\x00l"])
def test_topic_name_rejects(bad):
    with pytest.raises(TopicError):
        TopicName(bad)


@pytest.mark.parametrize("good", ["a", "a/b/c", "xri/context/desk1/cam0/presence", "a//b", "/"])
def test_topic_name_round_trips(good):
    assert str(TopicName(good)) == good


@pytest.mark.parametrize("bad", ["", "a/#/b", "#b", "a/b#", "a/+b", "+a/b", "a/##"])
def test_topic_filter_rejects(bad):
    with pytest.raises(TopicError):
        TopicFilter(bad)


@pytest.mark.parametrize("good", ["#", "+", "a/+/c", "a/#", "+/+/+", "xri/#"])
def test_topic_filter_accepts(good):
    assert str(TopicFilter(good)) == good


@pytest.mark.parametrize(
    "topic_filter,topic,expected",
    [
        ("xri/context/+/presence", "xri/context/zone1/presence", True),
        ("xri/context/+/presence", "xri/context/zone1/presence/raw", False),
        ("xri/#", "xri", True),  # '#' covers zero remaining levels
        ("xri/#", "xri/a/b/c", True),
        ("#", "anything/at/all", True),
        ("+", "one", True),
        ("+", "one/two", False),
        ("a/+/c", "a/b/c", True),
        ("a/+/c", "a/b/d", False),
    ],
)
def test_matching_examples(topic_filter, topic, expected):
    assert topic_matches(topic_filter, topic) is expected


def test_matching_agrees_with_oracle_exhaustively():
    """Full enumeration, <=4 levels over a 2-literal alphabet."""
    filters = list(enumerate_filters(max_levels=4))
    topics = list(enumerate_topics(max_levels=4))
    pairs = 0
    for topic_filter in filters:
        parsed = TopicFilter(topic_filter)
        for topic in topics:
            expected = match_oracle(topic_filter.split("/"), topic.split("/"))
            assert topic_matches(parsed, TopicName(topic)) is expected, (topic_filter, topic)
            pairs += 1
    assert pairs > 4000


def test_plus_does_not_match_empty_vs_multi():
    assert topic_matches("a/+", "a/b")
    assert not topic_matches("a/+", "a")
    assert not topic_matches("a/+", "a/b/c")
