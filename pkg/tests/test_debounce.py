"""Debounce semantics: seeds, flap suppression, confirmed transitions."""

from hypothesis import given, strategies as st

from xri.context.debounce import Debouncer


def drive(deb: Debouncer, samples, end=None):
    out = []
    for ts, value in samples:
        out.extend(deb.feed(ts, value))
    if end is not None:
        out.extend(deb.flush(end))
    return [(ts, v) for ts, v, _ in out]


def test_first_sample_seeds_immediately():
    deb = Debouncer(500)
    assert drive(deb, [(0, True)]) == [(0, True)]


def test_flap_within_window_suppressed():
    deb = Debouncer(500)
    emitted = drive(deb, [(0, True), (100, False), (200, True)], end=1000)
    assert emitted == [(0, True)]


def test_stable_change_emitted_once_with_change_timestamp():
    deb = Debouncer(500)
    emitted = drive(deb, [(0, False), (1000, True), (1600, True), (2200, True)], end=3000)
    assert emitted == [(0, False), (1000, True)]


def test_alternation_slower_than_window_all_emitted():
    deb = Debouncer(500)
    samples = [(i * 600, i % 2 == 0) for i in range(6)]
    emitted = drive(deb, samples, end=4000)
    assert emitted == samples


def test_exact_window_gap_confirms():
    deb = Debouncer(500)
    emitted = drive(deb, [(0, False), (100, True), (600, True)])
    assert emitted == [(0, False), (100, True)]


def test_change_of_target_restarts_hold():
    deb = Debouncer(500)
    # A -> B at 1000 never holds: B -> C at 1300 replaces it
    emitted = drive(deb, [(0, "A"), (1000, "B"), (1300, "C")], end=2000)
    assert emitted == [(0, "A"), (1300, "C")]


def test_unconfirmed_tail_change_dropped():
    deb = Debouncer(500)
    emitted = drive(deb, [(0, False), (1000, True)], end=1200)
    assert emitted == [(0, False)]


def test_rider_carried_through():
    deb = Debouncer(100)
    out = deb.feed(0, False, rider="seed-rider")
    assert out == [(0, False, "seed-rider")]
    deb.feed(50, True, rider="change-rider")
    out = deb.flush(400)
    assert out == [(50, True, "change-rider")]


def test_zero_window_passes_every_change():
    deb = Debouncer(0)
    emitted = drive(deb, [(0, False), (1, True), (2, False)], end=2)
    assert emitted == [(0, False), (1, True), (2, False)]


@given(
    st.lists(
        st.tuples(st.integers(min_value=0, max_value=50), st.booleans()),
        min_size=1,
        max_size=60,
    ),
    st.integers(min_value=1, max_value=2000),
)
def test_emitted_transitions_respect_minimum_gap(deltas, window):
    """Property: transition emissions (after the seed) are >= window apart
    and form a subsequence of the input changes."""
    deb = Debouncer(window)
    ts = 0
    samples = []
    for delta, value in deltas:
        ts += delta
        samples.append((ts, value))
    emitted = drive(deb, samples, end=ts + window * 2)
    # transitions exclude the seed emission
    transitions = emitted[1:]
    for (t1, _), (t2, _) in zip(transitions, transitions[1:]):
        assert t2 - t1 >= window
    # each emission matches some input sample (timestamp and value)
    sample_set = set(samples)
    for item in emitted:
        assert item in sample_set
    # consecutive emissions always change value
    values = [v for _, v in emitted]
    for a, b in zip(values, values[1:]):
        assert a != b
