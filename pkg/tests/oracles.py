"""Independent brute-force oracles the implementation is checked against.

These deliberately avoid the package's own code paths.
"""

from __future__ import annotations

import itertools


def varint_encode_oracle(value: int) -> bytes:
    """Base-128 little-endian-group encoding, written out longhand."""
    digits = []
    if value == 0:
        digits = [0]
    else:
        v = value
        while v:
            digits.append(v % 128)
            v //= 128
    return bytes(
        d | 0x80 if i < len(digits) - 1 else d for i, d in enumerate(digits)
    )


def varint_decode_oracle(data: bytes) -> int | None:
    """Decode a whole buffer as one varint; None if it is not exactly one
    minimally-encoded varint of <= 4 bytes."""
    if not 1 <= len(data) <= 4:
        return None
    value = 0
    for i, byte in enumerate(data):
        last = i == len(data) - 1
        if last and byte & 0x80:
            return None
        if not last and not byte & 0x80:
            return None
        value += (byte & 0x7F) * (128**i)
    if varint_encode_oracle(value) != data:
        return None  # non-minimal
    return value


def match_oracle(filter_levels: list[str], topic_levels: list[str]) -> bool:
    """Recursive statement of the wildcard rules."""
    if not filter_levels:
        return not topic_levels
    head, rest = filter_levels[0], filter_levels[1:]
    if head == "#":
        return True  # matches the remainder, including nothing
    if not topic_levels:
        return False
    if head == "+" or head == topic_levels[0]:
        return match_oracle(rest, topic_levels[1:])
    return False


def enumerate_topics(alphabet=("a", "b"), max_levels: int = 4):
    for n in range(1, max_levels + 1):
        for combo in itertools.product(alphabet, repeat=n):
            yield "/".join(combo)


def enumerate_filters(alphabet=("a", "b"), max_levels: int = 4):
    symbols = list(alphabet) + ["+"]
    for n in range(1, max_levels + 1):
        for combo in itertools.product(symbols, repeat=n):
            yield "/".join(combo)
        for combo in itertools.product(symbols, repeat=n - 1):
            yield "/".join(list(combo) + ["#"])


def count_diff_oracle(a: bytes, b: bytes, min_delta: int) -> int:
    """Pixel-counting loop written independently of the kernel."""
    total = 0
    for i in range(len(a)):
        delta = a[i] - b[i]
        if delta < 0:
            delta = -delta
        if delta >= min_delta:
            total += 1
    return total
