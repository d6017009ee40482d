"""Pure-Python kernels for the hot inner loops.

Same contracts as the compiled twin in ``_speedups.pyx``; used whenever the
extension is unavailable or ``XRI_PURE_KERNELS`` is set.
"""

VARINT_MAX = 268_435_455  # 4 varint bytes, 7 data bits each


def varint_encode(value: int) -> bytes:
    """Encode a remaining-length integer as a 1-4 byte MQTT varint."""
    if value < 0 or value > VARINT_MAX:
        raise ValueError(f"varint out of range: {value}")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def varint_decode(data: bytes, offset: int = 0) -> tuple[int, int]:
    """Decode a varint at ``offset``; returns (value, bytes_consumed).

    ``bytes_consumed == 0`` means the buffer ends mid-varint (need more
    bytes). Raises ValueError for a continuation run past 4 bytes and for
    non-minimal encodings (a trailing 0x00 continuation byte), which keeps
    encode(decode(x)) == x.
    """
    value = 0
    shift = 0
    consumed = 0
    for i in range(offset, len(data)):
        byte = data[i]
        consumed += 1
        if consumed > 4:
            raise ValueError("varint longer than 4 bytes")
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            if byte == 0 and consumed > 1:
                raise ValueError("non-minimal varint encoding")
            return value, consumed
        shift += 7
    if consumed >= 4:
        raise ValueError("varint longer than 4 bytes")
    return 0, 0


def topic_matches(filter_str: str, topic: str) -> bool:
    """True iff an MQTT topic filter matches a concrete topic name.

    '+' matches exactly one level, a terminal '#' matches the remaining
    levels including zero of them. Inputs are assumed syntactically valid
    (enforced by the TopicFilter/TopicName constructors).
    """
    flevels = filter_str.split("/")
    tlevels = topic.split("/")
    for i, flevel in enumerate(flevels):
        if flevel == "#":
            return True
        if i >= len(tlevels):
            return False
        if flevel != "+" and flevel != tlevels[i]:
            return False
    return len(flevels) == len(tlevels)


def count_diff_pixels(a: bytes, b: bytes, min_delta: int) -> int:
    """Count pixels whose absolute difference is >= min_delta."""
    if len(a) != len(b):
        raise ValueError(f"pixel buffer length mismatch: {len(a)} != {len(b)}")
    count = 0
    for x, y in zip(a, b):
        if abs(x - y) >= min_delta:
            count += 1
    return count


def pixel_sum(data: bytes) -> int:
    """Sum of all 8-bit pixel values."""
    return sum(data)
