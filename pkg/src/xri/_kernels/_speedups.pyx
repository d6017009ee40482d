# cython: boundscheck=False, wraparound=False
"""Compiled kernels for the hot inner loops.

Contract-identical to ``xri._kernels.pure``; selected at import time when the
extension built successfully.
"""

DEF VARINT_MAX_C = 268435455

VARINT_MAX = VARINT_MAX_C


def varint_encode(value):
    """Encode a remaining-length integer as a 1-4 byte MQTT varint."""
    cdef long long v = value
    cdef unsigned char out[4]
    cdef int n = 0
    cdef unsigned char byte
    if v < 0 or v > VARINT_MAX_C:
        raise ValueError(f"varint out of range: {value}")
    while True:
        byte = v & 0x7F
        v >>= 7
        if v:
            out[n] = byte | 0x80
        else:
            out[n] = byte
            n += 1
            return out[:n]
        n += 1


def varint_decode(data, Py_ssize_t offset=0):
    """Decode a varint at ``offset``; returns (value, bytes_consumed)."""
    cdef const unsigned char[:] buf = data
    cdef Py_ssize_t size = buf.shape[0]
    cdef long long value = 0
    cdef int shift = 0
    cdef int consumed = 0
    cdef unsigned char byte
    cdef Py_ssize_t i
    for i in range(offset, size):
        byte = buf[i]
        consumed += 1
        if consumed > 4:
            raise ValueError("varint longer than 4 bytes")
        value |= (<long long> (byte & 0x7F)) << shift
        if not byte & 0x80:
            if byte == 0 and consumed > 1:
                raise ValueError("non-minimal varint encoding")
            return value, consumed
        shift += 7
    if consumed >= 4:
        raise ValueError("varint longer than 4 bytes")
    return 0, 0


def topic_matches(str filter_str, str topic):
    """True iff an MQTT topic filter matches a concrete topic name."""
    cdef list flevels = filter_str.split("/")
    cdef list tlevels = topic.split("/")
    cdef Py_ssize_t nf = len(flevels)
    cdef Py_ssize_t nt = len(tlevels)
    cdef Py_ssize_t i
    cdef str flevel
    for i in range(nf):
        flevel = <str> flevels[i]
        if flevel == "#":
            return True
        if i >= nt:
            return False
        if flevel != "+" and flevel != <str> tlevels[i]:
            return False
    return nf == nt


def count_diff_pixels(a, b, int min_delta):
    """Count pixels whose absolute difference is >= min_delta."""
    cdef const unsigned char[:] va = a
    cdef const unsigned char[:] vb = b
    cdef Py_ssize_t n = va.shape[0]
    cdef Py_ssize_t i
    cdef int d
    cdef long long count = 0
    if n != vb.shape[0]:
        raise ValueError(
            f"pixel buffer length mismatch: {va.shape[0]} != {vb.shape[0]}"
        )
    for i in range(n):
        d = va[i] - vb[i]
        if d < 0:
            d = -d
        if d >= min_delta:
            count += 1
    return count


def pixel_sum(data):
    """Sum of all 8-bit pixel values."""
    cdef const unsigned char[:] buf = data
    cdef Py_ssize_t n = buf.shape[0]
    cdef Py_ssize_t i
    cdef long long total = 0
    for i in range(n):
        total += buf[i]
    return total
