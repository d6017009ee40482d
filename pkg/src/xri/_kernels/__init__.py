"""Kernel dispatch: compiled extension when built, pure Python otherwise.

Set ``XRI_PURE_KERNELS=1`` to force the pure implementation (used by the
benchmark and the parity tests).
"""

import os

if os.environ.get("XRI_PURE_KERNELS"):
    _impl = None
else:
    try:
        from xri._kernels import _speedups as _impl
    except ImportError:
        _impl = None

if _impl is not None:
    IMPLEMENTATION = "compiled"
    varint_encode = _impl.varint_encode
    varint_decode = _impl.varint_decode
    topic_matches = _impl.topic_matches
    count_diff_pixels = _impl.count_diff_pixels
    pixel_sum = _impl.pixel_sum
    VARINT_MAX = _impl.VARINT_MAX
else:
    IMPLEMENTATION = "pure"
    from xri._kernels.pure import (  # noqa: F401
        VARINT_MAX,
        count_diff_pixels,
        pixel_sum,
        topic_matches,
        varint_decode,
        varint_encode,
    )

__all__ = [
    "IMPLEMENTATION",
    "VARINT_MAX",
    "varint_encode",
    "varint_decode",
    "topic_matches",
    "count_diff_pixels",
    "pixel_sum",
]
