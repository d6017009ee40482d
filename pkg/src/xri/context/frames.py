"""8-bit grayscale frames: the binary PGM (P5) file format and synthesis.

Synthetic frames (uniform base luminance, seeded noise, an optional brighter
or darker rectangle standing in for a person) let sensor scripts describe
camera input without shipping image assets.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Frame:
    width: int
    height: int
    pixels: bytes  # row-major, one byte per pixel
    source: str = ""
    ts: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"frame dimensions must be >= 1, got {self.width}x{self.height}")
        if len(self.pixels) != self.width * self.height:
            raise ValueError(
                f"pixel buffer of {len(self.pixels)} bytes does not match "
                f"{self.width}x{self.height}"
            )


def _read_header_token(data: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comments, then read one token
    while pos < len(data):
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < len(data) and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("truncated PGM header")
    return data[start:pos], pos


def read_pgm(path, source: str = "", ts: int = 0) -> Frame:
    """Read a binary (P5) PGM file with maxval <= 255, bit-exactly."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, pos = _read_header_token(data, 0)
    if magic != b"P5":
        raise ValueError(f"not a binary PGM (P5) file: magic {magic!r}")
    width_tok, pos = _read_header_token(data, pos)
    height_tok, pos = _read_header_token(data, pos)
    maxval_tok, pos = _read_header_token(data, pos)
    try:
        width, height, maxval = int(width_tok), int(height_tok), int(maxval_tok)
    except ValueError:
        raise ValueError("non-numeric PGM header fields") from None
    if maxval > 255 or maxval < 1:
        raise ValueError(f"only 8-bit PGM supported, maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    pixels = data[pos : pos + width * height]
    if len(pixels) != width * height:
        raise ValueError(f"PGM pixel data truncated: {len(pixels)} of {width * height} bytes")
    return Frame(width=width, height=height, pixels=pixels, source=source, ts=ts)


def write_pgm(path, frame: Frame) -> None:
    with open(path, "wb") as fh:
        fh.write(f"P5\n{frame.width} {frame.height}\n255\n".encode("ascii"))
        fh.write(frame.pixels)


@dataclass(frozen=True)
class Blob:
    """Axis-aligned rectangle of different luminance inside a synth frame."""

    x: int
    y: int
    width: int
    height: int
    value: int


def synth_frame(
    width: int,
    height: int,
    base: int,
    noise: int = 0,
    rng: random.Random | None = None,
    blob: Blob | None = None,
    source: str = "",
    ts: int = 0,
) -> Frame:
    """Uniform frame at ``base`` luminance with +/-``noise`` per pixel.

    The noise sequence is drawn from ``rng``, so identical seeds give
    byte-identical frames.
    """
    pixels = bytearray(width * height)
    for row in range(height):
        for col in range(width):
            value = base
            if blob is not None and blob.x <= col < blob.x + blob.width and blob.y <= row < blob.y + blob.height:
                value = blob.value
            if noise and rng is not None:
                value += rng.randint(-noise, noise)
            pixels[row * width + col] = min(255, max(0, value))
    return Frame(width=width, height=height, pixels=bytes(pixels), source=source, ts=ts)
