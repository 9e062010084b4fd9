"""Spectrogram pixmaps with word-boundary sidecars."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .alignment import UtteranceAlignment


def to_gray(features: np.ndarray) -> np.ndarray:
    """uint8 image (mel bins x frames), highest bin on the top row.

    Values are linearly rescaled to 0..255; a constant matrix maps to 128.
    """
    feats = np.asarray(features, dtype=np.float64)
    lo, hi = feats.min(), feats.max()
    if hi - lo <= 0:
        gray = np.full(feats.shape, 128, dtype=np.uint8)
    else:
        gray = np.round((feats - lo) / (hi - lo) * 255.0).astype(np.uint8)
    return gray.T[::-1]


def ppm_bytes(features: np.ndarray) -> bytes:
    gray = to_gray(features)
    height, width = gray.shape
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    return f"P6\n{width} {height}\n255\n".encode("ascii") + rgb.tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    """Decode a binary P6 pixmap as written by ppm_bytes (no comments)."""
    fields = data.split(maxsplit=4)
    if fields[0] != b"P6":
        raise ValueError("not a P6 pixmap")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError("only 8-bit pixmaps are supported")
    header_len = len(b"P6\n%d %d\n255\n" % (width, height))
    pixels = np.frombuffer(data[header_len:], dtype=np.uint8)
    return pixels.reshape(height, width, 3)


def boundary_lines(tokens: Sequence[str], alignment: UtteranceAlignment) -> list[str]:
    """``token<TAB>start_frame<TAB>end_frame`` with an exclusive end frame."""
    return [f"{tok}\t{s.start_frame}\t{s.end_frame}" for tok, s in zip(tokens, alignment.spans)]
