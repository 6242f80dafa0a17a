"""Seeded patch geometry for the patch co-occurrence discriminator.

All samplers take an explicit ``numpy.random.Generator``; nothing touches
global random state. Only rectangles are produced here; cutting pixels out
is :func:`extrapkit.gridcore.crop`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .gridcore import CropRegion

MAX_ATTEMPTS = 10_000


@dataclass(frozen=True)
class PatchTriple:
    # Shared by the fake and the real patch.
    patch_rect: CropRegion
    reference_rects: tuple[CropRegion, ...]
    patch_size: int


def _check_size(frame_h: int, frame_w: int, size: int) -> None:
    if size < 1 or size > min(frame_h, frame_w):
        raise InvalidInputError(f"patch size {size} does not fit frame {frame_h}x{frame_w}")


def straddles(top: int, left: int, size: int, crop: CropRegion) -> bool:
    """True if the ``size`` square at (top, left) has pixels on both sides of ``crop``."""
    overlap = (top < crop.bottom and top + size > crop.top
               and left < crop.right and left + size > crop.left)
    contained = (top >= crop.top and top + size <= crop.bottom
                 and left >= crop.left and left + size <= crop.right)
    return overlap and not contained


def valid_straddle_positions(frame_h: int, frame_w: int, crop: CropRegion, size: int) -> np.ndarray:
    """Boolean map over top-left positions, True where the patch straddles."""
    tops = np.arange(frame_h - size + 1)[:, None]
    lefts = np.arange(frame_w - size + 1)[None, :]
    overlap = ((tops < crop.bottom) & (tops + size > crop.top)
               & (lefts < crop.right) & (lefts + size > crop.left))
    contained = ((tops >= crop.top) & (tops + size <= crop.bottom)
                 & (lefts >= crop.left) & (lefts + size <= crop.right))
    return overlap & ~contained


def sample_straddle_rect(rng: np.random.Generator, frame_h: int, frame_w: int,
                         crop: CropRegion, size: int = 64) -> CropRegion:
    """Uniformly pick a square that is partly inside and partly outside ``crop``."""
    _check_size(frame_h, frame_w, size)
    crop.require_within(frame_h, frame_w)
    if crop.height == frame_h and crop.width == frame_w:
        raise InvalidInputError("crop covers the whole frame; no patch can straddle it")
    for _ in range(MAX_ATTEMPTS):
        top = int(rng.integers(0, frame_h - size + 1))
        left = int(rng.integers(0, frame_w - size + 1))
        if straddles(top, left, size, crop):
            return CropRegion(top, left, size, size)
    valid = np.flatnonzero(valid_straddle_positions(frame_h, frame_w, crop, size))
    if valid.size == 0:
        raise InvalidInputError(f"no {size}x{size} patch straddles {crop}")
    top, left = divmod(int(valid[rng.integers(0, valid.size)]), frame_w - size + 1)
    return CropRegion(top, left, size, size)


def sample_reference_rects(rng: np.random.Generator, frame_h: int, frame_w: int,
                           size: int = 64, n: int = 4) -> list[CropRegion]:
    _check_size(frame_h, frame_w, size)
    tops = rng.integers(0, frame_h - size + 1, size=n)
    lefts = rng.integers(0, frame_w - size + 1, size=n)
    return [CropRegion(int(t), int(l), size, size) for t, l in zip(tops, lefts)]


def make_triples(rng: np.random.Generator, frame_h: int, frame_w: int, crop: CropRegion,
                 size: int = 64, count: int = 4, n_references: int = 4) -> list[PatchTriple]:
    out = []
    for _ in range(count):
        rect = sample_straddle_rect(rng, frame_h, frame_w, crop, size)
        refs = sample_reference_rects(rng, frame_h, frame_w, size, n_references)
        out.append(PatchTriple(rect, tuple(refs), size))
    return out
