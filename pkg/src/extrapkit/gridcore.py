"""Dense grids, crop rectangles, padding and resampling.

Grids are plain numpy arrays laid out ``(height, width)`` or
``(height, width, channels)``. Real-valued grids are float64 throughout;
integer arrays are treated as label grids and are never interpolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class CropRegion:
    top: int
    left: int
    height: int
    width: int

    def __post_init__(self):
        if self.height <= 0 or self.width <= 0:
            raise InvalidInputError(f"crop region must be non-empty, got {self}")
        if self.top < 0 or self.left < 0:
            raise InvalidInputError(f"crop region has negative origin: {self}")

    @property
    def bottom(self) -> int:
        return self.top + self.height

    @property
    def right(self) -> int:
        return self.left + self.width

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.top, self.bottom), slice(self.left, self.right)

    def fits(self, frame_h: int, frame_w: int) -> bool:
        return self.bottom <= frame_h and self.right <= frame_w

    def mask(self, frame_h: int, frame_w: int) -> np.ndarray:
        """Boolean ``(frame_h, frame_w)`` mask, True inside the region."""
        self.require_within(frame_h, frame_w)
        m = np.zeros((frame_h, frame_w), dtype=bool)
        m[self.slices] = True
        return m

    def require_within(self, frame_h: int, frame_w: int) -> None:
        if not self.fits(frame_h, frame_w):
            raise InvalidInputError(
                f"region {self} exceeds frame {frame_h}x{frame_w}")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def as_grid(a) -> np.ndarray:
    """Validate and return a float64 copy shaped (H, W) or (H, W, C)."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim not in (2, 3) or min(arr.shape) < 1:
        raise InvalidInputError(f"expected a non-empty 2-D or 3-D grid, got shape {arr.shape}")
    return arr


def center_crop(frame_h: int, frame_w: int, ratio: float) -> CropRegion:
    """Centered region of ``ratio`` times each frame side.

    Sizes round half up; an odd leftover pixel goes to the bottom/right margin.
    """
    if frame_h < 1 or frame_w < 1:
        raise InvalidInputError(f"degenerate frame {frame_h}x{frame_w}")
    if not 0.0 < ratio <= 1.0:
        raise InvalidInputError(f"crop ratio must lie in (0, 1], got {ratio}")
    h = round_half_up(ratio * frame_h)
    w = round_half_up(ratio * frame_w)
    if h < 1 or w < 1:
        raise InvalidInputError(
            f"ratio {ratio} collapses frame {frame_h}x{frame_w} to {h}x{w}")
    return CropRegion((frame_h - h) // 2, (frame_w - w) // 2, h, w)


def crop(grid: np.ndarray, region: CropRegion) -> np.ndarray:
    grid = np.asarray(grid)
    region.require_within(grid.shape[0], grid.shape[1])
    return grid[region.slices].copy()


def zero_pad(grid: np.ndarray, region: CropRegion, out_h: int, out_w: int) -> np.ndarray:
    """Place ``grid`` at ``region`` inside an otherwise zero frame."""
    grid = np.asarray(grid)
    region.require_within(out_h, out_w)
    if grid.shape[:2] != (region.height, region.width):
        raise InvalidInputError(
            f"grid {grid.shape[:2]} does not match region {region.height}x{region.width}")
    out = np.zeros((out_h, out_w) + grid.shape[2:], dtype=grid.dtype)
    out[region.slices] = grid
    return out


def catmull_rom(x: np.ndarray, a: float = -0.5) -> np.ndarray:
    """Keys cubic convolution kernel; ``a = -0.5`` gives Catmull-Rom."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    x2, x3 = x * x, x * x * x
    near = (a + 2.0) * x3 - (a + 3.0) * x2 + 1.0
    far = a * x3 - 5.0 * a * x2 + 8.0 * a * x - 4.0 * a
    return np.where(x <= 1.0, near, np.where(x < 2.0, far, 0.0))


def _bicubic_matrix(n_in: int, n_out: int) -> np.ndarray:
    # Row i holds the tap weights of output sample i over the input axis.
    scale = n_in / n_out
    src = (np.arange(n_out) + 0.5) * scale - 0.5
    base = np.floor(src).astype(np.int64)
    m = np.zeros((n_out, n_in))
    rows = np.arange(n_out)
    for k in range(-1, 3):
        idx = base + k
        w = catmull_rom(src - idx)
        np.add.at(m, (rows, np.clip(idx, 0, n_in - 1)), w)
    return m


def _nearest_index(n_in: int, n_out: int) -> np.ndarray:
    idx = np.floor((np.arange(n_out) + 0.5) * (n_in / n_out)).astype(np.int64)
    return np.clip(idx, 0, n_in - 1)


def resample(grid: np.ndarray, out_h: int, out_w: int, mode: str = "bicubic") -> np.ndarray:
    """Resize a grid with nearest-neighbour or Catmull-Rom bicubic sampling.

    Bicubic sampling is edge-clamped and evaluated at pixel centres; it does
    not low-pass filter before downsampling. Integer grids hold class ids and
    only accept ``mode="nearest"``.
    """
    grid = np.asarray(grid)
    if out_h < 1 or out_w < 1:
        raise InvalidInputError(f"output dims must be positive, got {out_h}x{out_w}")
    if grid.ndim not in (2, 3) or min(grid.shape) < 1:
        raise InvalidInputError(f"expected a non-empty 2-D or 3-D grid, got shape {grid.shape}")
    h, w = grid.shape[:2]
    if mode == "nearest":
        return grid[_nearest_index(h, out_h)][:, _nearest_index(w, out_w)].copy()
    if mode != "bicubic":
        raise InvalidInputError(f"unknown resample mode {mode!r}")
    if not np.issubdtype(grid.dtype, np.floating):
        raise InvalidInputError("bicubic resampling of an integer label grid")
    grid = grid.astype(np.float64)
    if (h, w) == (out_h, out_w):
        return grid.copy()
    rows = _bicubic_matrix(h, out_h)
    cols = _bicubic_matrix(w, out_w)
    tmp = np.tensordot(rows, grid.reshape(h, w, -1), axes=(1, 0))
    out = np.tensordot(tmp, cols, axes=(1, 1)).transpose(0, 2, 1)
    return np.ascontiguousarray(out).reshape((out_h, out_w) + grid.shape[2:])
