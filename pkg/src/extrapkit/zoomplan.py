"""Recursive 2x extrapolation and zoom-out video frame scheduling.

Image index 0 is the original input; index ``t`` (1-based) is the ``t``-th
extrapolation, which is twice the base size in each dimension.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractViolation, InvalidInputError
from .gridcore import CropRegion, center_crop, crop, resample, round_half_up, zero_pad


@dataclass(frozen=True)
class FrameSpec:
    image_index: int
    region: CropRegion
    out_dims: tuple[int, int]


@dataclass(frozen=True)
class ZoomSchedule:
    base_dims: tuple[int, int]
    steps: int
    frames_per_transition: int
    intro_frames: int
    frames: tuple[FrameSpec, ...]

    def __len__(self) -> int:
        return len(self.frames)


def pad_stub(image: np.ndarray) -> np.ndarray:
    """Stand-in extrapolator: center the input in a zero frame twice its size."""
    h, w = image.shape[:2]
    return zero_pad(image, center_crop(2 * h, 2 * w, 0.5), 2 * h, 2 * w)


def recursive_extrapolate(extrapolator: Callable[[np.ndarray], np.ndarray], image,
                          steps: int = 6) -> list[np.ndarray]:
    """Run ``extrapolator`` ``steps`` times, halving each output to form the next input."""
    if steps < 1:
        raise InvalidInputError("steps must be >= 1")
    current = np.asarray(image, dtype=np.float64)
    outputs = []
    for t in range(steps):
        h, w = current.shape[:2]
        out = np.asarray(extrapolator(current), dtype=np.float64)
        if out.shape != (2 * h, 2 * w) + current.shape[2:]:
            raise ContractViolation(
                f"extrapolator returned {out.shape} at step {t + 1}, "
                f"expected {(2 * h, 2 * w) + current.shape[2:]}")
        outputs.append(out)
        current = resample(out, h, w, "bicubic")
    return outputs


def build_schedule(base_dims, steps: int = 6, frames_per_transition: int = 64,
                   intro_frames: int = 30) -> ZoomSchedule:
    """Frame plan: intro frames of the input, then per transition a centered
    crop growing from the base size to the full 2x extrapolation."""
    H, W = (int(d) for d in base_dims)
    if H < 1 or W < 1:
        raise InvalidInputError(f"base dims must be positive, got {base_dims}")
    if steps < 1 or frames_per_transition < 1 or intro_frames < 0:
        raise InvalidInputError("steps and frames_per_transition must be >= 1, intro_frames >= 0")
    F = frames_per_transition
    full = CropRegion(0, 0, H, W)
    frames = [FrameSpec(0, full, (H, W)) for _ in range(intro_frames)]
    for t in range(1, steps + 1):
        for f in range(1, F + 1):
            h = H + round_half_up(f * H / F)
            w = W + round_half_up(f * W / F)
            region = CropRegion((2 * H - h) // 2, (2 * W - w) // 2, h, w)
            frames.append(FrameSpec(t, region, (H, W)))
    return ZoomSchedule((H, W), steps, F, intro_frames, tuple(frames))


def render_frame(spec: FrameSpec, images) -> np.ndarray:
    img = np.asarray(images[spec.image_index], dtype=np.float64)
    return resample(crop(img, spec.region), *spec.out_dims, mode="bicubic")


def check_images(schedule: ZoomSchedule, images) -> None:
    H, W = schedule.base_dims
    if len(images) != schedule.steps + 1:
        raise InvalidInputError(
            f"schedule needs {schedule.steps + 1} images (input + extrapolations), got {len(images)}")
    for i, img in enumerate(images):
        want = (H, W) if i == 0 else (2 * H, 2 * W)
        if np.shape(img)[:2] != want:
            raise InvalidInputError(f"image {i} has dims {np.shape(img)[:2]}, expected {want}")


def render_frames(schedule: ZoomSchedule, images) -> list[np.ndarray]:
    """Crop and bicubic-resample every scheduled frame to the base size."""
    check_images(schedule, images)
    return [render_frame(spec, images) for spec in schedule.frames]
