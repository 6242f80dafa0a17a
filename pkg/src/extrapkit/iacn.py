"""Instance-aware context normalization features.

Every segment that is cut by the crop border (a thing instance, or the
pixels of a stuff class keyed with instance 0) gets the mean colour of its
inside-crop pixels painted onto its outside-crop pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .gridcore import CropRegion
from .panopticlab import PanopticGrid


@dataclass
class PartialInstanceStats:
    class_id: int
    instance_id: int
    inside_pixel_count: int
    outside_pixel_count: int
    mean_color: np.ndarray | None = None

    @property
    def key(self) -> tuple[int, int]:
        return self.class_id, self.instance_id


def _segment_keys(panoptic: PanopticGrid) -> np.ndarray:
    return panoptic.class_ids * (1 << 32) + panoptic.instance_ids


def partial_instances(panoptic: PanopticGrid, crop: CropRegion) -> list[PartialInstanceStats]:
    """Segments with at least one pixel on each side of the crop border."""
    inside = crop.mask(*panoptic.shape)
    keys = _segment_keys(panoptic)
    uniq, inverse = np.unique(keys, return_inverse=True)
    inverse = inverse.reshape(keys.shape)
    n_in = np.bincount(inverse[inside], minlength=uniq.size)
    n_out = np.bincount(inverse[~inside], minlength=uniq.size)
    out = []
    for i in np.nonzero((n_in > 0) & (n_out > 0))[0]:
        k = int(uniq[i])
        out.append(PartialInstanceStats(k >> 32, k & 0xFFFFFFFF, int(n_in[i]), int(n_out[i])))
    return out


def iacn_feature(image_crop, panoptic: PanopticGrid, crop: CropRegion,
                 stats: list[PartialInstanceStats] | None = None) -> np.ndarray:
    """Full-frame feature grid with partial-instance mean colours painted outside.

    ``image_crop`` covers exactly ``crop``. Everything that is not the
    outside part of a partial instance is zero, including the whole crop.
    If ``stats`` is given its ``mean_color`` fields are filled in.
    """
    image = np.asarray(image_crop, dtype=np.float64)
    if image.ndim == 2:
        image = image[..., None]
    if image.ndim != 3 or image.shape[:2] != (crop.height, crop.width):
        raise InvalidInputError(
            f"image crop {image.shape} does not match crop {crop.height}x{crop.width}")
    H, W = panoptic.shape
    inside = crop.mask(H, W)
    keys = _segment_keys(panoptic)
    feature = np.zeros((H, W, image.shape[2]))
    inner_keys = keys[crop.slices]
    if stats is None:
        stats = partial_instances(panoptic, crop)
    for s in stats:
        k = s.class_id * (1 << 32) + s.instance_id
        m_in = inner_keys == k
        mean = image[m_in].mean(axis=0)
        s.mean_color = mean
        feature[(keys == k) & ~inside] = mean
    return feature
