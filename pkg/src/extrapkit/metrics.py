"""Object co-occurrence similarity and crop-ratio statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .gridcore import CropRegion, center_crop
from .labelspace import check_labels
from .panopticlab import PanopticGrid, instance_centers


class UndefinedPairError(InvalidInputError):
    pass


@dataclass(frozen=True)
class PairCount:
    n_a: int
    n_ab: int

    @property
    def defined(self) -> bool:
        return self.n_a > 0

    @property
    def p(self) -> float | None:
        return self.n_ab / self.n_a if self.n_a else None


@dataclass
class CooccurTable:
    counts: dict = field(default_factory=dict)

    def __getitem__(self, pair) -> PairCount:
        return self.counts[tuple(pair)]

    def p(self, pair) -> float:
        c = self.counts.get(tuple(pair))
        if c is None or not c.defined:
            raise UndefinedPairError(f"pair {tuple(pair)} is undefined (class absent from inputs)")
        return c.p

    def defined_pairs(self) -> list:
        return [k for k, c in self.counts.items() if c.defined]


def _class_grid(item) -> np.ndarray:
    if isinstance(item, PanopticGrid):
        return item.class_ids
    return check_labels(item)


def cooccur_table(dataset, crop: CropRegion, pairs, min_pixels: int = 1) -> CooccurTable:
    """Count, per pair (a, b), images with ``a`` inside the crop and ``b`` outside.

    A class is present in a region when it covers at least ``min_pixels``
    pixels there. ``n_a`` counts images with ``a`` inside; ``n_ab`` those that
    additionally have ``b`` outside.
    """
    if len(dataset) == 0:
        raise InvalidInputError("empty dataset")
    if min_pixels < 1:
        raise InvalidInputError("min_pixels must be >= 1")
    pairs = [tuple(int(c) for c in p) for p in pairs]
    n_a = dict.fromkeys(pairs, 0)
    n_ab = dict.fromkeys(pairs, 0)
    shape = None
    inside = None
    for item in dataset:
        grid = _class_grid(item)
        if shape is None:
            shape = grid.shape
            inside = crop.mask(*shape)
        elif grid.shape != shape:
            raise InvalidInputError(f"grid {grid.shape} differs from dataset shape {shape}")
        top = int(grid.max()) + 1
        cnt_in = np.bincount(grid[inside], minlength=top)
        cnt_out = np.bincount(grid[~inside], minlength=top)
        for a, b in pairs:
            if a < top and cnt_in[a] >= min_pixels:
                n_a[(a, b)] += 1
                if b < top and cnt_out[b] >= min_pixels:
                    n_ab[(a, b)] += 1
    return CooccurTable({p: PairCount(n_a[p], n_ab[p]) for p in pairs})


def socc(train: CooccurTable, gen: CooccurTable, pair) -> float:
    """Similarity ``1 - |p_train - p_gen|`` for one class pair."""
    return 1.0 - abs(train.p(pair) - gen.p(pair))


@dataclass(frozen=True)
class CropRatioHistogram:
    edges: np.ndarray
    fractions: np.ndarray
    k: float
    ratios: np.ndarray
    excluded: int


def _inside(center, region: CropRegion) -> bool:
    # Pixel i spans [i - 0.5, i + 0.5) in center-of-mass coordinates.
    r, c = center
    return (region.top - 0.5 <= r < region.bottom - 0.5
            and region.left - 0.5 <= c < region.right - 0.5)


def instance_split(panoptic: PanopticGrid, region: CropRegion) -> tuple[int, int]:
    """(inside, outside) instance counts by center of mass."""
    centers = instance_centers(panoptic).values()
    n_in = sum(_inside(c, region) for c in centers)
    return n_in, len(centers) - n_in


def crop_ratio_stats(dataset, k: float = 0.5, bins: int = 10,
                     max_percent: float = 400.0) -> CropRatioHistogram:
    """Histogram of outside/inside instance-count ratios, in percent.

    Bins split ``[0, max_percent]`` evenly; larger ratios land in the last
    bin. Images with no instance inside the crop are skipped and counted in
    ``excluded``.
    """
    if len(dataset) == 0:
        raise InvalidInputError("empty dataset")
    if not 0.0 < k < 1.0:
        raise InvalidInputError(f"k must lie in (0, 1), got {k}")
    if bins < 1:
        raise InvalidInputError("bins must be >= 1")
    ratios = []
    excluded = 0
    for pan in dataset:
        region = center_crop(*pan.shape, k)
        n_in, n_out = instance_split(pan, region)
        if n_in == 0:
            excluded += 1
            continue
        ratios.append(100.0 * n_out / n_in)
    ratios = np.asarray(ratios, dtype=np.float64)
    edges = np.linspace(0.0, max_percent, bins + 1)
    counts = np.histogram(np.minimum(ratios, max_percent), bins=edges)[0]
    fractions = counts / ratios.size if ratios.size else np.zeros(bins)
    return CropRatioHistogram(edges, fractions, k, ratios, excluded)
