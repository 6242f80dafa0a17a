"""Center/offset targets and center-based grouping into panoptic maps.

Offsets point from a pixel to the center of its instance, stored as
``(d_row, d_col)`` in pixel units. Any change to that convention has to be
made in :func:`render_targets` and :func:`group_pixels` together.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .labelspace import check_labels

PANOPTIC_DIVISOR = 1000


@dataclass(frozen=True)
class PanopticGrid:
    class_ids: np.ndarray
    instance_ids: np.ndarray
    thing_classes: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        cls = check_labels(self.class_ids)
        inst = np.asarray(self.instance_ids)
        if inst.shape != cls.shape:
            raise InvalidInputError(
                f"class grid {cls.shape} and instance grid {inst.shape} differ")
        if not np.issubdtype(inst.dtype, np.integer) or (inst.size and inst.min() < 0):
            raise InvalidInputError("instance ids must be non-negative integers")
        inst = inst.astype(np.int64)
        things = frozenset(int(c) for c in self.thing_classes)
        stuff = ~np.isin(cls, list(things)) if things else np.ones(cls.shape, bool)
        if np.any(inst[stuff] != 0):
            raise InvalidInputError("stuff pixels must carry instance id 0")
        ids = inst[inst > 0]
        if ids.size:
            pairs = np.unique(np.stack([ids, cls[inst > 0]]), axis=1)
            if np.unique(pairs[0]).size != pairs.shape[1]:
                raise InvalidInputError("an instance id spans more than one class")
        object.__setattr__(self, "class_ids", cls)
        object.__setattr__(self, "instance_ids", inst)
        object.__setattr__(self, "thing_classes", things)

    @property
    def shape(self) -> tuple[int, int]:
        return self.class_ids.shape

    def encode(self) -> np.ndarray:
        """Pack into ``class * 1000 + instance`` as uint32."""
        if self.instance_ids.size and self.instance_ids.max() >= PANOPTIC_DIVISOR:
            raise InvalidInputError(f"instance id >= {PANOPTIC_DIVISOR} cannot be packed")
        return (self.class_ids * PANOPTIC_DIVISOR + self.instance_ids).astype(np.uint32)

    @classmethod
    def decode(cls, packed, thing_classes=None) -> "PanopticGrid":
        """Unpack ``class * 1000 + instance``.

        Without ``thing_classes``, every class carrying a nonzero instance id
        is taken to be a thing class.
        """
        packed = np.asarray(packed)
        if packed.ndim != 2 or not np.issubdtype(packed.dtype, np.integer):
            raise InvalidInputError(f"packed panoptic grid must be 2-D integers, got {packed.dtype} {packed.shape}")
        packed = packed.astype(np.int64)
        cls_ids, inst = packed // PANOPTIC_DIVISOR, packed % PANOPTIC_DIVISOR
        if thing_classes is None:
            thing_classes = np.unique(cls_ids[inst > 0]).tolist()
        return cls(cls_ids, inst, frozenset(thing_classes))


@dataclass(frozen=True)
class CenterOffsetField:
    heatmap: np.ndarray
    offsets: np.ndarray
    # Pixels whose offsets are supervised; None means every pixel.
    thing_mask: np.ndarray | None = None

    def __post_init__(self):
        h = np.asarray(self.heatmap, dtype=np.float64)
        o = np.asarray(self.offsets, dtype=np.float64)
        if h.ndim != 2 or o.shape != h.shape + (2,):
            raise InvalidInputError(
                f"heatmap {h.shape} and offsets {o.shape} are not (H, W) and (H, W, 2)")
        object.__setattr__(self, "heatmap", h)
        object.__setattr__(self, "offsets", o)
        if self.thing_mask is not None:
            m = np.asarray(self.thing_mask, dtype=bool)
            if m.shape != h.shape:
                raise InvalidInputError("thing mask does not match heatmap")
            object.__setattr__(self, "thing_mask", m)

    def stacked(self) -> np.ndarray:
        """``(H, W, 3)`` array: heatmap, d_row, d_col."""
        return np.concatenate([self.heatmap[..., None], self.offsets], axis=2)

    @classmethod
    def from_stacked(cls, arr) -> "CenterOffsetField":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InvalidInputError(f"expected (H, W, 3) center/offset stack, got {arr.shape}")
        return cls(arr[..., 0], arr[..., 1:])


@dataclass(frozen=True)
class InstanceCenter:
    row: float
    col: float
    score: float


def instance_centers(panoptic: PanopticGrid) -> dict[int, tuple[float, float]]:
    """Center of mass of every nonzero instance id, in id order."""
    inst = panoptic.instance_ids
    rr, cc = np.indices(inst.shape)
    out = {}
    for k in np.unique(inst[inst > 0]):
        m = inst == k
        out[int(k)] = (float(rr[m].mean()), float(cc[m].mean()))
    return out


def render_targets(gt: PanopticGrid, sigma: float = 8.0) -> CenterOffsetField:
    """Gaussian center heatmap and pixel-to-center offsets for thing instances."""
    if sigma <= 0:
        raise InvalidInputError(f"sigma must be positive, got {sigma}")
    shape = gt.shape
    rr, cc = np.indices(shape, dtype=np.float64)
    heatmap = np.zeros(shape)
    offsets = np.zeros(shape + (2,))
    for k, (r0, c0) in instance_centers(gt).items():
        d2 = (rr - r0) ** 2 + (cc - c0) ** 2
        np.maximum(heatmap, np.exp(-d2 / (2.0 * sigma * sigma)), out=heatmap)
        m = gt.instance_ids == k
        offsets[m, 0] = r0 - rr[m]
        offsets[m, 1] = c0 - cc[m]
    return CenterOffsetField(heatmap, offsets, gt.instance_ids > 0)


def detect_centers(heatmap, threshold: float = 0.1, nms_radius: int = 5,
                   max_centers: int = 200) -> list[InstanceCenter]:
    """Window-maximum peak picking on a center heatmap.

    A pixel is kept if no pixel in its ``(2r+1)^2`` window is larger and no
    earlier pixel (row-major) in the window has the same value, and its score
    reaches ``threshold``. Results are ordered by score, then row-major.
    """
    h = np.asarray(heatmap, dtype=np.float64)
    if h.ndim != 2:
        raise InvalidInputError(f"heatmap must be 2-D, got shape {h.shape}")
    if not 0.0 <= threshold <= 1.0:
        raise InvalidInputError(f"threshold must lie in [0, 1], got {threshold}")
    if nms_radius < 1:
        raise InvalidInputError("nms_radius must be >= 1")
    r = int(nms_radius)
    H, W = h.shape
    padded = np.full((H + 2 * r, W + 2 * r), -np.inf)
    padded[r:r + H, r:r + W] = h
    keep = h >= threshold
    for dr in range(-r, r + 1):
        for dc in range(-r, r + 1):
            if dr == 0 and dc == 0:
                continue
            other = padded[r + dr:r + dr + H, r + dc:r + dc + W]
            keep &= h >= other
            if (dr, dc) < (0, 0):
                keep &= h != other
    rows, cols = np.nonzero(keep)
    scores = h[rows, cols]
    order = np.argsort(-scores, kind="stable")[:max_centers]
    return [InstanceCenter(float(rows[i]), float(cols[i]), float(scores[i])) for i in order]


def group_pixels(semantic, centers, field: CenterOffsetField, thing_classes):
    """Assign every thing pixel to the center nearest its offset target.

    Returns ``(instance_ids, used_fallback)``. Ids are 1-based in center
    order; ties go to the lower index. With thing pixels but no centers, all
    thing pixels become instance 1 and ``used_fallback`` is True.
    """
    semantic = check_labels(semantic)
    if semantic.shape != field.heatmap.shape:
        raise InvalidInputError(
            f"semantic {semantic.shape} and field {field.heatmap.shape} differ")
    things = list(thing_classes)
    mask = np.isin(semantic, things) if things else np.zeros(semantic.shape, bool)
    ids = np.zeros(semantic.shape, dtype=np.int64)
    if not mask.any():
        return ids, False
    if len(centers) == 0:
        ids[mask] = 1
        return ids, True
    rows, cols = np.nonzero(mask)
    tr = rows + field.offsets[rows, cols, 0]
    tc = cols + field.offsets[rows, cols, 1]
    cr = np.array([c.row for c in centers])
    cc = np.array([c.col for c in centers])
    # Squared distance keeps the argmin and is exact for dyadic inputs.
    d2 = (tr[:, None] - cr[None, :]) ** 2 + (tc[:, None] - cc[None, :]) ** 2
    ids[rows, cols] = np.argmin(d2, axis=1) + 1
    return ids, False


def fuse_majority(semantic, instance_ids, thing_classes):
    """Give each instance the majority thing class among its pixels.

    Returns ``(panoptic, dissolved)`` where ``dissolved`` lists instance ids
    that covered no thing-class pixel and were turned back into stuff.
    """
    semantic = check_labels(semantic)
    inst = np.asarray(instance_ids).astype(np.int64)
    if inst.shape != semantic.shape:
        raise InvalidInputError("instance grid does not match semantic grid")
    things = sorted(int(c) for c in thing_classes)
    cls = semantic.copy()
    out_inst = inst.copy()
    dissolved = []
    for k in np.unique(inst[inst > 0]):
        m = inst == k
        labels = semantic[m]
        labels = labels[np.isin(labels, things)]
        if labels.size == 0:
            dissolved.append(int(k))
            out_inst[m] = 0
            continue
        values, counts = np.unique(labels, return_counts=True)
        # np.unique sorts values, so argmax picks the lowest id among ties.
        cls[m] = values[np.argmax(counts)]
    # Leftover ids on stuff pixels would break the panoptic invariant.
    out_inst[~np.isin(cls, things)] = 0
    return PanopticGrid(cls, out_inst, frozenset(things)), dissolved
