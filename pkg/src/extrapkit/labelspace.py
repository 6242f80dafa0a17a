"""Semantic label maps, one-hot encodings and instance boundaries."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


def check_labels(labels, num_classes: int | None = None) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 2 or min(labels.shape) < 1:
        raise InvalidInputError(f"label grid must be a non-empty 2-D array, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise InvalidInputError(f"label grid must hold integers, got {labels.dtype}")
    labels = labels.astype(np.int64)
    if labels.min() < 0:
        raise InvalidInputError("negative class id in label grid")
    if num_classes is not None and labels.max() >= num_classes:
        raise InvalidInputError(
            f"class id {labels.max()} out of range for {num_classes} classes")
    return labels


def one_hot_encode(labels, num_classes: int) -> np.ndarray:
    """Hard ``(H, W, num_classes)`` float64 encoding of a label grid."""
    if num_classes < 1:
        raise InvalidInputError("num_classes must be >= 1")
    labels = check_labels(labels, num_classes)
    return np.eye(num_classes, dtype=np.float64)[labels]


def argmax_decode(soft) -> np.ndarray:
    """Per-pixel argmax over channels; ties go to the lowest class id."""
    soft = np.asarray(soft, dtype=np.float64)
    if soft.ndim != 3 or soft.shape[2] < 1:
        raise InvalidInputError(f"expected (H, W, C) scores, got shape {soft.shape}")
    # np.argmax returns the first maximal index, which is the tie rule we want.
    return np.argmax(soft, axis=2).astype(np.int64)


def get_boundary(panoptic) -> np.ndarray:
    """Mark pixels whose 4-neighbourhood contains a different segment.

    ``panoptic`` is anything with ``class_ids`` and ``instance_ids`` arrays.
    Both sides of every interface are marked; the image border alone never
    makes a pixel a boundary.
    """
    cls = np.asarray(panoptic.class_ids, dtype=np.int64)
    inst = np.asarray(panoptic.instance_ids, dtype=np.int64)
    out = np.zeros(cls.shape, dtype=np.uint8)
    dv = (cls[1:, :] != cls[:-1, :]) | (inst[1:, :] != inst[:-1, :])
    dh = (cls[:, 1:] != cls[:, :-1]) | (inst[:, 1:] != inst[:, :-1])
    out[1:, :] |= dv
    out[:-1, :] |= dv
    out[:, 1:] |= dh
    out[:, :-1] |= dh
    return out
