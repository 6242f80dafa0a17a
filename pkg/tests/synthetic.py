"""Random synthetic scenes shared by tests and the acceptance suite."""

import numpy as np

from extrapkit.gridcore import crop
from extrapkit.iacn import iacn_feature
from extrapkit.panopticlab import CenterOffsetField, InstanceCenter, PanopticGrid

STUFF = (0, 1, 2)
THINGS = (5, 6, 7)


def random_panoptic(rng, min_sep=10.0, size_range=(16, 64), max_instances=8, max_side=5):
    """Stuff bands plus small thing instances whose centers of mass are
    pairwise farther apart than ``min_sep``."""
    H = int(rng.integers(size_range[0], size_range[1] + 1))
    W = int(rng.integers(size_range[0], size_range[1] + 1))
    cls = np.zeros((H, W), dtype=np.int64)
    cuts = np.sort(rng.integers(0, H, size=2))
    cls[cuts[0]:cuts[1]] = 1
    cls[cuts[1]:] = 2
    inst = np.zeros((H, W), dtype=np.int64)
    centers = []
    next_id = 1
    for _ in range(max_instances * 4):
        if next_id > max_instances:
            break
        h = int(rng.integers(1, max_side + 1))
        w = int(rng.integers(1, max_side + 1))
        top = int(rng.integers(0, H - h + 1))
        left = int(rng.integers(0, W - w + 1))
        mask = np.zeros((H, W), bool)
        mask[top:top + h, left:left + w] = rng.random((h, w)) < 0.8
        if not mask.any():
            mask[top, left] = True
        rr, cc = np.nonzero(mask)
        com = np.array([rr.mean(), cc.mean()])
        if any(np.hypot(*(com - c)) <= min_sep for c in centers):
            continue
        if np.any(inst[mask]):
            continue
        centers.append(com)
        cls[mask] = rng.choice(THINGS)
        inst[mask] = next_id
        next_id += 1
    return PanopticGrid(cls, inst, frozenset(THINGS))


def same_up_to_permutation(a: PanopticGrid, b: PanopticGrid) -> bool:
    if a.shape != b.shape or not np.array_equal(a.class_ids, b.class_ids):
        return False
    if not np.array_equal(a.instance_ids == 0, b.instance_ids == 0):
        return False
    pairs = set(zip(a.instance_ids.ravel().tolist(), b.instance_ids.ravel().tolist()))
    left = [p[0] for p in pairs]
    right = [p[1] for p in pairs]
    return len(set(left)) == len(pairs) == len(set(right))


def brute_force_group(semantic, centers, offsets, things):
    H, W = semantic.shape
    out = np.zeros((H, W), dtype=np.int64)
    for r in range(H):
        for c in range(W):
            if int(semantic[r, c]) not in things:
                continue
            tr = r + float(offsets[r, c, 0])
            tc = c + float(offsets[r, c, 1])
            best, best_d = None, None
            for k, ctr in enumerate(centers):
                d = (tr - ctr.row) ** 2 + (tc - ctr.col) ** 2
                if best_d is None or d < best_d:
                    best, best_d = k, d
            out[r, c] = best + 1
    return out


def random_grouping_case(rng, size=16, dyadic=False):
    semantic = rng.choice(list(STUFF) + list(THINGS), size=(size, size))
    k = int(rng.integers(1, 7))
    if dyadic:
        offsets = rng.integers(-16, 17, size=(size, size, 2)) / 4.0
        pos = rng.integers(0, 4 * size, size=(k, 2)) / 4.0
    else:
        offsets = rng.normal(scale=3.0, size=(size, size, 2))
        pos = rng.uniform(0, size - 1, size=(k, 2))
    centers = [InstanceCenter(float(r), float(c), 1.0) for r, c in pos]
    field = CenterOffsetField(np.zeros((size, size)), offsets)
    return semantic, centers, field


def iacn_oracle_error(pan, image_full, region):
    """Structural and brute-force checks; returns the max abs mean error."""
    H, W = pan.shape
    feat = iacn_feature(crop(image_full, region), pan, region)
    inside = region.mask(H, W)
    assert np.all(feat[inside] == 0)
    keys = [(int(a), int(b)) for a, b in zip(pan.class_ids.ravel(), pan.instance_ids.ravel())]
    keys = np.array(keys).reshape(H, W, 2)
    painted = np.zeros((H, W), bool)
    worst = 0.0
    for key in {tuple(k) for k in keys.reshape(-1, 2).tolist()}:
        m = np.all(keys == key, axis=2)
        m_in, m_out = m & inside, m & ~inside
        if m_in.any() and m_out.any():
            mean = np.array([np.mean(image_full[..., ch][m_in]) for ch in range(image_full.shape[2])])
            worst = max(worst, float(np.abs(feat[m_out] - mean).max()))
            painted |= m_out
        else:
            assert np.all(feat[m] == 0)
    assert np.all(feat[~painted] == 0)
    return worst
