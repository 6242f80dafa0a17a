import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extrapkit.errors import InvalidInputError
from extrapkit.gridcore import CropRegion, center_crop
from extrapkit.iacn import iacn_feature, partial_instances
from extrapkit.panopticlab import PanopticGrid

from synthetic import iacn_oracle_error, random_panoptic

CAR, SKY = 13, 1


def frame_with(rows, cols, H=6, W=6, cls=CAR):
    c = np.full((H, W), SKY)
    i = np.zeros((H, W), dtype=int)
    c[rows, cols] = cls
    i[rows, cols] = 1
    return PanopticGrid(c, i, frozenset({CAR}))


REGION = CropRegion(2, 2, 2, 2)  # inside rows/cols 2..3 of a 6x6 frame


def test_instance_fully_inside_is_excluded():
    pan = frame_with(slice(2, 4), slice(2, 4))
    keys = [s.key for s in partial_instances(pan, REGION)]
    assert (CAR, 1) not in keys


def test_instance_fully_outside_is_excluded():
    pan = frame_with(slice(0, 1), slice(0, 3))
    assert (CAR, 1) not in [s.key for s in partial_instances(pan, REGION)]


def test_straddling_counts():
    # Row 2 cols 0..3 and row 3 col 2: inside pixels (2,2), (2,3), (3,2);
    # outside (2,0), (2,1), plus (1,2), (1,3), (0,2).
    c = np.full((6, 6), SKY)
    pixels = [(2, 2), (2, 3), (3, 2), (2, 0), (2, 1), (1, 2), (1, 3), (0, 2)]
    for p in pixels:
        c[p] = CAR
    i = (c == CAR).astype(int)
    stats = {s.key: s for s in partial_instances(PanopticGrid(c, i, frozenset({CAR})), REGION)}
    s = stats[(CAR, 1)]
    assert (s.inside_pixel_count, s.outside_pixel_count) == (3, 5)
    assert (SKY, 0) in stats
    assert list(stats) == sorted(stats)


def test_mean_is_painted_outside():
    pan = frame_with(slice(2, 3), slice(0, 4))  # inside (2,2), (2,3); outside (2,0), (2,1)
    img = np.zeros((2, 2, 3))
    img[0, 0] = (10, 20, 30)
    img[0, 1] = (30, 40, 50)
    feat = iacn_feature(img, pan, REGION)
    np.testing.assert_array_equal(feat[2, 0], [20, 30, 40])
    np.testing.assert_array_equal(feat[2, 1], [20, 30, 40])
    assert np.all(feat[REGION.slices] == 0)


def test_no_partial_instances_gives_zero_feature():
    pan = frame_with(slice(2, 4), slice(2, 4))  # car fills the crop, sky fills the rest
    assert partial_instances(pan, REGION) == []
    feat = iacn_feature(np.random.default_rng(0).random((2, 2, 3)), pan, REGION)
    assert not feat.any()


def test_constant_image_is_painted_exactly():
    pan = frame_with(slice(0, 6), slice(3, 5))
    img = np.full((2, 2, 3), 0.3)
    feat = iacn_feature(img, pan, REGION)
    car_out = (pan.instance_ids == 1) & ~REGION.mask(6, 6)
    assert np.all(feat[car_out] == 0.3)


def test_dimension_mismatch():
    pan = frame_with(slice(2, 3), slice(0, 4))
    with pytest.raises(InvalidInputError):
        iacn_feature(np.zeros((3, 2, 3)), pan, REGION)


def test_mean_colors_are_reported():
    pan = frame_with(slice(2, 3), slice(0, 4))
    stats = partial_instances(pan, REGION)
    img = np.arange(12.0).reshape(2, 2, 3)
    iacn_feature(img, pan, REGION, stats)
    car = next(s for s in stats if s.key == (CAR, 1))
    np.testing.assert_array_equal(car.mean_color, img[0].mean(axis=0))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.25, 0.5, 0.75]))
def test_feature_matches_brute_force(seed, ratio):
    rng = np.random.default_rng(seed)
    pan = random_panoptic(rng, min_sep=3.0, max_side=9)
    image = rng.uniform(0, 255, size=pan.shape + (3,))
    assert iacn_oracle_error(pan, image, center_crop(*pan.shape, ratio)) <= 1e-12
