import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from extrapkit.errors import InvalidInputError
from extrapkit.labelspace import argmax_decode, get_boundary, one_hot_encode
from extrapkit.panopticlab import PanopticGrid


def test_one_hot_pixel_vector():
    oh = one_hot_encode(np.array([[0, 1], [1, 2]]), 3)
    np.testing.assert_array_equal(oh[0, 0], [1, 0, 0])
    np.testing.assert_array_equal(oh[1, 1], [0, 0, 1])


def test_one_hot_constant_grid():
    oh = one_hot_encode(np.zeros((3, 4), dtype=int), 3)
    assert np.all(oh[..., 0] == 1) and np.all(oh[..., 1:] == 0)


def test_one_hot_sums_to_one():
    labels = np.random.default_rng(0).integers(0, 5, size=(8, 8))
    np.testing.assert_array_equal(one_hot_encode(labels, 5).sum(axis=2), 1.0)


def test_one_hot_rejects_out_of_range():
    with pytest.raises(InvalidInputError):
        one_hot_encode(np.array([[3]]), 3)


@given(arrays(np.int64, st.tuples(st.integers(1, 10), st.integers(1, 10)), elements=st.integers(0, 6)))
def test_round_trip(labels):
    np.testing.assert_array_equal(argmax_decode(one_hot_encode(labels, 7)), labels)


def test_argmax_decode_picks_max_and_breaks_ties_low():
    assert argmax_decode(np.array([[[0.2, 0.9, 0.4]]]))[0, 0] == 1
    assert argmax_decode(np.array([[[0.5, 0.5]]]))[0, 0] == 0


def _pan(cls, inst=None):
    cls = np.asarray(cls)
    inst = np.zeros_like(cls) if inst is None else np.asarray(inst)
    return PanopticGrid(cls, inst, frozenset(np.unique(cls[inst > 0]).tolist()))


def test_boundary_uniform_is_empty():
    assert not get_boundary(_pan(np.full((5, 5), 3))).any()


def test_boundary_two_halves():
    inst = np.array([[1, 1, 2, 2]] * 4)
    b = get_boundary(_pan(np.full((4, 4), 7), inst))
    np.testing.assert_array_equal(b, [[0, 1, 1, 0]] * 4)


def test_boundary_single_pixel():
    np.testing.assert_array_equal(get_boundary(_pan([[4]])), [[0]])


def test_boundary_class_change_counts():
    b = get_boundary(_pan([[0, 0], [1, 1]]))
    np.testing.assert_array_equal(b, [[1, 1], [1, 1]])


inst_grids = arrays(np.int64, st.tuples(st.integers(1, 9), st.integers(1, 9)), elements=st.integers(1, 5))


@given(inst_grids, st.permutations([1, 2, 3, 4, 5]))
def test_boundary_invariant_under_id_permutation(inst, perm):
    lut = np.array([0] + list(perm))
    cls = np.full(inst.shape, 2)
    a = get_boundary(_pan(cls, inst))
    b = get_boundary(_pan(cls, lut[inst]))
    np.testing.assert_array_equal(a, b)


@given(inst_grids)
def test_boundary_commutes_with_transpose(inst):
    cls = np.full(inst.shape, 2)
    np.testing.assert_array_equal(get_boundary(_pan(cls, inst)).T, get_boundary(_pan(cls.T, inst.T)))


@given(inst_grids)
def test_boundary_matches_neighbour_scan(inst):
    cls = (inst % 2) + 10
    inst = np.where(cls == 11, inst, 0)
    b = get_boundary(PanopticGrid(cls, inst, frozenset({11})))
    H, W = inst.shape
    for r in range(H):
        for c in range(W):
            diff = any(
                0 <= r + dr < H and 0 <= c + dc < W
                and (cls[r, c], inst[r, c]) != (cls[r + dr, c + dc], inst[r + dr, c + dc])
                for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)))
            assert b[r, c] == diff
