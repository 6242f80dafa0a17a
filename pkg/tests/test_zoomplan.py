import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extrapkit.errors import ContractViolation, InvalidInputError
from extrapkit.gridcore import resample
from extrapkit.zoomplan import build_schedule, pad_stub, recursive_extrapolate, render_frames


def content_extent(img, thresh=0.5):
    """(rows, cols) spanned by pixels above ``thresh`` in channel 0."""
    m = img[..., 0] > thresh if img.ndim == 3 else img > thresh
    rows = np.nonzero(m.any(axis=1))[0]
    cols = np.nonzero(m.any(axis=0))[0]
    return rows.max() + 1 - rows.min(), cols.max() + 1 - cols.min()


def test_stub_three_steps():
    outs = recursive_extrapolate(pad_stub, np.ones((16, 24)), steps=3)
    assert len(outs) == 3
    for t, o in enumerate(outs, 1):
        assert o.shape == (32, 48)
        assert content_extent(o) == (32 / 2 ** t, 48 / 2 ** t)


def test_default_steps_give_six_outputs():
    outs = recursive_extrapolate(pad_stub, np.ones((8, 16, 3)))
    assert len(outs) == 6
    assert all(o.shape == (16, 32, 3) for o in outs)


def test_bad_extrapolator_is_rejected():
    with pytest.raises(ContractViolation):
        recursive_extrapolate(lambda g: g, np.ones((4, 4)), steps=1)


def test_default_schedule_frame_count():
    s = build_schedule((256, 512))
    assert len(s) == 30 + 6 * 64 == 414


def test_minimal_schedule():
    s = build_schedule((4, 6), steps=1, frames_per_transition=1, intro_frames=0)
    (f,) = s.frames
    assert f.image_index == 1
    assert (f.region.top, f.region.left, f.region.height, f.region.width) == (0, 0, 8, 12)
    assert f.out_dims == (4, 6)


def test_per_frame_increment():
    s = build_schedule((256, 512), steps=1, intro_frames=0)
    heights = [f.region.height for f in s.frames]
    widths = [f.region.width for f in s.frames]
    assert np.all(np.diff(heights) == 4)
    assert np.all(np.diff(widths) == 8)
    assert heights[-1] == 512 and widths[-1] == 1024


@given(st.integers(1, 40), st.integers(1, 40), st.integers(1, 4), st.integers(1, 20), st.integers(0, 5))
def test_schedule_invariants(H, W, steps, F, intro):
    s = build_schedule((H, W), steps, F, intro)
    assert len(s) == intro + steps * F
    for f in s.frames[:intro]:
        assert f.image_index == 0 and (f.region.height, f.region.width) == (H, W)
    trans = s.frames[intro:]
    for t in range(steps):
        chunk = trans[t * F:(t + 1) * F]
        assert all(f.image_index == t + 1 for f in chunk)
        h = [f.region.height for f in chunk]
        w = [f.region.width for f in chunk]
        assert h == sorted(h) and w == sorted(w)
        assert (h[-1], w[-1]) == (2 * H, 2 * W)
        for f in chunk:
            r = f.region
            assert r.fits(2 * H, 2 * W)
            assert r.top == (2 * H - r.height) // 2 and r.left == (2 * W - r.width) // 2
            assert f.out_dims == (H, W)


def test_zero_dims_rejected():
    with pytest.raises(InvalidInputError):
        build_schedule((0, 4))


def _stub_images(H, W, steps):
    base = np.random.default_rng(0).uniform(0.5, 1.0, size=(H, W, 3))
    return [base] + recursive_extrapolate(pad_stub, base, steps)


def test_render_frames():
    H, W, steps = 8, 12, 2
    images = _stub_images(H, W, steps)
    s = build_schedule((H, W), steps, 4, 3)
    frames = render_frames(s, images)
    assert len(frames) == len(s)
    assert all(f.shape == (H, W, 3) for f in frames)
    np.testing.assert_array_equal(frames[0], images[0])
    for t in range(1, steps + 1):
        last = frames[3 + t * 4 - 1]
        np.testing.assert_allclose(last, resample(images[t], H, W), atol=0)


def test_render_frames_checks_inputs():
    s = build_schedule((8, 12), 2, 4, 0)
    images = _stub_images(8, 12, 2)
    with pytest.raises(InvalidInputError):
        render_frames(s, images[:2])
    with pytest.raises(InvalidInputError):
        render_frames(s, [images[0], images[0], images[2]])
