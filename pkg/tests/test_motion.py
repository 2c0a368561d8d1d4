import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualdomain.grid import ParameterError, SizeError
from dualdomain.metrics import psnr
from dualdomain.motion import (HEAVY, LIGHT, MotionTrace, RigidTransform2D, Segment, SeverityPreset,
                               apply_rigid, corrupt, rotate, rotate_adjoint, rotate_dtheta,
                               rotation_plan, sample_motion)
from dualdomain.phantom import generate_phantom, shepp_logan
from dualdomain.spectral import fft2c


def test_rigid_transform_validation():
    with pytest.raises(ParameterError):
        RigidTransform2D(float("nan"))
    with pytest.raises(ParameterError):
        RigidTransform2D(4.0)
    assert RigidTransform2D().is_identity
    assert not RigidTransform2D(tx=1e-9).is_identity


def test_trace_validation():
    ident = RigidTransform2D()
    with pytest.raises(ParameterError):
        MotionTrace(10, (Segment(0, 4), Segment(5, 10)))
    with pytest.raises(ParameterError):
        MotionTrace(10, (Segment(0, 10, RigidTransform2D(0.1)),))
    with pytest.raises(ParameterError):
        MotionTrace(10, (Segment(0, 8, ident),))


@pytest.mark.parametrize("preset,lo,hi", [(LIGHT, 6, 10), (HEAVY, 16, 20)])
def test_event_counts_follow_preset(preset, lo, hi):
    counts = {sample_motion(preset, 320, s).n_events for s in range(60)}
    assert counts <= set(range(lo, hi + 1))
    assert min(counts) == lo and max(counts) == hi


def test_preset_bounds():
    p = SeverityPreset.named("light", max_rot_deg=10, mm_per_px=2.0)
    assert p.max_translation == 5.0 and p.max_rotation == pytest.approx(math.radians(10))
    with pytest.raises(ParameterError):
        SeverityPreset.named("medium")
    for s in range(20):
        for seg in sample_motion(HEAVY, 128, s).segments[1:]:
            assert abs(seg.pose.theta) <= HEAVY.max_rotation
            assert abs(seg.pose.tx) <= 10 and abs(seg.pose.ty) <= 10


@given(st.integers(0, 2 ** 63))
def test_sampling_is_reproducible(seed):
    assert sample_motion(LIGHT, 64, seed) == sample_motion(LIGHT, 64, seed)


def test_identity_transform_is_bitwise_copy(rng):
    img = rng.random((20, 24))
    assert np.array_equal(apply_rigid(img, RigidTransform2D()), img)
    assert np.array_equal(rotate(img, 0.0), img)


def test_shift_theorem_on_impulse():
    img = np.zeros((32, 32))
    img[10, 12] = 1.0
    out = np.abs(apply_rigid(img, RigidTransform2D(tx=3.0)))
    want = np.zeros_like(img)
    want[10, 15] = 1.0
    assert np.max(np.abs(out - want)) <= 1e-6


def test_shift_of_real_image_stays_real(rng):
    img = rng.random((16, 16))
    from dualdomain.motion import motion_kspace
    from dualdomain.spectral import ifft2c
    back = ifft2c(motion_kspace(img, RigidTransform2D(0.0, 1.37, -2.2)))
    assert np.max(np.abs(back.imag)) < 1e-12


def test_rotation_round_trip_inside_field_of_view():
    img = generate_phantom("smooth_random", 128, seed=0)
    back = rotate(rotate(img, 0.2), -0.2)
    yy, xx = np.mgrid[:128, :128] - 63.5
    disc = np.hypot(yy, xx) < 60
    mse = np.mean((back - img)[disc] ** 2)
    assert 10 * np.log10(1.0 / mse) >= 40.0


def test_rotation_adjoint_identity(rng):
    plan = rotation_plan((17, 13), 0.37)
    x = rng.standard_normal((17, 13))
    y = rng.standard_normal((17, 13))
    assert np.sum(rotate(x, 0.37, plan) * y) == pytest.approx(np.sum(x * rotate_adjoint(y, plan)), rel=1e-12)


def test_rotation_theta_derivative(rng):
    img = generate_phantom("smooth_random", 32, seed=3)
    theta, h = 0.31, 1e-7
    fd = (rotate(img, theta + h) - rotate(img, theta - h)) / (2 * h)
    np.testing.assert_allclose(rotate_dtheta(img, rotation_plan(img.shape, theta)), fd, atol=1e-5)


def test_still_trace_is_exact():
    img = shepp_logan(64)
    f, mask = corrupt(img, MotionTrace.still(64))
    assert np.array_equal(f, fft2c(img)) and mask.count == 0
    f2, m2 = corrupt(img, MotionTrace(64, (Segment(0, 30), Segment(30, 64))))
    assert np.array_equal(f2, fft2c(img)) and m2.count == 0


def test_two_segment_rows_recomputed():
    img = shepp_logan(64)
    pose = RigidTransform2D(0.05, 2.5, -1.0)
    f, mask = corrupt(img, MotionTrace(64, (Segment(0, 40), Segment(40, 64, pose))))
    moved = fft2c(apply_rigid(img, pose))
    for r in range(64):
        want = moved[r] if r >= 40 else fft2c(img)[r]
        np.testing.assert_allclose(f[r], want, atol=1e-10)
    assert list(mask.bits) == [0] * 40 + [1] * 24


def test_corrupt_checks_line_count():
    with pytest.raises(SizeError):
        corrupt(np.zeros((8, 8)), MotionTrace.still(9))
