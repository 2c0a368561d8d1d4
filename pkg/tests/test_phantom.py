import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualdomain.grid import ParameterError
from dualdomain.phantom import generate_phantom, pixel_centers

# Toft's modified Shepp-Logan parameters, transcribed independently:
# (value, semi-axis along x, semi-axis along y, centre x, centre y, rotation in degrees)
TOFT = [
    (1.0, .69, .92, 0, 0, 0), (-.8, .6624, .874, 0, -.0184, 0),
    (-.2, .11, .31, .22, 0, -18), (-.2, .16, .41, -.22, 0, 18),
    (.1, .21, .25, 0, .35, 0), (.1, .046, .046, 0, .1, 0), (.1, .046, .046, 0, -.1, 0),
    (.1, .046, .023, -.08, -.605, 0), (.1, .023, .023, 0, -.606, 0), (.1, .023, .046, .06, -.605, 0),
]


def membership_value(px, py):
    total = 0.0
    for v, a, b, x0, y0, deg in TOFT:
        t = np.radians(deg)
        dx, dy = px - x0, py - y0
        u = dx * np.cos(t) + dy * np.sin(t)
        w = -dx * np.sin(t) + dy * np.cos(t)
        if (u / a) ** 2 + (w / b) ** 2 <= 1:
            total += v
    return min(max(total, 0.0), 1.0)


def test_shepp_logan_matches_ellipse_membership(rng):
    n = 128
    img = generate_phantom("shepp_logan", n)
    c = pixel_centers(n)
    for r, col in rng.integers(0, n, size=(300, 2)):
        assert img[r, col] == pytest.approx(membership_value(c[col], -c[r]), abs=1e-12)


def test_shepp_logan_range_and_background():
    img = generate_phantom("shepp_logan", 128, seed=5)
    assert img.min() >= 0.0 and img.max() <= 1.0
    assert img[0, 0] == img[0, -1] == img[-1, 0] == img[-1, -1] == 0.0
    assert np.array_equal(img, generate_phantom("shepp_logan", 128, seed=99))


def test_shepp_logan_orientation():
    # the bright disc at y = +0.35 must sit in the upper half of the array
    img = generate_phantom("shepp_logan", 128)
    c = pixel_centers(128)
    top = np.argmin(np.abs(c + 0.35))
    assert img[top, 64] == pytest.approx(0.3)
    assert img[127 - top, 64] == pytest.approx(0.2)


def test_smooth_random_seeded():
    a = generate_phantom("smooth_random", 64, seed=1)
    assert np.array_equal(a, generate_phantom("smooth_random", 64, seed=1))
    assert not np.array_equal(a, generate_phantom("smooth_random", 64, seed=2))
    assert a.min() == 0.0 and a.max() == 1.0


@given(st.integers(32, 80), st.integers(0, 2 ** 32 - 1))
def test_smooth_random_shape_and_range(n, seed):
    img = generate_phantom("smooth_random", n, seed)
    assert img.shape == (n, n)
    assert np.all((img >= 0) & (img <= 1))


@pytest.mark.parametrize("kind,size", [("shepp_logan", 31), ("blob", 64)])
def test_bad_phantom_requests(kind, size):
    with pytest.raises(ParameterError):
        generate_phantom(kind, size)
