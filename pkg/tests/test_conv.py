import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_convolve, naive_shifted_product
from symwave import ParameterError, convolve, make_morlet, shifted_product
from symwave.conv import stencil_offset


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_constant_image_interior_is_zero():
    k = make_morlet(0.7)
    out = convolve(np.full((40, 40), 0.8), k)
    h = k.support // 2
    assert np.abs(out[h:-h, h:-h]).max() <= 1e-8


@pytest.mark.parametrize("boundary", ["symmetric", "wrap"])
def test_constant_image_is_zero_everywhere_without_zero_padding(boundary):
    out = convolve(np.full((32, 40), 0.8), make_morlet(1.2), boundary)
    assert np.abs(out).max() <= 1e-8


def test_impulse_gives_kernel():
    k = make_morlet(0.5, support=9)
    img = np.zeros((21, 21))
    img[10, 10] = 1.0
    out = convolve(img, k)
    np.testing.assert_allclose(out[6:15, 6:15], k.values, atol=1e-12)
    assert np.abs(out).sum() == pytest.approx(np.abs(k.values).sum())


def test_matches_naive_oracle_16x16():
    rng = np.random.default_rng(3)
    img = rng.random((16, 16))
    kernel = random_complex(rng, (5, 5))
    np.testing.assert_allclose(convolve(img, kernel), naive_convolve(img, kernel), rtol=0, atol=1e-9)


@pytest.mark.parametrize("seed", range(50))
def test_matches_naive_oracle_random_pairs(seed):
    rng = np.random.default_rng(100 + seed)
    h, w = rng.integers(7, 15, size=2)
    ks = 2 * int(rng.integers(1, 4)) + 1
    img = rng.random((h, w))
    kernel = random_complex(rng, (ks, ks))
    np.testing.assert_allclose(convolve(img, kernel), naive_convolve(img, kernel), rtol=0, atol=1e-9)


@pytest.mark.parametrize("boundary", ["zero", "symmetric", "wrap"])
def test_boundary_modes_match_oracle(boundary):
    rng = np.random.default_rng(7)
    img = rng.random((12, 15))
    kernel = random_complex(rng, (7, 7))
    np.testing.assert_allclose(
        convolve(img, kernel, boundary), naive_convolve(img, kernel, boundary), rtol=0, atol=1e-9
    )


def test_linearity():
    rng = np.random.default_rng(11)
    a, b = rng.random((30, 30)), rng.random((30, 30))
    k = make_morlet(2.2)
    lhs = convolve(2.5 * a - 0.7 * b, k)
    rhs = 2.5 * convolve(a, k) - 0.7 * convolve(b, k)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_kernel_larger_than_image_rejected():
    with pytest.raises(ParameterError):
        convolve(np.zeros((10, 30)), make_morlet(0.0, support=17))


def test_bad_boundary_rejected():
    with pytest.raises(ParameterError):
        convolve(np.zeros((20, 20)), make_morlet(0.0), "mirror")


def test_non_finite_image_rejected():
    img = np.zeros((20, 20))
    img[3, 3] = np.nan
    with pytest.raises(ParameterError):
        convolve(img, make_morlet(0.0))


def test_shifted_product_zero_offset_self():
    rng = np.random.default_rng(2)
    a = random_complex(rng, (9, 9))
    out = shifted_product(a, a, (0, 0))
    np.testing.assert_allclose(out.imag, 0.0, atol=1e-15)
    np.testing.assert_allclose(out.real, np.abs(a) ** 2)


@pytest.mark.parametrize("offset", [(8, 8), (-9, 12), (20, -20)])
def test_shifted_product_no_overlap(offset):
    rng = np.random.default_rng(4)
    a, b = random_complex(rng, (8, 8)), random_complex(rng, (8, 8))
    assert not shifted_product(a, b, offset).any()


@pytest.mark.parametrize("offset", [(2, 1), (-3, 2), (0, -4), (1, 0)])
def test_shifted_product_matches_loop(offset):
    rng = np.random.default_rng(5)
    a, b = random_complex(rng, (8, 8)), random_complex(rng, (8, 8))
    np.testing.assert_allclose(shifted_product(a, b, offset), naive_shifted_product(a, b, offset), atol=1e-15)


def test_shifted_product_shape_mismatch():
    with pytest.raises(ParameterError):
        shifted_product(np.zeros((4, 4)), np.zeros((4, 5)), (0, 0))


@settings(max_examples=50, deadline=None)
@given(ox=st.integers(-7, 7), oy=st.integers(-7, 7), seed=st.integers(0, 2**16))
def test_shifted_product_swap_conjugates(ox, oy, seed):
    rng = np.random.default_rng(seed)
    a, b = random_complex(rng, (9, 11)), random_complex(rng, (9, 11))
    np.testing.assert_allclose(shifted_product(a, b, (ox, oy)), np.conj(shifted_product(b, a, (-ox, -oy))))


@pytest.mark.parametrize(
    "d,alpha,expected",
    [(10, 0.0, (5, 0)), (10, math.pi / 2, (0, 5)), (10, math.pi / 4, (4, 4)), (6, 3 * math.pi / 4, (-2, 2))],
)
def test_stencil_offset_rounding(d, alpha, expected):
    assert stencil_offset(d, alpha) == expected
