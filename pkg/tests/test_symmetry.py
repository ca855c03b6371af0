import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_line_accumulator, naive_stencil_map
from symwave import (
    ParameterError,
    PeakParams,
    StencilConfig,
    SweepParams,
    SymmetryLine,
    accumulate_centers,
    accumulate_lines,
    extract_centers,
    extract_lines,
    line_params,
    make_morlet,
    refine_line_scores,
    stencil_coefficient_map,
    stencil_kernels,
)
from synthetic import disk, mirrored_columns, mirrored_noise, rectangle

SMALL = SweepParams(n_alpha=8, distances=(6.0, 10.0, 14.0))


def acute(a, b):
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


# --- stencil kernels -------------------------------------------------------


def test_zero_tilt_pair_shares_orientation():
    v, w = stencil_kernels(StencilConfig(alpha=0.6, beta=0.0, d=10))
    assert v.angle % math.pi == pytest.approx(w.angle % math.pi)
    np.testing.assert_allclose(w.values, np.conj(v.values), atol=1e-12)


def test_quarter_tilt_angles():
    v, w = stencil_kernels(StencilConfig(alpha=0.0, beta=math.pi / 4, d=10))
    assert sorted([v.angle, w.angle]) == pytest.approx([math.pi / 4, 3 * math.pi / 4])


def reflect_grid(values, alpha):
    """Reflect a kernel grid across the axis perpendicular to ``alpha`` (grid-exact angles only)."""
    n = values.shape[0]
    h = n // 2
    e = np.array([math.cos(alpha), math.sin(alpha)])
    out = np.empty_like(values)
    for i in range(n):
        for j in range(n):
            u = np.array([j - h, i - h], dtype=float)
            m = u - 2 * (u @ e) * e
            mx, my = np.rint(m).astype(int)
            assert np.allclose(m, [mx, my], atol=1e-9)
            out[i, j] = values[my + h, mx + h]
    return out


@pytest.mark.parametrize("alpha", [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4])
@pytest.mark.parametrize("beta", [0.0, math.pi / 4, -math.pi / 4, 0.3])
def test_pair_is_mirror_image(alpha, beta):
    v, w = stencil_kernels(StencilConfig(alpha=alpha, beta=beta, d=12))
    np.testing.assert_allclose(reflect_grid(v.values, alpha), w.values, atol=1e-10)


def test_stencil_config_validation():
    with pytest.raises(ParameterError):
        StencilConfig(alpha=0.0, beta=0.0, d=0)
    with pytest.raises(ParameterError):
        StencilConfig(alpha=math.pi, beta=0.0, d=5)


# --- coefficient maps ------------------------------------------------------


def test_constant_image_coefficients_vanish():
    out = stencil_coefficient_map(np.full((40, 40), 0.6), StencilConfig(0.4, math.pi / 4, 12))
    assert np.abs(out).max() <= 1e-8


@pytest.mark.parametrize("boundary", ["symmetric", "zero"])
def test_coefficient_map_matches_naive_stencil(boundary):
    rng = np.random.default_rng(21)
    img = rng.random((32, 32))
    cfg = StencilConfig(alpha=math.pi / 4, beta=0.0, d=10)
    fast = stencil_coefficient_map(img, cfg, boundary=boundary)
    slow = naive_stencil_map(img, cfg.alpha, cfg.beta, cfg.d, make_morlet, boundary=boundary)
    np.testing.assert_allclose(fast, slow, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("beta", [0.0, math.pi / 4, -math.pi / 4])
@pytest.mark.parametrize("d", [6, 10, 18, 26])
def test_mirrored_image_votes_align_on_axis(beta, d):
    rng = np.random.default_rng(5)
    img = mirrored_columns(rng, n=64, axis_col=32, width=65)
    c = stencil_coefficient_map(img, StencilConfig(alpha=0.0, beta=beta, d=d))[:, 32]
    assert abs(c.sum()) >= 0.9 * np.abs(c).sum()


# --- line parameters -------------------------------------------------------


def test_line_params_origin():
    for alpha in (0.0, 0.3, 1.7, 3.0):
        assert line_params((0, 0), alpha)[1] == 0.0


def test_line_params_unit_x():
    rho, delta = line_params((1, 0), 0.0)
    assert rho == pytest.approx(math.pi / 2)
    assert delta == pytest.approx(1.0)


def test_line_params_wrap_flips_delta():
    rho, delta = line_params((0, 1), math.pi / 2)
    assert rho == pytest.approx(0.0, abs=1e-12)
    assert delta == pytest.approx(-1.0)


@settings(max_examples=100, deadline=None)
@given(
    px=st.floats(-300, 300),
    py=st.floats(-300, 300),
    alpha=st.floats(0, math.pi, exclude_max=True),
)
def test_line_passes_through_point_perpendicular_to_stencil(px, py, alpha):
    rho, delta = line_params((px, py), alpha)
    assert 0 <= rho < math.pi
    # the line {q : q . (sin rho, -cos rho) = delta} must contain p
    assert px * math.sin(rho) - py * math.cos(rho) - delta == pytest.approx(0, abs=1e-9)
    assert math.cos(rho) * math.cos(alpha) + math.sin(rho) * math.sin(alpha) == pytest.approx(0, abs=1e-12)


# --- line accumulation -----------------------------------------------------


def test_bar_axes_are_the_two_strongest_peaks():
    img = rectangle(64, 26, 38, 14, 50)  # 13 x 37 bar centred on (32, 32)
    acc = accumulate_lines(img, SweepParams.for_image(img.shape))
    top = extract_lines(acc, PeakParams(max_detections=2))
    expected = {(math.pi / 2, 32.0), (0.0, -32.0)}
    for line in top:
        assert any(
            acute(line.rho, rho) <= acc.rho_step + 1e-9 and abs(line.delta - delta) <= 2 for rho, delta in expected
        )
    assert len({round(line.rho, 6) for line in top}) == 2


def test_constant_image_gives_empty_accumulator():
    acc = accumulate_lines(np.full((40, 48), 0.3), SweepParams.for_image((40, 48)))
    assert acc.votes.max() <= 1e-8


@pytest.mark.parametrize("seed", range(3))
def test_block_accumulator_matches_brute_force(seed):
    img = np.random.default_rng(seed).random((32, 32))
    fast = accumulate_lines(img, SMALL).votes
    slow = naive_line_accumulator(img, 8, SMALL.betas, SMALL.distances, 2.0, make_morlet)
    np.testing.assert_allclose(fast, slow, rtol=1e-6, atol=1e-12 * slow.max())


def test_accumulator_layout():
    acc = accumulate_lines(np.random.default_rng(0).random((20, 30)), SMALL)
    d = math.ceil(math.hypot(20, 30))
    assert acc.votes.shape == (8, 2 * d + 1)
    np.testing.assert_allclose(acc.rho, np.arange(8) * math.pi / 8)
    assert acc.delta[0] == -d and acc.delta[-1] == d
    assert np.all(acc.votes >= 0) and np.all(np.isfinite(acc.votes))


@pytest.mark.parametrize("n", [1.0, 2.0])
def test_intensity_scaling_scales_votes(n):
    img = np.random.default_rng(9).random((32, 32))
    params = SweepParams(n_alpha=8, distances=(6.0, 10.0), exponent=n)
    base = accumulate_lines(img, params).votes
    scaled = accumulate_lines(2.5 * img, params).votes
    np.testing.assert_allclose(scaled, 2.5 ** (2 * n) * base, rtol=1e-9, atol=1e-9 * scaled.max())
    assert np.argmax(scaled) == np.argmax(base)


@pytest.mark.parametrize("seed", range(3))
def test_quarter_turn_shifts_top_rho_by_half_the_bins(seed):
    rng = np.random.default_rng(seed)
    img, _ = mirrored_noise(rng, n=64, axis_angle=rng.uniform(0, math.pi))
    params = SweepParams.for_image(img.shape)
    a = accumulate_lines(img, params).votes
    b = accumulate_lines(np.rot90(img), params).votes
    ra = np.unravel_index(np.argmax(a), a.shape)[0]
    rb = np.unravel_index(np.argmax(b), b.shape)[0]
    assert (rb - ra) % params.n_alpha == params.n_alpha // 2


def test_single_stencil_coherent_equals_incoherent():
    img = np.random.default_rng(4).random((24, 24))
    params = SweepParams(n_alpha=4, betas=(0.0,), distances=(8.0,))
    np.testing.assert_allclose(
        accumulate_lines(img, params, coherent=True).votes,
        accumulate_lines(img, params, coherent=False).votes,
        rtol=1e-12,
    )


def test_incoherent_variant_is_selectable():
    img = np.random.default_rng(4).random((24, 24))
    coh = accumulate_lines(img, SMALL, coherent=True).votes
    inc = accumulate_lines(img, SMALL, coherent=False).votes
    assert not np.allclose(coh, inc)


def test_parallel_sweep_matches_serial():
    img = np.random.default_rng(8).random((40, 40))
    params = SweepParams.for_image(img.shape, n_alpha=16)
    np.testing.assert_array_equal(
        accumulate_lines(img, params, workers=4).votes, accumulate_lines(img, params).votes
    )


def test_sweep_validation():
    with pytest.raises(ParameterError):
        SweepParams(n_alpha=0)
    with pytest.raises(ParameterError):
        SweepParams(distances=(10.0, 6.0))
    with pytest.raises(ParameterError):
        SweepParams(distances=(0.0, 6.0))
    with pytest.raises(ParameterError):
        SweepParams(exponent=0)
    with pytest.raises(ParameterError):
        SweepParams(boundary="mirror")


def test_default_distances():
    p = SweepParams.for_image((100, 200))
    assert p.distances[0] == 6.0
    assert np.allclose(np.diff(p.distances), 4.0)
    assert p.distances[-1] <= 0.8 * 200 < p.distances[-1] + 4.0


# --- center likelihood -----------------------------------------------------


def test_disk_center_is_global_maximum():
    img = disk(64, (32, 32), 20)
    m = accumulate_centers(img, SweepParams.ellipse(distances=(35, 40, 45)))
    y, x = np.unravel_index(np.argmax(m), m.shape)
    assert math.hypot(x - 32, y - 32) <= 2


def test_constant_image_center_map_vanishes():
    m = accumulate_centers(np.full((50, 50), 0.9), SweepParams.ellipse(distances=(20, 24)))
    assert m.max() <= 1e-8


def test_two_disks_two_maxima():
    img = disk(96, (30, 40), 20) + disk(96, (68, 58), 20)
    m = accumulate_centers(img, SweepParams.ellipse(distances=(35, 40, 45)))
    centers = extract_centers(m, PeakParams(threshold_fraction=0.5))
    assert len(centers) == 2
    for truth in ((30, 40), (68, 58)):
        assert min(math.hypot(c.x - truth[0], c.y - truth[1]) for c in centers) <= 2


@pytest.mark.parametrize("r", [8, 12, 16])
def test_single_distance_circle(r):
    img = disk(64, (30, 33), r)
    m = accumulate_centers(img, SweepParams.ellipse(distances=(2 * r,)))
    y, x = np.unravel_index(np.argmax(m), m.shape)
    assert math.hypot(x - 30, y - 33) <= 2


def test_center_mode_requires_zero_tilt():
    with pytest.raises(ParameterError):
        accumulate_centers(np.zeros((40, 40)), SweepParams(distances=(20.0,)))


# --- robust rescoring ------------------------------------------------------


def test_refine_single_candidate():
    img = mirrored_columns(np.random.default_rng(1), 64, 32)
    out = refine_line_scores(img, [SymmetryLine(math.pi / 2, 32.0, 7.0)], SweepParams.for_image(img.shape))
    assert len(out) == 1 and out[0].rho == math.pi / 2 and out[0].delta == 32.0


def test_refine_prefers_true_axis():
    img = mirrored_columns(np.random.default_rng(2), 64, 32)
    params = SweepParams.for_image(img.shape)
    off = SymmetryLine(math.pi / 2, 26.0, 100.0)
    on = SymmetryLine(math.pi / 2, 32.0, 1.0)
    out = refine_line_scores(img, [off, on], params)
    assert out[0].delta == 32.0 and out[0].score > out[1].score


def test_refine_ignores_input_order():
    img = mirrored_columns(np.random.default_rng(3), 64, 32)
    params = SweepParams.for_image(img.shape)
    lines = [SymmetryLine(math.pi / 2, 32.0, 1.0), SymmetryLine(0.0, -20.0, 2.0), SymmetryLine(1.0, 5.0, 3.0)]
    assert refine_line_scores(img, lines, params) == refine_line_scores(img, lines[::-1], params)


def test_refine_empty():
    assert refine_line_scores(np.zeros((30, 30)), [], SMALL) == []
