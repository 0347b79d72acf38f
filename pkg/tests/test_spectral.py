import math

import numpy as np
import pytest

from fracsaddle.spectral import (
    Field,
    Grid,
    build_riesz_kernel,
    fftn,
    fractional_laplacian,
    gagliardo_norm_sq,
    get_threads,
    hs_norm_sq,
    l2_norm_sq,
    multiplier,
    origin_cell_average,
    riesz_convolve,
    seminorm_sq,
    set_threads,
)

# Origin-cell averages of |x|^{alpha-N} over the unit cell, frozen from
# adaptive quadrature with a midpoint-refinement cross-check.  The 1-D and
# 2-D values also have closed forms: 2 (1/2)^a / a and 4 ln(1 + sqrt 2).
CELL_MEAN_3D_ALPHA2 = 2.380077363980


def small_grid(N=3, M=8, L=4.0):
    return Grid(N, M, L)


def test_grid_geometry():
    g = Grid(3, 16, 8.0)
    assert g.h == pytest.approx(0.5)
    assert g.shape == (16, 16, 16)
    assert g.n_nodes == 4096
    assert g.cellvol == pytest.approx(0.125)
    nodes = g.axis_nodes()
    assert nodes[0] == pytest.approx(-4.0)
    assert nodes[-1] == pytest.approx(4.0 - 0.5)
    d = g.doubled()
    assert d.M == 32 and d.L == pytest.approx(16.0)
    assert d.h == pytest.approx(g.h)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(3, 15, 8.0)  # odd M
    with pytest.raises(ValueError):
        Grid(3, 4, 8.0)  # too small
    with pytest.raises(ValueError):
        Grid(3, 16, -1.0)


def test_field_shape_check():
    g = small_grid()
    with pytest.raises(ValueError):
        Field(g, np.zeros((8, 8)))


def test_multiplier_matches_analytic_symbol():
    g = Grid(2, 16, 5.0)
    for s in (0.25, 0.5, 1.0):
        mult = multiplier(g, s)
        k = np.fft.fftfreq(16, d=g.h)
        xi2 = (2.0 * math.pi) ** 2 * (k[:, None] ** 2 + k[None, :] ** 2)
        assert np.allclose(mult, xi2**s, rtol=1e-13, atol=0.0)


def test_plane_waves_are_eigenfunctions():
    g = Grid(2, 16, 6.0)
    x = g.coords()
    for m in [(1, 0), (3, 2), (-5, 7), (8, 0)]:  # includes a Nyquist mode
        wave = np.cos(2.0 * math.pi * (m[0] * x[0] + m[1] * x[1]) / g.L)
        lam = (2.0 * math.pi / g.L) ** 2 * (m[0] ** 2 + m[1] ** 2)
        for s in (0.3, 0.5, 1.0):
            out = fractional_laplacian(Field(g, wave), s)
            assert np.allclose(out.values, lam**s * wave, rtol=0.0, atol=1e-12 * lam**s)


def test_fractional_laplacian_s_range():
    g = small_grid()
    u = Field(g, np.zeros(g.shape))
    for s in (0.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            fractional_laplacian(u, s)


def test_self_adjointness(rng):
    g = Grid(3, 12, 6.0)
    u = Field(g, rng.standard_normal(g.shape))
    v = Field(g, rng.standard_normal(g.shape))
    s = 0.5
    lu, lv = fractional_laplacian(u, s), fractional_laplacian(v, s)
    a = g.cellvol * np.sum(lu.values * v.values)
    b = g.cellvol * np.sum(u.values * lv.values)
    assert a == pytest.approx(b, rel=1e-11)


def test_norm_decomposition(rng):
    g = Grid(3, 12, 6.0)
    u = Field(g, rng.standard_normal(g.shape))
    s = 0.5
    assert hs_norm_sq(u, s) == pytest.approx(l2_norm_sq(u) + seminorm_sq(u, s), rel=1e-12)
    # the seminorm is the quadratic form of the operator
    lu = fractional_laplacian(u, s)
    quad = g.cellvol * np.sum(lu.values * u.values)
    assert seminorm_sq(u, s) == pytest.approx(quad, rel=1e-10)


def test_l2_norm_of_constant():
    g = Grid(2, 8, 3.0)
    u = Field(g, np.full(g.shape, 2.0))
    assert l2_norm_sq(u) == pytest.approx(4.0 * g.L**2, rel=1e-14)


def test_origin_cell_closed_forms():
    # 1-D: mean of |y|^{a-1} over [-1/2, 1/2] is 2 (1/2)^a / a
    for a in (0.3, 0.5, 0.9):
        want = 2.0 * 0.5**a / a
        assert origin_cell_average(1, a, 1.0) == pytest.approx(want, rel=1e-8)
    # 2-D, alpha = 1: 4 ln(1 + sqrt 2)
    assert origin_cell_average(2, 1.0, 1.0) == pytest.approx(4.0 * math.log(1.0 + math.sqrt(2.0)), rel=1e-8)
    # 3-D, alpha = 2: frozen quadrature value
    assert origin_cell_average(3, 2.0, 1.0) == pytest.approx(CELL_MEAN_3D_ALPHA2, rel=1e-8)


def test_origin_cell_scaling():
    a, h = 2.0, 0.37
    want = h ** (a - 3.0) * origin_cell_average(3, a, 1.0)
    assert origin_cell_average(3, a, h) == pytest.approx(want, rel=1e-12)


def test_kernel_symmetry_and_values():
    g = Grid(3, 8, 4.0)
    k = build_riesz_kernel(g, 2.0)
    big = k.grid
    assert big.M == 16
    v = k.values
    # even under every axis flip on the doubled grid
    for ax in range(3):
        flipped = np.flip(v, axis=ax)
        rolled = np.roll(flipped, 1, axis=ax)  # node -(-L) wraps
        assert np.array_equal(rolled, v)
    A = 1.0 / (4.0 * math.pi)
    # probe a regular node: |x| = 1 at offset (2, 0, 0) from the origin node
    origin = (8, 8, 8)
    probe = v[10, 8, 8]
    assert probe == pytest.approx(A / 1.0, rel=1e-14)
    assert np.isfinite(v[origin])
    assert v[origin] > v[10, 8, 8]  # averaged singular cell dominates


def test_kernel_alpha_validation():
    g = small_grid()
    for bad in (0.0, 3.0, -1.0):
        with pytest.raises(ValueError):
            build_riesz_kernel(g, bad)


def test_convolution_matches_direct_sum_1d(rng):
    g = Grid(1, 32, 8.0)
    f = rng.standard_normal(g.shape)
    out = riesz_convolve(Field(g, f), 0.5)
    kern = build_riesz_kernel(g, 0.5).values
    x = g.axis_nodes()
    want = np.empty_like(f)
    for i in range(g.M):
        acc = 0.0
        for j in range(g.M):
            # kernel sampled at x_i - x_j on the doubled grid: index offset + M
            acc += kern[(i - j) + g.M] * f[j]
        want[i] = acc * g.cellvol
    err = np.abs(out.values - want).max() / np.abs(want).max()
    assert err <= 1e-12


def test_convolution_matches_direct_sum_2d(rng):
    g = Grid(2, 12, 6.0)
    f = rng.standard_normal(g.shape)
    out = riesz_convolve(Field(g, f), 1.0)
    kern = build_riesz_kernel(g, 1.0).values
    want = np.zeros_like(f)
    for i0 in range(g.M):
        for i1 in range(g.M):
            block = kern[i0 + g.M - np.arange(g.M)[:, None], i1 + g.M - np.arange(g.M)[None, :]]
            want[i0, i1] = np.sum(block * f) * g.cellvol
    err = np.abs(out.values - want).max() / np.abs(want).max()
    assert err <= 1e-12


def test_convolution_linearity_and_positivity(rng):
    g = Grid(2, 16, 6.0)
    a = rng.standard_normal(g.shape)
    b = rng.standard_normal(g.shape)
    ca = riesz_convolve(Field(g, a), 1.0).values
    cb = riesz_convolve(Field(g, b), 1.0).values
    cab = riesz_convolve(Field(g, 2.0 * a - 3.0 * b), 1.0).values
    assert np.allclose(cab, 2.0 * ca - 3.0 * cb, rtol=1e-12, atol=1e-12 * np.abs(ca).max())
    pos = riesz_convolve(Field(g, np.abs(a)), 1.0).values
    assert pos.min() > 0.0


def test_convolution_shift_equivariance():
    # a compactly supported bump convolved after a lattice shift equals the
    # shifted convolution as long as neither support touches the box edge
    g = Grid(2, 32, 16.0)
    x = g.coords()
    bump = np.exp(-4.0 * (x[0] ** 2 + x[1] ** 2))
    bump[(np.abs(x[0]) > 4.0) | (np.abs(x[1]) > 4.0)] = 0.0
    shifted = np.roll(bump, (3, -2), axis=(0, 1))
    c1 = riesz_convolve(Field(g, shifted), 1.0).values
    c2 = np.roll(riesz_convolve(Field(g, bump), 1.0).values, (3, -2), axis=(0, 1))
    # linear (non-circular) convolution only matches where the shifted kernel
    # window stays inside; compare on the central half of the box
    sl = (slice(8, 24), slice(8, 24))
    err = np.abs(c1[sl] - c2[sl]).max() / np.abs(c2[sl]).max()
    assert err <= 1e-6


def test_convolution_kernel_mismatch():
    g = small_grid()
    wrong = build_riesz_kernel(Grid(3, 12, 4.0), 2.0)
    with pytest.raises(ValueError):
        riesz_convolve(Field(g, np.ones(g.shape)), 2.0, kernel=wrong)


def test_gagliardo_matches_spectral_seminorm():
    # single-mode field on a 16^2 grid; the double-sum route should land on
    # the spectral value once the periodization tail is accounted for
    g = Grid(2, 16, 10.0)
    x = g.coords()
    u = Field(g, np.cos(2.0 * math.pi * x[0] / g.L) * np.cos(2.0 * math.pi * x[1] / g.L))
    for s in (0.25, 0.5):
        spec = seminorm_sq(u, s)
        gag = gagliardo_norm_sq(u, s)
        assert abs(gag - spec) / spec <= 0.10, (s, gag / spec)
    # at s = 0.75 the near-diagonal quadrature error of the double sum is
    # O(h^{2-2s}) and dominates; the two routes still agree in order of magnitude
    spec = seminorm_sq(u, 0.75)
    gag = gagliardo_norm_sq(u, 0.75)
    assert 0.5 <= gag / spec <= 2.0


def test_gagliardo_constant_field_is_zero():
    g = Grid(2, 12, 5.0)
    u = Field(g, np.full(g.shape, 3.0))
    assert gagliardo_norm_sq(u, 0.5) == pytest.approx(0.0, abs=1e-10)


def test_gagliardo_node_guard():
    g = Grid(3, 20, 5.0)  # 8000 nodes, over the O(n^2) comfort limit
    with pytest.raises(ValueError):
        gagliardo_norm_sq(Field(g, np.zeros(g.shape)), 0.5)


def test_thread_control():
    old = get_threads()
    try:
        set_threads(2)
        assert get_threads() == 2
        set_threads(0)  # clamps instead of raising
        assert get_threads() == 1
    finally:
        set_threads(old)
