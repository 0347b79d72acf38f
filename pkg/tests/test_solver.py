import numpy as np
import pytest

from fracsaddle.coxeter import named_group
from fracsaddle.energy import energy, interaction, nehari_energy
from fracsaddle.params import ModelParams
from fracsaddle.solver import (
    CollapseToZero,
    SolverConfig,
    default_saddle_radius,
    get_action,
    group_transform,
    init_groundstate,
    init_saddle,
    mountain_pass_check,
    separation_factor,
    solve,
    symmetrize,
)
from fracsaddle.spectral import Field, Grid, hs_norm_sq

PARAMS = ModelParams(3, 0.5, 2.0, 2.0)
GROUPS = ["A1", "A1xA1", "A2", "B2", "B3"]


def test_group_transform_flip_1d():
    g = Grid(1, 8, 4.0)
    vals = np.arange(8.0)
    out = group_transform(Field(g, vals), np.array([[-1]]))
    # node x_k = -2 + k/2 maps to index (8 - k) % 8 under x -> -x
    want = vals[(8 - np.arange(8)) % 8]
    assert np.array_equal(out.values, want)


def test_group_transform_swap_2d(rng):
    g = Grid(2, 8, 4.0)
    vals = rng.standard_normal(g.shape)
    swap = np.array([[0, 1], [1, 0]])
    out = group_transform(Field(g, vals), swap)
    assert np.array_equal(out.values, vals.T)


@pytest.mark.parametrize("name", GROUPS)
def test_symmetrize_idempotent_bitwise(name, rng):
    g = Grid(3, 8, 4.0)
    G = named_group(name)
    u = Field(g, rng.standard_normal(g.shape))
    once = symmetrize(u, G)
    twice = symmetrize(once, G)
    assert np.array_equal(once.values, twice.values)


@pytest.mark.parametrize("name", GROUPS)
def test_symmetrize_equivariant_bitwise(name, rng):
    g = Grid(3, 8, 4.0)
    G = named_group(name)
    action = get_action(g, G)
    flat = symmetrize(Field(g, rng.standard_normal(g.shape)), G).values.ravel()
    for i in range(G.order):
        assert np.array_equal(flat[action.tables[i]], action.signs[i] * flat)


def test_symmetrize_kills_even_part():
    g = Grid(3, 8, 4.0)
    x = g.coords()
    even = np.cos(2.0 * np.pi * x[0] / g.L) + x[1] * 0.0 + x[2] * 0.0
    out = symmetrize(Field(g, np.broadcast_to(even, g.shape).copy()), named_group("A1"))
    assert np.all(out.values == 0.0)


@pytest.mark.parametrize("name", GROUPS)
def test_symmetrize_vanishes_on_walls(name, rng):
    g = Grid(3, 8, 4.0)
    G = named_group(name)
    out = symmetrize(Field(g, rng.standard_normal(g.shape)), G).values
    C = G.chamber()
    coords = np.stack(np.meshgrid(*([g.axis_nodes()] * 3), indexing="ij"), axis=-1)
    on_wall = np.zeros(g.shape, dtype=bool)
    for n in C.normals:
        n3 = np.zeros(3)
        n3[: len(n)] = n
        on_wall |= np.abs(coords @ n3) < 1e-12
    assert np.all(out[on_wall] == 0.0)


def test_init_groundstate_nehari_normalized():
    g = Grid(3, 16, 8.0)
    u = init_groundstate(g, PARAMS)
    assert u.values.min() > 0.0
    Q = hs_norm_sq(u, PARAMS.s)
    D = interaction(u, PARAMS)
    assert Q == pytest.approx(D, rel=1e-10)


def test_separation_factors():
    # the two bumps of the rank-1 arrangement sit at distance 2 on the unit
    # sphere, so the placement multiplier is exactly 3 (centers at +-3R)
    assert separation_factor(named_group("A1")) == pytest.approx(3.0, rel=1e-12)
    for name in ("A1xA1", "B2", "B3"):
        assert separation_factor(named_group(name)) > 3.0


def test_default_radius_respects_guard():
    for name in GROUPS:
        G = named_group(name)
        g = Grid(3, 16, 8.0)
        R = default_saddle_radius(g, G)
        ell = separation_factor(G)
        assert 0.0 < R <= g.L / 8.0
        assert ell * R <= g.L / 2.0 - 3.0 * R + 1e-12


def test_init_saddle_rank1_geometry():
    g = Grid(3, 16, 12.0)
    G = named_group("A1")
    R = 1.0
    u = init_saddle(g, G, PARAMS, R=R)
    vals = u.values
    # odd in x1, wall plane exactly zero
    action = get_action(g, G)
    flat = vals.ravel()
    assert np.array_equal(flat[action.tables[1]], -flat)
    k0 = g.M // 2  # node at x1 = 0
    assert np.all(vals[k0, :, :] == 0.0)
    # peak near +3R on the x1 axis
    peak = np.unravel_index(np.argmax(vals), g.shape)
    x = g.axis_nodes()
    assert abs(x[peak[0]] - 3.0 * R) <= g.h
    assert abs(x[peak[1]]) <= g.h and abs(x[peak[2]]) <= g.h
    # Nehari normalized
    assert hs_norm_sq(u, PARAMS.s) == pytest.approx(interaction(u, PARAMS), rel=1e-10)


@pytest.mark.parametrize("name", GROUPS)
def test_init_saddle_symmetry_all_groups(name):
    g = Grid(3, 16, 12.0)
    G = named_group(name)
    u = init_saddle(g, G, PARAMS)
    action = get_action(g, G)
    flat = u.values.ravel()
    for i in range(G.order):
        assert np.array_equal(flat[action.tables[i]], action.signs[i] * flat)
    assert np.abs(u.values).max() > 0.0


def test_init_saddle_validation():
    g = Grid(3, 16, 12.0)
    G = named_group("A1")
    with pytest.raises(ValueError):
        init_saddle(g, G, PARAMS, R=-0.5)
    with pytest.raises(ValueError):
        init_saddle(g, G, PARAMS, R=g.L / 3.0)  # over the L/4 cap
    with pytest.raises(ValueError):
        init_saddle(g, G, PARAMS, R=g.L / 5.0)  # passes the cap, trips the wrap guard
    with pytest.raises(ValueError):
        init_saddle(g, named_group("trivial"), PARAMS)


def test_solver_config_validation():
    g = Grid(3, 8, 4.0)
    G = named_group("trivial")
    with pytest.raises(ValueError):
        SolverConfig(params=PARAMS, grid=g, group=G, tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(params=PARAMS, grid=g, group=G, max_iters=0)
    with pytest.raises(ValueError):
        SolverConfig(params=PARAMS, grid=Grid(2, 8, 4.0), group=named_group("B3"))


def test_solve_groundstate_smoke():
    g = Grid(3, 16, 10.0)
    cfg = SolverConfig(params=PARAMS, grid=g, group=named_group("trivial"), tol=1e-5)
    sol = solve(cfg, init_groundstate(g, PARAMS))
    assert sol.converged
    assert sol.residual <= 1e-5
    assert sol.energy > 0.0
    assert sol.iterations <= cfg.max_iters
    assert sol.metadata["stalled"] is False
    assert sol.metadata["grid"]["M"] == 16
    # the converged energy is the Nehari value of its own field
    assert nehari_energy(sol.u, PARAMS) == pytest.approx(sol.energy, rel=1e-8)


def test_solve_restart_is_stable():
    g = Grid(3, 16, 10.0)
    cfg = SolverConfig(params=PARAMS, grid=g, group=named_group("trivial"), tol=1e-5)
    sol = solve(cfg, init_groundstate(g, PARAMS))
    again = solve(cfg, sol.u)
    assert again.iterations == 1
    assert again.energy == pytest.approx(sol.energy, rel=1e-10)


def test_solve_saddle_smoke():
    g = Grid(3, 16, 10.0)
    G = named_group("A1")
    cfg = SolverConfig(params=PARAMS, grid=g, group=G, tol=1e-5)
    sol = solve(cfg, init_saddle(g, G, PARAMS))
    assert sol.converged
    # stays in the odd class, bitwise
    action = get_action(g, G)
    flat = sol.u.values.ravel()
    assert np.array_equal(flat[action.tables[1]], -flat)
    # costs more than the free minimum
    free = solve(
        SolverConfig(params=PARAMS, grid=g, group=named_group("trivial"), tol=1e-5),
        init_groundstate(g, PARAMS),
    )
    assert sol.energy > free.energy


def test_solve_rejects_zero_class():
    g = Grid(3, 16, 10.0)
    G = named_group("A1")
    cfg = SolverConfig(params=PARAMS, grid=g, group=G, tol=1e-5)
    x = g.coords()
    even = np.exp(-(x[0] ** 2 + x[1] ** 2 + x[2] ** 2))
    with pytest.raises(CollapseToZero):
        solve(cfg, Field(g, even))


def test_mountain_pass_peak_at_one():
    g = Grid(3, 16, 10.0)
    cfg = SolverConfig(params=PARAMS, grid=g, group=named_group("trivial"), tol=1e-5)
    sol = solve(cfg, init_groundstate(g, PARAMS))
    peak = mountain_pass_check(sol, PARAMS)
    assert peak == pytest.approx(energy(sol.u, PARAMS).total, rel=1e-9)
