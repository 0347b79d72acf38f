"""Symmetrization, initializers, and the Nehari-projected descent loop.

Symmetrization is the linchpin: the saddle classes are defined by the exact
relation u(g x) = phi(g) u(x), and a floating-point average over the group
would only satisfy it to rounding error, which the descent flow then
amplifies.  The projection here is therefore built from integer index
tables: each node stores which canonical orbit representative feeds it and
with which sign, so projecting is a gather, one averaged value per orbit,
and a signed scatter.  Idempotence and equivariance hold bitwise.

Lattice nodes fixed by an orientation-reversing element (reflection walls,
including the periodic identification of the -L/2 faces) can only carry the
value 0 and are pinned there.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .coxeter import CoxeterGroup
from .energy import energy as energy_of
from .params import ModelParams
from .spectral import Field, Grid, fftn, ifftn, multiplier

_ZERO_TOL = 1e-10


class CollapseToZero(Exception):
    """The symmetric class lost all mass during projection or descent."""


@dataclass
class SolverConfig:
    params: ModelParams
    grid: Grid
    group: CoxeterGroup
    max_iters: int = 2000
    tol: float = 1e-6
    step: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.group.rank > self.grid.N_dims:
            raise ValueError(
                f"group acts on {self.group.rank} coordinates but the grid "
                f"has only {self.grid.N_dims}"
            )


@dataclass
class Solution:
    u: Field
    energy: float
    residual: float
    iterations: int
    nodal_count: int
    decay_slope: float
    converged: bool
    metadata: dict = field(default_factory=dict)


def _embed(m: np.ndarray, N_dims: int) -> np.ndarray:
    """Extend a k x k group element to act on the first k of N_dims axes."""
    k = m.shape[0]
    out = np.eye(N_dims, dtype=np.int64)
    out[:k, :k] = m
    return out


def _index_table(grid: Grid, m: np.ndarray) -> np.ndarray:
    """Flat source indices: table[j] = flat index of m x_j (periodic).

    With x_k = -L/2 + k h, the reflected node -x_k sits at index (M - k) % M,
    so signed permutations act exactly on indices and never interpolate.
    """
    M, N = grid.M, grid.N_dims
    idx = np.indices(grid.shape)
    src = np.empty_like(idx)
    for r in range(N):
        c = int(np.argmax(np.abs(m[r])))
        if m[r, c] > 0:
            src[r] = idx[c]
        else:
            src[r] = (M - idx[c]) % M
    return np.ravel_multi_index(tuple(src), grid.shape).ravel()


def group_transform(u: Field, m) -> Field:
    """The action (m . u)(x) = u(m^{-1} x), by index permutation."""
    m = np.asarray(m, dtype=np.int64)
    minv = m.T  # orthogonal integer matrix
    table = _index_table(u.grid, _embed(minv, u.grid.N_dims))
    return Field(u.grid, u.values.ravel()[table].reshape(u.grid.shape))


class GroupAction:
    """Precomputed index machinery for one (grid, group) pair.

    tables[i][j] = flat index of g_i^{-1} x_j, so a gather along tables[i]
    evaluates u(g_i^{-1} x) = (g_i . u)(x).
    """

    def __init__(self, grid: Grid, group: CoxeterGroup):
        if group.rank > grid.N_dims:
            raise ValueError(
                f"group acts on {group.rank} coordinates but the grid "
                f"has only {grid.N_dims}"
            )
        self.grid = grid
        self.group = group
        n = grid.n_nodes
        order = group.order
        self.signs = group.signs.astype(np.float64)
        self.tables = np.empty((order, n), dtype=np.int64)
        for i, g in enumerate(group.elements):
            ginv = np.ascontiguousarray(g.T)
            self.tables[i] = _index_table(grid, _embed(ginv, grid.N_dims))
        # nodes fixed by any orientation-reversing element must vanish
        self_idx = np.arange(n)
        wall = np.zeros(n, dtype=bool)
        for i in range(order):
            if self.signs[i] < 0:
                wall |= self.tables[i] == self_idx
        self.wall = wall
        # canonical orbit representatives: the smallest flat index per orbit
        rep = self.tables.min(axis=0)
        self.rep_sel = np.flatnonzero((rep == self_idx) & ~wall)
        self.gather = self.tables[:, self.rep_sel]
        self.id_row = group.index_of(np.eye(group.rank, dtype=np.int64))

    def project(self, values: np.ndarray) -> np.ndarray:
        """P_G u = (1/|G|) sum_g phi(g) u(g^{-1} x), exactly idempotent.

        Averages once per orbit, then scatters the value back through the
        group with the sign character.  The base term is the identity row,
        so a field already in the range passes through bitwise.
        """
        flat = values.ravel()
        rows = self.signs[:, None] * flat[self.gather]
        base = rows[self.id_row]
        v = base + (rows - base).sum(axis=0) / len(self.signs)
        out = np.empty_like(flat)
        for i in range(len(self.signs)):
            out[self.gather[i]] = self.signs[i] * v
        out[self.wall] = 0.0
        return out.reshape(values.shape)


_action_cache: dict = {}


def get_action(grid: Grid, group: CoxeterGroup) -> GroupAction:
    key = (grid, group.fingerprint())
    if key not in _action_cache:
        _action_cache[key] = GroupAction(grid, group)
    return _action_cache[key]


def symmetrize(u: Field, G: CoxeterGroup) -> Field:
    """Project onto the class {u : u(g x) = phi(g) u(x)}."""
    if G.is_trivial():
        return u.copy()
    return Field(u.grid, get_action(u.grid, G).project(u.values))


# ---------------------------------------------------------------------------
# Initializers
# ---------------------------------------------------------------------------

def _nehari_project(u: Field, params: ModelParams) -> Field:
    from .energy import nehari_scale

    t = nehari_scale(u, params)
    return Field(u.grid, t * u.values)


def init_groundstate(grid: Grid, params: ModelParams) -> Field:
    """Centered Gaussian of width L/8, scaled onto the Nehari set."""
    sigma = grid.L / 8.0
    u = Field(grid, np.exp(-grid.radius() ** 2 / sigma**2))
    return _nehari_project(u, params)


def separation_factor(G: CoxeterGroup) -> float:
    """Smallest l with l * (min pairwise distance of the unit orbit) >= 6."""
    C = G.chamber()
    q = C.interior_point()
    q = q / np.linalg.norm(q)
    pts = G.orbit(q)
    d = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((d**2).sum(axis=2))
    m = dist[dist > 1e-9].min()
    return 6.0 / m


def default_saddle_radius(grid: Grid, G: CoxeterGroup) -> float:
    """Largest comfortable bump scale: capped at L/8 and kept clear of the
    wrap guard l_G R <= L/2 - 3R."""
    ell = separation_factor(G)
    return min(grid.L / 8.0, 0.9 * (grid.L / 2.0) / (ell + 3.0))


def init_saddle(
    grid: Grid,
    G: CoxeterGroup,
    params: ModelParams,
    R: float | None = None,
    profile=None,
) -> Field:
    """Signed bump arrangement in the saddle class, Nehari-projected.

    Takes a unit direction q through the chamber interior, places a copy of
    the profile at each point of the orbit of l_G R q with sign phi(g), then
    symmetrizes exactly and scales onto the Nehari set.  The rank-1 case
    reduces to two opposite bumps at +-3R along the wall normal.

    profile: callable r2 -> amplitude on squared distance; default Gaussian
    of width R/2.
    """
    if G.is_trivial():
        raise ValueError("saddle initializer needs a nontrivial group")
    if R is None:
        R = default_saddle_radius(grid, G)
    if not 0.0 < R < grid.L / 4.0:
        raise ValueError(f"R must lie in (0, L/4); got {R}")
    ell = separation_factor(G)
    if ell * R > grid.L / 2.0 - 3.0 * R:
        raise ValueError(
            f"placement radius {ell * R:.3f} exceeds L/2 - 3R = "
            f"{grid.L / 2.0 - 3.0 * R:.3f}; shrink R"
        )
    if profile is None:
        w = R / 2.0

        def profile(r2):
            return np.exp(-r2 / w**2)

    C = G.chamber()
    q = C.interior_point()
    q = q / np.linalg.norm(q)

    rng = np.random.default_rng(12345)
    radius = ell * R
    for _attempt in range(6):
        vals = _place_signed_bumps(grid, G, q, radius, profile)
        sym = symmetrize(Field(grid, vals), G)
        norm = np.sqrt(float(grid.cellvol * np.sum(sym.values**2)))
        if norm > _ZERO_TOL:
            return _nehari_project(sym, params)
        radius = ell * R * (1.0 + 0.05 * float(rng.uniform(-1.0, 1.0)))
    raise CollapseToZero("signed bump arrangement symmetrized to zero")


def _place_signed_bumps(grid, G, q, radius, profile):
    N = grid.N_dims
    centers = np.zeros((G.order, N))
    for i, g in enumerate(G.elements):
        centers[i, : G.rank] = radius * (g @ q)
    coords = grid.coords()
    L = grid.L
    vals = np.zeros(grid.shape)
    for i in range(G.order):
        r2 = 0.0
        for ax in range(N):
            d = coords[ax] - centers[i, ax]
            d = np.mod(d + L / 2.0, L) - L / 2.0
            r2 = r2 + d**2
        vals += float(G.signs[i]) * profile(r2)
    return vals


# ---------------------------------------------------------------------------
# Descent loop
# ---------------------------------------------------------------------------

def solve(config: SolverConfig, initial: Field) -> Solution:
    """Minimize the energy over the Nehari set of the symmetric class.

    Preconditioned projected gradient descent: symmetrize, step against the
    (1 + |xi|^{2s})^{-1}-smoothed gradient, re-symmetrize, rescale onto the
    Nehari set, and accept by simple decrease of the closed-form Nehari
    energy with up to 30 step halvings.  Convergence is declared on the
    plain L^2 gradient residual projected orthogonal to the ray direction.
    """
    t_start = time.perf_counter()
    params, grid = config.params, config.grid
    p, s = params.p, params.s
    action = None if config.group.is_trivial() else get_action(grid, config.group)

    def project(vals):
        return vals if action is None else action.project(vals)

    from .energy import interaction
    from .spectral import riesz_convolve

    mult = multiplier(grid, s)
    precond = 1.0 / (1.0 + mult)
    pw = grid.cellvol / grid.n_nodes  # Parseval weight

    def transforms_of(vals):
        """u_hat, convolution, H^s norm^2, interaction for one candidate."""
        vhat = fftn(vals)
        Q = pw * float(np.sum((1.0 + mult) * (vhat.real**2 + vhat.imag**2)))
        vp = np.abs(vals) ** p
        conv = riesz_convolve(Field(grid, vp), params.alpha).values
        D = float(grid.cellvol * np.sum(conv * vp))
        return vhat, conv, Q, D

    def nehari_value(Q, D):
        return (0.5 - 0.5 / p) * Q ** (p / (p - 1.0)) / D ** (1.0 / (p - 1.0))

    u = project(initial.values)
    norm = np.sqrt(float(grid.cellvol * np.sum(u**2)))
    if norm < _ZERO_TOL:
        raise CollapseToZero("initial field symmetrized to zero")
    uhat, conv, Q, D = transforms_of(u)
    if D <= 0.0:
        raise ValueError("initial field has no interaction mass")
    t = (Q / D) ** (1.0 / (2.0 * p - 2.0))
    u, uhat, conv = t * u, t * uhat, t**p * conv
    Q, D = t**2 * Q, t ** (2.0 * p) * D
    E = nehari_value(Q, D)

    residual = np.inf
    iters = 0
    stalled = False
    for iters in range(1, config.max_iters + 1):
        # L^2 gradient from cached transforms
        lap = ifftn(mult * uhat).real
        if p == 2.0:
            force = conv * u
        else:
            force = conv * np.sign(u) * np.abs(u) ** (p - 1.0)
        g = lap + u - force
        gu = float(np.sum(g * u))
        uu = float(np.sum(u * u))
        r = g - (gu / uu) * u
        residual = float(np.sqrt(np.sum(r * r) / uu))
        if residual <= config.tol:
            break

        d = ifftn(precond * fftn(g)).real
        tau = config.step
        accepted = False
        for _halving in range(31):
            cand = project(u - tau * d)
            cn = float(np.sum(cand**2))
            if cn * grid.cellvol < _ZERO_TOL**2:
                raise CollapseToZero("iterate symmetrized to zero")
            chat, cconv, cQ, cD = transforms_of(cand)
            if cD > 0.0:
                cE = nehari_value(cQ, cD)
                if cE < E:
                    tt = (cQ / cD) ** (1.0 / (2.0 * p - 2.0))
                    u = tt * cand
                    uhat = tt * chat
                    conv = tt**p * cconv
                    Q, D = tt**2 * cQ, tt ** (2.0 * p) * cD
                    E = cE
                    accepted = True
                    break
            tau *= 0.5
        if not accepted:
            stalled = True
            break

    field_u = Field(grid, u)
    bre = energy_of(field_u, params)

    from . import analysis

    try:
        nodal = analysis.nodal_domains(field_u, 1e-3).count
    except ValueError:
        nodal = 0
    try:
        slope = analysis.decay_exponent(field_u, 0.2, 0.4)
    except ValueError:
        slope = float("nan")

    elapsed = time.perf_counter() - t_start
    meta = {
        "params": {"N": params.N, "s": params.s, "alpha": params.alpha, "p": params.p},
        "grid": {"M": grid.M, "L": grid.L, "N_dims": grid.N_dims},
        "group": {"name": config.group.name, "order": config.group.order},
        "tol": config.tol,
        "step": config.step,
        "seed": config.seed,
        "max_iters": config.max_iters,
        "stalled": stalled,
        "time_seconds": elapsed,
        "time_per_iteration": elapsed / max(iters, 1),
    }
    return Solution(
        u=field_u,
        energy=bre.total,
        residual=residual,
        iterations=iters,
        nodal_count=nodal,
        decay_slope=slope,
        converged=residual <= config.tol,
        metadata=meta,
    )


def mountain_pass_check(sol: Solution, params: ModelParams) -> float:
    """Max of the fibering ray I(t u) over t in [0, 2], 101 samples.

    By homogeneity I(t u) = t^2 Q/2 - t^{2p} D/(2p), so the whole ray
    follows from one energy evaluation; the max must sit at t = 1 for a
    Nehari-projected solution.
    """
    bre = energy_of(sol.u, params)
    Q2, D = 2.0 * bre.quad, bre.nonlocal_
    ts = np.linspace(0.0, 2.0, 101)
    vals = ts**2 * (Q2 / 2.0) - ts ** (2.0 * params.p) * (D / (2.0 * params.p))
    return float(vals.max())
