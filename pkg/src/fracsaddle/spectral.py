"""Periodic pseudospectral discretization: grids, fields, the fractional
Laplacian as a Fourier multiplier, and the Riesz-kernel convolution.

The whole-space problem is truncated to the box [-L/2, L/2)^N with M nodes
per axis, x_j = -L/2 + j L/M.  Frequencies are the angular wavenumbers
xi = 2 pi m / L, m in {-M/2, ..., M/2 - 1}, so the multiplier of
(-Delta)^s is |xi|^{2s} verbatim.  Discrete integrals carry the quadrature
weight (L/M)^N and Parseval holds with that weight.

The Riesz convolution K_alpha * f is computed as a linear (non-circular)
convolution: f is zero-padded onto a doubled grid covering [-L, L)^N and
multiplied against the sampled kernel in frequency space.  Using the
periodic multiplier |xi|^{-alpha} instead would let the slowly decaying
kernel's images pollute the small-frequency behavior; zero-padding removes
wrap-around exactly.  One caveat follows from the same choice: the lattice
symmetry action identifies the -L/2 box faces periodically while the linear
convolution does not, so equivariance statements for the convolution hold
on fields that vanish at those faces (every decaying solution does).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.integrate import nquad

_WORKERS = 1


def set_threads(n: int) -> None:
    """Set the worker count used by all transforms (1 = deterministic)."""
    global _WORKERS
    _WORKERS = max(1, int(n))


def get_threads() -> int:
    return _WORKERS


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on [-L/2, L/2)^N_dims with M nodes per axis."""

    N_dims: int
    M: int
    L: float

    def __post_init__(self):
        if self.M < 8 or self.M % 2:
            raise ValueError(f"M must be even and >= 8; got {self.M}")
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.N_dims < 1:
            raise ValueError("N_dims must be >= 1")

    @property
    def h(self) -> float:
        return self.L / self.M

    @property
    def shape(self):
        return (self.M,) * self.N_dims

    @property
    def n_nodes(self) -> int:
        return self.M**self.N_dims

    @property
    def cellvol(self) -> float:
        return self.h**self.N_dims

    def axis_nodes(self) -> np.ndarray:
        return -self.L / 2 + self.h * np.arange(self.M)

    def axis_freqs(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.M, d=self.h)

    def coords(self):
        """Sparse broadcastable coordinate arrays, one per axis."""
        x = self.axis_nodes()
        return np.meshgrid(*([x] * self.N_dims), indexing="ij", sparse=True)

    def radius(self) -> np.ndarray:
        """|x| at every node (dense array)."""
        return np.sqrt(sum(c**2 for c in self.coords()))

    def freq_norm_sq(self) -> np.ndarray:
        xi = self.axis_freqs()
        grids = np.meshgrid(*([xi] * self.N_dims), indexing="ij", sparse=True)
        return sum(g**2 for g in grids)

    def doubled(self) -> "Grid":
        return Grid(self.N_dims, 2 * self.M, 2 * self.L)


@dataclass
class Field:
    """Real-valued samples of a function on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def fftn(a: np.ndarray) -> np.ndarray:
    return sfft.fftn(a, workers=_WORKERS)


def ifftn(a: np.ndarray) -> np.ndarray:
    return sfft.ifftn(a, workers=_WORKERS)


def multiplier(grid: Grid, s: float) -> np.ndarray:
    """The symbol |xi|^{2s} on the discrete frequency lattice (zero at xi=0)."""
    return grid.freq_norm_sq() ** s


def fractional_laplacian(u: Field, s: float) -> Field:
    """Apply (-Delta)^s spectrally; s = 1 is allowed for classical cross-checks."""
    if not 0.0 < s <= 1.0:
        raise ValueError(f"s must lie in (0, 1]; got {s}")
    out = ifftn(multiplier(u.grid, s) * fftn(u.values)).real
    return Field(u.grid, out)


def _parseval_sum(u: Field, symbol: np.ndarray) -> float:
    uhat = fftn(u.values)
    w = u.grid.cellvol / u.grid.n_nodes
    return float(w * np.sum(symbol * (uhat.real**2 + uhat.imag**2)))


def hs_norm_sq(u: Field, s: float) -> float:
    """||u||^2_{L^2} + ||(-Delta)^{s/2} u||^2_{L^2} by Parseval."""
    if not 0.0 < s <= 1.0:
        raise ValueError(f"s must lie in (0, 1]; got {s}")
    return _parseval_sum(u, 1.0 + multiplier(u.grid, s))


def seminorm_sq(u: Field, s: float) -> float:
    """||(-Delta)^{s/2} u||^2_{L^2} by Parseval."""
    if not 0.0 < s <= 1.0:
        raise ValueError(f"s must lie in (0, 1]; got {s}")
    return _parseval_sum(u, multiplier(u.grid, s))


def l2_norm_sq(u: Field) -> float:
    return float(u.grid.cellvol * np.sum(u.values**2))


# ---------------------------------------------------------------------------
# Riesz kernel and convolution
# ---------------------------------------------------------------------------

_unit_cell_cache: dict = {}
_kernel_cache: dict = {}


def _unit_cell_mean(N: int, alpha: float) -> float:
    """Mean of |y|^{alpha - N} over the unit cell [-1/2, 1/2]^N.

    Computed on the positive orthant with the substitution y_i = t_i^m,
    which flattens the corner singularity enough for adaptive quadrature
    to reach relative error 1e-8.
    """
    key = (N, round(alpha, 12))
    if key in _unit_cell_cache:
        return _unit_cell_cache[key]
    m = max(2, math.ceil(N / alpha))
    upper = 0.5 ** (1.0 / m)
    power = alpha - N

    def integrand(*t):
        ts = np.asarray(t)
        y = ts**m
        r = math.sqrt(float((y * y).sum()))
        jac = float(np.prod(m * ts ** (m - 1)))
        return r**power * jac

    val, _err = nquad(
        integrand,
        [(0.0, upper)] * N,
        opts={"epsabs": 1e-13, "epsrel": 1e-10, "limit": 200},
    )
    result = (2.0**N) * val
    _unit_cell_cache[key] = result
    return result


def origin_cell_average(N: int, alpha: float, h: float) -> float:
    """Average of |x|^{alpha - N} over the cell [-h/2, h/2]^N."""
    return h ** (alpha - N) * _unit_cell_mean(N, alpha)


def build_riesz_kernel(grid: Grid, alpha: float) -> Field:
    """Sample A_alpha |x|^{alpha - N} on the doubled grid covering [-L, L)^N.

    The singular origin cell is replaced by the analytic average of the
    kernel over that cell, so the convolution quadrature stays second order.
    """
    from .params import riesz_constant

    N = grid.N_dims
    if not 0.0 < alpha < N:
        raise ValueError(f"alpha must lie in (0, N)={N}; got {alpha}")
    big = grid.doubled()
    c = big.axis_nodes()  # covers [-L, L)
    mesh = np.meshgrid(*([c] * N), indexing="ij", sparse=True)
    r2 = sum(g**2 for g in mesh)
    A = riesz_constant(N, alpha)
    with np.errstate(divide="ignore"):
        vals = A * r2 ** ((alpha - N) / 2.0)
    origin = tuple([grid.M] * N)  # node at x = 0 in the doubled grid
    vals[origin] = A * origin_cell_average(N, alpha, grid.h)
    return Field(big, vals)


def _kernel_transform(grid: Grid, alpha: float):
    """Cached (kernel field, rfftn of the wrap-ordered kernel) pair."""
    key = (grid, round(alpha, 12))
    if key not in _kernel_cache:
        kf = build_riesz_kernel(grid, alpha)
        wrap = sfft.ifftshift(kf.values)
        _kernel_cache[key] = (kf, sfft.rfftn(wrap, workers=_WORKERS))
    return _kernel_cache[key]


def riesz_convolve(f: Field, alpha: float, kernel: Field | None = None) -> Field:
    """Linear convolution K_alpha * f on the original grid.

    Zero-pads f onto the doubled grid, multiplies transforms, crops back and
    scales by the cell volume.  If `kernel` is given it must be the doubled
    grid sample from build_riesz_kernel for this grid.
    """
    grid = f.grid
    if kernel is None:
        _, khat = _kernel_transform(grid, alpha)
    else:
        if kernel.grid.shape != grid.doubled().shape:
            raise ValueError(
                f"kernel shape {kernel.grid.shape} does not match doubled grid "
                f"{grid.doubled().shape}"
            )
        khat = sfft.rfftn(sfft.ifftshift(kernel.values), workers=_WORKERS)
    big_shape = grid.doubled().shape
    pad = np.zeros(big_shape)
    pad[tuple(slice(0, grid.M) for _ in range(grid.N_dims))] = f.values
    conv = sfft.irfftn(
        sfft.rfftn(pad, workers=_WORKERS) * khat, s=big_shape, workers=_WORKERS
    )
    out = conv[tuple(slice(0, grid.M) for _ in range(grid.N_dims))]
    return Field(grid, grid.cellvol * out)


# ---------------------------------------------------------------------------
# Gagliardo double sum (small-grid oracle)
# ---------------------------------------------------------------------------

_tail_cache: dict = {}


def _box_complement_integral(N: int, s: float) -> float:
    """Integral of |w|^{-N-2s} over R^N minus the unit box [-1/2, 1/2]^N.

    One explicit shell of Gauss-Legendre box integrals plus the exact
    self-similar closure: the same integral outside the box of half-width
    B equals (2B)^{-2s} times this one, so the region beyond the shell
    folds back algebraically.
    """
    key = (N, round(s, 12))
    if key in _tail_cache:
        return _tail_cache[key]
    P, q = 2, 16
    t, wts = np.polynomial.legendre.leggauss(q)
    t = 0.5 * t  # nodes on [-1/2, 1/2]
    wts = 0.5 * wts
    total = 0.0
    for k in np.ndindex(*(2 * P + 1,) * N):
        k = np.array(k) - P
        if not k.any():
            continue
        axes = np.meshgrid(*[(t + ki) for ki in k], indexing="ij", sparse=True)
        wprod = np.ones((q,) * N)
        for ax in range(N):
            shape = [1] * N
            shape[ax] = q
            wprod = wprod * wts.reshape(shape)
        r2 = sum(a**2 for a in axes)
        total += float(np.sum(wprod * r2 ** (-(N + 2.0 * s) / 2.0)))
    result = total / (1.0 - (2.0 * P + 1.0) ** (-2.0 * s))
    _tail_cache[key] = result
    return result


def _seminorm_normalization(N: int, s: float) -> float:
    """Constant C(N, s)/2 relating the raw Gagliardo double integral to
    ||(-Delta)^{s/2} u||^2; with the convention used here the two quantities
    agree (up to discretization), so the normalized seminorm needs no extra
    factor anywhere else."""
    C = (
        s
        * 4.0**s
        * math.gamma((N + 2.0 * s) / 2.0)
        / (math.pi ** (N / 2.0) * math.gamma(1.0 - s))
    )
    return C / 2.0


def gagliardo_norm_sq(u: Field, s: float) -> float:
    """Normalized Gagliardo seminorm squared by direct double sum.

    Sums |u(x) - u(y)|^2 / |x - y|^{N + 2s} over ordered node pairs with the
    minimum-image distance convention and weight cellvol^2, restores the
    kernel mass beyond the minimum-image cell with a mean-field tail term
    (exact for constants, decorrelation closure otherwise), and applies the
    seminorm normalization so the result measures the same quantity as
    seminorm_sq.  Cost is O(M^{2N}); grids with more than 4096 nodes are
    refused.  Serves as an FFT-free oracle up to discretization error,
    which grows like h^{2-2s} as s -> 1.
    """
    grid = u.grid
    if grid.n_nodes > 4096:
        raise ValueError(f"direct double sum refused for {grid.n_nodes} > 4096 nodes")
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1); got {s}")
    N, L = grid.N_dims, grid.L
    x = grid.axis_nodes()
    mesh = np.meshgrid(*([x] * N), indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    f = u.values.ravel()
    n = coords.shape[0]
    expo = (N + 2.0 * s) / 2.0
    total = 0.0
    chunk = max(1, (1 << 22) // max(1, n))
    for i0 in range(0, n, chunk):
        d = coords[i0 : i0 + chunk, None, :] - coords[None, :, :]
        d = np.mod(d + L / 2.0, L) - L / 2.0
        r2 = np.einsum("ijk,ijk->ij", d, d)
        df2 = (f[i0 : i0 + chunk, None] - f[None, :]) ** 2
        mask = r2 > 0
        total += float((df2[mask] / r2[mask] ** expo).sum())
    pair_sum = grid.cellvol**2 * total
    # ||u||^2 - (mean u)^2 L^N written as a variance so constants give 0
    var = grid.cellvol * float(np.sum((f - f.mean()) ** 2))
    tail = 2.0 * _box_complement_integral(N, s) * L ** (-2.0 * s) * var
    return _seminorm_normalization(N, s) * (pair_sum + tail)
