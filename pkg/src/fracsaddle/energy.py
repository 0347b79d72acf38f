"""Action functional, L^2 gradient, and Nehari-ray algebra."""

from dataclasses import dataclass

import numpy as np

from .params import ModelParams
from .spectral import Field, fractional_laplacian, hs_norm_sq, riesz_convolve


@dataclass(frozen=True)
class EnergyBreakdown:
    """Quadratic part, nonlocal interaction D(u), and their combination.

    `nonlocal_` carries the trailing underscore only because the bare word
    is a Python keyword.
    """

    quad: float
    nonlocal_: float
    total: float


def interaction(u: Field, params: ModelParams) -> float:
    """D(u) = integral of (K_alpha * |u|^p) |u|^p."""
    up = np.abs(u.values) ** params.p
    conv = riesz_convolve(Field(u.grid, up), params.alpha)
    return float(u.grid.cellvol * np.sum(conv.values * up))


def energy(u: Field, params: ModelParams) -> EnergyBreakdown:
    """I(u) = (1/2)||u||_{H^s}^2 - (1/2p) D(u)."""
    quad = 0.5 * hs_norm_sq(u, params.s)
    nl = interaction(u, params)
    return EnergyBreakdown(quad, nl, quad - nl / (2.0 * params.p))


def gradient(u: Field, params: ModelParams) -> Field:
    """L^2 gradient (-Delta)^s u + u - (K_alpha * |u|^p)|u|^{p-2} u."""
    p = params.p
    up = np.abs(u.values) ** p
    conv = riesz_convolve(Field(u.grid, up), params.alpha)
    if p == 2.0:
        force = conv.values * u.values
    else:
        force = conv.values * np.sign(u.values) * np.abs(u.values) ** (p - 1.0)
    lap = fractional_laplacian(u, params.s)
    return Field(u.grid, lap.values + u.values - force)


def nehari_scale(u: Field, params: ModelParams) -> float:
    """The t > 0 with <I'(tu), tu> = 0, i.e. (||u||^2 / D(u))^{1/(2p-2)}."""
    Q = hs_norm_sq(u, params.s)
    D = interaction(u, params)
    if D <= 0.0:
        raise ValueError("nehari_scale needs interaction(u) > 0")
    return (Q / D) ** (1.0 / (2.0 * params.p - 2.0))


def nehari_energy(u: Field, params: ModelParams) -> float:
    """Energy at the Nehari crossing of the ray through u, in closed form:
    (1/2 - 1/2p) ||u||^{2p/(p-1)} / D(u)^{1/(p-1)}."""
    Q = hs_norm_sq(u, params.s)
    D = interaction(u, params)
    if D <= 0.0:
        raise ValueError("nehari_energy needs interaction(u) > 0")
    p = params.p
    return (0.5 - 0.5 / p) * Q ** (p / (p - 1.0)) / D ** (1.0 / (p - 1.0))
