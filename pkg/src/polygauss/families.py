"""Concrete kernel families used as fixtures and CLI generators."""

from __future__ import annotations

import math

import numpy as np

from .gaussian import GaussianTriple
from .kernels import PolyGaussianKernel
from .poly import MultiPoly
from .spectral import GammaFamily

__all__ = [
    "caldeira_kernel",
    "hermite_coefficients",
    "kappa_gamma_family",
    "kappa_gamma_kernel",
    "kappa_gamma_norm",
]


def kappa_gamma_family() -> GammaFamily:
    """The 1-D quadratic family ``(gamma (x+y)^2 - (x-y)^2 + 1) kappa_G``.

    The base Gaussian weight has ``(A, B, C) = (3/2, 0, 1)``; shifting both
    blocks by delta walks its equivalence class.  Members are trace-
    normalized on construction.
    """
    # Variables (x, y, gamma); gamma multiplies (x + y)^2.
    poly_gamma = MultiPoly(
        3,
        {
            (2, 0, 1): 1.0,
            (1, 1, 1): 2.0,
            (0, 2, 1): 1.0,
            (2, 0, 0): -1.0,
            (1, 1, 0): 2.0,
            (0, 2, 0): -1.0,
            (0, 0, 0): 1.0,
        },
    )
    return GammaFamily(poly_gamma, GaussianTriple.from_scalars(1.5, 1.0))


def kappa_gamma_norm(gamma: float, delta: float = 0.0) -> float:
    """Closed-form trace-one normalization of the family member."""
    return 4.0 * (1.0 + delta) ** 1.5 / (math.sqrt(math.pi) * (2.0 + 2.0 * delta + gamma))


def kappa_gamma_kernel(gamma: float, delta: float = 0.0) -> PolyGaussianKernel:
    """Family member at (gamma, delta) with its closed-form normalization."""
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    if delta <= -1.0:
        raise ValueError("delta must exceed -1")
    family = kappa_gamma_family()
    return PolyGaussianKernel(
        family.poly_at(gamma), family.triple(delta), kappa_gamma_norm(gamma, delta)
    )


def hermite_coefficients(level: int) -> np.ndarray:
    """Monomial coefficients of the (physicists') Hermite polynomial."""
    if level < 0:
        raise ValueError("level must be nonnegative")
    basis = np.zeros(level + 1)
    basis[level] = 1.0
    return np.polynomial.hermite.herm2poly(basis)


def caldeira_kernel(level: int, beta: float) -> PolyGaussianKernel:
    """Harmonic-oscillator eigenstate kernel ``psi_level(x) psi_level(y)``.

    In difference/sum coordinates the polynomial factor is the product of
    Hermite polynomials at the two arguments and the Gaussian exponent is
    ``-(beta^2/4)((x-y)^2 + (x+y)^2)``; the normalization makes the trace
    exactly one.  Supported levels: 0, 1, 2.
    """
    if level not in (0, 1, 2):
        raise ValueError("supported oscillator levels are 0, 1, 2")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    h = hermite_coefficients(level)
    terms: dict[tuple[int, ...], complex] = {}
    for i, hi in enumerate(h):
        if hi == 0.0:
            continue
        for j, hj in enumerate(h):
            if hj == 0.0:
                continue
            terms[(i, j)] = terms.get((i, j), 0j) + hi * hj * beta ** (i + j)
    poly = MultiPoly(2, terms)
    norm = math.sqrt(beta**2 / math.pi) / (2.0**level * math.factorial(level))
    quarter = beta**2 / 4.0
    return PolyGaussianKernel(poly, GaussianTriple.from_scalars(quarter, quarter), norm)
