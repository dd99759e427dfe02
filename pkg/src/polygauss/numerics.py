"""Dense small-matrix numerical substrate.

Everything here operates on plain ``numpy`` arrays and is sized for the
small (at most a few dozen rows) matrices that arise in kernel exponents,
phase-space forms and trace-moment chains.  All functions are pure.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = [
    "BracketError",
    "IndefiniteMatrixError",
    "NotSymmetricError",
    "as_real_symmetric",
    "as_complex_symmetric",
    "bracket_root",
    "complex_sqrt_det",
    "min_eigenvalue",
    "psd_sqrt",
    "sym_eig",
]

# Relative asymmetry accepted before an input matrix is rejected instead of
# being symmetrized away.
SYMMETRY_RTOL = 1e-12


class NotSymmetricError(ValueError):
    """Input matrix is asymmetric beyond the accepted tolerance."""


class IndefiniteMatrixError(ValueError):
    """Matrix fails a required (semi)definiteness precondition."""


class BracketError(ValueError):
    """Root bracket is invalid: no sign change on the interval."""


def _check_square(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        raise ValueError("empty matrix")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_real_symmetric(m: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate and return ``(m + m.T)/2`` as a float array.

    Small asymmetry (relative to ``norm(m)``) is averaged away; anything
    larger raises :class:`NotSymmetricError`.
    """
    m = _check_square(m)
    if np.iscomplexobj(m):
        if np.max(np.abs(m.imag)) > rtol * max(1.0, np.linalg.norm(m)):
            raise NotSymmetricError("expected a real matrix")
        m = m.real
    m = m.astype(float, copy=False)
    scale = max(1.0, np.linalg.norm(m))
    if np.max(np.abs(m - m.T)) > rtol * scale:
        raise NotSymmetricError("matrix asymmetry exceeds tolerance")
    return 0.5 * (m + m.T)


def as_complex_symmetric(m: np.ndarray, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate and return the complex-symmetric (not Hermitian) average."""
    m = _check_square(m).astype(complex, copy=False)
    scale = max(1.0, np.linalg.norm(m))
    if np.max(np.abs(m - m.T)) > rtol * scale:
        raise NotSymmetricError("matrix asymmetry exceeds tolerance")
    return 0.5 * (m + m.T)


def sym_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a real symmetric matrix.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvector columns ``v``, so ``m == v @ diag(w) @ v.T`` up to roundoff.
    """
    m = as_real_symmetric(m)
    return np.linalg.eigh(m)


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of a real symmetric matrix."""
    w, _ = sym_eig(m)
    return float(w[0])


def psd_sqrt(m: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Symmetric PSD square root of a positive semidefinite matrix.

    Eigenvalues below ``-rtol * norm(m)`` raise
    :class:`IndefiniteMatrixError`; tiny negative ones are clamped to zero.
    """
    m = as_real_symmetric(m)
    w, v = np.linalg.eigh(m)
    scale = max(1.0, np.linalg.norm(m))
    if w[0] < -rtol * scale:
        raise IndefiniteMatrixError(
            f"matrix is indefinite: min eigenvalue {w[0]:.3e} < -{rtol:.0e} * scale"
        )
    root = v @ np.diag(np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return 0.5 * (root + root.T)


def complex_sqrt_det(m: np.ndarray) -> complex:
    """Branch-safe square root of the determinant of a complex symmetric matrix.

    Requires the real part of ``m`` to be positive definite, which confines
    the eigenvalues to the open right half-plane.  The result is the product
    of the principal (positive-real-part) square roots of the individual
    eigenvalues; unlike a single principal square root of ``det(m)`` it
    varies continuously with ``m`` on this domain.
    """
    m = as_complex_symmetric(m)
    re_min = np.linalg.eigvalsh(0.5 * (m.real + m.real.T))[0]
    if re_min <= 0.0:
        raise IndefiniteMatrixError(
            f"real part is not positive definite (min eigenvalue {re_min:.3e})"
        )
    eigs = np.linalg.eigvals(m)
    roots = np.sqrt(eigs.astype(complex))
    # Principal sqrt maps the right half-plane into itself; flip any root
    # that roundoff pushed across the imaginary axis.
    roots = np.where(roots.real < 0.0, -roots, roots)
    return complex(np.prod(roots))


def bracket_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-8,
) -> float:
    """Bisection root of ``f`` on ``[lo, hi]``; ``f(lo)`` and ``f(hi)`` must differ in sign.

    Deterministic and derivative-free, so it tolerates noisy evaluations of
    ``f``.  Returns the bracket midpoint once the bracket width is below
    ``tol``.
    """
    if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
        raise ValueError(f"invalid bracket [{lo}, {hi}]")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(f"no sign change: f({lo})={flo:.3e}, f({hi})={fhi:.3e}")
    max_iter = int(np.ceil(np.log2(max((hi - lo) / tol, 1.0)))) + 4
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return float(mid)
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
        if hi - lo <= tol:
            break
    return float(0.5 * (lo + hi))
