"""Closed-form integration of polynomial-times-Gaussian integrands.

The central object is a :class:`GaussianForm`,

    scale * P(z) * exp(-z^T Q z + l^T z + c),    z in R^m,

with complex symmetric ``Q`` whose real part is positive definite on the
variables being integrated.  Integrating out a subset of variables is exact:
complete the square, shift the polynomial, and evaluate the centered moments
by Isserlis pairing with covariance ``Q_int^{-1} / 2``.  External variables
(including ones appearing only in the polynomial) pass through, so the same
code path powers traces, trace-power moments, partial traces and phase-space
transforms.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import numerics
from .gaussian import triple_from_exponent_matrix
from .kernels import PolyGaussianKernel
from .poly import MultiPoly

__all__ = [
    "DegreeCapError",
    "GaussianForm",
    "WickTable",
    "WignerForm",
    "gaussian_integral",
    "integrate_out",
    "kernel_form",
    "poly_gaussian_integral",
    "wigner_inverse",
    "wigner_transform",
]

DEFAULT_DEGREE_CAP = 16
REAL_RTOL = 1e-9  # tolerated relative imaginary residue on must-be-real results

logger = logging.getLogger(__name__)


class DegreeCapError(ValueError):
    """Prefactor degree exceeds the configured pairing cap."""


class WickTable:
    """Memoized centered Gaussian moments for a fixed (complex) covariance."""

    def __init__(self, cov: np.ndarray) -> None:
        cov = np.asarray(cov, dtype=complex)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise ValueError("covariance must be square")
        self.cov = cov
        self._memo: dict[tuple[int, ...], complex] = {(0,) * cov.shape[0]: 1.0 + 0j}

    def moment(self, alpha: Sequence[int]) -> complex:
        """E[w^alpha] for centered Gaussian w with the stored covariance."""
        alpha = tuple(int(e) for e in alpha)
        if sum(alpha) % 2:
            return 0j
        return self._moment(alpha)

    def _moment(self, alpha: tuple[int, ...]) -> complex:
        cached = self._memo.get(alpha)
        if cached is not None:
            return cached
        i = next(k for k, e in enumerate(alpha) if e > 0)
        beta = list(alpha)
        beta[i] -= 1
        total = 0j
        row = self.cov[i]
        for j, bj in enumerate(beta):
            if bj > 0 and row[j] != 0:
                gamma = list(beta)
                gamma[j] -= 1
                total += row[j] * bj * self._moment(tuple(gamma))
        self._memo[alpha] = total
        return total


@dataclass(frozen=True)
class GaussianForm:
    """``scale * poly(z) * exp(-z^T quad z + lin^T z + const)`` over R^nvars."""

    poly: MultiPoly
    quad: np.ndarray
    lin: np.ndarray
    const: complex = 0j
    scale: complex = 1.0 + 0j

    def __post_init__(self) -> None:
        quad = np.asarray(self.quad, dtype=complex)
        quad = numerics.as_complex_symmetric(quad) if quad.size else quad.reshape(0, 0)
        lin = np.asarray(self.lin, dtype=complex).reshape(-1)
        if quad.shape != (self.poly.nvars, self.poly.nvars) or lin.shape != (self.poly.nvars,):
            raise ValueError("quad/lin shapes do not match the polynomial variable count")
        object.__setattr__(self, "quad", quad)
        object.__setattr__(self, "lin", lin)
        object.__setattr__(self, "const", complex(self.const))
        object.__setattr__(self, "scale", complex(self.scale))

    @property
    def nvars(self) -> int:
        return self.poly.nvars

    def evaluate(self, z: Sequence[float]) -> complex:
        z = np.asarray(z, dtype=complex).reshape(-1)
        expo = -(z @ self.quad @ z) + self.lin @ z + self.const
        return complex(self.scale * self.poly(z) * np.exp(expo))

    def as_scalar(self) -> complex:
        """Collapse a zero-variable form to a number."""
        if self.nvars != 0:
            raise ValueError("form still has free variables")
        return complex(self.scale * np.exp(self.const) * self.poly(np.empty(0)))

    def real_scalar(self, rtol: float = REAL_RTOL) -> float:
        value = self.as_scalar()
        if abs(value.imag) > rtol * max(abs(value), 1e-300):
            raise numerics.IndefiniteMatrixError(
                f"expected a real value, got imaginary residue {value.imag:.3e}"
            )
        if value.imag:
            logger.debug("dropping imaginary residue: raw value %r", value)
        return value.real

    def integrate(
        self,
        internal: Sequence[int],
        degree_cap: int = DEFAULT_DEGREE_CAP,
    ) -> "GaussianForm":
        """Integrate the listed variables over R; the rest become the new ring.

        Requires the real part of the internal quadratic block to be positive
        definite.  The returned form lives on the remaining variables in
        their original order.
        """
        internal = sorted(set(int(i) for i in internal))
        if any(i < 0 or i >= self.nvars for i in internal):
            raise ValueError("internal index out of range")
        if not internal:
            return self
        external = [i for i in range(self.nvars) if i not in set(internal)]
        m = len(internal)
        q_int = self.quad[np.ix_(internal, internal)]
        re_min = np.linalg.eigvalsh(0.5 * (q_int.real + q_int.real.T))[0]
        if re_min <= 0.0:
            raise numerics.IndefiniteMatrixError(
                f"integration block has non-positive-definite real part (min {re_min:.3e})"
            )
        deg = self.poly.degree() or 0
        if deg > degree_cap:
            raise DegreeCapError(f"prefactor degree {deg} exceeds cap {degree_cap}")

        q_inv = np.linalg.inv(q_int)
        cross = self.quad[np.ix_(internal, external)]  # (m, q)
        l_int = self.lin[internal]
        l_ext = self.lin[external]

        quad_new = self.quad[np.ix_(external, external)] - cross.T @ q_inv @ cross
        lin_new = l_ext - cross.T @ q_inv @ l_int
        const_new = self.const + 0.25 * l_int @ q_inv @ l_int
        scale_new = self.scale * np.pi ** (m / 2.0) / numerics.complex_sqrt_det(q_int)

        # Completed-square mean of the internal block, affine in the externals:
        # mu(e) = q_inv @ (l_int / 2 - cross @ e).
        mu_const = 0.5 * q_inv @ l_int
        mu_lin = -q_inv @ cross  # (m, q)
        cov = 0.5 * q_inv
        table = WickTable(cov)

        nvars_new = len(external)
        ext_of = {v: k for k, v in enumerate(external)}
        mu_polys: dict[int, MultiPoly] = {}
        mu_pows: dict[tuple[int, int], MultiPoly] = {}

        def mu_power(slot: int, e: int) -> MultiPoly:
            key = (slot, e)
            got = mu_pows.get(key)
            if got is None:
                base = mu_polys.get(slot)
                if base is None:
                    t: dict[tuple[int, ...], complex] = {}
                    if mu_const[slot] != 0:
                        t[(0,) * nvars_new] = mu_const[slot]
                    for j in range(nvars_new):
                        if mu_lin[slot, j] != 0:
                            exps = [0] * nvars_new
                            exps[j] = 1
                            t[tuple(exps)] = mu_lin[slot, j]
                    base = MultiPoly(nvars_new, t)
                    mu_polys[slot] = base
                got = base**e
                mu_pows[key] = got
            return got

        shift_needed = bool(np.any(mu_const != 0) or np.any(mu_lin != 0))
        result: dict[tuple[int, ...], complex] = {}

        def accumulate(exps_ext: tuple[int, ...], value: complex) -> None:
            if value != 0:
                result[exps_ext] = result.get(exps_ext, 0j) + value

        for exps, coeff in self.poly.terms.items():
            a_int = tuple(exps[i] for i in internal)
            e_ext = [0] * nvars_new
            for v in external:
                e_ext[ext_of[v]] = exps[v]
            e_ext = tuple(e_ext)
            if not shift_needed:
                accumulate(e_ext, coeff * table.moment(a_int))
                continue
            # z^a = prod_i (mu_i + w_i)^{a_i}; expand binomially per slot.
            slots = [i for i, e in enumerate(a_int) if e > 0]
            ranges = [range(a_int[i] + 1) for i in slots]
            for beta_sel in itertools.product(*ranges) if slots else [()]:
                beta = [0] * m
                mult = coeff
                mu_factor = MultiPoly.constant(nvars_new, 1.0)
                for slot, b in zip(slots, beta_sel):
                    a = a_int[slot]
                    beta[slot] = b
                    mult *= math.comb(a, b)
                    if a - b:
                        mu_factor = mu_factor * mu_power(slot, a - b)
                wick = table.moment(tuple(beta))
                if wick == 0:
                    continue
                for mexp, mco in (mu_factor * (mult * wick)).terms.items():
                    key = tuple(a + b for a, b in zip(mexp, e_ext))
                    accumulate(key, mco)

        poly_new = MultiPoly(nvars_new, result)
        return GaussianForm(poly_new, quad_new, lin_new, const_new, scale_new)


# -------------------------------------------------------------- conveniences


def gaussian_integral(quad: np.ndarray, lin: Optional[np.ndarray] = None) -> complex:
    """Exact ``integral exp(-z^T quad z + lin^T z) dz`` over all variables."""
    quad = numerics.as_complex_symmetric(np.asarray(quad, dtype=complex))
    m = quad.shape[0]
    if lin is None:
        lin = np.zeros(m, dtype=complex)
    form = GaussianForm(MultiPoly.constant(m, 1.0), quad, np.asarray(lin, dtype=complex))
    return form.integrate(range(m)).as_scalar()


def poly_gaussian_integral(
    prefactor: MultiPoly,
    quad: np.ndarray,
    lin: Optional[np.ndarray] = None,
    degree_cap: int = DEFAULT_DEGREE_CAP,
) -> complex:
    """Exact ``integral prefactor(z) exp(-z^T quad z + lin^T z) dz``."""
    quad = numerics.as_complex_symmetric(np.asarray(quad, dtype=complex))
    m = quad.shape[0]
    if prefactor.nvars != m:
        raise ValueError("prefactor variable count must match the quadratic form")
    if lin is None:
        lin = np.zeros(m, dtype=complex)
    form = GaussianForm(prefactor, quad, np.asarray(lin, dtype=complex))
    return form.integrate(range(m), degree_cap=degree_cap).as_scalar()


def kernel_form(kernel: PolyGaussianKernel) -> GaussianForm:
    """The kernel as a form over its 2n variables (x block, then y block)."""
    return GaussianForm(
        kernel.poly,
        kernel.exponent_matrix(),
        np.zeros(2 * kernel.n, dtype=complex),
        0j,
        kernel.norm,
    )


def _form_to_kernel(form: GaussianForm, rtol: float = REAL_RTOL) -> PolyGaussianKernel:
    """Repackage a self-adjoint form over (x, y) blocks as a kernel."""
    if float(np.max(np.abs(form.lin))) > rtol:
        raise ValueError("kernel forms carry no linear exponent terms")
    triple = triple_from_exponent_matrix(form.quad, rtol=rtol)
    scalar = form.scale * np.exp(form.const)
    poly = form.poly
    if abs(scalar.imag) <= rtol * abs(scalar) and scalar.real > 0:
        norm = scalar.real
    else:
        poly = poly * scalar
        norm = 1.0
    # Engine roundoff can leave a tiny non-self-adjoint residue; project it out.
    sym = poly.hermitized()
    if not poly.is_self_adjoint(tol=1e-7):
        raise numerics.IndefiniteMatrixError("integrated kernel lost self-adjointness")
    return PolyGaussianKernel(sym, triple, norm)


def integrate_out(
    kernel: PolyGaussianKernel,
    coords: Sequence[int],
    diagonal: bool = True,
    degree_cap: int = DEFAULT_DEGREE_CAP,
) -> PolyGaussianKernel:
    """Integrate a coordinate block out of a kernel.

    With ``diagonal=True`` this is the partial trace: substitute
    ``y_i = x_i`` on ``coords`` and integrate those coordinates, which
    preserves both the trace and operator positivity.  With
    ``diagonal=False`` the x and y coordinates on ``coords`` are integrated
    independently (plain marginalization).
    """
    n = kernel.n
    coords = sorted(set(int(i) for i in coords))
    if not coords or len(coords) >= n:
        raise ValueError("coords must be a nonempty proper subset of the coordinates")
    if any(i < 0 or i >= n for i in coords):
        raise ValueError("coordinate index out of range")
    keep = [i for i in range(n) if i not in set(coords)]
    q = len(keep)
    dead = len(coords)

    if diagonal:
        # New ring: [u (collapsed pairs), x_keep, y_keep].
        nvars_new = dead + 2 * q
        var_map = [0] * 2 * n
        for k, i in enumerate(coords):
            var_map[i] = k
            var_map[n + i] = k
        for k, i in enumerate(keep):
            var_map[i] = dead + k
            var_map[n + i] = dead + q + k
        internal = list(range(dead))
    else:
        # New ring: [u_x, u_y, x_keep, y_keep].
        nvars_new = 2 * dead + 2 * q
        var_map = [0] * 2 * n
        for k, i in enumerate(coords):
            var_map[i] = k
            var_map[n + i] = dead + k
        for k, i in enumerate(keep):
            var_map[i] = 2 * dead + k
            var_map[n + i] = 2 * dead + q + k
        internal = list(range(2 * dead))

    t = np.zeros((2 * n, nvars_new))
    for old, new in enumerate(var_map):
        t[old, new] = 1.0
    quad_new = t.T @ kernel.exponent_matrix() @ t
    poly_new = kernel.poly.rename_vars(nvars_new, var_map)
    form = GaussianForm(
        poly_new, quad_new, np.zeros(nvars_new, dtype=complex), 0j, kernel.norm
    )
    reduced = form.integrate(internal, degree_cap=degree_cap)
    return _form_to_kernel(reduced)


@dataclass(frozen=True)
class WignerForm:
    """Phase-space image ``scale * poly(x, p) * exp(-(x, p)^T quad (x, p))``."""

    n: int
    poly: MultiPoly  # over (x_1..x_n, p_1..p_n)
    quad: np.ndarray  # real SPD 2n x 2n
    scale: complex

    def evaluate(self, x, p) -> complex:
        v = np.concatenate([np.atleast_1d(x), np.atleast_1d(p)]).astype(float)
        return complex(self.scale * self.poly(v) * np.exp(-(v @ self.quad @ v)))


def wigner_transform(
    kernel: PolyGaussianKernel, degree_cap: int = DEFAULT_DEGREE_CAP
) -> WignerForm:
    """Phase-space transform of a kernel.

    Integrates ``(2 pi)^{-n} exp(-i p^T y) kernel(x + y/2, x - y/2)`` over y
    in closed form.  The Gaussian part of the output matches
    :func:`polygauss.gaussian.phase_space_form` and the polynomial part has
    degree at most the kernel polynomial's.
    """
    n = kernel.n
    # Ring layout: [y (internal), x, p].
    nv = 3 * n
    sel = np.zeros((2 * n, nv), dtype=complex)
    for i in range(n):
        sel[i, i] = 0.5  # x_old_i = x_i + y_i / 2
        sel[i, n + i] = 1.0
        sel[n + i, i] = -0.5  # y_old_i = x_i - y_i / 2
        sel[n + i, n + i] = 1.0
    quad = sel.T @ kernel.exponent_matrix() @ sel
    # exp(-i p^T y) contributes the bilinear exponent term -(y^T (i I) p).
    for i in range(n):
        quad[i, 2 * n + i] += 0.5j
        quad[2 * n + i, i] += 0.5j
    poly = kernel.poly.compose_affine(sel)
    scale = kernel.norm * (2.0 * np.pi) ** (-n)
    form = GaussianForm(poly, quad, np.zeros(nv, dtype=complex), 0j, scale)
    reduced = form.integrate(range(n), degree_cap=degree_cap)

    g = reduced.quad
    if float(np.max(np.abs(g.imag))) > 1e-9 * max(1.0, float(np.max(np.abs(g)))):
        raise numerics.IndefiniteMatrixError("phase-space quadratic form came out complex")
    if float(np.max(np.abs(reduced.lin))) > 1e-9:
        raise numerics.IndefiniteMatrixError("phase-space form has a stray linear term")
    scalar = reduced.scale * np.exp(reduced.const)
    return WignerForm(n, reduced.poly, numerics.as_real_symmetric(g.real, rtol=1e-9), scalar)


def wigner_inverse(
    w: WignerForm, degree_cap: int = DEFAULT_DEGREE_CAP
) -> PolyGaussianKernel:
    """Invert :func:`wigner_transform` back to a position-representation kernel.

    Integrates ``w((x + y)/2, p) exp(i p^T (x - y))`` over p.
    """
    n = w.n
    # Ring layout: [p (internal), x, y].
    nv = 3 * n
    sel = np.zeros((2 * n, nv), dtype=complex)
    for i in range(n):
        sel[i, n + i] = 0.5  # x-argument = (x_i + y_i) / 2
        sel[i, 2 * n + i] = 0.5
        sel[n + i, i] = 1.0  # p-argument = p_i
    quad = sel.T @ w.quad.astype(complex) @ sel
    # exp(i p^T (x - y)) contributes -(p^T (-i I) x) and -(p^T (i I) y).
    for i in range(n):
        quad[i, n + i] += -0.5j
        quad[n + i, i] += -0.5j
        quad[i, 2 * n + i] += 0.5j
        quad[2 * n + i, i] += 0.5j
    poly = w.poly.compose_affine(sel)
    form = GaussianForm(poly, quad, np.zeros(nv, dtype=complex), 0j, w.scale)
    reduced = form.integrate(range(n), degree_cap=degree_cap)
    return _form_to_kernel(reduced, rtol=1e-8)
