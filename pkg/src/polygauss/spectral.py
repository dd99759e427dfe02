"""Trace-moment spectral tests for polynomial-Gaussian operators.

The j-th trace power ``M_j = Tr(K^j)`` of a kernel operator is a cyclic
chain integral over ``j*n`` variables and evaluates in closed form through
the Wick engine.  Newton's identities turn the moments into the elementary
symmetric values ``e_k`` of the eigenvalue sequence; a negative ``e_k``
certifies that the operator is not positive semidefinite, while all-
nonnegative values up to ``kmax`` prove nothing (the report wording keeps
that asymmetry explicit).

The sweep can be sharpened by re-running it on equivalent Gaussian weights
``(A + delta I, B, C + delta I)``: non-positivity of any equivalent kernel
certifies non-positivity of the original.  For one-parameter kernel
families, :func:`z_root` locates the parameter where ``e_k`` changes sign
and :func:`delta_scan` tracks how that threshold improves with ``delta``.

Independent of the moment machinery, :func:`mercer_search` hunts for finite
point-set positivity violations and :func:`nystrom_oracle` approximates the
spectrum by grid discretization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from . import numerics
from .gaussian import ConsistencyError, GaussianTriple, equiv, shifted_triple
from .kernels import PolyGaussianKernel
from .poly import MultiPoly
from .wick import DEFAULT_DEGREE_CAP, GaussianForm

__all__ = [
    "DeltaScanResult",
    "GammaFamily",
    "MercerCertificate",
    "NystromResult",
    "SpectralReport",
    "ZRootResult",
    "chain_form",
    "delta_scan",
    "delta_shifted_normalized",
    "elementary_symmetric",
    "elementary_symmetric_det",
    "elementary_symmetric_from_eigenvalues",
    "mercer_search",
    "moment",
    "moments",
    "nystrom_oracle",
    "positivity_sweep",
    "z_root",
]

MAX_MOMENT_ORDER = 8
EK_TOL_BASE = 1e-9  # e_k certificate threshold scales as EK_TOL_BASE * max(1, |e_1|)^k
DELTA_INFINITY_PROXY = 1.0e4
DELTA_INFINITY_CONFIRM = 1.0e5


# ------------------------------------------------------------ trace moments


def chain_form(kernel: PolyGaussianKernel, j: int) -> GaussianForm:
    """Cyclic j-fold product integrand of a kernel, over ``j * n`` variables.

    Block ``i`` of the variables is the i-th integration point; each kernel
    copy couples consecutive blocks and the last copy closes the cycle.
    """
    if j < 1:
        raise ValueError("chain order must be at least 1")
    n = kernel.n
    nv = j * n
    m2 = kernel.exponent_matrix()
    quad = np.zeros((nv, nv), dtype=complex)
    pref = MultiPoly.constant(nv, 1.0)
    for i in range(j):
        u, v = i, (i + 1) % j
        var_map = [u * n + d for d in range(n)] + [v * n + d for d in range(n)]
        t = np.zeros((2 * n, nv))
        for old, new in enumerate(var_map):
            t[old, new] = 1.0
        quad = quad + t.T @ m2 @ t
        pref = pref * kernel.poly.rename_vars(nv, var_map)
    re_min = np.linalg.eigvalsh(0.5 * (quad.real + quad.real.T))[0]
    if re_min <= 0.0:
        raise numerics.IndefiniteMatrixError(
            f"chain quadratic form lost positive-definite real part (min {re_min:.3e})"
        )
    return GaussianForm(pref, quad, np.zeros(nv, dtype=complex), 0j, kernel.norm**j)


def moment(
    kernel: PolyGaussianKernel,
    j: int,
    degree_cap: int = DEFAULT_DEGREE_CAP,
    max_order: int = MAX_MOMENT_ORDER,
) -> float:
    """Trace power ``M_j = Tr(K^j)``, a real number."""
    if j > max_order:
        raise ValueError(f"moment order {j} exceeds configured maximum {max_order}")
    deg = kernel.poly.degree() or 0
    if j * deg > degree_cap:
        raise ValueError(
            f"chain prefactor degree {j * deg} exceeds the degree cap {degree_cap}"
        )
    form = chain_form(kernel, j)
    return form.integrate(range(form.nvars), degree_cap=degree_cap).real_scalar()


def moments(kernel: PolyGaussianKernel, kmax: int, **kwargs) -> np.ndarray:
    """The vector (M_1, ..., M_kmax)."""
    return np.array([moment(kernel, j, **kwargs) for j in range(1, kmax + 1)])


# ------------------------------------------------- elementary symmetric e_k


def elementary_symmetric(moment_values: Sequence[float]) -> np.ndarray:
    """Newton's identities: (e_1, ..., e_K) from the trace powers (M_1, ..., M_K)."""
    m = np.asarray(moment_values, dtype=float)
    if m.size == 0:
        raise ValueError("need at least one moment")
    e = np.zeros(m.size + 1)
    e[0] = 1.0
    for k in range(1, m.size + 1):
        acc = 0.0
        for j in range(1, k + 1):
            acc += (-1.0) ** (j - 1) * e[k - j] * m[j - 1]
        e[k] = acc / k
    return e[1:]


def elementary_symmetric_det(moment_values: Sequence[float]) -> np.ndarray:
    """Determinant formulation of the same recursion (kept as a cross-check).

    ``e_k`` is ``1/k!`` times the determinant of the k-by-k matrix with
    ``M_{i-j+1}`` on and below the diagonal and ``i+1`` on the superdiagonal.
    """
    m = np.asarray(moment_values, dtype=float)
    out = np.zeros(m.size)
    for k in range(1, m.size + 1):
        mat = np.zeros((k, k))
        for i in range(k):
            for jcol in range(i + 1):
                mat[i, jcol] = m[i - jcol]
            if i + 1 < k:
                mat[i, i + 1] = i + 1
        out[k - 1] = np.linalg.det(mat) / math.factorial(k)
    return out


def elementary_symmetric_from_eigenvalues(
    eigenvalues: Sequence[float], kmax: int
) -> np.ndarray:
    """Direct (e_1, ..., e_kmax) of a finite eigenvalue list."""
    e = np.zeros(kmax + 1)
    e[0] = 1.0
    for lam in eigenvalues:
        for k in range(kmax, 0, -1):
            e[k] += lam * e[k - 1]
    return e[1:]


@dataclass(frozen=True)
class SpectralReport:
    """Outcome of an e_k sweep.

    ``first_negative`` is the least k whose ``e_k`` fell below the
    certificate threshold; it certifies non-positivity.  Its absence is
    reported as "consistent up to kmax" and is NOT a positivity proof.
    """

    kmax: int
    moments: np.ndarray
    eks: np.ndarray
    first_negative: Optional[int]
    tolerance: float

    @property
    def certified_not_psd(self) -> bool:
        return self.first_negative is not None

    @property
    def verdict(self) -> str:
        if self.certified_not_psd:
            return f"certified_not_psd(k={self.first_negative})"
        return f"consistent_up_to({self.kmax})"


def positivity_sweep(
    kernel: PolyGaussianKernel,
    kmax: int,
    degree_cap: int = DEFAULT_DEGREE_CAP,
    max_order: int = MAX_MOMENT_ORDER,
) -> SpectralReport:
    """Compute e_1..e_kmax and certify non-positivity at the first negative one."""
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    m = moments(kernel, kmax, degree_cap=degree_cap, max_order=max_order)
    eks = elementary_symmetric(m)
    first_negative = None
    tol = 0.0
    for k in range(1, kmax + 1):
        tol = EK_TOL_BASE * max(1.0, abs(eks[0])) ** k
        if eks[k - 1] < -tol:
            first_negative = k
            break
    return SpectralReport(kmax, m, eks, first_negative, tol)


def delta_shifted_normalized(kernel: PolyGaussianKernel, delta: float) -> PolyGaussianKernel:
    """Equivalent kernel with Gaussian blocks shifted by delta, renormalized to trace 1."""
    shifted = kernel.with_triple(shifted_triple(kernel.triple, delta))
    tr = moment(shifted.with_norm(1.0), 1)
    if tr <= 0.0:
        raise ValueError("shifted kernel has non-positive trace; cannot normalize")
    return shifted.with_norm(1.0 / tr)


# ------------------------------------------------------ gamma-kernel families


@dataclass(frozen=True)
class GammaFamily:
    """One-parameter kernel family P_gamma(x, y) * kappa_G, trace-normalized.

    ``poly_gamma`` lives on ``2n + 1`` variables with the family parameter
    as the last variable (polynomial dependence).  Shifting ``delta`` moves
    along the Gaussian equivalence class of ``base_triple``; the polynomial
    factor is shared by the whole family.
    """

    poly_gamma: MultiPoly
    base_triple: GaussianTriple

    def __post_init__(self) -> None:
        if self.poly_gamma.nvars != 2 * self.base_triple.n + 1:
            raise ValueError("poly_gamma must have 2n + 1 variables (parameter last)")

    @property
    def n(self) -> int:
        return self.base_triple.n

    def triple(self, delta: float = 0.0) -> GaussianTriple:
        return shifted_triple(self.base_triple, delta)

    def poly_at(self, gamma: float) -> MultiPoly:
        nv = self.poly_gamma.nvars
        lin = np.zeros((nv, nv - 1), dtype=complex)
        lin[: nv - 1, :] = np.eye(nv - 1)
        const = np.zeros(nv, dtype=complex)
        const[nv - 1] = gamma
        return self.poly_gamma.compose_affine(lin, const)

    def kernel(self, gamma: float, delta: float = 0.0) -> PolyGaussianKernel:
        """The trace-one family member at (gamma, delta)."""
        raw = PolyGaussianKernel(self.poly_at(gamma), self.triple(delta), 1.0)
        tr = moment(raw, 1)
        if tr <= 0.0:
            raise ValueError(f"family member at gamma={gamma} has non-positive trace")
        return raw.with_norm(1.0 / tr)

    def ek_evaluator(
        self, kmax: int, delta: float, dps: int = 100
    ) -> Callable[[float], np.ndarray]:
        """gamma -> (e_1..e_kmax) map at fixed delta.

        The gamma dependence of every chain integral is polynomial, so the
        moment integrals are carried out once per order and the sweep reduces
        to polynomial evaluation plus trace normalization and the Newton
        recursion.  Large shifts cluster the eigenvalues and drive the true
        e_k far below double-precision cancellation noise, so this path runs
        in ``dps``-digit arithmetic (the inputs are exact binary floats).
        """
        if np.max(np.abs(self.base_triple.b)) != 0.0:
            raise NotImplementedError(
                "high-precision family sweep requires B = 0 (real chain forms)"
            )
        return _mp_ek_evaluator(self, kmax, delta, dps)


def _mp_chain_matrix(a, c, j: int, n: int):
    """Chain quadratic form (j*n square, mpmath) for a B = 0 triple."""
    apc = [[a[r][s] + c[r][s] for s in range(n)] for r in range(n)]
    cma = [[c[r][s] - a[r][s] for s in range(n)] for r in range(n)]
    q = mpmath.zeros(j * n)
    for i in range(j):
        u, v = i, (i + 1) % j
        for r in range(n):
            for s in range(n):
                q[u * n + r, u * n + s] += apc[r][s]
                q[v * n + r, v * n + s] += apc[r][s]
                q[u * n + r, v * n + s] += cma[r][s]
                q[v * n + r, u * n + s] += cma[r][s]
    return q


class _MpWickTable:
    """Isserlis moments in mpmath arithmetic for a real covariance matrix."""

    def __init__(self, cov) -> None:
        self.cov = cov
        m = cov.rows
        self._memo = {(0,) * m: mpmath.mpf(1)}

    def moment(self, alpha: tuple[int, ...]):
        if sum(alpha) % 2:
            return mpmath.mpf(0)
        cached = self._memo.get(alpha)
        if cached is not None:
            return cached
        i = next(k for k, e in enumerate(alpha) if e > 0)
        beta = list(alpha)
        beta[i] -= 1
        total = mpmath.mpf(0)
        for j, bj in enumerate(beta):
            if bj > 0:
                gamma = list(beta)
                gamma[j] -= 1
                total += self.cov[i, j] * bj * self.moment(tuple(gamma))
        self._memo[alpha] = total
        return total


def _mp_ek_evaluator(
    family: "GammaFamily", kmax: int, delta: float, dps: int
) -> Callable[[float], np.ndarray]:
    n = family.n
    with mpmath.workdps(dps):
        a = [[mpmath.mpf(float(family.base_triple.a[r, s])) + mpmath.mpf(delta) * (r == s)
              for s in range(n)] for r in range(n)]
        c = [[mpmath.mpf(float(family.base_triple.c[r, s])) + mpmath.mpf(delta) * (r == s)
              for s in range(n)] for r in range(n)]
        # Base polynomial terms, split as (chain-variable exponents, gamma power).
        base_terms = [
            (exps[: 2 * n], exps[2 * n], mpmath.mpf(co.real))
            for exps, co in family.poly_gamma.terms.items()
        ]
        if any(abs(co.imag) != 0.0 for _, co in family.poly_gamma.terms.items()):
            raise NotImplementedError("family polynomial must have real coefficients")

        gamma_polys = []  # per order j: dict gamma_power -> mpf coefficient
        dets = []
        for j in range(1, kmax + 1):
            q = _mp_chain_matrix(a, c, j, n)
            dets.append(mpmath.det(q))
            cov = mpmath.inverse(q) / 2
            table = _MpWickTable(cov)
            # Chain prefactor: product over cycle links of the base polynomial.
            pref: dict[tuple[int, ...], dict[int, mpmath.mpf]] = {
                (0,) * (j * n): {0: mpmath.mpf(1)}
            }
            for i in range(j):
                u, v = i, (i + 1) % j
                nxt: dict[tuple[int, ...], dict[int, mpmath.mpf]] = {}
                for exps, gpoly in pref.items():
                    for fexps, gpow, fco in base_terms:
                        new = list(exps)
                        for d in range(n):
                            new[u * n + d] += fexps[d]
                            new[v * n + d] += fexps[n + d]
                        key = tuple(new)
                        slot = nxt.setdefault(key, {})
                        for p, pc in gpoly.items():
                            slot[p + gpow] = slot.get(p + gpow, mpmath.mpf(0)) + pc * fco
                pref = nxt
            mom: dict[int, mpmath.mpf] = {}
            for exps, gpoly in pref.items():
                wick = table.moment(exps)
                if wick == 0:
                    continue
                for p, pc in gpoly.items():
                    mom[p] = mom.get(p, mpmath.mpf(0)) + pc * wick
            gamma_polys.append(mom)
        # Trace powers: M_j = (q_j / q_1^j) * sqrt(det(Q_1)^j / det(Q_j)); the
        # pi^(jn/2) factors of the Gaussian integrals cancel in the ratio.
        scale_ratios = [
            mpmath.sqrt(dets[0] ** j / dets[j - 1]) for j in range(1, kmax + 1)
        ]

    def eks_at(gamma: float) -> np.ndarray:
        with mpmath.workdps(dps):
            g = mpmath.mpf(gamma)
            raw = [
                sum(pc * g**p for p, pc in gamma_polys[j - 1].items())
                for j in range(1, kmax + 1)
            ]
            if raw[0] <= 0:
                raise ValueError(f"non-positive trace at gamma={gamma}")
            mj = [
                raw[j - 1] / raw[0] ** j * scale_ratios[j - 1]
                for j in range(1, kmax + 1)
            ]
            e = [mpmath.mpf(1)]
            for k in range(1, kmax + 1):
                acc = mpmath.mpf(0)
                for j in range(1, k + 1):
                    acc += (-1) ** (j - 1) * e[k - j] * mj[j - 1]
                e.append(acc / k)
            return np.array([float(v) for v in e[1:]])

    return eks_at


@dataclass(frozen=True)
class ZRootResult:
    """Bracketed root of ``gamma -> e_k(delta, gamma)``."""

    k: int
    delta: float
    gamma_root: float
    bracket: tuple[float, float]


def z_root(
    family: GammaFamily,
    k: int,
    delta: float,
    gamma_range: tuple[float, float] = (0.0, 20.0),
    samples: int = 64,
    tol: float = 1e-6,
    dps: int = 100,
) -> ZRootResult:
    """Locate the smallest parameter where ``e_k`` changes sign.

    The range is pre-scanned on a uniform grid and the first sign change is
    bisected; multiple crossings therefore resolve to the smallest one.  An
    infinite ``delta`` is evaluated at a large proxy shift and confirmed at a
    ten-times-larger one.
    """
    if math.isinf(delta):
        proxy = _z_root_finite(family, k, DELTA_INFINITY_PROXY, gamma_range, samples, tol, dps)
        confirm = _z_root_finite(
            family, k, DELTA_INFINITY_CONFIRM, gamma_range, samples, tol, dps
        )
        if abs(proxy.gamma_root - confirm.gamma_root) > 1e-3:
            raise ConsistencyError(
                "limit root did not stabilize: "
                f"{proxy.gamma_root} at {DELTA_INFINITY_PROXY:g} vs "
                f"{confirm.gamma_root} at {DELTA_INFINITY_CONFIRM:g}"
            )
        return ZRootResult(k, math.inf, confirm.gamma_root, confirm.bracket)
    return _z_root_finite(family, k, delta, gamma_range, samples, tol, dps)


def _z_root_finite(family, k, delta, gamma_range, samples, tol, dps) -> ZRootResult:
    lo, hi = gamma_range
    if not lo < hi:
        raise ValueError("invalid gamma range")
    eks_at = family.ek_evaluator(k, delta, dps=dps)

    def f(gamma: float) -> float:
        return float(eks_at(gamma)[k - 1])

    grid = np.linspace(lo, hi, max(int(samples), 2))
    values = [f(g) for g in grid]
    bracket = None
    for i in range(len(grid) - 1):
        if values[i] == 0.0:
            return ZRootResult(k, delta, float(grid[i]), (float(grid[i]), float(grid[i])))
        if np.sign(values[i]) != np.sign(values[i + 1]):
            bracket = (float(grid[i]), float(grid[i + 1]))
            break
    if bracket is None:
        raise numerics.BracketError(
            f"e_{k} has no sign change on gamma range [{lo}, {hi}] at delta={delta}"
        )
    root = numerics.bracket_root(f, bracket[0], bracket[1], tol)
    return ZRootResult(k, delta, root, bracket)


@dataclass(frozen=True)
class DeltaScanResult:
    """Roots of e_k across a family of equivalent Gaussian weights."""

    results: tuple[ZRootResult, ...]
    best: ZRootResult
    monotone_decreasing: bool


def delta_scan(
    family: GammaFamily,
    k: int,
    deltas: Sequence[float],
    gamma_range: tuple[float, float] = (0.0, 20.0),
    samples: int = 64,
    tol: float = 1e-6,
    dps: int = 100,
) -> DeltaScanResult:
    """Track the e_k sign-change threshold along the Gaussian equivalence class.

    Every shifted weight is checked to be equivalent to the base triple, so a
    certificate at any delta applies to the original kernel.  The smallest
    root across the scan is the sharpened non-positivity threshold.
    """
    if not deltas:
        raise ValueError("need at least one delta")
    results = []
    for d in deltas:
        probe = DELTA_INFINITY_PROXY if math.isinf(d) else d
        if not equiv(family.triple(0.0), family.triple(probe)):
            raise ConsistencyError(f"shift {d} left the Gaussian equivalence class")
        results.append(
            z_root(family, k, d, gamma_range=gamma_range, samples=samples, tol=tol, dps=dps)
        )
    best = min(results, key=lambda r: r.gamma_root)
    by_delta = sorted(results, key=lambda r: r.delta)
    roots = [r.gamma_root for r in by_delta]
    monotone = all(roots[i + 1] <= roots[i] + 1e-9 for i in range(len(roots) - 1))
    return DeltaScanResult(tuple(results), best, monotone)


# ----------------------------------------------------------- Mercer search


@dataclass(frozen=True)
class MercerCertificate:
    """Finite point set witnessing a positivity violation.

    ``value`` is the re-verified quadratic form
    ``sum_ij c_i conj(c_j) kernel(x_i, x_j) < 0``.
    """

    points: np.ndarray
    coeffs: np.ndarray
    value: float
    min_eigenvalue: float
    trial: int


def verify_mercer_certificate(
    kernel: PolyGaussianKernel, points: np.ndarray, coeffs: np.ndarray
) -> float:
    """Direct summation of the positivity form (independent of the search path)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    cs = np.asarray(coeffs, dtype=complex)
    total = 0j
    for i in range(pts.shape[0]):
        for j in range(pts.shape[0]):
            total += cs[i] * np.conj(cs[j]) * kernel.evaluate(pts[i], pts[j])
    if abs(total.imag) > 1e-8 * max(1.0, abs(total)):
        raise ConsistencyError(f"positivity form not real: {total!r}")
    return total.real


def mercer_search(
    kernel: PolyGaussianKernel,
    trials: int = 200,
    points_per_trial: int = 20,
    seed: int = 0,
    cloud_scale: Optional[float] = None,
) -> Optional[MercerCertificate]:
    """Randomized search for a finite positivity violation.

    Samples Gaussian point clouds, assembles the Hermitian kernel matrix and
    inspects its smallest eigenvalue.  A candidate certificate is re-verified
    by direct summation before being returned.  ``None`` means no violation
    was found within the budget; it is not a positivity proof.
    """
    if cloud_scale is None:
        cloud_scale = 0.5 / math.sqrt(max(numerics.min_eigenvalue(kernel.triple.c), 1e-12))
    factors = (1.0, 0.5, 2.0)
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        pts = cloud_scale * factors[trial % len(factors)] * rng.standard_normal(
            (points_per_trial, kernel.n)
        )
        gram = kernel.gram(pts)
        gram = 0.5 * (gram + gram.conj().T)
        vals, vecs = np.linalg.eigh(gram)
        scale = max(float(np.abs(np.trace(gram))), float(np.max(np.abs(gram))), 1e-300)
        if vals[0] < -1e-9 * scale:
            coeffs = np.conj(vecs[:, 0])
            value = verify_mercer_certificate(kernel, pts, coeffs)
            if value < -1e-9 * scale:
                return MercerCertificate(pts, coeffs, value, float(vals[0]), trial)
    return None


# ---------------------------------------------------------- Nystrom oracle


@dataclass(frozen=True)
class NystromResult:
    """Grid-discretization eigenvalues of a kernel operator (n <= 2).

    ``coarse`` flags a trace mismatch above one percent against the exact
    trace integral, signalling that the grid under-resolves the kernel.
    """

    eigenvalues: np.ndarray
    trace_estimate: float
    trace_reference: float
    grid_points: int
    box_halfwidth: float

    @property
    def coarse(self) -> bool:
        ref = max(abs(self.trace_reference), 1e-300)
        return abs(self.trace_estimate - self.trace_reference) > 0.01 * ref


def nystrom_oracle(
    kernel: PolyGaussianKernel,
    grid_points: int = 160,
    box_halfwidth: Optional[float] = None,
) -> NystromResult:
    """Approximate operator eigenvalues from a uniform-grid kernel matrix.

    Midpoint weights make the weighted Gram matrix Hermitian, so its
    eigenvalues approximate the operator spectrum directly.  Supports one
    and two coordinates (the grid is tensorized).
    """
    n = kernel.n
    if n > 2:
        raise ValueError("grid oracle supports n <= 2 only")
    if box_halfwidth is None:
        cmin = numerics.min_eigenvalue(kernel.triple.c)
        box_halfwidth = 3.0 / math.sqrt(max(2.0 * cmin, 1e-12))
    m = int(grid_points)
    h = 2.0 * box_halfwidth / m
    axis = -box_halfwidth + h * (np.arange(m) + 0.5)
    if n == 1:
        pts = axis[:, None]
        weight = h
    else:
        xx, yy = np.meshgrid(axis, axis, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        weight = h * h
    gram = kernel.gram(pts) * weight
    gram = 0.5 * (gram + gram.conj().T)
    vals = np.linalg.eigvalsh(gram)[::-1]
    trace_estimate = float(np.sum(vals))
    trace_reference = moment(kernel, 1)
    return NystromResult(vals, trace_estimate, trace_reference, m, float(box_halfwidth))
