"""Shared generators and numerical oracles for the test suite."""

from __future__ import annotations

import numpy as np

from polygauss.gaussian import GaussianTriple, symplectic_form
from polygauss.kernels import PolyGaussianKernel
from polygauss.poly import MultiPoly


def random_kernel_valid_triple(rng: np.random.Generator, n: int, b_scale: float = 1.0) -> GaussianTriple:
    """Random triple with comfortably positive definite A and C."""
    a = rng.normal(size=(n, n))
    a = a @ a.T + (0.5 + n) * np.eye(n)
    c = rng.normal(size=(n, n))
    c = 0.3 * (c @ c.T) + 0.4 * np.eye(n)
    b = b_scale * rng.normal(size=(n, n))
    return GaussianTriple(a, b, c)


def random_gn_triple(rng: np.random.Generator, n: int) -> GaussianTriple:
    """Random element with symmetric A, C of arbitrary sign (general preorder input)."""
    a = rng.normal(size=(n, n))
    c = rng.normal(size=(n, n))
    b = rng.normal(size=(n, n))
    return GaussianTriple(0.5 * (a + a.T), b, 0.5 * (c + c.T))


def random_self_adjoint_poly(
    rng: np.random.Generator, n: int, terms: int = 4, max_deg: int = 3
) -> MultiPoly:
    """Nonzero self-adjoint polynomial: random terms symmetrized with the adjoint."""
    while True:
        tdict: dict[tuple[int, ...], complex] = {}
        for _ in range(terms):
            exps = tuple(int(e) for e in rng.integers(0, max_deg + 1, size=2 * n))
            if sum(exps) > 2 * max_deg:
                continue
            coeff = complex(rng.normal(), rng.normal())
            tdict[exps] = tdict.get(exps, 0j) + coeff
        p = MultiPoly(2 * n, tdict)
        sym = p.hermitized()
        if not sym.is_zero():
            return sym


def random_kernel(
    rng: np.random.Generator, n: int, terms: int = 4, max_deg: int = 2, b_scale: float = 1.0
) -> PolyGaussianKernel:
    return PolyGaussianKernel(
        random_self_adjoint_poly(rng, n, terms, max_deg),
        random_kernel_valid_triple(rng, n, b_scale),
    )


def random_symplectic(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random symplectic 2n x 2n matrix built from elementary generators."""
    eye = np.eye(n)
    p = rng.normal(size=(n, n))
    p = 0.5 * (p + p.T)
    q = rng.normal(size=(n, n))
    q = 0.5 * (q + q.T)
    m = rng.normal(size=(n, n)) + 2.0 * eye
    shear_p = np.block([[eye, np.zeros((n, n))], [p, eye]])
    shear_q = np.block([[eye, q], [np.zeros((n, n)), eye]])
    gl = np.block([[m, np.zeros((n, n))], [np.zeros((n, n)), np.linalg.inv(m).T]])
    s = shear_p @ gl @ shear_q
    omega = symplectic_form(n)
    assert np.max(np.abs(s.T @ omega @ s - omega)) < 1e-9
    return s


def gauss_hermite_oracle(prefactor: MultiPoly, quad: np.ndarray, lin: np.ndarray, order: int) -> complex:
    """Tensor Gauss-Hermite quadrature of ``prefactor * exp(-z^T quad z + lin^T z)``.

    The real part of ``quad`` is factored out as the Gaussian weight; the
    residual complex phase and linear term stay in the integrand, where the
    quadrature converges rapidly because they are entire.
    """
    quad = np.asarray(quad, dtype=complex)
    lin = np.asarray(lin, dtype=complex)
    m = quad.shape[0]
    chol = np.linalg.cholesky(0.5 * (quad.real + quad.real.T))
    inv_t = np.linalg.inv(chol).T  # z = inv_t @ u maps the weight to exp(-u.u)
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    grids = np.meshgrid(*([nodes] * m), indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)  # (N, m)
    z = u @ inv_t.T
    s_imag = 1j * quad.imag
    phase = np.exp(-np.einsum("ni,ij,nj->n", z, s_imag, z) + z @ lin)
    poly_vals = np.zeros(len(u), dtype=complex)
    for exps, coeff in prefactor.terms.items():
        mono = np.ones(len(u), dtype=complex)
        for d, e in enumerate(exps):
            if e:
                mono = mono * z[:, d] ** e
        poly_vals += coeff * mono
    wgrids = np.meshgrid(*([weights] * m), indexing="ij")
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    det_jac = 1.0 / np.prod(np.diag(chol))
    return complex(det_jac * np.sum(w * phase * poly_vals))
