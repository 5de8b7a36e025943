"""Galerkin assembly and diagonalization of H_V = -Delta_g + V, plus the
spectral calculus (multipliers, band projectors, Bernstein smoothing) built
on the resulting decomposition.

The eigensolver is deliberately hand-rolled and deterministic: Householder
tridiagonalization followed by implicit-shift QL, with a fixed tie-breaking
sign convention for the eigenvectors, so repeated runs produce bit-identical
decompositions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

try:
    from sklearn.base import BaseEstimator, TransformerMixin
except ImportError:  # pragma: no cover - sklearn is a declared dependency
    class BaseEstimator:  # type: ignore
        pass

    class TransformerMixin:  # type: ignore
        pass

from . import geometry
from .errors import DomainError, NumericError
from .potentials import Potential

_QL_MAX_SWEEPS = 64


def _potential_values(V: Potential | None, grid: geometry.QuadratureGrid) -> np.ndarray:
    if V is None:
        return np.zeros(grid.size)
    nodes = grid.nodes
    if nodes.ndim == 2 and grid.manifold.kind == geometry.SPHERE_FULL_2D:
        return np.asarray(V(nodes[:, 0]), dtype=float)
    if nodes.ndim == 2:
        raise DomainError("zonal potentials are not defined on the torus; "
                          "pass V=None or assemble on a sphere")
    return np.asarray(V(nodes), dtype=float)


def potential_matrix(V: Potential | None, basis: geometry.Basis) -> np.ndarray:
    """Galerkin matrix <V e_j, e_k> on the basis quadrature grid."""
    vals = _potential_values(V, basis.grid)
    E = basis.values
    M = E.T @ (E * (basis.grid.weights * vals)[:, None])
    return 0.5 * (M + M.T)


def assemble(V: Potential | None, basis: geometry.Basis, shift: int = 0,
             check: bool = False, check_tol: float = 0.01) -> np.ndarray:
    """Galerkin matrix of -Delta_g + V + shift in the given basis.

    ``check=True`` reassembles the potential block on a once-refined grid
    and raises, naming the worst entry, when any coefficient moves by more
    than ``check_tol`` relative to the matrix scale.  Singular potentials
    should be assembled on pole-refined (graded) grids; the check is the
    guard that catches a grid that cannot resolve V.
    """
    pot = potential_matrix(V, basis)
    if check and V is not None:
        fine = _refined_copy(basis)
        pot_fine = potential_matrix(V, fine)
        scale = max(float(np.max(np.abs(pot_fine))), 1e-300)
        diff = np.abs(pot_fine - pot)
        j, k = np.unravel_index(int(np.argmax(diff)), diff.shape)
        if diff[j, k] > check_tol * scale:
            raise NumericError(
                f"potential assembly not converged: entry ({j}, {k}) moved by "
                f"{diff[j, k]:.3e} (scale {scale:.3e}) under grid refinement; "
                "use a finer or pole-refined grid")
        pot = pot_fine
    M = np.diag(basis.freqs ** 2 + float(shift)) + pot
    return 0.5 * (M + M.T)


def _refined_copy(basis: geometry.Basis) -> geometry.Basis:
    grid = basis.grid
    m = grid.manifold
    if m.kind == geometry.SPHERE_ZONAL:
        levels = 6 if grid.pole_refined else 0
        fine = geometry.zonal_grid(m.n, 2 * grid.size, pole_levels=levels)
        return geometry.ZonalSphereBasis(m.n, basis.K, fine)
    if m.kind == geometry.SPHERE_FULL_2D:
        nphi = int(round(math.sqrt(grid.size / 2)))
        fine = geometry.full_sphere_grid(2 * nphi + 1)
        return geometry.FullSphereBasis(basis.K, fine)
    per_dim = int(round(grid.size ** (1.0 / m.n)))
    fine = geometry.torus_grid(m.n, 2 * per_dim)
    return geometry.TorusBasis(m.n, basis.K, fine)


def householder_tridiagonalize(A: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduce a symmetric matrix to tridiagonal form: A = Q T Q^T.

    Returns (diagonal, subdiagonal, Q).  Reflections are applied with the
    standard sign choice (alpha opposite to the pivot) for stability.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("matrix must be square")
    if not np.allclose(A, A.T, atol=1e-10 * max(1.0, float(np.max(np.abs(A))))):
        raise DomainError("matrix must be symmetric")
    a = 0.5 * (A + A.T)
    m = a.shape[0]
    q = np.eye(m)
    for k in range(m - 2):
        x = a[k + 1:, k]
        norm_x = float(np.sqrt(np.sum(x * x)))
        if norm_x == 0.0:
            continue
        alpha = -norm_x if x[0] >= 0.0 else norm_x
        v = x.copy()
        v[0] -= alpha
        vnorm = float(np.sqrt(np.sum(v * v)))
        if vnorm == 0.0:
            continue
        v /= vnorm
        a[k + 1:, :] -= 2.0 * np.outer(v, v @ a[k + 1:, :])
        a[:, k + 1:] -= 2.0 * np.outer(a[:, k + 1:] @ v, v)
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v)
    d = np.diag(a).copy()
    e = np.diag(a, -1).copy()
    return d, e, q


def ql_implicit(d: np.ndarray, e: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    ``d`` is the diagonal, ``e`` the subdiagonal, ``z`` the accumulated
    transform from the tridiagonalization; returns (eigenvalues,
    eigenvectors) unsorted.  Raises NumericError if any eigenvalue fails to
    converge within the sweep budget.
    """
    n = d.shape[0]
    d = np.asarray(d, dtype=float).copy()
    e = np.append(np.asarray(e, dtype=float), 0.0)
    z = np.asarray(z, dtype=float).copy()
    eps = np.finfo(float).eps
    for l in range(n):
        for sweep in range(_QL_MAX_SWEEPS + 1):
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            if sweep == _QL_MAX_SWEEPS:
                raise NumericError(f"QL iteration for eigenvalue {l} exceeded "
                                   f"{_QL_MAX_SWEEPS} sweeps")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                col = z[:, i + 1].copy()
                z[:, i + 1] = s * z[:, i] + c * col
                z[:, i] = c * z[:, i] - s * col
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d, z


@dataclass
class SpectralDecomposition:
    """Eigenpairs of a Galerkin matrix, in ascending eigenvalue order.

    ``eigenvalues`` are the (shifted) Galerkin eigenvalues mu_i,
    ``eigenvectors`` their coefficient columns in the basis, and
    ``frequencies`` sqrt(max(mu_i, 0)); ``shift`` records the constant that
    was added to the operator before diagonalizing.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    basis: geometry.Basis | None = None
    shift: int = 0

    @property
    def frequencies(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.eigenvalues, 0.0))

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]

    def node_values(self) -> np.ndarray:
        """Eigenfunction values on the basis quadrature grid, one column each."""
        if self.basis is None:
            raise DomainError("decomposition carries no basis")
        return self.basis.values @ self.eigenvectors

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        if self.basis is None:
            raise DomainError("decomposition carries no basis")
        return self.basis.values @ (self.eigenvectors @ coeffs)

    def project(self, f: np.ndarray) -> np.ndarray:
        """Coefficients of f in the eigenbasis (quadrature inner products)."""
        if self.basis is None:
            raise DomainError("decomposition carries no basis")
        return self.eigenvectors.T @ self.basis.project(f)


def diagonalize(matrix: np.ndarray, basis: geometry.Basis | None = None,
                shift: int = 0) -> SpectralDecomposition:
    """Full eigendecomposition via Householder + implicit QL, deterministic."""
    d, e, q = householder_tridiagonalize(matrix)
    mu, vecs = ql_implicit(d, e, q)
    order = np.argsort(mu, kind="stable")
    mu = mu[order]
    vecs = vecs[:, order]
    # fixed sign convention: largest-magnitude component positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0.0] = 1.0
    vecs = vecs * signs
    return SpectralDecomposition(eigenvalues=mu, eigenvectors=vecs,
                                 basis=basis, shift=shift)


def solve(V: Potential | None, basis: geometry.Basis, shift: int | str = 0,
          check: bool = False) -> SpectralDecomposition:
    """Assemble and diagonalize H_V (+ shift) in one step.

    ``shift='auto'`` picks the smallest integer N >= 0 making the lowest
    Galerkin eigenvalue of H_{V+N} at least 1.
    """
    if shift == "auto":
        base = diagonalize(assemble(V, basis, shift=0, check=check), basis, 0)
        n_shift = max(0, int(math.ceil(1.0 - float(base.eigenvalues[0]))))
        if n_shift == 0:
            return base
        return SpectralDecomposition(eigenvalues=base.eigenvalues + n_shift,
                                     eigenvectors=base.eigenvectors,
                                     basis=basis, shift=n_shift)
    matrix = assemble(V, basis, shift=int(shift), check=check)
    return diagonalize(matrix, basis, int(shift))


def multiplier(decomp: SpectralDecomposition, fn: Callable[[np.ndarray], np.ndarray],
               f: np.ndarray) -> np.ndarray:
    """Apply m(sqrt(H)) to grid values f through the eigenbasis."""
    coeffs = decomp.project(f)
    weights = np.asarray(fn(decomp.frequencies))
    return decomp.synthesize(weights * coeffs)


def multiplier_kernel(decomp: SpectralDecomposition,
                      fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Node-space kernel K(x_i, y_j) = sum_k m(lambda_k) e_k(x_i) e_k(y_j)."""
    U = decomp.node_values()
    weights = np.asarray(fn(decomp.frequencies))
    return (U * weights[None, :]) @ U.T


def band_projector(decomp: SpectralDecomposition, lo: float, hi: float):
    """Sharp spectral projector onto frequencies in (lo, hi]."""
    def chi(freq):
        freq = np.asarray(freq)
        return ((freq > lo) & (freq <= hi)).astype(float)
    return chi


def band_indices(decomp: SpectralDecomposition, lo: float, hi: float) -> np.ndarray:
    freq = decomp.frequencies
    return np.nonzero((freq > lo) & (freq <= hi))[0]


def bernstein_bump(s: np.ndarray) -> np.ndarray:
    """Smooth bump supported on (1/2, 1), normalized to unit integral."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = (s > 0.5) & (s < 1.0)
    t = (s[inside] - 0.5) * 4.0 - 1.0  # map (1/2, 1) to (-1, 1)
    out[inside] = np.exp(-1.0 / (1.0 - t ** 2))
    return out


_BERNSTEIN_NORM = None


def _bernstein_norm() -> float:
    global _BERNSTEIN_NORM
    if _BERNSTEIN_NORM is None:
        s, w = geometry._panel_gauss(0.5, 1.0, 32, 8)
        _BERNSTEIN_NORM = float(np.sum(w * bernstein_bump(s)))
    return _BERNSTEIN_NORM


def lp_psi(xi) -> np.ndarray:
    """Smooth low-pass profile: 1 on [0, 1.2], 0 on [1.8, infinity).

    The transition sits strictly inside the octave so the dyadic bumps
    lp_beta have genuine plateaus where they equal 1."""
    from .potentials import _smoothstep
    return 1.0 - _smoothstep((np.asarray(xi, dtype=float) - 1.2) / 0.6)


def lp_beta(j: int, xi) -> np.ndarray:
    """Dyadic Littlewood-Paley bumps: beta_0 = psi, beta_j = psi(./2^j) -
    psi(./2^{j-1}) for j >= 1; they telescope to 1 on [0, 2^J]."""
    xi = np.asarray(xi, dtype=float)
    if j < 0:
        raise DomainError("dyadic index must be nonnegative")
    if j == 0:
        return lp_psi(xi)
    return lp_psi(xi / 2.0 ** j) - lp_psi(xi / 2.0 ** (j - 1))


def lp_profile(s) -> np.ndarray:
    """The single smooth bump supported in (1/2, 2): psi(s) - psi(2s)."""
    s = np.asarray(s, dtype=float)
    return lp_psi(s) - lp_psi(2.0 * s)


def bernstein_weights(mu: np.ndarray, lam: float) -> np.ndarray:
    """Smoothed heat-sandwich weights int_{1/2}^1 exp(-s mu / lam^2) beta(s) ds.

    beta is a nonnegative bump on (1/2, 1) with unit integral, so the
    weights sit between exp(-mu/lam^2) and exp(-mu/(2 lam^2)).
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    s, w = geometry._panel_gauss(0.5, 1.0, 32, 8)
    beta = bernstein_bump(s) / _bernstein_norm()
    mu = np.asarray(mu, dtype=float)
    return np.exp(-np.outer(mu, s) / lam ** 2) @ (w * beta)


class SchrodingerOperator(BaseEstimator):
    """Estimator wrapping assembly + diagonalization of -Delta_g + V.

    Parameters follow scikit-learn conventions; ``fit`` takes a basis and
    exposes ``eigenvalues_``, ``eigenvectors_``, ``frequencies_`` and the
    applied ``shift_``.
    """

    def __init__(self, potential: Potential | None = None, shift: int | str = 0,
                 check_assembly: bool = False):
        self.potential = potential
        self.shift = shift
        self.check_assembly = check_assembly

    def fit(self, basis: geometry.Basis, y=None):
        decomp = solve(self.potential, basis, shift=self.shift,
                       check=self.check_assembly)
        self.decomposition_ = decomp
        self.basis_ = basis
        self.eigenvalues_ = decomp.eigenvalues
        self.eigenvectors_ = decomp.eigenvectors
        self.frequencies_ = decomp.frequencies
        self.shift_ = decomp.shift
        return self

    def transform(self, f: np.ndarray) -> np.ndarray:
        """Coefficients of grid functions in the eigenbasis."""
        self._check_fitted()
        return self.decomposition_.project(np.asarray(f))

    def _check_fitted(self):
        if not hasattr(self, "decomposition_"):
            raise NumericError("operator is not fitted; call fit(basis) first")


class MultiplierOperator(TransformerMixin, BaseEstimator):
    """Spectral multiplier m(sqrt(H)) as a transformer on grid functions."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray],
                 operator: SchrodingerOperator | None = None):
        self.fn = fn
        self.operator = operator

    def fit(self, basis: geometry.Basis, y=None):
        op = self.operator if self.operator is not None else SchrodingerOperator()
        if not hasattr(op, "decomposition_"):
            op.fit(basis)
        self.operator_ = op
        return self

    def transform(self, f: np.ndarray) -> np.ndarray:
        self._check_fitted()
        f = np.asarray(f)
        if f.ndim == 1:
            return multiplier(self.operator_.decomposition_, self.fn, f)
        return np.column_stack([
            multiplier(self.operator_.decomposition_, self.fn, f[:, j])
            for j in range(f.shape[1])])

    def kernel(self) -> np.ndarray:
        self._check_fitted()
        return multiplier_kernel(self.operator_.decomposition_, self.fn)

    def compose(self, other: "MultiplierOperator") -> "MultiplierOperator":
        composed = MultiplierOperator(lambda freq: self.fn(freq) * other.fn(freq))
        if hasattr(self, "operator_"):
            composed.operator_ = self.operator_
        return composed

    def _check_fitted(self):
        if not hasattr(self, "operator_"):
            raise NumericError("multiplier is not fitted; call fit(basis) first")


def save_decomposition(decomp: SpectralDecomposition, path: str) -> None:
    """CSV dump: row i = eigenvalue mu_i followed by its coefficient vector."""
    from . import estimators
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["shift", decomp.shift])
    header = ["eigenvalue"] + [f"c{j}" for j in range(decomp.size)]
    writer.writerow(header)
    for i in range(decomp.size):
        writer.writerow([repr(float(decomp.eigenvalues[i]))]
                        + [repr(float(c)) for c in decomp.eigenvectors[:, i]])
    estimators.atomic_write_text(path, buf.getvalue())


def load_decomposition(path: str, basis: geometry.Basis | None = None) -> SpectralDecomposition:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    shift = int(rows[0][1])
    data = np.array([[float(v) for v in row] for row in rows[2:]])
    return SpectralDecomposition(eigenvalues=data[:, 0], eigenvectors=data[:, 1:].T,
                                 basis=basis, shift=shift)
