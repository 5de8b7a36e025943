"""Model manifolds, Laplace eigenbases, quadrature grids and L^p norms.

Three model geometries are supported:

* ``sphere-zonal(n)`` -- the rotation-invariant (zonal) sector of the unit
  round sphere S^n, where every function depends only on the polar angle
  ``phi`` and the Laplacian reduces to a weighted Sturm-Liouville operator
  in ``phi``.
* ``sphere-full-2d`` -- the full unit sphere S^2 with a real spherical
  harmonic basis.
* ``torus(n)`` -- the flat torus [0, 2pi)^n with a real Fourier basis.

All bases are orthonormal with respect to the quadrature grid they are
built on, and frequencies follow the convention ``lambda_j = sqrt(mu_j)``
with ``mu_j`` the Laplace eigenvalue (``k(k+n-1)`` on spheres, ``|m|^2`` on
the torus).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResolutionError

SPHERE_ZONAL = "sphere-zonal"
SPHERE_FULL_2D = "sphere-full-2d"
TORUS = "torus"

_KINDS = (SPHERE_ZONAL, SPHERE_FULL_2D, TORUS)


def sphere_volume(n: int) -> float:
    """Volume of the unit round sphere S^n (surface measure)."""
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


@dataclass(frozen=True)
class ModelManifold:
    """One of the model geometries, with unit metric normalization."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown manifold kind {self.kind!r}; expected one of {_KINDS}")
        if self.n < 2:
            raise DomainError(f"dimension must be >= 2, got {self.n}")
        if self.kind == SPHERE_FULL_2D and self.n != 2:
            raise DomainError("sphere-full-2d requires n = 2")

    @property
    def volume(self) -> float:
        if self.kind == TORUS:
            return (2.0 * math.pi) ** self.n
        return sphere_volume(self.n)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n}


@dataclass(frozen=True)
class QuadratureGrid:
    """Quadrature nodes and weights carrying the full volume element.

    ``nodes`` has shape (N,) for zonal grids (polar angles ``phi``) and
    (N, d) for product grids (``(phi, theta)`` on S^2, angles on a torus).
    ``weights`` sum to the manifold volume.
    """

    manifold: ModelManifold
    nodes: np.ndarray
    weights: np.ndarray
    pole_refined: bool = False

    def __post_init__(self):
        if self.nodes.shape[0] != self.weights.shape[0]:
            raise DomainError("nodes and weights must have matching lengths")
        if self.nodes.shape[0] == 0:
            raise DomainError("empty quadrature grid")
        if np.any(self.weights <= 0):
            raise DomainError("quadrature weights must be positive")

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values: np.ndarray) -> complex:
        values = np.asarray(values)
        if values.shape[0] != self.size:
            raise DomainError("grid function length does not match grid size")
        return np.sum(self.weights * values, axis=0)


def gauss_gegenbauer(m: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes/weights for the weight (1-x^2)^alpha on [-1, 1].

    Golub-Welsch on the symmetric Jacobi matrix.  alpha = 0 recovers
    Gauss-Legendre; on S^n the polar volume element needs alpha = (n-2)/2.
    """
    if m < 1:
        raise DomainError("need at least one quadrature node")
    k = np.arange(1, m)
    a = alpha
    num = 4.0 * k * (k + a) * (k + a) * (k + 2 * a)
    den = (2 * k + 2 * a) ** 2 * (2 * k + 2 * a + 1) * (2 * k + 2 * a - 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        bsq = num / den
    if m > 1:
        bsq[0] = 1.0 / (2.0 * a + 3.0)  # moment ratio mu_2/mu_0; the general
        # expression is 0/0 at k = 1 for the Chebyshev case a = -1/2
    offdiag = np.sqrt(bsq)
    jac = np.diag(offdiag, 1) + np.diag(offdiag, -1)
    nodes, vecs = np.linalg.eigh(jac)
    mu0 = math.sqrt(math.pi) * math.gamma(a + 1.0) / math.gamma(a + 1.5)
    weights = mu0 * vecs[0, :] ** 2
    return nodes, weights


def zonal_grid(n: int, size: int, pole_levels: int = 0) -> QuadratureGrid:
    """Zonal quadrature on S^n: Gauss nodes in cos(phi) with the
    sin^{n-1}(phi) volume element folded into the weights.

    ``pole_levels > 0`` appends geometrically graded segments near both
    poles via the substitution phi = exp(-s), with s ranging up to
    2**pole_levels; these resolve integrands with pole singularities.
    """
    surf = sphere_volume(n - 1)
    if pole_levels <= 0:
        x, w = gauss_gegenbauer(size, (n - 2) / 2.0)
        phi = np.arccos(x)[::-1]
        weights = (w * surf)[::-1].copy()
        return QuadratureGrid(ModelManifold(SPHERE_ZONAL, n), phi, weights)
    # split rule: smooth bulk away from the poles, log-graded caps
    phi_c = 0.1
    s_lo, s_hi = -math.log(phi_c), float(2 ** pole_levels)
    if s_hi <= s_lo:
        raise ResolutionError("pole grading level too small for the cap cut")
    phi_b, w_b = _panel_gauss(phi_c, math.pi - phi_c, max(8, size // 8), 8)
    w_b = w_b * np.sin(phi_b) ** (n - 1) * surf
    sp, swp = _panel_gauss(s_lo, s_hi, max(8, int(math.ceil(s_hi - s_lo))), 8)
    phi_seg = np.exp(-sp)
    # d(phi) = -exp(-s) ds; volume element sin^{n-1}(phi) * vol(S^{n-1})
    w_seg = swp * phi_seg * np.sin(phi_seg) ** (n - 1) * surf
    # the mirrored cap pi - exp(-s) is not representable in double
    # precision beyond s ~ 35; drop those (negligible-weight) nodes
    mirror = phi_seg > 4e-15
    phi = np.concatenate([phi_seg, phi_b, np.pi - phi_seg[mirror]])
    weights = np.concatenate([w_seg, w_b, w_seg[mirror]])
    order = np.argsort(phi)
    return QuadratureGrid(ModelManifold(SPHERE_ZONAL, n), phi[order], weights[order],
                          pole_refined=True)


def _panel_gauss(a: float, b: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule with ``panels`` equal panels on [a, b]."""
    x0, w0 = gauss_gegenbauer(order, 0.0)
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = (hi - lo) / 2.0
        xs.append((lo + hi) / 2.0 + half * x0)
        ws.append(half * w0)
    return np.concatenate(xs), np.concatenate(ws)


def full_sphere_grid(size_phi: int, size_theta: int | None = None) -> QuadratureGrid:
    """Product quadrature on the full S^2: Gauss in cos(phi), trapezoid in theta."""
    if size_theta is None:
        size_theta = 2 * size_phi
    x, w = gauss_gegenbauer(size_phi, 0.0)
    phi = np.arccos(x)[::-1]
    wphi = w[::-1]
    theta = 2.0 * math.pi * np.arange(size_theta) / size_theta
    pp, tt = np.meshgrid(phi, theta, indexing="ij")
    nodes = np.column_stack([pp.ravel(), tt.ravel()])
    weights = np.repeat(wphi, size_theta) * (2.0 * math.pi / size_theta)
    return QuadratureGrid(ModelManifold(SPHERE_FULL_2D, 2), nodes, weights)


def torus_grid(n: int, size: int) -> QuadratureGrid:
    """Uniform (spectrally exact) trapezoid grid on [0, 2pi)^n."""
    axis = 2.0 * math.pi * np.arange(size) / size
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    nodes = np.column_stack([m.ravel() for m in mesh])
    weights = np.full(nodes.shape[0], (2.0 * math.pi / size) ** n)
    return QuadratureGrid(ModelManifold(TORUS, n), nodes, weights)


def lp_norm(grid: QuadratureGrid, f: np.ndarray, p: float) -> float:
    """L^p norm of a grid function; p = inf gives the grid sup norm."""
    f = np.asarray(f)
    if f.shape[0] != grid.size:
        raise DomainError("grid function length does not match grid size")
    if math.isinf(p):
        return float(np.max(np.abs(f)))
    if p < 1:
        raise DomainError(f"p must be >= 1 or inf, got {p}")
    return float(np.sum(grid.weights * np.abs(f) ** p) ** (1.0 / p))


def inner_product(grid: QuadratureGrid, f: np.ndarray, g: np.ndarray) -> complex:
    """Quadrature inner product <f, g> = sum w_i f_i conj(g_i)."""
    f, g = np.asarray(f), np.asarray(g)
    if f.shape[0] != grid.size or g.shape[0] != grid.size:
        raise DomainError("grid function length does not match grid size")
    val = np.sum(grid.weights * f * np.conjugate(g))
    return complex(val) if np.iscomplexobj(f) or np.iscomplexobj(g) else float(val)


def _gegenbauer_table(kmax: int, lam: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Values and first two derivatives of C_k^(lam)(x), k = 0..kmax.

    Three-term recurrence, differentiated twice; stable for the degrees
    used here (k <= ~512, lam <= 5/2).
    """
    npts = x.shape[0]
    c = np.zeros((kmax + 1, npts))
    d1 = np.zeros_like(c)
    d2 = np.zeros_like(c)
    c[0] = 1.0
    if kmax >= 1:
        c[1] = 2.0 * lam * x
        d1[1] = 2.0 * lam
    for k in range(2, kmax + 1):
        a = 2.0 * (k + lam - 1.0) / k
        b = (k + 2.0 * lam - 2.0) / k
        c[k] = a * x * c[k - 1] - b * c[k - 2]
        d1[k] = a * (c[k - 1] + x * d1[k - 1]) - b * d1[k - 2]
        d2[k] = a * (2.0 * d1[k - 1] + x * d2[k - 1]) - b * d2[k - 2]
    return c, d1, d2


class Basis:
    """Truncated Laplace eigenbasis on a model manifold.

    Attributes
    ----------
    freqs : (J,) frequencies lambda_j = sqrt(eigenvalue), ascending
    degrees : (J,) integer degree k_j (lattice-norm index on the torus)
    values : (N, J) basis values on the grid, orthonormal under the weights
    """

    def __init__(self, manifold, K, grid, freqs, degrees, values, mode_labels):
        self.manifold = manifold
        self.K = K
        self.grid = grid
        self.freqs = freqs
        self.degrees = degrees
        self.values = values
        self.mode_labels = mode_labels

    @property
    def size(self) -> int:
        return self.freqs.shape[0]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gram_matrix(self) -> np.ndarray:
        wv = self.values * self.grid.weights[:, None]
        return self.values.T @ wv

    def project(self, f: np.ndarray) -> np.ndarray:
        """Coefficients <f, e_j> of a grid function."""
        f = np.asarray(f)
        if f.shape[0] != self.grid.size:
            raise DomainError("grid function length does not match grid size")
        return self.values.T @ (self.grid.weights * f)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return self.values @ np.asarray(coeffs)

    def metadata(self) -> dict:
        return {
            "kind": self.manifold.kind,
            "n": self.manifold.n,
            "K": self.K,
            "modes": [
                {"j": j, "degree": int(self.degrees[j]), "freq": float(self.freqs[j]),
                 "label": self.mode_labels[j]}
                for j in range(self.size)
            ],
        }


class ZonalSphereBasis(Basis):
    """Zonal (Gegenbauer/Legendre) eigenbasis on S^n, degrees 0..K."""

    def __init__(self, n: int, K: int, grid: QuadratureGrid):
        if grid.manifold.kind != SPHERE_ZONAL or grid.manifold.n != n:
            raise DomainError("grid does not match requested zonal sphere")
        self.lam_geg = (n - 1) / 2.0
        x = np.cos(grid.nodes)
        table, _, _ = _gegenbauer_table(K, self.lam_geg, x)
        norms = np.sqrt(np.sum(grid.weights * table ** 2, axis=1))
        if np.any(norms <= 0) or not np.all(np.isfinite(norms)):
            raise ResolutionError(f"grid of {grid.size} nodes cannot normalize degree {K}; "
                                  f"need at least {K + 8} Gauss nodes")
        self._norms = norms
        values = (table / norms[:, None]).T
        degrees = np.arange(K + 1)
        freqs = np.sqrt(degrees * (degrees + n - 1.0))
        labels = [f"zonal-k{k}" for k in degrees]
        super().__init__(grid.manifold, K, grid, freqs, degrees, values, labels)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        x = np.cos(np.atleast_1d(np.asarray(points, dtype=float)))
        table, _, _ = _gegenbauer_table(self.K, self.lam_geg, x)
        return (table / self._norms[:, None]).T

    def laplacian_values(self, points: np.ndarray) -> np.ndarray:
        """Delta_g e_j at the given polar angles, via exact differentiation
        of the polynomial representation: (1-x^2) f'' - n x f' in x = cos(phi)."""
        x = np.cos(np.atleast_1d(np.asarray(points, dtype=float)))
        table, d1, d2 = _gegenbauer_table(self.K, self.lam_geg, x)
        lap = (1.0 - x ** 2) * d2 - self.manifold.n * x * d1
        return (lap / self._norms[:, None]).T


def _normalized_assoc_legendre(K: int, m: int, phi: np.ndarray) -> np.ndarray:
    """Fully normalized P~_k^m(cos phi), k = m..K, so that the real harmonics
    built from them are orthonormal on S^2."""
    ct, st = np.cos(phi), np.sin(phi)
    pmm = np.full_like(ct, 1.0 / math.sqrt(4.0 * math.pi))
    for mm in range(1, m + 1):
        pmm = st * math.sqrt((2.0 * mm + 1.0) / (2.0 * mm)) * pmm
    rows = [pmm]
    if K > m:
        rows.append(math.sqrt(2.0 * m + 3.0) * ct * pmm)
    for k in range(m + 2, K + 1):
        a = math.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
        b = math.sqrt(((k - 1.0) ** 2 - m * m) / (4.0 * (k - 1.0) ** 2 - 1.0))
        rows.append(a * (ct * rows[-1] - b * rows[-2]))
    return np.array(rows)


class FullSphereBasis(Basis):
    """Real spherical harmonics on S^2, degrees 0..K, all orders."""

    def __init__(self, K: int, grid: QuadratureGrid):
        if grid.manifold.kind != SPHERE_FULL_2D:
            raise DomainError("grid does not match the full S^2 manifold")
        modes = []
        for k in range(K + 1):
            modes.append((k, 0, "c"))
            for m in range(1, k + 1):
                modes.append((k, m, "c"))
                modes.append((k, m, "s"))
        degrees = np.array([k for k, _, _ in modes])
        freqs = np.sqrt(degrees * (degrees + 1.0))
        order = np.argsort(freqs, kind="stable")
        self.modes = [modes[i] for i in order]
        degrees, freqs = degrees[order], freqs[order]
        values = self._eval_modes(grid.nodes)
        labels = [f"Y{k}{'c' if pr == 'c' else 's'}{m}" for k, m, pr in self.modes]
        super().__init__(grid.manifold, K, grid, freqs, degrees, values, labels)

    def _eval_modes(self, points: np.ndarray) -> np.ndarray:
        phi, theta = points[:, 0], points[:, 1]
        K = max(k for k, _, _ in self.modes)
        ptab = {m: _normalized_assoc_legendre(K, m, phi) for m in range(K + 1)}
        cols = []
        for k, m, parity in self.modes:
            radial = ptab[m][k - m]
            if m == 0:
                cols.append(radial)
            elif parity == "c":
                cols.append(math.sqrt(2.0) * radial * np.cos(m * theta))
            else:
                cols.append(math.sqrt(2.0) * radial * np.sin(m * theta))
        return np.column_stack(cols)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self._eval_modes(np.atleast_2d(np.asarray(points, dtype=float)))


class TorusBasis(Basis):
    """Real Fourier basis on [0, 2pi)^n for lattice vectors with |m| <= K."""

    def __init__(self, n: int, K: int, grid: QuadratureGrid):
        if grid.manifold.kind != TORUS or grid.manifold.n != n:
            raise DomainError("grid does not match requested torus")
        vecs = self._half_lattice(n, K)
        modes = [((0,) * n, "c")]
        for m in vecs:
            modes.append((m, "c"))
            modes.append((m, "s"))
        freqs = np.array([math.sqrt(sum(c * c for c in m)) for m, _ in modes])
        order = np.argsort(freqs, kind="stable")
        self.modes = [modes[i] for i in order]
        freqs = freqs[order]
        degrees = np.rint(freqs ** 2).astype(int)
        self._vol = grid.manifold.volume
        values = self._eval_modes(grid.nodes)
        labels = [f"m{list(m)}{parity}" for m, parity in self.modes]
        super().__init__(grid.manifold, K, grid, freqs, degrees, values, labels)

    @staticmethod
    def _half_lattice(n: int, K: int) -> list[tuple[int, ...]]:
        rng = range(-K, K + 1)
        out = []
        grids = np.meshgrid(*([list(rng)] * n), indexing="ij")
        lattice = np.column_stack([g.ravel() for g in grids])
        norms2 = np.sum(lattice ** 2, axis=1)
        for vec, n2 in zip(lattice, norms2):
            if n2 == 0 or n2 > K * K:
                continue
            tup = tuple(int(c) for c in vec)
            # one representative per {m, -m} pair: first nonzero entry positive
            lead = next(c for c in tup if c != 0)
            if lead > 0:
                out.append(tup)
        out.sort()
        return out

    def _eval_modes(self, points: np.ndarray) -> np.ndarray:
        vol = self._vol
        cols = []
        for m, parity in self.modes:
            phase = points @ np.asarray(m, dtype=float)
            if all(c == 0 for c in m):
                cols.append(np.full(points.shape[0], 1.0 / math.sqrt(vol)))
            elif parity == "c":
                cols.append(np.cos(phase) * math.sqrt(2.0 / vol))
            else:
                cols.append(np.sin(phase) * math.sqrt(2.0 / vol))
        return np.column_stack(cols)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self._eval_modes(np.atleast_2d(np.asarray(points, dtype=float)))


def default_grid(manifold: ModelManifold, K: int, pole_levels: int = 0) -> QuadratureGrid:
    """Grid sized for degree-2K Gauss exactness on the given manifold."""
    if manifold.kind == SPHERE_ZONAL:
        return zonal_grid(manifold.n, 2 * K + 16, pole_levels=pole_levels)
    if manifold.kind == SPHERE_FULL_2D:
        return full_sphere_grid(K + 9, 2 * K + 4)
    return torus_grid(manifold.n, 2 * K + 2)


def build_basis(manifold: ModelManifold, K: int, grid: QuadratureGrid | None = None) -> Basis:
    """Build the truncated eigenbasis of -Delta_g on the manifold."""
    if K < 0:
        raise DomainError("truncation K must be >= 0")
    if grid is None:
        grid = default_grid(manifold, K)
    if manifold.kind == SPHERE_ZONAL:
        if grid.size < 2 * K + 1:
            raise ResolutionError(f"grid of {grid.size} nodes cannot resolve degree {K}; "
                                  f"need at least {2 * K + 1} nodes")
        return ZonalSphereBasis(manifold.n, K, grid)
    if manifold.kind == SPHERE_FULL_2D:
        return FullSphereBasis(K, grid)
    return TorusBasis(manifold.n, K, grid)


def save_grid_function(path, grid: QuadratureGrid, values: np.ndarray) -> None:
    """CSV dump of a grid function: node coordinates, weight, value columns."""
    values = np.asarray(values)
    nodes = np.atleast_2d(grid.nodes.T).T
    ncoord = nodes.shape[1] if nodes.ndim == 2 else 1
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i}" for i in range(ncoord)] + ["weight", "value"])
        for i in range(grid.size):
            coords = [repr(float(c)) for c in np.atleast_1d(nodes[i])]
            writer.writerow(coords + [repr(float(grid.weights[i])), repr(complex(values[i]))
                                      if np.iscomplexobj(values) else repr(float(values[i]))])


def save_basis_metadata(path, basis: Basis) -> None:
    with open(path, "w") as fh:
        json.dump(basis.metadata(), fh, indent=2)
