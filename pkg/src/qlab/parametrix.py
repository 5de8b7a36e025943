"""Hadamard parametrix kernels in the flat model: modified Bessel functions
K_m of complex argument, the radial kernels F_nu(r, lambda), and the kernel
size/oscillation checks (small-r and large-r regimes, the n=2 L^6 bound,
and the oscillatory remainder scale probe).

Branch convention: z = -(lambda+i)^2 with sqrt(z) = 1 - i lambda, so the
Bessel argument sqrt(z) r always has positive real part.  The normalization
c_nu = 2^{-nu} (2 pi)^{-n/2} is anchored to the n=3, nu=0 closed form
F_0 = e^{i(lambda+i) r} / (4 pi r) and to the recursion
(-Delta - (lambda+i)^2) F_nu = nu F_{nu-1}.
"""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from . import estimators, geometry
from .errors import ConfigError, DomainError, NumericError

OVERLAP_BAND = (0.8, 1.25)
_STITCH_AT = 1.0


def bessel_k_integral(m: float, z: complex, tol: float = 1e-10,
                      max_doublings: int = 22) -> complex:
    """K_m(z) by trapezoid quadrature of int_0^inf e^{-z cosh t} cosh(mt) dt.

    The integrand is analytic and decays double-exponentially, so the
    trapezoid rule converges geometrically under node doubling; doubles
    until two successive values agree to ``tol`` relative.
    """
    z = complex(z)
    if z.real <= 0:
        raise DomainError("bessel_k needs Re z > 0")
    m = abs(float(m))
    t_max = max(10.0, 20.0 / math.sqrt(abs(z))) + m
    n_nodes = 64
    prev = None
    for _ in range(max_doublings):
        t = np.linspace(0.0, t_max, n_nodes + 1)
        ch = np.cosh(t)
        vals = np.exp(-z * ch) * np.cosh(m * t)
        h = t_max / n_nodes
        cur = h * (np.sum(vals) - 0.5 * (vals[0] + vals[-1]))
        if prev is not None and abs(cur - prev) <= tol * max(abs(cur), 1e-300):
            return complex(cur)
        prev = cur
        n_nodes *= 2
    raise NumericError("Bessel integral did not stabilize under doubling")


def bessel_k_asymptotic(m: float, z: complex, panels: int = 24) -> complex:
    """K_m(z) = sqrt(pi/2z) e^{-z} a_m(z) with the exact symbol

    a_m(z) = int_0^inf e^{-u} u^{m-1/2} (1 + u/2z)^{m-1/2} du / Gamma(m+1/2),

    evaluated after u = v^2 (removing the endpoint singularity for m < 1/2)
    by composite Gauss panels.  Exact representation, good for |z| >~ 1.
    """
    z = complex(z)
    if z.real <= 0:
        raise DomainError("bessel_k needs Re z > 0")
    m = abs(float(m))
    v, w = geometry._panel_gauss(0.0, 12.0, panels, 8)
    u = v ** 2
    integrand = np.exp(-u) * v ** (2.0 * m) * (1.0 + u / (2.0 * z)) ** (m - 0.5)
    a = 2.0 * np.sum(w * integrand) / math.gamma(m + 0.5)
    return complex(np.sqrt(math.pi / (2.0 * z)) * np.exp(-z) * a)


def bessel_k(m: float, z: complex) -> complex:
    """Modified Bessel function of the second kind, complex argument.

    Integral representation for |z| below the stitch point, exact
    asymptotic-symbol representation above; K_{-m} = K_m by construction.
    """
    z = complex(z)
    if z.real <= 0:
        raise DomainError("bessel_k needs Re z > 0")
    if abs(z) < _STITCH_AT:
        return bessel_k_integral(m, z)
    return bessel_k_asymptotic(m, z)


def c_nu(n: int, nu: int) -> float:
    """Normalization constants of the radial kernels, anchored to the n=3
    closed form and the first-order recursion."""
    return 2.0 ** (-nu) * (2.0 * math.pi) ** (-n / 2.0)


def f_nu(n: int, nu: int, r: float, lam: float) -> complex:
    """Radial parametrix kernel
    F_nu = c_nu r^{1+nu-n/2} (sqrt z)^{n/2-nu-1} K_{n/2-nu-1}(sqrt(z) r)."""
    if r <= 0:
        raise DomainError("radius must be positive")
    if lam < 1:
        raise DomainError("lambda must be at least 1")
    if nu < 0:
        raise DomainError("order nu must be nonnegative")
    w = complex(1.0, -lam)  # sqrt(z) for z = -(lambda+i)^2, Re > 0
    order = n / 2.0 - nu - 1.0
    return c_nu(n, nu) * r ** (-n / 2.0 + nu + 1.0) * w ** order \
        * bessel_k(order, w * r)


def f0_closed_form_3d(r: float, lam: float) -> complex:
    """n=3 oracle: F_0(r, lambda) = e^{i (lambda + i) r} / (4 pi r)."""
    return np.exp(1j * (lam + 1j) * r) / (4.0 * math.pi * r)


def recursion_residual(n: int, lam: float, rs=None, h: float | None = None) -> float:
    """Max relative residual of (-Delta_radial - (lambda+i)^2) F_1 = F_0.

    The radial Laplacian f'' + (n-1)/r f' is applied by central finite
    differences; the step is tied to the oscillation scale 1/lambda.
    """
    if rs is None:
        rs = np.linspace(0.1, 1.0, 19)
    if h is None:
        h = 1e-4 / max(1.0, lam / 5.0)
    zsq = complex(lam, 1.0) ** 2
    worst = 0.0
    for r in np.asarray(rs, dtype=float):
        fm, f0v, fp = (f_nu(n, 1, r + s, lam) for s in (-h, 0.0, h))
        d2 = (fp - 2.0 * f0v + fm) / h ** 2
        d1 = (fp - fm) / (2.0 * h)
        lhs = -(d2 + (n - 1) / r * d1) - zsq * f0v
        rhs = f_nu(n, 0, r, lam)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst


def small_r_slope(n: int, lam: float, decades: float = 1.0) -> estimators.PowerFit:
    """Local log-log slope of |F_0(r)| for r below 1/lambda (target 2 - n)."""
    rs = np.geomspace(0.02 / lam, 0.2 / lam, 9)
    vals = [abs(f_nu(n, 0, float(r), lam)) for r in rs]
    return estimators.fit_exponent(rs, vals)


def lambda_slope(n: int, r: float, lams) -> estimators.PowerFit:
    """log-log slope of |F_0| against lambda at fixed r (target (n-3)/2)."""
    vals = [abs(f_nu(n, 0, r, float(lam))) for lam in lams]
    return estimators.fit_exponent(lams, vals)


def kernel_table(n: int, nu: int, rs, lams, path: str | None = None):
    """(r, lambda, Re F, Im F) table, optionally dumped as CSV."""
    rows = []
    for lam in lams:
        for r in rs:
            val = f_nu(n, nu, float(r), float(lam))
            rows.append([float(r), float(lam), val.real, val.imag])
    if path is not None:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["r", "lambda", "re_f", "im_f"])
        for row in rows:
            writer.writerow([repr(v) for v in row])
        estimators.atomic_write_text(path, buf.getvalue())
    return rows


# ---------------------------------------------------------------------------
# the n=2 L^6 kernel bound


def t_lambda_model(lam: float, d):
    """Two-regime flat model of |T_lambda| in n=2: |log(lam d / 2)| inside
    d <= 1/lam, matched to log(2) (lam d)^{-1/2} outside."""
    d = np.asarray(d, dtype=float)
    u = lam * d
    inner = np.abs(np.log(np.maximum(u, 1e-300) / 2.0))
    outer = math.log(2.0) / np.sqrt(np.maximum(u, 1e-300))
    return np.where(u <= 1.0, inner, outer)


def kernel_l6_value(lam: float, delta: float = 0.5) -> float:
    """(int_{d <= delta} |T_lambda|^6 dx)^{1/6} by log-graded radial quadrature."""
    s, w = geometry._panel_gauss(math.log(delta) - 30.0, math.log(delta), 40, 8)
    d = np.exp(s)
    wd = w * d
    integrand = t_lambda_model(lam, d) ** 6 * 2.0 * math.pi * d
    return float(np.sum(wd * integrand)) ** (1.0 / 6.0)


def kernel_l6_check(lams, delta: float = 0.5, tol: float = 0.05,
                    name: str = "parametrix-l6") -> estimators.ExperimentReport:
    lams = np.asarray(lams, dtype=float)
    if lams.size < 4:
        raise ConfigError("need at least 4 lambda points")
    rows = [[lam, kernel_l6_value(lam, delta)] for lam in lams]
    fit = estimators.fit_exponent(lams, [r[1] for r in rows])
    summary = estimators.slope_verdict(fit, -1.0 / 3.0, tol)
    summary["delta"] = delta
    return estimators.ExperimentReport(name=name,
                                       params={"lams": lams.tolist(), "delta": delta},
                                       columns=["lambda", "l6_norm"], rows=rows,
                                       summary=summary)


# ---------------------------------------------------------------------------
# oscillatory remainder scale probe


def annulus_bump(d, delta: float) -> np.ndarray:
    """Smooth bump in the geodesic distance, supported in [delta/2, delta]."""
    from .potentials import _smoothstep
    d = np.asarray(d, dtype=float)
    t = (d - delta / 2.0) / (delta / 2.0)
    return _smoothstep(4.0 * t) * _smoothstep(4.0 * (1.0 - t))


def remainder_operator_norm(lam: float, delta: float = 0.5, with_phase: bool = True,
                            n: int = 2) -> float:
    """L^2 -> L^2 norm of the model remainder kernel
    r_lambda(x, y) = lam^{(n-1)/2} e^{-i lam d(x,y)} c(d(x,y)) on S^2.

    Distance kernels diagonalize over spherical harmonics (Funk-Hecke), so
    the norm is the max over degrees of |2 pi int k(theta) P_k(cos theta)
    sin(theta) d(theta)|, computed with phase-resolving quadrature.
    """
    if n != 2:
        raise DomainError("the remainder probe is implemented on S^2")
    panels = max(24, int(math.ceil(lam)))  # >= 6 nodes per wavelength
    th, w = geometry._panel_gauss(0.0, math.pi, panels, 8)
    amp = lam ** ((n - 1) / 2.0) * annulus_bump(th, delta)
    kern = amp * (np.exp(-1j * lam * th) if with_phase else 1.0)
    k_max = int(math.ceil(3.0 * lam)) + 16
    x = np.cos(th)
    # Legendre recurrence across all quadrature nodes
    best = 0.0
    p_prev = np.ones_like(x)
    p_cur = x.copy()
    base = 2.0 * math.pi * w * np.sin(th) * kern
    best = abs(np.sum(base * p_prev))
    best = max(best, abs(np.sum(base * p_cur)))
    for k in range(2, k_max + 1):
        p_next = ((2 * k - 1) * x * p_cur - (k - 1) * p_prev) / k
        best = max(best, abs(np.sum(base * p_next)))
        p_prev, p_cur = p_cur, p_next
    return float(best)


def remainder_scale_check(lams, n: int = 2, delta: float = 0.5,
                          name: str = "parametrix-remainder") -> estimators.ExperimentReport:
    """Slope of the model remainder norm against lambda, with the
    phase-removed control (exact slope (n-1)/2) alongside."""
    lams = np.asarray(lams, dtype=float)
    if lams.size < 4:
        raise ConfigError("need at least 4 lambda points")
    rows = []
    with_p, without_p = [], []
    for lam in lams:
        a = remainder_operator_norm(lam, delta, with_phase=True, n=n)
        b = remainder_operator_norm(lam, delta, with_phase=False, n=n)
        rows.append([lam, a, b])
        with_p.append(a)
        without_p.append(b)
    fit = estimators.fit_exponent(lams, with_p)
    fit0 = estimators.fit_exponent(lams, without_p)
    target0 = (n - 1) / 2.0
    cancel = fit.slope < fit0.slope - 0.1
    verdict = "pass" if (abs(fit0.slope - target0) < 0.02 and cancel) else "fail"
    return estimators.ExperimentReport(
        name=name, params={"n": n, "delta": delta, "lams": lams.tolist()},
        columns=["lambda", "norm", "norm_no_phase"], rows=rows,
        summary={"slope": fit.slope, "residual": fit.residual,
                 "slope_no_phase": fit0.slope, "target_no_phase": target0,
                 "cancellation_margin": fit0.slope - fit.slope,
                 "verdict": verdict})
