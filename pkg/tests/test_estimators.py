import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlab import estimators, geometry, operator_core
from qlab.errors import ConfigError, DomainError, ResolutionError


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_sigma_anchor_values(n):
    pc = estimators.p_critical(n)
    assert estimators.sigma(2.0, n) == 0.0
    # machine precision at the kink: bit-exact whenever p_c is itself a
    # representable float (n = 2, 3, 5), and within 4 ulps otherwise (the
    # rounding of p_c = 2(n+1)/(n-1) perturbs the kink identity by an ulp)
    if n in (2, 3, 5):
        assert estimators.sigma(pc, n) == 1.0 / pc
    else:
        assert abs(estimators.sigma(pc, n) - 1.0 / pc) <= 4 * math.ulp(1.0 / pc)
    assert estimators.sigma(math.inf, n) == (n - 1) / 2.0


def test_p_critical_values():
    assert estimators.p_critical(3) == 4.0
    assert estimators.p_critical(5) == 3.0
    assert estimators.p_critical(2) == 6.0


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sigma_nondecreasing(n):
    ps = np.linspace(2.0, 40.0, 200)
    vals = [estimators.sigma(p, n) for p in ps]
    assert np.all(np.diff(vals) >= -1e-15)


def test_br_delta_threshold():
    assert estimators.br_delta(2.0, 2) == 0.0
    assert estimators.br_delta(1.0, 2) == 0.5
    assert estimators.br_delta(math.inf, 3) == 1.0


def test_exponent_table_invariants():
    table = estimators.exponent_table(3)
    assert table.p_c == 4.0
    assert np.all(np.isfinite(table.sigmas[:-1]))


def test_fit_exponent_exact_power_law():
    lams = np.geomspace(2.0, 64.0, 8)
    fit = estimators.fit_exponent(lams, 3.0 * lams ** -1.5)
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.residual < 1e-12


def test_fit_exponent_guards():
    with pytest.raises(DomainError):
        estimators.fit_exponent([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        estimators.fit_exponent([1, 2, 3, 4], [1, -1, 1, 1])


@given(c=st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=20, deadline=None)
def test_quasimode_ratio_scale_invariant(c, s2_free_24):
    u = s2_free_24.node_values()[:, 9]
    lam = float(s2_free_24.frequencies[9])
    r1 = estimators.quasimode_ratio(s2_free_24, u, lam, 6.0)
    r2 = estimators.quasimode_ratio(s2_free_24, c * u, lam, 6.0)
    assert r2 == pytest.approx(r1, rel=1e-9)


def test_quasimode_ratio_eigenfunction_closed_form(s2_free_24):
    """On an exact eigenfunction the denominator collapses to the one-mode
    spectral calculus value."""
    i = 12
    u = s2_free_24.node_values()[:, i]
    lam = float(s2_free_24.frequencies[i])
    got = estimators.quasimode_ratio(s2_free_24, u, lam, 6.0)
    s = estimators.sigma(6.0, 2)
    resid = abs(s2_free_24.eigenvalues[i] - (lam + 1j) ** 2)
    denom = lam ** (s - 1) * resid + lam ** s
    norm_p = geometry.lp_norm(s2_free_24.basis.grid, u, 6.0)
    assert got == pytest.approx(norm_p / denom, rel=1e-10)


def test_projector_norm_p2_and_bounds(s2_free_24):
    res = estimators.projector_norm(s2_free_24, 10.0, 11.0, 2.0)
    assert res.lower == pytest.approx(1.0, abs=1e-12)
    res6 = estimators.projector_norm(s2_free_24, 10.0, 11.0, 6.0)
    assert res6.lower <= res6.upper + 1e-12


def test_projector_norm_sup_zonal_closed_form(s2_free_24):
    """Rank-one band: the 2->inf norm is the sup of the normalized zonal
    harmonic, attained at the pole: sqrt((2k+1)/(4 pi))."""
    k = 10
    lam = math.sqrt(k * (k + 1))
    res = estimators.projector_norm(s2_free_24, lam - 0.1, lam + 0.1, math.inf)
    oracle = math.sqrt((2 * k + 1) / (4 * math.pi))
    assert res.lower == pytest.approx(oracle, rel=1e-12)
    assert res.lower == pytest.approx(res.upper, rel=1e-12)


def test_local_weyl_constant_mode(s2_free_24):
    val = estimators.local_weyl(s2_free_24, 0.7, 0.5)
    assert val == pytest.approx(1.0 / (4 * math.pi), rel=1e-12)


def test_local_weyl_truncation_guard(s2_free_24):
    with pytest.raises(ResolutionError):
        estimators.local_weyl(s2_free_24, 0.0, 1e6)


def test_harmonic_dimension_counts():
    # dim of degree-l spherical harmonics: 2l+1 on S^2, (l+1)^2 on S^3
    assert estimators.harmonic_dimension(2, 5) == 11
    assert estimators.harmonic_dimension(3, 5) == 36


def test_divergent_quasimode_guards():
    with pytest.raises(DomainError):
        estimators.divergent_quasimode(3, 0.25)
    with pytest.raises(DomainError):
        estimators.divergent_quasimode(4, 0.75)


def test_divergent_quasimode_n5_partial_sums_bounded():
    """For n = 5 the ladder terms grow like 2^{k/2}: the sum diverges even
    faster; growth over the window must exceed the n=4 growth."""
    r4 = estimators.divergent_quasimode(4, 0.25)
    r5 = estimators.divergent_quasimode(5, 0.25)
    assert r5.growth > r4.growth > 0.0


def test_sobolev_dual_pair():
    assert estimators.sobolev_dual_pair(3) == (1.2, 6.0)
    with pytest.raises(DomainError):
        estimators.sobolev_dual_pair(2)


def test_resolvent_probe_wrong_p_rejected():
    with pytest.raises(ConfigError):
        estimators.uniform_resolvent_probe(3, (4.0, 6.0, 8.0, 12.0), p=1.5)
    with pytest.raises(ConfigError):
        estimators.uniform_resolvent_probe(3, (4.0, 6.0))
