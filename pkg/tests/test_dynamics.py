import math

import numpy as np
import pytest

from qlab import dynamics, estimators, geometry, operator_core
from qlab.errors import ConfigError, DomainError, ResolutionError


def test_heat_requires_positive_time(s2_free_24):
    with pytest.raises(DomainError):
        dynamics.heat(s2_free_24, 0.0)
    with pytest.raises(DomainError):
        dynamics.heat_kernel_sup(s2_free_24, -1.0)


def test_heat_kernel_sup_decreasing(s2_free_24):
    sups = [dynamics.heat_kernel_sup(s2_free_24, t) for t in (0.05, 0.1, 0.2)]
    assert sups[0] > sups[1] > sups[2]


def test_wave_initial_data(s2_free_24):
    f0 = s2_free_24.node_values()[:, 4] + 0.3 * s2_free_24.node_values()[:, 2]
    f1 = s2_free_24.node_values()[:, 6]
    sol = dynamics.WaveSolution.from_data(s2_free_24, f0, f1)
    assert np.allclose(sol.values(0.0), f0, atol=1e-11)
    vel0 = s2_free_24.synthesize(sol.velocity_coefficients(0.0))
    assert np.allclose(vel0, f1, atol=1e-11)


def test_wave_energy_conserved(s2_free_24):
    f0 = np.sum(s2_free_24.node_values()[:, :9], axis=1)
    sol = dynamics.WaveSolution.from_data(s2_free_24, f0, f0)
    e0 = sol.energy(0.0)
    for t in (0.1, 0.5, 1.3):
        assert sol.energy(t) == pytest.approx(e0, rel=1e-12)


def test_wave_cosine_double_angle(s2_free_24):
    """cos(2tP) = 2 cos(tP)^2 - 1 as multipliers."""
    t = 0.37
    f = np.sum(s2_free_24.node_values()[:, :7], axis=1)
    c_t = dynamics.wave_cosine(s2_free_24, t)
    c_2t = dynamics.wave_cosine(s2_free_24, 2 * t)
    lhs = c_2t.transform(f)
    rhs = 2.0 * c_t.transform(c_t.transform(f)) - f
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_cone_leakage_zero_time(s2_free_24):
    assert dynamics.cone_leakage(s2_free_24, 0.0) == 0.0


def test_cone_leakage_guards(s2_free_24):
    with pytest.raises(DomainError):
        dynamics.cone_leakage(s2_free_24, 2.0)
    with pytest.raises(ResolutionError):
        dynamics.cone_leakage(s2_free_24, 0.5, cutoff=1e6)
    with pytest.raises(ResolutionError):
        dynamics.cone_leakage(s2_free_24, 0.5, cutoff=1.0)


def test_bochner_riesz_delta_zero_is_sharp_cutoff(s2_free_24):
    lam = 10.5
    br = dynamics.bochner_riesz(s2_free_24, lam, 0.0)
    chi = operator_core.band_projector(s2_free_24, -1.0, lam)
    f = np.sum(s2_free_24.node_values(), axis=1)
    assert np.allclose(br.transform(f),
                       operator_core.multiplier(s2_free_24, chi, f), atol=1e-10)


def test_br_l1_row_norm_is_exact_for_projector(s2_free_24):
    """delta = 0, lam below the first nonzero frequency: the kernel is the
    constant mode, |K| = 1/(4 pi), L^1 row integral = 1."""
    val = dynamics.br_l1_row_norm(s2_free_24, 0.5, 0.0)
    assert val == pytest.approx(1.0, rel=1e-12)


def test_square_function_single_mode_plateau(s2_free_24):
    """A single mode inside a Littlewood-Paley plateau passes through one
    window: ||Sf||_2 = ||f||_2."""
    i = 16  # frequency ~ 16.5, inside the beta_4 plateau [14.4, 19.2]
    f = s2_free_24.node_values()[:, i]
    sf = dynamics.square_function(s2_free_24, f)
    grid = s2_free_24.basis.grid
    assert geometry.lp_norm(grid, sf, 2.0) == pytest.approx(
        geometry.lp_norm(grid, f, 2.0), rel=1e-10)


def test_square_function_partition_guard(s2_free_24):
    bad = [(lambda fr, j=j: np.full_like(np.asarray(fr, dtype=float), 0.4))
           for j in range(3)]
    f = s2_free_24.node_values()[:, 3]
    with pytest.raises(ConfigError):
        dynamics.square_function(s2_free_24, f, family=bad)


def test_battery_presets(s2_free_24):
    for preset in ("zonal-ladder", "point-concentrated", "random-band"):
        battery = dynamics.test_battery(s2_free_24, preset)
        assert battery
    with pytest.raises(ConfigError):
        dynamics.test_battery(s2_free_24, "nonsense")


def test_random_band_battery_seed_determinism(s2_free_24):
    a = dynamics.test_battery(s2_free_24, "random-band", seed=5)
    b = dynamics.test_battery(s2_free_24, "random-band", seed=5)
    for (la, fa), (lb, fb) in zip(a, b):
        assert la == lb
        assert np.array_equal(fa, fb)


def test_strichartz_constant_mode_closed_form(s2_free_24):
    """Constant data on the unit time window: the wave solution is the
    constant itself, so the ratio collapses to vol^{1/p_c - 1/2}."""
    f = np.ones(s2_free_24.basis.grid.size)
    ratio = dynamics.strichartz_ratio(s2_free_24, f)
    pc = estimators.p_critical(2)
    vol = geometry.sphere_volume(2)
    assert ratio == pytest.approx(vol ** (1 / pc - 0.5), rel=1e-10)


def test_besov_check_identity_symbol():
    val = dynamics.besov_check(lambda s: np.ones_like(np.asarray(s, float)),
                               1.0, lam_max=64.0, samples=2048)
    assert np.isfinite(val) and val > 0


def test_besov_check_sharp_cutoff_grows():
    """Negative control: a discontinuous symbol has H^1 localization norms
    that grow without bound as the sampling refines."""
    cut = lambda s: (np.asarray(s, float) <= 1.0).astype(float)
    vals = [dynamics.besov_check(cut, 1.0, lam_max=64.0, samples=m)
            for m in (1024, 4096, 16384)]
    assert vals[0] < vals[1] < vals[2]
