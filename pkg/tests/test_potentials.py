import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlab import geometry, potentials
from qlab.errors import DomainError


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_counterexample_eigenfunction_identity(n):
    """(-Delta + V) f = 0, with the Laplacian from an independent
    closed-form differentiation of f (no reuse of the V formula)."""
    phi = np.linspace(0.05, math.pi - 0.05, 400)
    f = potentials.counterexample_eigenfunction(n, phi)
    lap = potentials.counterexample_eigenfunction_laplacian(n, phi)
    V = potentials.counterexample(n).fn(phi)
    resid = np.abs(-lap + V * f)
    assert np.all(resid <= 1e-8 * (1.0 + np.abs(lap)))


def test_counterexample_pole_blowup():
    f = potentials.counterexample_eigenfunction(3, np.array([1e-3, 1e-6, 1e-9]))
    assert f[0] < f[1] < f[2]
    assert f[2] > 2 * f[0]


def test_counterexample_l2_finite():
    grid = geometry.zonal_grid(3, 256, pole_levels=6)
    f = potentials.counterexample_eigenfunction(3, grid.nodes)
    assert np.isfinite(geometry.lp_norm(grid, f, 2.0))


def test_expression_parser_matches_numpy():
    V = potentials.parse_zonal_expression("cos(phi) / sin(phi) + pi")
    phi = np.linspace(0.1, 3.0, 17)
    assert np.allclose(V(phi), np.cos(phi) / np.sin(phi) + math.pi)


@pytest.mark.parametrize("bad", [
    "__import__('os')", "phi.real", "lambda x: x", "open('x')",
    "sin(phi)[0]", "unknown(phi)",
])
def test_expression_parser_rejects(bad):
    with pytest.raises(DomainError):
        potentials.parse_zonal_expression(bad)


def test_kato_weight_forms():
    r = np.array([0.01, 0.1])
    assert np.allclose(potentials.kato_weight(2, r), -np.log(r))
    assert np.allclose(potentials.kato_weight(4, r), r ** -2)


@pytest.mark.parametrize("n,r", [(3, 0.05), (3, 0.1), (4, 0.05)])
def test_kato_modulus_flat_ball_oracle(n, r):
    """For V = 1 the modulus equals the flat-ball closed form up to O(r^2)
    curvature corrections."""
    got = potentials.kato_modulus(potentials.constant(1.0), r, n)
    oracle = potentials.flat_ball_kato_oracle(n, r)
    assert got == pytest.approx(oracle, rel=5 * r ** 2 + 1e-6)


def test_kato_report_counterexample_not_in_kato():
    rep = potentials.kato_report(potentials.counterexample(3), 3)
    assert rep.verdict == potentials.NOT_IN_KATO
    assert rep.stagnation_ratio > 0.3


def test_kato_report_truncated_in_kato():
    rep = potentials.kato_report(potentials.truncated_counterexample(3), 3)
    assert rep.verdict == potentials.IN_KATO


def test_lq_norm_divergence_detection():
    V = potentials.counterexample(3)
    finite = potentials.potential_lq_norm(V, 3, 1.5)
    assert not finite.divergent and np.isfinite(finite.value)
    divergent = potentials.potential_lq_norm(V, 3, 1.75)
    assert divergent.divergent and math.isinf(divergent.value)


def test_truncated_counterexample_is_bounded():
    V = potentials.truncated_counterexample(3)
    phi = np.linspace(1e-6, math.pi - 1e-6, 3000)
    vals = V.fn(phi)
    assert np.all(np.isfinite(vals))
    assert V.smooth_bound is not None
    assert np.max(np.abs(vals)) <= V.smooth_bound


@given(t=st.floats(min_value=-2.0, max_value=3.0))
@settings(max_examples=50, deadline=None)
def test_smoothstep_range_and_monotonicity(t):
    s = potentials._smoothstep(np.array([t, t + 1e-3]))
    assert 0.0 <= s[0] <= 1.0
    assert s[1] >= s[0] - 1e-12


def test_kato_modulus_domain_guard():
    with pytest.raises(DomainError):
        potentials.kato_modulus(potentials.constant(1.0), 2.0, 3)


def test_positivity_shift_zero_for_free():
    manifold = geometry.ModelManifold(geometry.SPHERE_ZONAL, 2)
    basis = geometry.build_basis(manifold, 8)
    assert potentials.positivity_shift(potentials.zero(), basis) == 1
    assert potentials.positivity_shift(potentials.constant(-5.0), basis) == 6
