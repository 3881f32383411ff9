import math

import numpy as np
import pytest

from artifact import (
    RadialPotential,
    balance_defect,
    build_metric,
    fs_map,
    fs_map_profile,
    hilb_map,
    liouville_approx_SLk,
    normalize_potential,
    radial_rule,
    t_iteration,
)
from artifact.balanced import BasisMetric, project_potential
from artifact.errors import NotConverged, ProjectionTail
from artifact.functionals import S_j
from artifact.profiles import Profile
from artifact.quadrature import required_order

from conftest import random_metric

S_DENSE = np.linspace(0.0, 1.0, 401)


def test_hilbert_map_fs_level_one(fs_metric):
    H = hilb_map(fs_metric(1), 1)
    assert np.abs(H.eta - 1.0).max() < 1e-13


def test_hilbert_map_shift_scaling(fs_metric, rule200):
    k, c = 7, 0.3
    shifted = build_metric(RadialPotential(1, (c,)), rule200)
    a = hilb_map(shifted, k)
    b = hilb_map(fs_metric(1), k)
    assert np.abs(a.log_eta - (b.log_eta - k * c)).max() < 1e-12


def test_basis_metric_validation():
    with pytest.raises(ValueError):
        BasisMetric(1, 2, np.zeros(2))  # wrong length
    H = BasisMetric(1, 2, np.zeros(3))
    with pytest.raises(ValueError):
        H.scaled(-1.0)


def test_fs_map_fixes_fubini_study(fs_metric):
    for n, k in ((1, 12), (2, 9), (3, 6)):
        prof = fs_map_profile(hilb_map(fs_metric(n), k))
        assert prof.profile.sup_norm() < 1e-12


def test_fs_map_gauge_scaling(fs_metric):
    k, lam = 12, 3.0
    H = hilb_map(fs_metric(1), k)
    shift = fs_map_profile(H.scaled(lam)).profile(S_DENSE) - fs_map_profile(H).profile(S_DENSE)
    assert np.abs(shift - shift[0]).max() < 1e-12  # constant shift: same metric
    assert abs(abs(shift[0]) - math.log(lam) / k) < 1e-12


def test_projection_rejects_non_polynomial_profiles():
    prof = Profile.from_callable(lambda s: np.exp(2.0 * s))
    from artifact.geometry import ProfilePotential

    with pytest.raises(ProjectionTail):
        project_potential(ProfilePotential(1, prof), 3)
    ok = project_potential(ProfilePotential(1, prof), 30)
    assert abs(np.polynomial.polynomial.polyval(0.5, ok.coeffs) - math.e) < 1e-10


def test_round_trip_decays_quadratically(rng, rule200):
    m = random_metric(rng, 1, rule200, scale=0.08)
    phi_true = m.phi_derivs(S_DENSE)[0]
    ks = np.array([10, 16, 24, 36, 54, 80])
    dist = []
    for k in ks:
        prof = fs_map_profile(hilb_map(m, int(k)))
        diff = prof.profile(S_DENSE) - phi_true
        diff -= diff.mean()
        dist.append(np.abs(diff).max())
    slope = np.polyfit(np.log(ks), np.log(dist), 1)[0]
    assert -2.4 < slope < -1.6


def test_iteration_recognizes_fs_immediately(fs_metric, rule200):
    pot, trace = t_iteration(RadialPotential(1, (0.0,)), 20, rule200)
    assert trace.converged and trace.iterations == 0
    assert trace.defects[0] < 1e-12


def test_iteration_converges_from_small_perturbation():
    k = 10
    rule = radial_rule(required_order(k))
    pot, trace = t_iteration(RadialPotential(1, (0.0, 0.01, -0.005)), k, rule)
    assert trace.converged
    assert trace.iterations <= 200
    assert trace.defects[-1] <= 1e-10
    m = build_metric(pot, rule)
    assert balance_defect(m, k) <= 1e-9


def test_iteration_cap_raises_with_trace():
    rule = radial_rule(required_order(12))
    with pytest.raises(NotConverged) as err:
        t_iteration(RadialPotential(1, (0.0, 0.05, -0.02)), 12, rule, max_iter=20)
    trace = err.value.trace
    assert not trace.converged
    assert len(trace.defects) == 21
    assert trace.csv_rows()[0][0] == 0


def test_normalization_fixes_degree_energy(fs_metric, rule200):
    pot = RadialPotential(1, (0.7,))
    norm = normalize_potential(pot, rule200)
    assert abs(norm.coeffs[0]) < 1e-12
    again = normalize_potential(norm, rule200)
    assert np.abs(np.array(again.coeffs) - np.array(norm.coeffs)).max() < 1e-12
    m = build_metric(normalize_potential(RadialPotential(1, (0.0, 0.2)), rule200), rule200)
    assert abs(S_j(m, fs_metric(1), 0).value) < 1e-12


def test_level_action_vanishes_at_reference(rule200):
    assert abs(liouville_approx_SLk(RadialPotential(1, (0.0,)), 30, rule200)) < 1e-12


def test_level_action_route_consistency(rule200):
    pot = RadialPotential(1, (0.0, 0.1, -0.04))
    for k in (20, 60):
        a = liouville_approx_SLk(pot, k, rule200, route="identity")
        b = liouville_approx_SLk(pot, k, rule200, route="raw")
        assert abs(a - b) < 1e-9


def test_balance_defect_gauge_invariance(fs_metric):
    k = 15
    rule = radial_rule(required_order(k))
    m = build_metric(RadialPotential(1, (0.0, 0.03)), rule)
    H = hilb_map(m, k)
    a = build_metric(fs_map_profile(H), rule)
    b = build_metric(fs_map_profile(H.scaled(5.0)), rule)
    assert abs(balance_defect(a, k) - balance_defect(b, k)) < 1e-10


def test_projected_fs_map_round_trips_low_degree(fs_metric):
    pot = fs_map(hilb_map(fs_metric(1), 10), degree=2, tail_tol=1e-6)
    assert max(abs(c) for c in pot.coeffs) < 1e-10
