import math

import numpy as np
import pytest

from artifact import (
    RadialPotential,
    ScalarField,
    S2_explicit,
    S_j,
    build_metric,
    cocycle_defect,
    first_variation,
    second_variation_S2,
    tilde_S0,
    tilde_S_bc,
    tilde_S_path,
)
from artifact.forms import hessian_form, ricci_form
from artifact.functionals import (
    gamma2_defect,
    gamma_pairing,
    liouville_first_variation,
    trace_identity_defects,
)
from artifact.quadrature import TWO_PI

from conftest import random_metric


def test_degree_energy_of_constant(fs_metric, rule200):
    # tilde-S_0[phi + c] - tilde-S_0[phi] = -c V exactly
    for n in (1, 2):
        vol = TWO_PI**n / math.factorial(n)
        c = 0.37
        m = build_metric(RadialPotential(n, (c,)), rule200)
        assert abs(tilde_S0(m, fs_metric(n)) + c * vol) < 1e-12


def test_both_routes_agree(rng, rule200):
    for n in (1, 2):
        m1 = random_metric(rng, n, rule200)
        m0 = random_metric(rng, n, rule200)
        for j in (1, 2):
            a = tilde_S_path(m1, m0, j)
            b = tilde_S_bc(m1, m0, j)
            assert abs(a.value - b.value) < 1e-10 * (1.0 + abs(b.value))
            assert a.diagnostics["path_refinement"] < 1e-8


def test_additive_constant_invariance(rng, rule200):
    # S_j is blind to the potential representative
    for n in (1, 2):
        m0 = random_metric(rng, n, rule200)
        pot = RadialPotential(n, (0.0, 0.09, -0.04))
        m1 = build_metric(pot, rule200)
        m1c = build_metric(pot.shifted(0.83), rule200)
        for j in (0, 1, 2):
            a = S_j(m1, m0, j).value
            b = S_j(m1c, m0, j).value
            if j == 0:
                assert abs((b - a) + 0.83) < 1e-11  # S_0 drops by the shift
            else:
                assert abs(a - b) < 1e-10


def test_cocycle_and_antisymmetry(rng, rule200):
    for n in (1, 2):
        m0 = random_metric(rng, n, rule200)
        m1 = random_metric(rng, n, rule200)
        m2 = random_metric(rng, n, rule200)
        for j in (1, 2):
            assert cocycle_defect(j, m2, m1, m0) < 1e-10
            anti = S_j(m1, m0, j).value + S_j(m0, m1, j).value
            assert abs(anti) < 1e-10


def test_explicit_liouville_assembly_matches_general_route(rng, rule200):
    for n in (1, 2):
        m1 = random_metric(rng, n, rule200)
        m0 = random_metric(rng, n, rule200)
        assert abs(S2_explicit(m1, m0).value - S_j(m1, m0, 2).value) < 1e-12


def test_first_variations_match_finite_differences(rng, rule200):
    m = random_metric(rng, 2, rule200)
    psi = ScalarField.from_callable(m, lambda s: np.sin(2.0 * s) - 0.4 * s**2)
    for j in (0, 1, 2):
        fd, formula, defect = first_variation(j, m, psi)
        assert defect < 1e-7 * (1.0 + abs(formula))


def test_liouville_density_first_variation(rng, rule200):
    m = random_metric(rng, 1, rule200)
    psi = ScalarField.from_callable(m, lambda s: s**2 - 0.5 * s)
    fd, formula, defect = liouville_first_variation(m, psi)
    assert defect < 1e-7 * (1.0 + abs(formula))


def test_second_variation_matches_finite_differences(rng, rule200):
    for n in (1, 2):
        m = random_metric(rng, n, rule200)
        dot = ScalarField.from_callable(m, lambda s: np.sin(2.0 * s) - 0.4 * s**2)
        ddot = ScalarField.from_callable(m, lambda s: 0.5 * np.cos(3.0 * s) + 0.2 * s)
        formula, fd, defect = second_variation_S2(m, dot, ddot)
        assert defect < 1e-8 * (1.0 + abs(formula))


def test_gamma_two_is_closed(rng, rule200):
    for n in (1, 2):
        m = random_metric(rng, n, rule200)
        d1 = ScalarField.from_callable(m, lambda s: np.sin(2.0 * s))
        d2 = ScalarField.from_callable(m, lambda s: s**3 - 0.7 * s)
        assert gamma2_defect(m, d1, d2) < 1e-7
        assert gamma2_defect(m, d1, d1) == 0.0


def test_gamma_pairing_kills_constants_for_j1(rng, rule200):
    # a_1 integrates against constants to a class constant; gamma of a
    # constant direction vanishes for j = 1 by the divergence theorem
    m = random_metric(rng, 1, rule200)
    ones = np.ones_like(rule200.nodes)
    vol = TWO_PI**m.n / math.factorial(m.n)
    got = gamma_pairing(m, 1, ones)
    chars = 1.0  # characteristic average of a_1 on CP^1
    assert abs(got + chars * vol) < 1e-10


def test_contraction_identities(rng, rule200):
    m = random_metric(rng, 2, rule200)
    alpha = ricci_form(m)
    beta = hessian_form(m, ScalarField.from_callable(m, lambda s: s**2).profile)
    d1, d2 = trace_identity_defects(m, alpha, beta, np.cos(rule200.nodes))
    assert d1 < 1e-11 and d2 < 1e-11


def test_route_mismatch_on_different_manifolds(rng, rule200):
    m1 = random_metric(rng, 1, rule200)
    m2 = random_metric(rng, 2, rule200)
    with pytest.raises(ValueError):
        S_j(m1, m2, 1)
