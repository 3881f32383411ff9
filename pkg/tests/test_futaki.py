import numpy as np
import pytest

from artifact import (
    RadialPotential,
    build_metric,
    covariant_endomorphism,
    hamiltonian_potential,
    invariant_lhs,
    invariant_rhs,
    lu_lemma_defect,
    metric_independence,
)
from artifact.futaki import flow_pairing_spread, invariant_defect

from conftest import random_metric


def test_rotation_hamiltonian_on_fs_cp1(fs_metric):
    m = fs_metric(1)
    data = hamiltonian_potential(m)
    # closed form: the imaginary part is 1/2 - s
    assert np.abs(data.theta.values - (0.5 - m.rule.nodes)).max() < 1e-13
    assert data.dbar_residual < 1e-12
    assert data.normalization_defect < 1e-12


def test_hamiltonian_residuals_on_random_metrics(rng, rule200):
    for n in (1, 2, 3):
        m = random_metric(rng, n, rule200)
        data = hamiltonian_potential(m)
        assert data.dbar_residual < 1e-10
        assert data.normalization_defect < 1e-10


def test_zero_field_gives_zero_data(fs_metric):
    data = hamiltonian_potential(fs_metric(2), "zero")
    assert np.abs(data.theta.values).max() == 0.0
    assert np.abs(data.trace).max() == 0.0
    rad, sph = covariant_endomorphism(fs_metric(2), "zero")
    assert np.abs(rad).max() == 0.0 and np.abs(sph).max() == 0.0


def test_unsupported_field_spec(fs_metric):
    with pytest.raises(ValueError):
        hamiltonian_potential(fs_metric(1), "shear")


def test_endomorphism_fs_closed_form(fs_metric):
    s = np.linspace(0.0, 1.0, 11)
    rad, sph = covariant_endomorphism(fs_metric(1), "rotation", s)
    assert np.abs(rad - (1.0 - 2.0 * s)).max() < 1e-12
    assert np.abs(sph - (1.0 - s)).max() < 1e-12


def test_endomorphism_finite_at_strata(rng, rule200):
    m = random_metric(rng, 2, rule200)
    rad, sph = covariant_endomorphism(m, "rotation", np.array([0.0, 1.0]))
    assert np.all(np.isfinite(rad)) and np.all(np.isfinite(sph))


def test_trace_identity_residual(rng, rule200):
    assert lu_lemma_defect(build_metric(RadialPotential(1, (0.0,)), rule200)) < 1e-10
    for n in (1, 2):
        assert lu_lemma_defect(random_metric(rng, n, rule200)) < 1e-8


def test_localization_identity_and_vanishing(rng, rule200):
    for n in (1, 2):
        for m in (build_metric(RadialPotential(n, (0.0,)), rule200),
                  random_metric(rng, n, rule200)):
            for j in (0, 1, 2):
                lhs, rhs, defect = invariant_defect(m, j)
                assert defect < 1e-9
                assert abs(lhs) < 1e-9 and abs(rhs) < 1e-9


def test_metric_independence_spread(rng, rule200):
    for n, j in ((1, 1), (2, 2)):
        metrics = [random_metric(rng, n, rule200) for _ in range(5)]
        assert metric_independence("rotation", j, metrics) < 1e-9
    single = [random_metric(rng, 1, rule200)]
    assert metric_independence("rotation", 1, single) == 0.0


def test_pairing_is_constant_along_rotation_flow(rng, rule200):
    m = random_metric(rng, 1, rule200, scale=0.08)
    for j in (0, 1, 2):
        assert flow_pairing_spread(m, j) < 1e-6
