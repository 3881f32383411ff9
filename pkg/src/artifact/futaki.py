"""Hamiltonian potentials and localization invariants for the rotation field.

The diagonal torus field X = sum_i z^i d/dz^i on CP^n is Hamiltonian for
every radial metric: contracting it into omega_phi produces an exact
(0,1)-form, and the potential theta_X is purely imaginary with

    theta_X = i (c - F),   F = s + s(1-s) phi',

where c is fixed by the normalization int theta_X omega^n = 0.  The module
computes theta_X, the covariant-derivative endomorphism nabla X in the
radial frame, and both sides of the localization identity

    int theta_X (a_j - Delta a_{j-1}) omega^n/n!
        = (1/(n+1-j)!) int Td_j(R + nabla X) (omega + theta_X)^{n+1-j},

expanded by form degree.  On CP^n every such invariant vanishes, so the
checks are equality of the two sides, metric independence, and the flow
consistency of the pairing along the pullback path of Re X.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .forms import (
    RadialForm,
    curvature_square_pair,
    mixed_integral,
    omega_form,
    pair_integral,
    ricci_form,
    todd2_form,
)
from .geometry import (
    ProfilePotential,
    RadialKahlerMetric,
    ScalarField,
    bergman_coefficient,
    build_metric,
    half_laplacian,
)
from .profiles import Profile
from .quadrature import TWO_PI

ROTATION = "rotation"
ZERO = "zero"
_SPECS = (ROTATION, ZERO)


def _check_spec(field_spec: str):
    if field_spec not in _SPECS:
        raise ValueError(f"unsupported field spec {field_spec!r}; known: {_SPECS}")


@dataclass(frozen=True)
class VectorFieldData:
    """Hamiltonian data of a holomorphic field on a radial metric.

    ``theta`` stores the imaginary part of theta_X (theta_X = i theta).
    ``nabla_rad``/``nabla_sph`` are the two-sector eigenvalues of nabla X
    in the radial frame at the quadrature nodes.
    """

    field_spec: str
    theta: ScalarField
    nabla_rad: np.ndarray
    nabla_sph: np.ndarray
    constant: float
    dbar_residual: float
    normalization_defect: float

    @property
    def trace(self) -> np.ndarray:
        n = self.theta.metric.n
        return self.nabla_rad + (n - 1) * self.nabla_sph


def _moment_values(metric: RadialKahlerMetric, s=None) -> np.ndarray:
    d = metric.nd if s is None else metric.profile_data(np.asarray(s, dtype=float))
    return d["F"]


def covariant_endomorphism(metric: RadialKahlerMetric, field_spec: str = ROTATION,
                           s=None):
    """Two-sector eigenvalues of nabla X in the radial frame."""
    _check_spec(field_spec)
    s_arr = metric.rule.nodes if s is None else np.asarray(s, dtype=float)
    if field_spec == ZERO:
        z = np.zeros_like(s_arr)
        return z, z.copy()
    d = metric.profile_data(s_arr)
    rad = d["sigp"] + d["sig"] * d["F2"] / d["F1"]
    sph = (1.0 - s_arr) * d["F1"] / d["G"]
    return rad, sph


def hamiltonian_potential(metric: RadialKahlerMetric,
                          field_spec: str = ROTATION) -> VectorFieldData:
    """Solve iota_X omega + dbar theta_X = 0 for the normalized theta_X."""
    _check_spec(field_spec)
    n = metric.n
    vol = TWO_PI**n / math.factorial(n)
    if field_spec == ZERO:
        theta = ScalarField.constant(metric, 0.0)
        z = np.zeros_like(metric.rule.nodes)
        return VectorFieldData(field_spec, theta, z, z.copy(), 0.0, 0.0, 0.0)
    c = metric.integrate(_moment_values(metric)) / vol
    theta = ScalarField.from_callable(metric, lambda s: c - _moment_values(metric, s))
    # the contraction equation reduces to theta' + F' = 0 nodewise
    d = metric.nd
    residual = float(np.abs(theta.derivs(orders=(1,))[0] + d["F1"]).max())
    norm_defect = abs(metric.integrate(theta.values)) * math.factorial(n)
    rad, sph = covariant_endomorphism(metric, field_spec)
    return VectorFieldData(field_spec, theta, rad, sph, c, residual, norm_defect)


def lu_lemma_defect(metric: RadialKahlerMetric, field_spec: str = ROTATION) -> float:
    """Sup-norm residual of the trace identity iota_X ric = dbar Delta theta_X.

    Both sides are exact radial 1-forms, so the identity is equivalent to
    Tr(nabla X) and Delta F differing by a constant.
    """
    _check_spec(field_spec)
    if field_spec == ZERO:
        return 0.0
    n = metric.n
    moment = ScalarField.from_callable(metric, lambda s: _moment_values(metric, s))
    lap_moment = half_laplacian(metric, moment)

    def gap(s):
        rad, sph = covariant_endomorphism(metric, field_spec, s)
        return rad + (n - 1) * sph - lap_moment(s)

    return Profile.from_callable(gap).deriv().sup_norm()


def invariant_lhs(metric: RadialKahlerMetric, field_data: VectorFieldData, j: int,
                  coefficient_fn=bergman_coefficient) -> float:
    """Pairing int theta (a_j - Delta a_{j-1}) omega^n/n! (imaginary part)."""
    if j not in (0, 1, 2):
        raise ValueError(f"j must be 0, 1, or 2, got {j}")
    theta = field_data.theta.values
    aj = coefficient_fn(metric, j).values
    if j == 0:
        integrand = aj
    else:
        lap_prev = half_laplacian(metric, coefficient_fn(metric, j - 1)).values
        integrand = aj - lap_prev
    return metric.integrate(theta * integrand)


def _nabla_curvature_form(metric: RadialKahlerMetric,
                          field_data: VectorFieldData) -> RadialForm:
    """The (1,1)-form Tr(nabla X . iR) in reduced coordinates."""
    d = metric.nd
    A, B, C = metric.frame_curvature()
    n = metric.n
    p, q = field_data.nabla_rad, field_data.nabla_sph
    rho = (A * p + (n - 1) * B * q) * d["F1"]
    sig = (B * p + n * C * q) * d["G"]
    return RadialForm(rho, sig)


def invariant_rhs(metric: RadialKahlerMetric, field_data: VectorFieldData,
                  j: int) -> float:
    """Equivariant side, expanded by form degree:

    (1/(n+1-j)!) [ (n+1-j) Td_j(R) theta omega^{n-j}
                   + j Td_j(nabla X, R, ..., R) omega^{n+1-j} ].
    """
    if j not in (0, 1, 2):
        raise ValueError(f"j must be 0, 1, or 2, got {j}")
    n = metric.n
    rule = metric.rule
    theta = field_data.theta.values
    om = omega_form(metric)
    if j == 0:
        return metric.integrate(theta)
    if j == 1:
        td1 = ricci_form(metric).scale(0.5)
        first = n * mixed_integral(rule, n, theta, [td1] + [om] * (n - 1))
        second = math.factorial(n) * metric.integrate(0.5 * field_data.trace)
        return (first + second) / math.factorial(n)
    first = 0.0
    if n >= 2:
        first = (n - 1) * pair_integral(
            rule, n, theta, todd2_form(metric), [om] * (n - 2)
        )
    ric = ricci_form(metric)
    mixed_td2 = (
        ric.scale(3.0 * field_data.trace) - _nabla_curvature_form(metric, field_data)
    ).scale(1.0 / 12.0)
    second = mixed_integral(rule, n, 1.0, [mixed_td2] + [om] * (n - 1))
    return (first + second) / math.factorial(n - 1)


def invariant_defect(metric: RadialKahlerMetric, j: int,
                     field_spec: str = ROTATION):
    data = hamiltonian_potential(metric, field_spec)
    lhs = invariant_lhs(metric, data, j)
    rhs = invariant_rhs(metric, data, j)
    return lhs, rhs, abs(lhs - rhs)


def metric_independence(field_spec: str, j: int, metrics) -> float:
    """max - min of the invariant pairing over a list of metrics."""
    metrics = list(metrics)
    if not metrics:
        raise ValueError("need at least one metric")
    values = [
        invariant_lhs(m, hamiltonian_potential(m, field_spec), j) for m in metrics
    ]
    return float(max(values) - min(values))


def _pullback_metric(metric: RadialKahlerMetric, t: float) -> RadialKahlerMetric:
    """Metric of the potential pulled back along the time-t flow of Re X."""
    et = math.exp(t)

    def phi_t(s):
        w = 1.0 - s + et * s
        st = et * s / w
        return np.log(w) + metric.phi_derivs(st)[0]

    pot = ProfilePotential(metric.n, Profile.from_callable(phi_t))
    return build_metric(pot, metric.rule, label=f"{metric.label} flow t={t:g}")


def flow_pairing_spread(metric: RadialKahlerMetric, j: int,
                        times=(0.0, 0.1, 0.2)) -> float:
    """Spread of int phi-dot_t (a_j - Delta a_{j-1}) omega_t^n/n! over the
    flow path; t-independence is the derivative form of metric independence."""
    et_data = hamiltonian_potential(metric, ROTATION)
    c = et_data.constant
    values = []
    for t in times:
        mt = _pullback_metric(metric, float(t))
        et = math.exp(float(t))
        s = mt.rule.nodes
        st = et * s / (1.0 - s + et * s)
        phidot = _moment_values(metric, st) - c
        aj = bergman_coefficient(mt, j).values
        if j == 0:
            integrand = aj
        else:
            integrand = aj - half_laplacian(mt, bergman_coefficient(mt, j - 1)).values
        values.append(mt.integrate(phidot * integrand))
    return float(max(values) - min(values))
