"""Radial Kahler metrics on CP^n and their curvature.

A metric in the anticanonical-normalized class is encoded by a radial
potential phi(s), s = |z|^2/(1+|z|^2), with omega_phi = omega_FS + i
ddbar phi.  Writing u(t) = log(1+e^t) + phi(s(t)), t = log(s/(1-s)),
the metric splits into a radial eigenvalue and a spherical eigenvalue
(multiplicity n-1).  With

    F(s) = s + s(1-s) phi'(s)        (= u'(t))
    G(s) = F(s)/s = 1 + (1-s) phi'(s)

the eigenvalues relative to the Fubini-Study frame are F' and G, and
all curvature components reduce to the three frame functions

    A = [2F'^2 - s'(s) F'F'' + sig (F''^2 - F'F''')] / F'^3
    B = [G^2 - s'(s) G G' + sig (G'^2 - G G'')] / (G^2 F')
    C = [G - (1-s) G'] / G^2

with sig = s(1-s).  These forms are free of endpoint cancellation and
were validated against a symbolic coordinate computation, the constant
curvature of Fubini-Study, and integrated characteristic numbers.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import NonPositiveMetric, UnsupportedCoefficient
from .profiles import DEFAULT_DEGREE, Profile, chebyshev_points
from .quadrature import TWO_PI, RadialQuadrature

MAX_POTENTIAL_DEGREE = 12
FIELD_DEGREE = 160


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class RadialPotential:
    """Polynomial radial potential phi(s) = sum c_j s^j on CP^n."""

    n: int
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not 1 <= self.n <= 3:
            raise ValueError(f"complex dimension must be 1..3, got {self.n}")

    @property
    def degree(self) -> int:
        c = self.coeffs
        d = len(c) - 1
        while d > 0 and c[d] == 0.0:
            d -= 1
        return d

    @property
    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coeffs)

    def shifted(self, constant: float) -> "RadialPotential":
        c = list(self.coeffs) or [0.0]
        c[0] += float(constant)
        return RadialPotential(self.n, tuple(c))

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "basis": "s-poly", "coeffs": [repr(c) for c in self.coeffs]}
        )

    @classmethod
    def from_json(cls, text: str) -> "RadialPotential":
        data = json.loads(text)
        if data.get("basis", "s-poly") != "s-poly":
            raise ValueError(f"unsupported potential basis {data.get('basis')!r}")
        return cls(int(data["n"]), tuple(float(c) for c in data["coeffs"]))


class _PolyCalc:
    """phi and its first four derivatives for a power-basis polynomial."""

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.size == 0:
            c = np.zeros(1)
        self._stack = [c]
        for _ in range(4):
            d = np.polynomial.polynomial.polyder(self._stack[-1])
            if d.size == 0:
                d = np.zeros(1)
            self._stack.append(d)

    def derivs(self, s):
        s = np.asarray(s, dtype=float)
        return [np.polynomial.polynomial.polyval(s, c) for c in self._stack]


class _ProfileCalc:
    """phi and derivatives for a Chebyshev-profile potential."""

    def __init__(self, profile: Profile):
        self._stack = [profile]
        for _ in range(4):
            self._stack.append(self._stack[-1].deriv())

    def derivs(self, s):
        s = np.asarray(s, dtype=float)
        return [p(s) for p in self._stack]


@dataclass(frozen=True)
class ProfilePotential:
    """Radial potential given as a smooth sampled profile (not polynomial)."""

    n: int
    profile: Profile

    @property
    def is_zero(self) -> bool:
        return False


def _potential_calc(potential):
    if isinstance(potential, RadialPotential):
        return _PolyCalc(potential.coeffs)
    if isinstance(potential, ProfilePotential):
        return _ProfileCalc(potential.profile)
    raise TypeError(f"unsupported potential type {type(potential).__name__}")


# ---------------------------------------------------------------------------
# metric


class RadialKahlerMetric:
    """A radial Kahler metric on CP^n, cached on a quadrature rule."""

    def __init__(self, n, potential, rule: RadialQuadrature, reference_flag, label=""):
        self.n = int(n)
        self.potential = potential
        self.rule = rule
        self.reference_flag = bool(reference_flag)
        self.label = label or ("fubini-study" if reference_flag else "radial")
        self._calc = _potential_calc(potential)
        self.nd = self.profile_data(rule.nodes)
        self._field_cache = {}

    # -- pointwise profile calculus -------------------------------------

    def phi_derivs(self, s):
        return self._calc.derivs(s)

    def profile_data(self, s):
        s = np.asarray(s, dtype=float)
        p0, p1, p2, p3, p4 = self._calc.derivs(s)
        sig = s * (1.0 - s)
        sigp = 1.0 - 2.0 * s
        F = s + sig * p1
        F1 = 1.0 + sigp * p1 + sig * p2
        F2 = -2.0 * p1 + 2.0 * sigp * p2 + sig * p3
        F3 = -6.0 * p2 + 3.0 * sigp * p3 + sig * p4
        G = 1.0 + (1.0 - s) * p1
        G1 = -p1 + (1.0 - s) * p2
        G2 = -2.0 * p2 + (1.0 - s) * p3
        return {
            "s": s, "sig": sig, "sigp": sigp, "phi": p0,
            "F": F, "F1": F1, "F2": F2, "F3": F3,
            "G": G, "G1": G1, "G2": G2,
        }

    @property
    def eigenvalue_profiles(self):
        """(lambda_rad, lambda_sph) at the quadrature nodes, FS-relative."""
        return self.nd["F1"], self.nd["G"]

    def frame_curvature(self, s=None):
        """Frame components (A, B, C) of the curvature tensor."""
        d = self.nd if s is None else self.profile_data(s)
        sig, sigp = d["sig"], d["sigp"]
        F1, F2, F3 = d["F1"], d["F2"], d["F3"]
        G, G1, G2 = d["G"], d["G1"], d["G2"]
        A = (2.0 * F1**2 - sigp * F1 * F2 + sig * (F2**2 - F1 * F3)) / F1**3
        B = (G**2 - sigp * G * G1 + sig * (G1**2 - G * G2)) / (G**2 * F1)
        C = (G - (1.0 - d["s"]) * G1) / G**2
        return A, B, C

    def ricci_eigenvalues(self, s=None):
        """(mu_rad, mu_sph): Ricci eigenvalues in the FS-relative frame."""
        A, B, C = self.frame_curvature(s)
        n = self.n
        return A + (n - 1) * B, B + n * C

    def scalar_curvature_values(self, s=None):
        mu_r, mu_s = self.ricci_eigenvalues(s)
        return mu_r + (self.n - 1) * mu_s

    def curvature_norms(self, s=None):
        """(|R|^2, |Ric|^2) pointwise."""
        A, B, C = self.frame_curvature(s)
        n = self.n
        mu_r = A + (n - 1) * B
        mu_s = B + n * C
        riem = A**2 + 4.0 * (n - 1) * B**2 + 2.0 * n * (n - 1) * C**2
        ric = mu_r**2 + (n - 1) * mu_s**2
        return riem, ric

    # -- integration ----------------------------------------------------

    def measure_values(self):
        """Density of omega_phi^n/n! against (2 pi)^n ds at the nodes."""
        d = self.nd
        return d["s"] ** (self.n - 1) * d["F1"] * d["G"] ** (self.n - 1) / math.factorial(self.n - 1)

    def integrate(self, values) -> float:
        """Integral of a nodal field against omega_phi^n/n!."""
        vals = np.asarray(values, dtype=float)
        return TWO_PI**self.n * self.rule.integrate(vals * self.measure_values())

    def volume(self) -> float:
        return self.integrate(np.ones_like(self.rule.nodes))

    def laplacian_values(self, f1, f2, s=None):
        """Half-Laplacian of a radial field from its s-derivatives."""
        d = self.nd if s is None else self.profile_data(s)
        out = (d["sigp"] * f1 + d["sig"] * f2) / d["F1"]
        if self.n > 1:
            out = out + (self.n - 1) * (1.0 - d["s"]) * f1 / d["G"]
        return out

    def _cached_field(self, key, builder):
        field = self._field_cache.get(key)
        if field is None:
            field = builder()
            self._field_cache[key] = field
        return field


# ---------------------------------------------------------------------------
# scalar fields


class ScalarField:
    """A smooth radial function attached to a metric.

    Holds a Chebyshev profile (for spectral differentiation) plus cached
    values at the metric's quadrature nodes.
    """

    __slots__ = ("metric", "profile", "_values")

    def __init__(self, metric: RadialKahlerMetric, profile: Profile):
        self.metric = metric
        self.profile = profile
        self._values = None

    @classmethod
    def from_callable(cls, metric, fn: Callable, degree: int = FIELD_DEGREE):
        return cls(metric, Profile.from_callable(fn, degree))

    @classmethod
    def constant(cls, metric, value: float):
        return cls(metric, Profile(np.array([float(value)])))

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = self.profile(self.metric.rule.nodes)
        return self._values

    def __call__(self, s):
        return self.profile(s)

    def derivs(self, s=None, orders=(1, 2)):
        s = self.metric.rule.nodes if s is None else np.asarray(s, dtype=float)
        return [self.profile.deriv(o)(s) for o in orders]

    def tail(self) -> float:
        return self.profile.tail()


def _require_attached(metric, field: ScalarField):
    if field.metric is not metric:
        raise ValueError("scalar field is attached to a different metric")


# ---------------------------------------------------------------------------
# public operations


def build_metric(potential, rule: RadialQuadrature, max_degree: int = MAX_POTENTIAL_DEGREE,
                 label="") -> RadialKahlerMetric:
    """Construct and positivity-check a radial metric."""
    if isinstance(potential, RadialPotential):
        if potential.degree > max_degree:
            raise ValueError(
                f"potential degree {potential.degree} exceeds bound {max_degree}"
            )
        reference = potential.is_zero
    elif isinstance(potential, ProfilePotential):
        reference = False
    else:
        raise TypeError(f"unsupported potential type {type(potential).__name__}")
    metric = RadialKahlerMetric(potential.n, potential, rule, reference, label=label)
    # positivity at the quadrature nodes plus a dense endpoint-including grid
    check = np.concatenate([rule.nodes, chebyshev_points(257), [0.0, 1.0]])
    d = metric.profile_data(check)
    for name, vals in (("radial", d["F1"]), ("spherical", d["G"])):
        idx = int(np.argmin(vals))
        if vals[idx] <= 0.0:
            raise NonPositiveMetric(check[idx], vals[idx], sector=name)
    return metric


def volume(metric: RadialKahlerMetric) -> float:
    return metric.volume()


def perturbed_metric(metric: RadialKahlerMetric, direction_profile: Profile,
                     t: float, rule=None) -> RadialKahlerMetric:
    """Metric with potential phi + t x direction (profile-backed)."""
    rule = rule or metric.rule
    base = metric._calc

    def shifted(s):
        return base.derivs(s)[0] + t * direction_profile(np.asarray(s, dtype=float))

    pot = ProfilePotential(metric.n, Profile.from_callable(shifted, DEFAULT_DEGREE))
    return build_metric(pot, rule, label=f"{metric.label}+{t:g}*dir")


def scalar_curvature(metric: RadialKahlerMetric) -> ScalarField:
    return metric._cached_field(
        "S", lambda: ScalarField.from_callable(metric, metric.scalar_curvature_values)
    )


def half_laplacian(metric: RadialKahlerMetric, f: ScalarField) -> ScalarField:
    _require_attached(metric, f)
    p1 = f.profile.deriv()
    p2 = p1.deriv()
    return ScalarField.from_callable(
        metric, lambda s: metric.laplacian_values(p1(s), p2(s), s)
    )


class CurvatureData(NamedTuple):
    S: ScalarField
    ric_profiles: tuple  # (mu_rad, mu_sph) nodal arrays
    riem_norm_sq: ScalarField
    ric_norm_sq: ScalarField
    laplacian: Callable  # f: ScalarField -> ScalarField


def curvature_invariants(metric: RadialKahlerMetric) -> CurvatureData:
    return CurvatureData(
        S=scalar_curvature(metric),
        ric_profiles=metric.ricci_eigenvalues(),
        riem_norm_sq=ScalarField.from_callable(
            metric, lambda s: metric.curvature_norms(s)[0]
        ),
        ric_norm_sq=ScalarField.from_callable(
            metric, lambda s: metric.curvature_norms(s)[1]
        ),
        laplacian=lambda f: half_laplacian(metric, f),
    )


def laplacian_scalar_curvature(metric: RadialKahlerMetric) -> ScalarField:
    return metric._cached_field(
        "lapS", lambda: half_laplacian(metric, scalar_curvature(metric))
    )


def bergman_coefficient(metric: RadialKahlerMetric, j: int) -> ScalarField:
    """Density expansion coefficient a_j, normalized so that
    (2 pi)^n rho_k = sum_j a_j k^{n-j} holds exactly on Fubini-Study."""
    if j == 0:
        return ScalarField.constant(metric, 1.0)
    if j == 1:
        S = scalar_curvature(metric)
        return ScalarField(metric, Profile(0.5 * S.profile.coef))
    if j == 2:
        lapS = laplacian_scalar_curvature(metric)

        def a2(s):
            riem, ric = metric.curvature_norms(s)
            Sv = metric.scalar_curvature_values(s)
            return lapS(s) / 3.0 + (riem - 4.0 * ric + 3.0 * Sv**2) / 24.0

        return metric._cached_field(
            "a2", lambda: ScalarField.from_callable(metric, a2)
        )
    raise UnsupportedCoefficient(j)


def characteristic_coefficients(n: int) -> tuple:
    """Coefficients c_j of prod_{i=1..n}(k+i) = sum_j c_j k^{n-j}.

    These are the exact volume averages of a_j in the class; equivalently
    n! x C(n+k, n) expanded in powers of k.
    """
    poly = [1]
    for i in range(1, n + 1):
        poly = np.convolve(poly, [1, i]).tolist()
    return tuple(float(c) for c in poly)


class CoefficientAverage(NamedTuple):
    average: float
    exact: float
    discrepancy: float


def coefficient_average(metric: RadialKahlerMetric, j: int) -> CoefficientAverage:
    """Volume average of a_j alongside the exact characteristic value."""
    field = bergman_coefficient(metric, j)
    vol = metric.volume()
    avg = metric.integrate(field.values) / vol
    coeffs = characteristic_coefficients(metric.n)
    exact = coeffs[j] if j < len(coeffs) else 0.0
    return CoefficientAverage(avg, exact, abs(avg - exact))


class CurvatureVariation(NamedTuple):
    delta_ric: object  # RadialForm
    delta_S: ScalarField
    delta_lap_S: ScalarField


def hessian_inner(metric, psi_profile: Profile, alpha_rho, alpha_sig, s=None):
    """Frame inner product <i ddbar psi, alpha> for a radial (1,1)-form
    alpha given through its reduced coordinate profiles."""
    d = metric.nd if s is None else metric.profile_data(s)
    p1 = psi_profile.deriv()(d["s"])
    p2 = psi_profile.deriv(2)(d["s"])
    prad = (d["sigp"] * p1 + d["sig"] * p2) / d["F1"]
    qsph = (1.0 - d["s"]) * p1 / d["G"]
    arad = alpha_rho / d["F1"]
    asph = alpha_sig / d["G"]
    return prad * arad + (metric.n - 1) * qsph * asph


def curvature_variation(metric: RadialKahlerMetric, direction: ScalarField) -> CurvatureVariation:
    """First-order variations (delta ric, delta S, delta(Delta S)) along
    phi -> phi + t psi at t = 0:

        delta ric  = -i ddbar (Delta psi)
        delta S    = -Delta^2 psi - <i ddbar psi, ric>
        delta(Delta S) = Delta(delta S) - <i ddbar psi, i ddbar S>
    """
    from .forms import RadialForm  # local import: forms has no geometry dependency

    _require_attached(metric, direction)
    lap_psi = half_laplacian(metric, direction)
    g1 = lap_psi.profile.deriv()
    g2 = g1.deriv()
    d = metric.nd
    delta_ric = RadialForm(
        rho=-(d["sigp"] * g1(d["s"]) + d["sig"] * g2(d["s"])),
        sig=-(1.0 - d["s"]) * g1(d["s"]),
    )

    lap2_psi = half_laplacian(metric, lap_psi)

    def dS(s):
        dd = metric.profile_data(s)
        mu_r, mu_s = metric.ricci_eigenvalues(s)
        inner = hessian_inner(metric, direction.profile, mu_r * dd["F1"], mu_s * dd["G"], s)
        return -lap2_psi(s) - inner

    delta_S = ScalarField.from_callable(metric, dS)
    lap_delta_S = half_laplacian(metric, delta_S)
    Sprof = scalar_curvature(metric).profile
    S1, S2 = Sprof.deriv(), Sprof.deriv(2)

    def dLapS(s):
        dd = metric.profile_data(s)
        rho_S = dd["sigp"] * S1(s) + dd["sig"] * S2(s)
        sig_S = (1.0 - dd["s"]) * S1(s)
        return lap_delta_S(s) - hessian_inner(metric, direction.profile, rho_S, sig_S, s)

    return CurvatureVariation(delta_ric, delta_S, ScalarField.from_callable(metric, dLapS))
