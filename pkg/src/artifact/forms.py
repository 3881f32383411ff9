"""Radial differential forms and mixed-wedge integration.

A closed U(n)-invariant (1,1)-form on CP^n is described, away from the
two fixed strata, by two reduced coordinate profiles (rho, sig):

    beta = (coordinate radial part) rho(s) + (spherical part) sig(s)

normalized so that omega_FS has rho = sig = 1 and a metric form
omega_phi has rho = F', sig = G.  The top-wedge of n such forms then
integrates against a function f as

    int f beta_1 ^ ... ^ beta_n
        = (2 pi)^n int_0^1 f s^{n-1} sum_j rho_j prod_{j' != j} sig_{j'} ds.

A (2,2)-form T is described by a pair coefficient (rs, ss) giving its
radial-spherical and spherical-spherical frame pairs in the same
reduced normalization; for two (1,1)-forms a, b one has
rs = rho_a sig_b + rho_b sig_a and ss = 2 sig_a sig_b, and

    int f T ^ beta_1 ^ ... ^ beta_{n-2}
        = (2 pi)^n int f s^{n-1} [ rs prod_j sig_j
            + (ss/2) sum_j rho_j prod_{j' != j} sig_{j'} ] ds.

These two evaluators carry every mixed-power energy, Bott-Chern
pairing, and curvature-polynomial integral in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quadrature import TWO_PI, RadialQuadrature


@dataclass(frozen=True)
class RadialForm:
    """Reduced coordinate profiles of a radial (1,1)-form at rule nodes."""

    rho: np.ndarray
    sig: np.ndarray

    def __add__(self, other):
        return RadialForm(self.rho + other.rho, self.sig + other.sig)

    def __sub__(self, other):
        return RadialForm(self.rho - other.rho, self.sig - other.sig)

    def scale(self, c):
        return RadialForm(c * self.rho, c * self.sig)


@dataclass(frozen=True)
class PairForm:
    """Reduced pair coefficients of a radial (2,2)-form at rule nodes."""

    rs: np.ndarray
    ss: np.ndarray

    def __add__(self, other):
        return PairForm(self.rs + other.rs, self.ss + other.ss)

    def __sub__(self, other):
        return PairForm(self.rs - other.rs, self.ss - other.ss)

    def scale(self, c):
        return PairForm(c * self.rs, c * self.ss)


# ---------------------------------------------------------------------------
# constructors


def omega_form(metric) -> RadialForm:
    d = metric.nd
    return RadialForm(np.array(d["F1"]), np.array(d["G"]))


def ricci_form(metric) -> RadialForm:
    d = metric.nd
    mu_r, mu_s = metric.ricci_eigenvalues()
    return RadialForm(mu_r * d["F1"], mu_s * d["G"])


def hessian_form(metric, profile) -> RadialForm:
    """i ddbar v for a radial profile v."""
    d = metric.nd
    v1 = profile.deriv()(d["s"])
    v2 = profile.deriv(2)(d["s"])
    return RadialForm(d["sigp"] * v1 + d["sig"] * v2, (1.0 - d["s"]) * v1)


def gradient_pair_form(metric, profile_f, profile_g) -> RadialForm:
    """i df ^ dbar g for radial profiles f, g (purely radial sector)."""
    d = metric.nd
    return RadialForm(
        d["sig"] * profile_f.deriv()(d["s"]) * profile_g.deriv()(d["s"]),
        np.zeros_like(d["s"]),
    )


def wedge_pair(a: RadialForm, b: RadialForm) -> PairForm:
    return PairForm(a.rho * b.sig + b.rho * a.sig, 2.0 * a.sig * b.sig)


def curvature_square_pair(metric) -> PairForm:
    """The (2,2)-form Tr(iR ^ iR) in reduced pair coefficients."""
    d = metric.nd
    A, B, C = metric.frame_curvature()
    n = metric.n
    rs_hat = 2.0 * (A * B + n * B * C - B**2)
    ss_hat = 2.0 * (B**2 + n * C**2)
    return PairForm(rs_hat * d["F1"] * d["G"], ss_hat * d["G"] ** 2)


def todd2_form(metric) -> PairForm:
    """Td_2 of the curvature as a real (2,2)-form: (3 ric^2 - Tr(iR iR))/24."""
    ric = ricci_form(metric)
    return (wedge_pair(ric, ric).scale(3.0) - curvature_square_pair(metric)).scale(1.0 / 24.0)


# ---------------------------------------------------------------------------
# integration


def mixed_integral(rule: RadialQuadrature, n: int, f_values, forms) -> float:
    """int f beta_1 ^ ... ^ beta_n over CP^n (raw wedge, no 1/n!)."""
    forms = list(forms)
    if len(forms) != n:
        raise ValueError(f"need exactly {n} forms, got {len(forms)}")
    s = rule.nodes
    total = np.zeros_like(s)
    for j in range(n):
        term = np.array(forms[j].rho)
        for jp in range(n):
            if jp != j:
                term = term * forms[jp].sig
        total += term
    f = np.broadcast_to(np.asarray(f_values, dtype=float), s.shape)
    return TWO_PI**n * rule.integrate(f * s ** (n - 1) * total)


def pair_integral(rule: RadialQuadrature, n: int, f_values, pair: PairForm, forms) -> float:
    """int f T ^ beta_1 ^ ... ^ beta_{n-2} for a (2,2)-form T."""
    forms = list(forms)
    if len(forms) != n - 2:
        raise ValueError(f"need exactly {n - 2} forms, got {len(forms)}")
    s = rule.nodes
    sig_prod = np.ones_like(s)
    for fm in forms:
        sig_prod = sig_prod * fm.sig
    total = pair.rs * sig_prod
    for j in range(len(forms)):
        term = np.array(forms[j].rho)
        for jp in range(len(forms)):
            if jp != j:
                term = term * forms[jp].sig
        total += 0.5 * pair.ss * term
    f = np.broadcast_to(np.asarray(f_values, dtype=float), s.shape)
    return TWO_PI**n * rule.integrate(f * s ** (n - 1) * total)


def integrate_radial(rule: RadialQuadrature, metric, field_values, form_power: int,
                     reference=None) -> float:
    """int f omega_phi^p ^ omega_ref^{n-p} / n! with p = form_power.

    ``reference`` defaults to the Fubini-Study form.
    """
    n = metric.n
    if not 0 <= form_power <= n:
        raise ValueError(f"form power must be in 0..{n}")
    om = omega_form(metric)
    if reference is None:
        ones = np.ones_like(rule.nodes)
        ref = RadialForm(ones, ones)
    else:
        ref = omega_form(reference)
    forms = [om] * form_power + [ref] * (n - form_power)
    return mixed_integral(rule, n, field_values, forms) / math.factorial(n)


def trace_against(metric, form: RadialForm):
    """tr_omega of a radial (1,1)-form, nodewise."""
    d = metric.nd
    return form.rho / d["F1"] + (metric.n - 1) * form.sig / d["G"]


def form_inner(metric, a: RadialForm, b: RadialForm):
    """Frame inner product <a, b>_omega of two radial (1,1)-forms."""
    d = metric.nd
    return (a.rho / d["F1"]) * (b.rho / d["F1"]) + (metric.n - 1) * (
        a.sig / d["G"]
    ) * (b.sig / d["G"])


# ---------------------------------------------------------------------------
# invariant polynomials on two-sector endomorphism data


class InvariantPolyEval:
    """Chern/Todd/trace polynomials on block-diagonal endomorphism data.

    Arguments x, y are the radial eigenvalue and the spherical eigenvalue
    (multiplicity n-1) of i times the endomorphism, as arrays or scalars.
    """

    def __init__(self, n: int):
        self.n = int(n)

    def tr1(self, x, y):
        return x + (self.n - 1) * y

    def tr2(self, x, y):
        return x**2 + (self.n - 1) * y**2

    def c1(self, x, y):
        return self.tr1(x, y)

    def c2(self, x, y):
        n = self.n
        return (n - 1) * x * y + math.comb(n - 1, 2) * y**2

    def ch2(self, x, y):
        return 0.5 * self.tr2(x, y)

    def td0(self, x, y):
        return np.ones_like(np.asarray(x, dtype=float) + np.asarray(y, dtype=float))

    def td1(self, x, y):
        return 0.5 * self.c1(x, y)

    def td2(self, x, y):
        return (self.c1(x, y) ** 2 + self.c2(x, y)) / 12.0

    def td2_from_traces(self, x, y):
        # Td2 = (3 c1^2 - 2 ch2 ... ) expressed through traces only
        return (3.0 * self.tr1(x, y) ** 2 - self.tr2(x, y)) / 24.0
