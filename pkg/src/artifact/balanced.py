"""Hilbert/Fubini-Study maps, the T-iteration, and the level-k action.

A radial potential keeps every Hermitian form on the degree-k section
space diagonal in the monomial basis, with entries constant along each
degree stratum.  A BasisMetric therefore stores one positive real per
degree, eta_m, with the full monomial entry H_alpha = c_alpha eta_m,
c_alpha = alpha! (n-1)!/(n-1+m)!.  The two natural maps are

    Hilb:  eta_m = (d_k/V) (2 pi)^n J_m / (n-1)!
    FS:    phi_H(s) = (1/k) log sum_m C(n-1+m, m) tau^m / eta_m
                      + log(1-s),     tau = s/(1-s),

and a metric is balanced at level k when the Bergman density is the
constant d_k/V.  The T-iteration alternates the two maps; on the radial
slice the Fubini-Study metric is the exact fixed point at every level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from numpy.polynomial import polynomial as _poly
from scipy.special import gammaln, logsumexp

from .bergman import (
    _log_angular_sum,
    _radial_log_J,
    bergman_density,
    degree_multiplicity,
    dim_h0,
    gram,
    log_partition_ratio,
)
from .errors import NotConverged, ProjectionTail
from .functionals import S_j
from .geometry import (
    ProfilePotential,
    RadialKahlerMetric,
    RadialPotential,
    build_metric,
)
from .profiles import DEFAULT_DEGREE, Profile
from .quadrature import TWO_PI, radial_rule, required_order

LOG_TWO_PI = math.log(TWO_PI)
BALANCE_TOL = 1e-10
MAX_ITERATIONS = 500
PROJECTION_TAIL_TOL = 1e-9


@dataclass(frozen=True)
class BasisMetric:
    """Diagonal Hermitian form on the degree-k section space.

    ``log_eta[m]`` is the logarithm of the per-degree entry; the monomial
    entry is H_alpha = alpha!(n-1)!/(n-1+m)! exp(log_eta[m]).  Overall
    positive scaling is gauge.
    """

    n: int
    k: int
    log_eta: np.ndarray

    def __post_init__(self):
        le = np.asarray(self.log_eta, dtype=float)
        if le.shape != (self.k + 1,) or not np.all(np.isfinite(le)):
            raise ValueError("need one finite log-entry per degree 0..k")
        object.__setattr__(self, "log_eta", le)

    @property
    def eta(self) -> np.ndarray:
        return np.exp(self.log_eta)

    def scaled(self, factor: float) -> "BasisMetric":
        if factor <= 0.0:
            raise ValueError(f"scaling must be positive, got {factor}")
        return BasisMetric(self.n, self.k, self.log_eta + math.log(factor))

    def log_det(self) -> float:
        """log det of the full d_k x d_k form in the monomial basis."""
        n, k = self.n, self.k
        mult = np.array([degree_multiplicity(n, m) for m in range(k + 1)])
        d_k = dim_h0(n, k)
        log_c_sum = (
            _log_angular_sum(n, k) - d_k * n * LOG_TWO_PI + d_k * gammaln(n)
        )
        return float(log_c_sum + mult @ self.log_eta)


@dataclass(frozen=True)
class IterationTrace:
    defects: tuple
    iterations: int
    converged: bool

    def csv_rows(self):
        return [(i, d) for i, d in enumerate(self.defects)]


def hilb_map(metric: RadialKahlerMetric, k: int) -> BasisMetric:
    """Rescaled L^2 form of the potential: eta_m from the radial Gram data."""
    n = metric.n
    gd = gram(metric, k)
    vol = TWO_PI**n / math.factorial(n)
    log_scale = math.log(dim_h0(n, k) / vol) + n * LOG_TWO_PI - gammaln(n)
    return BasisMetric(n, k, gd.log_Jm + log_scale)


def fs_map_profile(H: BasisMetric, degree: int = DEFAULT_DEGREE) -> ProfilePotential:
    """The Fubini-Study potential of H as a smooth radial profile."""
    n, k = H.n, H.k
    m = np.arange(k + 1)
    log_binom = gammaln(n + m) - gammaln(m + 1) - gammaln(n)

    def phi(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            t_s = np.outer(m, np.log(s))
            t_1ms = np.outer(k - m, np.log1p(-s))
        t_s[0, :] = 0.0
        t_1ms[-1, :] = 0.0
        expo = t_s + t_1ms + (log_binom - H.log_eta)[:, None]
        return logsumexp(expo, axis=0) / k

    return ProfilePotential(n, Profile.from_callable(phi, degree))


def project_potential(potential: ProfilePotential, degree: int,
                      tail_tol: float = PROJECTION_TAIL_TOL) -> RadialPotential:
    """Project a profile potential onto the power basis s^0..s^degree.

    Fails with ProjectionTail when the discarded Chebyshev coefficients
    are not negligible against the retained ones.
    """
    coef = potential.profile.coef
    scale = max(np.abs(coef).max(), 1.0)
    if coef.size > degree + 1:
        tail = float(np.abs(coef[degree + 1 :]).max() / scale)
        if tail > tail_tol:
            raise ProjectionTail(tail, tail_tol, degree)
        coef = coef[: degree + 1]
    # compose the x-power series with x = 2s - 1; degrees stay small here
    x_poly = _cheb.cheb2poly(coef)
    comp = np.zeros(1)
    basis = np.array([1.0])
    for cj in x_poly:
        add = cj * basis
        if comp.size < add.size:
            comp = np.pad(comp, (0, add.size - comp.size))
        comp[: add.size] += add
        basis = _poly.polymul(basis, [-1.0, 2.0])
    return RadialPotential(potential.n, tuple(comp))


def fs_map(H: BasisMetric, degree: int,
           tail_tol: float = PROJECTION_TAIL_TOL) -> RadialPotential:
    """FS potential of H projected to the power basis at the given degree."""
    return project_potential(fs_map_profile(H), degree, tail_tol)


def balance_defect(metric: RadialKahlerMetric, k: int) -> float:
    """sup |(V/d_k) rho_k - 1| over [0, 1]."""
    n = metric.n
    vol = TWO_PI**n / math.factorial(n)
    scale = vol / dim_h0(n, k)
    dens = bergman_density(metric, k)
    return float(
        max(abs(scale * dens.max_value - 1.0), abs(scale * dens.min_value - 1.0))
    )


def t_iteration(initial_potential, k: int, rule=None,
                max_iter: int = MAX_ITERATIONS, tol: float = BALANCE_TOL):
    """Alternate Hilb and FS from the initial potential until balanced.

    Returns (balanced potential, IterationTrace); the returned potential
    is projected to the power basis at twice the starting degree.  Raises
    NotConverged (carrying the trace) when max_iter is exhausted.
    """
    rule = rule or radial_rule(required_order(k))
    if isinstance(initial_potential, RadialPotential):
        out_degree = 2 * max(initial_potential.degree, 1)
    else:
        out_degree = 2 * max(initial_potential.profile.coef.size - 1, 1)
    current = initial_potential
    defects = []
    for it in range(max_iter + 1):
        metric = build_metric(current, rule, max_degree=max(out_degree, 12))
        defect = balance_defect(metric, k)
        defects.append(defect)
        if defect <= tol:
            if not isinstance(current, RadialPotential):
                current = project_potential(current, out_degree)
            return current, IterationTrace(tuple(defects), it, True)
        if it == max_iter:
            break
        current = fs_map_profile(hilb_map(metric, k))
    raise NotConverged(IterationTrace(tuple(defects), max_iter, False))


def normalize_potential(potential: RadialPotential, rule=None) -> RadialPotential:
    """Shift by the constant making the degree-(n+1) energy S_0 vanish."""
    rule = rule or radial_rule(200)
    metric = build_metric(potential, rule)
    base = build_metric(RadialPotential(potential.n, (0.0,)), rule)
    s0 = S_j(metric, base, 0).value
    return potential.shifted(s0)


def liouville_approx_SLk(potential: RadialPotential, k: int, rule=None,
                         route: str = "identity") -> float:
    """Level-k approximation of the generalized Liouville action:

    S_{L,k} = ((2 pi)^n log det_omega(Hilb_k(phi))
               - (2 pi)^n d_k log(d_k/V)
               - k^n S_1[FS_k(Hilb_k(phi)), omega_0]) k^{1-n},

    with phi normalized so that S_0[phi, 0] = 0.  ``route`` selects how
    the determinant term is computed: "identity" uses the partition-ratio
    identity log det_omega(H) - d_k log(d_k/V) = log Z_k[phi]/Z_k[0];
    "raw" takes the literal Gram determinants.
    """
    if route not in ("identity", "raw"):
        raise ValueError(f"unknown route {route!r}")
    n = potential.n
    rule = rule or radial_rule(required_order(k))
    vol = TWO_PI**n / math.factorial(n)
    d_k = dim_h0(n, k)
    phi = normalize_potential(potential, rule)
    metric = build_metric(phi, rule)
    base = build_metric(RadialPotential(n, (0.0,)), rule)
    if route == "identity":
        det_term = log_partition_ratio(metric, base, k)
    else:
        H = hilb_map(metric, k)
        mult = np.array([degree_multiplicity(n, m) for m in range(k + 1)])
        log_norms0 = _log_angular_sum(n, k) + float(mult @ _radial_log_J(base, k))
        det_term = H.log_det() - log_norms0 - d_k * math.log(d_k / vol)
    fsk = build_metric(fs_map_profile(hilb_map(metric, k)), rule)
    s1 = S_j(fsk, base, 1).value
    return float((TWO_PI**n * det_term - k**n * s1) * k ** (1 - n))
