"""Holomorphic section bases, Gram data, Bergman densities, partition ratios.

Sections of the k-th bundle power are represented by affine-chart
monomials z^alpha, |alpha| <= k.  For radial metrics the Gram matrix is
diagonal with

    <z^alpha, z^alpha> = (2 pi)^n alpha!/(m+n-1)! x J_m,   m = |alpha|,
    J_m = int_0^1 s^{m+n-1} (1-s)^{k-m} e^{-k phi} G^{n-1} F' ds,

so everything reduces to the 1D profile integrals J_m.  A 2D
full-Hermitian mode on CP^1 cross-checks the reduction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as _iproduct

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import NonPositiveNorm
from .geometry import RadialKahlerMetric, ScalarField, build_metric, perturbed_metric
from .quadrature import TWO_PI, SphereGrid, check_resolution, sphere_grid

LOG_TWO_PI = math.log(TWO_PI)


def dim_h0(n: int, k: int) -> int:
    """Dimension of the degree-k section space on CP^n."""
    if n < 1 or k < 0:
        raise ValueError(f"need n >= 1 and k >= 0, got n={n}, k={k}")
    return math.comb(n + k, n)


@dataclass(frozen=True)
class MonomialBasis:
    n: int
    k: int

    @property
    def count(self) -> int:
        return dim_h0(self.n, self.k)

    def multi_indices(self):
        n, k = self.n, self.k
        out = []
        for alpha in _iproduct(range(k + 1), repeat=n):
            if sum(alpha) <= k:
                out.append(alpha)
        return out


def degree_multiplicity(n: int, m: int) -> int:
    """Number of monomials of degree exactly m in n variables."""
    return math.comb(m + n - 1, n - 1)


@lru_cache(maxsize=None)
def _log_angular_sum(n: int, k: int) -> float:
    """Sum over all |alpha| <= k of log[(2 pi)^n alpha!/(m+n-1)!]."""
    total = 0.0
    for alpha in MonomialBasis(n, k).multi_indices():
        m = sum(alpha)
        total += n * LOG_TWO_PI + sum(gammaln(a + 1) for a in alpha) - gammaln(m + n)
    return float(total)


@dataclass(frozen=True)
class GramData:
    mode: str  # "radial-diagonal" | "full-hermitian"
    n: int
    k: int
    log_Jm: np.ndarray | None
    matrix: np.ndarray | None
    log_det: float

    @property
    def Jm(self):
        return None if self.log_Jm is None else np.exp(self.log_Jm)

    def degree_norms(self):
        """Norms of the pure powers z1^m (radial mode)."""
        m = np.arange(self.k + 1)
        log_ang = self.n * LOG_TWO_PI + gammaln(m + 1) - gammaln(m + self.n)
        return np.exp(log_ang + self.log_Jm)


def _radial_log_J(metric: RadialKahlerMetric, k: int) -> np.ndarray:
    d = metric.nd
    n = metric.n
    pos_weight = metric.rule.weights * d["G"] ** (n - 1) * d["F1"]
    log_base = np.log(pos_weight) - k * d["phi"]
    log_s = np.log(d["s"])
    log_1ms = np.log1p(-d["s"])
    m = np.arange(k + 1)
    # (k+1) x nodes exponent matrix; all entries moderate since s is interior
    expo = np.outer(m + n - 1, log_s) + np.outer(k - m, log_1ms) + log_base[None, :]
    return logsumexp(expo, axis=1)


def gram(metric: RadialKahlerMetric, k: int, rule=None) -> GramData:
    """Radial-diagonal Gram data for degree-k sections."""
    rule = rule or metric.rule
    check_resolution(rule, k)
    log_Jm = _radial_log_J(metric, k)
    if not np.all(np.isfinite(log_Jm)):
        bad = int(np.argmin(np.isfinite(log_Jm)))
        raise NonPositiveNorm(bad, 0.0)
    n = metric.n
    mult = np.array([degree_multiplicity(n, m) for m in range(k + 1)], dtype=float)
    log_det = _log_angular_sum(n, k) + float(mult @ log_Jm)
    return GramData("radial-diagonal", n, k, log_Jm, None, log_det)


def gram_full(metric: RadialKahlerMetric, k: int, grid: SphereGrid | None = None) -> GramData:
    """Full-Hermitian Gram matrix on CP^1 from 2D quadrature."""
    if metric.n != 1:
        raise ValueError("full-Hermitian mode is only implemented on CP^1")
    grid = grid or sphere_grid(2 * k + 32)
    s = grid.nodes_s
    d = metric.profile_data(s)
    w = grid.weights_s * grid.weight_theta * np.exp(-k * d["phi"]) * d["F1"]
    i_arr = np.arange(k + 1)
    # radial factor s^{i/2} (1-s)^{(k-i)/2} stays bounded for all i <= k
    rad = np.exp(0.5 * (np.outer(i_arr, np.log(s)) + np.outer(k - i_arr, np.log1p(-s))))
    phase = np.exp(1j * np.outer(i_arr, grid.nodes_theta))
    # E[i, (a,b)] = basis value x sqrt(weight); Gram = E E^H is Hermitian PSD
    E = (rad[:, :, None] * np.sqrt(w)[None, :, None]) * phase[:, None, :]
    E = E.reshape(k + 1, -1)
    M = E @ E.conj().T
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NonPositiveNorm(-1, float(np.min(np.linalg.eigvalsh(M)))) from exc
    log_det = float(2.0 * np.sum(np.log(np.real(np.diag(L)))))
    return GramData("full-hermitian", 1, k, None, M, log_det)


@dataclass(frozen=True)
class BergmanDensity:
    field: ScalarField
    k: int
    min_value: float
    max_value: float
    integral_defect: float


def density_values(metric: RadialKahlerMetric, k: int, log_Jm: np.ndarray, s) -> np.ndarray:
    """Bergman density rho_k at arbitrary s in [0, 1] (stable log-space sum)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    n = metric.n
    m = np.arange(k + 1)
    log_D = gammaln(n + m) - gammaln(m + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_s = np.outer(m, np.log(s))
        t_1ms = np.outer(k - m, np.log1p(-s))
    t_s[0, :] = 0.0  # m = 0 contributes s^0 = 1 even at s = 0
    t_1ms[-1, :] = 0.0  # m = k contributes (1-s)^0 = 1 even at s = 1
    expo = t_s + t_1ms + (log_D - log_Jm)[:, None]
    phi = metric.phi_derivs(s)[0]
    return np.exp(logsumexp(expo, axis=0) - k * phi - n * LOG_TWO_PI)


def bergman_density(metric: RadialKahlerMetric, k: int, gram_data: GramData | None = None) -> BergmanDensity:
    gram_data = gram_data if gram_data is not None else gram(metric, k)
    if gram_data.log_Jm is None:
        raise ValueError("density requires radial-diagonal Gram data")
    log_Jm = gram_data.log_Jm
    field = ScalarField.from_callable(
        metric, lambda s: density_values(metric, k, log_Jm, s)
    )
    dense = density_values(metric, k, log_Jm, np.linspace(0.0, 1.0, 513))
    defect = metric.integrate(field.values) - dim_h0(metric.n, k)
    return BergmanDensity(field, k, float(dense.min()), float(dense.max()), float(defect))


def log_partition_ratio(metric_phi: RadialKahlerMetric, metric_ref: RadialKahlerMetric,
                        k: int, rule=None) -> float:
    """log Z_k[phi] - log Z_k[ref]; basis factors cancel degree by degree."""
    if metric_phi.n != metric_ref.n:
        raise ValueError("metrics live on different manifolds")
    rule = rule or metric_phi.rule
    check_resolution(rule, k)
    diff = _radial_log_J(metric_phi, k) - _radial_log_J(metric_ref, k)
    n = metric_phi.n
    mult = np.array([degree_multiplicity(n, m) for m in range(k + 1)], dtype=float)
    return float(mult @ diff)


def donaldson_variation_check(metric: RadialKahlerMetric, k: int, direction: ScalarField,
                              step: float = 1e-4):
    """Directional derivative of log Z_k: finite differences vs the
    density formula int psi (Delta rho_k - k rho_k) omega_phi^n/n!."""
    from .geometry import half_laplacian

    gd = gram(metric, k)
    dens = bergman_density(metric, k, gd)
    lap_rho = half_laplacian(metric, dens.field)
    formula = metric.integrate(
        direction.values * (lap_rho.values - k * dens.field.values)
    )
    plus = perturbed_metric(metric, direction.profile, step)
    minus = perturbed_metric(metric, direction.profile, -step)
    fd = (
        log_partition_ratio(plus, metric, k) - log_partition_ratio(minus, metric, k)
    ) / (2.0 * step)
    return fd, formula, abs(fd - formula)
