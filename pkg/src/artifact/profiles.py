"""Chebyshev profiles on the unit interval.

All smooth radial quantities live on s in [0, 1].  A Profile stores a
Chebyshev series on that interval and supports evaluation, spectral
differentiation, and a tail diagnostic that flags non-smooth input.
Differentiation is always spectral; no finite-difference stencils are
used anywhere in production code paths.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import chebyshev as _ch

from .errors import TailTooLarge

DEFAULT_DEGREE = 160
TAIL_TOL = 1e-10


def chebyshev_points(num: int) -> np.ndarray:
    """First-kind Chebyshev points mapped to [0, 1], ascending."""
    x = np.cos(np.pi * (2 * np.arange(num) + 1) / (2 * num))
    return np.sort(0.5 * (x + 1.0))


class Profile:
    """A real function of s in [0, 1] held as a Chebyshev series."""

    __slots__ = ("coef",)

    def __init__(self, coef):
        self.coef = np.asarray(coef, dtype=float)

    @classmethod
    def from_callable(cls, fn, degree: int = DEFAULT_DEGREE) -> "Profile":
        coef = _ch.chebinterpolate(lambda x: fn(0.5 * (x + 1.0)), degree)
        # drop trailing roundoff noise: keeps polynomial data exactly
        # polynomial and tames amplification under repeated differentiation
        scale = np.abs(coef).max()
        if scale > 0.0:
            keep = np.nonzero(np.abs(coef) > 5e-14 * scale)[0]
            coef = coef[: keep[-1] + 1] if keep.size else coef[:1] * 0.0
        return cls(coef)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return _ch.chebval(2.0 * s - 1.0, self.coef)

    def deriv(self, order: int = 1) -> "Profile":
        c = self.coef
        for _ in range(order):
            c = 2.0 * _ch.chebder(c)  # chain rule for x = 2s - 1
            if c.size == 0:
                c = np.zeros(1)
        return Profile(c)

    def antideriv(self) -> "Profile":
        return Profile(0.5 * _ch.chebint(self.coef))

    def tail(self) -> float:
        """Relative magnitude of the trailing coefficients."""
        c = np.abs(self.coef)
        scale = c.max()
        if scale == 0.0 or c.size < 8:
            return 0.0
        return float(c[-3:].max() / scale)

    def check_tail(self, tol: float = TAIL_TOL) -> "Profile":
        t = self.tail()
        if t > tol:
            raise TailTooLarge(t, tol)
        return self

    def sup_norm(self, num: int = 512) -> float:
        s = np.linspace(0.0, 1.0, num)
        return float(np.abs(self(s)).max())


def differentiate(profile: Profile, tol: float = TAIL_TOL) -> Profile:
    """Spectral derivative with a smoothness gate on the input."""
    profile.check_tail(tol)
    return profile.deriv()
