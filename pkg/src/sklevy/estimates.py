"""Closed-form comparison functions of the two-sided estimates.

Every function here returns an unnormalized comparison value. Constants
are always fitted downstream. Inputs broadcast as numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bernstein import (ConfigurationError, DomainError, LaplaceExponent, ScaleProfile,
                        SubordinatorLaw, scale_profile, stable)

# squared first zero of J0: Dirichlet eigenvalue of the unit disk for the Laplacian
DISK_LAMBDA1 = 5.783185962946784


@dataclass(frozen=True)
class BoundaryTriple:
    dx: float
    dy: float
    r: float

    def __post_init__(self):
        if not (self.dx > 0 and self.dy > 0 and self.r > 0):
            raise DomainError("boundary distances and separation must be positive")


@dataclass(frozen=True)
class ComparisonKernel:
    """Estimate functions g, j, theta, eta and r(t,x,y) for fixed (d, phi, psi)."""

    d: int
    Phi: ScaleProfile
    law: SubordinatorLaw
    lam1: float = DISK_LAMBDA1
    diam: float = 2.0

    def __post_init__(self):
        if self.d < 2:
            raise ConfigurationError("dimension must be at least 2")
        if self.lam1 <= 0 or self.diam <= 0:
            raise ConfigurationError("lam1 and diam must be positive")

    @property
    def psi(self) -> LaplaceExponent:
        return self.law.psi

    @property
    def T(self) -> float:
        """Small/large time threshold, twice Phi(diam)."""
        return 2.0 * float(self.Phi(self.diam))

    def with_diam(self, diam: float) -> "ComparisonKernel":
        return ComparisonKernel(self.d, self.Phi, self.law, self.lam1, diam)

    def psi_inv_Phi(self, r):
        """psi(Phi(r)^-1)."""
        return self.psi(1.0 / self.Phi(r))

    def g(self, r):
        r = np.asarray(r, float)
        return 1.0 / (r ** self.d * self.psi_inv_Phi(r))

    def j(self, r):
        r = np.asarray(r, float)
        return self.psi_inv_Phi(r) / r ** self.d

    def theta(self, t):
        return self.Phi(t) * self.psi_inv_Phi(t)

    def eta(self, t):
        return np.sqrt(self.Phi(t)) * self.psi_inv_Phi(t)


def stable_kernel(delta_phi: float, gamma: float, d: int = 2, **kw) -> ComparisonKernel:
    return ComparisonKernel(d, scale_profile(stable(delta_phi)),
                            SubordinatorLaw(stable(gamma)), **kw)


def _sat(a):
    return np.minimum(a, 1.0)


def heat_kernel_comparison(k: ComparisonKernel, t, dx, dy, r):
    t, dx, dy, r = np.broadcast_arrays(*(np.asarray(a, float) for a in (t, dx, dy, r)))
    bx = _sat(np.sqrt(k.Phi(dx) / t))
    by = _sat(np.sqrt(k.Phi(dy) / t))
    # branches cross at t = Phi(r); pick them exactly there
    near = np.asarray(k.Phi.inverse(t), float) ** (-k.d)
    far = t / (r ** k.d * k.Phi(r))
    return bx * by * np.minimum(near, far)


def boundary_factor(k: ComparisonKernel, dx, dy, r):
    """(sqrt(Phi(dx)/Phi(r)) ^ 1)(sqrt(Phi(dy)/Phi(r)) ^ 1)."""
    Pr = k.Phi(r)
    return _sat(np.sqrt(k.Phi(dx) / Pr)) * _sat(np.sqrt(k.Phi(dy) / Pr))


def green_comparison(k: ComparisonKernel, dx, dy, r):
    return boundary_factor(k, dx, dy, r) * k.g(r)


def _check_case(k: ComparisonKernel, case: str) -> str:
    w = k.psi.window
    g = k.law.gamma
    if case == "i":
        if not w.lower_exp > 0.5:
            raise ConfigurationError(f"case i needs gamma1 > 1/2, fitted gamma1 = {w.lower_exp:g}")
        return "i"
    if case == "ii":
        if not w.upper_exp < 0.5:
            raise ConfigurationError(f"case ii needs gamma2 < 1/2, fitted gamma2 = {w.upper_exp:g}")
        return "ii"
    if case == "stable":
        if g is None:
            raise ConfigurationError("case stable needs an exactly stable psi")
        if g > 0.5:
            return "i"
        if g < 0.5:
            return "ii"
        return "half"
    raise ConfigurationError(f"unknown jump case {case!r}")


def jump_comparison(k: ComparisonKernel, dx, dy, r, case: str = "stable"):
    c = _check_case(k, case)
    dx, dy, r = np.broadcast_arrays(*(np.asarray(a, float) for a in (dx, dy, r)))
    dmin, dmax = np.minimum(dx, dy), np.maximum(dx, dy)
    if c == "i":
        return _sat(k.theta(dmin) / k.theta(r)) * k.j(r)
    if c == "ii":
        Pr = k.Phi(r)
        return _sat(np.sqrt(k.Phi(dmin) / Pr)) * _sat(k.eta(dmax) / k.eta(r)) * k.j(r)
    Pr = k.Phi(r)
    Pmin, Pmax = k.Phi(dmin), k.Phi(dmax)
    lg = np.log1p(np.minimum(Pmax, Pr) / np.minimum(Pmin, Pr))
    return _sat(np.sqrt(Pmin / Pr)) * lg / (np.sqrt(Pr) * r ** k.d)


REGIMES = ("gamma1-high", "gamma2-low", "half")


def exit_time_comparison(k: ComparisonKernel, delta, regime: str):
    delta = np.asarray(delta, float)
    if np.any(~(delta > 0)):
        raise DomainError("boundary distance must be positive")
    P = k.Phi(delta)
    if regime == "gamma1-high":
        return np.sqrt(P)
    if regime == "gamma2-low":
        return 1.0 / k.psi(1.0 / P)
    if regime == "half":
        if np.any(delta >= 1.0):
            raise DomainError("regime half needs delta < 1")
        return np.sqrt(P) * np.log(1.0 / delta)
    raise ConfigurationError(f"unknown exit-time regime {regime!r}")


def boundary_factor_pair(k: ComparisonKernel, dx, dy, r, case: str):
    """(lhs, rhs) of the one-sided boundary factor inequality lhs <= C rhs."""
    dx, dy, r = np.broadcast_arrays(*(np.asarray(a, float) for a in (dx, dy, r)))
    lhs = boundary_factor(k, dx, dy, r)
    dmin, dmax = np.minimum(dx, dy), np.maximum(dx, dy)
    if case == "i":
        rhs = _sat(k.theta(dmin) / k.theta(r))
    elif case == "ii":
        rhs = _sat(np.sqrt(k.Phi(dmin) / k.Phi(r))) * _sat(k.eta(dmax) / k.eta(r))
    else:
        raise ConfigurationError(f"unknown case {case!r}")
    return lhs, rhs
