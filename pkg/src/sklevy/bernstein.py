"""Laplace exponents, the scale function Phi and subordinator densities.

Exponents are restricted to stable powers, finite convex combinations of
stable powers, compositions of these, and tabulated log-log interpolants.
All are normalized to take the value 1 at lambda = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma as gamma_fn


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class RangeError(ValueError):
    """Inversion target not attainable."""


class ConfigurationError(ValueError):
    """Inconsistent model configuration."""


KINDS = ("stable", "mixture", "compose", "tabulated")


@dataclass(frozen=True)
class ScalingWindow:
    """Weak scaling bounds a1 (R/r)^lo <= f(R)/f(r) <= a2 (R/r)^hi on [r_min, r_max]."""

    lower_const: float
    lower_exp: float
    upper_const: float
    upper_exp: float
    r_min: float = 1.0
    r_max: float = 1e6

    def __post_init__(self):
        if not self.lower_exp <= self.upper_exp:
            raise ValueError("lower exponent exceeds upper exponent")
        if self.lower_const <= 0 or self.upper_const <= 0:
            raise ValueError("scaling constants must be positive")
        if not self.r_max > self.r_min:
            raise ValueError("empty scaling range")

    def to_dict(self):
        return dict(lower_const=self.lower_const, lower_exp=self.lower_exp,
                    upper_const=self.upper_const, upper_exp=self.upper_exp,
                    r_min=self.r_min, r_max=self.r_max)


def _check_alpha(a):
    a = float(a)
    if not 0.0 < a < 1.0:
        raise ConfigurationError(f"stable index must lie in (0, 1), got {a}")
    return a


def _positive(lam):
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        raise DomainError("Laplace exponent evaluated at non-positive argument")
    return lam


@dataclass(frozen=True, eq=False)
class LaplaceExponent:
    """A normalized Bernstein-type function.

    Use the constructors :func:`stable`, :func:`mixture`, :func:`compose`
    and :func:`tabulated` rather than building instances by hand.
    """

    kind: str
    alphas: tuple = ()
    weights: tuple = ()
    outer: Optional["LaplaceExponent"] = None
    inner: Optional["LaplaceExponent"] = None
    table_x: tuple = ()
    table_y: tuple = ()
    norm: float = 1.0
    _window: Optional[ScalingWindow] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown exponent kind {self.kind!r}")

    # raw (unnormalized) evaluation
    def _raw(self, lam):
        if self.kind in ("stable", "mixture"):
            out = np.zeros_like(lam)
            for a, w in zip(self.alphas, self.weights):
                out = out + w * lam ** a
            return out
        if self.kind == "compose":
            return self.outer(self.inner(lam))
        lx, ly = np.log(self.table_x), np.log(self.table_y)
        u = np.log(lam)
        if np.any(u < lx[0] - 1e-12) or np.any(u > lx[-1] + 1e-12):
            raise DomainError("tabulated exponent evaluated outside its table")
        return np.exp(np.interp(u, lx, ly))

    def __call__(self, lam):
        lam = _positive(lam)
        out = np.asarray(self._raw(lam) / self.norm)
        return out if out.ndim else float(out)

    def elasticity(self, lam):
        """d log f / d log lambda."""
        lam = _positive(lam)
        if self.kind in ("stable", "mixture"):
            num = np.zeros_like(lam)
            den = np.zeros_like(lam)
            for a, w in zip(self.alphas, self.weights):
                num = num + a * w * lam ** a
                den = den + w * lam ** a
            return num / den
        if self.kind == "compose":
            return self.outer.elasticity(self.inner(lam)) * self.inner.elasticity(lam)
        lx, ly = np.log(self.table_x), np.log(self.table_y)
        slopes = np.diff(ly) / np.diff(lx)
        idx = np.clip(np.searchsorted(lx, np.log(lam)) - 1, 0, len(slopes) - 1)
        return slopes[idx]

    @property
    def stable_index(self) -> Optional[float]:
        """Index alpha if the function is exactly lambda^alpha, else None."""
        if self.kind == "stable":
            return self.alphas[0]
        if self.kind == "compose":
            a, b = self.outer.stable_index, self.inner.stable_index
            if a is not None and b is not None:
                return a * b
        return None

    @property
    def window(self) -> ScalingWindow:
        """Declared scaling window (exact for the closed-form kinds)."""
        if self._window is not None:
            return self._window
        if self.kind in ("stable", "mixture"):
            lo, hi = min(self.alphas), max(self.alphas)
            return ScalingWindow(1.0, lo, 1.0, hi)
        if self.kind == "compose":
            wo, wi = self.outer.window, self.inner.window
            return ScalingWindow(wo.lower_const * wi.lower_const ** wo.lower_exp,
                                 wo.lower_exp * wi.lower_exp,
                                 wo.upper_const * wi.upper_const ** wo.upper_exp,
                                 wo.upper_exp * wi.upper_exp)
        lo = max(1.0, self.table_x[0])
        return estimate_scaling_indices(self, (lo, self.table_x[-1]))

    def to_dict(self) -> dict:
        if self.kind == "stable":
            return {"kind": "stable", "alpha": self.alphas[0]}
        if self.kind == "mixture":
            return {"kind": "mixture", "alphas": list(self.alphas),
                    "weights": list(self.weights)}
        if self.kind == "compose":
            return {"kind": "compose", "outer": self.outer.to_dict(),
                    "inner": self.inner.to_dict()}
        return {"kind": "tabulated", "lam": list(self.table_x),
                "values": list(self.table_y)}

    def label(self) -> str:
        if self.kind == "stable":
            return f"lam^{self.alphas[0]:g}"
        if self.kind == "mixture":
            return " + ".join(f"{w:g} lam^{a:g}" for a, w in zip(self.alphas, self.weights))
        if self.kind == "compose":
            return f"({self.outer.label()}) o ({self.inner.label()})"
        return f"tabulated[{len(self.table_x)}]"


def stable(alpha: float) -> LaplaceExponent:
    a = _check_alpha(alpha)
    return LaplaceExponent("stable", alphas=(a,), weights=(1.0,))


def mixture(alphas, weights) -> LaplaceExponent:
    alphas = tuple(_check_alpha(a) for a in alphas)
    weights = tuple(float(w) for w in weights)
    if len(alphas) != len(weights) or not alphas:
        raise ConfigurationError("mixture needs matching non-empty alphas and weights")
    if any(w <= 0 for w in weights):
        raise ConfigurationError("mixture weights must be positive")
    s = sum(weights)
    return LaplaceExponent("mixture", alphas=alphas, weights=tuple(w / s for w in weights))


def compose(outer: LaplaceExponent, inner: LaplaceExponent) -> LaplaceExponent:
    """chi = outer o inner. Both factors are already normalized, so chi(1) = 1."""
    for f in (outer, inner):
        if not isinstance(f, LaplaceExponent):
            raise ConfigurationError("compose expects LaplaceExponent arguments")
    return LaplaceExponent("compose", outer=outer, inner=inner)


compose_exponents = compose


def tabulated(lam, values) -> LaplaceExponent:
    x = np.asarray(lam, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or len(x) < 2:
        raise ConfigurationError("table needs two matching 1-d arrays")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("table entries must be positive")
    if np.any(np.diff(x) <= 0) or np.any(np.diff(y) < 0):
        raise ConfigurationError("table must be increasing in lam and nondecreasing in value")
    if not x[0] <= 1.0 <= x[-1]:
        raise ConfigurationError("table must bracket lam = 1 for normalization")
    norm = float(np.exp(np.interp(0.0, np.log(x), np.log(y))))
    return LaplaceExponent("tabulated", table_x=tuple(x), table_y=tuple(y), norm=norm)


def exponent_from_dict(spec: dict) -> LaplaceExponent:
    kind = spec.get("kind")
    if kind == "stable":
        return stable(spec["alpha"])
    if kind == "mixture":
        return mixture(spec["alphas"], spec["weights"])
    if kind == "compose":
        return compose(exponent_from_dict(spec["outer"]), exponent_from_dict(spec["inner"]))
    if kind == "tabulated":
        return tabulated(spec["lam"], spec["values"])
    raise ConfigurationError(f"unknown exponent kind {kind!r}")


def eval_exponent(f: LaplaceExponent, lam):
    return f(lam)


def estimate_scaling_indices(f: Callable, rng=(1.0, 1e6), grid_size: int = 200,
                             allow_below_one: bool = False) -> ScalingWindow:
    """Fit a weak scaling window for f on a log grid.

    Exponents are the extreme log-slopes over all grid pairs with S >= 2 s.
    The constants are then the smallest ones making the two power bounds
    hold at every grid pair.
    """
    r, R = map(float, rng)
    if not R > r:
        raise ValueError("need R > r")
    if r < 1.0 and not allow_below_one:
        raise ValueError("scaling window lies at infinity (r >= 1); pass allow_below_one")
    x = np.geomspace(r, R, grid_size)
    y = np.asarray(f(x), dtype=float)
    if np.any(~(y > 0)):
        raise DomainError("non-positive samples in scaling fit")
    lx, ly = np.log(x), np.log(y)
    i, j = np.triu_indices(grid_size, k=1)
    dx, dy = lx[j] - lx[i], ly[j] - ly[i]
    far = dx >= np.log(2.0) - 1e-12
    if not np.any(far):
        raise ValueError("range too short for dyadic pairs")
    slopes = dy[far] / dx[far]
    lo, hi = float(slopes.min()), float(slopes.max())
    a1 = float(np.exp(np.min(dy - lo * dx)))
    a2 = float(np.exp(np.max(dy - hi * dx)))
    return ScalingWindow(min(a1, 1.0), lo, max(a2, 1.0), hi, r, R)


@dataclass(frozen=True)
class ScaleProfile:
    """Phi(r) = 1 / phi(r^-2) with a bracketed numerical inverse."""

    phi: LaplaceExponent
    inverse_tol: float = 1e-10

    def __call__(self, r):
        r = _positive(r)
        out = 1.0 / self.phi(r ** -2.0)
        return out

    @property
    def power(self) -> Optional[float]:
        """Exponent p if Phi(r) = r^p exactly."""
        a = self.phi.stable_index
        return None if a is None else 2.0 * a

    def elasticity(self, r):
        r = _positive(r)
        return 2.0 * self.phi.elasticity(r ** -2.0)

    def inverse(self, t):
        p = self.power
        if p is not None:
            t = _positive(t)
            return t ** (1.0 / p)
        return invert_scale(self, t)


def scale_profile(phi: LaplaceExponent, inverse_tol: float = 1e-10) -> ScaleProfile:
    return ScaleProfile(phi, inverse_tol)


def invert_scale(Phi: ScaleProfile, t, max_iter: int = 200):
    """Solve Phi(r) = t by safeguarded Newton-bisection in log r.

    The bracket is kept at every step, so this is a bisection that takes a
    Newton step whenever the step stays inside the bracket.
    """
    t = _positive(t)
    scalar = t.ndim == 0
    lt = np.atleast_1d(np.log(t)).astype(float)
    lo = np.full_like(lt, -1.0)
    hi = np.full_like(lt, 1.0)

    def F(u):
        return np.log(Phi(np.exp(u))) - lt

    # expand brackets
    for _ in range(80):
        flo = F(lo)
        bad = flo > 0
        if not bad.any():
            break
        lo = np.where(bad, 2 * lo - 1.0, lo)
    for _ in range(80):
        fhi = F(hi)
        bad = fhi < 0
        if not bad.any():
            break
        hi = np.where(bad, 2 * hi + 1.0, hi)
    try:
        flo, fhi = F(lo), F(hi)
    except DomainError as e:
        raise RangeError(f"inversion target outside achievable range: {e}") from None
    if np.any(flo > 0) or np.any(fhi < 0) or not np.all(np.isfinite(flo + fhi)):
        raise RangeError("inversion target outside achievable range")
    u = 0.5 * (lo + hi)
    tol = Phi.inverse_tol
    for _ in range(max_iter):
        fu = F(u)
        if np.all(np.abs(fu) <= tol * 1e-2):
            break
        lo = np.where(fu < 0, u, lo)
        hi = np.where(fu >= 0, u, hi)
        newton = u - fu / Phi.elasticity(np.exp(u))
        inside = (newton > lo) & (newton < hi) & np.isfinite(newton)
        u = np.where(inside, newton, 0.5 * (lo + hi))
    else:
        raise RangeError("inversion did not converge")
    r = np.exp(u)
    return float(r[0]) if scalar else r


@dataclass(frozen=True)
class SubordinatorLaw:
    """Law of the outer subordinator T with Laplace exponent psi."""

    psi: LaplaceExponent

    @property
    def gamma(self) -> Optional[float]:
        return self.psi.stable_index

    @property
    def exact(self) -> bool:
        return self.gamma is not None

    @property
    def mode(self) -> str:
        return "exact-stable" if self.exact else "asymptotic-proxy"

    def nu(self, t):
        t = _check_t(t)
        g = self.gamma
        if g is not None:
            return g * t ** (-1.0 - g) / gamma_fn(1.0 - g)
        return self.psi(1.0 / t) / t

    def v(self, t):
        t = _check_t(t)
        g = self.gamma
        if g is not None:
            return t ** (g - 1.0) / gamma_fn(g)
        return 1.0 / (t * self.psi(1.0 / t))

    def renewal(self, t):
        """U(t) = int_0^t v(s) ds (exact-stable mode only)."""
        g = self.gamma
        if g is None:
            raise ConfigurationError("renewal function only available for stable psi")
        t = np.asarray(t, dtype=float)
        return np.where(t > 0, np.maximum(t, 0.0) ** g, 0.0) / gamma_fn(1.0 + g)

    def doubling_constant(self, M: float = 1.0, grid_size: int = 200) -> float:
        """Smallest c with nu(t) <= c nu(2t) on a log grid of (0, M]."""
        t = np.geomspace(M * 1e-8, M, grid_size)
        return float(np.max(self.nu(t) / self.nu(2 * t)))


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("subordinator densities need t > 0")
    return t


def subordinator_densities(law: SubordinatorLaw, t):
    return law.nu(t), law.v(t)


def _local_exponent(f, t):
    """-d log f / d log t at t by a one-sided difference."""
    return -math.log(float(f(t * 1.01)) / float(f(t))) / math.log(1.01)


def laplace_transforms(law: SubordinatorLaw, lam):
    """Numerical int (1 - e^{-lam t}) nu(t) dt and int e^{-lam t} v(t) dt.

    They should equal psi(lam) and 1/psi(lam). Integrals run in u = log t
    over [u0 - 200, u0 + 40] with u0 = -log lam. Outside that range the
    densities are treated as local power laws: below it the integrands are
    lam t nu(t) and v(t), above it nu(t) (the v mass above is negligible).
    """
    from scipy.integrate import quad

    lam = np.atleast_1d(np.asarray(lam, float))
    out_nu, out_v = [], []
    for l in lam:
        u0 = -math.log(l)
        fnu = lambda u: -math.expm1(-l * math.exp(u)) * float(law.nu(math.exp(u))) * math.exp(u)
        fv = lambda u: math.exp(-l * math.exp(u)) * float(law.v(math.exp(u))) * math.exp(u)
        cuts = (u0 - 200, u0 - 40, u0, u0 + 4, u0 + 40)
        a = sum(quad(fnu, lo, hi, epsabs=0, epsrel=1e-11, limit=400)[0]
                for lo, hi in zip(cuts[:-1], cuts[1:]))
        b = sum(quad(fv, lo, hi, epsabs=0, epsrel=1e-11, limit=400)[0]
                for lo, hi in zip(cuts[:-1], cuts[1:]))
        t0, t1 = math.exp(cuts[0]), math.exp(cuts[-1])
        a += l * t0 * t0 * float(law.nu(t0)) / (2.0 - _local_exponent(law.nu, t0))
        a += t1 * float(law.nu(t1)) / (_local_exponent(law.nu, t1) - 1.0)
        b += t0 * float(law.v(t0)) / (1.0 - _local_exponent(law.v, t0))
        out_nu.append(a)
        out_v.append(b)
    return np.array(out_nu), np.array(out_v)
