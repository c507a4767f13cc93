"""Adaptive quadrature of the subordination integrals and lemma ratio sweeps.

The time integrals run in u = log t with adaptive Simpson panels that are
vectorized over many independent segments. Each sweep point contributes
one segment per smooth piece of its integrand.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammaincc

from .bernstein import ConfigurationError, DomainError
from .domain import DomainGeometry, GeometryError, LocalizationBox, localization_box
from .estimates import (ComparisonKernel, boundary_factor, boundary_factor_pair,
                        green_comparison, heat_kernel_comparison)


class ConvergenceError(RuntimeError):
    """Tolerance not reached; ``partial`` holds the best available estimate."""

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class DivergenceError(ArithmeticError):
    pass


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rtol: float = 1e-8
    max_panels: int = 4000       # per segment
    init_panels: int = 4
    lower_cut: float = 1e-14     # small range starts at lower_cut * Phi(r)

    def __post_init__(self):
        if not 0 < self.rtol < 1e-3:
            raise ConfigurationError("relative tolerance must lie in (0, 1e-3)")
        if self.max_panels < self.init_panels or self.init_panels < 1:
            raise ConfigurationError("bad panel counts")

    def split_points(self, k: ComparisonKernel, dx, dy, r):
        """Kinks of the time integrand for one triple: Phi(dx), Phi(dy), Phi(r), T."""
        pts = {float(k.Phi(dx)), float(k.Phi(dy)), float(k.Phi(r)), k.T}
        return sorted(pts)


# ---------------------------------------------------------------------------
# vectorized adaptive Simpson on log t

def _simpson(h, fa, fm, fb):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def integrate_log_segments(F: Callable, seg: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                           nseg: int, spec: QuadratureSpec):
    """Sum over segments of int_{lo}^{hi} F(seg, t) dt, accumulated per owner id.

    ``seg`` is the owner index of each segment (several segments may share an
    owner). F is called with arrays (owner ids, t) and must broadcast.
    Returns (values per owner, total panel count).
    """
    seg = np.asarray(seg, int)
    a0, b0 = np.log(lo), np.log(hi)
    m = spec.init_panels
    width = b0 - a0
    sid = np.repeat(np.arange(len(seg)), m)
    k = np.tile(np.arange(m), len(seg))
    a = a0[sid] + width[sid] * k / m
    b = a0[sid] + width[sid] * (k + 1) / m

    def G(s, u):
        t = np.exp(u)
        return F(seg[s], t) * t

    fa, fb = G(sid, a), G(sid, b)
    fm = G(sid, 0.5 * (a + b))
    S1 = _simpson(b - a, fa, fm, fb)
    rough = np.bincount(sid, weights=np.abs(S1), minlength=len(seg))
    result = np.zeros(len(seg))
    count = np.full(len(seg), m)
    failed = np.zeros(len(seg), bool)
    while len(a):
        m_ = 0.5 * (a + b)
        fl = G(sid, 0.5 * (a + m_))
        fr = G(sid, 0.5 * (m_ + b))
        Sl = _simpson(m_ - a, fa, fl, fm)
        Sr = _simpson(b - m_, fm, fr, fb)
        S2 = Sl + Sr
        err = np.abs(S2 - S1)
        frac = (b - a) / width[sid]
        tol = 0.5 * spec.rtol * np.maximum(np.abs(S2), rough[sid] * frac)
        ok = err <= 15.0 * tol
        over = count[sid] >= spec.max_panels
        done = ok | over
        np.add.at(result, sid[done], (S2 + (S2 - S1) / 15.0)[done])
        if np.any(over & ~ok):
            failed[np.unique(sid[over & ~ok])] = True
        keep = ~done
        np.add.at(count, sid[keep], 1)
        sid_k = sid[keep]
        a, b = np.concatenate([a[keep], m_[keep]]), np.concatenate([m_[keep], b[keep]])
        fa, fb = np.concatenate([fa[keep], fm[keep]]), np.concatenate([fm[keep], fb[keep]])
        fm = np.concatenate([fl[keep], fr[keep]])
        S1 = np.concatenate([Sl[keep], Sr[keep]])
        sid = np.concatenate([sid_k, sid_k])
    out = np.bincount(seg, weights=result, minlength=nseg)
    if failed.any():
        raise ConvergenceError(f"{failed.sum()} segments missed rtol={spec.rtol:g} "
                               f"within {spec.max_panels} panels", partial=out)
    return out, int(count.sum())


def _lower_remainder(F: Callable, owner, t0):
    """Mass of int_0^t0 F dt from the local power law of t F(t) near t0."""
    g1 = F(owner, t0) * t0
    g2 = F(owner, 2 * t0) * 2 * t0
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.log(g2 / g1) / np.log(2.0)
    zero = g1 == 0
    if np.any(~zero & ~(p > 0)):
        raise DivergenceError("integrand not integrable at t = 0")
    return np.where(zero, 0.0, g1 / np.where(zero, 1.0, p))


def _segments(owner, cuts):
    """Build segments from an (n, m) array of sorted cut points per owner."""
    lo, hi = cuts[:, :-1], cuts[:, 1:]
    own = np.broadcast_to(owner[:, None], lo.shape)
    keep = hi > lo * (1 + 1e-13)
    return own[keep], lo[keep], hi[keep]


# ---------------------------------------------------------------------------
# weights

@dataclass(frozen=True)
class PowerWeight:
    """f(t) = c t^q, nonincreasing for q <= 0."""

    c: float
    q: float

    def __call__(self, t):
        return self.c * np.asarray(t, float) ** self.q


def resolve_weight(k: ComparisonKernel, weight) -> Callable:
    if isinstance(weight, str):
        g = k.law.gamma
        if weight == "v":
            if g is not None:
                return PowerWeight(1.0 / gamma_fn(g), g - 1.0)
            return k.law.v
        if weight == "nu":
            if g is not None:
                return PowerWeight(g / gamma_fn(1.0 - g), -1.0 - g)
            return k.law.nu
        if weight == "one":
            return PowerWeight(1.0, 0.0)
        raise ConfigurationError(f"unknown weight {weight!r}")
    if not callable(weight):
        raise ConfigurationError("weight must be 'v', 'nu', 'one' or callable")
    tt = np.geomspace(1e-10, 1e3, 60)
    w = np.asarray(weight(tt), float)
    if np.any(w < 0) or np.any(np.diff(w) > 1e-12 * np.abs(w[:-1]) + 1e-300):
        raise ConfigurationError("custom weight must be nonnegative and nonincreasing")
    return weight


def _upper_gamma(s, x):
    """Gamma(s, x) for s > -1 (non-integer or positive), x > 0."""
    if s > 0:
        return gammaincc(s, x) * gamma_fn(s)
    if s == 0:
        from scipy.special import exp1
        return exp1(x)
    return (_upper_gamma(s + 1.0, x) - x ** s * np.exp(-x)) / s


# ---------------------------------------------------------------------------
# subordination integrals

RANGES = ("small", "mid", "tail")


def subordination_integral(k: ComparisonKernel, dx, dy, r, weight="v", range_="small",
                           spec: QuadratureSpec = QuadratureSpec()):
    """int p(t) f(t) dt over one of the three time ranges, with p replaced by r(t,x,y).

    The tail uses the large-time form exp(-lam1 t) Phi(dx)^1/2 Phi(dy)^1/2.
    Vectorized over broadcastable (dx, dy, r).
    """
    dx, dy, r = np.broadcast_arrays(*(np.asarray(a, float) for a in (dx, dy, r)))
    shape = dx.shape
    dx, dy, r = dx.ravel(), dy.ravel(), r.ravel()
    if np.any(~((dx > 0) & (dy > 0) & (r > 0))):
        raise DomainError("boundary triple must be positive")
    f = resolve_weight(k, weight)
    n = len(dx)
    Pr, Px, Py = k.Phi(r), k.Phi(dx), k.Phi(dy)
    T = k.T
    own = np.arange(n)

    if range_ == "tail":
        amp = np.sqrt(Px * Py)
        if isinstance(f, PowerWeight):
            if f.c == 0:
                return np.zeros(shape)
            lam = k.lam1
            val = f.c * lam ** (-f.q - 1.0) * _upper_gamma(f.q + 1.0, lam * T)
            return (amp * val).reshape(shape)

        def Ft(o, t):
            return np.exp(-k.lam1 * t) * f(t) * np.ones_like(o, dtype=float)
        tend = T + 60.0 / k.lam1
        v, _ = integrate_log_segments(Ft, np.zeros(1, int), np.array([T]),
                                      np.array([tend]), 1, spec)
        return (amp * v[0]).reshape(shape)

    def F(o, t):
        return heat_kernel_comparison(k, t, dx[o], dy[o], r[o]) * f(t)

    if range_ == "small":
        t0 = spec.lower_cut * Pr
        cuts = np.sort(np.stack([t0, np.clip(Px, t0, Pr), np.clip(Py, t0, Pr), Pr], 1), 1)
    elif range_ == "mid":
        if np.any(Pr >= T):
            raise DomainError("mid range needs Phi(r) < T")
        cuts = np.sort(np.stack([Pr, np.clip(Px, Pr, T), np.clip(Py, Pr, T),
                                 np.full(n, T)], 1), 1)
    else:
        raise ConfigurationError(f"unknown range {range_!r}")
    so, slo, shi = _segments(own, cuts)
    val, _ = integrate_log_segments(F, so, slo, shi, n, spec)
    if range_ == "small":
        val = val + _lower_remainder(F, own, t0)
    return val.reshape(shape)


def assemble_green(k: ComparisonKernel, dx, dy, r, spec: QuadratureSpec = QuadratureSpec()):
    return sum(subordination_integral(k, dx, dy, r, "v", rg, spec) for rg in RANGES)


def assemble_jump(k: ComparisonKernel, dx, dy, r, spec: QuadratureSpec = QuadratureSpec()):
    return sum(subordination_integral(k, dx, dy, r, "nu", rg, spec) for rg in RANGES)


# ---------------------------------------------------------------------------
# lemma sweeps

@dataclass(frozen=True)
class Sweep:
    """Geometric grid in each of dx, dy, r over [lo_frac diam, hi_frac diam]."""

    diam: float = 2.0
    lo_frac: float = 1e-3
    hi_frac: float = 1.0
    n: int = 12

    def axis(self):
        return np.geomspace(self.lo_frac * self.diam, self.hi_frac * self.diam, self.n)

    def grid(self):
        a = self.axis()
        X, Y, R = np.meshgrid(a, a, a, indexing="ij")
        return X.ravel(), Y.ravel(), R.ravel()

    def refined(self) -> "Sweep":
        """Double the density; the refined grid nests the original one."""
        return Sweep(self.diam, self.lo_frac, self.hi_frac, 2 * self.n - 1)

    def to_dict(self):
        return dict(diam=self.diam, lo_frac=self.lo_frac, hi_frac=self.hi_frac, n=self.n)


@dataclass
class RatioReport:
    check: str
    sweep: dict
    min_ratio: float
    max_ratio: float
    C: float
    cap: float
    passed: bool
    one_sided: bool = False
    worst: list = field(default_factory=list)
    coords: Optional[np.ndarray] = None      # (n, m) sweep coordinates
    coord_names: tuple = ("dx", "dy", "r")
    measured: Optional[np.ndarray] = None
    predicted: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)

    @property
    def ratios(self):
        return self.measured / self.predicted

    def summary(self) -> dict:
        out = dict(check=self.check, sweep=self.sweep, min_ratio=self.min_ratio,
                   max_ratio=self.max_ratio, C=self.C, cap=self.cap, passed=self.passed,
                   one_sided=self.one_sided, worst=self.worst)
        out.update(self.extra)
        return out


def ratio_report(check, measured, predicted, coords, cap=100.0, one_sided=False,
                 sweep=None, coord_names=("dx", "dy", "r"), n_worst=5, extra=None):
    measured = np.asarray(measured, float)
    predicted = np.asarray(predicted, float)
    ratio = measured / predicted
    if not np.all(np.isfinite(ratio)):
        raise DataError(f"{check}: non-finite ratios")
    lo, hi = float(ratio.min()), float(ratio.max())
    if one_sided:
        C = max(hi, 1.0)
        order = np.argsort(-ratio)
    else:
        C = max(hi, 1.0 / lo) if lo > 0 else np.inf
        order = np.argsort(-np.maximum(ratio, 1.0 / np.maximum(ratio, 1e-300)))
    coords = np.asarray(coords, float)
    worst = [dict(zip(coord_names, map(float, coords[i])), ratio=float(ratio[i]))
             for i in order[:n_worst]]
    return RatioReport(check, sweep or {}, lo, hi, float(C), float(cap), bool(C < cap),
                       one_sided, worst, coords, tuple(coord_names), measured, predicted,
                       extra or {})


LEMMAS = ("6.1", "6.2", "6.3", "8.1i", "8.1ii", "8.2i", "8.2ii", "green", "jump")


def _check_lemma_hypothesis(k: ComparisonKernel, lemma: str):
    w = k.psi.window
    if lemma in ("8.1i", "8.2i") and not w.lower_exp > 0.5:
        raise ConfigurationError(f"lemma {lemma} needs gamma1 > 1/2 "
                                 f"(fitted gamma1 = {w.lower_exp:g})")
    if lemma in ("8.1ii", "8.2ii") and not w.upper_exp < 0.5:
        raise ConfigurationError(f"lemma {lemma} needs gamma2 < 1/2 "
                                 f"(fitted gamma2 = {w.upper_exp:g})")


def lemma_values(k: ComparisonKernel, lemma: str, dx, dy, r,
                 spec: QuadratureSpec = QuadratureSpec()):
    """(measured, predicted, one_sided) for one lemma at sweep points."""
    _check_lemma_hypothesis(k, lemma)
    B = boundary_factor(k, dx, dy, r)
    Pr = k.Phi(r)
    rd = r ** k.d
    if lemma == "6.3":
        return (subordination_integral(k, dx, dy, r, "v", "small", spec),
                B * Pr * k.law.v(Pr) / rd, False)
    if lemma == "6.2":
        return (subordination_integral(k, dx, dy, r, "one", "mid", spec), B * Pr / rd, True)
    if lemma == "6.1":
        return (subordination_integral(k, dx, dy, r, "v", "tail", spec),
                B * Pr * k.law.v(Pr) / rd, True)
    if lemma in ("8.1i", "8.1ii"):
        dmin, dmax = np.minimum(dx, dy), np.maximum(dx, dy)
        if lemma == "8.1i":
            pred = np.minimum(k.theta(dmin) / k.theta(r), 1.0) * k.j(r)
        else:
            pred = (np.minimum(np.sqrt(k.Phi(dmin) / Pr), 1.0)
                    * np.minimum(k.eta(dmax) / k.eta(r), 1.0) * k.j(r))
        return subordination_integral(k, dx, dy, r, "nu", "small", spec), pred, False
    if lemma in ("8.2i", "8.2ii"):
        lhs, rhs = boundary_factor_pair(k, dx, dy, r, lemma[3:])
        return lhs, rhs, True
    if lemma == "green":
        return assemble_green(k, dx, dy, r, spec), green_comparison(k, dx, dy, r), False
    if lemma == "jump":
        from .estimates import jump_comparison
        return assemble_jump(k, dx, dy, r, spec), jump_comparison(k, dx, dy, r, "stable"), False
    raise ConfigurationError(f"unknown lemma id {lemma!r}")


def verify_lemma(lemma: str, k: ComparisonKernel, sweep: Sweep = None, cap: float = 100.0,
                 spec: QuadratureSpec = QuadratureSpec()) -> RatioReport:
    if sweep is None:
        sweep = Sweep(diam=k.diam)
    dx, dy, r = sweep.grid()
    meas, pred, one = lemma_values(k, lemma, dx, dy, r, spec)
    return ratio_report(f"lemma {lemma}", np.broadcast_to(meas, dx.shape),
                        np.broadcast_to(pred, dx.shape), np.stack([dx, dy, r], 1), cap, one,
                        sweep.to_dict())


# ---------------------------------------------------------------------------
# two-dimensional integrals over the domain

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _gl_panels(edges):
    """Gauss-Legendre nodes/weights on consecutive panels given by sorted edges."""
    a, b = edges[..., :-1], edges[..., 1:]
    h = 0.5 * (b - a)
    c = 0.5 * (b + a)
    x = c[..., None] + h[..., None] * _GL_X
    w = h[..., None] * _GL_W
    return x.reshape(*x.shape[:-2], -1), w.reshape(*w.shape[:-2], -1)


def _graded_fractions(levels):
    """Sorted fractions of [0, 1], geometric toward both ends."""
    base = 2.0 ** -np.arange(levels, 0, -1)
    return np.concatenate([[0.0], base, 1.0 - base[::-1], [1.0]])


def _ray_intervals(domain: DomainGeometry, x, dirs):
    """Intervals of s > 0 with x + s e inside the domain, per direction (<= 2 each)."""
    c = np.asarray(domain.center)
    p = x - c
    pe = dirs @ p
    pp = p @ p
    L = -pe + np.sqrt(pe ** 2 - (pp - domain.radius ** 2))
    if domain.shape == "disk":
        return [(np.zeros_like(L), L)]
    disc = pe ** 2 - (pp - domain.r_in ** 2)
    root = np.sqrt(np.maximum(disc, 0.0))
    hit = (disc > 0) & (-pe - root > 0)
    s1 = np.where(hit, -pe - root, L)
    s2 = np.where(hit, -pe + root, L)
    return [(np.zeros_like(L), s1), (s2, L)]


def exit_time_integral(k: ComparisonKernel, domain: DomainGeometry, x, n_theta: int = 512,
                       levels: int = 40):
    """int_D green_comparison(x, y) dy by polar quadrature about x (d = 2).

    Radial panels are graded geometrically toward the pole, toward s = delta(x)
    and toward the boundary; the mass below the first radial edge is added
    from the local power law.
    """
    x = np.asarray(x, float)
    if domain.d != 2:
        raise GeometryError("two-dimensional quadrature only")
    if not domain.contains(x):
        raise DomainError("x must be an interior point")
    dx = float(domain.dist(x))
    th = 2 * np.pi * (np.arange(n_theta) + 0.5) / n_theta
    dirs = np.stack([np.cos(th), np.sin(th)], 1)
    F = _graded_fractions(levels)
    total = 0.0
    for j, (a, b) in enumerate(_ray_intervals(domain, x, dirs)):
        a, b = a[:, None], b[:, None]
        if j == 0:
            sp = np.minimum(dx, b)
            edges = np.concatenate([sp * F, sp + (b - sp) * F[1:]], 1)
        else:
            edges = a + (b - a) * F
        s, w = _gl_panels(edges)
        y = x + s[..., None] * dirs[:, None, :]
        dy = domain.dist(y)
        good = dy > 0
        val = green_comparison(k, dx, np.where(good, dy, 1.0), np.where(s > 0, s, 1.0)) * s
        total += np.sum(w * np.where(good & (s > 0), val, 0.0))
        if j == 0:
            s0 = edges[:, 1:2] * np.array([1.0, 2.0])
            y0 = x + s0[..., None] * dirs[:, None, :]
            G = green_comparison(k, dx, domain.dist(y0), s0) * s0 * s0
            p = np.log(G[:, 1] / G[:, 0]) / np.log(2.0)
            if not np.all(p > 0):
                raise DivergenceError("green kernel not integrable at the pole")
            total += np.sum(G[:, 0] / p)
    return float(total * 2 * np.pi / n_theta)


def _box_edges(lo, hi, focus, levels):
    """Edges on [lo, hi] graded geometrically toward each point in ``focus``."""
    base = 2.0 ** -np.arange(levels, 0, -1)
    pts = [[lo, hi]]
    for f in focus:
        if lo <= f <= hi:
            if f > lo:
                pts.append(f - (f - lo) * base)
            if f < hi:
                pts.append(f + (hi - f) * base)
            pts.append([f])
    return np.unique(np.concatenate(pts))


def box_integral(k: ComparisonKernel, box: LocalizationBox, x, weight_exp: float,
                 levels: int = 30):
    """int_V green_comparison(x, z) Phi(delta_D(z))^weight_exp dz over V = box (d = 2)."""
    dom = box.domain
    if dom.d != 2:
        raise GeometryError("two-dimensional quadrature only")
    x = np.asarray(x, float)
    xt, xr = box.coords(x)
    n = box.normal
    tang = np.array([-n[1], n[0]])
    # signed tangential coordinate of x
    v = x - np.asarray(box.Q)
    xs = float(v @ tang)
    xr = float(xr)
    dx = float(dom.dist(x))
    R = dom.radius
    us, wu = _gl_panels(_box_edges(-box.r2, box.r2, [xs], levels))
    ps, wp = _gl_panels(_box_edges(0.0, box.r1, [0.0, xr], levels))
    U, P = np.meshgrid(us, ps, indexing="ij")
    W = np.outer(wu, wp)
    fy = R - np.sqrt(R * R - U ** 2)
    z = np.asarray(box.Q) + U[..., None] * tang + (fy + P)[..., None] * n
    dz = dom.dist(z)
    rr = np.linalg.norm(z - x, axis=-1)
    good = (dz > 0) & (rr > 0)
    g = green_comparison(k, dx, np.where(good, dz, 1.0), np.where(good, rr, 1.0))
    if weight_exp != 0:
        g = g * k.Phi(np.where(good, dz, 1.0)) ** weight_exp
    return float(np.sum(W * np.where(good, g, 0.0)))


def counterexample_weight_exp(k: ComparisonKernel) -> float:
    g = k.law.gamma
    if g is None:
        raise ConfigurationError("needs a stable psi")
    return max(0.5 - g, 0.0)


def counterexample_profile(k: ComparisonKernel, domain: DomainGeometry, Q, r0: float, depths,
                           box: Optional[LocalizationBox] = None, levels: int = 30,
                           control: bool = False):
    """Rows (delta, h(delta), h(delta)/Phi(delta)^1/2) along the inward normal at Q.

    h(x) = int_V G(x, z) Phi(delta_D(z))^(1/2 - gamma) dz with V = D_Q(r0/2, r0/2).
    With ``control=True`` the construction's limit weight Phi^max(1/2-gamma, 0)
    is used, which allows gamma > 1/2 (then h is the exit-time profile of V).
    """
    from .domain import normal_ray_points
    g = k.law.gamma
    if g is None:
        raise ConfigurationError("counterexample needs a stable psi")
    if g > 0.5 and not control:
        raise ConfigurationError(f"construction applies only for gamma <= 1/2 (gamma = {g})")
    box = box or localization_box(domain, Q, r0)
    depths = np.asarray(depths, float)
    if np.any(depths >= box.r1) or np.any(depths <= 0):
        raise GeometryError("ray depths must lie inside the localization box")
    wexp = counterexample_weight_exp(k) if control else 0.5 - g
    pts = normal_ray_points(domain, Q, 1.0 * box.r1, depths / box.r1)
    rows = []
    for d, x in zip(depths, pts):
        h = box_integral(k, box, x, wexp, levels)
        rows.append((float(d), h, h / float(np.sqrt(k.Phi(d)))))
    return rows


def bhp_control_profile(k: ComparisonKernel, domain, Q, r0, depths, **kw):
    return counterexample_profile(k, domain, Q, r0, depths, control=True, **kw)


# ---------------------------------------------------------------------------
# killing density

@dataclass(frozen=True)
class FactorizedSurvival:
    """P_x(tau > t) ~ sqrt(Phi(delta)/t) ^ 1, decaying like exp(-lam1 (t - T)) after T."""

    k: ComparisonKernel
    delta: float

    @property
    def kinks(self):
        return [float(self.k.Phi(self.delta))]

    def __call__(self, t):
        t = np.asarray(t, float)
        P = self.k.Phi(self.delta)
        T = self.k.T
        s = np.minimum(np.sqrt(P / np.minimum(t, T)), 1.0)
        return np.where(t > T, s * np.exp(-self.k.lam1 * (t - T)), s)


@dataclass(frozen=True)
class TabulatedSurvival:
    """Survival table from simulation; linear interpolation from (0, 1)."""

    times: tuple
    values: tuple

    def __post_init__(self):
        v = np.asarray(self.values, float)
        t = np.asarray(self.times, float)
        if np.any((v < 0) | (v > 1)):
            raise DataError("survival values must lie in [0, 1]")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise DataError("survival times must be positive and increasing")

    @property
    def kinks(self):
        return list(self.times)

    def __call__(self, t):
        tt = np.concatenate([[0.0], self.times])
        vv = np.concatenate([[1.0], self.values])
        return np.interp(t, tt, vv)


class _ConstSurvival:
    def __init__(self, c):
        if not 0 <= c <= 1:
            raise DataError("survival values must lie in [0, 1]")
        self.c = float(c)
        self.kinks = []

    def __call__(self, t):
        return np.full(np.shape(t), self.c)


def killing_density(k: ComparisonKernel, domain: DomainGeometry, x, survival="factorized",
                    spec: QuadratureSpec = QuadratureSpec()):
    """kappa(x) = int_0^inf (1 - P_x(tau > t)) nu(t) dt."""
    x = np.asarray(x, float)
    if not domain.contains(x):
        raise DomainError("x must be interior")
    delta = float(domain.dist(x))
    if isinstance(survival, str):
        if survival != "factorized":
            raise ConfigurationError(f"unknown survival model {survival!r}")
        model = FactorizedSurvival(k, delta)
    elif isinstance(survival, (int, float)):
        model = _ConstSurvival(survival)
    else:
        model = survival
    nu = resolve_weight(k, "nu")
    probe = np.asarray(model(np.geomspace(1e-12, 10 * k.T, 50)), float)
    if np.any((probe < 0) | (probe > 1)):
        raise DataError("survival values must lie in [0, 1]")
    if np.all(probe == 1.0):
        return 0.0
    T = k.T
    tend = T + 60.0 / k.lam1

    def F(o, t):
        return (1.0 - model(t)) * nu(t)

    # first time the killing integrand is nonzero
    cuts = sorted(set([c for c in model.kinks if 0 < c < tend] + [T]))
    start = 1e-14 * cuts[0]
    if isinstance(model, FactorizedSurvival):
        start = model.kinks[0]
    edges = np.array(sorted(set([start] + [c for c in cuts if c > start] + [tend])))
    own = np.zeros(len(edges) - 1, int)
    val, _ = integrate_log_segments(F, own, edges[:-1], edges[1:], 1, spec)
    total = float(val[0])
    if not isinstance(model, FactorizedSurvival):
        total += float(_lower_remainder(F, np.zeros(1, int), np.array([start]))[0])
    # beyond tend the survival is negligible: int nu exactly for a power weight
    if isinstance(nu, PowerWeight):
        s = float(model(tend))
        total += (1 - s) * nu.c * tend ** (nu.q + 1) / -(nu.q + 1)
    return total
