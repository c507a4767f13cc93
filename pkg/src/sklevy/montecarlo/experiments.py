"""Monte Carlo experiments: lifetime laws, Green consistency, ratio experiments.

Fitted constants from simulation carry delta-method standard errors, and
"stable under n -> m n" means two independent runs agree within
``STABLE_Z`` combined standard errors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..bernstein import ConfigurationError
from ..domain import DomainGeometry, disk, localization_box, normal_ray_points
from ..estimates import stable_kernel
from ..quadrature import RatioReport, assemble_green, ratio_report
from .estimators import (Ball, CellGrid, PathConfig, counterexample_mc,
                         estimate_harmonic, estimate_lifetime, estimate_occupation_green,
                         z_score)
from .rng import RngStream

STABLE_Z = 3.0


# ---------------------------------------------------------------------------
# fits

def slope_fit(x, y):
    """Least-squares slope of log y on log x."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def log_correlation(values, delta):
    """Pearson correlation of values with log(1/delta)."""
    return float(np.corrcoef(values, np.log(1.0 / np.asarray(delta)))[0, 1])


def ray_depths(lo: float, hi: float, npts: int):
    return np.geomspace(lo, hi, npts)


# ---------------------------------------------------------------------------
# lifetimes

@dataclass
class LifetimeProfile:
    depths: np.ndarray
    estimates: list
    slope: float
    log_corr: float           # correlation of E zeta / delta^delta_phi with log(1/delta)

    @property
    def means(self):
        return np.array([e.mean for e in self.estimates])

    @property
    def stderrs(self):
        return np.array([e.stderr for e in self.estimates])


def lifetime_profile(cfg: PathConfig, n: int, stream: RngStream, depths,
                     domain: Optional[DomainGeometry] = None, angle: float = 0.0,
                     method: str = "renewal", workers=None) -> LifetimeProfile:
    domain = domain or disk()
    depths = np.asarray(depths, float)
    Q = domain.boundary_point(angle)
    r0 = float(depths.max())
    pts = normal_ray_points(domain, Q, r0, depths / r0)
    est = [estimate_lifetime(x, n, domain, cfg, stream.child(i), method, workers)
           for i, x in enumerate(pts)]
    m = np.array([e.mean for e in est])
    return LifetimeProfile(depths, est, slope_fit(depths, m),
                           log_correlation(m / depths ** cfg.delta_phi, depths))


# ---------------------------------------------------------------------------
# Green function consistency

@dataclass
class GreenConsistency:
    report: RatioReport
    C_se: float
    symmetry: list            # (cell_a, cell_b, est_ab, est_ba, z)


def _fitted_C(ratio, se):
    """Two-sided constant C = max(max r, 1/min r) with its delta-method stderr."""
    i, j = int(np.argmax(ratio)), int(np.argmin(ratio))
    if ratio[i] >= 1.0 / ratio[j]:
        return ratio[i], se[i]
    return 1.0 / ratio[j], se[j] / ratio[j] ** 2


def green_ratio(x, cells: CellGrid, n: int, domain: DomainGeometry, cfg: PathConfig,
                stream: RngStream, min_sep: float, max_rse: float = 0.05, workers=None):
    """Ratio of occupation-based G to the assembled comparison kernel over cells.

    Cells fully inside D, at distance >= min_sep from x, and with relative
    stderr <= max_rse are scored. Returns (report, C, C stderr).
    """
    k = stable_kernel(cfg.delta_phi, cfg.gamma, diam=domain.diam)
    occ = estimate_occupation_green(x, cells, n, domain, cfg, stream, workers=workers)
    c = cells.centers()
    sep = np.linalg.norm(c - np.asarray(x), axis=1)
    mask = cells.inside_mask(domain) & (sep >= min_sep) & (occ.mean > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        rse = np.where(occ.mean > 0, occ.stderr / occ.mean, np.inf)
    mask &= rse <= max_rse
    idx = np.flatnonzero(mask)
    dx = float(domain.dist(x))
    pred = assemble_green(k, dx, domain.dist(c[idx]), sep[idx])
    meas = occ.mean[idx] / cells.area
    se = occ.stderr[idx] / cells.area
    ratio = meas / pred
    C, Cse = _fitted_C(ratio, se / pred)
    rep = ratio_report("green occupation", meas, pred,
                       np.column_stack([idx, c[idx]]), cap=np.inf,
                       coord_names=("cell", "cx", "cy"),
                       extra={"n": n, "cells_scored": int(len(idx)), "C_stderr": Cse})
    return rep, float(C), float(Cse), occ


def green_symmetry(pairs, cells: CellGrid, n: int, domain: DomainGeometry, cfg: PathConfig,
                   stream: RngStream, workers=None):
    """Cell-averaged occupation A -> B against B -> A for each pair of cells."""
    out = []
    for i, (a, b) in enumerate(pairs):
        ra = estimate_occupation_green(None, cells, n, domain, cfg, stream.child(i, 0),
                                       start_cell=a, workers=workers)
        rb = estimate_occupation_green(None, cells, n, domain, cfg, stream.child(i, 1),
                                       start_cell=b, workers=workers)
        eab, eba = ra.estimate(b), rb.estimate(a)
        out.append((int(a), int(b), eab, eba, z_score(eab, eba)))
    return out


# ---------------------------------------------------------------------------
# boundary data for harmonic functions (functions of exit positions, shape (m, d))

def standard_data(center=(0.0, 0.0)):
    c = np.asarray(center, float)
    return {
        "one": lambda y: np.ones(len(y)),
        "half": lambda y: (y[:, 1] > c[1]).astype(float),
        "radial": lambda y: np.sum((y - c) ** 2, axis=1),
        "exp": lambda y: np.exp(2.0 * (y[:, 0] - c[0])),
        "dist": lambda y: np.sqrt(np.maximum(1.0 - np.linalg.norm(y, axis=1), 0.0)),
    }


def _masked(f, keep: Callable):
    return lambda y: f(y) * keep(y)


@dataclass
class RatioExperiment:
    report: RatioReport
    values: dict              # datum -> list of McEstimate per point
    points: np.ndarray
    C_se: float


def _spread(values, norm, se):
    """C = max v / min v for v = values / norm, with delta-method stderr."""
    v = values / norm
    i, j = int(np.argmax(v)), int(np.argmin(v))
    C = v[i] / v[j]
    rse = math.hypot(se[i] / values[i], se[j] / values[j])
    return C, C * rse


def _harmonic_table(points, region, data, n, domain, cfg, stream, workers):
    names = list(data)
    fs = [data[k] for k in names]
    table = {k: [] for k in names}
    for i, x in enumerate(points):
        ests = estimate_harmonic(x, region, fs, n, domain, cfg, stream.child(i), workers)
        for k, e in zip(names, ests):
            table[k].append(e)
    return table


def _scenario(kind, scenario):
    defaults = {
        "harnack": dict(x0=(0.0, 0.0), r=0.2),
        "carleson": dict(Q=(1.0, 0.0), r=0.4, depths=(1e-3, 1e-2, 0.05, 0.15),
                         angles=(-0.08, 0.0, 0.08)),
        "bhp": dict(Q=(1.0, 0.0), r=0.4, depths=(1e-3, 4e-3, 1e-2, 0.04, 0.1),
                    angles=(-0.08, 0.0, 0.08)),
        "interior-bhp": dict(E_center=(0.0, 0.0), E_radius=0.5, r=0.1,
                             depths=(1e-3, 4e-3, 1e-2, 0.03)),
    }
    if kind not in defaults:
        raise ConfigurationError(f"unknown ratio experiment {kind!r}")
    out = dict(defaults[kind])
    out.update(scenario or {})
    return out


def ratio_experiment(kind: str, scenario: Optional[dict], n: int, cfg: PathConfig,
                     stream: RngStream, domain: Optional[DomainGeometry] = None,
                     cap: float = np.inf, workers=None) -> RatioExperiment:
    """Build harmonic functions from boundary data and score the theorem's ratio.

    harnack       spread of f over B(x0, r/2), f harmonic in B(x0, r)
    carleson      max of f(x)/f(x0) over a near-boundary grid in B(Q, r/2)
    bhp           spread of f(x)/Phi(delta_D(x))^1/2 over B(Q, r/2)
    interior-bhp  spread of f(x)/delta_E(x)^(gamma delta_phi) near Q on the
                  inner surface of E = B(c_E, R_E)
    C is the worst constant over the boundary data.
    """
    domain = domain or disk()
    sc = _scenario(kind, scenario)
    data = standard_data(domain.center)
    if kind == "harnack":
        x0 = np.asarray(sc["x0"], float)
        r = sc["r"]
        if domain.dist(x0) <= r:
            raise ConfigurationError("B(x0, r) must lie inside D")
        region = Ball(tuple(x0), r)
        pts = [x0] + [x0 + rad * np.array([math.cos(a), math.sin(a)])
                      for rad in (0.25 * r, 0.45 * r)
                      for a in np.arange(4) * math.pi / 2 + math.pi / 4]
        pts = np.array(pts)
        norm_fn = lambda p: np.ones(len(p))
        one_sided = False
    elif kind in ("carleson", "bhp"):
        if kind == "bhp" and not cfg.gamma > 0.5:
            raise ConfigurationError("bhp needs gamma1 > 1/2")
        Q = np.asarray(sc["Q"], float)
        r = sc["r"]
        if r > domain.c11[0]:
            raise ConfigurationError("r exceeds the C^{1,1} radius")
        region = (Ball(tuple(Q), r),)
        base = math.atan2(Q[1] - domain.center[1], Q[0] - domain.center[0])
        pts = []
        R = domain.radius
        c = np.asarray(domain.center)
        for a in sc["angles"]:
            for dep in sc["depths"]:
                p = c + (R - dep) * np.array([math.cos(base + a), math.sin(base + a)])
                if np.linalg.norm(p - Q) < r / 2:
                    pts.append(p)
        if kind == "carleson":
            kappa = domain.kappa_fat[1]
            x0 = Q + 0.5 * r * domain.inward_normal(Q)
            if domain.dist(x0) < kappa * r / 2:
                raise ConfigurationError("x0 too close to the boundary")
            pts = [x0] + pts
            norm_fn = lambda p: np.ones(len(p))
            one_sided = True
        else:
            norm_fn = lambda p: domain.dist(p) ** cfg.delta_phi
            one_sided = False
        pts = np.array(pts)
    else:  # interior-bhp
        cE = np.asarray(sc["E_center"], float)
        RE = sc["E_radius"]
        r = sc["r"]
        Q = cE + np.array([RE, 0.0] + [0.0] * (domain.d - 2))
        if domain.dist(Q) <= r:
            raise ConfigurationError("B(Q, r) must stay inside D")
        region = (Ball(tuple(cE), RE), Ball(tuple(Q), r))
        inE = lambda y: (np.linalg.norm(y - cE, axis=1) < RE).astype(float)
        data = {k: _masked(f, inE) for k, f in data.items()}
        pts = np.array([Q - dep * np.array([1.0, 0.0] + [0.0] * (domain.d - 2))
                        for dep in sc["depths"] if dep < r / 2])
        norm_fn = lambda p: (RE - np.linalg.norm(p - cE, axis=1)) ** (cfg.gamma * cfg.delta_phi)
        one_sided = False

    table = _harmonic_table(pts, region, data, n, domain, cfg, stream, workers)
    norm = norm_fn(pts)
    worst_C, worst_se, worst_key = 0.0, 0.0, None
    rows_m, rows_p, rows_c = [], [], []
    for di, (key, ests) in enumerate(table.items()):
        m = np.array([e.mean for e in ests])
        se = np.array([e.stderr for e in ests])
        if np.any(m <= 0):
            raise ConfigurationError(f"datum {key}: zero harmonic estimate, increase n")
        if one_sided:
            v = m[1:] / m[0]
            i = int(np.argmax(v))
            C = max(v[i], 1.0)
            Cse = v[i] * math.hypot(se[1 + i] / m[1 + i], se[0] / m[0])
            ref = np.full(len(m), m[0])
        else:
            C, Cse = _spread(m, norm, se)
            ref = norm * np.exp(np.mean(np.log(m / norm)))
        if C > worst_C:
            worst_C, worst_se, worst_key = C, Cse, key
        rows_m.append(m)
        rows_p.append(ref)
        rows_c.append(np.column_stack([np.full(len(m), di), pts[:, :2]]))
    meas = np.concatenate(rows_m)
    pred = np.concatenate(rows_p)
    rep = ratio_report(kind, meas, pred, np.concatenate(rows_c), cap=cap,
                       one_sided=one_sided, coord_names=("datum", "x", "y"),
                       extra={"n": n, "data": list(table), "worst_datum": worst_key,
                              "C_stderr": worst_se})
    # the fitted constant is the worst spread over the data
    rep.C = float(worst_C)
    rep.passed = bool(worst_C < cap)
    return RatioExperiment(rep, table, pts, float(worst_se))


def stable_pair(C1, se1, C2, se2, z: float = STABLE_Z) -> bool:
    return abs(C1 - C2) <= z * math.hypot(se1, se2)


# ---------------------------------------------------------------------------
# boundary Harnack failure

# top of the depth window as a fraction of the box height r0/2. The MC
# functional is stopped on leaving V, which depresses the profile near the
# top of V; the quadrature integrates the Green function of D over V and
# has no such edge, so the two use different windows.
QUAD_TOP_FRAC = 0.6
MC_TOP_FRAC = 0.15


def counterexample_depths(r0: float, top_frac: float = QUAD_TOP_FRAC, decades: float = 2.0,
                          npts: int = 5):
    """Depths on the normal ray inside V = D_Q(r0/2, r0/2): top at top_frac of the box height."""
    top = top_frac * 0.5 * r0
    return np.geomspace(top * 10 ** -decades, top, npts)


@dataclass
class CounterexampleProfile:
    depths: np.ndarray
    normalized: np.ndarray
    stderr: np.ndarray
    growth: float
    log_corr: float
    monotone: bool


def summarize_profile(depths, normalized, stderr=None) -> CounterexampleProfile:
    depths = np.asarray(depths, float)
    nr = np.asarray(normalized, float)
    order = np.argsort(depths)
    d, v = depths[order], nr[order]
    se = np.zeros_like(v) if stderr is None else np.asarray(stderr, float)[order]
    return CounterexampleProfile(d, v, se, float(v[0] / v[-1]), log_correlation(v, d),
                                 bool(np.all(np.diff(v) < 0)))


def counterexample_mc_profile(cfg: PathConfig, n: int, stream: RngStream, r0: float = 0.2,
                              depths=None, domain: Optional[DomainGeometry] = None,
                              control: bool = False, workers=None):
    domain = domain or disk()
    Q = domain.boundary_point(0.0)
    box = localization_box(domain, Q, r0)
    if depths is None:
        depths = counterexample_depths(r0, MC_TOP_FRAC)
    depths = np.asarray(depths, float)
    pts = normal_ray_points(domain, Q, box.r1, depths / box.r1)
    rows = counterexample_mc(pts, box, n, cfg, stream, control=control, workers=workers)
    prof = summarize_profile([r[0] for r in rows], [r[2].mean for r in rows],
                             [r[2].stderr for r in rows])
    return prof, rows
