"""Monte Carlo estimators built on the path kernels.

Lifetimes and occupation measures use the renewal identity
E_x int_0^zeta f(Y_t) dt = E_x int_0^tau f(Z_s) v(s) ds, which needs only Z^D
paths; the per-path score of a set A is sum_k 1_A(Z_{s_k}) (U(s_{k+1}) - U(s_k)).
Harmonic measures and the additive functional need Y^D paths.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from ..domain import DomainGeometry, LocalizationBox
from . import paths as K
from .rng import RngStream, run_chunks


@dataclass(frozen=True)
class PathConfig:
    """Simulation parameters.

    c_out, c_in scale the outer (Y clock) and inner (Z skeleton) steps, see
    :mod:`sklevy.montecarlo.paths`. ``refined(4)`` quadruples the inner
    substeps.
    """

    delta_phi: float = 0.9
    gamma: float = 0.8
    c_out: float = 0.05
    c_in: float = 0.01
    floor_frac: float = 0.1
    time_cap: float = 1e3          # Y time
    z_time_cap: float = 1e3         # Z time
    boundary_mode: str = "grid-only"
    chunk: int = 2048

    def __post_init__(self):
        for name in ("delta_phi", "gamma"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        for name in ("c_out", "c_in", "floor_frac", "time_cap", "z_time_cap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.boundary_mode not in ("grid-only", "bridge-corrected"):
            raise ValueError(f"unknown boundary mode {self.boundary_mode!r}")
        if self.chunk < 1:
            raise ValueError("chunk must be positive")

    @property
    def bridge(self) -> bool:
        return self.boundary_mode == "bridge-corrected"

    @property
    def ucoef(self) -> float:
        return 1.0 / math.gamma(1.0 + self.gamma)

    def refined(self, inner: float = 4.0, outer: float = 1.0) -> "PathConfig":
        return replace(self, c_in=self.c_in / inner, c_out=self.c_out / outer)

    def renewal(self, s):
        return self.ucoef * np.asarray(s, float) ** self.gamma

    def to_dict(self):
        return dict(delta_phi=self.delta_phi, gamma=self.gamma, c_out=self.c_out,
                    c_in=self.c_in, floor_frac=self.floor_frac, time_cap=self.time_cap,
                    z_time_cap=self.z_time_cap, boundary_mode=self.boundary_mode,
                    chunk=self.chunk)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int
    warning: Optional[str] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("McEstimate needs n >= 1")

    @classmethod
    def from_samples(cls, x, warning=None) -> "McEstimate":
        x = np.asarray(x, float)
        n = len(x)
        sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
        return cls(float(np.mean(x)), sd / math.sqrt(n), n, warning)

    @classmethod
    def from_sums(cls, s, ss, n) -> "McEstimate":
        m = s / n
        var = max(ss / n - m * m, 0.0) * n / max(n - 1, 1)
        return cls(float(m), math.sqrt(var / n), int(n))

    def to_dict(self):
        out = dict(mean=self.mean, stderr=self.stderr, n=self.n)
        if self.warning:
            out["warning"] = self.warning
        return out


def z_score(a: McEstimate, b: McEstimate) -> float:
    """|a - b| in units of the combined standard error."""
    s = math.hypot(a.stderr, b.stderr)
    return abs(a.mean - b.mean) / s if s > 0 else (0.0 if a.mean == b.mean else np.inf)


# ---------------------------------------------------------------------------
# geometry encoding

def encode_domain(domain: DomainGeometry) -> np.ndarray:
    kind = 0.0 if domain.shape == "disk" else 1.0
    return np.array([kind, domain.r_in, domain.radius, *domain.center], float)


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def row(self):
        r = np.zeros(K.PRIM_W)
        r[0] = 1.0
        r[1:1 + len(self.center)] = self.center
        r[7] = self.radius
        return r

    def contains(self, x):
        return np.linalg.norm(np.asarray(x) - np.asarray(self.center), axis=-1) < self.radius


def _box_row(box: LocalizationBox):
    r = np.zeros(K.PRIM_W)
    r[0] = 2.0
    d = len(box.Q)
    r[1:1 + d] = box.Q
    r[4:4 + d] = box.normal
    r[7] = box.domain.radius
    r[8], r[9] = box.r1, box.r2
    return r


def encode_region(region) -> np.ndarray:
    """A region is None (= D), a Ball, a LocalizationBox, or a tuple of these (intersection)."""
    if region is None:
        return K.EMPTY_PRIMS
    if not isinstance(region, (tuple, list)):
        region = (region,)
    rows = [p.row() if isinstance(p, Ball) else _box_row(p) for p in region]
    return np.array(rows, float)


def region_contains(region, x, domain: DomainGeometry):
    inside = domain.contains(x)
    if region is None:
        return inside
    if not isinstance(region, (tuple, list)):
        region = (region,)
    for p in region:
        inside = inside & p.contains(x)
    return inside


@dataclass(frozen=True)
class CellGrid:
    """Square cells of side h with lower-left corner (x_lo, y_lo)."""

    x_lo: float
    y_lo: float
    h: float
    nx: int
    ny: int

    def encode(self):
        return np.array([self.x_lo, self.y_lo, self.h, self.nx, self.ny], float)

    @property
    def ncell(self):
        return self.nx * self.ny

    def centers(self):
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        return np.stack([self.x_lo + (i.ravel() + 0.5) * self.h,
                         self.y_lo + (j.ravel() + 0.5) * self.h], 1)

    def corners(self, c):
        i, j = divmod(int(c), self.ny)
        return self.x_lo + i * self.h, self.y_lo + j * self.h

    def index_of(self, x):
        i = int(np.floor((x[0] - self.x_lo) / self.h))
        j = int(np.floor((x[1] - self.y_lo) / self.h))
        return i * self.ny + j

    def inside_mask(self, domain: DomainGeometry):
        """Cells whose four corners lie in the domain (for a disk: cell inside)."""
        c = self.centers()
        off = 0.5 * self.h * np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]])
        return np.all([domain.contains(c + o) for o in off], axis=0)

    def sample(self, cell: int, m: int, rng: np.random.Generator):
        x0, y0 = self.corners(cell)
        u = rng.random((m, 2))
        return np.stack([x0 + self.h * u[:, 0], y0 + self.h * u[:, 1]], 1)

    @property
    def area(self):
        return self.h * self.h


# ---------------------------------------------------------------------------
# raw simulation drivers

def _starts(x0, m):
    x0 = np.asarray(x0, float)
    return np.ascontiguousarray(np.broadcast_to(x0, (m, len(x0))))


def _check_interior(domain, x, region=None):
    x = np.atleast_2d(np.asarray(x, float))
    if not np.all(region_contains(region, x, domain)):
        raise ValueError("starting point must be interior to the domain and region")


def run_z(x0, domain: DomainGeometry, cfg: PathConfig, n: int, stream: RngStream,
          cells: Optional[CellGrid] = None, start_sampler: Optional[Callable] = None,
          workers: Optional[int] = None):
    """Simulate n killed Z paths. Returns dict with tau, truncated, cell sums."""
    dom = encode_domain(domain)
    cenc = K.NO_CELLS if cells is None else cells.encode()
    if start_sampler is None:
        _check_interior(domain, x0)

    def job(i, m, rng):
        X0 = _starts(x0, m) if start_sampler is None else start_sampler(m, rng)
        return K.z_paths(X0, dom, cfg.delta_phi, cfg.c_in, cfg.floor_frac, cfg.z_time_cap,
                         cfg.bridge, cfg.gamma, cfg.ucoef, cenc, rng)

    res = run_chunks(job, stream, n, cfg.chunk, workers)
    out = dict(tau=np.concatenate([r[0] for r in res]),
               truncated=np.concatenate([r[1] for r in res]))
    if cells is not None:
        out["cell_sum"] = np.sum([r[2] for r in res], axis=0)
        out["cell_sumsq"] = np.sum([r[3] for r in res], axis=0)
    return out


def run_y(x0, domain: DomainGeometry, cfg: PathConfig, n: int, stream: RngStream,
          region=None, wexp: float = 0.0, cells: Optional[CellGrid] = None,
          workers: Optional[int] = None):
    """Simulate n Y^D paths until exit from region, death or cap."""
    dom = encode_domain(domain)
    prims = encode_region(region)
    cenc = K.NO_CELLS if cells is None else cells.encode()
    _check_interior(domain, x0, region)

    def job(i, m, rng):
        return K.y_paths(_starts(x0, m), dom, prims, cfg.delta_phi, cfg.gamma, cfg.c_out,
                         cfg.c_in, cfg.floor_frac, cfg.time_cap, float(wexp), cfg.bridge,
                         cenc, rng)

    res = run_chunks(job, stream, n, cfg.chunk, workers)
    keys = ("status", "ytime", "exitpos", "func", "n_outer", "cell_sum", "cell_sumsq")
    out = {}
    for j, kk in enumerate(keys[:5]):
        out[kk] = np.concatenate([r[j] for r in res])
    if cells is not None:
        out["cell_sum"] = np.sum([r[5] for r in res], axis=0)
        out["cell_sumsq"] = np.sum([r[6] for r in res], axis=0)
    return out


@dataclass
class PathRecord:
    times: np.ndarray
    positions: np.ndarray
    status: int
    zeta: Optional[float]        # death time (outer-step midpoint) or None
    exited: bool
    truncated: bool


def simulate_yd_path(x0, domain: DomainGeometry, cfg: PathConfig, rng: np.random.Generator,
                     region=None) -> PathRecord:
    """One Y^D path with its outer skeleton. Positions are all interior to D."""
    _check_interior(domain, x0, region)
    t, P, st, tend = K.y_record(np.asarray(x0, float), encode_domain(domain),
                                encode_region(region), cfg.delta_phi, cfg.gamma, cfg.c_out,
                                cfg.c_in, cfg.floor_frac, cfg.time_cap, cfg.bridge, rng)
    zeta = None
    if st == K.DIED:
        zeta = 0.5 * (t[-1] + tend)
    return PathRecord(t, P, int(st), zeta, st == K.EXITED, st == K.TRUNCATED)


# ---------------------------------------------------------------------------
# estimators

def _trunc_warning(frac):
    if frac > 0.01:
        msg = f"{100 * frac:.2f}% of paths hit the time cap"
        warnings.warn(msg, RuntimeWarning)
        return msg
    return None


def estimate_survival(x, t, n: int, domain: DomainGeometry, cfg: PathConfig,
                      stream: RngStream, workers=None):
    """P_x(tau^Z_D > t) for each t, from common Z^D paths (monotone in t)."""
    t = np.atleast_1d(np.asarray(t, float))
    if t.max() >= cfg.z_time_cap:
        raise ValueError("survival time beyond the Z time cap")
    res = run_z(x, domain, cfg, n, stream, workers=workers)
    return [McEstimate.from_samples(res["tau"] > ti) for ti in t]


def estimate_lifetime(x, n: int, domain: DomainGeometry, cfg: PathConfig, stream: RngStream,
                      method: str = "renewal", workers=None) -> McEstimate:
    """E_x zeta. ``renewal`` scores U(tau^Z); ``path`` runs Y^D to its death."""
    if method == "renewal":
        res = run_z(x, domain, cfg, n, stream, workers=workers)
        return McEstimate.from_samples(cfg.renewal(res["tau"]),
                                       _trunc_warning(res["truncated"].mean()))
    if method == "path":
        res = run_y(x, domain, cfg, n, stream, workers=workers)
        return McEstimate.from_samples(res["ytime"],
                                       _trunc_warning(np.mean(res["status"] == K.TRUNCATED)))
    raise ValueError(f"unknown lifetime method {method!r}")


def estimate_harmonic(x, region, data, n: int, domain: DomainGeometry, cfg: PathConfig,
                      stream: RngStream, workers=None):
    """E_x[f(Y_{tau_U})] for one callable f or a list of them (common paths).

    Dead and truncated paths score 0.
    """
    res = run_y(x, domain, cfg, n, stream, region=region, workers=workers)
    fs = data if isinstance(data, (list, tuple)) else [data]
    ok = res["status"] == K.EXITED
    w = _trunc_warning(np.mean(res["status"] == K.TRUNCATED))
    out = []
    for f in fs:
        val = np.zeros(n)
        if ok.any():
            val[ok] = np.asarray(f(res["exitpos"][ok]), float)
        out.append(McEstimate.from_samples(val, w))
    return out if isinstance(data, (list, tuple)) else out[0]


@dataclass
class OccupationResult:
    cells: CellGrid
    mean: np.ndarray       # per-cell estimate of int_cell G(x, y) dy
    stderr: np.ndarray
    n: int
    total: McEstimate      # per-path total occupation

    def estimate(self, c) -> McEstimate:
        return McEstimate(float(self.mean[c]), float(self.stderr[c]), self.n)


def _cell_stats(s, ss, n):
    m = s / n
    var = np.maximum(ss / n - m * m, 0.0) * n / max(n - 1, 1)
    return m, np.sqrt(var / n)


def estimate_occupation_green(x, cells: CellGrid, n: int, domain: DomainGeometry,
                              cfg: PathConfig, stream: RngStream, method: str = "renewal",
                              start_cell: Optional[int] = None, workers=None):
    """Per-cell occupation of Y^D started at x, i.e. int_cell G(x, y) dy.

    With ``start_cell`` the start is uniform in that cell, giving the cell
    average over x instead.
    """
    sampler = None
    if start_cell is not None:
        sampler = lambda m, rng: cells.sample(start_cell, m, rng)
    if method == "renewal":
        res = run_z(x, domain, cfg, n, stream, cells=cells, start_sampler=sampler,
                    workers=workers)
        total = McEstimate.from_samples(cfg.renewal(res["tau"]),
                                        _trunc_warning(res["truncated"].mean()))
    elif method == "path":
        if sampler is not None:
            raise ValueError("path method needs a fixed start")
        res = run_y(x, domain, cfg, n, stream, cells=cells, workers=workers)
        # occupation is sum of h over outer steps before death; total = sum of all h
        total = McEstimate.from_samples(res["ytime"])
    else:
        raise ValueError(f"unknown occupation method {method!r}")
    m, se = _cell_stats(res["cell_sum"], res["cell_sumsq"], n)
    return OccupationResult(cells, m, se, n, total)


def counterexample_weight(delta_phi: float, gamma: float, control: bool = False) -> float:
    """Exponent q with Phi(delta)^(1/2 - gamma) = delta^q."""
    p = 0.5 - gamma
    if gamma > 0.5:
        if not control:
            raise ValueError(f"construction applies only for gamma <= 1/2 (gamma = {gamma})")
        p = 0.0
    return 2.0 * delta_phi * p


def counterexample_mc(points, box: LocalizationBox, n: int, cfg: PathConfig,
                      stream: RngStream, control: bool = False, workers=None):
    """Rows (delta, McEstimate of E_x int_0^tau_V Phi(delta_D(Y))^(1/2-gamma) dt, normalized).

    With ``control=True`` and gamma > 1/2 the weight exponent is clipped at 0,
    so the functional is E_x tau_V.
    """
    if cfg.gamma > 0.5 and not control:
        raise ValueError("construction applies only for gamma <= 1/2; "
                         f"gamma = {cfg.gamma}")
    q = counterexample_weight(cfg.delta_phi, cfg.gamma, control)
    dom = box.domain
    rows = []
    for i, x in enumerate(np.atleast_2d(points)):
        res = run_y(x, dom, cfg, n, stream.child(i), region=box, wexp=q, workers=workers)
        est = McEstimate.from_samples(res["func"],
                                      _trunc_warning(np.mean(res["status"] == K.TRUNCATED)))
        delta = float(dom.dist(x))
        rows.append((delta, est, _normalized(est, delta ** cfg.delta_phi)))
    return rows


def _normalized(est: McEstimate, scale: float) -> McEstimate:
    return McEstimate(est.mean / scale, est.stderr / scale, est.n, est.warning)
