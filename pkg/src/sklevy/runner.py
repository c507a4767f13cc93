"""Experiment orchestration: config -> checks -> Report.

Each check turns into one CheckResult whose pass flag is computed from the
numbers stored in it. Numerical failures (convergence, divergence, range,
hypothesis mismatch) become failed checks carrying the error text.
"""
from __future__ import annotations

import time
import warnings
from typing import Optional

import numpy as np

from .bernstein import (ConfigurationError, DomainError, RangeError, SubordinatorLaw, compose,
                        estimate_scaling_indices, exponent_from_dict, laplace_transforms,
                        scale_profile, stable)
from .config import ExperimentConfig
from .domain import GeometryError, domain_from_dict, normal_ray_points
from .estimates import ComparisonKernel, exit_time_comparison
from .montecarlo import experiments as X
from .montecarlo.estimators import CellGrid, PathConfig, estimate_lifetime, z_score
from .montecarlo.rng import RngStream, default_workers
from .quadrature import (ConvergenceError, DataError, DivergenceError, QuadratureSpec, Sweep,
                         assemble_jump, counterexample_profile, exit_time_integral,
                         verify_lemma)
from .report import CheckResult, Report, provenance

NUMERICAL_ERRORS = (ConvergenceError, DivergenceError, RangeError, DomainError, DataError,
                    ConfigurationError, GeometryError, ValueError)


# ---------------------------------------------------------------------------
# object construction

def _psi(cfg: ExperimentConfig, chk: dict):
    if chk.get("gamma") is not None:
        return stable(chk["gamma"])
    return exponent_from_dict(cfg.psi)


def _phi(cfg: ExperimentConfig, chk: dict):
    if chk.get("delta_phi") is not None:
        return stable(chk["delta_phi"])
    return exponent_from_dict(cfg.phi)


def kernel_for(cfg: ExperimentConfig, chk: Optional[dict] = None) -> ComparisonKernel:
    chk = chk or {}
    dom = domain_from_dict(cfg.domain)
    return ComparisonKernel(dom.d, scale_profile(_phi(cfg, chk)),
                            SubordinatorLaw(_psi(cfg, chk)), diam=dom.diam)


def path_config_for(cfg: ExperimentConfig, chk: Optional[dict] = None) -> PathConfig:
    chk = chk or {}
    phi, psi = _phi(cfg, chk), _psi(cfg, chk)
    if phi.kind != "stable" or psi.kind != "stable":
        raise ConfigurationError("simulation supports stable phi and psi only")
    return PathConfig(delta_phi=phi.alphas[0], gamma=psi.alphas[0], **cfg.path)


def regime_for(gamma: float) -> str:
    if gamma > 0.5:
        return "gamma1-high"
    if gamma < 0.5:
        return "gamma2-low"
    return "half"


def _depths(spec):
    return np.geomspace(spec["lo"], spec["hi"], spec["n"])


def _ray(domain, depths, angle=0.0):
    Q = domain.boundary_point(angle)
    r0 = float(np.max(depths))
    return normal_ray_points(domain, Q, r0, depths / r0)


def _law_values(law, depths, values, expect, tol, min_corr, delta_phi):
    """Pass flag and fitted numbers for a slope or log-corrected profile law."""
    out = {}
    if law == "slope":
        out["slope"] = X.slope_fit(depths, values)
        if expect is None:
            raise ConfigurationError("slope law needs 'expect'")
        out["expect"], out["tol"] = expect, tol
        ok = abs(out["slope"] - expect) <= tol
    else:
        # values / delta^beta against log(1/delta); beta defaults to delta_phi
        beta = delta_phi if expect is None else expect
        out["beta"] = beta
        out["log_corr"] = X.log_correlation(np.asarray(values) / depths ** beta, depths)
        out["min_corr"] = min_corr
        ok = out["log_corr"] >= min_corr
    return ok, out


# ---------------------------------------------------------------------------
# bf

def _check_window(cfg, chk):
    phi, psi = exponent_from_dict(cfg.phi), exponent_from_dict(cfg.psi)
    f = {"phi": phi, "psi": psi, "psi_phi": compose(psi, phi)}[chk["target"]]
    rng = chk.get("range", [1.0, 1e6])
    fit = estimate_scaling_indices(f, tuple(rng))
    tol = chk.get("tol", 0.02)
    expect = chk.get("expect")
    if expect is None:
        w = f.window
        expect = [w.lower_exp, w.upper_exp]
    err = max(abs(fit.lower_exp - expect[0]), abs(fit.upper_exp - expect[1]))
    vals = dict(fitted=fit.to_dict(), expect=expect, tol=tol, max_abs_err=err)
    return err <= tol, vals, [], []


def _check_laplace(cfg, chk):
    target = chk.get("target", "psi")
    f = exponent_from_dict(cfg.psi if target == "psi" else cfg.phi)
    law = SubordinatorLaw(f)
    lam = np.asarray(chk.get("lam", [0.5, 1.0, 2.0, 10.0]), float)
    rtol = chk.get("rtol", 1e-6)
    tn, tv = laplace_transforms(law, lam)
    p = f(lam)
    meas = np.concatenate([tn, tv])
    pred = np.concatenate([p, 1.0 / p])
    coords = np.column_stack([np.concatenate([lam, lam]),
                              np.repeat([0.0, 1.0], len(lam))])
    err = float(np.max(np.abs(meas / pred - 1.0)))
    vals = dict(mode=law.mode, rtol=rtol, max_rel_err=err)
    return err <= rtol, vals, ["lam", "density (0 nu, 1 v)"], CheckResult.rows_from(
        coords, meas, pred)


# ---------------------------------------------------------------------------
# verify

def _qspec(cfg):
    return QuadratureSpec(rtol=cfg.tolerances["rtol"])


def _check_lemma(cfg, chk):
    k = kernel_for(cfg, chk)
    sw = Sweep(diam=k.diam, **chk.get("sweep", {}))
    cap = cfg.tolerances["cap"]
    rep = verify_lemma(chk["lemma"], k, sw, cap, _qspec(cfg))
    vals = dict(rep.summary())
    ok = rep.passed
    if chk.get("refine", True):
        rep2 = verify_lemma(chk["lemma"], k, sw.refined(), cap, _qspec(cfg))
        rel = abs(rep2.C - rep.C) / rep.C
        vals.update(C_refined=rep2.C, refine_rel_change=rel,
                    refine_tol=cfg.tolerances["refine_tol"])
        ok = ok and rep2.passed and rel <= cfg.tolerances["refine_tol"]
    return ok, vals, list(rep.coord_names), CheckResult.rows_from(rep.coords, rep.measured,
                                                                  rep.predicted)


def _check_jump_profile(cfg, chk):
    k = kernel_for(cfg, chk)
    if chk.get("diam") is not None:
        k = k.with_diam(chk["diam"])
    d = _depths(chk["depths"])
    dy, r = chk.get("dy", 1.0), chk.get("r", 1.0)
    J = assemble_jump(k, d, dy, r, _qspec(cfg))
    dphi = k.Phi.power / 2
    ok, vals = _law_values(chk["law"], d, J, chk.get("expect"), chk.get("tol", 0.05),
                           chk.get("min_corr", 0.95), dphi)
    pred = d ** vals.get("expect", vals.get("beta"))
    return ok, vals, ["dx", "dy", "r"], CheckResult.rows_from(
        np.column_stack([d, np.full_like(d, dy), np.full_like(d, r)]), J, pred)


def _check_exit_time_profile(cfg, chk):
    k = kernel_for(cfg, chk)
    dom = domain_from_dict(cfg.domain)
    d = _depths(chk["depths"])
    pts = _ray(dom, d)
    vals_ = np.array([exit_time_integral(k, dom, x, n_theta=chk.get("n_theta", 512))
                      for x in pts])
    dphi = k.Phi.power / 2
    ok, vals = _law_values(chk["law"], d, vals_, chk.get("expect"), chk.get("tol", 0.1),
                           chk.get("min_corr", 0.9), dphi)
    pred = exit_time_comparison(k, d, regime_for(k.law.gamma))
    return ok, vals, ["delta", "x", "y"], CheckResult.rows_from(
        np.column_stack([d, pts[:, :2]]), vals_, pred)


def _counterexample_flags(chk, prof, control):
    vals = dict(growth=prof.growth, log_corr=prof.log_corr, monotone=prof.monotone,
                spread=float(prof.normalized.max() / prof.normalized.min()), control=control)
    if control:
        vals["max_spread"] = chk.get("max_spread", 1.5)
        return vals["spread"] <= vals["max_spread"], vals
    vals["min_growth"] = chk.get("min_growth", 2.0)
    vals["min_corr"] = chk.get("min_corr", 0.9)
    ok = prof.monotone and prof.growth >= vals["min_growth"] \
        and prof.log_corr >= vals["min_corr"]
    return ok, vals


def _check_counterexample_quad(cfg, chk):
    k = kernel_for(cfg, chk)
    dom = domain_from_dict(cfg.domain)
    r0 = chk.get("r0", 0.2)
    d = X.counterexample_depths(r0, chk.get("top_frac", X.QUAD_TOP_FRAC),
                                chk.get("decades", 2.0), chk.get("npts", 5))
    control = chk.get("control", k.law.gamma > 0.5)
    rows = counterexample_profile(k, dom, dom.boundary_point(0.0), r0, d, control=control)
    prof = X.summarize_profile([r[0] for r in rows], [r[2] for r in rows])
    ok, vals = _counterexample_flags(chk, prof, control)
    dd = np.array([r[0] for r in rows])
    return ok, vals, ["delta"], CheckResult.rows_from(
        dd[:, None], [r[1] for r in rows], np.sqrt(k.Phi(dd)))


# ---------------------------------------------------------------------------
# mc

def _check_lifetime(cfg, chk, stream, workers):
    pc = path_config_for(cfg, chk)
    dom = domain_from_dict(cfg.domain)
    d = _depths(chk["depths"])
    prof = X.lifetime_profile(pc, chk["n"], stream, d, dom, method=chk.get("method", "renewal"),
                              workers=workers)
    ok, vals = _law_values(chk["law"], d, prof.means, chk.get("expect"), chk.get("tol", 0.1),
                           chk.get("min_corr", 0.9), pc.delta_phi)
    vals["stderr"] = prof.stderrs
    vals["warnings"] = sorted({e.warning for e in prof.estimates if e.warning})
    k = kernel_for(cfg, chk)
    pred = exit_time_comparison(k, d, regime_for(pc.gamma))
    pts = _ray(dom, d)
    return ok, vals, ["delta", "x", "y"], CheckResult.rows_from(
        np.column_stack([d, pts[:, :2]]), prof.means, pred)


def _check_green(cfg, chk, stream, workers):
    pc = path_config_for(cfg, chk)
    dom = domain_from_dict(cfg.domain)
    cells = CellGrid(**chk["cells"])
    n, m = chk["n"], chk.get("factor", 4)
    sep = chk.get("min_sep", 0.2)
    rse = chk.get("max_rse", 0.05)
    rep, C1, se1, occ = X.green_ratio(chk["x"], cells, n, dom, pc, stream.child(0), sep, rse,
                                      workers)
    _, C2, se2, _ = X.green_ratio(chk["x"], cells, m * n, dom, pc, stream.child(1), sep, rse,
                                  workers)
    zlim = cfg.tolerances["stable_z"]
    stable_ok = X.stable_pair(C1, se1, C2, se2, zlim)
    pairs = [(cells.index_of(a), cells.index_of(b)) for a, b in chk.get("pairs", [])]
    sym = X.green_symmetry(pairs, cells, m * n, dom, pc, stream.child(2), workers)
    life = estimate_lifetime(chk["x"], n, dom, pc, stream.child(0), workers=workers)
    vals = dict(C=C1, C_stderr=se1, C_large=C2, C_large_stderr=se2, factor=m,
                stable=stable_ok, cells_scored=rep.extra["cells_scored"],
                spread=rep.max_ratio / rep.min_ratio,
                occupation_total=occ.total.mean, lifetime=life.mean,
                symmetry=[dict(a=a, b=b, ab=e1.mean, ab_se=e1.stderr, ba=e2.mean,
                               ba_se=e2.stderr, z=zz) for a, b, e1, e2, zz in sym],
                max_z=max([s[4] for s in sym], default=0.0), z_limit=zlim)
    ok = stable_ok and np.isfinite(C1) and vals["max_z"] <= zlim
    return ok, vals, ["cell", "cx", "cy"], CheckResult.rows_from(rep.coords, rep.measured,
                                                                 rep.predicted)


def _check_ratio(cfg, chk, stream, workers):
    pc = path_config_for(cfg, chk)
    dom = domain_from_dict(cfg.domain)
    n, m = chk["n"], chk.get("factor", 2)
    cap = chk.get("cap", cfg.tolerances["mc_cap"])
    e1 = X.ratio_experiment(chk["experiment"], chk.get("scenario"), n, pc, stream.child(0),
                            dom, cap, workers)
    e2 = X.ratio_experiment(chk["experiment"], chk.get("scenario"), m * n, pc,
                            stream.child(1), dom, cap, workers)
    stable_ok = X.stable_pair(e1.report.C, e1.C_se, e2.report.C, e2.C_se,
                              cfg.tolerances["stable_z"])
    vals = dict(C=e1.report.C, C_stderr=e1.C_se, C_large=e2.report.C,
                C_large_stderr=e2.C_se, factor=m, cap=cap, stable=stable_ok,
                worst_datum=e1.report.extra["worst_datum"], data=e1.report.extra["data"],
                min_ratio=e1.report.min_ratio, max_ratio=e1.report.max_ratio)
    ok = stable_ok and e1.report.C < cap and e2.report.C < cap
    r = e1.report
    return ok, vals, list(r.coord_names), CheckResult.rows_from(r.coords, r.measured,
                                                                r.predicted)


def _check_counterexample_mc(cfg, chk, stream, workers):
    pc = path_config_for(cfg, chk)
    dom = domain_from_dict(cfg.domain)
    r0 = chk.get("r0", 0.2)
    d = X.counterexample_depths(r0, chk.get("top_frac", X.MC_TOP_FRAC),
                                chk.get("decades", 2.0), chk.get("npts", 5))
    control = chk.get("control", pc.gamma > 0.5)
    prof, rows = X.counterexample_mc_profile(pc, chk.get("n", 100000), stream, r0, d, dom,
                                             control, workers)
    ok, vals = _counterexample_flags(chk, prof, control)
    vals["stderr"] = prof.stderr
    dd = np.array([r[0] for r in rows])
    return ok, vals, ["delta"], CheckResult.rows_from(
        dd[:, None], [r[1].mean for r in rows], dd ** pc.delta_phi)


def _check_refinement(cfg, chk, stream, workers):
    pc = path_config_for(cfg, chk)
    dom = domain_from_dict(cfg.domain)
    d = _depths(chk["depths"])
    inner = chk.get("inner", 4.0)
    a = X.lifetime_profile(pc, chk["n"], stream.child(0), d, dom, workers=workers)
    b = X.lifetime_profile(pc.refined(inner), chk["n"], stream.child(1), d, dom,
                           workers=workers)
    zs = [z_score(p, q) for p, q in zip(a.estimates, b.estimates)]
    max_z = chk.get("max_z", 2.0)
    vals = dict(z=zs, max_z=max(zs), z_limit=max_z, inner=inner,
                rel_shift=list((b.means - a.means) / a.means))
    pts = _ray(dom, d)
    return max(zs) <= max_z, vals, ["delta", "x", "y"], CheckResult.rows_from(
        np.column_stack([d, pts[:, :2]]), b.means, a.means)


QUAD_CHECKS = {"window": _check_window, "laplace": _check_laplace, "lemma": _check_lemma,
               "jump-profile": _check_jump_profile,
               "exit-time-profile": _check_exit_time_profile}
MC_CHECKS = {"lifetime": _check_lifetime, "green": _check_green, "ratio": _check_ratio,
             "counterexample": _check_counterexample_mc, "refinement": _check_refinement}


def check_id(i: int, chk: dict) -> str:
    tag = chk.get("lemma") or chk.get("experiment") or chk.get("target") or ""
    parts = [f"{i:02d}", chk["kind"]] + ([tag] if tag else [])
    for key in ("delta_phi", "gamma"):
        if chk.get(key) is not None:
            parts.append(f"{key}={chk[key]:g}")
    return ":".join(parts)


def run_check(cfg: ExperimentConfig, i: int, chk: dict, workers=None):
    """One check -> (CheckResult, seconds)."""
    t0 = time.perf_counter()
    cid = check_id(i, chk)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            if cfg.experiment == "mc":
                stream = RngStream(cfg.seed, (i,))
                ok, vals, names, rows = MC_CHECKS[chk["kind"]](cfg, chk, stream, workers)
            elif chk["kind"] == "counterexample":
                ok, vals, names, rows = _check_counterexample_quad(cfg, chk)
            else:
                ok, vals, names, rows = QUAD_CHECKS[chk["kind"]](cfg, chk)
        res = CheckResult(cid, chk["kind"], ok, vals, names, rows)
    except NUMERICAL_ERRORS as e:
        res = CheckResult(cid, chk["kind"], False, error=f"{type(e).__name__}: {e}")
    return res, time.perf_counter() - t0


def run_experiment(cfg: ExperimentConfig, workers=None):
    """Run all checks. Returns (Report, timings); timings are kept out of the report."""
    workers = cfg.workers if workers is None else workers
    workers = default_workers() if workers is None else int(workers)
    t0 = time.perf_counter()
    checks, timings = [], {}
    for i, chk in enumerate(cfg.checks):
        res, dt = run_check(cfg, i, chk, workers)
        checks.append(res)
        timings[res.id] = dt
    report = Report(cfg.to_dict(), checks, provenance(cfg.seed, workers))
    timings["total"] = time.perf_counter() - t0
    return report, timings
