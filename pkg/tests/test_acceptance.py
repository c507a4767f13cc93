"""Acceptance criteria 1-11 at their stated parameters and tolerances.

Each test runs the shipped configs in configs/ through the same runner the
CLI uses (workers fixed at 1), records one PASS/FAIL line per criterion and
asserts. First-run report texts are cached; criterion 11 reruns every config
and compares bytes. The skeleton refinement study of the simulation contract
is reported as its own line. The whole module takes roughly 25 minutes on one core.
"""
import json
import time
from pathlib import Path

import pytest

from sklevy.bernstein import compose, estimate_scaling_indices, mixture, stable
from sklevy.config import ExperimentConfig
from sklevy.report import to_csv, to_text
from sklevy.runner import run_experiment

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
WORKERS = 1
_RUNS = {}

pytestmark = pytest.mark.acceptance


def _cfg(name, **changes):
    doc = json.loads((CONFIGS / f"{name}.json").read_text())
    doc.update(changes)
    doc["output"] = {}
    return ExperimentConfig.from_dict(doc)


def run(name):
    """(report, timings) of a shipped config, cached for the determinism check."""
    if name not in _RUNS:
        rep, tim = run_experiment(_cfg(name), workers=WORKERS)
        _RUNS[name] = (rep, tim, to_text(rep), to_csv(rep))
    return _RUNS[name][:2]


def _secs(timings, checks):
    return sum(timings[c.id] for c in checks)


# 1 ---------------------------------------------------------------------------

def test_criterion_01_bernstein_oracles(record_criterion):
    rows, ok, dt = [], True, 0.0
    for g in (0.3, 0.5, 0.7, 0.8):
        cfg = _cfg("bf_windows", psi={"kind": "stable", "alpha": g},
                   checks=[{"kind": "laplace", "target": "psi", "lam": [0.5, 1, 2, 10],
                            "rtol": 1e-6}])
        rep, tim = run_experiment(cfg, workers=WORKERS)
        c = rep.checks[0]
        ok &= c.passed and tim[c.id] < 1.0
        dt = max(dt, tim[c.id])
        rows.append(f"g={g}:{c.values['max_rel_err']:.1e}")
    rep, tim = run("bf_windows")
    lap = [c for c in rep.checks if c.kind == "laplace"]
    ok &= all(c.passed for c in lap) and max(tim[c.id] for c in lap) < 1.0
    record_criterion(1, ok, f"max rel err {' '.join(rows)}; slowest {dt:.2f}s (< 1 s, rtol 1e-6)")
    assert ok


# 2 ---------------------------------------------------------------------------

def test_criterion_02_scaling_indices(record_criterion):
    rep, tim = run("bf_windows")
    win = [c for c in rep.checks if c.kind == "window"]
    ok = all(c.passed for c in win) and all(tim[c.id] < 1.0 for c in win)
    errs, dts = [], []

    def fit(f):
        t0 = time.perf_counter()
        w = estimate_scaling_indices(f, (1.0, 1e6))
        dts.append(time.perf_counter() - t0)
        return w
    for a in (0.1, 0.4, 0.6, 0.95):
        w = fit(stable(a))
        errs.append(max(abs(w.lower_exp - a), abs(w.upper_exp - a)))
    w = fit(compose(stable(0.5), stable(0.6)))
    errs.append(max(abs(w.lower_exp - 0.3), abs(w.upper_exp - 0.3)))
    chi = compose(mixture([0.3, 0.7], [1, 1]), mixture([0.4, 0.9], [1, 1]))
    decl = chi.window
    fitm = fit(chi)
    prod = abs(decl.lower_exp - 0.12) < 1e-12 and abs(decl.upper_exp - 0.63) < 1e-12
    inside = fitm.lower_exp >= 0.12 - 0.02 and fitm.upper_exp <= 0.63 + 0.02
    ok = ok and max(errs) <= 0.02 and prod and inside and max(dts) < 1.0
    record_criterion(2, ok, f"max |err| {max(errs):.4f} (tol 0.02); product window "
                            f"({decl.lower_exp:.2f}, {decl.upper_exp:.2f}); fitted mixture "
                            f"composition ({fitm.lower_exp:.3f}, {fitm.upper_exp:.3f}); "
                            f"slowest fit {max(dts):.2f}s")
    assert ok


# 3 ---------------------------------------------------------------------------

def test_criterion_03_green_lemma_sweeps(record_criterion):
    rep, tim = run("verify_green")
    parts, ok = [], True
    pairs = {}
    for c in rep.checks:
        pairs.setdefault(c.id.split(":", 3)[-1], []).append(c)
    for key, cs in pairs.items():
        t = _secs(tim, cs)
        ok &= all(c.passed for c in cs) and t < 120
        C = {c.values["check"].split()[-1]: c.values["C"] for c in cs}
        rel = max(c.values["refine_rel_change"] for c in cs)
        parts.append(f"{key.replace('delta_phi=', 'dp').replace(':gamma=', '/g')}: "
                     f"C6.3={C['6.3']:.2f} Cg={C['green']:.2f} dC={100 * rel:.2f}% {t:.0f}s")
    record_criterion(3, ok, "; ".join(parts) + " (C < 100, refine < 5%, < 120 s/pair)")
    assert ok and len(pairs) == 9


# 4 ---------------------------------------------------------------------------

def test_criterion_04_jump_lemmas(record_criterion):
    rep, tim = run("verify_jump")
    ok = all(c.passed and tim[c.id] < 120 for c in rep.checks)
    parts = [f"{c.values['check'].split()[-1]}: C={c.values['C']:.2f} "
             f"dC={100 * c.values['refine_rel_change']:.2f}% {tim[c.id]:.0f}s" for c in rep.checks]
    record_criterion(4, ok, "; ".join(parts) + " (C < 100, < 120 s each)")
    assert ok and len(rep.checks) == 4


# 5 ---------------------------------------------------------------------------

def test_criterion_05_jump_phase_transition(record_criterion):
    rep, tim = run("verify_phase")
    cs = [c for c in rep.checks if c.kind == "jump-profile"]
    ok = all(c.passed and tim[c.id] < 60 for c in cs)
    v = [c.values for c in cs]
    detail = (f"slope g=0.3 {v[0]['slope']:.4f} (0.6 +- 0.05); slope g=0.7 {v[1]['slope']:.4f} "
              f"(0.36 +- 0.05); g=0.5 log residual R={v[2]['log_corr']:.4f} (>= 0.95); "
              f"slowest {max(tim[c.id] for c in cs):.1f}s")
    record_criterion(5, ok, detail)
    assert ok and len(cs) == 3


# 6 ---------------------------------------------------------------------------

def test_criterion_06_exit_time_laws(record_criterion):
    rep, tim = run("mc_lifetime")
    life = [c for c in rep.checks if c.kind == "lifetime"]
    ok = all(c.passed and tim[c.id] < 600 for c in life) and len(life) == 3
    v = [c.values for c in life]
    detail = (f"g=0.8 slope {v[0]['slope']:.3f} (0.9 +- 0.1); g=0.3 slope {v[1]['slope']:.3f} "
              f"(0.54 +- 0.1); g=0.5 log corr {v[2]['log_corr']:.3f} (>= 0.9); "
              f"per regime {', '.join(f'{tim[c.id]:.0f}s' for c in life)} (< 600 s)")
    record_criterion(6, ok, detail)
    assert ok


def test_skeleton_refinement_study(record_criterion):
    # montecarlo contract: inner substeps x4 shift the mean lifetime by < 2 stderr
    rep, tim = run("mc_lifetime")
    c = [c for c in rep.checks if c.kind == "refinement"][0]
    v = c.values
    zs = ", ".join(f"{z:.2f}" for z in v["z"])
    sh = ", ".join(f"{100 * s:+.1f}%" for s in v["rel_shift"])
    record_criterion("refinement", c.passed, f"z [{zs}] (each < {v['z_limit']:g}); "
                                             f"shifts [{sh}]; {tim[c.id]:.0f}s")
    assert c.passed


# 7 ---------------------------------------------------------------------------

def test_criterion_07_green_consistency(record_criterion):
    rep, tim = run("mc_green")
    c = rep.checks[0]
    v = c.values
    t = tim[c.id]
    ok = c.passed and t < 600 and abs(v["occupation_total"] - v["lifetime"]) <= 1e-9 * v["lifetime"]
    zs = ", ".join(f"{s['z']:.2f}" for s in v["symmetry"])
    detail = (f"C={v['C']:.2f}+-{v['C_stderr']:.2f} at n, {v['C_large']:.2f}+-"
              f"{v['C_large_stderr']:.2f} at {v['factor']}n (stable={v['stable']}); "
              f"symmetry z [{zs}] (<= 3); {v['cells_scored']} cells; {t:.0f}s")
    record_criterion(7, ok, detail)
    assert ok


# 8 ---------------------------------------------------------------------------

def test_criterion_08_harnack_carleson(record_criterion):
    rep, tim = run("mc_harmonic")
    cs = [c for c in rep.checks if c.id.split(":")[2] in ("harnack", "carleson")]
    ok = all(c.passed and tim[c.id] < 600 and len(c.values["data"]) >= 5 for c in cs)
    parts = [f"{c.id.split(':')[2]}: C={c.values['C']:.3f}+-{c.values['C_stderr']:.3f} / "
             f"{c.values['C_large']:.3f}+-{c.values['C_large_stderr']:.3f} at 2n, "
             f"{len(c.values['data'])} data, {tim[c.id]:.0f}s" for c in cs]
    record_criterion(8, ok, "; ".join(parts))
    assert ok and len(cs) == 2


# 9 ---------------------------------------------------------------------------

def test_criterion_09_bhp(record_criterion):
    rep, tim = run("mc_harmonic")
    cs = [c for c in rep.checks if c.id.split(":")[2] in ("bhp", "interior-bhp")]
    bhp = [c for c in cs if c.id.split(":")[2] == "bhp"][0]
    ok = all(c.passed for c in cs) and tim[bhp.id] < 600
    parts = [f"{c.id.split(':')[2]}: C={c.values['C']:.3f} / {c.values['C_large']:.3f} at 2n "
             f"(cap {c.values['cap']:g}), {tim[c.id]:.0f}s" for c in cs]
    record_criterion(9, ok, "; ".join(parts))
    assert ok


# 10 --------------------------------------------------------------------------

def test_criterion_10_bhp_failure(record_criterion):
    q, tq = run("verify_phase")
    m, tm = run("mc_counterexample")
    cq = [c for c in q.checks if c.kind == "counterexample"]
    cm = m.checks
    t = _secs(tq, cq) + _secs(tm, cm)
    ok = all(c.passed for c in cq + cm) and t < 900

    def desc(c):
        v = c.values
        if v["control"]:
            return f"control spread {v['spread']:.3f} (<= 1.5)"
        return f"growth {v['growth']:.2f} R={v['log_corr']:.3f} monotone={v['monotone']}"
    gam = ("0.5", "0.3", "0.8")
    detail = ("quadrature " + "; ".join(f"g={g} {desc(c)}" for g, c in zip(gam, cq))
              + " | simulation " + "; ".join(f"g={g} {desc(c)}" for g, c in zip(gam, cm))
              + f" | {t:.0f}s (< 900 s)")
    record_criterion(10, ok, detail)
    assert ok


# 11 --------------------------------------------------------------------------

def test_criterion_11_determinism(record_criterion):
    names = sorted(p.stem for p in CONFIGS.glob("*.json"))
    same, diff = [], []
    for name in names:
        run(name)
        rep, _ = run_experiment(_cfg(name), workers=WORKERS)
        _, _, text, csv = _RUNS[name]
        (same if to_text(rep) == text and to_csv(rep) == csv else diff).append(name)
    ok = not diff and len(same) == len(names)
    record_criterion(11, ok, f"{len(same)}/{len(names)} configs byte-identical on rerun"
                             + (f"; differing: {', '.join(diff)}" if diff else ""))
    assert ok
