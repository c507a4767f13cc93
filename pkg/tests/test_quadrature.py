import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma as G

from sklevy.bernstein import ConfigurationError, DomainError
from sklevy.domain import disk, localization_box, normal_ray_points
from sklevy.estimates import green_comparison, stable_kernel
from sklevy.quadrature import (DataError, DivergenceError, QuadratureSpec, Sweep, TabulatedSurvival,
                               assemble_green, assemble_jump, box_integral, counterexample_profile,
                               exit_time_integral, killing_density, subordination_integral, verify_lemma)

# frozen oracle values: mpmath at 30 digits on the same comparison integrands
GREEN_ORACLE = [
    ((0.6, 0.7, 0.01, 0.3, 0.1), 4.14240288597494),
    ((0.6, 0.7, 0.5, 0.5, 0.05), 39.4639772616928),
    ((0.9, 0.3, 1e-3, 1e-3, 1.0), 5.06694610555431e-6),
    ((0.4, 0.5, 0.02, 0.2, 0.7), 0.246855423462522),
]
JUMP_ORACLE = [
    ((0.6, 0.5, 1e-3, 1.0, 1.0), 0.0474030470556198),
    ((0.6, 0.3, 0.01, 0.2, 0.3), 1.86964070487448),
    ((0.6, 0.7, 0.05, 0.05, 0.5), 3.3629817784323),
]
EXIT_ORACLE = [((0.9, 0.8), 2.68280729164953), ((0.6, 0.7), 5.93066580546253)]
KILL_ORACLE = [((0.9, 0.8, 0.01), 63.5528853152637), ((0.6, 0.3, 0.1), 1.12383800185263)]
# scipy nquad in boundary coordinates, V = D_Q(0.1, 0.1) at Q = (1, 0); oracle accuracy ~1e-5
BOX_ORACLE = [
    ((0.9, 0.5, 0.01, 0.0), 0.21164599128459066),
    ((0.9, 0.3, 0.003, 0.2), 0.10988200248670561),
    ((0.9, 0.8, 0.02, 0.0), 0.04147127112322825),
]


@pytest.mark.parametrize("args,expect", GREEN_ORACLE)
def test_green_oracle(args, expect):
    dp, g, dx, dy, r = args
    assert assemble_green(stable_kernel(dp, g), dx, dy, r) == pytest.approx(expect, rel=1e-7)


@pytest.mark.parametrize("args,expect", JUMP_ORACLE)
def test_jump_oracle(args, expect):
    dp, g, dx, dy, r = args
    assert assemble_jump(stable_kernel(dp, g), dx, dy, r) == pytest.approx(expect, rel=1e-7)


@pytest.mark.parametrize("args,expect", EXIT_ORACLE)
def test_exit_time_oracle(args, expect):
    val = exit_time_integral(stable_kernel(*args), disk(), np.zeros(2))
    assert val == pytest.approx(expect, rel=1e-6)


@pytest.mark.parametrize("args,expect", KILL_ORACLE)
def test_killing_oracle(args, expect):
    dp, g, d = args
    val = killing_density(stable_kernel(dp, g), disk(), np.array([1 - d, 0.0]))
    assert val == pytest.approx(expect, rel=1e-7)


@pytest.mark.parametrize("args,expect", BOX_ORACLE)
def test_box_oracle(args, expect):
    dp, g, d, w = args
    D = disk()
    box = localization_box(D, np.array([1.0, 0.0]), 0.2)
    val = box_integral(stable_kernel(dp, g), box, np.array([1 - d, 0.0]), w)
    assert val == pytest.approx(expect, rel=5e-4)


def test_small_range_antiderivative_example():
    k = stable_kernel(0.6, 0.7)
    val = subordination_integral(k, 10.0, 10.0, 1.0, "v", "small")
    assert float(val) == pytest.approx(1 / (1.7 * G(0.7)), rel=1e-6)
    assert float(val) == pytest.approx(0.4531, abs=1e-4)


@given(dp=st.floats(0.2, 0.95), g=st.floats(0.1, 0.9), r=st.floats(1e-3, 2.0))
def test_small_range_closed_form(dp, g, r):
    k = stable_kernel(dp, g)
    val = float(subordination_integral(k, 10 * r + 3, 10 * r + 3, r, "v", "small"))
    P = r ** (2 * dp)
    assert val == pytest.approx(P ** g / ((g + 1) * G(g) * r ** 2), rel=1e-6)


@settings(max_examples=15)
@given(dx=st.floats(1e-3, 2.0), dy=st.floats(1e-3, 2.0), r=st.floats(1e-3, 2.0))
def test_doubling_initial_panels(dx, dy, r):
    k = stable_kernel(0.6, 0.3)
    a = QuadratureSpec()
    b = QuadratureSpec(init_panels=2 * a.init_panels)
    for w in ("v", "nu"):
        for rg in ("small", "mid"):
            u = float(subordination_integral(k, dx, dy, r, w, rg, a))
            v = float(subordination_integral(k, dx, dy, r, w, rg, b))
            assert abs(u - v) <= 2 * a.rtol * abs(u) + 1e-300


@settings(max_examples=15)
@given(dx=st.floats(1e-3, 2.0), dy=st.floats(1e-3, 2.0), r=st.floats(1e-3, 2.0))
def test_green_symmetric(dx, dy, r):
    k = stable_kernel(0.6, 0.7)
    assert assemble_green(k, dx, dy, r) == pytest.approx(assemble_green(k, dy, dx, r), rel=2e-8)


def test_zero_weight():
    k = stable_kernel(0.6, 0.7)
    zero = lambda t: np.zeros_like(np.asarray(t, float))
    for rg in ("small", "mid", "tail"):
        assert float(subordination_integral(k, 0.1, 0.2, 0.3, zero, rg)) == 0.0


def test_bad_weight_rejected():
    k = stable_kernel(0.6, 0.7)
    with pytest.raises(ConfigurationError):
        subordination_integral(k, 0.1, 0.2, 0.3, lambda t: np.asarray(t, float), "small")


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        QuadratureSpec(rtol=1e-2)
    k = stable_kernel(0.6, 0.7)
    pts = QuadratureSpec().split_points(k, 0.1, 0.2, 0.3)
    assert pts == sorted(pts) and k.T in pts and float(k.Phi(0.3)) in pts


def test_green_assembles_to_green_comparison_order():
    # interior point: ratio to g(r) is a modest constant
    k = stable_kernel(0.6, 0.7)
    r = np.geomspace(1e-3, 0.5, 6)
    ratio = assemble_green(k, 1.0, 1.0, r) / green_comparison(k, 1.0, 1.0, r)
    assert np.all(ratio > 0.2) and np.all(ratio < 5)


def test_lemma_point_and_degenerate():
    k = stable_kernel(0.6, 0.7)
    rep = verify_lemma("8.2i", k, Sweep(diam=k.diam, lo_frac=0.5, hi_frac=0.5, n=1))
    assert rep.min_ratio == rep.max_ratio == 1.0 and rep.C == 1.0
    rep = verify_lemma("6.3", k, Sweep(diam=k.diam, n=5))
    assert 1 <= rep.C < 100 and rep.min_ratio <= rep.max_ratio
    with pytest.raises(ConfigurationError):
        verify_lemma("8.1i", stable_kernel(0.6, 0.3))
    with pytest.raises(ConfigurationError):
        verify_lemma("9.9", k)


def test_sweep_refinement_nests():
    s = Sweep(n=12)
    assert np.allclose(s.refined().axis()[::2], s.axis())


# killing density

def test_killing_survival_one_and_zero():
    k = stable_kernel(0.6, 0.7)
    x = np.array([0.9, 0.0])
    assert killing_density(k, disk(), x, survival=1.0) == 0.0
    with pytest.raises(DivergenceError):
        killing_density(k, disk(), x, survival=0.0)


def test_killing_data_errors():
    k = stable_kernel(0.6, 0.7)
    with pytest.raises(DataError):
        TabulatedSurvival((0.1, 0.2), (0.5, 1.2))
    with pytest.raises(DataError):
        killing_density(k, disk(), np.array([0.5, 0.0]), survival=1.5)
    with pytest.raises(DomainError):
        killing_density(k, disk(), np.array([1.0, 0.0]))


def test_killing_tabulated_close_to_factorized():
    k = stable_kernel(0.6, 0.7)
    d = 0.05
    t = np.geomspace(1e-6, 20, 400)
    from sklevy.quadrature import FactorizedSurvival
    tab = TabulatedSurvival(tuple(t), tuple(FactorizedSurvival(k, d)(t)))
    x = np.array([1 - d, 0.0])
    a = killing_density(k, disk(), x)
    b = killing_density(k, disk(), x, survival=tab)
    assert b == pytest.approx(a, rel=0.05)


@pytest.mark.parametrize("dp,g", [(0.6, 0.7), (0.9, 0.3), (0.9, 0.8)])
def test_killing_slope(dp, g):
    k = stable_kernel(dp, g)
    d = np.geomspace(1e-4, 1e-2, 5)
    kap = [killing_density(k, disk(), np.array([1 - x, 0.0])) for x in d]
    slope = np.polyfit(np.log(d), np.log(kap), 1)[0]
    assert slope == pytest.approx(-2 * dp * g, abs=0.02)


# two-dimensional integrals

def test_exit_time_slope_gamma1_high():
    k = stable_kernel(0.9, 0.8)
    D = disk()
    s = np.geomspace(1e-3, 1e-1, 5)
    x = normal_ray_points(D, np.array([1.0, 0.0]), 1.0, s)
    v = [exit_time_integral(k, D, p) for p in x]
    slope = np.polyfit(np.log(s), np.log(v), 1)[0]
    assert slope == pytest.approx(0.9, abs=0.1)


def test_exit_time_scaled_domain():
    k = stable_kernel(0.6, 0.7)
    a = exit_time_integral(k, disk(), np.array([0.3, 0.0]))
    b = exit_time_integral(k.with_diam(4.0), disk(2.0), np.array([0.6, 0.0]))
    assert np.isfinite(b) and b > 0
    # self-similar: G scales like r^(2 delta gamma - d), volume like r^d
    assert b / a == pytest.approx(2 ** (2 * 0.6 * 0.7), rel=1e-3)
    with pytest.raises(DomainError):
        exit_time_integral(k, disk(), np.array([1.0, 0.0]))


def test_counterexample_profile_guard_and_shape():
    D = disk()
    Q = np.array([1.0, 0.0])
    with pytest.raises(ConfigurationError):
        counterexample_profile(stable_kernel(0.9, 0.8), D, Q, 0.2, [0.01])
    rows = counterexample_profile(stable_kernel(0.9, 0.5), D, Q, 0.2, [1e-3, 1e-2])
    assert len(rows) == 2
    (d1, h1, n1), (d2, h2, n2) = rows
    assert n1 == pytest.approx(h1 / d1 ** 0.9)
    assert n1 > n2            # normalized profile grows toward the boundary
    ctrl = counterexample_profile(stable_kernel(0.9, 0.8), D, Q, 0.2, [1e-3, 1e-2], control=True)
    assert len(ctrl) == 2
