import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sklevy.bernstein import (ConfigurationError, DomainError, RangeError, SubordinatorLaw,
                              compose, compose_exponents, estimate_scaling_indices,
                              exponent_from_dict, invert_scale, laplace_transforms, mixture,
                              scale_profile, stable, subordinator_densities, tabulated)

index = st.floats(0.05, 0.95)
lam = st.floats(1e-4, 1e4)


def test_stable_value():
    assert stable(0.6)(4.0) == pytest.approx(2.2974, abs=1e-4)


def test_mixture_is_normalized_at_one():
    f = mixture([0.3, 0.7], [0.5, 0.5])
    assert f(1.0) == pytest.approx(1.0)
    assert mixture([0.3, 0.7], [2.0, 6.0])(1.0) == pytest.approx(1.0)


def test_composition_of_stables():
    chi = compose(stable(0.5), stable(0.6))
    assert chi(16.0) == pytest.approx(16 ** 0.3)
    assert chi.stable_index == pytest.approx(0.3)
    assert compose_exponents(stable(0.5), stable(0.6))(16.0) == pytest.approx(chi(16.0))


@pytest.mark.parametrize("a", [0.0, 1.0, 1.2, -0.1])
def test_stable_index_range(a):
    with pytest.raises(ConfigurationError):
        stable(a)


def test_negative_argument_rejected():
    with pytest.raises(DomainError):
        stable(0.5)(-1.0)


def test_tabulated_interpolates_power():
    x = np.geomspace(1e-3, 1e6, 40)
    f = tabulated(x, x ** 0.45)
    assert f(37.0) == pytest.approx(37.0 ** 0.45, rel=1e-10)
    assert f(1.0) == pytest.approx(1.0)


def test_from_dict_roundtrip():
    f = compose(mixture([0.3, 0.7], [1, 1]), stable(0.6))
    g = exponent_from_dict(f.to_dict())
    x = np.geomspace(1e-2, 1e3, 7)
    assert np.allclose(f(x), g(x))
    with pytest.raises(ConfigurationError):
        exponent_from_dict({"kind": "nope"})


@given(a=index, x=lam)
def test_normalized_at_one_and_power(a, x):
    f = stable(a)
    assert f(1.0) == pytest.approx(1.0)
    assert f(x) == pytest.approx(x ** a, rel=1e-12)


@given(a=index, b=index, w=st.floats(0.05, 0.95))
def test_mixture_bernstein_shape(a, b, w):
    # increasing, f(x)/x decreasing, elasticity inside [min, max]
    f = mixture([a, b], [w, 1 - w])
    x = np.geomspace(1e-4, 1e4, 60)
    y = f(x)
    assert np.all(np.diff(y) > 0)
    assert np.all(np.diff(y / x) < 0)
    e = f.elasticity(x)
    assert np.all(e >= min(a, b) - 1e-12) and np.all(e <= max(a, b) + 1e-12)


@given(a=index, b=index)
def test_compose_elasticity_is_product(a, b):
    chi = compose(stable(a), stable(b))
    assert float(chi.elasticity(3.7)) == pytest.approx(a * b)


# scaling windows

@given(a=st.floats(0.05, 0.95))
def test_scaling_indices_of_stable(a):
    w = estimate_scaling_indices(stable(a), (1.0, 1e6))
    assert abs(w.lower_exp - a) <= 0.02 and abs(w.upper_exp - a) <= 0.02


def test_scaling_window_of_mixture():
    w = estimate_scaling_indices(mixture([0.3, 0.7], [1, 1]), (1.0, 1e6))
    assert w.lower_exp >= 0.3 - 0.02
    assert w.upper_exp <= 0.7 + 0.02
    assert w.lower_exp <= w.upper_exp


def test_composition_window_is_product():
    psi = mixture([0.3, 0.7], [1, 1])
    phi = mixture([0.4, 0.9], [1, 1])
    w = compose(psi, phi).window
    assert (w.lower_exp, w.upper_exp) == pytest.approx((0.12, 0.63))
    fit = estimate_scaling_indices(compose(stable(0.5), stable(0.6)), (1.0, 1e6))
    assert fit.lower_exp == pytest.approx(0.3, abs=0.02)
    assert fit.upper_exp == pytest.approx(0.3, abs=0.02)


def test_fitted_window_bounds_hold():
    f = mixture([0.2, 0.8], [0.3, 0.7])
    w = estimate_scaling_indices(f, (1.0, 1e5), grid_size=80)
    x = np.geomspace(1.0, 1e5, 80)
    i, j = np.triu_indices(len(x), 1)
    R, r = x[j], x[i]
    ratio = f(R) / f(r)
    assert np.all(ratio >= w.lower_const * (R / r) ** w.lower_exp * (1 - 1e-9))
    assert np.all(ratio <= w.upper_const * (R / r) ** w.upper_exp * (1 + 1e-9))


def test_scaling_range_below_one_needs_flag():
    with pytest.raises(ValueError):
        estimate_scaling_indices(stable(0.5), (0.1, 10.0))
    w = estimate_scaling_indices(stable(0.5), (0.1, 10.0), allow_below_one=True)
    assert w.lower_exp == pytest.approx(0.5, abs=0.02)


# scale profile

def test_scale_profile_values():
    Phi = scale_profile(stable(0.6))
    assert Phi(3.0) == pytest.approx(3 ** 1.2)
    assert Phi(1.0) == pytest.approx(1.0)
    assert float(invert_scale(Phi, 8.0)) == pytest.approx(8 ** (1 / 1.2), rel=1e-9)


@given(t=st.floats(1e-8, 1e8))
def test_inverse_roundtrip_general(t):
    Phi = scale_profile(mixture([0.3, 0.8], [1, 2]))
    r = invert_scale(Phi, t)
    assert float(Phi(r)) == pytest.approx(t, rel=1e-8)


def test_inverse_out_of_range():
    x = np.geomspace(1e-2, 1e2, 20)
    Phi = scale_profile(tabulated(x, x ** 0.5))
    with pytest.raises((RangeError, DomainError)):
        invert_scale(Phi, 1e300)


# subordinator densities

def test_half_stable_densities():
    law = SubordinatorLaw(stable(0.5))
    nu, v = subordinator_densities(law, 1.0)
    assert float(nu) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-12)
    assert float(v) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)
    assert law.mode == "exact-stable"


def test_proxy_mode():
    law = SubordinatorLaw(mixture([0.3, 0.7], [1, 1]))
    assert law.mode == "asymptotic-proxy"
    assert float(law.v(1.0)) == pytest.approx(1.0)


@pytest.mark.parametrize("g", [0.3, 0.5, 0.7])
def test_laplace_oracles(g):
    law = SubordinatorLaw(stable(g))
    x = np.array([0.5, 1.0, 2.0, 10.0])
    tn, tv = laplace_transforms(law, x)
    assert np.allclose(tn, x ** g, rtol=1e-6, atol=0)
    assert np.allclose(tv, x ** -g, rtol=1e-6, atol=0)


@given(g=index, t=st.floats(1e-3, 1e3))
def test_renewal_is_integral_of_v(g, t):
    from scipy.integrate import quad
    law = SubordinatorLaw(stable(g))
    val = quad(lambda s: float(law.v(s)), 0, t, limit=200)[0]
    assert float(law.renewal(t)) == pytest.approx(val, rel=1e-6)


def test_densities_need_positive_time():
    with pytest.raises(DomainError):
        SubordinatorLaw(stable(0.5)).nu(0.0)


def test_doubling_constant_of_stable():
    law = SubordinatorLaw(stable(0.4))
    assert law.doubling_constant() == pytest.approx(2 ** 1.4)
