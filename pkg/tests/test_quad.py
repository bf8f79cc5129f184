import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from baxterq.errors import DegenerateWeightWarning, QuadratureError
from baxterq.quad import DecaySpec, IntegralResult, integrate, mc_integrate, mc_summary, rule_1d


@given(st.floats(0.3, 8), st.floats(-3, 3), st.floats(0.2, 5))
def test_euler_type_integral_against_mpmath(nu_re, nu_im, a):
    nu = complex(nu_re, nu_im)
    res = integrate(lambda u: np.exp(nu * u - a * np.exp(2 * u)), 1, DecaySpec(0, 1 / nu_re),
                    rel_tol=1e-12)
    want = complex(0.5 * mpmath.power(a, -nu / 2) * mpmath.gamma(nu / 2))
    assert abs(res.value - want) <= 1e-10 * abs(want)


@given(st.floats(0.2, 10), st.floats(-10, 10))
def test_gaussian_kind_against_mpmath(p, omega):
    res = integrate(lambda u: np.cos(omega * u) * np.exp(-p * u * u), 1,
                    DecaySpec(0, 1 / math.sqrt(p), "gaussian"), rel_tol=1e-13,
                    relative_to="l1")
    want = float(mpmath.quad(lambda u: mpmath.cos(omega * u) * mpmath.exp(-p * u * u),
                             mpmath.linspace(-12 / math.sqrt(p), 12 / math.sqrt(p), 25)))
    assert abs(res.value - want) <= 1e-10 * math.sqrt(math.pi / p)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_product_gaussian_in_d_dimensions(d):
    centers = np.linspace(-0.5, 0.5, d)
    res = integrate(lambda *u: np.exp(-sum((ui - c) ** 2 for ui, c in zip(u, centers))), d,
                    DecaySpec(centers, 1.0, "gaussian"), rel_tol=1e-10)
    assert res.value == pytest.approx(math.pi ** (d / 2), rel=1e-10)
    assert res.error_estimate >= 0


def test_vector_valued_integrand():
    ks = np.array([1.0, 2.0, 4.0])
    res = integrate(lambda u: np.exp(-np.outer(np.exp(2 * u), ks) + u[:, None]), 1,
                    DecaySpec(0, 1), rel_tol=1e-12)
    # int e^{u - k e^{2u}} du = Gamma(1/2) / (2 sqrt k)
    assert np.allclose(res.value, math.sqrt(math.pi) / (2 * np.sqrt(ks)), rtol=1e-11)


def test_double_exponential_rule_on_exponential_tails():
    x, w = rule_1d(0.0, 1.0, "double_exponential", 5)
    assert np.all(np.diff(x) > 0)
    assert abs(x).max() <= 44.0 + 1e-9
    # int sech u du = pi, a slowly (exponentially) decaying integrand
    assert np.sum(w / np.cosh(x)) == pytest.approx(math.pi, rel=1e-12)


def test_gaussian_rule_is_uniform():
    x, w = rule_1d(1.0, 2.0, "gaussian", 3)
    assert np.allclose(np.diff(x), 2.0 / 8)
    assert np.allclose(w, 2.0 / 8)


def test_non_convergence_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda u: np.sin(200 * u) * np.exp(-u * u / 1e4), 1,
                  DecaySpec(0, 1, "gaussian"), rel_tol=1e-14, max_level=3)


def test_non_finite_integrand_raises():
    with pytest.raises(QuadratureError), np.errstate(divide="ignore"):
        integrate(lambda u: 1 / u, 1, DecaySpec(0, 1, "gaussian"))


def test_argument_validation():
    with pytest.raises(ValueError):
        integrate(lambda u: u, 5)
    with pytest.raises(ValueError):
        DecaySpec(0, -1)
    with pytest.raises(ValueError):
        DecaySpec(0, 1, "lorentzian")
    with pytest.raises(ValueError):
        integrate(lambda u: u, 1, relative_to="max")
    with pytest.raises(ValueError):
        IntegralResult(1.0, -1.0, 1)


def _normal_sampler(rng, size):
    return rng.standard_normal(size), np.ones(size)


def test_mc_is_deterministic_and_unbiased():
    a = mc_integrate(_normal_sampler, lambda z: z ** 2, 100_000, seed=3)
    b = mc_integrate(_normal_sampler, lambda z: z ** 2, 100_000, seed=3)
    assert a.value == b.value and a.error_estimate == b.error_estimate
    assert abs(a.value - 1.0) < 4 * a.error_estimate
    # standard error of z^2 is sqrt(2 / n)
    assert a.error_estimate == pytest.approx(math.sqrt(2 / 100_000), rel=0.05)


def test_mc_chunking_changes_streams_not_statistics():
    a = mc_integrate(_normal_sampler, lambda z: z, 50_000, seed=1, chunk=10_000)
    b = mc_integrate(_normal_sampler, lambda z: z, 50_000, seed=1, chunk=50_000)
    assert a.value != b.value
    assert abs(a.value) < 5 * a.error_estimate and abs(b.value) < 5 * b.error_estimate


def test_mc_needs_samples():
    with pytest.raises(ValueError):
        mc_integrate(_normal_sampler, lambda z: z, 999)


def test_mc_warns_on_degenerate_weights():
    vals = np.zeros(10_000)
    vals[0] = 1.0
    with pytest.warns(DegenerateWeightWarning):
        mc_summary(vals)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        mc_summary(np.ones(10_000))
