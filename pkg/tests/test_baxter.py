import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from baxterq import baxter, specfn, whittaker
from baxterq.errors import ConvergenceDomainError, GridBudgetError

coord = st.floats(-1.0, 1.0)


def test_kernel_value_at_origin():
    # l = 1, x = y = 0, s = 0: 4 exp(-3 pi)
    val = baxter.q_kernel(np.zeros(2), np.zeros(2), 0)
    assert val == pytest.approx(4 * math.exp(-3 * math.pi), rel=1e-14)
    assert baxter.q_tilde_kernel(np.zeros(2), np.zeros(2), 0) == pytest.approx(val, rel=1e-14)


def test_kernel_rank_zero_closed_form():
    x, y, s = 0.3, -0.2, 1 - 2j
    want = 2 * np.exp(1j * s * (x - y) - np.pi * np.exp(2 * (x - y)))
    assert baxter.q_kernel(np.array([x]), np.array([y]), s) == pytest.approx(want, rel=1e-14)


@given(st.lists(coord, min_size=4, max_size=4), st.floats(-1, 1), st.floats(0.5, 3))
def test_tilde_kernel_is_reflected_plain_kernel(v, re, i_s):
    # Q~(x, y) = Q(-w0 x, -w0 y) with w0 the order reversal
    x, y = np.array(v[:2]), np.array(v[2:])
    s = complex(re, -i_s)
    lhs = baxter.q_tilde_kernel(x, y, s)
    rhs = baxter.q_kernel(-x[::-1], -y[::-1], s)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_kernel_vectorizes_over_trailing_axes():
    x = np.array([[0.1], [0.2]])
    y = np.array([[0.0, 0.5, -0.3], [0.4, 0.1, 0.2]])
    vals = baxter.q_kernel(x, y, -2j)
    for j in range(3):
        assert vals[j] == pytest.approx(baxter.q_kernel(x[:, 0], y[:, j], -2j))


@pytest.mark.parametrize("lam", [0.0, 1.3, -1.3])
@pytest.mark.parametrize("s", [-2j, 1 - 3j])
def test_gl1_eigenfunction(lam, s):
    x = -0.45
    res = baxter.apply_q("plain", lambda y: whittaker.whittaker_gl1(lam, y[0]), [x], s,
                         rel_tol=1e-12)
    assert res.value / np.exp(1j * lam * x) == pytest.approx(specfn.gamma_r(1j * s - 1j * lam),
                                                             rel=1e-9)


def test_gl1_tilde_eigenvalue_flips_lambda():
    lam, s = 0.8, -2.5j
    res = baxter.apply_q("tilde", lambda y: np.exp(1j * lam * y[0]), [0.0], s, rel_tol=1e-12)
    assert res.value == pytest.approx(specfn.gamma_r(1j * s + 1j * lam), rel=1e-9)


def test_apply_q_against_scipy_on_gl1():
    # independent quadrature of the same rank-0 integral; the kernel decays
    # like e^{-2 y} to the right and doubly exponentially to the left
    lam, s, x = 0.6, 1 - 2j, 0.2

    def part(y, fn):
        return fn(baxter.q_kernel(np.array([x]), np.array([y]), s) * np.exp(1j * lam * y))

    re = sp_integrate.quad(part, -4, 40, args=(np.real,), limit=500, epsabs=1e-15)[0]
    im = sp_integrate.quad(part, -4, 40, args=(np.imag,), limit=500, epsabs=1e-15)[0]
    res = baxter.apply_q("plain", lambda y: np.exp(1j * lam * y[0]), [x], s, rel_tol=1e-12)
    assert res.value == pytest.approx(complex(re, im), rel=1e-8)


@pytest.mark.slow
def test_gl2_eigenvalue_single_point():
    lam, s = (1.0, -1.0), -4j
    phi = baxter.NodeCache(lambda y: whittaker.whittaker_gl2(lam, y, rel_tol=1e-11))
    x = np.array([0.4, -0.3])
    for kind, sign in (("plain", 1), ("tilde", -1)):
        res = baxter.apply_q(kind, phi, x, s, rel_tol=1e-8, center=0.0)
        eig = res.value / phi(x[:, None])[0]
        want = specfn.l_factor_gl(s, [sign * v for v in lam])
        assert abs(eig - want) <= 1e-5 * abs(want)
    assert phi.hits >= 1


def test_apply_q_domain():
    with pytest.raises(ConvergenceDomainError):
        baxter.apply_q("plain", lambda y: y[0], [0.0], 1j)
    with pytest.raises(ConvergenceDomainError):
        # l = 1 needs Re(i s) > 1/2
        baxter.apply_q("plain", lambda y: y[0], [0.0, 0.0], -0.4j)
    with pytest.raises(ValueError):
        baxter.apply_q("dual", lambda y: y[0], [0.0], -2j)
    with pytest.raises(ValueError):
        baxter.apply_q("plain", lambda y: y[0], np.zeros(4), -5j)


def test_node_cache_reuses_and_evicts():
    calls = []

    def f(y):
        calls.append(1)
        return y.sum(axis=0)

    cache = baxter.NodeCache(f, max_entries=2)
    a, b, c = np.zeros((2, 3)), np.ones((2, 3)), 2 * np.ones((2, 3))
    cache(a), cache(a), cache(b), cache(c), cache(a)
    assert len(calls) == 4
    assert cache.hits == 1


@given(st.floats(-20, 20), st.floats(0.05, 30))
def test_gaussian_identity_against_mpmath(omega, p):
    want = mpmath.quad(lambda u: mpmath.cos(omega * u) * mpmath.exp(-p * u * u),
                       mpmath.linspace(-15 / math.sqrt(p), 15 / math.sqrt(p), 31))
    assert abs(baxter.gaussian_identity(omega, p) - float(want)) <= 1e-12 * math.sqrt(math.pi / p)


# QUADPACK flags roundoff when the imaginary part nearly cancels; the
# assertion below is what decides
@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@given(st.floats(0.2, 10), st.floats(-5, 5), st.floats(0.05, 20))
def test_euler_identity_against_scipy(nu_re, nu_im, a):
    nu = complex(nu_re, nu_im)
    # tails below e^{-36}: e^{nu_re u} on the left, e^{-a e^{2u}} on the right
    lo, hi = -36.0 / nu_re, 0.5 * math.log(40.0 / a)
    pts = np.linspace(lo, hi, 40)[1:-1]

    def part(u, fn):
        return fn(np.exp(nu * u - a * np.exp(2 * u)))

    want = complex(*(sp_integrate.quad(part, lo, hi, args=(fn,), points=pts, limit=800,
                                       epsabs=0, epsrel=1e-13)[0] for fn in (np.real, np.imag)))
    assert abs(baxter.euler_identity(nu, a) - want) <= 1e-10 * abs(want)


def test_identity_domains():
    with pytest.raises(ValueError):
        baxter.gaussian_identity(1.0, 0.0)
    with pytest.raises(ValueError):
        baxter.euler_identity(-1.0, 1.0)


@pytest.mark.parametrize("l", [1, 2])
def test_kernel_reduction_matches_tilde_kernel(l, rng):
    for _ in range(3):
        x, y = rng.uniform(-1, 1, l + 1), rng.uniform(-1, 1, l + 1)
        s = complex(rng.uniform(-1, 1), -rng.uniform(1, 4))
        res = baxter.kernel_from_group_function(x, y, s)
        want = baxter.q_tilde_kernel(x, y, s)
        assert abs(res.value - want) <= 1e-8 * abs(want)
        assert abs(baxter.kernel_by_gaussian_identity(x, y, s) - want) <= 1e-12 * abs(want)


def test_kernel_reduction_without_character():
    x, y, s = np.array([0.2, -0.1]), np.array([0.0, 0.3]), -2j
    res = baxter.kernel_from_group_function(x, y, s, character=False)
    want = baxter.kernel_by_gaussian_identity(x, y, s, character=False)
    assert res.value == pytest.approx(want, rel=1e-10)
    # the character only damps: exp(-pi^2 / p) < 1
    assert abs(want) > abs(baxter.q_tilde_kernel(x, y, s))


def test_grid_operator_shapes_and_budget():
    op = baxter.build_grid_operator("q", (-1, 1), 5, -2j)
    assert op.matrix.shape == (25, 25)
    assert op.points.shape == (2, 25)
    assert op.interior(0.5).size == 9
    h2 = baxter.build_grid_operator("h2", (-1, 1), 5)
    assert h2.matrix.shape == (25, 25)
    with pytest.raises(GridBudgetError):
        baxter.build_grid_operator("q", (-1, 1), 41, -2j, budget_bytes=1e6)
    with pytest.raises(ValueError):
        baxter.build_grid_operator("laplace", (-1, 1), 5)


def test_grid_h2_matches_finite_differences_on_smooth_function():
    op = baxter.build_grid_operator("h2", (-1, 1), 21, conjugated=False)
    x1, x2 = op.points
    f = np.exp(-(x1 ** 2 + x2 ** 2))
    hf = op.matrix @ f
    lap = (4 * (x1 ** 2 + x2 ** 2) - 4) * f
    want = -0.5 * lap + 4 * np.pi ** 2 * np.exp(2 * (x2 - x1)) * f
    inner = op.interior(0.6)
    assert np.max(np.abs(hf[inner] - want[inner])) <= 0.02 * np.max(np.abs(want[inner]))


def test_commutators_small_on_coarse_grid():
    q1 = baxter.build_grid_operator("q", (-3, 3), 21, -2j)
    q2 = baxter.build_grid_operator("q", (-3, 3), 21, 1 - 3j)
    assert baxter.commutator_residual(q1, q2) <= 1e-3
    # a generic non-commuting pair is far from zero
    shifted = baxter.GridOperator(q1.axes, np.roll(q1.matrix, 1, axis=1))
    assert baxter.commutator_residual(q1, shifted) > 10 * baxter.commutator_residual(q1, q2)


def test_commutator_residual_checks_grids():
    a = baxter.build_grid_operator("h2", (-1, 1), 5)
    b = baxter.build_grid_operator("h2", (-1, 1), 6)
    with pytest.raises(ValueError):
        baxter.commutator_residual(a, b)


def test_kernel_point_validation():
    kp = baxter.KernelPoint([0.0, 1.0], [1.0, 2.0], -2j)
    assert kp.rank == 1
    with pytest.raises(ValueError):
        baxter.KernelPoint([0.0], [1.0, 2.0], -2j)
