"""K-biinvariant Hecke elements, spherical functions and their eigenvalues.

Haar measure conventions
------------------------
* On GL_n as an integration domain for matrix integrals: ``dZ / |det Z|^n``.
* On G for convolutions and eigenvalues: the Iwasawa measure
  ``dg = delta(a) dn d^x a dk`` with ``int_K dk = 1``.  For K-invariant
  integrands this is an integral over the Borel part only.

The two differ by a constant; for GL_1 it is exactly 2 (K = {+-1}), which
is why :func:`q2_group` carries the factor ``2^{l+1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceDomainError, ShapeError, SingularMatrixError
from .matgrp import (
    GroupTag,
    gl_rho,
    sample_gl_gaussian,
    sample_maximal_compact,
    sample_orthogonal,
)
from .quad import DecaySpec, IntegralResult, integrate, mc_integrate, mc_summary
from .specfn import SpectralParams, _as_point, d_factor, gamma_r

ELEMENT_KINDS = ("gl_gaussian", "gl_gaussian_tilde", "gl_squared", "classical")


def _stack(g) -> tuple[np.ndarray, bool]:
    g = np.asarray(g)
    if g.ndim == 0:
        g = g.reshape(1, 1)
    single = g.ndim == 2
    if single:
        g = g[None]
    if g.ndim != 3 or g.shape[-1] != g.shape[-2]:
        raise ShapeError(f"expected square matrices, got shape {g.shape}")
    return g, single


def _abs_det(g: np.ndarray) -> np.ndarray:
    det = np.linalg.det(g)
    if np.iscomplexobj(det):
        # complexified unipotent coordinates leave det real
        if np.any(np.abs(det.imag) > 1e-10 * np.maximum(np.abs(det), 1e-300)):
            raise ValueError("determinant must stay real")
        det = det.real
    return np.abs(det)


def q_group_gl(g, s):
    """Universal Baxter element ``2^{l+1} |det g|^{i s + l/2} exp(-pi Tr g^T g)``.

    ``g`` is one ``n x n`` matrix or a stack of them.  ``Tr g^T g`` is
    evaluated as the bilinear sum of squared entries, so complex entries
    give the analytic continuation in the matrix coefficients.
    """
    g, single = _stack(g)
    n = g.shape[-1]
    l = n - 1
    i_s = _as_point(s).i_s
    det = _abs_det(g)
    if np.any(det == 0.0):
        raise SingularMatrixError("q_group_gl needs invertible matrices")
    tr = np.sum(g * g, axis=(-2, -1))
    val = 2.0 ** n * np.exp((i_s + 0.5 * l) * np.log(det) - np.pi * tr)
    return complex(val[0]) if single else val


def q_group_gl_tilde(g, s):
    """``Q~(g, s) = Q(g^{-1}, s)``."""
    g, single = _stack(np.asarray(g, dtype=float))
    if np.any(np.linalg.det(g) == 0.0):
        raise SingularMatrixError("q_group_gl_tilde needs invertible matrices")
    val = q_group_gl(np.linalg.inv(g), s)
    return complex(val[0]) if single else val


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConvergenceDomainError(msg)


def q2_group(g, s, effort: int = 200_000, seed=0) -> IntegralResult:
    """Squared Baxter element, written through its value at ``g^{-1}``:

        Q2(g^{-1}, s) = 2^{l+1} |det g|^{i s + l/2}
                        int exp(-pi Tr Z (g g^T + 1) Z^T) |det Z|^{2 i s + l} dZ / |det Z|^{l+1}.

    For ``l = 0`` the integral is 1-D quadrature in ``log|z|``; for larger
    ``l`` it is Monte Carlo with ``effort`` samples.  Requires
    ``Re(2 i s) > 1``.
    """
    g = np.atleast_2d(np.asarray(g, dtype=float))
    pt = _as_point(s)
    _require((2.0 * pt.i_s).real > 1.0, f"q2_group needs Re(2 i s) > 1, got s = {pt.s!r}")
    n = g.shape[0]
    l = n - 1
    ginv = np.linalg.inv(g)
    # Q2(g) is the formula above evaluated at g^{-1}
    m = ginv @ ginv.T + np.eye(n)
    det_factor = np.abs(np.linalg.det(ginv)) ** (pt.i_s + 0.5 * l)
    if n == 1:
        c = float(m[0, 0])

        def integrand(u):
            # z = +-e^u, both signs folded into the factor 2
            return 2.0 * np.exp(2.0 * pt.i_s * u - np.pi * c * np.exp(2.0 * u))

        scale = 1.0 / max((2.0 * pt.i_s).real, 0.25)
        res = integrate(integrand, 1, DecaySpec(-0.5 * math.log(c), scale), rel_tol=1e-12)
        fac = 2.0 * det_factor
        return IntegralResult(fac * res.value, abs(fac) * res.error_estimate, res.evaluations)

    def sampler(rng, size):
        return sample_gl_gaussian(n, rng, size)

    def integrand(z):
        quad_form = np.einsum("kij,jl,kil->k", z, m, z)
        det = np.abs(np.linalg.det(z))
        with np.errstate(divide="ignore"):
            return np.exp(-np.pi * quad_form + (2.0 * pt.i_s + l) * np.log(det))

    res = mc_integrate(sampler, integrand, effort, seed)
    fac = 2.0 ** n * det_factor
    return IntegralResult(fac * res.value, abs(fac) * res.error_estimate, res.evaluations)


def spherical_function(g, lam, effort: int = 20_000, seed=0) -> IntegralResult:
    """Normalized spherical function ``int_K exp(<h(k g), i lam - rho>) dk``.

    Monte Carlo over Haar-distributed ``k``; GL_1 (where K = {+-1}) is
    evaluated exactly.
    """
    g = np.atleast_2d(np.asarray(g, dtype=float))
    lam = np.asarray(lam.entries if isinstance(lam, SpectralParams) else lam, dtype=float)
    n = g.shape[0]
    if lam.size != n:
        raise ValueError(f"GL_{n} needs {n} spectral entries")
    expo = 1j * lam - gl_rho(n)
    if n == 1:
        return IntegralResult(complex(np.exp(expo[0] * math.log(abs(g[0, 0])))), 0.0, 1)
    if np.allclose(g, np.eye(n), rtol=0, atol=0):
        return IntegralResult(1.0 + 0j, 0.0, 1)

    def sampler(rng, size):
        return sample_orthogonal(n, rng, size), np.ones(size)

    def integrand(k):
        kg = k @ g
        # h(kg) = log diag R of the QR of (kg)^T
        r = np.linalg.qr(np.swapaxes(kg, -1, -2), mode="r")
        a_log = np.log(np.abs(np.diagonal(r, axis1=-2, axis2=-1)))
        return np.exp(a_log @ expo)

    return mc_integrate(sampler, integrand, effort, seed)


@dataclass(frozen=True)
class DualWeight:
    """Eigenvalues of the Langlands parameter in the standard representation."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(float(v) for v in self.entries))

    @classmethod
    def from_params(cls, lam: SpectralParams, group: GroupTag) -> "DualWeight":
        if group.kind == "gl":
            return cls(lam.entries)
        return cls(lam.mu1 if group.kind == "so_even" else lam.mu2)

    @property
    def self_dual(self) -> bool:
        return sorted(self.entries) == sorted(-v for v in self.entries)

    def l_factor(self, s) -> complex:
        i_s = _as_point(s).i_s
        out = 1.0 + 0j
        for v in self.entries:
            out *= gamma_r(i_s - 1j * v)
        return out


@dataclass(frozen=True)
class HeckeElement:
    """A one-parameter K-biinvariant function on ``group``.

    Calling the element on a matrix (or stack) evaluates it.  The
    ``classical`` kind is evaluated in closed form through
    :func:`r_ratio_closed`; :func:`q_group_classical` gives the Monte Carlo
    route to the same values.
    """

    group: GroupTag
    kind: str
    s: complex

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise ValueError(f"kind must be one of {ELEMENT_KINDS}")
        classical = self.kind == "classical"
        if classical != (self.group.kind != "gl"):
            raise ValueError(f"kind {self.kind!r} does not match group {self.group.name}")
        object.__setattr__(self, "s", complex(getattr(self.s, "s", self.s)))

    def __call__(self, g):
        if self.kind == "gl_gaussian":
            return q_group_gl(g, self.s)
        if self.kind == "gl_gaussian_tilde":
            return q_group_gl_tilde(g, self.s)
        if self.kind == "gl_squared":
            g, single = _stack(np.asarray(g, dtype=float))
            if g.shape[-1] != 1:
                raise ValueError("pointwise gl_squared evaluation is by quadrature for l = 0 only")
            vals = np.array([q2_group(m, self.s).value for m in g])
            return complex(vals[0]) if single else vals
        return d_factor(self.group, self.s) * r_ratio_closed(g, self.s)


def _b_coordinates(n: int):
    return [(i, j) for i in range(n) for j in range(i)]


def hecke_eigenvalue(elem: HeckeElement, lam, effort: int = 0,
                     rel_tol: float = 1e-10) -> IntegralResult:
    """Eigenvalue ``int_G phi(g^{-1}) phi_lam(g) dg`` of ``elem`` on the spherical function.

    The integral over K is absorbed by K-biinvariance, leaving

        int_{A N_-} delta(a) phi((n a)^{-1}) exp(<log a, i lam - rho>) dn d^x a.

    The unipotent part is parametrized by the strictly lower entries
    ``b_ij = n_ij e^{x_j}`` of ``b = n a`` (``dn = prod e^{-x_j} db_ij``), so
    Gaussian elements have unit-width Gaussians in every ``b_ij``.
    GL_1 and GL_2 are done by quadrature.  For ``gl_squared`` (GL_1) the
    inner matrix integral is folded into a 2-D quadrature.  Classical Sp_2
    (= SL_2) uses the analogous two-coordinate parametrization.
    """
    lam_e = np.asarray(lam.entries if isinstance(lam, SpectralParams) else lam, dtype=float)
    pt = _as_point(elem.s)
    pt.require_convergent("eigenvalue integral")
    if elem.kind == "gl_squared":
        return _eigen_gl_squared(pt, lam_e, rel_tol)
    if elem.kind == "classical":
        return _eigen_sp2(elem, lam_e, rel_tol, effort)
    n = elem.group.n
    if n > 2:
        raise ValueError("eigenvalue quadrature is implemented for GL_1 and GL_2")
    if lam_e.size != n:
        raise ValueError(f"GL_{n} needs {n} spectral entries")
    if elem.kind == "gl_gaussian" and n > 1:
        raise ValueError(
            "the plain element on GL_2 has x-dependent unipotent widths; use the tilde element"
        )
    rho = gl_rho(n)
    expo = 1j * lam_e - rho
    slots = _b_coordinates(n)
    d = n + len(slots)
    scale = np.ones(d)
    scale[:n] = 1.0 / max(pt.i_s.real, 0.25)
    kinds_gauss = len(slots) > 0

    def integrand(*c):
        xs = np.vstack(c[:n])
        m = xs.shape[1]
        b = np.zeros((m, n, n))
        b[:, range(n), range(n)] = np.exp(xs.T)
        jac = np.ones(m)
        for k, (i, j) in enumerate(slots):
            b[:, i, j] = c[n + k]
            jac = jac * np.exp(-xs[j])
        delta = np.exp(2.0 * (rho @ xs))
        phi_inv = elem(np.linalg.inv(b))
        return delta * jac * phi_inv * np.exp(expo @ xs)

    if not kinds_gauss:
        decay = DecaySpec(0.0, scale, "double_exponential")
        return integrate(integrand, d, decay, rel_tol=rel_tol)
    # torus coordinates need the sinh-sinh map; b-coordinates are unit Gaussians
    # whose scale is absorbed by the same map with a short window
    radius = np.full(d, 44.0)
    radius[n:] = 8.0
    decay = DecaySpec(0.0, scale, "double_exponential", radius)
    return integrate(integrand, d, decay, rel_tol=rel_tol)


def _eigen_gl_squared(pt, lam_e, rel_tol) -> IntegralResult:
    if lam_e.size != 1:
        raise ValueError("gl_squared eigenvalues are implemented for GL_1")
    lam0 = float(lam_e[0])
    _require((2.0 * pt.i_s).real > 1.0, "q2 needs Re(2 i s) > 1")

    def integrand(v, u):
        # phi(a^{-1}) with a = e^x: Q2(a^{-1}) = 2 a^{i s} * 2 int_{z>0} e^{-pi z^2 (a^2 + 1)} z^{2is} dz/z;
        # integrate in (v, u) = (log(z a), log z), where the Gaussian splits
        x = v - u
        gauss = np.exp(-np.pi * (np.exp(2.0 * v) + np.exp(2.0 * u)))
        return 4.0 * np.exp((pt.i_s + 1j * lam0) * x + 2.0 * pt.i_s * u) * gauss

    scale = 1.0 / max(pt.i_s.real, 0.25)
    return integrate(integrand, 2, DecaySpec(0.0, scale), rel_tol=rel_tol)


def classical_mc_evaluator(group: GroupTag, s, effort: int, seed=0):
    """Vectorized Monte Carlo evaluation of the classical element on matrix stacks.

    One sample set ``Z`` is drawn and reused for every argument (common
    random numbers).  Since the Gaussian and the Haar measure are invariant
    under ``Z -> U Z`` for orthogonal ``U``, ``R_G(g, s)`` only sees the
    eigenvalues ``sigma_j`` of ``g^T g``, and the quadratic form reduces to
    ``sum_j sigma_j |row_j(Z)|^2``.
    """
    n = group.n
    pt = _as_point(s)
    _require(pt.i_s.real > 2 * group.rank - 1, "R_G needs Re(i s) > 2l - 1")
    z, w = sample_gl_gaussian(n, seed, int(effort))
    ok = w > 0
    det = np.abs(np.linalg.det(z))
    base = np.where(ok, np.exp((pt.i_s - n) * np.log(np.where(ok, det, 1.0))), 0.0)
    rows = np.sum(z * z, axis=-1)
    den = base.mean()
    d = d_factor(group, s)

    def evaluate(g):
        g, single = _stack(np.asarray(g, dtype=float))
        sig = np.linalg.eigvalsh(np.swapaxes(g, -1, -2) @ g)
        out = np.empty(g.shape[0], dtype=complex)
        for start in range(0, g.shape[0], 256):
            blk = sig[start:start + 256]
            out[start:start + 256] = (np.exp(-np.pi * blk @ rows.T) @ base) / (base.size * den)
        out = d * out
        return complex(out[0]) if single else out

    return evaluate


def _eigen_sp2(elem, lam_e, rel_tol, effort=0) -> IntegralResult:
    group = elem.group
    if group.kind != "sp" or group.rank != 1:
        raise ValueError("classical eigenvalue quadrature is implemented for Sp_2 only")
    if lam_e.size != 1:
        raise ValueError("Sp_2 needs one spectral entry")
    if effort:
        # two independent halves: their spread is the Monte Carlo error,
        # which the quadrature estimate cannot see under common random numbers
        halves = [_sp2_quadrature(classical_mc_evaluator(group, elem.s, effort // 2, seed),
                                  elem.s, lam_e, rel_tol) for seed in (0, 1)]
        value = 0.5 * (halves[0].value + halves[1].value)
        err = 0.5 * abs(halves[0].value - halves[1].value) + max(h.error_estimate for h in halves)
        return IntegralResult(value, err, sum(h.evaluations for h in halves))
    return _sp2_quadrature(elem, elem.s, lam_e, rel_tol)


def _sp2_quadrature(phi, s, lam_e, rel_tol) -> IntegralResult:
    lam0 = float(lam_e[0])
    pt = _as_point(s)
    rho = gl_rho(2)

    def integrand(x, b):
        m = x.size
        g = np.zeros((m, 2, 2))
        g[:, 0, 0] = np.exp(x)
        g[:, 1, 1] = np.exp(-x)
        g[:, 1, 0] = b
        # a = diag(e^x, e^-x): delta = e^{2x}, dn = e^{-x} db,
        # <log a, i mu - rho> = 2 i lam x - x
        weight = np.exp(2.0 * x - x + (2j * lam0 - 2.0 * rho[0]) * x)
        return weight * phi(np.linalg.inv(g))

    # power-law tails in b: the sinh-sinh map with a wide window
    decay = DecaySpec(0.0, [1.0 / max(pt.i_s.real - 1.0, 0.25), 1.0], "double_exponential",
                      [44.0, 1e6])
    return integrate(integrand, 2, decay, rel_tol=rel_tol)


def r_ratio_closed(g, s):
    """``R_G(g, s) / R_G(0, s) = det(g^T g + 1)^{-i s / 2}``.

    The substitution ``Z -> (g^T g + 1)^{-1/2} Z`` leaves the Haar measure
    invariant and pulls out ``|det|^{-i s}`` of the square root.
    """
    g, single = _stack(np.asarray(g, dtype=float))
    n = g.shape[-1]
    m = np.swapaxes(g, -1, -2) @ g + np.eye(n)
    _, logdet = np.linalg.slogdet(m)
    i_s = _as_point(s).i_s
    val = np.exp(-0.5 * i_s * logdet)
    return complex(val[0]) if single else val


def _r_samples(g, s, group: GroupTag, effort, seed):
    g = np.atleast_2d(np.asarray(g, dtype=float))
    if g.shape != (group.n, group.n):
        raise ShapeError(f"{group.name} needs {group.n}x{group.n} matrices")
    pt = _as_point(s)
    l = group.rank
    _require(pt.i_s.real > 2 * l - 1,
             f"R_G needs Re(i s) > 2l - 1 = {2 * l - 1}, got s = {pt.s!r}")
    n = group.n
    m = g.T @ g
    power = pt.i_s - n

    def draw(rng, size):
        z, w = sample_gl_gaussian(n, rng, size)
        det = np.abs(np.linalg.det(z))
        ok = w > 0
        with np.errstate(divide="ignore"):
            # weight * |det|^{i s}, folded in log form: |det|^{i s - n}
            base = np.where(ok, np.exp(power * np.log(np.where(ok, det, 1.0))), 0.0)
        quad_form = np.einsum("kji,jl,kli->k", z, m, z)
        return base * np.exp(-np.pi * quad_form), base

    n_chunks = max(1, -(-int(effort) // 200_000))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    left = int(effort)
    num, den = [], []
    for child in children:
        size = min(200_000, left)
        left -= size
        a, b = draw(np.random.default_rng(child), size)
        num.append(a)
        den.append(b)
    return np.concatenate(num), np.concatenate(den)


def r_g(g, s, group: GroupTag, effort: int = 1_000_000, seed=0) -> IntegralResult:
    """Monte Carlo estimate of

        R_G(g, s) = int_{GL_{2l}} exp(-pi Tr Z^T (g^T g + 1) Z) |det Z|^{i s} dZ / |det Z|^{2l}

    by importance sampling with :func:`baxterq.matgrp.sample_gl_gaussian`.
    Requires ``Re(i s) > 2l - 1`` for integrability at ``det Z = 0``.
    """
    if effort < 1000:
        raise ValueError("effort must be at least 1000 samples")
    num, _ = _r_samples(g, s, group, effort, seed)
    return mc_summary(num)


def q_group_classical(g, s, group: GroupTag, effort: int = 1_000_000,
                      seed=0) -> IntegralResult:
    """Classical universal Baxter element ``d_G(s) R_G(g, s) / R_G(0, s)``.

    Numerator and denominator share their samples; their relative standard
    errors are combined in quadrature.
    """
    if effort < 1000:
        raise ValueError("effort must be at least 1000 samples")
    num, den = _r_samples(g, s, group, effort, seed)
    a, b = mc_summary(num), mc_summary(den)
    ratio = a.value / b.value
    rel = math.hypot(a.error_estimate / abs(a.value), b.error_estimate / abs(b.value))
    d = d_factor(group, s)
    val = d * ratio
    return IntegralResult(val, abs(val) * rel, a.evaluations)


def so2_element(t: float) -> np.ndarray:
    """Identity-component element ``diag(e^t, e^{-t})`` of split SO_2."""
    return np.diag([math.exp(t), math.exp(-t)])


def q_so2_closed(t, s) -> complex:
    """``Gamma_R(2 i s) (e^t + e^{-t})^{-i s}``."""
    pt = _as_point(s)
    pt.require_convergent("SO_2 Baxter element")
    t = np.asarray(t, dtype=float)
    val = gamma_r(2.0 * pt.i_s) * np.exp(-pt.i_s * np.log(2.0 * np.cosh(t)))
    return complex(val) if val.ndim == 0 else val


def l_so2_integral(s, lam: float, rel_tol: float = 1e-12) -> IntegralResult:
    """``2 int exp(-i lam t) Q_SO2(g(t), s) dt``; the 2 counts both components."""
    pt = _as_point(s)
    pt.require_convergent("SO_2 L-factor integral")
    lam = float(lam)

    def integrand(t):
        return 2.0 * np.exp(-1j * lam * t) * q_so2_closed(t, pt.s)

    scale = 1.0 / max(pt.i_s.real, 0.25)
    return integrate(integrand, 1, DecaySpec(0.0, scale), rel_tol=rel_tol)


def convolve_gl1(f1, f2, g: float, rel_tol: float = 1e-12) -> IntegralResult:
    """``(f1 * f2)(g) = int_G f1(g h^{-1}) f2(h) dh`` on GL_1 for even f1, f2.

    With ``int_K dk = 1`` (K = {+-1}) the Haar integral is ``int_0^inf dh / h``.
    """
    g = float(g)

    def integrand(u):
        h = np.exp(u)
        return np.asarray(f1(g / h)) * np.asarray(f2(h))

    return integrate(integrand, 1, DecaySpec(0.0, 0.5), rel_tol=rel_tol)


def k_biinvariance_defect(elem, g, seed=0, count: int = 10) -> float:
    """Largest ``|phi(k1 g k2) - phi(g)| / |phi(g)|`` over sampled ``k1, k2``."""
    rng = np.random.default_rng(seed)
    g = np.asarray(g, dtype=float)
    ref = elem(g)
    worst = 0.0
    for _ in range(count):
        k1 = sample_maximal_compact(elem.group, rng)
        k2 = sample_maximal_compact(elem.group, rng)
        worst = max(worst, abs(elem(k1 @ g @ k2) - ref) / abs(ref))
    return worst


__all__ = [
    "DualWeight",
    "HeckeElement",
    "convolve_gl1",
    "hecke_eigenvalue",
    "k_biinvariance_defect",
    "l_so2_integral",
    "q2_group",
    "q_group_classical",
    "q_group_gl",
    "q_group_gl_tilde",
    "q_so2_closed",
    "r_g",
    "r_ratio_closed",
    "so2_element",
    "spherical_function",
    "classical_mc_evaluator",
]
