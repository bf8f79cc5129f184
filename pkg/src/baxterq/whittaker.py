"""gl_1 and gl_2 Whittaker functions and the second-order Toda Hamiltonian.

Two normalizations appear:

* ``Psi`` is the eigenfunction of ``H2 = -1/2 (d1^2 + d2^2) + 4 pi^2 e^{2(x2-x1)}``
  with eigenvalue ``(lam1^2 + lam2^2) / 2``;
* ``Phi = exp(-<rho, x>) Psi`` is the function the Baxter operators act on
  diagonally.  :func:`whittaker_gl2` returns ``Phi``.

For gl_2, ``Psi(x) = exp(i (lam1 + lam2)(x1 + x2) / 2) K(nu, 2 pi e^{x2 - x1})``
with ``nu = i (lam1 - lam2) / 2`` and ``K`` the Macdonald function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StepTooLargeError
from .matgrp import gl_rho
from .quad import DecaySpec, integrate
from .specfn import SpectralParams

# z beyond which K(nu, z) < e^{-700} for the orders used here
_Z_UNDERFLOW = 700.0
# width of the log(2/z) groups used by kbessel
_FLAT_BIN = 4.0
_WORK_ENTRIES = 2e6


@dataclass(frozen=True)
class WhittakerSpec:
    lam: SpectralParams
    rank: int

    def __post_init__(self):
        if self.rank not in (0, 1):
            raise ValueError("closed-form Whittaker functions exist here only for rank 0 and 1")
        lam = self.lam if isinstance(self.lam, SpectralParams) else SpectralParams(self.lam)
        if len(lam) != self.rank + 1:
            raise ValueError(f"rank {self.rank} needs {self.rank + 1} spectral entries")
        object.__setattr__(self, "lam", lam)

    def __call__(self, *x):
        if self.rank == 0:
            return whittaker_gl1(self.lam.entries[0], x[0])
        return whittaker_gl2(self.lam, x)

    @property
    def eigenvalue_h2(self) -> float:
        return 0.5 * sum(v * v for v in self.lam.entries)


def kbessel(nu, z, rel_tol: float = 1e-13) -> np.ndarray:
    """Macdonald function ``K(nu, z) = int_0^inf exp(-z cosh t) cosh(nu t) dt``.

    Vectorized over ``z > 0``; ``nu`` is any complex order (purely imaginary
    in this package).  Arguments with ``z > 700`` return exactly 0.
    """
    nu = complex(nu)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(z <= 0) or not np.all(np.isfinite(z)):
        raise ValueError("kbessel needs finite z > 0")
    out = np.zeros(z.shape, dtype=complex)
    live = z <= _Z_UNDERFLOW
    if not np.any(live):
        return out
    # the integrand is flat out to t ~ log(2/z), then decays faster than any
    # Gaussian: plain trapezoid on a window just past that point.  Arguments
    # are grouped by that length so small z do not widen the window for all.
    flat = np.maximum(0.0, np.log(2.0 / z))
    group = np.where(live, np.floor(flat / _FLAT_BIN), -1)
    for g in np.unique(group[live]):
        idx = np.flatnonzero(group == g)
        radius = 8.0 + _FLAT_BIN * (g + 1)
        # bound the (nodes x arguments) work array to a few tens of MB
        chunk = max(1, int(_WORK_ENTRIES // (radius * 2.0 ** 7)))
        for start in range(0, idx.size, chunk):
            part = idx[start:start + chunk]
            out[part] = _kbessel_window(nu, z[part], radius, rel_tol)
    return out


def _kbessel_window(nu, zl, radius, rel_tol):
    def integrand(t):
        ct = np.cosh(t)[:, None]
        tt = t[:, None]
        e = -zl[None, :] * ct
        return 0.25 * (np.exp(nu * tt + e) + np.exp(-nu * tt + e))

    res = integrate(integrand, 1, DecaySpec(0.0, 1.0, "gaussian", radius),
                    rel_tol=rel_tol, relative_to="l1", min_level=3)
    return res.value


def whittaker_gl1(lam: float, x):
    """Rank-0 Whittaker function: the torus character ``exp(i lam x)``."""
    return np.exp(1j * float(lam) * np.asarray(x, dtype=float))


def _lam_pair(lam):
    ent = lam.entries if isinstance(lam, SpectralParams) else tuple(np.atleast_1d(lam))
    if len(ent) != 2:
        raise ValueError("gl_2 needs two spectral entries")
    return float(ent[0]), float(ent[1])


def toda_psi_gl2(lam, x, rel_tol: float = 1e-13):
    """H2-eigenfunction ``Psi`` (no rho twist); ``x`` has leading axis of length 2."""
    l1, l2 = _lam_pair(lam)
    x = np.asarray(x, dtype=float)
    x1, x2 = np.broadcast_arrays(x[0], x[1])
    shape = x1.shape
    x1, x2 = x1.ravel(), x2.ravel()
    u = x2 - x1
    nu = 0.5j * (l1 - l2)
    out = np.zeros(u.shape, dtype=complex)
    # log z > log 700 means K underflows below e^{-700}
    live = u < np.log(_Z_UNDERFLOW / (2.0 * np.pi))
    if np.any(live):
        k = kbessel(nu, 2.0 * np.pi * np.exp(u[live]), rel_tol)
        out[live] = np.exp(0.5j * (l1 + l2) * (x1[live] + x2[live])) * k
    return out.reshape(shape)


def whittaker_gl2(lam, x, rel_tol: float = 1e-13):
    """Baxter-normalized gl_2 Whittaker function ``Phi = exp(-<rho, x>) Psi``.

    ``x`` is a pair ``(x1, x2)`` of scalars or equally shaped arrays.  The
    overall constant is the Macdonald-function normalization; only
    normalization-free statements are made about it.
    """
    x = np.asarray(x, dtype=float)
    psi = toda_psi_gl2(lam, x, rel_tol)
    rho = gl_rho(2)
    return np.exp(-(rho[0] * x[0] + rho[1] * x[1])) * psi


def _h2_apply(fn, pts: np.ndarray, h: float, rank: int) -> np.ndarray:
    # central second differences; pts has shape (rank+1, N)
    centre = fn(pts)
    lap = np.zeros_like(centre)
    for i in range(rank + 1):
        step = np.zeros((rank + 1, 1))
        step[i] = h
        lap += (fn(pts + step) - 2.0 * centre + fn(pts - step)) / (h * h)
    out = -0.5 * lap
    if rank == 1:
        out = out + 4.0 * np.pi ** 2 * np.exp(2.0 * (pts[1] - pts[0])) * centre
    return out, centre


def _h2_residual_once(spec: WhittakerSpec, pts: np.ndarray, h: float) -> float:
    if spec.rank == 0:
        lam = spec.lam.entries[0]
        fn = lambda p: whittaker_gl1(lam, p[0])
    else:
        fn = lambda p: toda_psi_gl2(spec.lam, p)
    hpsi, psi = _h2_apply(fn, pts, h, spec.rank)
    resid = np.abs(hpsi - spec.eigenvalue_h2 * psi)
    return float(resid.max() / np.abs(psi).max())


def toda_h2_residual(spec: WhittakerSpec, grid, h: float, check: bool = True) -> float:
    """Relative residual of the finite-difference eigen-equation for H2.

    Applies the 5-point discretization of H2 with step ``h`` to ``Psi`` at
    every grid point and returns ``max |H2 Psi - E Psi| / max |Psi|`` over
    the grid, with ``E = (lam1^2 + lam2^2) / 2``.  ``grid`` has shape
    ``(rank + 1, N)`` (or is a list of points).

    With ``check`` on, the residual is recomputed at ``h / 2`` and
    :class:`StepTooLargeError` is raised if it does not shrink.
    """
    pts = np.asarray(grid, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :] if spec.rank == 0 else pts[:, None]
    if pts.shape[0] != spec.rank + 1:
        pts = pts.T
    if pts.shape[0] != spec.rank + 1:
        raise ValueError("grid points must have rank + 1 coordinates")
    r = _h2_residual_once(spec, pts, h)
    if check:
        r_half = _h2_residual_once(spec, pts, 0.5 * h)
        if r_half > r and r > 1e-12:
            raise StepTooLargeError(
                f"residual grew from {r:.3g} to {r_half:.3g} under h -> h/2 (h = {h:g})"
            )
    return r


def square_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """``n x n`` tensor grid on ``[lo, hi]^2`` as an array of shape (2, n*n)."""
    g = np.linspace(lo, hi, n)
    a, b = np.meshgrid(g, g, indexing="ij")
    return np.vstack([a.ravel(), b.ravel()])
