"""Explicit gl_{l+1} Baxter kernels and their action on functions of l+1 variables.

    Q(x, y | s)  = 2^{l+1} exp{ sum_j (i s - rho_j)(x_j - y_j)
                   - pi sum_{k<=l} (e^{2(x_k - y_k)} + e^{2(y_{k+1} - x_k)})
                   - pi e^{2(x_{l+1} - y_{l+1})} }

    Q~(x, y | s) = same shape with (i s + rho_j)(y_j - x_j) and x <-> y in
                   the exponentials.

Points are arrays whose leading axis has length ``l + 1``; all kernel
functions broadcast over the trailing axes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import sparse

from .errors import ConvergenceDomainError, GridBudgetError
from .hecke import q_group_gl
from .matgrp import gl_rho, modular_delta
from .quad import DecaySpec, IntegralResult, integrate
from .specfn import SpectralPoint, _as_point

KERNELS = ("plain", "tilde")
GRID_BYTES_BUDGET = 1.6e9


@dataclass
class KernelPoint:
    x: np.ndarray
    y: np.ndarray
    s: SpectralPoint

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.s = _as_point(self.s)
        if self.x.shape[0] != self.y.shape[0]:
            raise ValueError("x and y must have the same number of coordinates")

    @property
    def rank(self) -> int:
        return self.x.shape[0] - 1


def _exponent(x, y, s, tilde: bool):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError("x and y must have the same number of coordinates")
    rho = gl_rho(n)
    i_s = 1j * complex(s)
    if tilde:
        x, y = y, x
        lin = sum((i_s + rho[j]) * (x[j] - y[j]) for j in range(n))
    else:
        lin = sum((i_s - rho[j]) * (x[j] - y[j]) for j in range(n))
    quad = np.exp(2.0 * (x[n - 1] - y[n - 1]))
    for k in range(n - 1):
        quad = quad + np.exp(2.0 * (x[k] - y[k])) + np.exp(2.0 * (y[k + 1] - x[k]))
    return lin - np.pi * quad


def q_kernel(x, y, s):
    """Baxter kernel ``Q(x, y | s)``; underflows to exact 0 far from the diagonal."""
    n = np.asarray(x).shape[0]
    s = complex(getattr(s, "s", s))
    with np.errstate(over="ignore"):
        return 2.0 ** n * np.exp(_exponent(x, y, s, tilde=False))


def q_tilde_kernel(x, y, s):
    """Dual Baxter kernel ``Q~(x, y | s)``."""
    n = np.asarray(x).shape[0]
    s = complex(getattr(s, "s", s))
    with np.errstate(over="ignore"):
        return 2.0 ** n * np.exp(_exponent(x, y, s, tilde=True))


def _kernel_fn(kind: str):
    if kind not in KERNELS:
        raise ValueError(f"kernel must be one of {KERNELS}, got {kind!r}")
    return q_kernel if kind == "plain" else q_tilde_kernel


def apply_q(kind: str, f: Callable, x, s, rel_tol: float = 1e-8,
            center=None) -> IntegralResult:
    """``(Q f)(x) = int Q(x, y | s) f(y) dy`` over R^{l+1} by quadrature.

    ``f`` takes an array of shape ``(l + 1, N)`` and returns ``N`` values.
    ``center`` fixes the quadrature grid (defaults to ``x``); passing the
    same center for several ``x`` lets a caching ``f`` reuse its values.
    """
    kern = _kernel_fn(kind)
    pt = _as_point(s)
    pt.require_convergent("Baxter operator")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = x.size
    if d > 3:
        raise ValueError("quadrature application supports l <= 2")
    rate = pt.i_s.real - 0.5 * (d - 1)
    if rate <= 0:
        raise ConvergenceDomainError(
            f"need Re(i s) > l/2 = {0.5 * (d - 1)} for the kernel tails, got s = {pt.s!r}"
        )
    scale = 1.0 / max(rate, 0.25)
    xc = x[:, None]

    def integrand(*ys):
        yy = np.vstack(ys)
        return kern(xc, yy, pt.s) * np.asarray(f(yy))

    c = x if center is None else np.broadcast_to(np.asarray(center, dtype=float), x.shape)
    return integrate(integrand, d, DecaySpec(c, scale, "double_exponential"), rel_tol=rel_tol)


class NodeCache:
    """Wrap ``f`` so repeated calls on identical node arrays reuse the values.

    :func:`apply_q` with a fixed ``center`` and scale visits the same nodes
    for every ``x``, kernel and ``s``; caching the test function there
    removes its cost from all but the first call.
    """

    def __init__(self, f: Callable, max_entries: int = 32):
        self.f = f
        self.max_entries = max_entries
        self._store: dict = {}
        self.hits = 0

    def __call__(self, y):
        y = np.ascontiguousarray(y, dtype=float)
        key = (y.shape, hash(y.tobytes()))
        hit = self._store.get(key)
        if hit is not None and np.array_equal(hit[0], y):
            self.hits += 1
            return hit[1]
        val = np.asarray(self.f(y))
        if len(self._store) >= self.max_entries:
            self._store.pop(next(iter(self._store)))
        self._store[key] = (y.copy(), val)
        return val


def gaussian_identity(omega: float, p: float) -> complex:
    """``int exp(i omega u - p u^2) du = sqrt(pi/p) exp(-omega^2 / (4p))``."""
    if not p > 0:
        raise ValueError("gaussian_identity needs p > 0")
    return math.sqrt(math.pi / p) * math.exp(-omega * omega / (4.0 * p))


def euler_identity(nu, a: float) -> complex:
    """``int exp(nu u - a e^{2u}) du = a^{-nu/2} Gamma(nu/2) / 2``."""
    from .specfn import log_gamma

    nu = complex(nu)
    if not nu.real > 0 or not a > 0:
        raise ValueError("euler_identity needs Re(nu) > 0 and a > 0")
    return 0.5 * np.exp(-0.5 * nu * math.log(a) + log_gamma(0.5 * nu))


def _unipotent_slots(n: int):
    return [(i, j) for i in range(n) for j in range(i)]


def _group_function_setup(x, y, s):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    slots = _unipotent_slots(n)
    # coefficient of n_ij^2 in Tr(g^T g) for g = a^{-1} n a~
    p = np.array([np.pi * math.exp(2.0 * (y[j] - x[i])) for i, j in slots])
    omega = np.array([2.0 * np.pi if i == j + 1 else 0.0 for i, j in slots])
    return x, y, n, slots, p, omega


def kernel_from_group_function(x, y, s, rel_tol: float = 1e-10,
                               character: bool = True) -> IntegralResult:
    """Reduce the Hecke element to a kernel on the torus by integrating over N_-.

        K(x, y) = delta(a~) int_{N_-} Q(a^{-1} n a~ | s) chi(n) dn,
        a = diag(e^x), a~ = diag(e^y).

    ``Q`` is the GL group function and only depends on ``g`` through
    ``|det g|`` and ``Tr g^T g``, so ``a^{-1} n a~`` may equally be read as
    ``a~ n^T a^{-1}``.  Each character coordinate ``n_{j+1,j}`` enters as
    ``exp(2 pi i u - p u^2)``; the integration line is moved to
    ``Im u = pi / p`` where the integrand is a pure Gaussian.  That shift is
    exact because the integrand is entire in ``u`` and decays in the strip,
    and it removes a cancellation of size ``exp(-pi^2 / p)`` that defeats
    any real-line rule.  ``character=False`` replaces ``chi`` by 1.
    """
    pt = _as_point(s)
    pt.require_convergent("kernel reduction")
    x, y, n, slots, p, omega = _group_function_setup(x, y, s)
    if n > 3:
        raise ValueError("kernel reduction by quadrature supports l <= 2")
    if not character:
        omega = np.zeros_like(omega)
    shift = omega / (2.0 * p)
    width = 1.0 / np.sqrt(2.0 * p)
    inv_a = np.exp(-x)
    at = np.exp(y)
    delta = modular_delta(y)
    d = len(slots)

    def integrand(*us):
        m = us[0].size
        g = np.zeros((m, n, n), dtype=complex)
        g[:, range(n), range(n)] = inv_a * at
        chi_arg = np.zeros(m, dtype=complex)
        for k, (i, j) in enumerate(slots):
            u = us[k] + 1j * shift[k]
            g[:, i, j] = inv_a[i] * u * at[j]
            if i == j + 1 and character:
                chi_arg = chi_arg + u
        chi = np.exp(2j * np.pi * chi_arg)
        return delta * q_group_gl(g, pt.s) * chi

    return integrate(integrand, d, DecaySpec(0.0, width, "gaussian"), rel_tol=rel_tol)


def kernel_by_gaussian_identity(x, y, s, character: bool = True) -> complex:
    """Same reduction as :func:`kernel_from_group_function`, with every N_-
    coordinate integrated by :func:`gaussian_identity` instead of quadrature."""
    pt = _as_point(s)
    x, y, n, slots, p, omega = _group_function_setup(x, y, s)
    l = n - 1
    i_s = pt.i_s
    det_log = float(np.sum(y - x))
    diag_sq = float(np.sum(np.exp(2.0 * (y - x))))
    val = 2.0 ** n * np.exp((i_s + 0.5 * l) * det_log - np.pi * diag_sq)
    val *= modular_delta(y)
    for pk, wk in zip(p, omega):
        val *= gaussian_identity(wk if character else 0.0, pk)
    return complex(val)


@dataclass
class GridOperator:
    """Dense discretization of an operator on a uniform tensor grid.

    ``matrix[i, j]`` multiplies the value at grid point ``j`` (row-major
    over ``axes``) and already includes the quadrature weight.
    """

    axes: tuple
    matrix: object

    def __post_init__(self):
        n = math.prod(a.size for a in self.axes)
        if self.matrix.shape != (n, n):
            raise ValueError("matrix dimensions must equal the grid-point count")

    @property
    def points(self) -> np.ndarray:
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.vstack([g.ravel() for g in grids])

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def interior(self, margin: float) -> np.ndarray:
        """Indices of grid points with every coordinate within ``margin`` of the center."""
        pts = self.points
        mid = np.array([0.5 * (a[0] + a[-1]) for a in self.axes])[:, None]
        return np.flatnonzero(np.all(np.abs(pts - mid) <= margin + 1e-12, axis=0))


def _axes(bounds, count, rank):
    lo, hi = bounds
    return tuple(np.linspace(lo, hi, count) for _ in range(rank + 1))


def build_grid_operator(kind: str, bounds=(-3.0, 3.0), count: int = 41, s=None,
                        rank: int = 1, conjugated: bool = True,
                        budget_bytes: float = GRID_BYTES_BUDGET) -> GridOperator:
    """Discretize ``Q(s)``, ``Q~(s)`` or ``H2`` on ``count`` points per axis.

    Integral operators use trapezoidal weights on the box.  ``"h2"`` is the
    5-point difference operator with Dirichlet truncation.  With
    ``conjugated`` (the default) it is ``e^{-<rho,x>} H2 e^{<rho,x>}``, the
    form of H2 that acts on the Baxter-normalized functions
    ``Phi = e^{-<rho,x>} Psi``; ``conjugated=False`` gives H2 itself.
    """
    if kind not in ("q", "q_tilde", "h2"):
        raise ValueError("kind must be 'q', 'q_tilde' or 'h2'")
    axes = _axes(bounds, count, rank)
    npts = count ** (rank + 1)
    if kind != "h2" and 16.0 * npts * npts > budget_bytes:
        raise GridBudgetError(
            f"{npts}x{npts} complex matrix exceeds the {budget_bytes:.3g}-byte budget"
        )
    op = GridOperator(axes, sparse.identity(npts, format="csr"))
    pts = op.points
    h = axes[0][1] - axes[0][0]
    if kind == "h2":
        return GridOperator(axes, _h2_matrix(count, rank, h, pts, conjugated))
    pt = _as_point(s)
    kern = q_kernel if kind == "q" else q_tilde_kernel
    w1 = np.full(count, h)
    w1[0] = w1[-1] = 0.5 * h
    w = w1
    for _ in range(rank):
        w = np.multiply.outer(w, w1)
    w = w.ravel()
    mat = np.empty((npts, npts), dtype=complex)
    block = max(1, int(2e6 // npts))
    for start in range(0, npts, block):
        stop = min(npts, start + block)
        mat[start:stop] = kern(pts[:, start:stop, None], pts[:, None, :], pt.s) * w[None, :]
    return GridOperator(axes, mat)


def _h2_matrix(count, rank, h, pts, conjugated):
    n = rank + 1
    eye = sparse.identity(count, format="csr")
    d2 = sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(count, count)) / (h * h)
    d1 = sparse.diags([-1.0, 1.0], [-1, 1], shape=(count, count)) / (2.0 * h)

    def along(op, axis):
        mats = [eye] * n
        mats[axis] = op
        out = mats[0]
        for m in mats[1:]:
            out = sparse.kron(out, m, format="csr")
        return out

    lap = sum(along(d2, i) for i in range(n))
    pot = np.zeros(pts.shape[1])
    for i in range(n - 1):
        pot += 4.0 * np.pi ** 2 * np.exp(2.0 * (pts[i + 1] - pts[i]))
    mat = -0.5 * lap + sparse.diags(pot)
    if conjugated:
        rho = gl_rho(n)
        drift = sum(rho[i] * along(d1, i) for i in range(n))
        mat = mat - drift - 0.5 * float(rho @ rho) * sparse.identity(count ** n)
    return sparse.csr_matrix(mat, dtype=complex)


def _fro(m) -> float:
    return float(sparse.linalg.norm(m)) if sparse.issparse(m) else float(np.linalg.norm(m))


def _rows_times_cols(a, b, rows, cols):
    # (A B)[rows][:, cols] without forming A B
    if sparse.issparse(a):
        left = a[rows]
        return np.asarray(left @ (b[:, cols] if not sparse.issparse(b) else b[:, cols].toarray()))
    if sparse.issparse(b):
        return np.asarray((b.T[cols] @ a[rows].T).T)
    return a[rows] @ b[:, cols]


def commutator_residual(a: GridOperator, b: GridOperator, margin: float = 1.5) -> float:
    """``||[A, B]||_F`` over interior rows and columns, divided by ``||A||_F ||B||_F``."""
    if a.size != b.size:
        raise ValueError("operators live on different grids")
    idx = a.interior(margin)
    ab = _rows_times_cols(a.matrix, b.matrix, idx, idx)
    ba = _rows_times_cols(b.matrix, a.matrix, idx, idx)
    return float(np.linalg.norm(ab - ba) / (_fro(a.matrix) * _fro(b.matrix)))
