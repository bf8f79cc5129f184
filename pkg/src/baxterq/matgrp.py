"""Real matrix layer: Iwasawa factors, group tags, involutions and samplers.

Iwasawa convention: ``g = n @ a @ k`` with ``n`` lower unipotent, ``a``
positive diagonal and ``k`` orthogonal.  ``a`` is stored through its
logarithm ``a_log`` so that ``h(g) = a_log``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from .errors import ShapeError, SingularMatrixError

DET_FLOOR = 1e-10


class IwasawaFactors(NamedTuple):
    n_lower: np.ndarray
    a_log: np.ndarray
    k_orth: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.n_lower @ np.diag(np.exp(self.a_log)) @ self.k_orth


def _square(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim == 0:
        g = g.reshape(1, 1)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("matrix has non-finite entries")
    return g


def _check_invertible(g: np.ndarray) -> None:
    if g.size == 0 or abs(np.linalg.det(g)) == 0.0:
        raise SingularMatrixError("matrix is singular")


def _antidiagonal(n: int) -> np.ndarray:
    return np.fliplr(np.eye(n))


@dataclass(frozen=True)
class GroupTag:
    """Which group we work in, with its embedding data.

    ``kind`` is one of ``"gl"``, ``"so_even"``, ``"sp"``.  For the classical
    kinds the group is ``{g in GL_{2l} : g* = g}`` with
    ``g* = S J (g^{-1})^T J^{-1} S^{-1}``.
    """

    kind: str
    rank: int
    S: np.ndarray = field(repr=False, compare=False)
    J: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def gl(cls, rank: int) -> "GroupTag":
        n = rank + 1
        return cls("gl", rank, np.eye(n), np.eye(n))

    @classmethod
    def so_even(cls, rank: int) -> "GroupTag":
        return cls._classical("so_even", rank)

    @classmethod
    def sp(cls, rank: int) -> "GroupTag":
        return cls._classical("sp", rank)

    @classmethod
    def from_name(cls, name: str, rank: int) -> "GroupTag":
        key = name.lower().replace("-", "_")
        makers = {"gl": cls.gl, "so_even": cls.so_even, "so": cls.so_even, "sp": cls.sp}
        if key not in makers:
            raise ValueError(f"unknown group {name!r}; use gl, so-even or sp")
        return makers[key](rank)

    @classmethod
    def _classical(cls, kind: str, rank: int) -> "GroupTag":
        if rank < 1:
            raise ValueError("classical groups need rank >= 1")
        n = 2 * rank
        signs = np.empty(n)
        mirror = -1.0 if kind == "sp" else 1.0
        for i in range(rank):
            signs[i] = (-1.0) ** i
            signs[n - 1 - i] = mirror * signs[i]
        tag = cls(kind, rank, np.diag(signs), _antidiagonal(n))
        omega = tag.S @ tag.J
        want = -omega.T if kind == "sp" else omega.T
        if not np.array_equal(omega, want):
            raise AssertionError("S J has the wrong symmetry")
        return tag

    def __post_init__(self):
        if self.kind not in ("gl", "so_even", "sp"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        if self.rank < 0:
            raise ValueError("rank must be non-negative")

    @property
    def n(self) -> int:
        """Matrix size."""
        return self.rank + 1 if self.kind == "gl" else 2 * self.rank

    @property
    def n_spectral(self) -> int:
        return self.rank + 1 if self.kind == "gl" else self.rank

    @property
    def dual(self) -> str:
        return {"gl": "gl", "so_even": "so_even", "sp": "so_odd"}[self.kind]

    @property
    def rho(self) -> np.ndarray:
        """GL half-sum vector rho_j = l/2 + 1 - j (j = 1..l+1)."""
        l = self.n - 1
        return l / 2.0 + 1.0 - np.arange(1, self.n + 1)

    @property
    def omega(self) -> np.ndarray:
        return self.S @ self.J

    @property
    def name(self) -> str:
        return {"gl": "GL", "so_even": "SO", "sp": "Sp"}[self.kind] + f"_{self.n}"


def gl_rho(n: int) -> np.ndarray:
    return (n - 1) / 2.0 + 1.0 - np.arange(1, n + 1)


def iwasawa_decompose(g) -> IwasawaFactors:
    """Factor ``g = n a k`` (lower unipotent, positive diagonal, orthogonal).

    Computed from a Householder QR of ``g.T``: ``g.T = Q R`` gives
    ``k = Q.T`` and ``a n.T = R`` once the signs are fixed so that
    ``diag(R) > 0``.  This is the same factorization as the LDL^T of
    ``g g^T = n a^2 n^T`` but does not square the condition number.
    """
    g = _square(g)
    _check_invertible(g)
    q, r = np.linalg.qr(g.T)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    q = q * d
    r = d[:, None] * r
    diag = np.diag(r)
    if np.any(diag <= 0):
        raise SingularMatrixError("matrix is numerically singular")
    n_lower = (r / diag[:, None]).T
    np.fill_diagonal(n_lower, 1.0)
    n_lower = np.tril(n_lower)
    return IwasawaFactors(n_lower, np.log(diag), q.T)


def h_log(g) -> np.ndarray:
    """Torus projection ``h(g) = log a``."""
    return iwasawa_decompose(g).a_log


def modular_delta(a_log) -> float:
    """Modular factor ``exp(sum_{i<j} (y_i - y_j)) = exp(2 <rho, y>)``."""
    y = np.asarray(a_log, dtype=float)
    return float(np.exp(2.0 * np.dot(gl_rho(y.size), y)))


def unipotent_character(n_lower) -> complex:
    """``exp(2 pi i sum_j n_{j+1,j})``: depends only on the subdiagonal."""
    n_lower = np.asarray(n_lower)
    if n_lower.ndim != 2 or n_lower.shape[0] != n_lower.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {n_lower.shape}")
    sub = np.diagonal(n_lower, offset=-1)
    return complex(np.exp(2j * np.pi * np.sum(sub)))


def _classical(group: GroupTag) -> None:
    if group.kind not in ("so_even", "sp"):
        raise ValueError(f"involution is defined for SO_even and Sp, not {group.kind}")


def involution_star(g, group: GroupTag) -> np.ndarray:
    """``g* = S J (g^{-1})^T J^{-1} S^{-1}``."""
    _classical(group)
    g = _square(g)
    if g.shape[0] != group.n:
        raise ShapeError(f"{group.name} needs {group.n}x{group.n} matrices")
    _check_invertible(g)
    p = group.omega
    return p @ np.linalg.inv(g).T @ np.linalg.inv(p)


def is_member(g, group: GroupTag, tol: float = 1e-9) -> bool:
    g = _square(g)
    if group.kind == "gl":
        return g.shape[0] == group.n and abs(np.linalg.det(g)) > 0.0
    if g.shape[0] != group.n:
        return False
    try:
        gs = involution_star(g, group)
    except SingularMatrixError:
        return False
    return bool(np.linalg.norm(gs - g) <= tol * np.linalg.norm(g))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_orthogonal(n: int, seed=None, size: int | None = None) -> np.ndarray:
    """Haar-distributed orthogonal matrix (or a stack of ``size`` of them).

    QR of a Gaussian matrix with the signs of ``diag(R)`` pushed into ``Q``,
    which makes the distribution exactly Haar.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(seed)
    shape = (n, n) if size is None else (size, n, n)
    z = rng.standard_normal(shape)
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    return q * d[..., None, :]


def sample_maximal_compact(group: GroupTag, seed=None) -> np.ndarray:
    """Random element of the identity component of ``K = G cap O(n)``.

    For GL this is a Haar orthogonal matrix.  For the classical groups a
    random skew matrix is projected onto the Lie algebra of ``K`` (skew and
    commuting with ``S J``) and exponentiated.
    """
    rng = _rng(seed)
    if group.kind == "gl":
        return sample_orthogonal(group.n, rng)
    x = rng.standard_normal((group.n, group.n))
    x = x - x.T
    p = group.omega
    x = 0.5 * (x + p @ x @ np.linalg.inv(p))
    return expm(x)


def sample_gl_gaussian(n: int, seed=None, size: int | None = None,
                       det_floor: float = DET_FLOOR):
    """Importance sample for integrals over GL_n against the Haar measure.

    Entries of ``Z`` are i.i.d. with density ``exp(-pi z^2)``.  The returned
    weight is ``|det Z|^{-n} / p(Z)`` so that ``mean(weight * f(Z))``
    estimates ``int f(Z) dZ / |det Z|^n``.  Samples with ``|det Z|`` below
    ``det_floor`` get weight 0.

    Returns ``(Z, weight)``; with ``size`` given, ``Z`` has shape
    ``(size, n, n)`` and ``weight`` shape ``(size,)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = _rng(seed)
    shape = (n, n) if size is None else (size, n, n)
    z = rng.standard_normal(shape) / np.sqrt(2.0 * np.pi)
    det = np.abs(np.linalg.det(z))
    sq = np.sum(z * z, axis=(-2, -1))
    with np.errstate(divide="ignore"):
        logw = np.pi * sq - n * np.log(det)
    ok = det >= det_floor
    weight = np.where(ok, np.exp(np.where(ok, logw, 0.0)), 0.0)
    if size is None:
        return z, float(weight)
    return z, weight
