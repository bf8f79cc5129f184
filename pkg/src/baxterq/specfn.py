"""Complex Gamma function, the completed factor Gamma_R and Archimedean L-factors.

Conventions
-----------
``gamma_r(z) = pi**(-z/2) * Gamma(z/2)`` is the single-argument completed
Gamma factor.  The two-argument factor attached to a spectral parameter
``s`` and a weight ``lam`` is ``gamma_r(1j*s - 1j*lam)``.  Every product in
this module needs ``Re(1j*s) > 0``, i.e. ``Im s < 0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceDomainError, GammaPoleError

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class SpectralPoint:
    """The complex Baxter parameter ``s``."""

    s: complex

    @property
    def i_s(self) -> complex:
        return 1j * complex(self.s)

    @property
    def converges(self) -> bool:
        return self.i_s.real > 0.0

    def require_convergent(self, what: str = "integral") -> None:
        if not self.converges:
            raise ConvergenceDomainError(
                f"{what} requires Re(i*s) > 0, got s = {self.s!r}"
            )


@dataclass(frozen=True)
class SpectralParams:
    """Real principal-series parameters ``lam`` attached to a group.

    ``group`` is a :class:`baxterq.matgrp.GroupTag` (or ``None`` for a bare
    GL vector).  For GL_{l+1} there are l+1 entries, for SO_{2l}/Sp_{2l}
    there are l.
    """

    entries: tuple
    group: object = None

    def __post_init__(self):
        ent = tuple(float(v) for v in np.atleast_1d(self.entries))
        if not all(math.isfinite(v) for v in ent):
            raise ValueError("spectral parameters must be finite reals")
        object.__setattr__(self, "entries", ent)
        if self.group is not None:
            expected = self.group.n_spectral
            if len(ent) != expected:
                raise ValueError(
                    f"{self.group.name} needs {expected} spectral entries, got {len(ent)}"
                )

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def negated(self) -> "SpectralParams":
        return SpectralParams(tuple(-v for v in self.entries), self.group)

    @property
    def mu1(self) -> tuple:
        """Weight diag(lam, -lam) of the standard representation of so_{2l}."""
        return self.entries + tuple(-v for v in self.entries)

    @property
    def mu2(self) -> tuple:
        """Weight diag(0, lam, -lam) of the standard representation of so_{2l+1}."""
        return (0.0,) + self.mu1


def _as_point(s) -> SpectralPoint:
    return s if isinstance(s, SpectralPoint) else SpectralPoint(complex(s))


def _entries(lam) -> tuple:
    return lam.entries if isinstance(lam, SpectralParams) else tuple(
        float(v) for v in np.atleast_1d(lam)
    )


def _is_gamma_pole(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _log_gamma_lanczos(z: complex) -> complex:
    # valid for Re z >= 0.5
    z = z - 1.0
    series = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        series += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(series)


def log_gamma(z) -> complex:
    """Principal branch of log Gamma(z).

    The branch cut lies on the negative real axis; on the positive real axis
    the result is real.  Arguments with ``Re z < 0.5`` are shifted up with the
    recurrence ``log Gamma(z) = log Gamma(z + m) - sum log(z + k)``, which
    stays on the principal branch because every ``log(z + k)`` has its cut
    inside the negative real axis.

    Raises
    ------
    GammaPoleError
        If ``z`` is a non-positive integer.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"log_gamma argument must be finite, got {z!r}")
    if _is_gamma_pole(z):
        raise GammaPoleError(f"Gamma has a pole at {z.real:g}")
    if z.real >= 0.5:
        return _log_gamma_lanczos(z)
    m = int(math.ceil(0.5 - z.real))
    shift = 0j
    for k in range(m):
        shift += cmath.log(z + k)
    return _log_gamma_lanczos(z + m) - shift


def gamma(z) -> complex:
    return cmath.exp(log_gamma(z))


def gamma_r(z) -> complex:
    """Completed Gamma factor ``pi**(-z/2) * Gamma(z/2)``."""
    z = complex(z)
    if _is_gamma_pole(0.5 * z):
        raise GammaPoleError(f"Gamma_R has a pole at z = {z.real:g}")
    return cmath.exp(-0.5 * z * _LOG_PI + log_gamma(0.5 * z))


def gamma_r_pair(s, lam: float) -> complex:
    """Two-argument factor ``Gamma_R(s, lam) = gamma_r(i s - i lam)``."""
    return gamma_r(1j * complex(s) - 1j * lam)


def l_factor_gl(s, lam) -> complex:
    """Local L-factor ``prod_j gamma_r(i s - i lam_j)`` of a GL principal series.

    ``lam`` may be a :class:`SpectralParams` or any real sequence; its length
    is ``l + 1``.
    """
    pt = _as_point(s)
    pt.require_convergent("GL L-factor")
    out = 1.0 + 0j
    for v in _entries(lam):
        out *= gamma_r(pt.i_s - 1j * v)
    return out


def l_factor_classical(s, lam, kind: str | None = None) -> complex:
    """L-factor of the standard representation of the dual group.

    SO_{2l} (self-dual): ``prod_i G(s, lam_i) G(s, -lam_i)``.
    Sp_{2l} (dual SO_{2l+1}): the same times ``G(s, 0)``.

    ``kind`` is ``"so_even"`` or ``"sp"``; when ``lam`` is a SpectralParams
    with a group attached, the group decides.
    """
    if kind is None:
        group = getattr(lam, "group", None)
        if group is None:
            raise ValueError("pass kind= or SpectralParams with a classical group")
        kind = group.kind
    if kind not in ("so_even", "sp"):
        raise ValueError(f"not a classical group kind: {kind!r}")
    pt = _as_point(s)
    pt.require_convergent("classical L-factor")
    weights = []
    for v in _entries(lam):
        weights += [v, -v]
    if kind == "sp":
        weights.append(0.0)
    out = 1.0 + 0j
    for v in weights:
        out *= gamma_r(pt.i_s - 1j * v)
    return out


def d_factor(group, s) -> complex:
    """Normalizing product d_G(s) of the classical universal Baxter element.

    d_{SO_{2l}}(s) = prod_{j = 0, 2, ..., 2l-2} gamma_r(2 i s - j)
    d_{Sp_{2l}}(s) = prod_{j = 2, 4, ..., 2l}   gamma_r(2 i s - j)
    """
    kind = getattr(group, "kind", group)
    rank = getattr(group, "rank", None)
    if rank is None:
        raise ValueError("d_factor needs a GroupTag")
    i_s = _as_point(s).i_s
    if kind == "so_even":
        js = range(0, 2 * rank - 1, 2)
    elif kind == "sp":
        js = range(2, 2 * rank + 1, 2)
    else:
        raise ValueError(f"d_factor is defined for so_even and sp, not {kind!r}")
    out = 1.0 + 0j
    for j in js:
        out *= gamma_r(2.0 * i_s - j)
    return out
