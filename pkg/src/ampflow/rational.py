"""Rational transfer functions in s and in z^-1, and the bilinear map between them.

Coefficient arrays are ascending: ``num[k]`` multiplies s**k (continuous)
or z**-k (discrete). Discrete denominators are normalized to ``den[0] == 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real
from typing import Iterable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NumericalSingularity, SingularMapping

_TRIM_FLOOR = 1e-300  # trailing coefficients below this are numerical debris


def _coeffs(values: Iterable[float], what: str) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    if not out:
        out = (0.0,)
    if not all(math.isfinite(v) for v in out):
        raise ValueError(f"{what} coefficients must be finite, got {out}")
    return out


def _trim(coeffs: tuple[float, ...]) -> tuple[float, ...]:
    last = len(coeffs)
    while last > 1 and abs(coeffs[last - 1]) < _TRIM_FLOOR:
        last -= 1
    return coeffs[:last]


@dataclass(frozen=True)
class ContinuousRational:
    """Ratio of polynomials in s, ascending coefficients."""

    num: tuple[float, ...]
    den: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        num = _trim(_coeffs(self.num, "numerator"))
        den = _trim(_coeffs(self.den, "denominator"))
        if all(c == 0.0 for c in den):
            raise ValueError("denominator must be a nonzero polynomial")
        # monic in the highest power of s
        lead = den[-1]
        if lead != 1.0:
            num = tuple(c / lead for c in num)
            den = tuple(c / lead for c in den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def constant(cls, k: float) -> "ContinuousRational":
        return cls((float(k),), (1.0,))

    @property
    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.num)

    def __call__(self, s: complex | np.ndarray) -> complex | np.ndarray:
        return npoly.polyval(s, self.num) / npoly.polyval(s, self.den)

    def __add__(self, other: "ContinuousRational | Real") -> "ContinuousRational":
        other = _as_rational(other)
        if self.den == other.den:
            # shared denominator: add numerators directly, or repeated sums
            # manufacture removable common factors (e.g. s/s at the origin)
            return ContinuousRational(tuple(npoly.polyadd(self.num, other.num)), self.den)
        num = npoly.polyadd(
            npoly.polymul(self.num, other.den), npoly.polymul(other.num, self.den)
        )
        return ContinuousRational(tuple(num), tuple(npoly.polymul(self.den, other.den)))

    __radd__ = __add__

    def __sub__(self, other: "ContinuousRational | Real") -> "ContinuousRational":
        return self + (-1.0) * _as_rational(other)

    def __rsub__(self, other: "ContinuousRational | Real") -> "ContinuousRational":
        return _as_rational(other) + (-1.0) * self

    def __mul__(self, other: "ContinuousRational | Real") -> "ContinuousRational":
        other = _as_rational(other)
        return ContinuousRational(
            tuple(npoly.polymul(self.num, other.num)),
            tuple(npoly.polymul(self.den, other.den)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other: "ContinuousRational | Real") -> "ContinuousRational":
        other = _as_rational(other)
        if other.is_zero:
            raise ZeroDivisionError("division by the zero rational")
        return ContinuousRational(
            tuple(npoly.polymul(self.num, other.den)),
            tuple(npoly.polymul(self.den, other.num)),
        )

    def __rtruediv__(self, other: "ContinuousRational | Real") -> "ContinuousRational":
        return _as_rational(other) / self

    def poles(self) -> np.ndarray:
        if len(self.den) == 1:
            return np.empty(0, dtype=complex)
        return np.roots(self.den[::-1])


def _as_rational(v) -> ContinuousRational:
    if isinstance(v, ContinuousRational):
        return v
    if isinstance(v, Real):
        return ContinuousRational.constant(float(v))
    raise TypeError(f"cannot coerce {type(v).__name__} to ContinuousRational")


R_ZERO = ContinuousRational.constant(0.0)
R_ONE = ContinuousRational.constant(1.0)

_STABILITY_MARGIN = 1e-12


@dataclass(frozen=True)
class RationalFilter:
    """Stable discrete-time rational filter in powers of z^-1.

    Stability (all denominator roots strictly inside the unit circle) is
    verified at construction by a root solve.
    """

    num: tuple[float, ...]
    den: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        num = _trim(_coeffs(self.num, "numerator"))
        den = _trim(_coeffs(self.den, "denominator"))
        if den[0] == 0.0:
            raise ValueError("denominator must have a nonzero leading (z^0) term")
        if den[0] != 1.0:
            num = tuple(c / den[0] for c in num)
            den = tuple(c / den[0] for c in den)
        if len(den) > 1:
            # den ascending in z^-1 == descending in z, so np.roots gives z poles
            radius = np.abs(np.roots(den)).max()
            if radius >= 1.0 - _STABILITY_MARGIN:
                raise ValueError(
                    f"unstable filter: pole radius {radius:.15g} not inside the unit circle"
                )
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def constant(cls, k: float) -> "RationalFilter":
        return cls((float(k),), (1.0,))

    @classmethod
    def identity(cls) -> "RationalFilter":
        return cls((1.0,), (1.0,))

    def poles(self) -> np.ndarray:
        if len(self.den) == 1:
            return np.empty(0, dtype=complex)
        return np.roots(self.den)

    def ba(self) -> tuple[np.ndarray, np.ndarray]:
        """(b, a) arrays for scipy.signal.lfilter."""
        return np.asarray(self.num, dtype=float), np.asarray(self.den, dtype=float)

    def response(self, omega: float | np.ndarray) -> complex | np.ndarray:
        return frequency_response(self, omega)

    def __mul__(self, other: "RationalFilter | Real") -> "RationalFilter":
        if isinstance(other, Real):
            return RationalFilter(tuple(float(other) * np.asarray(self.num)), self.den)
        return RationalFilter(
            tuple(npoly.polymul(self.num, other.num)),
            tuple(npoly.polymul(self.den, other.den)),
        )

    __rmul__ = __mul__


def frequency_response(f: RationalFilter, omega: float | np.ndarray) -> complex | np.ndarray:
    """Evaluate ``f`` on the unit circle at ``omega`` radians/sample."""
    u = np.exp(-1j * np.asarray(omega, dtype=float))
    den = npoly.polyval(u, f.den)
    if np.any(np.abs(den) < 1e-12):
        raise NumericalSingularity("denominator vanishes on the unit circle")
    out = npoly.polyval(u, f.num) / den
    return out if out.ndim else complex(out)


def bilinear(
    f: ContinuousRational, fs_hz: float, prewarp_hz: float | None = None
) -> RationalFilter:
    """Map an s-domain rational onto z^-1 via s = c (1 - z^-1) / (1 + z^-1).

    ``c`` is ``2 fs`` or, when ``prewarp_hz`` is given, chosen so the
    continuous response at that frequency is reproduced exactly on the
    discrete grid. Raises ``SingularMapping`` when ``f`` has a pole at
    s = c (the point the transform sends to z = infinity).
    """
    fs = float(fs_hz)
    if fs <= 0:
        raise ValueError("fs_hz must be positive")
    if prewarp_hz is None:
        c = 2.0 * fs
    else:
        wp = 2.0 * math.pi * float(prewarp_hz)
        if not 0.0 < wp / (2.0 * fs) < math.pi / 2.0:
            raise ValueError("prewarp frequency must lie in (0, Nyquist)")
        c = wp / math.tan(wp / (2.0 * fs))

    order = max(len(f.num), len(f.den)) - 1
    plus = (1.0, 1.0)  # 1 + z^-1
    minus = (1.0, -1.0)  # 1 - z^-1

    def substitute(coeffs: tuple[float, ...]) -> np.ndarray:
        # sum_k a_k c^k (1 - u)^k (1 + u)^(order - k), u = z^-1
        acc = np.zeros(order + 1)
        for k, a in enumerate(coeffs):
            if a == 0.0:
                continue
            term = npoly.polymul(npoly.polypow(minus, k), npoly.polypow(plus, order - k))
            acc = npoly.polyadd(acc, a * (c**k) * term)
        return acc

    num_d = substitute(f.num)
    den_d = substitute(f.den)
    scale = np.abs(den_d).max()
    if scale == 0.0 or abs(den_d[0]) < 1e-12 * scale:
        raise SingularMapping(f"continuous pole at the mapping point s = {c:.6g}")
    # an unstable continuous input surfaces as RationalFilter's stability ValueError
    return RationalFilter(tuple(num_d), tuple(den_d))
