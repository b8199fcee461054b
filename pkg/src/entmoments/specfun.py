"""Gamma-family functions and terminating hypergeometric sums.

Everything here works on plain Python floats (or ``fractions.Fraction`` for
the exact backend).  Quantities whose magnitude can leave the double range,
such as ratios of large gamma functions, are carried as :class:`LogScaled`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

__all__ = [
    "LogScaled",
    "RationalScalar",
    "HypSum",
    "CancellationWarning",
    "ln_gamma",
    "log_abs_gamma",
    "log_rgamma",
    "rgamma",
    "digamma",
    "trigamma",
    "pochhammer",
    "gen_binomial",
    "log_gamma_ratio",
    "log_gamma_second_difference",
    "hyp3f2_terminating",
    "hyp3f2_terminating_rational",
    "is_integer",
    "logsum",
]

# exact rationals: lowest terms, positive denominator
RationalScalar = Fraction

INTEGER_TOL = 1e-12
CANCELLATION_LIMIT = 10.0  # decimal digits

_LN_MAX = math.log(1.7976931348623157e308)


class CancellationWarning(RuntimeWarning):
    """An alternating sum lost more digits than the float backend can spare."""


def is_integer(x, tol: float = INTEGER_TOL) -> bool:
    return abs(x - round(x)) <= tol


@dataclass(frozen=True)
class LogScaled:
    """Signed real stored as ``sign * exp(log_mag)``.

    ``sign == 0`` means exactly zero and ``log_mag`` is then ignored.
    A value built by :meth:`from_float` remembers the float it came from, so
    converting it straight back is exact; arithmetic drops the memory.
    """

    sign: int
    log_mag: float
    _origin: float | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign!r}")

    @classmethod
    def from_float(cls, x: float) -> "LogScaled":
        if x == 0:
            return ZERO
        if math.isnan(x):
            raise ValueError("cannot represent NaN")
        x = float(x)
        return cls(1 if x > 0 else -1, math.log(abs(x)), x)

    @classmethod
    def exp(cls, log_mag: float, sign: int = 1) -> "LogScaled":
        return cls(sign, log_mag) if sign else ZERO

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        if self._origin is not None:
            return self._origin
        if self.log_mag > _LN_MAX:
            return math.copysign(math.inf, self.sign)
        return self.sign * math.exp(self.log_mag)

    def to_float(self) -> float:
        return float(self)

    def __neg__(self) -> "LogScaled":
        origin = None if self._origin is None else -self._origin
        return LogScaled(-self.sign, self.log_mag, origin)

    def __abs__(self) -> "LogScaled":
        return LogScaled(abs(self.sign), self.log_mag)

    def __mul__(self, other) -> "LogScaled":
        other = _as_logscaled(other)
        if self.sign == 0 or other.sign == 0:
            return ZERO
        return LogScaled(self.sign * other.sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogScaled":
        other = _as_logscaled(other)
        if other.sign == 0:
            raise ZeroDivisionError("LogScaled division by zero")
        if self.sign == 0:
            return ZERO
        return LogScaled(self.sign * other.sign, self.log_mag - other.log_mag)

    def __rtruediv__(self, other) -> "LogScaled":
        return _as_logscaled(other) / self

    def __pow__(self, k: int) -> "LogScaled":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        if k == 0:
            return ONE
        if self.sign == 0:
            return ZERO
        return LogScaled(self.sign ** k, self.log_mag * k)

    def __add__(self, other) -> "LogScaled":
        return logsum([self, _as_logscaled(other)])

    __radd__ = __add__

    def __sub__(self, other) -> "LogScaled":
        return logsum([self, -_as_logscaled(other)])

    def __rsub__(self, other) -> "LogScaled":
        return logsum([_as_logscaled(other), -self])

    def sqrt(self) -> "LogScaled":
        if self.sign < 0:
            raise ValueError("square root of a negative value")
        return self if self.sign == 0 else LogScaled(1, 0.5 * self.log_mag)

    def isclose(self, other, rel: float) -> bool:
        other = _as_logscaled(other)
        if self.sign == 0 or other.sign == 0:
            return self.sign == other.sign
        return self.sign == other.sign and abs(math.expm1(self.log_mag - other.log_mag)) <= rel


ZERO = LogScaled(0, 0.0)
ONE = LogScaled(1, 0.0)


def _as_logscaled(x) -> LogScaled:
    if isinstance(x, LogScaled):
        return x
    return LogScaled.from_float(float(x))


def logsum(terms: Iterable[LogScaled]) -> LogScaled:
    """Correctly rounded sum of log-scaled terms (rescaled by the largest)."""
    terms = [t for t in terms if t.sign != 0]
    if not terms:
        return ZERO
    top = max(t.log_mag for t in terms)
    total = math.fsum(t.sign * math.exp(t.log_mag - top) for t in terms)
    if total == 0.0:
        return ZERO
    return LogScaled(1 if total > 0 else -1, top + math.log(abs(total)))


# --------------------------------------------------------------------------
# gamma family
# --------------------------------------------------------------------------

def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0:
        raise ValueError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def log_abs_gamma(x: float) -> tuple[int, float]:
    """``(sign of Γ(x), ln|Γ(x)|)``; raises at the poles."""
    if x > 0:
        return 1, math.lgamma(x)
    if is_integer(x):
        raise ValueError(f"gamma has a pole at {x!r}")
    # Γ(x) < 0 on (-1, 0), (-3, -2), ...
    sign = -1 if math.floor(x) % 2 else 1
    return sign, math.lgamma(x)


def log_rgamma(x: float) -> tuple[int, float]:
    """``(sign, ln|1/Γ(x)|)`` with sign 0 at the non-positive integers."""
    if x <= 0 and is_integer(x):
        return 0, 0.0
    sign, lg = log_abs_gamma(x)
    return sign, -lg


def rgamma(x: float) -> float:
    """Reciprocal gamma function, exactly zero at 0, -1, -2, ..."""
    if x <= 0 and is_integer(x):
        return 0.0
    if -170.0 < x < 170.0:
        return 1.0 / math.gamma(x)
    return float(LogScaled(*log_rgamma(x)))


# Bernoulli numbers B_2k for the asymptotic series
_B2K = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)
_ASYMPTOTIC_FROM = 12.0


def digamma(x: float) -> float:
    """psi_0(x) for x > 0 (upward recurrence, then the asymptotic series)."""
    if not x > 0:
        raise ValueError(f"digamma requires x > 0, got {x!r}")
    shift = []
    while x < _ASYMPTOTIC_FROM:
        shift.append(1.0 / x)
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2
    for k, b in enumerate(_B2K, start=1):
        series += b / (2 * k) * p
        p *= inv2
    return math.log(x) - 0.5 / x - series - math.fsum(shift)


def trigamma(x: float) -> float:
    """psi_1(x) for x > 0."""
    if not x > 0:
        raise ValueError(f"trigamma requires x > 0, got {x!r}")
    shift = []
    while x < _ASYMPTOTIC_FROM:
        shift.append(1.0 / (x * x))
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    p = inv2 * inv
    for b in _B2K:
        series += b * p
        p *= inv2
    return math.fsum(shift) + inv + 0.5 * inv2 + series


def pochhammer(a, k: int):
    """Rising factorial a(a+1)...(a+k-1); works for floats and Fractions."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = 1 if isinstance(a, (int, Fraction)) else 1.0
    for j in range(k):
        f = a + j
        if f == 0:
            return f * 0
        out *= f
    return out


def gen_binomial(a, k: int):
    """Binomial coefficient with real top argument, by running product."""
    if k < 0:
        return Fraction(0) if isinstance(a, (int, Fraction)) else 0.0
    out = Fraction(1) if isinstance(a, (int, Fraction)) else 1.0
    for j in range(k):
        f = a - j
        if f == 0:
            return out * 0
        out = out * f / (j + 1)
    return out


# --------------------------------------------------------------------------
# accurate gamma ratios
# --------------------------------------------------------------------------

_STIRLING_FROM = 20.0


def _shift_for(*args: float) -> int:
    low = min(args)
    return max(0, math.ceil(_STIRLING_FROM - low))


def log_gamma_ratio(x: float, a: float) -> float:
    """ln Γ(x+a) - ln Γ(x) without forming either gamma.

    Integer shifts use an exact-as-possible product; other shifts go through
    the Stirling series after lifting both arguments above 20.
    """
    if not (x > 0 and x + a > 0):
        raise ValueError(f"log_gamma_ratio needs x > 0 and x + a > 0, got {x!r}, {a!r}")
    if a == 0:
        return 0.0
    if a == round(a) and abs(a) <= 512:
        k = int(round(a))
        mant, expo = 1.0, 0
        lo = x if k > 0 else x + k
        for j in range(abs(k)):
            mant *= lo + j
            mant, e = math.frexp(mant)
            expo += e
        val = math.log(mant) + expo * math.log(2.0)
        return val if k > 0 else -val
    n = _shift_for(x, x + a)
    corr = math.fsum(math.log1p(a / (x + j)) for j in range(n))
    y = x + n
    z = y + a
    head = (y - 0.5) * math.log1p(a / y) + a * math.log(z) - a
    tail = 0.0
    for k, b in enumerate(_B2K, start=1):
        e = 2 * k - 1
        tail += b / (2 * k * e) * (z ** -e - y ** -e)
    return head + tail - corr


def log_gamma_second_difference(x: float, h: float) -> float:
    """ln Γ(x+2h) - 2 ln Γ(x+h) + ln Γ(x), cancellation-free.

    This is the log of Γ(x)Γ(x+2h)/Γ(x+h)², the factor separating the
    second converted moment from the square of the first.
    """
    if not (x > 0 and x + h > 0 and x + 2 * h > 0):
        raise ValueError("all gamma arguments must be positive")
    if h == 0:
        return 0.0
    n = _shift_for(x, x + h, x + 2 * h)
    corr = []
    for j in range(n):
        u = h / (x + j)
        corr.append(math.log1p(-(u / (1.0 + u)) ** 2))
    y = x + n
    w = h / (y + h)
    head = (y - 0.5) * math.log1p(-w * w) + 2.0 * h * math.log1p(w)
    tail = 0.0
    for k, b in enumerate(_B2K, start=1):
        e = 2 * k - 1
        tail += b / (2 * k * e) * ((y + 2 * h) ** -e - 2.0 * (y + h) ** -e + y ** -e)
    return head + tail - math.fsum(corr)


# --------------------------------------------------------------------------
# terminating 3F2 at unit argument
# --------------------------------------------------------------------------

class HypSum(NamedTuple):
    value: float
    cancellation: float  # log10(max |partial sum| / |value|)


def _check_terminating(a1) -> int:
    if not (a1 <= 0 and is_integer(a1)):
        raise ValueError(f"a1 must be a non-positive integer, got {a1!r}")
    return int(round(-a1))


def _cancellation(partials: Sequence[float], value: float) -> float:
    peak = max(abs(p) for p in partials)
    if peak == 0.0:
        return 0.0
    if value == 0.0:
        return math.inf
    return max(0.0, math.log10(peak / abs(value)))


def hyp3f2_terminating(a1, a2, a3, b1, b2, *, warn: bool = True) -> HypSum:
    """Terminating 3F2(a1, a2, a3; b1, b2; 1) by the term-ratio recurrence.

    Terms are accumulated with ``math.fsum``; the partial sums are tracked so
    the caller can see how many digits the alternating series cancelled.
    """
    nterms = _check_terminating(a1)
    a1 = -nterms
    term = 1.0
    terms = [1.0]
    partials = [1.0]
    for k in range(nterms):
        den = (b1 + k) * (b2 + k)
        if den == 0 or (is_integer(b1 + k) and round(b1 + k) == 0) or (
                is_integer(b2 + k) and round(b2 + k) == 0):
            raise ZeroDivisionError(
                f"denominator Pochhammer vanishes at k={k + 1} before termination")
        term *= (a1 + k) * (a2 + k) * (a3 + k) / (den * (k + 1))
        if term == 0.0:
            break
        terms.append(term)
        partials.append(math.fsum(terms))
    value = math.fsum(terms)
    cancel = _cancellation(partials, value)
    if warn and cancel > CANCELLATION_LIMIT:
        warnings.warn(
            f"3F2 sum lost {cancel:.1f} digits to cancellation", CancellationWarning,
            stacklevel=2)
    return HypSum(value, cancel)


def hyp3f2_terminating_rational(a1, a2, a3, b1, b2) -> Fraction:
    """Exact terminating 3F2 at unit argument for rational parameters."""
    a1, a2, a3, b1, b2 = (Fraction(v) for v in (a1, a2, a3, b1, b2))
    if a1.denominator != 1:
        raise ValueError(f"a1 must be a non-positive integer, got {a1}")
    nterms = _check_terminating(a1)
    term = Fraction(1)
    total = Fraction(1)
    for k in range(nterms):
        den = (b1 + k) * (b2 + k)
        if den == 0:
            raise ZeroDivisionError(
                f"denominator Pochhammer vanishes at k={k + 1} before termination")
        term = term * (a1 + k) * (a2 + k) * (a3 + k) / (den * (k + 1))
        if term == 0:
            break
        total += term
    return total
