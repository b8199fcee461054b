"""Closed-form moments of Tsallis and von Neumann entanglement entropy.

The Laguerre-ensemble moments of the induced entropy L = sum(theta_i**q)
are finite hypergeometric-type sums; they are converted to fixed-trace
moments of T through gamma ratios of the trace distribution.  The q -> 1
limit is the von Neumann entropy, which has its own digamma/trigamma
formulas and a second route built from log-moments of the trace.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .kernel import Dims, schrodinger_A_exact
from .specfun import (
    CANCELLATION_LIMIT,
    LogScaled,
    digamma,
    hyp3f2_terminating,
    hyp3f2_terminating_rational,
    is_integer,
    log_abs_gamma,
    log_gamma_ratio,
    log_gamma_second_difference,
    log_rgamma,
    logsum,
    trigamma,
)

__all__ = [
    "EntropyOrder",
    "MomentReport",
    "NearUnitOrderError",
    "induced_L_mean",
    "induced_I1",
    "induced_I2",
    "induced_L_second",
    "block_A",
    "ell",
    "convert_moment",
    "tsallis_variance",
    "exact_moments",
    "special_q2",
    "special_small_m",
    "vn_mean",
    "vn_variance",
    "vn_appendix_terms",
    "vn_variance_via_appendix",
    "vn_report",
    "q1_limit_check",
    "max_entropy",
    "moment_report",
]

NEAR_ONE = 1e-3
EXACT_SIZE_LIMIT = 200  # mn + 2q


class NearUnitOrderError(ValueError):
    """The direct Tsallis conversion is ill-conditioned this close to q = 1."""


@dataclass(frozen=True)
class EntropyOrder:
    q: float

    def __post_init__(self):
        if not math.isfinite(self.q):
            raise ValueError("q must be finite")
        if not self.q > -1:
            raise ValueError(f"q must exceed -1, got q={self.q!r}")
        if self.q == 0:
            raise ValueError("q = 0 is excluded")

    @property
    def is_von_neumann(self) -> bool:
        return self.q == 1


@dataclass
class MomentReport:
    dims: Dims
    q: float
    e_L: LogScaled
    e_L2: LogScaled
    e_T: float
    e_T2: float
    var_T: float
    method: str
    cancellation_flags: list[str] = field(default_factory=list)
    exact: dict[str, Fraction] | None = None


def _order(q: float, *, second: bool) -> float:
    q = EntropyOrder(float(q)).q
    if second and not 2 * q > -1:
        raise ValueError(f"the second moment needs q > -0.5 (2q > -1), got q={q!r}")
    return q


def _range_flags(q: float) -> list[str]:
    return ["q<0: outside the demonstrated parameter range"] if q < 0 else []


def _hyp(a1, a2, a3, b1, b2, flags: list[str] | None) -> float:
    """Float 3F2 with an exact-rational retry when too many digits cancel."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = hyp3f2_terminating(a1, a2, a3, b1, b2)
    if res.cancellation <= CANCELLATION_LIMIT:
        return res.value
    # every float is a rational, so the exact backend applies to any input
    exact = hyp3f2_terminating_rational(*(Fraction(v) for v in (a1, a2, a3, b1, b2)))
    msg = f"3F2 lost {res.cancellation:.1f} digits; exact rational sum used"
    warnings.warn(msg, RuntimeWarning, stacklevel=3)
    if flags is not None:
        flags.append(msg)
    return float(exact)


# --------------------------------------------------------------------------
# Laguerre-ensemble moments
# --------------------------------------------------------------------------

def _power_moment(dims: Dims, p: float, flags: list[str] | None) -> LogScaled:
    """Integral of x^p K(x, x): m Γ(n+p)/(n-1)! 3F2(1-m, -p, 1-p; 1-n-p, 2; 1)."""
    m, n = dims.m, dims.n
    value = _hyp(1 - m, -p, 1 - p, 1 - n - p, 2, flags)
    return LogScaled(1, math.log(m) + log_gamma_ratio(n, p)) * LogScaled.from_float(value)


def induced_L_mean(dims: Dims, q: float, flags: list[str] | None = None) -> LogScaled:
    """E_g[L] over the Laguerre ensemble."""
    q = _order(q, second=False)
    return _power_moment(dims, q, flags)


def induced_I1(dims: Dims, q: float, flags: list[str] | None = None) -> LogScaled:
    """Integral of x^(2q) K(x, x), the diagonal part of E_g[L^2]."""
    q = _order(q, second=True)
    return _power_moment(dims, 2 * q, flags)


def block_A(i: int, j: int, dims: Dims, q: float, *, form: str = "series") -> LogScaled:
    """Integral of x^(alpha+q) e^-x L_i^(alpha) L_j^(alpha), alpha = n - m.

    ``form="series"`` sums Γ(alpha+q+k+1) / (Γ(q-i+k+1) Γ(q-j+k+1) ...) with
    reciprocal-gamma zeros, which stays well-conditioned next to the poles
    of Γ(q-i+1).  ``form="hyp"`` uses the 3F2 representation and is only
    valid away from those poles.
    """
    q = _order(q, second=False)
    m = dims.m
    if not (0 <= i < m and 0 <= j < m):
        raise ValueError(f"block indices must lie in [0, {m - 1}]")
    alpha = dims.alpha
    sgn = -1 if (i + j) % 2 else 1
    lg_q1 = math.lgamma(q + 1)
    if form == "hyp":
        gi, gj = q - i + 1, q - j + 1
        if (gi <= 0 and is_integer(gi)) or (gj <= 0 and is_integer(gj)):
            raise ValueError("3F2 form has a vanishing denominator here; use the series form")
        si, li = log_abs_gamma(gi)
        sj, lj = log_abs_gamma(gj)
        lo, hi = sorted((i, j))
        value = _hyp(-lo, -hi, alpha + q + 1, gi, gj, None)
        pref = LogScaled(sgn * si * sj, 2 * lg_q1 + math.lgamma(alpha + q + 1) - li - lj
                         - math.lgamma(i + 1) - math.lgamma(j + 1))
        return pref * LogScaled.from_float(value)
    if form != "series":
        raise ValueError(f"unknown form {form!r}")
    terms = []
    for k in range(min(i, j) + 1):
        si, li = log_rgamma(q - i + k + 1)
        sj, lj = log_rgamma(q - j + k + 1)
        if si == 0 or sj == 0:
            continue
        logmag = (math.lgamma(alpha + q + k + 1) + li + lj
                  - math.lgamma(i - k + 1) - math.lgamma(j - k + 1) - math.lgamma(k + 1))
        terms.append(LogScaled(si * sj, logmag))
    total = logsum(terms)
    return LogScaled(sgn * total.sign, 2 * lg_q1 + total.log_mag) if total.sign else total


def ell(i: int, j: int, dims: Dims, q: float) -> LogScaled:
    """The symmetric function L(i, j) of the double sum in E_g[L^2].

    Equal to A_ij sqrt(i! j! / ((alpha+i)! (alpha+j)!)) / (Γ(q+1)^2 Γ(alpha+q+1)),
    with the (-1)^(i+j) sign of A_ij dropped since only squares enter.
    """
    a = block_A(i, j, dims, q)
    if a.sign == 0:
        return a
    alpha = dims.alpha
    logmag = (a.log_mag - 2 * math.lgamma(q + 1) - math.lgamma(alpha + q + 1)
              + 0.5 * (math.lgamma(i + 1) + math.lgamma(j + 1)
                       - math.lgamma(alpha + i + 1) - math.lgamma(alpha + j + 1)))
    return LogScaled(a.sign * (-1 if (i + j) % 2 else 1), logmag)


def induced_I2(dims: Dims, q: float) -> LogScaled:
    """Double integral of (x y)^q K(x, y)^2 as the weighted sum of A_ij^2.

    Diagonal terms are added once and off-diagonal terms twice (j > i).
    """
    q = _order(q, second=False)
    alpha = dims.alpha
    terms = []
    for j in range(dims.m):
        for i in range(j + 1):
            a = block_A(i, j, dims, q)
            if a.sign == 0:
                continue
            logmag = (2 * a.log_mag + math.lgamma(i + 1) + math.lgamma(j + 1)
                      - math.lgamma(alpha + i + 1) - math.lgamma(alpha + j + 1))
            if i != j:
                logmag += math.log(2.0)
            terms.append(LogScaled(1, logmag))
    return logsum(terms)


def induced_L_second(dims: Dims, q: float, flags: list[str] | None = None) -> LogScaled:
    """E_g[L^2] = E_g[L]^2 + I1 - I2."""
    q = _order(q, second=True)
    el = induced_L_mean(dims, q, flags)
    return logsum([el * el, induced_I1(dims, q, flags), -induced_I2(dims, q)])


# --------------------------------------------------------------------------
# fixed-trace conversion
# --------------------------------------------------------------------------

def convert_moment(k: int, dims: Dims, q: float, laguerre_moments: Sequence[LogScaled]) -> float:
    """E_f[T^k] from E_g[L^i], i = 0..k.

    ``laguerre_moments[0]`` must be one.  The (q-1)^k division comes last.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if len(laguerre_moments) != k + 1:
        raise ValueError(f"need {k + 1} Laguerre moments, got {len(laguerre_moments)}")
    if q == 1:
        raise NearUnitOrderError("q = 1 is the von Neumann case; use vn_mean / vn_variance")
    lm0 = laguerre_moments[0]
    if not (isinstance(lm0, LogScaled) and lm0.isclose(LogScaled(1, 0.0), 1e-15)) and lm0 != 1:
        raise ValueError("the zeroth Laguerre moment must be 1")
    x = dims.mn
    terms = [1.0]
    for i in range(1, k + 1):
        mom = laguerre_moments[i]
        if not isinstance(mom, LogScaled):
            mom = LogScaled.from_float(float(mom))
        if mom.sign == 0:
            continue
        sign = (-1) ** i * mom.sign
        terms.append(sign * math.comb(k, i) * math.exp(mom.log_mag - log_gamma_ratio(x, q * i)))
    return math.fsum(terms) / (q - 1) ** k


def _assemble(dims: Dims, q: float, el: LogScaled, i1: LogScaled, i2: LogScaled):
    """(e_T, var_T) with the O(1) parts of E_f[T^2] and E_f[T]^2 cancelled analytically.

    var = E_L^2 Γ(mn)/Γ(mn+2q) ((I1 - I2)/E_L^2 - (ρ - 1)) / (q-1)^2 with
    ρ = Γ(mn) Γ(mn+2q) / Γ(mn+q)^2.
    """
    x = dims.mn
    e_t = -math.expm1(el.log_mag - log_gamma_ratio(x, q)) / (q - 1)
    sq = el * el
    ratio = float(i1 / sq) - float(i2 / sq)
    bracket = ratio - math.expm1(log_gamma_second_difference(x, q))
    var = math.exp(sq.log_mag - log_gamma_ratio(x, 2 * q)) * bracket / (q - 1) ** 2
    return e_t, var


def _tsallis_float(dims: Dims, q: float, *, allow_near_one: bool = False) -> MomentReport:
    q = _order(q, second=True)
    if q == 1 or (abs(q - 1) < NEAR_ONE and not allow_near_one):
        raise NearUnitOrderError(
            f"|q - 1| = {abs(q - 1):.3g} < {NEAR_ONE:g}: the direct conversion loses too many "
            "digits; use the von Neumann branch (q = 1) or q1_limit_check")
    flags = _range_flags(q)
    el = induced_L_mean(dims, q, flags)
    i1 = induced_I1(dims, q, flags)
    i2 = induced_I2(dims, q)
    e_l2 = logsum([el * el, i1, -i2])
    if dims.m == 1:
        # one eigenvalue, always 1: T vanishes identically
        flags.append("m=1: separable, entropy is identically zero")
        return MomentReport(dims, q, el, e_l2, 0.0, 0.0, 0.0, "general", flags)
    e_t, var = _assemble(dims, q, el, i1, i2)
    return MomentReport(dims, q, el, e_l2, e_t, var + e_t * e_t, var, "general", flags)


def tsallis_variance(dims: Dims, q: float, *, method: str = "general", mode: str = "float",
                     allow_near_one: bool = False) -> MomentReport:
    """Mean, second moment and variance of the Tsallis entropy.

    ``method`` picks the route for the Laguerre moments: ``general``,
    ``quadratic`` (q = 2 only) or ``small_m`` (m in {2, 3}).  ``mode="exact"``
    runs the general route in rational arithmetic (integer q only) and
    attaches the exact values to the report.
    """
    q = _order(q, second=True)
    if method == "quadratic":
        if q != 2:
            raise ValueError("the quadratic route needs q = 2")
        return special_q2(dims)
    if mode == "exact":
        if method != "general":
            raise ValueError("exact mode runs the general route only")
        return _tsallis_exact(dims, q)
    if mode != "float":
        raise ValueError(f"unknown mode {mode!r}")
    if method == "general":
        return _tsallis_float(dims, q, allow_near_one=allow_near_one)
    if method == "small_m":
        if abs(q - 1) < NEAR_ONE and not (allow_near_one and q != 1):
            raise NearUnitOrderError("use the von Neumann branch near q = 1")
        el, el2 = special_small_m(dims, q)
        e_t = convert_moment(1, dims, q, [LogScaled(1, 0.0), el])
        e_t2 = convert_moment(2, dims, q, [LogScaled(1, 0.0), el, el2])
        return MomentReport(dims, q, el, el2, e_t, e_t2, e_t2 - e_t * e_t, "small_m",
                            _range_flags(q))
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# exact rational route (integer q)
# --------------------------------------------------------------------------

def _rising(x: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= x + j
    return out


def exact_moments(dims: Dims, q: int) -> dict[str, Fraction]:
    """E_g[L], E_g[L^2], E_f[T], E_f[T^2], V_f[T] as exact rationals."""
    if not (q == int(q) and q >= 2):
        raise ValueError(f"exact moments need an integer q >= 2, got {q!r}")
    q = int(q)
    m, n, alpha, x = dims.m, dims.n, dims.alpha, dims.mn

    def power_moment(p: int) -> Fraction:
        f = hyp3f2_terminating_rational(1 - m, -p, 1 - p, 1 - n - p, 2)
        return m * _rising(n, p) * f

    el = power_moment(q)
    i1 = power_moment(2 * q)
    fact = math.factorial
    i2 = Fraction(0)
    for j in range(m):
        for i in range(j + 1):
            a = schrodinger_A_exact(i, j, alpha, alpha, alpha + q)
            w = Fraction(fact(i) * fact(j), fact(alpha + i) * fact(alpha + j))
            i2 += (1 if i == j else 2) * w * a * a
    el2 = el * el + i1 - i2
    a = el / _rising(x, q)
    b = el2 / _rising(x, 2 * q)
    e_t = (1 - a) / (q - 1)
    e_t2 = (1 - 2 * a + b) / (q - 1) ** 2
    return {"e_L": el, "e_L2": el2, "e_T": e_t, "e_T2": e_t2, "var_T": e_t2 - e_t * e_t}


def _logscaled(fr: Fraction) -> LogScaled:
    if fr == 0:
        return LogScaled(0, 0.0)
    mag = abs(fr)
    return LogScaled(1 if fr > 0 else -1,
                     math.log(mag.numerator) - math.log(mag.denominator))


def _tsallis_exact(dims: Dims, q: float) -> MomentReport:
    ex = exact_moments(dims, q)
    return MomentReport(dims, float(q), _logscaled(ex["e_L"]), _logscaled(ex["e_L2"]),
                        float(ex["e_T"]), float(ex["e_T2"]), float(ex["var_T"]), "general",
                        ["exact rational arithmetic"], ex)


def special_q2(dims: Dims) -> MomentReport:
    """Quadratic entropy q = 2: every moment is a rational function of m, n."""
    m, n = dims.m, dims.n
    mn = m * n
    el = Fraction(mn * (m + n))
    el2 = Fraction(mn * (m * n ** 3 + 2 * m * m * n * n + 4 * n * n + m ** 3 * n
                         + 10 * mn + 4 * m * m + 2))
    e_t = Fraction(mn - m - n + 1, mn + 1)
    e_t2 = Fraction((m - 1) * (n - 1) * (m * m * n * n - m * n * n - m * m * n + 5 * mn
                                         - 4 * n - 4 * m + 8),
                    (mn + 1) * (mn + 2) * (mn + 3))
    var = Fraction(2 * (m * m - 1) * (n * n - 1), (mn + 1) ** 2 * (mn + 2) * (mn + 3))
    ex = {"e_L": el, "e_L2": el2, "e_T": e_t, "e_T2": e_t2, "var_T": var}
    return MomentReport(dims, 2.0, _logscaled(el), _logscaled(el2), float(e_t), float(e_t2),
                        float(var), "quadratic", [], ex)


def special_small_m(dims: Dims, q: float) -> tuple[LogScaled, LogScaled]:
    """(E_g[L], E_g[L^2]) from the explicit forms for m = 2 and m = 3."""
    q = _order(q, second=True)
    m, n = dims.m, dims.n
    lg = math.lgamma
    if m == 2:
        el = LogScaled.from_float(q * q + q + 2 * n - 2) * LogScaled(1, lg(q + n - 1) - lg(n))
        first = LogScaled(1, lg(q + n - 1) + lg(q + n) - lg(n - 1))
        second = LogScaled.from_float(2 * q * q + q + n - 1) * LogScaled(1, lg(2 * q + n - 1))
        el2 = LogScaled(1, math.log(2.0) - lg(n)) * logsum([first, second])
        return el, el2
    if m == 3:
        poly1 = 6 * n * (q * q + q - 3) + (q - 2) * (q - 1) * (q + 2) * (q + 3) + 6 * n * n
        el = LogScaled.from_float(poly1 / 2) * LogScaled(1, lg(q + n - 2) - lg(n))
        poly2 = (6 * n * (q * q + q - 3) + q ** 4 + 4 * q ** 3 - 7 * q * q - 10 * q + 12
                 + 6 * n * n)
        poly3 = (3 * n * (4 * q * q + 2 * q - 3) + 8 * q ** 4 + 8 * q ** 3 - 14 * q * q - 8 * q
                 + 6 + 3 * n * n)
        first = LogScaled.from_float(poly2) * LogScaled(
            1, lg(q + n - 2) + lg(q + n - 1) - lg(n) - lg(n - 1))
        second = LogScaled.from_float(poly3) * LogScaled(1, lg(2 * q + n - 2) - lg(n))
        return el, logsum([first, second])
    raise ValueError(f"explicit forms exist for m = 2 and m = 3 only, got m={m}")


# --------------------------------------------------------------------------
# von Neumann entropy
# --------------------------------------------------------------------------

def vn_mean(dims: Dims) -> float:
    m, n = dims.m, dims.n
    if m == 1:
        return 0.0  # pure state; the digamma form cancels to rounding level
    return digamma(m * n + 1) - digamma(n) - (m + 1) / (2 * n)


def vn_variance(dims: Dims) -> float:
    m, n = dims.m, dims.n
    if m == 1:
        return 0.0
    mn = m * n
    return (-trigamma(mn + 1) + (m + n) / (mn + 1) * trigamma(n)
            - (m + 1) * (m + 2 * n + 1) / (4 * n * n * (mn + 1)))


def vn_appendix_terms(dims: Dims) -> dict[str, float]:
    """Ingredients of E_f[S^2] obtained by differentiating at q = 1.

    The second log-moment E_g[R_2] is never formed: it enters E_f[S^2]
    directly and again through E_g[r R_2], and the two cancel.  Entries
    ending in ``_rest`` are the quantities with that term removed.
    """
    m, n = dims.m, dims.n
    mn = m * n
    p0n, p1n = digamma(n), trigamma(n)
    p0a, p1a = digamma(mn + 1), trigamma(mn + 1)
    p0b, p1b = digamma(mn + 2), trigamma(mn + 2)
    e_s = vn_mean(dims)
    e_r = mn
    e_r2 = mn * (mn + 1)
    # E_r[r^k] = Γ(mn+k)/Γ(mn); log-derivatives bring in digamma/trigamma
    e_r2_ln = math.exp(log_gamma_ratio(mn, 2)) * p0b
    e_r2_ln2 = e_r2 * (p1b + p0b * p0b)
    e_R = mn * p0n + 0.5 * m * (m + 1)
    e_R_sq = (mn * (m + n) * p1n + mn * (mn + 1) * p0n * p0n
              + m * (m * m * n + mn + m + 2 * n + 1) * p0n + 0.25 * m * (m + 1) * (m * m + m + 2))
    e_rR = e_r2_ln - e_r2 * e_s
    s2_rest = p1a - p0a * p0a + 2 * p0a * (p0n + (m + 1) / (2 * n))
    e_rR2_rest = e_r2_ln2 - 2 * e_r2_ln * e_s - e_r2 * s2_rest
    e_s_sq = (math.fsum([2 * e_R * p0a, e_r * (p1a - p0a * p0a)]) / mn
              + math.fsum([e_R_sq, e_rR2_rest, -4 * e_rR * p0b,
                           -2 * e_r2 * (p1b - p0b * p0b)]) / (mn * (mn + 1)))
    return {
        "E_S": e_s,
        "E_r": e_r,
        "E_r2": e_r2,
        "E_r2_ln_r": e_r2_ln,
        "E_r2_ln2_r": e_r2_ln2,
        "E_R": e_R,
        "E_R_sq": e_R_sq,
        "E_rR": e_rR,
        "E_rR_closed": e_r2 * (p0n + 1 / (mn + 1) + (m + 1) / (2 * n)),
        "E_S2_rest": s2_rest,
        "E_rR2_rest": e_rR2_rest,
        "E_S_sq": e_s_sq,
    }


def vn_variance_via_appendix(dims: Dims) -> float:
    """V_f[S] = E_f[S^2] - E_f[S]^2 with E_f[S^2] from the q -> 1 limit of E_f[T^2]."""
    if dims.m == 1:
        return 0.0
    t = vn_appendix_terms(dims)
    return t["E_S_sq"] - t["E_S"] ** 2


def vn_report(dims: Dims) -> MomentReport:
    mn = dims.mn
    mean, var = vn_mean(dims), vn_variance(dims)
    return MomentReport(dims, 1.0, LogScaled(1, math.log(mn)), LogScaled(1, math.log(mn * (mn + 1))),
                        mean, var + mean * mean, var, "von_neumann", [])


def q1_limit_check(dims: Dims, eps: float = 1e-3) -> float:
    """Richardson-extrapolated q -> 1 limit of the Tsallis variance.

    Symmetric pairs q = 1 +- h cancel odd powers of h; combining h = eps
    and h = eps/2 removes the h^2 term.
    """
    if not 0 < eps <= 1e-2:
        raise ValueError("eps must lie in (0, 1e-2]")

    def sym(h: float) -> float:
        lo = _tsallis_float(dims, 1 - h, allow_near_one=True).var_T
        hi = _tsallis_float(dims, 1 + h, allow_near_one=True).var_T
        return 0.5 * (lo + hi)

    return (4 * sym(eps / 2) - sym(eps)) / 3


def max_entropy(m: int, q: float) -> float:
    """Tsallis entropy of the maximally entangled state (all lambda_i = 1/m)."""
    if m < 1:
        raise ValueError("m must be positive")
    if q in (0, 1):
        raise ValueError("q must differ from 0 and 1")
    # (m^(q-1) - 1) / ((q-1) m^(q-1)) = -expm1((1-q) ln m) / (q-1)
    return -math.expm1((1 - q) * math.log(m)) / (q - 1)


# --------------------------------------------------------------------------
# front door
# --------------------------------------------------------------------------

def moment_report(dims: Dims, q: float, mode: str = "auto") -> MomentReport:
    """Pick a route: von Neumann at q = 1, rational arithmetic where it is cheap.

    In ``auto`` mode integer q >= 2 with mn + 2q <= 200 is evaluated exactly
    and the float route is checked against it; q = 2 uses the quadratic
    closed form.
    """
    q = _order(q, second=True)
    if mode not in ("auto", "float", "exact"):
        raise ValueError(f"unknown mode {mode!r}")
    if q == 1:
        if mode == "exact":
            raise ValueError("exact mode needs an integer q >= 2 (q = 1 moments are irrational)")
        return vn_report(dims)
    if mode == "float":
        return tsallis_variance(dims, q)
    integral = q == int(q) and q >= 2
    if mode == "exact":
        if not integral:
            raise ValueError(f"exact mode needs an integer q >= 2, got q={q!r}")
        return tsallis_variance(dims, q, mode="exact")
    if q == 2:
        rep = special_q2(dims)
    elif integral and dims.mn + 2 * q <= EXACT_SIZE_LIMIT:
        rep = _tsallis_exact(dims, q)
        rep.cancellation_flags = []
    else:
        return tsallis_variance(dims, q)
    if dims.m > 1:
        fl = tsallis_variance(dims, q)
        err = abs(fl.var_T - rep.var_T) / abs(rep.var_T)
        if err > 1e-10:
            rep.cancellation_flags.append(f"float route differs by {err:.2e} (relative)")
    rep.exact = None
    return rep
