"""Laguerre-ensemble machinery and the quadrature oracles built on it.

The correlation kernel is evaluated through orthonormal Laguerre functions
(weight folded in per factor), which keeps every intermediate finite for
the dimensions this package targets.  The quadrature routines never touch
the hypergeometric closed forms, so they serve as an independent check on
:mod:`entmoments.moments`.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .specfun import LogScaled, gen_binomial, log_gamma_ratio, logsum

__all__ = [
    "Dims",
    "QuadratureSpec",
    "laguerre_poly",
    "laguerre_explicit",
    "orthonormal_laguerre",
    "kernel_K",
    "density_one_point",
    "schrodinger_A",
    "gauss_laguerre",
    "quad_induced_moment",
    "quad_I2",
]


@dataclass(frozen=True)
class Dims:
    """Subsystem dimensions with ``1 <= m <= n``."""

    m: int
    n: int

    def __post_init__(self):
        if not (isinstance(self.m, int) and isinstance(self.n, int)):
            raise TypeError("m and n must be integers")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got m={self.m}")
        if self.m > self.n:
            raise ValueError(f"dimensions must satisfy m <= n, got m={self.m}, n={self.n}")

    @property
    def alpha(self) -> int:
        return self.n - self.m

    @property
    def mn(self) -> int:
        return self.m * self.n


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Laguerre settings; ``weight_exponent=None`` matches the integrand."""

    node_count: int
    weight_exponent: float | None = None

    def __post_init__(self):
        if self.node_count < 1:
            raise ValueError("node_count must be positive")
        if self.weight_exponent is not None and self.weight_exponent <= -1:
            raise ValueError("weight_exponent must exceed -1")

    @classmethod
    def for_problem(cls, dims: Dims, q: float) -> "QuadratureSpec":
        return cls(dims.m + math.ceil(abs(2 * q)) + 10)


def laguerre_poly(k: int, alpha: float, x):
    """Generalized Laguerre polynomial L_k^(alpha)(x) by forward recurrence."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float) if not np.isscalar(x) else float(x)
    prev, cur = 0.0 * x, 1.0 + 0.0 * x
    for j in range(k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


def laguerre_explicit(k: int, alpha, x):
    """L_k^(alpha)(x) from the explicit binomial sum (exact for Fractions)."""
    total = 0
    fact = 1
    xp = 1
    for i in range(k + 1):
        if i:
            fact *= i
            xp = xp * x
        total += (-1) ** i * gen_binomial(alpha + k, k - i) * xp / fact
    return total


def orthonormal_laguerre(kmax: int, alpha: float, x) -> np.ndarray:
    """Rows ``sqrt(w(x)) * p_k(x)`` for k < kmax, w(x) = x^alpha e^-x.

    ``p_k`` are the Laguerre polynomials normalized to unit weighted norm.
    Returns an array of shape ``(kmax,) + x.shape``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("Laguerre functions are defined for x >= 0")
    out = np.zeros((kmax,) + x.shape)
    if kmax == 0:
        return out
    with np.errstate(divide="ignore"):
        logx = np.log(x)
    logw = (alpha * logx if alpha else 0.0) - x
    cur = np.exp(0.5 * logw - 0.5 * math.lgamma(alpha + 1.0))
    prev = np.zeros_like(cur)
    out[0] = cur
    for k in range(kmax - 1):
        nxt = ((2 * k + 1 + alpha - x) * cur - math.sqrt(k * (k + alpha)) * prev) / math.sqrt(
            (k + 1) * (k + alpha + 1))
        prev, cur = cur, nxt
        out[k + 1] = cur
    return out


def kernel_K(dims: Dims, x, y):
    """Correlation kernel K(x, y) of the Laguerre ensemble."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if np.any(xa < 0) or np.any(ya < 0):
        raise ValueError("kernel arguments must be non-negative")
    xa, ya = np.broadcast_arrays(xa, ya)
    px = orthonormal_laguerre(dims.m, dims.alpha, xa)
    py = orthonormal_laguerre(dims.m, dims.alpha, ya)
    val = np.sum(px * py, axis=0)
    return float(val) if val.ndim == 0 else val


def density_one_point(dims: Dims, x):
    """K(x, x) written with degree m-1, m-2 and m polynomials of order alpha+1.

    L_{-1} is taken as zero, so m = 1 reduces to a single square.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("density is defined for x >= 0")
    m, n = dims.m, dims.n
    a1 = dims.alpha + 1
    lm1 = laguerre_poly(m - 1, a1, xa)
    lm2 = laguerre_poly(m - 2, a1, xa) if m >= 2 else 0.0
    lm = laguerre_poly(m, a1, xa)
    bracket = lm1 * lm1 - lm2 * lm
    with np.errstate(divide="ignore"):
        logx = np.log(np.where(xa > 0, xa, 1.0))
    logpref = math.lgamma(m + 1) - math.lgamma(n) + dims.alpha * logx - xa
    val = np.exp(logpref) * bracket
    if dims.alpha > 0:
        val = np.where(xa > 0, val, 0.0)
    return float(val) if np.ndim(val) == 0 else val


def schrodinger_A(s: int, t: int, alpha, beta, q_exp) -> LogScaled:
    """The integral of x^q e^-x L_s^(alpha) L_t^(beta) over (0, inf).

    Closed form as a finite sum of generalized binomials times gamma values;
    returned log-scaled because Γ(k+q+1) outgrows doubles quickly.
    """
    if not q_exp > -1:
        raise ValueError(f"the integral converges only for q > -1, got {q_exp!r}")
    sgn = -1 if (s + t) % 2 else 1
    terms = []
    for k in range(min(s, t) + 1):
        coeff = float(gen_binomial(q_exp - alpha, s - k) * gen_binomial(q_exp - beta, t - k))
        if coeff == 0.0:
            continue
        logmag = math.log(abs(coeff)) + math.lgamma(k + q_exp + 1) - math.lgamma(k + 1)
        terms.append(LogScaled(sgn * (1 if coeff > 0 else -1), logmag))
    return logsum(terms)


def schrodinger_A_exact(s: int, t: int, alpha, beta, q_exp: int):
    """Exact rational form of :func:`schrodinger_A` for integer exponent."""
    from fractions import Fraction

    if q_exp != int(q_exp) or q_exp <= -1:
        raise ValueError("exact mode needs an integer exponent > -1")
    q_exp = int(q_exp)
    total = Fraction(0)
    for k in range(min(s, t) + 1):
        total += (gen_binomial(Fraction(q_exp - alpha), s - k)
                  * gen_binomial(Fraction(q_exp - beta), t - k)
                  * math.factorial(k + q_exp) / math.factorial(k))
    return total if (s + t) % 2 == 0 else -total


# --------------------------------------------------------------------------
# quadrature oracles
# --------------------------------------------------------------------------

@functools.lru_cache(maxsize=256)
def _golub_welsch(node_count: int, weight_exponent: float) -> tuple[np.ndarray, np.ndarray]:
    a = float(weight_exponent)
    k = np.arange(node_count, dtype=float)
    diag = 2 * k + a + 1
    off = np.sqrt(k[1:] * (k[1:] + a))
    nodes, vecs = eigh_tridiagonal(diag, off)
    probs = vecs[0] ** 2
    nodes.setflags(write=False)
    probs.setflags(write=False)
    return nodes, probs


def gauss_laguerre(node_count: int, weight_exponent: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Golub-Welsch nodes and weights for the weight x^a e^-x on (0, inf).

    The node table is cached per (node_count, a); weights sum to Γ(a+1).
    """
    nodes, probs = _golub_welsch(node_count, float(weight_exponent))
    return nodes, probs * math.exp(math.lgamma(weight_exponent + 1.0))


def _poly_kernel(dims: Dims, x: np.ndarray) -> np.ndarray:
    """sqrt(Γ(alpha+1)) p_k(x) for k < m, shape (m, len(x)).

    The constant factor is removed so large alpha does not underflow; the
    callers put it back through a gamma ratio.
    """
    alpha = dims.alpha
    out = np.zeros((dims.m,) + x.shape)
    cur = np.ones_like(x)
    prev = np.zeros_like(x)
    out[0] = cur
    for k in range(dims.m - 1):
        nxt = ((2 * k + 1 + alpha - x) * cur - math.sqrt(k * (k + alpha)) * prev) / math.sqrt(
            (k + 1) * (k + alpha + 1))
        prev, cur = cur, nxt
        out[k + 1] = cur
    return out


def _plan(dims: Dims, p: float, spec: QuadratureSpec | None):
    """Node count, weight exponent and leftover power for x^p x^alpha e^-x.

    By default the whole x^(alpha + p) factor rides in the quadrature weight,
    leaving a polynomial of degree 2(m-1) that m nodes integrate exactly.
    An explicit ``weight_exponent`` moves the remainder into the integrand.
    """
    if spec is None:
        spec = QuadratureSpec.for_problem(dims, p)
    a = dims.alpha + p if spec.weight_exponent is None else spec.weight_exponent
    # Γ(a+1)/Γ(alpha+1): weights are probabilities, polynomials unnormalized
    log_scale = log_gamma_ratio(dims.alpha + 1.0, a - dims.alpha)
    return spec.node_count, a, dims.alpha + p - a, log_scale


def quad_induced_moment(dims: Dims, p: float, spec: QuadratureSpec | None = None) -> float:
    """Integral of x^p K(x, x) over (0, inf) by Gauss-Laguerre quadrature.

    ``p = q`` gives E_g[L]; ``p = 2q`` gives the I1 piece of E_g[L^2].
    """
    if not p > -1:
        raise ValueError(f"the integral converges only for p > -1, got {p!r}")
    count, a, extra, log_scale = _plan(dims, p, spec)
    scale = math.exp(log_scale)

    def estimate(nc: int) -> float:
        x, w = _golub_welsch(nc, a)
        poly = _poly_kernel(dims, x)
        return scale * math.fsum(w * x ** extra * np.sum(poly * poly, axis=0))

    return _converged(estimate, count)


def quad_I2(dims: Dims, q: float, spec: QuadratureSpec | None = None) -> float:
    """Double integral of (x y)^q K(x, y)^2 by tensor-product quadrature."""
    if not q > -1:
        raise ValueError(f"the integral converges only for q > -1, got {q!r}")
    count, a, extra, log_scale = _plan(dims, q, spec)
    scale = math.exp(2 * log_scale)

    def estimate(nc: int) -> float:
        x, w = _golub_welsch(nc, a)
        poly = _poly_kernel(dims, x)  # (m, N)
        # K(x,y) / sqrt(w(x) w(y)) = sum_k p_k(x) p_k(y), so the double
        # integral is the squared Frobenius norm of the weighted Gram matrix
        gram = (poly * (w * x ** extra)) @ poly.T
        return scale * float(np.sum(gram * gram))

    return _converged(estimate, count)


def _converged(estimate, count: int, rtol: float = 1e-9, max_nodes: int = 1600) -> float:
    """Double the node count until two successive estimates agree."""
    prev = estimate(count)
    while count < max_nodes:
        count *= 2
        cur = estimate(count)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    warnings.warn(f"quadrature did not settle to {rtol:g} with {count} nodes", RuntimeWarning,
                  stacklevel=3)
    return prev
