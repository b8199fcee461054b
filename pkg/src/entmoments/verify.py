"""Cross-check suites: each closed form against an independent route."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

from .kernel import Dims, quad_I2, quad_induced_moment, schrodinger_A_exact
from .moments import (
    exact_moments,
    induced_I1,
    induced_L_mean,
    induced_L_second,
    moment_report,
    q1_limit_check,
    special_q2,
    special_small_m,
    tsallis_variance,
    vn_variance,
    vn_variance_via_appendix,
)
from .montecarlo import run_mc

__all__ = ["Check", "SUITES", "run_suite", "SMALL_M_GRID"]

CLOSED_FORM_TOL = 1e-10
QUADRATURE_TOL = 1e-7
LIMIT_TOL = 1e-6
MC_SIGMAS = 4.0

SMALL_M_GRID = [(m, n, q) for m in (2, 3) for n in range(m, 9) for q in (0.5, 1.5, 2, 2.5, 3)]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    reference: float
    error: float
    tolerance: float
    passed: bool
    kind: str = "relative"  # or "absolute", "sigma", "exact"


def _rel(name: str, value: float, ref: float, tol: float) -> Check:
    err = abs(value - ref) / abs(ref) if ref != 0 else abs(value)
    return Check(name, value, ref, err, tol, err <= tol)


def _abs(name: str, value: float, ref: float, tol: float) -> Check:
    err = abs(value - ref)
    return Check(name, value, ref, err, tol, err <= tol, "absolute")


def quadratic_checks(nmax: int = 10) -> Iterator[Check]:
    for m in range(2, nmax + 1):
        for n in range(m, nmax + 1):
            dims = Dims(m, n)
            closed = special_q2(dims)
            general = tsallis_variance(dims, 2)
            yield _rel(f"q2 var float m={m} n={n}", general.var_T, closed.var_T, 1e-12)
            exact = exact_moments(dims, 2)["var_T"]
            ok = exact == closed.exact["var_T"]
            yield Check(f"q2 var exact m={m} n={n}", float(exact), float(closed.exact["var_T"]),
                        0.0 if ok else math.inf, 0.0, ok, "exact")


def small_m_checks() -> Iterator[Check]:
    for m, n, q in SMALL_M_GRID:
        dims = Dims(m, n)
        el, el2 = special_small_m(dims, q)
        yield _rel(f"small-m E_g[L] m={m} n={n} q={q}", float(el),
                   float(induced_L_mean(dims, q)), CLOSED_FORM_TOL)
        yield _rel(f"small-m E_g[L^2] m={m} n={n} q={q}", float(el2),
                   float(induced_L_second(dims, q)), CLOSED_FORM_TOL)


def degeneracy_checks(mn_max: int = 64) -> Iterator[Check]:
    for m in range(1, mn_max + 1):
        for n in range(m, mn_max // m + 1):
            dims = Dims(m, n)
            mn = m * n
            yield _rel(f"q=1 E_g[L] m={m} n={n}", float(induced_L_mean(dims, 1)), mn, 1e-12)
            yield _rel(f"q=1 E_g[L^2] m={m} n={n}", float(induced_L_second(dims, 1)),
                       mn * (mn + 1), 1e-12)
    for n in (1, 3, 9):
        for q in (-0.4, 0.5, 1.7, 2, 3.5):
            rep = tsallis_variance(Dims(1, n), q)
            yield _abs(f"m=1 mean n={n} q={q}", rep.e_T, 0.0, 0.0)
            yield _abs(f"m=1 variance n={n} q={q}", rep.var_T, 0.0, 0.0)
    for alpha in (0, 1, 2):
        bad = 0
        for s in range(6):
            for t in range(6):
                want = Fraction(math.factorial(alpha + s), math.factorial(s)) if s == t else 0
                bad += schrodinger_A_exact(s, t, alpha, alpha, alpha) != want
        yield Check(f"orthogonality alpha={alpha}", bad, 0, bad, 0, bad == 0, "exact")


def closed_form_checks() -> Iterator[Check]:
    yield from quadratic_checks()
    yield from small_m_checks()
    yield from degeneracy_checks()


def quadrature_checks() -> Iterator[Check]:
    for m, n, q in SMALL_M_GRID:
        dims = Dims(m, n)
        el_quad = quad_induced_moment(dims, q)
        el2_quad = quad_induced_moment(dims, 2 * q) - quad_I2(dims, q) + el_quad ** 2
        yield _rel(f"quad E_g[L] m={m} n={n} q={q}", el_quad,
                   float(induced_L_mean(dims, q)), QUADRATURE_TOL)
        yield _rel(f"quad I1 m={m} n={n} q={q}", quad_induced_moment(dims, 2 * q),
                   float(induced_I1(dims, q)), QUADRATURE_TOL)
        yield _rel(f"quad E_g[L^2] m={m} n={n} q={q}", el2_quad,
                   float(induced_L_second(dims, q)), QUADRATURE_TOL)


def appendix_checks(mmax: int = 8, nmax: int = 12) -> Iterator[Check]:
    for m in range(1, mmax + 1):
        for n in range(m, nmax + 1):
            dims = Dims(m, n)
            direct = vn_variance(dims)
            chain = vn_variance_via_appendix(dims)
            if m == 1:
                yield _abs(f"appendix m={m} n={n}", chain, direct, 1e-15)
            else:
                yield _rel(f"appendix m={m} n={n}", chain, direct, CLOSED_FORM_TOL)


def limit_checks(nmax: int = 6, eps: float = 1e-3) -> Iterator[Check]:
    for m in range(1, nmax + 1):
        for n in range(m, nmax + 1):
            dims = Dims(m, n)
            lim = 0.0 if m == 1 else q1_limit_check(dims, eps)
            yield _abs(f"q->1 limit m={m} n={n}", lim, vn_variance(dims), LIMIT_TOL)


def mc_checks(m: int = 2, n: int = 2, q: float = 2.0, samples: int = 1_000_000, seed: int = 0,
              workers: int = 1) -> Iterator[Check]:
    dims = Dims(m, n)
    rep = moment_report(dims, q)
    est = run_mc(dims, q, samples, seed, workers)
    for label, value, ref, se in (("mean", est.mean, rep.e_T, est.se_mean),
                                  ("variance", est.variance, rep.var_T, est.se_variance)):
        z = abs(value - ref) / se if se > 0 else (0.0 if value == ref else math.inf)
        yield Check(f"mc {label} m={m} n={n} q={q}", value, ref, z, MC_SIGMAS, z <= MC_SIGMAS,
                    "sigma")


SUITES: dict[str, Callable[..., Iterator[Check]]] = {
    "closed-forms": closed_form_checks,
    "quadrature": quadrature_checks,
    "appendix": appendix_checks,
    "limit": limit_checks,
    "mc": mc_checks,
}


def run_suite(name: str, **mc_kwargs) -> list[Check]:
    if name == "all":
        return [c for key in ("closed-forms", "quadrature", "appendix", "limit")
                for c in SUITES[key]()]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    return list(SUITES[name](**mc_kwargs) if name == "mc" else SUITES[name]())
