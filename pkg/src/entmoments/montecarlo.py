"""Monte Carlo oracle: fixed-trace spectra from normalized complex Wishart matrices.

Random numbers come from counter-based Philox streams keyed by
``(seed, worker)``, so each worker's substream is fixed by construction and
a run is reproducible for a given seed and worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .eigen import jacobi_eigh
from .kernel import Dims
from .stats import MomentAccumulator

__all__ = [
    "Spectrum",
    "McEstimate",
    "McAbort",
    "substream",
    "complex_normal",
    "ginibre",
    "sample_spectra",
    "spectra_of",
    "sample_spectrum",
    "tsallis_of",
    "von_neumann_of",
    "entropy_values",
    "run_mc",
]

CLIP = 1e-12
MIN_SAMPLES = 10_000
DISCARD_LIMIT = 1e-4  # fraction of samples
CHUNK = 32_768


class McAbort(RuntimeError):
    """Too many samples were unusable for the estimate to be trusted."""


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a fixed-trace sample, sorted descending, summing to one."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if any(v < -CLIP for v in vals):
            raise ValueError("spectrum has a negative eigenvalue")
        vals = tuple(sorted((max(v, 0.0) for v in vals), reverse=True))
        if abs(math.fsum(vals) - 1.0) > CLIP:
            raise ValueError(f"spectrum must sum to 1, got {math.fsum(vals)!r}")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    variance: float
    se_mean: float
    se_variance: float
    samples: int
    seed: int
    q: float
    workers: int = 1
    discarded: int = 0
    rejected: int = 0
    conditional: bool = False


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

def substream(seed: int, worker: int) -> np.random.Generator:
    """Philox generator keyed by the 128-bit pair (seed, worker)."""
    if not (0 <= seed < 2 ** 64 and 0 <= worker < 2 ** 64):
        raise ValueError("seed and worker index must fit in 64 bits")
    return np.random.Generator(np.random.Philox(key=seed | (worker << 64)))


def complex_normal(gen: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normals (E|z|^2 = 1) by Box-Muller on uniform pairs."""
    u1 = gen.random(shape)
    u2 = gen.random(shape)
    # radius sqrt(-2 ln U)/sqrt(2) per component -> unit complex variance
    radius = np.sqrt(-np.log1p(-u1))
    return radius * np.exp(2j * np.pi * u2)


def ginibre(dims: Dims, gen: np.random.Generator, batch: int) -> np.ndarray:
    return complex_normal(gen, (batch, dims.m, dims.n))


def sample_spectra(dims: Dims, gen: np.random.Generator, batch: int):
    """Spectra of Y Y^H / tr(Y Y^H) for ``batch`` fresh Ginibre matrices.

    Returns ``(lams, ok)``: eigenvalues sorted descending, shape (batch, m),
    and a mask of samples whose eigensolve converged with no eigenvalue
    below -1e-12.
    """
    return spectra_of(ginibre(dims, gen, batch))


def spectra_of(y: np.ndarray):
    """Eigenvalues of Y Y^H / tr(Y Y^H) for a stack of matrices, shape (batch, m, n)."""
    y = np.asarray(y)
    batch, m = y.shape[0], y.shape[1]
    w = y @ np.conj(np.swapaxes(y, 1, 2))
    tr = np.real(np.einsum("bii->b", w))
    w /= tr[:, None, None]
    if m == 1:
        return np.ones((batch, 1)), np.ones(batch, dtype=bool)
    lams, _, converged = jacobi_eigh(w)
    ok = converged & np.all(lams >= -CLIP, axis=1)
    lams = np.clip(lams, 0.0, None)
    lams = -np.sort(-lams, axis=1)
    return lams, ok


def sample_spectrum(dims: Dims, gen: np.random.Generator) -> Spectrum:
    lams, ok = sample_spectra(dims, gen, 1)
    if not ok[0]:
        raise McAbort("eigensolver failed on this sample")
    return Spectrum(tuple(lams[0]))


# --------------------------------------------------------------------------
# entropies
# --------------------------------------------------------------------------

def entropy_values(lams: np.ndarray, q: float) -> np.ndarray:
    """Tsallis entropy per row of ``lams`` (von Neumann when q == 1)."""
    lams = np.asarray(lams, dtype=float)
    if q == 1:
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(lams > 0, lams * np.log(np.where(lams > 0, lams, 1.0)), 0.0)
        return -np.sum(terms, axis=-1)
    if q == 0:
        raise ValueError("q = 0 is excluded")
    if q < 0 and np.any(lams < 1e-300):
        raise ValueError("negative q with a zero eigenvalue: lambda^q diverges")
    return (1.0 - np.sum(lams ** q, axis=-1)) / (q - 1)


def tsallis_of(spec: Spectrum, q: float) -> float:
    if q in (0, 1):
        raise ValueError("Tsallis entropy needs q != 0, 1")
    return float(entropy_values(spec.as_array(), q))


def von_neumann_of(spec: Spectrum) -> float:
    return float(entropy_values(spec.as_array(), 1))


# --------------------------------------------------------------------------
# driver
# --------------------------------------------------------------------------

def _worker_ranges(samples: int, workers: int) -> list[int]:
    base, extra = divmod(samples, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _run_worker(dims: Dims, q: float, count: int, seed: int, worker: int, chunk: int):
    gen = substream(seed, worker)
    acc = MomentAccumulator()
    discarded = rejected = 0
    done = 0
    while done < count:
        size = min(chunk, count - done)
        lams, ok = sample_spectra(dims, gen, size)
        discarded += int(size - ok.sum())
        lams = lams[ok]
        if q < 0:
            keep = lams[:, -1] >= CLIP
            rejected += int(lams.shape[0] - keep.sum())
            lams = lams[keep]
        acc.update(entropy_values(lams, q))
        done += size
    return acc, discarded, rejected


def default_workers() -> int:
    env = os.environ.get("ENTMOMENTS_WORKERS")
    return max(1, int(env)) if env else 1


def run_mc(dims: Dims, q: float, samples: int, seed: int = 0, workers: int = 1,
           chunk: int = CHUNK) -> McEstimate:
    """Estimate mean and variance of the entropy of order q (q = 1: von Neumann).

    Worker w draws from ``substream(seed, w)`` over a fixed contiguous share
    of the samples; accumulators are merged in worker order.
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if q == 0 or not q > -1:
        raise ValueError(f"q must satisfy q > -1 and q != 0, got {q!r}")
    shares = _worker_ranges(samples, workers)
    args = [(dims, q, shares[w], seed, w, chunk) for w in range(workers)]
    if workers == 1:
        results = [_run_worker(*args[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_worker, *zip(*args)))
    total = MomentAccumulator()
    discarded = rejected = 0
    for acc, d, r in results:
        total.merge(acc)
        discarded += d
        rejected += r
    if discarded > DISCARD_LIMIT * samples:
        raise McAbort(f"{discarded} of {samples} samples discarded by the eigensolver")
    return McEstimate(
        mean=total.mean,
        variance=total.variance,
        se_mean=total.se_mean,
        se_variance=total.se_variance,
        samples=total.count,
        seed=seed,
        q=q,
        workers=workers,
        discarded=discarded,
        rejected=rejected,
        conditional=rejected > DISCARD_LIMIT * samples,
    )
