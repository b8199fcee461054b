"""Mergeable running moments (mean and central sums up to order four)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MomentAccumulator"]


@dataclass
class MomentAccumulator:
    """Count, mean and central sums M2..M4 of a stream of samples.

    Batches are reduced with a two-pass pass over the batch and folded in
    with the pairwise update of Chan et al. / Pebay, so accumulators built
    on disjoint data can be merged in any grouping with the same result up
    to rounding.  A fixed merge order makes the result bit-reproducible.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def from_batch(cls, x) -> "MomentAccumulator":
        x = np.asarray(x, dtype=float).ravel()
        if x.size == 0:
            return cls()
        mu = float(np.mean(x))
        d = x - mu
        d2 = d * d
        return cls(x.size, mu, float(np.sum(d2)), float(np.sum(d2 * d)), float(np.sum(d2 * d2)))

    def update(self, x) -> None:
        self.merge(MomentAccumulator.from_batch(x))

    def merge(self, other: "MomentAccumulator") -> None:
        na, nb = self.count, other.count
        if nb == 0:
            return
        if na == 0:
            self.count, self.mean, self.m2, self.m3, self.m4 = (
                other.count, other.mean, other.m2, other.m3, other.m4)
            return
        n = na + nb
        delta = other.mean - self.mean
        d_n = delta / n
        d_n2 = d_n * d_n
        cross = delta * d_n * na * nb  # delta^2 na nb / n
        m4 = (self.m4 + other.m4 + cross * d_n2 * (na * na - na * nb + nb * nb)
              + 6.0 * d_n2 * (na * na * other.m2 + nb * nb * self.m2)
              + 4.0 * d_n * (na * other.m3 - nb * self.m3))
        m3 = (self.m3 + other.m3 + cross * d_n * (na - nb)
              + 3.0 * d_n * (na * other.m2 - nb * self.m2))
        self.m2 = self.m2 + other.m2 + cross
        self.m3 = m3
        self.m4 = m4
        self.mean = self.mean + d_n * nb
        self.count = n

    @property
    def variance(self) -> float:
        """Unbiased sample variance."""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def fourth_central(self) -> float:
        return self.m4 / self.count if self.count else 0.0

    @property
    def se_mean(self) -> float:
        return (self.variance / self.count) ** 0.5 if self.count else 0.0

    @property
    def se_variance(self) -> float:
        if self.count < 2:
            return 0.0
        var = self.m2 / self.count
        return max(self.fourth_central - var * var, 0.0) ** 0.5 / self.count ** 0.5
