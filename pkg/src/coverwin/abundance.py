"""Incremental abundance statistics with richness and coverage estimators.

Species observations are counted one at a time.  Alongside the raw
per-species counts the structure maintains the number of singletons (f1)
and doubletons (f2), because every estimator below depends only on
(n, s_n, f1, f2).  Both frequency counters can be adjusted from the new
count of the observed species alone, which keeps ``observe`` O(1).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Estimates:
    """Snapshot of the three estimators taken from one consistent state."""

    chao1: float
    completeness: float
    coverage: float


class AbundanceStats:
    """Species counts for one open window.

    Single-writer: exactly one stream pipeline mutates an instance.
    ``Estimates`` snapshots are plain values and stay valid after reset.
    """

    __slots__ = ("n", "counts", "f1", "f2")

    def __init__(self) -> None:
        self.n = 0
        self.counts: dict[str, int] = {}
        self.f1 = 0
        self.f2 = 0

    @property
    def s_n(self) -> int:
        """Number of distinct species observed so far."""
        return len(self.counts)

    def observe(self, species: str) -> None:
        """Count one observation of ``species``.

        Only the transitions 0->1, 1->2 and 2->3 can change f1/f2, so the
        update needs no scan over the count table.
        """
        count = self.counts.get(species, 0) + 1
        self.counts[species] = count
        self.n += 1
        if count == 1:
            self.f1 += 1
        elif count == 2:
            self.f1 -= 1
            self.f2 += 1
        elif count == 3:
            self.f2 -= 1

    def reset(self) -> None:
        """Drop all counts, returning to the empty state."""
        self.n = 0
        # fresh dict so that anything still holding the old one keeps a
        # consistent snapshot of the closed window
        self.counts = {}
        self.f1 = 0
        self.f2 = 0

    def estimates(self) -> Estimates:
        return estimates(self)


def chao1(stats: AbundanceStats) -> float:
    """Chao1 lower-bound estimate of the total number of species.

    s_n + f1^2 / (2 f2), falling back to the bias-corrected form
    s_n + f1 (f1 - 1) / 2 when no doubletons exist.  An empty sample
    estimates zero species.
    """
    if stats.n == 0:
        return 0.0
    if stats.f2 > 0:
        return stats.s_n + (stats.f1 * stats.f1) / (2.0 * stats.f2)
    return stats.s_n + (stats.f1 * (stats.f1 - 1)) / 2.0


def completeness(stats: AbundanceStats) -> float:
    """Fraction of the estimated species richness already observed.

    s_n / chao1, which is 1.0 exactly when no singletons remain.  Empty
    sample convention: 0.0.
    """
    if stats.n == 0:
        return 0.0
    return stats.s_n / chao1(stats)


def coverage(stats: AbundanceStats) -> float:
    """Estimated probability that the next observation is a known species.

    1 - (f1 / n) * (1 - 2 f2 / ((n - 1) f1 + 2 f2)), clamped to [0, 1].
    Conventions for the degenerate inputs: an empty sample has coverage
    0.0; a sample without singletons has coverage 1.0; a single lone
    observation (n == 1, f1 == 1, f2 == 0, where the correction term has
    a zero denominator) carries no reobservation evidence and gets 0.0.
    """
    if stats.n == 0:
        return 0.0
    if stats.f1 == 0:
        return 1.0
    denom = (stats.n - 1) * stats.f1 + 2 * stats.f2
    if denom == 0:
        return 0.0
    value = 1.0 - (stats.f1 / stats.n) * (1.0 - 2.0 * stats.f2 / denom)
    return min(1.0, max(0.0, value))


def estimates(stats: AbundanceStats) -> Estimates:
    """All three estimators from one state, computed together."""
    return Estimates(
        chao1=chao1(stats),
        completeness=completeness(stats),
        coverage=coverage(stats),
    )
