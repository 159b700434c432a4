"""Coverage-driven adaptive windowing.

Events accumulate in a buffer while species statistics and a per-event
coverage history grow alongside.  After every event the closing
threshold is re-derived from the shape of the coverage curve, and the
window closes once coverage reaches the threshold (subject to a minimum
size).  Threshold state survives window boundaries; buffer, statistics
and history do not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .abundance import AbundanceStats, coverage as coverage_of
from .views import Event, SpeciesView

CT_CEILING = 0.99
SF_FLOOR = 0.01
SF_CEILING = 0.99
SF_GROWTH = 1.2
SF_DECAY = 0.8


@dataclass(frozen=True)
class ThresholdState:
    """Closing threshold plus the knobs that steer its adaptation.

    ct    current closing threshold, kept within [mt, 0.99]
    sf    smoothing factor blending curve evidence into ct
    dr    amount ct decays when coverage stagnates
    mt    hard floor for ct
    delta stagnation tolerance on consecutive coverage deltas
    w     number of trailing coverage points the stagnation check reads
    """

    ct: float = 0.9
    sf: float = 0.2
    dr: float = 0.1
    mt: float = 0.5
    delta: float = 0.01
    w: int = 5

    def __post_init__(self) -> None:
        if not 0.0 < self.mt <= CT_CEILING:
            raise ValueError("mt must be in (0, 0.99]")
        if not self.mt <= self.ct <= CT_CEILING:
            raise ValueError("ct must be in [mt, 0.99]")
        if not SF_FLOOR <= self.sf <= SF_CEILING:
            raise ValueError("sf must be in [0.01, 0.99]")
        if self.dr <= 0.0:
            raise ValueError("dr must be positive")
        if self.delta <= 0.0:
            raise ValueError("delta must be positive")
        if self.w < 2:
            raise ValueError("w must be at least 2")


def _is_stagnant(history: Sequence[float], state: ThresholdState) -> bool:
    n = len(history)
    if n < state.w:
        return False
    return all(
        abs(history[k] - history[k + 1]) < state.delta
        for k in range(n - state.w, n - 1)
    )


def _step(state: ThresholdState, c_optimal: float, stagnant: bool) -> ThresholdState:
    """Apply one adjustment given the curve evidence already extracted."""
    if stagnant:
        sf = min(SF_GROWTH * state.sf, SF_CEILING)
        ct_temp = max(state.ct - state.dr, state.mt)
    else:
        sf = max(SF_DECAY * state.sf, SF_FLOOR)
        ct_temp = state.ct
    ct = sf * c_optimal + (1.0 - sf) * ct_temp
    ct = min(max(ct, state.mt), CT_CEILING)
    return replace(state, ct=ct, sf=sf)


def update_threshold(history: Sequence[float], state: ThresholdState) -> ThresholdState:
    """One threshold adjustment from the open window's coverage curve.

    The curvature r''(i) = C[i-1] - 2 C[i] + C[i+1] is scanned over the
    interior points; the coverage value just past the strongest elbow
    (ties resolved to the earliest index) becomes the target the
    threshold is pulled toward.  If the last ``w`` coverage points moved
    by less than ``delta`` each, the curve is stagnating: the smoothing
    factor grows and the threshold additionally decays by ``dr``, so a
    window can never stay open forever.  The result is clamped to
    [mt, 0.99].
    """
    n = len(history)
    if n < 3:
        raise ValueError("threshold update needs at least 3 coverage points")
    best_i = 1
    best = history[0] - 2.0 * history[1] + history[2]
    for i in range(2, n - 1):
        r2 = history[i - 1] - 2.0 * history[i] + history[i + 1]
        if r2 > best:
            best = r2
            best_i = i
    c_optimal = history[best_i + 1]
    return _step(state, c_optimal, _is_stagnant(history, state))


@dataclass(frozen=True)
class WindowRecord:
    """One closed window with its final estimates.

    ``threshold`` is the closing threshold in force at close time; for
    regular closes ``coverage >= threshold`` holds.  ``force_closed``
    marks windows emitted by an end-of-stream flush.
    """

    index: int
    events: tuple[Event, ...]
    size: int
    first_ts: int
    last_ts: int
    coverage: float
    completeness: float
    chao1: float
    threshold: float
    force_closed: bool = False


def build_record(
    index: int,
    events: Sequence[Event],
    stats: AbundanceStats,
    threshold: float,
    force_closed: bool = False,
) -> WindowRecord:
    est = stats.estimates()
    return WindowRecord(
        index=index,
        events=tuple(events),
        size=len(events),
        first_ts=events[0].timestamp,
        last_ts=events[-1].timestamp,
        coverage=est.coverage,
        completeness=est.completeness,
        chao1=est.chao1,
        threshold=threshold,
        force_closed=force_closed,
    )


class AdaptiveWindow:
    """Accumulates events until the window looks representative.

    ``process_event`` returns the closed window record when this event
    completed one, else None.  The per-event threshold update keeps a
    running maximum over the curvature values instead of rescanning the
    history: curvature points are append-only and ties go to the earliest
    index either way, so the result is identical to ``update_threshold``
    on the full history while staying O(1) per event.
    """

    def __init__(
        self,
        view: SpeciesView,
        threshold: ThresholdState | None = None,
        min_window_size: int = 5,
    ) -> None:
        if min_window_size < 1:
            raise ValueError("min_window_size must be at least 1")
        self.view = view
        self.threshold = threshold if threshold is not None else ThresholdState()
        self.min_window_size = min_window_size
        self.windows_closed = 0
        self._buffer: list[Event] = []
        self._stats = AbundanceStats()
        self._history: list[float] = []
        self._best_r2 = -math.inf
        self._best_i = 0

    @property
    def coverage_history(self) -> tuple[float, ...]:
        """Per-event coverage curve of the open window."""
        return tuple(self._history)

    @property
    def buffer_size(self) -> int:
        return len(self._buffer)

    @property
    def stats(self) -> AbundanceStats:
        return self._stats

    def process_event(self, event: Event) -> WindowRecord | None:
        self._buffer.append(event)
        for species in self.view.extract(event):
            self._stats.observe(species)
        # completed-case species (trace variants) belong to the window
        # that is open when the completion is detected
        for species in self.view.flush_cases(event.timestamp):
            self._stats.observe(species)
        cov = coverage_of(self._stats)
        self._history.append(cov)
        if len(self._history) >= 3:
            self._update_threshold()
        if cov >= self.threshold.ct and len(self._buffer) >= self.min_window_size:
            return self._close(force=False)
        return None

    def flush(self, now: int | None = None) -> WindowRecord | None:
        """Force out the open window, completing idle cases first.

        ``now=None`` treats the stream as ended and completes every case.
        Returns None when no events are buffered.
        """
        for species in self.view.flush_cases(now):
            self._stats.observe(species)
        if not self._buffer:
            return None
        return self._close(force=True)

    def _update_threshold(self) -> None:
        h = self._history
        n = len(h)
        # only the newest interior point i = n-2 is a new curvature candidate
        i = n - 2
        r2 = h[i - 1] - 2.0 * h[i] + h[i + 1]
        if r2 > self._best_r2:
            self._best_r2 = r2
            self._best_i = i
        c_optimal = h[self._best_i + 1]
        self.threshold = _step(
            self.threshold, c_optimal, _is_stagnant(h, self.threshold)
        )

    def _close(self, force: bool) -> WindowRecord:
        record = build_record(
            self.windows_closed,
            self._buffer,
            self._stats,
            self.threshold.ct,
            force_closed=force,
        )
        self.windows_closed += 1
        self._buffer = []
        self._stats.reset()
        self._history = []
        self._best_r2 = -math.inf
        self._best_i = 0
        return record
