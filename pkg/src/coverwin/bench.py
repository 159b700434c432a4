"""Benchmark harness: drift adaptation, accuracy proxy, speed.

Three groups of helpers.  Window-size reaction statistics around a known
drift point; a directly-follows accuracy proxy that scores a window's
pair set against a ground-truth regime; and latency/throughput
measurement for the per-event path.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from .driftgen import VariantPool, case_number
from .views import Event, SpeciesView, ViewConfig
from .window import AdaptiveWindow, ThresholdState, WindowRecord
from .stream_io import SourceConfig, replay


class Strategy(Protocol):
    def process_event(self, event: Event) -> WindowRecord | None: ...

    def flush(self, now: int | None = None) -> WindowRecord | None: ...


def run_stream(events: Iterable[Event], strategy: Strategy) -> list[WindowRecord]:
    """Feed every event, then flush; returns all closed windows."""
    records = [r for e in events if (r := strategy.process_event(e)) is not None]
    final = strategy.flush(None)
    if final is not None:
        records.append(final)
    return records


def window_sizes(records: Sequence[WindowRecord]) -> list[int]:
    return [r.size for r in records]


def first_window_at_case(records: Sequence[WindowRecord], case_index: int) -> int:
    """Index of the first window that contains a case >= case_index.

    Maps a ground-truth drift case index onto the window axis of a run
    over a generated stream.
    """
    for w, record in enumerate(records):
        if any(case_number(e.case_id) >= case_index for e in record.events):
            return w
    raise ValueError(f"no window reaches case {case_index}")


@dataclass(frozen=True)
class WindowSizeSeries:
    """Closed-window sizes with the window indices nearest known drifts."""

    sizes: tuple[int, ...]
    drift_markers: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if any(size < 1 for size in self.sizes):
            raise ValueError("window sizes must be at least 1")


def size_series(
    records: Sequence[WindowRecord], drift_case_indices: Sequence[int] = ()
) -> WindowSizeSeries:
    """Series of a run's window sizes, drift positions mapped to windows."""
    markers = tuple(first_window_at_case(records, c) for c in drift_case_indices)
    return WindowSizeSeries(tuple(window_sizes(records)), markers)


@dataclass(frozen=True)
class DriftAdaptationReport:
    """Window-size reaction in a fixed span around one drift point.

    The span is the half-open run of ``before + after`` windows starting
    ``before`` windows ahead of the drift window.  Relative changes are
    |s[j+1] - s[j]| / s[j] over consecutive span windows.
    """

    drift_window: int
    mean_relative_change: float
    std_relative_change: float
    coefficient_of_variation: float
    pre_mean: float
    during_mean: float
    post_mean: float


def drift_adaptation_stats(
    series: WindowSizeSeries | Sequence[int],
    drift_window: int,
    before: int = 10,
    after: int = 20,
) -> DriftAdaptationReport:
    """Score how window sizes reacted around ``drift_window``.

    ``during`` is the first half of the after-drift windows, ``post`` the
    second half.  Raises ValueError when fewer than ``before`` windows
    precede the drift or fewer than ``after`` follow it.
    """
    sizes = series.sizes if isinstance(series, WindowSizeSeries) else series
    if before < 1 or after < 2:
        raise ValueError("need before >= 1 and after >= 2")
    if drift_window - before < 0 or drift_window + after > len(sizes):
        raise ValueError(
            f"need {before} windows before and {after} from window "
            f"{drift_window}, have {len(sizes)} total"
        )
    span = np.asarray(sizes[drift_window - before : drift_window + after], dtype=float)
    rel = np.abs(np.diff(span)) / span[:-1]
    after_span = span[before:]
    half = after // 2
    return DriftAdaptationReport(
        drift_window=drift_window,
        mean_relative_change=float(np.mean(rel)),
        std_relative_change=float(np.std(rel)),
        coefficient_of_variation=float(np.std(span) / np.mean(span)),
        pre_mean=float(np.mean(span[:before])),
        during_mean=float(np.mean(after_span[:half])),
        post_mean=float(np.mean(after_span[half:])),
    )


def segment_means(
    sizes: Sequence[int], start: int, end: int
) -> tuple[float, float, float]:
    """Mean window size before ``start``, in [start, end), and from ``end``."""
    if not 0 < start < end < len(sizes):
        raise ValueError("need non-empty pre, during and post segments")
    arr = np.asarray(sizes, dtype=float)
    return (
        float(np.mean(arr[:start])),
        float(np.mean(arr[start:end])),
        float(np.mean(arr[end:])),
    )


# --- directly-follows accuracy proxy ---------------------------------------


@dataclass(frozen=True)
class DfgAccuracy:
    precision: float
    recall: float
    f1: float


def df_pairs(events: Iterable[Event]) -> set[tuple[str, str]]:
    """Set of within-case directly-follows pairs in an event sequence."""
    last: dict[str, str] = {}
    pairs: set[tuple[str, str]] = set()
    for event in events:
        previous = last.get(event.case_id)
        if previous is not None:
            pairs.add((previous, event.activity))
        last[event.case_id] = event.activity
    return pairs


def pool_reference_pairs(pool: VariantPool) -> set[tuple[str, str]]:
    """All directly-follows pairs a pool's variants can produce."""
    pairs: set[tuple[str, str]] = set()
    for sequence, _ in pool.variants:
        pairs.update(zip(sequence, sequence[1:]))
    return pairs


def dfg_accuracy(
    window_pairs: set[tuple[str, str]], reference_pairs: set[tuple[str, str]]
) -> DfgAccuracy:
    """Set precision/recall/F1 of a window's pairs against a reference.

    An empty window scores zero precision by convention; an empty
    reference is a caller error.
    """
    if not reference_pairs:
        raise ValueError("reference pair set must be non-empty")
    hits = len(window_pairs & reference_pairs)
    precision = hits / len(window_pairs) if window_pairs else 0.0
    recall = hits / len(reference_pairs)
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return DfgAccuracy(precision, recall, f1)


@dataclass(frozen=True)
class StrategySummary:
    name: str
    windows: int
    mean_precision: float
    mean_recall: float
    mean_f1: float


def majority_pool(record: WindowRecord, pool_per_case: Sequence[int]) -> int:
    """Pool index that most of the window's events belong to."""
    counts = Counter(pool_per_case[case_number(e.case_id)] for e in record.events)
    return min(counts, key=lambda pool: (-counts[pool], pool))


def summarize_accuracy(
    name: str,
    records: Sequence[WindowRecord],
    pool_per_case: Sequence[int],
    pools: Sequence[VariantPool],
) -> StrategySummary:
    """Mean DFG accuracy over all windows of one strategy's run.

    Each window is scored against the reference pairs of its own
    majority regime, so drift-straddling windows pay for mixing regimes.
    """
    references = [pool_reference_pairs(pool) for pool in pools]
    scores = [
        dfg_accuracy(df_pairs(r.events), references[majority_pool(r, pool_per_case)])
        for r in records
    ]
    if not scores:
        raise ValueError("no windows to score")
    return StrategySummary(
        name=name,
        windows=len(scores),
        mean_precision=float(np.mean([s.precision for s in scores])),
        mean_recall=float(np.mean([s.recall for s in scores])),
        mean_f1=float(np.mean([s.f1 for s in scores])),
    )


def accuracy_by_strategy(
    events: Sequence[Event],
    pool_per_case: Sequence[int],
    pools: Sequence[VariantPool],
    factories: dict[str, Callable[[], Strategy]],
) -> list[StrategySummary]:
    """Run each strategy over the same events and score it."""
    return [
        summarize_accuracy(name, run_stream(events, factory()), pool_per_case, pools)
        for name, factory in factories.items()
    ]


# --- speed ------------------------------------------------------------------


@dataclass(frozen=True)
class LatencyRow:
    window_size: int
    median_seconds: float
    p95_seconds: float


def _synthetic_events(count: int, alphabet_size: int, cases: int = 5) -> list[Event]:
    return [
        Event(f"c{i % cases}", f"a{i % alphabet_size}", (i + 1) * 100)
        for i in range(count)
    ]


def measure_latency(
    sizes: Sequence[int],
    trials: int = 7,
    alphabet_size: int = 10,
) -> list[LatencyRow]:
    """Wall time from first event to window emission, per target size.

    Each trial drives a fresh adaptive pipeline whose minimum window size
    pins the close to exactly ``n`` events, so the measurement covers the
    full per-event path (species extraction, estimation, threshold
    update) plus the close itself.
    """
    rows = []
    for n in sizes:
        events = _synthetic_events(n, alphabet_size)
        samples = []
        for _ in range(trials):
            window = AdaptiveWindow(
                SpeciesView(ViewConfig()), ThresholdState(), min_window_size=n
            )
            start = time.perf_counter()
            record = None
            for event in events:
                record = window.process_event(event)
                if record is not None:
                    break
            if record is None:
                window.flush(None)
            samples.append(time.perf_counter() - start)
        rows.append(
            LatencyRow(
                window_size=n,
                median_seconds=float(np.median(samples)),
                p95_seconds=float(np.percentile(samples, 95)),
            )
        )
    return rows


def linear_fit_r2(xs: Sequence[float], ys: Sequence[float]) -> float:
    """R^2 of the least-squares line through (xs, ys)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = y - np.mean(y)
    ss_tot = float(np.dot(total, total))
    ss_res = float(np.dot(residual, residual))
    if ss_tot == 0.0:
        # flat target: the fit is perfect up to float noise in polyfit
        return 1.0 if ss_res <= 1e-12 * max(1.0, float(np.dot(y, y))) else 0.0
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class ThroughputReport:
    """Events per second over repeated full-file runs (sample std)."""

    events: int
    runs: tuple[float, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.runs))

    @property
    def std(self) -> float:
        if len(self.runs) < 2:
            return 0.0
        return float(np.std(self.runs, ddof=1))


def measure_throughput(
    source: SourceConfig,
    strategy_factory: Callable[[], Strategy],
    runs: int = 5,
) -> ThroughputReport:
    """Replay the whole file ``runs`` times, each with a fresh pipeline."""
    if runs < 1:
        raise ValueError("need at least one run")
    rates = []
    events = 0
    for _ in range(runs):
        strategy = strategy_factory()
        stats = replay(source, lambda e: strategy.process_event(e))
        strategy.flush(None)
        events = stats.delivered
        rates.append(stats.events_per_sec)
    return ThroughputReport(events=events, runs=tuple(rates))
