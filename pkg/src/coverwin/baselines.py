"""Fixed-rule windowing strategies used for comparison.

Same per-event interface and record type as the adaptive window, so a
pipeline can swap strategies freely.  Species statistics are tracked the
same way; the records simply carry ``threshold=0.0`` because no coverage
threshold is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

from .abundance import AbundanceStats
from .views import Event, SpeciesView
from .window import WindowRecord, build_record

COUNT_TUMBLING = "count_tumbling"
TIME_TUMBLING = "time_tumbling"
LANDMARK = "landmark"
BASELINE_KINDS = (COUNT_TUMBLING, TIME_TUMBLING, LANDMARK)


@dataclass(frozen=True)
class BaselineConfig:
    kind: str
    count: int = 20
    duration: int = 60_000
    landmark_activity: str = ""

    def __post_init__(self) -> None:
        if self.kind not in BASELINE_KINDS:
            raise ValueError(f"unknown baseline kind: {self.kind!r}")
        if self.kind == COUNT_TUMBLING and self.count < 1:
            raise ValueError("count must be at least 1")
        if self.kind == TIME_TUMBLING and self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.kind == LANDMARK and not self.landmark_activity:
            raise ValueError("landmark_activity must be non-empty")


class BaselineWindow:
    """Count, time or landmark tumbling windows.

    Boundary semantics: a count window closes with its count-th event
    inside; a time window closes as soon as an event at least ``duration``
    ms past the window's first event arrives, and that event opens the
    next window; a landmark event likewise closes the running window
    first and then starts (and belongs to) the next one.
    """

    def __init__(self, view: SpeciesView, config: BaselineConfig) -> None:
        self.view = view
        self.config = config
        self.windows_closed = 0
        self._buffer: list[Event] = []
        self._stats = AbundanceStats()

    @property
    def buffer_size(self) -> int:
        return len(self._buffer)

    def process_event(self, event: Event) -> WindowRecord | None:
        closed: WindowRecord | None = None
        cfg = self.config
        if self._buffer:
            if (
                cfg.kind == TIME_TUMBLING
                and event.timestamp - self._buffer[0].timestamp >= cfg.duration
            ):
                closed = self._close(force=False)
            elif cfg.kind == LANDMARK and event.activity == cfg.landmark_activity:
                closed = self._close(force=False)
        self._buffer.append(event)
        for species in self.view.extract(event):
            self._stats.observe(species)
        for species in self.view.flush_cases(event.timestamp):
            self._stats.observe(species)
        if cfg.kind == COUNT_TUMBLING and len(self._buffer) >= cfg.count:
            closed = self._close(force=False)
        return closed

    def flush(self, now: int | None = None) -> WindowRecord | None:
        """Emit the partial window at end of stream, if any."""
        for species in self.view.flush_cases(now):
            self._stats.observe(species)
        if not self._buffer:
            return None
        return self._close(force=True)

    def _close(self, force: bool) -> WindowRecord:
        record = build_record(
            self.windows_closed, self._buffer, self._stats, 0.0, force_closed=force
        )
        self.windows_closed += 1
        self._buffer = []
        self._stats.reset()
        return record
