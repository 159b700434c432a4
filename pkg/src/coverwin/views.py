"""Species extraction from event streams.

An event stream becomes a stream of species tokens under one of three
views: activity n-grams, directly-follows pairs, or whole trace
variants.  The first two emit per event; trace variants only materialize
once a case is considered complete (no activity for ``case_timeout`` ms
of stream time, or end of stream).

Per-case context lives in a recency-ordered table so that idle cases can
be evicted from the front in amortized O(1) per event.
"""

from __future__ import annotations

from collections import OrderedDict, deque
from dataclasses import dataclass

#: Joins activities into composite species tokens.  Rejected inside
#: activity names at ingestion so that tokens stay unambiguous.
SEPARATOR = "|"

ACTIVITY_NGRAM = "activity_ngram"
DIRECTLY_FOLLOWS = "directly_follows"
TRACE_VARIANT = "trace_variant"
VIEW_KINDS = (ACTIVITY_NGRAM, DIRECTLY_FOLLOWS, TRACE_VARIANT)

MAX_NGRAM_ORDER = 5
DEFAULT_CASE_TIMEOUT_MS = 30 * 60 * 1000


@dataclass(frozen=True, slots=True)
class Event:
    """One observed activity execution.

    ``timestamp`` is milliseconds since the epoch; ordering and timeouts
    use stream time only, never the wall clock.
    """

    case_id: str
    activity: str
    timestamp: int


@dataclass(frozen=True)
class ViewConfig:
    kind: str = ACTIVITY_NGRAM
    ngram_order: int = 1
    case_timeout: int = DEFAULT_CASE_TIMEOUT_MS

    def __post_init__(self) -> None:
        if self.kind not in VIEW_KINDS:
            raise ValueError(f"unknown view kind: {self.kind!r}")
        if not 1 <= self.ngram_order <= MAX_NGRAM_ORDER:
            raise ValueError(
                f"ngram_order must be in 1..{MAX_NGRAM_ORDER}, got {self.ngram_order}"
            )
        if self.case_timeout <= 0:
            raise ValueError("case_timeout must be positive")


class _CaseState:
    __slots__ = ("recent", "last_seen")

    def __init__(self, maxlen: int | None) -> None:
        # maxlen=None keeps the whole sequence (trace variants)
        self.recent: deque[str] = deque(maxlen=maxlen)
        self.last_seen = 0


class SpeciesView:
    """Stateful species extractor for one stream.

    Case state persists across window boundaries: a window close does not
    interrupt running cases, so n-gram/directly-follows context built in
    one window keeps feeding the next.
    """

    def __init__(self, config: ViewConfig) -> None:
        self.config = config
        if config.kind == ACTIVITY_NGRAM:
            self._maxlen: int | None = config.ngram_order
        elif config.kind == DIRECTLY_FOLLOWS:
            self._maxlen = 2
        else:
            self._maxlen = None
        self._cases: OrderedDict[str, _CaseState] = OrderedDict()

    @property
    def open_cases(self) -> int:
        return len(self._cases)

    def extract(self, event: Event) -> list[str]:
        """Species emitted by this event (empty while context is short)."""
        state = self._cases.get(event.case_id)
        if state is None:
            state = _CaseState(self._maxlen)
            self._cases[event.case_id] = state
        else:
            self._cases.move_to_end(event.case_id)
        state.recent.append(event.activity)
        state.last_seen = event.timestamp

        kind = self.config.kind
        if kind == ACTIVITY_NGRAM:
            order = self.config.ngram_order
            if order == 1:
                return [event.activity]
            if len(state.recent) == order:
                return [SEPARATOR.join(state.recent)]
            return []
        if kind == DIRECTLY_FOLLOWS:
            if len(state.recent) == 2:
                return [state.recent[0] + SEPARATOR + state.recent[1]]
            return []
        # trace variants are only emitted when the case completes
        return []

    def flush_cases(self, now: int | None = None) -> list[str]:
        """Complete idle cases and return any trace-variant species.

        A case is idle when its last activity is more than ``case_timeout``
        ms of stream time before ``now``.  ``now=None`` means end of
        stream: every remaining case completes.  For non-variant views the
        only effect is that evicted cases lose their context.
        """
        emit_variants = self.config.kind == TRACE_VARIANT
        timeout = self.config.case_timeout
        emitted: list[str] = []
        # cases are kept in last-touched order, so the idle ones sit at
        # the front and the scan stops at the first live case
        while self._cases:
            case_id, state = next(iter(self._cases.items()))
            if now is not None and state.last_seen + timeout >= now:
                break
            del self._cases[case_id]
            if emit_variants:
                emitted.append(SEPARATOR.join(state.recent))
        return emitted
