"""Event ingestion and result serialization.

Inputs: JSON-lines or CSV event files replayed in file order, or a
line-delimited TCP listener.  All paths funnel into a single ordered
pipeline; timestamps must be non-decreasing.  In strict mode a timestamp
regression is an error, in lenient mode the offending event is dropped
and counted.

Outputs: window records as JSON lines, metric series as CSV.
"""

from __future__ import annotations

import csv
import io
import json
import queue
import socketserver
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Callable, Iterable, Sequence

from .views import SEPARATOR, Event
from .window import WindowRecord

FILE_JSONL = "file_jsonl"
FILE_CSV = "file_csv"
TCP_LISTEN = "tcp_listen"
SOURCE_KINDS = (FILE_JSONL, FILE_CSV, TCP_LISTEN)

CSV_HEADER = ("case_id", "activity", "timestamp")

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_MS = timedelta(milliseconds=1)


class ParseError(ValueError):
    """A rejected input line.  ``code`` is a stable machine-readable tag."""

    def __init__(self, code: str, message: str, line_no: int | None = None):
        where = f" (line {line_no})" if line_no is not None else ""
        super().__init__(message + where)
        self.code = code
        self.line_no = line_no


class OrderingError(ValueError):
    """Timestamp regression in strict-order mode."""


def _parse_timestamp(value: object, line_no: int | None) -> int:
    if isinstance(value, bool):
        raise ParseError("bad_timestamp", f"bad timestamp: {value!r}", line_no)
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if value.is_integer():
            return int(value)
        raise ParseError("bad_timestamp", f"timestamp not whole ms: {value!r}", line_no)
    if isinstance(value, str):
        text = value.strip()
        try:
            return int(text)
        except ValueError:
            pass
        # RFC-3339; Python 3.10 fromisoformat does not accept a Z suffix
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            parsed = datetime.fromisoformat(text)
        except ValueError:
            raise ParseError(
                "bad_timestamp", f"bad timestamp: {value!r}", line_no
            ) from None
        if parsed.tzinfo is None:
            parsed = parsed.replace(tzinfo=timezone.utc)
        return (parsed - _EPOCH) // _MS
    raise ParseError("bad_timestamp", f"bad timestamp: {value!r}", line_no)


def _make_event(
    case: object, activity: object, timestamp: object, line_no: int | None
) -> Event:
    if isinstance(case, int) and not isinstance(case, bool):
        case = str(case)
    if not isinstance(case, str) or not case.strip():
        raise ParseError("missing_field", "case id missing or empty", line_no)
    if not isinstance(activity, str) or not activity.strip():
        raise ParseError("missing_field", "activity missing or empty", line_no)
    activity = activity.strip()
    if SEPARATOR in activity:
        raise ParseError(
            "reserved_separator",
            f"activity must not contain {SEPARATOR!r}: {activity!r}",
            line_no,
        )
    return Event(case.strip(), activity, _parse_timestamp(timestamp, line_no))


def parse_event(line: str, fmt: str = "jsonl", line_no: int | None = None) -> Event:
    """Parse one input line into an Event.

    ``fmt`` is "jsonl" (object with keys case, activity, timestamp) or
    "csv" (data row case_id,activity,timestamp).  Timestamps are integer
    milliseconds since the epoch or RFC-3339 strings; naive datetimes are
    taken as UTC.  Raises ParseError with a stable code on bad input.
    """
    if fmt == "jsonl":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError("bad_json", f"invalid JSON: {exc}", line_no) from None
        if not isinstance(obj, dict):
            raise ParseError("bad_json", "event line must be a JSON object", line_no)
        if not {"case", "activity", "timestamp"} <= obj.keys():
            raise ParseError(
                "missing_field", "need keys case, activity, timestamp", line_no
            )
        return _make_event(obj["case"], obj["activity"], obj["timestamp"], line_no)
    if fmt == "csv":
        row = next(csv.reader([line]))
        if len(row) != len(CSV_HEADER):
            raise ParseError(
                "bad_csv", f"expected {len(CSV_HEADER)} columns, got {len(row)}", line_no
            )
        return _make_event(row[0], row[1], row[2], line_no)
    raise ValueError(f"unknown format: {fmt!r}")


@dataclass(frozen=True)
class SourceConfig:
    """Where events come from and how strictly to treat their order.

    ``replay_speed`` of None replays as fast as possible; a positive
    multiplier paces delivery against the event timestamps (1.0 is
    real time).  For ``tcp_listen`` the path is ignored.
    """

    kind: str
    path: str = ""
    replay_speed: float | None = None
    strict_order: bool = True

    def __post_init__(self) -> None:
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind: {self.kind!r}")
        if self.kind in (FILE_JSONL, FILE_CSV) and not self.path:
            raise ValueError("file sources need a path")
        if self.replay_speed is not None and self.replay_speed <= 0:
            raise ValueError("replay_speed must be positive")


@dataclass
class ReplayStats:
    delivered: int = 0
    dropped: int = 0
    wall_seconds: float = 0.0

    @property
    def events_per_sec(self) -> float:
        if self.wall_seconds <= 0.0:
            return 0.0
        return self.delivered / self.wall_seconds


def replay(source: SourceConfig, sink: Callable[[Event], None]) -> ReplayStats:
    """Feed a file source through ``sink`` in file order.

    Strict ordering raises OrderingError on the first timestamp
    regression; lenient ordering drops and counts regressing events.
    Blank lines are skipped; the CSV header row is required.
    """
    if source.kind not in (FILE_JSONL, FILE_CSV):
        raise ValueError("replay only handles file sources")
    fmt = "csv" if source.kind == FILE_CSV else "jsonl"
    stats = ReplayStats()
    last_ts: int | None = None
    first_ts: int | None = None
    wall_start = time.perf_counter()
    header_seen = fmt != "csv"
    with open(source.path, encoding="utf-8", newline="") as fp:
        for line_no, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            if not header_seen:
                header_seen = True
                cells = [c.strip() for c in next(csv.reader([line]))]
                if [c.lower() for c in cells] == list(CSV_HEADER):
                    continue
                raise ParseError(
                    "missing_header",
                    f"first CSV line must be the header {','.join(CSV_HEADER)}",
                    line_no,
                )
            event = parse_event(line, fmt, line_no)
            if last_ts is not None and event.timestamp < last_ts:
                if source.strict_order:
                    raise OrderingError(
                        f"timestamp went backwards at line {line_no}: "
                        f"{event.timestamp} < {last_ts}"
                    )
                stats.dropped += 1
                continue
            last_ts = event.timestamp
            if source.replay_speed is not None:
                if first_ts is None:
                    first_ts = event.timestamp
                due = wall_start + (event.timestamp - first_ts) / (
                    1000.0 * source.replay_speed
                )
                delay = due - time.perf_counter()
                if delay > 0:
                    time.sleep(delay)
            sink(event)
            stats.delivered += 1
    stats.wall_seconds = time.perf_counter() - wall_start
    return stats


# --- TCP listener ---------------------------------------------------------

_STOP = object()


class _TcpServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True
    owner: "StreamServer"


class _StreamHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        owner = self.server.owner  # type: ignore[attr-defined]
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            try:
                event = parse_event(line, "jsonl")
            except ParseError as exc:
                owner._note_parse_error()
                self._reply(f"ERR {exc.code}: {exc}")
                continue
            if not owner._enqueue(event) and owner.strict_order:
                self._reply("ERR out_of_order: timestamp went backwards")

    def _reply(self, message: str) -> None:
        try:
            self.wfile.write((message + "\n").encode("utf-8"))
        except OSError:
            pass  # client already gone; keep serving others


@dataclass
class ServerStats:
    received: int = 0
    delivered: int = 0
    dropped: int = 0
    parse_errors: int = 0


class StreamServer:
    """Line-protocol TCP listener feeding one ordered pipeline.

    Each connection sends one JSON event per line.  Bad lines are
    answered with ``ERR <code>: <detail>`` and the connection stays up.
    Events from all connections pass through a single queue in arrival
    order; a single consumer thread calls ``on_event``, so downstream
    state needs no locking.  Timestamp regressions are rejected at the
    door: silently counted in lenient mode, answered with an ERR line in
    strict mode.  The server never crashes on a bad or out-of-order line.
    """

    def __init__(
        self,
        on_event: Callable[[Event], None],
        host: str = "127.0.0.1",
        port: int = 0,
        strict_order: bool = True,
    ) -> None:
        self.on_event = on_event
        self.strict_order = strict_order
        self.stats = ServerStats()
        self._lock = threading.Lock()
        self._last_ts: int | None = None
        self._queue: queue.Queue = queue.Queue()
        self._server = _TcpServer((host, port), _StreamHandler)
        self._server.owner = self
        self._serve_thread = threading.Thread(
            target=self._server.serve_forever, daemon=True
        )
        self._consume_thread = threading.Thread(target=self._consume, daemon=True)
        self._started = False

    @property
    def address(self) -> tuple[str, int]:
        """Actual (host, port); useful when bound to port 0."""
        host, port = self._server.server_address[:2]
        return str(host), int(port)

    def start(self) -> None:
        self._serve_thread.start()
        self._consume_thread.start()
        self._started = True

    def stop(self, timeout: float = 5.0) -> ServerStats:
        """Stop accepting, drain the queue, and return final counters."""
        self._server.shutdown()
        self._server.server_close()
        if self._started:
            self._queue.put(_STOP)
            self._consume_thread.join(timeout)
        return self.stats

    def _note_parse_error(self) -> None:
        with self._lock:
            self.stats.parse_errors += 1

    def _enqueue(self, event: Event) -> bool:
        # the order check and the queue position must be one atomic step,
        # otherwise two connections could interleave inconsistently
        with self._lock:
            self.stats.received += 1
            if self._last_ts is not None and event.timestamp < self._last_ts:
                self.stats.dropped += 1
                return False
            self._last_ts = event.timestamp
            self._queue.put(event)
            return True

    def _consume(self) -> None:
        while True:
            item = self._queue.get()
            if item is _STOP:
                return
            self.on_event(item)
            self.stats.delivered += 1


# --- serialization --------------------------------------------------------


def event_to_json_line(event: Event) -> str:
    return json.dumps(
        {"case": event.case_id, "activity": event.activity, "timestamp": event.timestamp},
        separators=(",", ":"),
    )


def write_events_jsonl(events: Iterable[Event], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fp:
        for event in events:
            fp.write(event_to_json_line(event) + "\n")


def write_events_csv(events: Iterable[Event], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(CSV_HEADER)
        for event in events:
            writer.writerow((event.case_id, event.activity, event.timestamp))


def window_record_to_json(record: WindowRecord) -> str:
    """One window record as a single JSON line with a stable key order."""
    return json.dumps(
        {
            "index": record.index,
            "size": record.size,
            "first_ts": record.first_ts,
            "last_ts": record.last_ts,
            "coverage": record.coverage,
            "completeness": record.completeness,
            "chao1": record.chao1,
            "threshold": record.threshold,
            "force_closed": record.force_closed,
            "events": [
                {"case": e.case_id, "activity": e.activity, "timestamp": e.timestamp}
                for e in record.events
            ],
        },
        separators=(",", ":"),
    )


def write_window_record(record: WindowRecord, fp: io.TextIOBase) -> None:
    fp.write(window_record_to_json(record) + "\n")


def parse_window_record(line: str) -> WindowRecord:
    """Inverse of window_record_to_json."""
    obj = json.loads(line)
    events = tuple(
        Event(e["case"], e["activity"], e["timestamp"]) for e in obj["events"]
    )
    return WindowRecord(
        index=obj["index"],
        events=events,
        size=obj["size"],
        first_ts=obj["first_ts"],
        last_ts=obj["last_ts"],
        coverage=obj["coverage"],
        completeness=obj["completeness"],
        chao1=obj["chao1"],
        threshold=obj["threshold"],
        force_closed=obj["force_closed"],
    )


def write_metrics_csv(
    path: str, header: Sequence[str], rows: Iterable[Sequence[object]]
) -> None:
    """Write one metric series; no rows still produces the header line."""
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
