"""Command-line interface.

Subcommands: analyze (window a file), estimate (whole-file estimates),
driftgen (synthesize drifting streams), bench (latency, throughput,
drift reaction, strategy comparison), listen (TCP ingestion).

Every subcommand accepts ``--config FILE`` with ``key = value`` lines;
keys are the flag names with underscores.  Precedence: command-line flag
over config file over built-in default.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys
import threading
from dataclasses import replace
from typing import Callable, Sequence

from . import bench, driftgen
from .abundance import AbundanceStats, estimates
from .baselines import (
    BASELINE_KINDS,
    COUNT_TUMBLING,
    LANDMARK,
    BaselineConfig,
    BaselineWindow,
)
from .stream_io import (
    FILE_CSV,
    FILE_JSONL,
    OrderingError,
    ParseError,
    SourceConfig,
    StreamServer,
    replay,
    window_record_to_json,
    write_events_csv,
    write_events_jsonl,
    write_metrics_csv,
)
from .views import VIEW_KINDS, SpeciesView, ViewConfig
from .window import AdaptiveWindow, ThresholdState, WindowRecord

SIZES_HEADER = ("index", "size", "first_ts", "last_ts", "coverage", "threshold")


def _fmt(value: float) -> str:
    return format(value, ".6g")


def _outpath(outdir: str, name: str) -> str:
    os.makedirs(outdir, exist_ok=True)
    return os.path.join(outdir, name)


def _speed(text: str) -> float | None:
    if text == "max":
        return None
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a speed: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("speed must be positive")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a size list: {text!r}") from None


# --- flag groups ------------------------------------------------------------


def _add_config_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--config",
        default=None,
        metavar="FILE",
        help="key = value file supplying defaults for this command's flags",
    )


def _add_source_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", help="event log (.jsonl or .csv)")
    p.add_argument(
        "--format",
        choices=("auto", "jsonl", "csv"),
        default="auto",
        help="input format; auto picks by file extension",
    )
    p.add_argument(
        "--lenient",
        action="store_true",
        help="drop and count out-of-order events instead of failing",
    )
    p.add_argument(
        "--speed",
        type=_speed,
        default="max",
        help="replay pacing: 'max' or a multiplier of real time",
    )


def _add_view_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--view",
        choices=VIEW_KINDS,
        default="activity_ngram",
        help="species definition",
    )
    p.add_argument("--ngram", type=int, default=1, help="n-gram order (1..5)")
    p.add_argument(
        "--case-timeout",
        type=int,
        default=30 * 60 * 1000,
        help="ms of stream-time inactivity after which a case is complete",
    )


def _add_strategy_flags(
    p: argparse.ArgumentParser, default_strategy: str = "adaptive"
) -> None:
    p.add_argument(
        "--strategy",
        choices=("adaptive",) + BASELINE_KINDS,
        default=default_strategy,
        help="windowing strategy",
    )
    p.add_argument("--ct0", type=float, default=0.9, help="initial closing threshold")
    p.add_argument("--sf0", type=float, default=0.2, help="initial smoothing factor")
    p.add_argument("--dr", type=float, default=0.1, help="threshold decay on stagnation")
    p.add_argument("--mt", type=float, default=0.5, help="threshold floor")
    p.add_argument(
        "--delta", type=float, default=0.01, help="stagnation tolerance on deltas"
    )
    p.add_argument(
        "--stagnation-window",
        type=int,
        default=5,
        help="trailing coverage points the stagnation check inspects",
    )
    p.add_argument(
        "--min-window-size", type=int, default=5, help="smallest adaptive window"
    )
    p.add_argument(
        "--count", type=int, default=20, help="events per count_tumbling window"
    )
    p.add_argument(
        "--duration", type=int, default=60_000, help="ms per time_tumbling window"
    )
    p.add_argument(
        "--landmark-activity", default="A", help="activity that opens a landmark window"
    )


def _add_output_flags(p: argparse.ArgumentParser, verbose_flag: bool = True) -> None:
    p.add_argument(
        "--windows-out", default=None, metavar="FILE", help="write window records JSONL"
    )
    p.add_argument(
        "--sizes-csv", default=None, metavar="FILE", help="write per-window metrics CSV"
    )
    if verbose_flag:
        p.add_argument(
            "--verbose",
            action="store_true",
            help="print a JSON summary of every closed window to stderr",
        )
    else:
        p.add_argument(
            "--quiet",
            action="store_true",
            help="suppress the per-window JSON lines on stderr",
        )


# --- shared construction ----------------------------------------------------


def _source_kind(path: str, fmt: str) -> str:
    if fmt == "csv" or (fmt == "auto" and path.lower().endswith(".csv")):
        return FILE_CSV
    return FILE_JSONL


def _make_source(args: argparse.Namespace) -> SourceConfig:
    speed = args.speed if args.speed != "max" else None
    return SourceConfig(
        kind=_source_kind(args.file, args.format),
        path=args.file,
        replay_speed=speed,
        strict_order=not args.lenient,
    )


def _make_view(args: argparse.Namespace) -> SpeciesView:
    return SpeciesView(
        ViewConfig(
            kind=args.view, ngram_order=args.ngram, case_timeout=args.case_timeout
        )
    )


def _make_strategy(args: argparse.Namespace) -> bench.Strategy:
    view = _make_view(args)
    if args.strategy == "adaptive":
        threshold = ThresholdState(
            ct=args.ct0,
            sf=args.sf0,
            dr=args.dr,
            mt=args.mt,
            delta=args.delta,
            w=args.stagnation_window,
        )
        return AdaptiveWindow(view, threshold, min_window_size=args.min_window_size)
    config = BaselineConfig(
        kind=args.strategy,
        count=args.count,
        duration=args.duration,
        landmark_activity=args.landmark_activity,
    )
    return BaselineWindow(view, config)


def _sizes_rows(records: Sequence[WindowRecord]) -> list[tuple]:
    return [
        (r.index, r.size, r.first_ts, r.last_ts, _fmt(r.coverage), _fmt(r.threshold))
        for r in records
    ]


class _RecordWriter:
    """Streams closed windows to the configured outputs as they happen."""

    def __init__(self, args: argparse.Namespace, verbose: bool) -> None:
        self.records: list[WindowRecord] = []
        self.verbose = verbose
        self._windows_fp = (
            open(args.windows_out, "w", encoding="utf-8") if args.windows_out else None
        )
        self._sizes_csv = args.sizes_csv

    def emit(self, record: WindowRecord) -> None:
        self.records.append(record)
        if self._windows_fp is not None:
            self._windows_fp.write(window_record_to_json(record) + "\n")
            self._windows_fp.flush()
        if self.verbose:
            summary = {
                "index": record.index,
                "size": record.size,
                "coverage": round(record.coverage, 6),
                "threshold": round(record.threshold, 6),
                "force_closed": record.force_closed,
            }
            print(json.dumps(summary), file=sys.stderr)

    def close(self) -> None:
        if self._windows_fp is not None:
            self._windows_fp.close()
        if self._sizes_csv:
            write_metrics_csv(self._sizes_csv, SIZES_HEADER, _sizes_rows(self.records))


def _print_run_summary(records: list[WindowRecord], delivered: int, dropped: int) -> None:
    if records:
        sizes = [r.size for r in records]
        mean_size = sum(sizes) / len(sizes)
        mean_cov = sum(r.coverage for r in records) / len(records)
        forced = sum(1 for r in records if r.force_closed)
        print(
            f"events={delivered} dropped={dropped} windows={len(records)} "
            f"mean_size={_fmt(mean_size)} min_size={min(sizes)} "
            f"max_size={max(sizes)} mean_coverage={_fmt(mean_cov)} forced={forced}"
        )
    else:
        print(f"events={delivered} dropped={dropped} windows=0")


# --- subcommands ------------------------------------------------------------


def _run_estimate(args: argparse.Namespace) -> int:
    source = _make_source(args)
    view = _make_view(args)
    stats = AbundanceStats()

    def sink(event) -> None:
        for species in view.extract(event):
            stats.observe(species)
        for species in view.flush_cases(event.timestamp):
            stats.observe(species)

    replay_stats = replay(source, sink)
    for species in view.flush_cases(None):
        stats.observe(species)
    est = estimates(stats)
    print(
        f"n={stats.n} species={stats.s_n} f1={stats.f1} f2={stats.f2} "
        f"chao1={_fmt(est.chao1)} completeness={_fmt(est.completeness)} "
        f"coverage={_fmt(est.coverage)} events={replay_stats.delivered} "
        f"dropped={replay_stats.dropped}"
    )
    return 0


def cmd_estimate(args: argparse.Namespace) -> int:
    return _run_estimate(args)


def cmd_analyze(args: argparse.Namespace) -> int:
    if args.estimate_only:
        return _run_estimate(args)
    source = _make_source(args)
    strategy = _make_strategy(args)
    writer = _RecordWriter(args, verbose=args.verbose)

    def sink(event) -> None:
        record = strategy.process_event(event)
        if record is not None:
            writer.emit(record)

    try:
        replay_stats = replay(source, sink)
        final = strategy.flush(None)
        if final is not None:
            writer.emit(final)
    finally:
        writer.close()
    _print_run_summary(writer.records, replay_stats.delivered, replay_stats.dropped)
    return 0


def cmd_driftgen(args: argparse.Namespace) -> int:
    if (args.scenario is None) == (args.spec is None):
        print("driftgen: give exactly one of --scenario or --spec", file=sys.stderr)
        return 2
    try:
        spec = (
            driftgen.builtin_scenario(args.scenario)
            if args.scenario
            else driftgen.spec_from_json(args.spec)
        )
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"driftgen: bad spec: {exc}", file=sys.stderr)
        return 2
    events, annotations = driftgen.generate(spec)
    if args.out_format == "csv" or (
        args.out_format == "auto" and args.out.lower().endswith(".csv")
    ):
        write_events_csv(events, args.out)
    else:
        write_events_jsonl(events, args.out)
    annotations_path = args.annotations or args.out + ".annotations.json"
    driftgen.write_annotations(annotations, annotations_path)
    print(
        f"events={len(events)} cases={spec.total_cases} kind={spec.kind} "
        f"seed={spec.seed} drift_case_indices={list(annotations.drift_case_indices)} "
        f"out={args.out} annotations={annotations_path}"
    )
    return 0


def cmd_bench_latency(args: argparse.Namespace) -> int:
    rows = bench.measure_latency(args.sizes, trials=args.trials)
    for row in rows:
        print(
            f"window_size={row.window_size} "
            f"median_seconds={_fmt(row.median_seconds)} "
            f"p95_seconds={_fmt(row.p95_seconds)}"
        )
    r2 = bench.linear_fit_r2(
        [r.window_size for r in rows], [r.median_seconds for r in rows]
    )
    print(f"latency_fit_r2={_fmt(r2)}")
    if args.outdir:
        write_metrics_csv(
            _outpath(args.outdir, "latency.csv"),
            ("window_size", "median_seconds", "p95_seconds"),
            [(r.window_size, _fmt(r.median_seconds), _fmt(r.p95_seconds)) for r in rows],
        )
    return 0


def cmd_bench_throughput(args: argparse.Namespace) -> int:
    source = _make_source(args)
    report = bench.measure_throughput(source, lambda: _make_strategy(args), args.runs)
    print(
        f"events={report.events} runs={len(report.runs)} "
        f"mean_eps={_fmt(report.mean)} std_eps={_fmt(report.std)} "
        f"min_eps={_fmt(min(report.runs))} max_eps={_fmt(max(report.runs))}"
    )
    if args.outdir:
        write_metrics_csv(
            _outpath(args.outdir, "throughput.csv"),
            ("run", "events", "events_per_sec"),
            [(i, report.events, _fmt(r)) for i, r in enumerate(report.runs)],
        )
    return 0


def cmd_bench_drift(args: argparse.Namespace) -> int:
    spec = driftgen.builtin_scenario(args.scenario)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    events, annotations = driftgen.generate(spec)
    records = bench.run_stream(events, _make_strategy(args))
    series = bench.size_series(records, annotations.drift_case_indices[:1])
    report = bench.drift_adaptation_stats(
        series, series.drift_markers[0], before=args.before, after=args.after
    )
    print(
        f"windows={len(series.sizes)} drift_window={report.drift_window} "
        f"mean_relative_change={_fmt(report.mean_relative_change)} "
        f"std_relative_change={_fmt(report.std_relative_change)} "
        f"coefficient_of_variation={_fmt(report.coefficient_of_variation)} "
        f"pre_mean={_fmt(report.pre_mean)} during_mean={_fmt(report.during_mean)} "
        f"post_mean={_fmt(report.post_mean)}"
    )
    if args.outdir:
        write_metrics_csv(
            _outpath(args.outdir, "window_sizes.csv"),
            SIZES_HEADER,
            _sizes_rows(records),
        )
        write_metrics_csv(
            _outpath(args.outdir, "drift_report.csv"),
            (
                "drift_window",
                "mean_relative_change",
                "std_relative_change",
                "coefficient_of_variation",
                "pre_mean",
                "during_mean",
                "post_mean",
            ),
            [
                (
                    report.drift_window,
                    _fmt(report.mean_relative_change),
                    _fmt(report.std_relative_change),
                    _fmt(report.coefficient_of_variation),
                    _fmt(report.pre_mean),
                    _fmt(report.during_mean),
                    _fmt(report.post_mean),
                )
            ],
        )
    return 0


def cmd_bench_compare(args: argparse.Namespace) -> int:
    spec = driftgen.builtin_scenario(args.scenario)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    events, annotations = driftgen.generate(spec)

    def view() -> SpeciesView:
        return SpeciesView(
            ViewConfig(
                kind=args.view, ngram_order=args.ngram, case_timeout=args.case_timeout
            )
        )

    factories: dict[str, Callable[[], bench.Strategy]] = {
        "adaptive": lambda: AdaptiveWindow(
            view(),
            ThresholdState(
                ct=args.ct0,
                sf=args.sf0,
                dr=args.dr,
                mt=args.mt,
                delta=args.delta,
                w=args.stagnation_window,
            ),
            min_window_size=args.min_window_size,
        ),
        "count_tumbling": lambda: BaselineWindow(
            view(), BaselineConfig(COUNT_TUMBLING, count=args.count)
        ),
        "landmark": lambda: BaselineWindow(
            view(),
            BaselineConfig(LANDMARK, landmark_activity=args.landmark_activity),
        ),
    }
    summaries = bench.accuracy_by_strategy(
        events, annotations.pool_per_case, spec.pools, factories
    )
    print(f"{'strategy':<16} {'windows':>7} {'precision':>9} {'recall':>7} {'f1':>7}")
    for s in summaries:
        print(
            f"{s.name:<16} {s.windows:>7} {s.mean_precision:>9.4f} "
            f"{s.mean_recall:>7.4f} {s.mean_f1:>7.4f}"
        )
    if args.outdir:
        write_metrics_csv(
            _outpath(args.outdir, "comparison.csv"),
            ("strategy", "windows", "mean_precision", "mean_recall", "mean_f1"),
            [
                (
                    s.name,
                    s.windows,
                    _fmt(s.mean_precision),
                    _fmt(s.mean_recall),
                    _fmt(s.mean_f1),
                )
                for s in summaries
            ],
        )
    return 0


def cmd_listen(
    args: argparse.Namespace, stop_event: threading.Event | None = None
) -> int:
    strategy = _make_strategy(args)
    writer = _RecordWriter(args, verbose=not args.quiet)

    def on_event(event) -> None:
        record = strategy.process_event(event)
        if record is not None:
            writer.emit(record)

    try:
        server = StreamServer(
            on_event,
            host=args.host,
            port=args.port,
            strict_order=not args.lenient,
        )
    except OSError as exc:
        print(f"listen: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return 1
    if stop_event is None:
        stop_event = threading.Event()
        for signum in (signal.SIGINT, signal.SIGTERM):
            signal.signal(signum, lambda *_: stop_event.set())
    server.start()
    host, port = server.address
    print(f"listening on {host}:{port}", file=sys.stderr, flush=True)
    try:
        stop_event.wait()
    finally:
        stats = server.stop()
        final = strategy.flush(None)
        if final is not None:
            writer.emit(final)
        writer.close()
    _print_run_summary(writer.records, stats.delivered, stats.dropped)
    return 0


# --- parser wiring ----------------------------------------------------------


def build_parsers() -> tuple[
    argparse.ArgumentParser, dict[tuple[str, ...], argparse.ArgumentParser]
]:
    parser = argparse.ArgumentParser(
        prog="coverwin",
        description=(
            "Adaptive stream windowing that closes a window once its species "
            "coverage says the window is representative."
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True)
    table: dict[tuple[str, ...], argparse.ArgumentParser] = {}
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = subs.add_parser(
        "analyze", help="window an event log file", formatter_class=fmt
    )
    _add_config_flag(p)
    _add_source_flags(p)
    _add_view_flags(p)
    _add_strategy_flags(p)
    _add_output_flags(p)
    p.add_argument(
        "--estimate-only",
        action="store_true",
        help="skip windowing; print whole-file abundance estimates",
    )
    p.set_defaults(func=cmd_analyze)
    table[("analyze",)] = p

    p = subs.add_parser(
        "estimate", help="whole-file abundance estimates", formatter_class=fmt
    )
    _add_config_flag(p)
    _add_source_flags(p)
    _add_view_flags(p)
    p.set_defaults(func=cmd_estimate)
    table[("estimate",)] = p

    p = subs.add_parser(
        "driftgen", help="generate a drifting event stream", formatter_class=fmt
    )
    _add_config_flag(p)
    p.add_argument(
        "--scenario",
        choices=driftgen.SCENARIO_NAMES,
        default=None,
        help="built-in scenario",
    )
    p.add_argument("--spec", default=None, metavar="FILE", help="JSON drift spec")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.add_argument("--out", required=True, metavar="FILE", help="output event log")
    p.add_argument(
        "--out-format",
        choices=("auto", "jsonl", "csv"),
        default="auto",
        help="output format; auto picks by extension",
    )
    p.add_argument(
        "--annotations",
        default=None,
        metavar="FILE",
        help="ground-truth sidecar path (default: OUT.annotations.json)",
    )
    p.set_defaults(func=cmd_driftgen)
    table[("driftgen",)] = p

    p = subs.add_parser("bench", help="measure the engine")
    bench_subs = p.add_subparsers(dest="bench_mode", required=True)

    b = bench_subs.add_parser(
        "latency", help="per-window-size latency", formatter_class=fmt
    )
    _add_config_flag(b)
    b.add_argument(
        "--sizes",
        type=_int_list,
        default=[50, 100, 150, 200, 250, 300, 350, 400, 450, 500],
        help="comma-separated window sizes",
    )
    b.add_argument("--trials", type=int, default=7, help="timed trials per size")
    b.add_argument("--outdir", default=None, metavar="DIR", help="write latency.csv here")
    b.set_defaults(func=cmd_bench_latency)
    table[("bench", "latency")] = b

    b = bench_subs.add_parser(
        "throughput", help="events per second over a file", formatter_class=fmt
    )
    _add_config_flag(b)
    _add_source_flags(b)
    _add_view_flags(b)
    _add_strategy_flags(b)
    b.add_argument("--runs", type=int, default=5, help="full-file repetitions")
    b.add_argument(
        "--outdir", default=None, metavar="DIR", help="write throughput.csv here"
    )
    b.set_defaults(func=cmd_bench_throughput)
    table[("bench", "throughput")] = b

    b = bench_subs.add_parser(
        "drift", help="window-size reaction around a drift", formatter_class=fmt
    )
    _add_config_flag(b)
    b.add_argument(
        "--scenario",
        choices=driftgen.SCENARIO_NAMES,
        default="sudden",
        help="built-in scenario",
    )
    b.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    b.add_argument("--before", type=int, default=10, help="windows before the drift")
    b.add_argument("--after", type=int, default=20, help="windows after the drift")
    _add_view_flags(b)
    _add_strategy_flags(b)
    b.add_argument(
        "--outdir",
        default=None,
        metavar="DIR",
        help="write window_sizes.csv and drift_report.csv here",
    )
    b.set_defaults(func=cmd_bench_drift)
    table[("bench", "drift")] = b

    b = bench_subs.add_parser(
        "compare",
        help="adaptive vs count vs landmark on one generated log",
        formatter_class=fmt,
    )
    _add_config_flag(b)
    b.add_argument(
        "--scenario",
        choices=driftgen.SCENARIO_NAMES,
        default="sudden",
        help="built-in scenario",
    )
    b.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    _add_view_flags(b)
    b.set_defaults(view="directly_follows")
    _add_strategy_flags(b)
    # Accuracy is scored on directly-follows pairs, so the close criterion
    # must demand pair-level representativeness; the global floor of 0.5 is
    # too permissive for that and would dominate every close decision.
    b.set_defaults(mt=0.75)
    b.add_argument(
        "--outdir", default=None, metavar="DIR", help="write comparison.csv here"
    )
    b.set_defaults(func=cmd_bench_compare)
    table[("bench", "compare")] = b

    p = subs.add_parser(
        "listen", help="ingest events over TCP until interrupted", formatter_class=fmt
    )
    _add_config_flag(p)
    p.add_argument("--host", default="127.0.0.1", help="bind address")
    p.add_argument("--port", type=int, default=0, help="bind port; 0 picks a free one")
    p.add_argument(
        "--lenient",
        action="store_true",
        help="drop out-of-order events silently instead of answering ERR",
    )
    _add_view_flags(p)
    _add_strategy_flags(p)
    _add_output_flags(p, verbose_flag=False)
    p.set_defaults(func=cmd_listen)
    table[("listen",)] = p

    return parser, table


# --- config file ------------------------------------------------------------


def load_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; # starts a comment, blank lines ignored."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fp:
        for line_no, raw in enumerate(fp, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key = value")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(action: argparse.Action, text: str):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        lowered = text.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ValueError(f"expected a boolean for {action.dest}, got {text!r}")
    if action.type is not None:
        return action.type(text)
    return text


def _apply_config(parser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    by_dest = {a.dest: a for a in parser._actions}
    overrides = {}
    for key, text in values.items():
        action = by_dest.get(key)
        if action is None:
            raise ValueError(f"unknown config key: {key}")
        if action.choices is not None and text not in action.choices:
            raise ValueError(
                f"config key {key}: {text!r} is not one of {sorted(action.choices)}"
            )
        overrides[key] = _coerce(action, text)
    parser.set_defaults(**overrides)


def _prescan(argv: Sequence[str]) -> tuple[tuple[str, ...], str | None]:
    """Find the subcommand path and any --config value without parsing.

    Scans the whole argv: --config may come after positionals.  Flag
    values can slip into the path (they are not distinguishable without
    parsing), which is why lookups fall back from two path tokens to one.
    """
    path: list[str] = []
    config: str | None = None
    i = 0
    while i < len(argv):
        token = argv[i]
        if token == "--config":
            if i + 1 < len(argv):
                config = argv[i + 1]
            i += 2
            continue
        if token.startswith("--config="):
            config = token.split("=", 1)[1]
            i += 1
            continue
        if not token.startswith("-") and len(path) < 2:
            path.append(token)
        i += 1
    return tuple(path), config


def main(argv: Sequence[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser, table = build_parsers()
    path, config_path = _prescan(argv)
    if config_path is not None:
        target = table.get(path[:2]) or table.get(path[:1])
        if target is None:
            print("coverwin: --config given without a known command", file=sys.stderr)
            return 2
        try:
            _apply_config(target, load_config_file(config_path))
        except (OSError, ValueError, argparse.ArgumentTypeError) as exc:
            print(f"coverwin: config error: {exc}", file=sys.stderr)
            return 2
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, OrderingError) as exc:
        print(f"coverwin: input error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"coverwin: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"coverwin: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
