"""End-to-end command-line behavior, driven in-process through main()."""

from __future__ import annotations

import csv
import shutil
import socket
import subprocess
import threading
import time

import pytest

from coverwin.cli import build_parsers, cmd_listen, load_config_file, main
from coverwin.stream_io import (
    event_to_json_line,
    parse_window_record,
    write_events_jsonl,
)

from conftest import DATA_DIR, make_events

WORKED = f"{DATA_DIR}/worked_example.jsonl"


def read_csv(path):
    with open(path, newline="") as fp:
        return list(csv.reader(fp))


def test_no_command_exits_with_usage():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_estimate_worked_example(capsys):
    assert main(["estimate", WORKED]) == 0
    out = capsys.readouterr().out
    assert "n=9 species=5 f1=2 f2=2" in out
    assert "chao1=6 " in out
    assert "completeness=0.833333" in out
    assert "coverage=0.822222" in out
    assert "events=9 dropped=0" in out


def test_estimate_directly_follows_view(capsys):
    assert main(["estimate", WORKED, "--view", "directly_follows"]) == 0
    out = capsys.readouterr().out
    assert "n=8 species=7 f1=6 f2=1" in out
    assert "chao1=25 " in out


def test_analyze_estimate_only_matches_estimate(capsys):
    assert main(["analyze", WORKED, "--estimate-only"]) == 0
    assert "n=9 species=5" in capsys.readouterr().out


def test_analyze_writes_windows_and_sizes(tmp_path, capsys):
    windows_path = str(tmp_path / "win.jsonl")
    sizes_path = str(tmp_path / "sizes.csv")
    code = main(
        [
            "analyze",
            WORKED,
            "--windows-out",
            windows_path,
            "--sizes-csv",
            sizes_path,
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "events=9 dropped=0 windows=" in out

    with open(windows_path, encoding="utf-8") as fp:
        records = [parse_window_record(line) for line in fp]
    assert records
    replayed = [ev for rec in records for ev in rec.events]
    assert len(replayed) == 9  # lossless partition of the input

    rows = read_csv(sizes_path)
    assert rows[0] == ["index", "size", "first_ts", "last_ts", "coverage", "threshold"]
    assert len(rows) == 1 + len(records)


def test_analyze_verbose_prints_window_lines(tmp_path, capsys):
    events = make_events("AAAAAAA")
    path = str(tmp_path / "ev.jsonl")
    write_events_jsonl(events, path)
    assert main(["analyze", path, "--verbose"]) == 0
    err = capsys.readouterr().err
    assert '"index": 0' in err
    assert '"size": 5' in err


def test_analyze_count_strategy(tmp_path, capsys):
    events = make_events("ABCABCABCABCAB")  # 14 events
    path = str(tmp_path / "ev.jsonl")
    write_events_jsonl(events, path)
    code = main(["analyze", path, "--strategy", "count_tumbling", "--count", "7"])
    assert code == 0
    out = capsys.readouterr().out
    assert "windows=2" in out
    assert "mean_size=7" in out


def test_analyze_missing_file_fails(capsys):
    assert main(["analyze", "/nonexistent/ev.jsonl"]) == 1
    assert "coverwin:" in capsys.readouterr().err


def test_analyze_rejects_out_of_order(tmp_path, capsys):
    path = tmp_path / "ev.jsonl"
    lines = [
        '{"case": "c", "activity": "A", "timestamp": 100}',
        '{"case": "c", "activity": "B", "timestamp": 50}',
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert main(["analyze", str(path)]) == 1
    assert "input error" in capsys.readouterr().err


def test_analyze_lenient_drops_and_reports(tmp_path, capsys):
    path = tmp_path / "ev.jsonl"
    lines = [
        '{"case": "c", "activity": "A", "timestamp": 100}',
        '{"case": "c", "activity": "B", "timestamp": 50}',
        '{"case": "c", "activity": "C", "timestamp": 200}',
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    assert main(["analyze", str(path), "--lenient"]) == 0
    assert "dropped=1" in capsys.readouterr().out


def test_driftgen_scenario(tmp_path, capsys):
    out = str(tmp_path / "ev.jsonl")
    assert main(["driftgen", "--scenario", "steady3", "--out", out]) == 0
    line = capsys.readouterr().out
    assert "events=900 cases=300" in line
    assert "seed=21" in line
    with open(out, encoding="utf-8") as fp:
        assert sum(1 for _ in fp) == 900
    with open(out + ".annotations.json", encoding="utf-8") as fp:
        assert "pool_per_case" in fp.read()


def test_driftgen_seed_override(tmp_path, capsys):
    out = str(tmp_path / "ev.jsonl")
    assert main(["driftgen", "--scenario", "steady3", "--seed", "5", "--out", out]) == 0
    assert "seed=5" in capsys.readouterr().out


def test_driftgen_csv_output(tmp_path):
    out = str(tmp_path / "ev.csv")
    assert main(["driftgen", "--scenario", "steady3", "--out", out]) == 0
    rows = read_csv(out)
    assert rows[0] == ["case_id", "activity", "timestamp"]
    assert len(rows) == 901


def test_driftgen_requires_exactly_one_source(tmp_path, capsys):
    out = str(tmp_path / "ev.jsonl")
    assert main(["driftgen", "--out", out]) == 2
    assert (
        main(
            [
                "driftgen",
                "--scenario",
                "steady3",
                "--spec",
                "x.json",
                "--out",
                out,
            ]
        )
        == 2
    )
    err = capsys.readouterr().err
    assert "exactly one" in err


def test_driftgen_bad_spec_file(tmp_path, capsys):
    out = str(tmp_path / "ev.jsonl")
    missing = str(tmp_path / "missing.json")
    assert main(["driftgen", "--spec", missing, "--out", out]) == 2
    assert "bad spec" in capsys.readouterr().err


def test_driftgen_custom_spec(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(
        """
        {"kind": "sudden", "total_cases": 6, "seed": 1, "drift_position": 0.5,
         "pools": [{"variants": [{"activities": ["a", "b"]}]},
                   {"variants": [{"activities": ["a", "c"]}]}]}
        """,
        encoding="utf-8",
    )
    out = str(tmp_path / "ev.jsonl")
    assert main(["driftgen", "--spec", str(spec_path), "--out", out]) == 0
    assert "events=12 cases=6" in capsys.readouterr().out


# --- config files ---------------------------------------------------------------


def test_load_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(
        "# comment\ncount = 7\nmin-window-size = 3  # inline\n\nview=trace_variant\n",
        encoding="utf-8",
    )
    values = load_config_file(str(cfg))
    assert values == {"count": "7", "min_window_size": "3", "view": "trace_variant"}


def test_load_config_file_rejects_bad_line(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("just words\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_config_file(str(cfg))


def test_config_supplies_defaults(tmp_path, capsys):
    events = make_events("ABCABCABCABCAB")
    path = str(tmp_path / "ev.jsonl")
    write_events_jsonl(events, path)
    cfg = tmp_path / "c.cfg"
    cfg.write_text("strategy = count_tumbling\ncount = 7\n", encoding="utf-8")
    assert main(["analyze", path, "--config", str(cfg)]) == 0
    assert "windows=2" in capsys.readouterr().out


def test_flag_beats_config(tmp_path, capsys):
    events = make_events("ABCABCABCABCAB")
    path = str(tmp_path / "ev.jsonl")
    write_events_jsonl(events, path)
    cfg = tmp_path / "c.cfg"
    cfg.write_text("strategy = count_tumbling\ncount = 7\n", encoding="utf-8")
    # count 5 over 14 events: two full windows plus a flushed remainder
    assert main(["analyze", path, "--config", str(cfg), "--count", "5"]) == 0
    assert "windows=3" in capsys.readouterr().out


def test_config_boolean_coercion(tmp_path, capsys):
    path = tmp_path / "ev.jsonl"
    lines = [
        '{"case": "c", "activity": "A", "timestamp": 100}',
        '{"case": "c", "activity": "B", "timestamp": 50}',
        '{"case": "c", "activity": "C", "timestamp": 200}',
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    cfg = tmp_path / "c.cfg"
    cfg.write_text("lenient = yes\n", encoding="utf-8")
    assert main(["analyze", str(path), "--config", str(cfg)]) == 0
    assert "dropped=1" in capsys.readouterr().out


def test_config_unknown_key_fails(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("no_such_flag = 1\n", encoding="utf-8")
    assert main(["analyze", WORKED, "--config", str(cfg)]) == 2
    assert "config error" in capsys.readouterr().err


def test_config_bad_choice_fails(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("view = hexagram\n", encoding="utf-8")
    assert main(["analyze", WORKED, "--config", str(cfg)]) == 2
    assert "config error" in capsys.readouterr().err


def test_config_missing_file_fails(capsys):
    assert main(["analyze", WORKED, "--config", "/nonexistent.cfg"]) == 2
    assert "config error" in capsys.readouterr().err


# --- bench modes -----------------------------------------------------------------


def test_bench_latency(tmp_path, capsys):
    code = main(
        ["bench", "latency", "--sizes", "5,10", "--trials", "2", "--outdir", str(tmp_path)]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "window_size=5" in out
    assert "latency_fit_r2=" in out
    rows = read_csv(str(tmp_path / "latency.csv"))
    assert rows[0] == ["window_size", "median_seconds", "p95_seconds"]
    assert len(rows) == 3


def test_bench_throughput(tmp_path, capsys):
    events = make_events("ABCDE" * 40)
    path = str(tmp_path / "ev.jsonl")
    write_events_jsonl(events, path)
    code = main(["bench", "throughput", path, "--runs", "2", "--outdir", str(tmp_path)])
    assert code == 0
    assert "mean_eps=" in capsys.readouterr().out
    rows = read_csv(str(tmp_path / "throughput.csv"))
    assert rows[0] == ["run", "events", "events_per_sec"]
    assert len(rows) == 3


def test_bench_drift(tmp_path, capsys):
    code = main(["bench", "drift", "--scenario", "steady3", "--outdir", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "drift_window=" in out
    assert "coefficient_of_variation=" in out
    sizes_rows = read_csv(str(tmp_path / "window_sizes.csv"))
    assert sizes_rows[0] == [
        "index",
        "size",
        "first_ts",
        "last_ts",
        "coverage",
        "threshold",
    ]
    report_rows = read_csv(str(tmp_path / "drift_report.csv"))
    assert report_rows[0][0] == "drift_window"
    assert len(report_rows) == 2


def test_bench_compare(tmp_path, capsys):
    code = main(
        ["bench", "compare", "--scenario", "steady3", "--outdir", str(tmp_path)]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "adaptive" in out
    assert "count_tumbling" in out
    assert "landmark" in out
    rows = read_csv(str(tmp_path / "comparison.csv"))
    assert rows[0] == ["strategy", "windows", "mean_precision", "mean_recall", "mean_f1"]
    assert [row[0] for row in rows[1:]] == ["adaptive", "count_tumbling", "landmark"]


def test_bench_compare_help_shows_stricter_floor(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bench", "compare", "--help"])
    assert exc.value.code == 0
    assert "default: 0.75" in capsys.readouterr().out


# --- listen ----------------------------------------------------------------------


def free_port():
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    return port


def test_listen_ingests_until_stopped(tmp_path, capsys):
    windows_path = str(tmp_path / "win.jsonl")
    parser, _ = build_parsers()
    port = free_port()
    args = parser.parse_args(
        [
            "listen",
            "--port",
            str(port),
            "--quiet",
            "--windows-out",
            windows_path,
            "--min-window-size",
            "5",
        ]
    )
    stop = threading.Event()
    result: list[int] = []
    th = threading.Thread(target=lambda: result.append(cmd_listen(args, stop)))
    th.start()
    try:
        deadline = time.monotonic() + 5.0
        sock = None
        while sock is None:
            try:
                sock = socket.create_connection(("127.0.0.1", port), timeout=0.2)
            except OSError:
                if time.monotonic() > deadline:
                    raise
                time.sleep(0.02)
        with sock:
            payload = "".join(
                event_to_json_line(ev) + "\n"
                for ev in make_events("AAAAAA", case_id="c")
            )
            sock.sendall(payload.encode("utf-8"))
            time.sleep(0.3)  # let the consumer drain before stopping
    finally:
        stop.set()
        th.join(timeout=5.0)
    assert result == [0]
    out = capsys.readouterr().out
    assert "events=6" in out
    assert "windows=2" in out
    with open(windows_path, encoding="utf-8") as fp:
        sizes = [parse_window_record(line).size for line in fp]
    assert sizes == [5, 1]


def test_console_script_is_installed(tmp_path):
    exe = shutil.which("coverwin")
    assert exe, "console script not on PATH"
    out_file = str(tmp_path / "ev.jsonl")
    proc = subprocess.run(
        [exe, "driftgen", "--scenario", "steady3", "--out", out_file],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert "events=900" in proc.stdout
