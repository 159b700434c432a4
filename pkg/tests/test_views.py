"""Species extraction views: emission rules, case lifecycle, eviction."""

from __future__ import annotations

import pytest

from coverwin import Event, SpeciesView, ViewConfig
from coverwin.views import (
    ACTIVITY_NGRAM,
    DIRECTLY_FOLLOWS,
    MAX_NGRAM_ORDER,
    TRACE_VARIANT,
)

from conftest import make_events


def collect(view, events):
    out = []
    for ev in events:
        out.extend(view.extract(ev))
    return out


def test_config_validation():
    with pytest.raises(ValueError):
        ViewConfig(kind="nope")
    with pytest.raises(ValueError):
        ViewConfig(ngram_order=0)
    with pytest.raises(ValueError):
        ViewConfig(ngram_order=MAX_NGRAM_ORDER + 1)
    with pytest.raises(ValueError):
        ViewConfig(case_timeout=0)


def test_unigram_emits_every_event():
    view = SpeciesView(ViewConfig(ACTIVITY_NGRAM, ngram_order=1))
    assert collect(view, make_events("ABC")) == ["A", "B", "C"]


def test_bigram_needs_two_events_per_case():
    view = SpeciesView(ViewConfig(ACTIVITY_NGRAM, ngram_order=2))
    events = make_events("ABC")
    assert view.extract(events[0]) == []
    assert view.extract(events[1]) == ["A|B"]
    assert view.extract(events[2]) == ["B|C"]


def test_trigram_window_slides():
    view = SpeciesView(ViewConfig(ACTIVITY_NGRAM, ngram_order=3))
    assert collect(view, make_events("ABCD")) == ["A|B|C", "B|C|D"]


def test_ngram_context_is_per_case():
    view = SpeciesView(ViewConfig(ACTIVITY_NGRAM, ngram_order=2))
    a = make_events("AB", case_id="a", start=1000)
    b = make_events("XY", case_id="b", start=1500)
    # interleave the two cases
    order = [a[0], b[0], a[1], b[1]]
    assert collect(view, order) == ["A|B", "X|Y"]


def test_directly_follows_pairs():
    view = SpeciesView(ViewConfig(DIRECTLY_FOLLOWS))
    assert collect(view, make_events("ABAC")) == ["A|B", "B|A", "A|C"]


def test_directly_follows_ignores_other_cases():
    view = SpeciesView(ViewConfig(DIRECTLY_FOLLOWS))
    a = make_events("AB", case_id="a")
    b = make_events("Z", case_id="b", start=1500)
    assert collect(view, [a[0], b[0], a[1]]) == ["A|B"]


def test_trace_variant_emits_only_on_flush():
    view = SpeciesView(ViewConfig(TRACE_VARIANT))
    events = make_events("ABC", case_id="a") + make_events("XY", case_id="b")
    assert collect(view, events) == []
    variants = view.flush_cases(None)
    assert sorted(variants) == ["A|B|C", "X|Y"]
    assert view.open_cases == 0


def test_trace_variant_keeps_full_history():
    view = SpeciesView(ViewConfig(TRACE_VARIANT))
    collect(view, make_events("ABCDEFGH"))
    assert view.flush_cases(None) == ["A|B|C|D|E|F|G|H"]


def test_timeout_evicts_only_idle_cases():
    cfg = ViewConfig(TRACE_VARIANT, case_timeout=1000)
    view = SpeciesView(cfg)
    view.extract(Event("old", "A", 1000))
    view.extract(Event("new", "B", 2500))
    # old is idle (1000 + 1000 < 3000), new is not (2500 + 1000 >= 3000)
    assert view.flush_cases(3000) == ["A"]
    assert view.open_cases == 1


def test_timeout_boundary_is_exclusive():
    cfg = ViewConfig(TRACE_VARIANT, case_timeout=1000)
    view = SpeciesView(cfg)
    view.extract(Event("a", "A", 1000))
    # exactly timeout ms idle: still alive
    assert view.flush_cases(2000) == []
    assert view.flush_cases(2001) == ["A"]


def test_eviction_drops_ngram_context():
    cfg = ViewConfig(DIRECTLY_FOLLOWS, case_timeout=1000)
    view = SpeciesView(cfg)
    assert view.extract(Event("a", "A", 1000)) == []
    assert view.flush_cases(5000) == []
    # context was evicted, so the pair A|B never forms
    assert view.extract(Event("a", "B", 5000)) == []
    assert view.extract(Event("a", "C", 5100)) == ["B|C"]


def test_touch_refreshes_recency_order():
    cfg = ViewConfig(TRACE_VARIANT, case_timeout=1000)
    view = SpeciesView(cfg)
    view.extract(Event("a", "A", 1000))
    view.extract(Event("b", "B", 1100))
    view.extract(Event("a", "C", 1900))
    # b is now the oldest; only it times out
    assert view.flush_cases(2500) == ["B"]
    assert view.open_cases == 1


def test_event_is_immutable():
    ev = Event("c", "A", 1)
    with pytest.raises(AttributeError):
        ev.activity = "B"
