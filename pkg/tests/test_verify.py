import json

import pytest

from minsky_clone.verify import CORPUS, SUITES, load_fixture, run_suite

from conftest import machine

FAST = ("trivial", "pingpong")


@pytest.fixture(scope="module")
def reports():
    cache = {}

    def get(name, suite, **kw):
        key = (name, suite, tuple(sorted(kw.items())))
        if key not in cache:
            cache[key] = run_suite(machine(name), suite, name=name, **kw)
        return cache[key]
    return get


def statuses(rep):
    return {c.id: c.status for c in rep.checks}


def test_fixtures_load():
    for name in CORPUS:
        assert load_fixture(name).is_complete()


@pytest.mark.parametrize("name", FAST)
@pytest.mark.parametrize("suite", SUITES)
def test_small_machines_have_no_failures(reports, name, suite):
    rep = reports(name, suite)
    assert rep.passed, rep.to_text()
    assert rep.checks


def test_encoding_example_only_runs_on_example(reports):
    assert set(statuses(reports("trivial", "encoding-example")).values()) == {"skipped"}
    assert set(statuses(reports("example", "encoding-example")).values()) == {"pass"}


def test_example_basic_facts(reports):
    st = statuses(reports("example", "basic-facts"))
    assert st.pop("basic.MMp-state-agreement") == "fail"
    assert set(st.values()) == {"pass"}
    rep = reports("example", "basic-facts")
    bad = [c for c in rep.checks if c.status == "fail"][0]
    assert bad.witness and "M(" in bad.witness


def test_pingpong_backward_direction_is_checked(reports):
    st = statuses(reports("pingpong", "coding-theorem"))
    assert st["coding.backward.m3"] == "pass" and st["coding.backward.m4"] == "pass"


def test_unbounded_tools_checks_skip(reports):
    st = statuses(reports("unbounded", "tools"))
    assert st["tools.capacity"] == "skipped" and st["tools.chi-compatible"] == "pass"


def test_budget_turns_into_skip(reports):
    rep = reports("pingpong", "coding-theorem", budget=50)
    assert rep.passed
    assert "skipped" in statuses(rep).values()
    assert any("budget" in c.detail for c in rep.checks if c.status == "skipped")


def test_reports_are_deterministic(reports):
    a = reports("pingpong", "relations-lemmas")
    b = run_suite(machine("pingpong"), "relations-lemmas", name="pingpong", workers=3)
    assert a.to_text() == b.to_text()
    assert a.to_jsonl() == b.to_jsonl()


def test_report_formats(reports):
    rep = reports("trivial", "t-halting")
    text = rep.to_text()
    lines = text.splitlines()
    assert lines[0] == "suite t-halting" and lines[2] == "seed 0xc10e"
    assert lines[-1] == "summary: 2 passed, 0 failed, 0 skipped"
    records = [json.loads(line) for line in rep.to_jsonl().splitlines()]
    assert [r["id"] for r in records] == [c.id for c in rep.checks]
    assert all(r["millis"] is None for r in records)
    assert "ms" in rep.to_text(timings=True)


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite(machine("trivial"), "no-such-suite")
