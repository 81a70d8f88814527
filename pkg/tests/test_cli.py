import json

import pytest

from minsky_clone.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_machine_run(capsys):
    code, out, err = run(capsys, "machine", "run", "--machine", "example")
    assert code == 0 and "halted after 6 steps" in out
    assert err.startswith("settings: ")


def test_example_alias(capsys):
    a = run(capsys, "machine", "parse", "--machine", "example54")
    b = run(capsys, "machine", "parse", "--machine", "example.mm")
    assert a[0] == b[0] == 0 and a[1] == b[1]


def test_capacity(capsys):
    code, out, _ = run(capsys, "machine", "capacity", "--machine", "example")
    assert code == 0 and "2" in out


def test_machine_file_errors(capsys, tmp_path):
    bad = tmp_path / "bad.mm"
    bad.write_text("1 C 0\n")
    code, _, err = run(capsys, "machine", "parse", str(bad))
    assert code == 2 and "register must be A or B" in err
    gap = tmp_path / "gap.mm"
    gap.write_text("2 A 0\n")
    code, _, err = run(capsys, "rel", "sm", "2", "--machine", str(gap))
    assert code == 2 and "no instruction for state 1" in err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "rel", "sm")[0] == 2
    assert run(capsys, "rel", "gadget", "omega")[0] == 2
    assert run(capsys, "verify", "nonsense")[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_algebra_commands(capsys):
    code, out, _ = run(capsys, "algebra", "op", "M", "(1,0)", "(1,A)", "--machine", "example")
    assert code == 0 and out.strip()
    code, out, _ = run(capsys, "algebra", "build", "--machine", "trivial")
    assert code == 0
    code, out, _ = run(capsys, "algebra", "term-eval", "M(x1, x2)", "(1,0)", "(1,A)", "--machine", "example")
    assert code == 0


def test_sm_determinism_across_workers(capsys):
    outs = {run(capsys, "rel", "sm", "3", "--workers", w)[1] for w in ("1", "4")}
    outs.add(run(capsys, "rel", "sm", "3")[1])
    assert len(outs) == 1
    assert next(iter(outs)).startswith("arity 3\nstates 4\n")


def test_budget_exit_code(capsys, monkeypatch):
    code, _, err = run(capsys, "rel", "sm", "3", "--budget", "10")
    assert code == 2 and "budget" in err
    monkeypatch.setenv("CF_BUDGET_TUPLES", "10")
    code, _, err = run(capsys, "rel", "sm", "3")
    assert code == 2 and "budget=10" in err
    monkeypatch.setenv("CF_WORKERS", "zero")
    assert run(capsys, "rel", "sm", "2")[0] == 2


def test_env_workers(capsys, monkeypatch):
    monkeypatch.setenv("CF_WORKERS", "2")
    _, _, err = run(capsys, "rel", "sm", "2")
    assert "workers=2" in err


def test_relation_files_roundtrip(capsys, tmp_path):
    s3 = tmp_path / "s3.rel"
    assert run(capsys, "rel", "sm", "3", "--out", str(s3))[0] == 0
    code, out, _ = run(capsys, "rel", "project", str(s3), "1,2")
    assert code == 0
    p = tmp_path / "p.rel"
    p.write_text(out)
    code, out, _ = run(capsys, "rel", "classify", str(s3))
    assert code == 0 and out
    code, out, _ = run(capsys, "entail", "eval", "project[1,2](R1)", "--catalog", str(s3))
    assert code == 0
    code, out2, _ = run(capsys, "entail", "check",
                        "PROJECT [1,2] ; INTERSECT { PERMUTE [1,2,3] PRODUCT [R1] }", str(p),
                        "--catalog", str(s3))
    assert code == 0 and "value equals target" in out2


def test_relation_state_header_mismatch(capsys, tmp_path):
    s2 = tmp_path / "s2.rel"
    run(capsys, "rel", "sm", "2", "--machine", "trivial", "--out", str(s2))
    code, _, err = run(capsys, "rel", "classify", str(s2), "--machine", "example")
    assert code == 2


def test_preserves_exit_codes(capsys, tmp_path):
    s2 = tmp_path / "s2.rel"
    run(capsys, "rel", "sm", "2", "--out", str(s2))
    code, out, _ = run(capsys, "entail", "preserves", "M(x1, x2)", str(s2))
    assert code == 0
    code, out, _ = run(capsys, "entail", "preserves", "const (1,A)", str(s2))
    assert code == 1


def test_verify_structured(capsys):
    code, out, _ = run(capsys, "verify", "t-halting", "--machine", "trivial", "--report", "structured")
    assert code == 0
    rows = [json.loads(line) for line in out.splitlines()]
    assert {r["status"] for r in rows} == {"pass"}


def test_verify_failure_exit_code(capsys):
    code, out, _ = run(capsys, "verify", "basic-facts", "--machine", "example")
    assert code == 1 and "[FAIL] basic.MMp-state-agreement" in out


@pytest.mark.parametrize("gid", ["mu", "chi", "gamma"])
def test_gadget_output(capsys, gid):
    code, out, _ = run(capsys, "rel", "gadget", gid, "--machine", "trivial")
    assert code == 0 and out.strip()
