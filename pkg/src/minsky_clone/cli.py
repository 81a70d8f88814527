"""Command-line front end: machines in, relations and reports out.

Coordinates and permutations on the command line are 1-based.  Exit status is
0 on success, 1 when a check fails and 2 on usage, input or budget errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import algebra as alg_mod
from .algebra import OPS, build_algebra, fmt_elem, op_name, parse_elems, parse_term
from .entail import (EntailBudgetExceeded, EntailError, OpTable, SearchBounds, canonical_form_eval, eval_expression,
                     halting_consequence, parse_certificate, parse_expression, preserves, search_entailment)
from .gadgets import GADGETS, build_gadget
from .minsky import Configuration, MachineError, capacity, normalize, parse_machine, run
from .subpower import (DEFAULT_BUDGET, ClosureBudgetExceeded, Relation, build_RI, classify, config_set, generate,
                       parse_relation, project, sequential_relation)
from .verify import DEFAULT_SEED, SUITES, fixture_text, run_suite

FIXTURE_ALIASES = {"example54.mm": "example.mm", "example54": "example.mm"}
DEFAULT_MACHINE = "example.mm"


class UsageError(Exception):
    pass


# -- input resolution ---------------------------------------------------------------------------

def _read_machine_text(spec: str) -> tuple[str, str]:
    path = Path(spec)
    if path.is_file():
        return path.read_text(), str(path)
    name = FIXTURE_ALIASES.get(path.name, path.name)
    if not name.endswith(".mm"):
        name += ".mm"
    try:
        return fixture_text(name), f"fixture {name}"
    except (FileNotFoundError, OSError):
        raise UsageError(f"machine: no such file or bundled fixture: {spec}") from None


def load_machine(spec: str, *, require_complete: bool = True):
    """Read a machine; the algebra needs exactly one instruction per state."""
    text, label = _read_machine_text(spec)
    machine = parse_machine(text)
    if require_complete:
        if not machine.is_complete():
            raise UsageError(f"machine: {label} does not have exactly one instruction per state; "
                             f"run 'machine normalize' first")
        failed = [k for k, ok in machine.assumption_report().items() if not ok]
        if failed:
            print(f"warning: {label} fails normalization assumptions: {', '.join(failed)}", file=sys.stderr)
    return machine, label


def load_relation(path: str, alg) -> Relation:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"rel: cannot read {path}: {exc.strerror}") from None
    try:
        rel = parse_relation(text, base=alg.size)
    except ValueError as exc:
        raise UsageError(f"rel: {path}: {exc}") from None
    for line in text.splitlines():
        head = line.split()
        if head[:1] == ["states"] and int(head[1]) != alg.num_states - 1:
            raise UsageError(f"rel: {path} is over {head[1]} states, the machine has {alg.num_states - 1}")
    return rel


def _coords(text: str, arity: int) -> list[int]:
    try:
        out = [int(x) - 1 for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of coordinates, got {text!r}") from None
    bad = [i + 1 for i in out if not 0 <= i < arity]
    if bad:
        raise UsageError(f"coordinates {bad} out of range 1..{arity}")
    return out


def _element_args(items: list[str]):
    vals = []
    for item in items:
        try:
            xs = parse_elems(item)
        except ValueError as exc:
            raise UsageError(f"algebra: {exc}") from None
        vals.append(xs[0] if len(xs) == 1 else tuple(xs))
    return vals


def _bounds(text: str | None) -> SearchBounds:
    b = SearchBounds()
    if not text:
        return b
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"--bounds expects key=value pairs, got {part!r}")
        key, value = (s.strip() for s in part.split("=", 1))
        if not hasattr(b, key):
            raise UsageError(f"--bounds: unknown key {key!r}")
        setattr(b, key, value if key == "permutations" else int(value))
    return b


def _settings(args) -> dict:
    env_budget = os.environ.get("CF_BUDGET_TUPLES")
    env_workers = os.environ.get("CF_WORKERS")
    try:
        budget = args.budget if args.budget is not None else int(env_budget) if env_budget else DEFAULT_BUDGET
        workers = args.workers if args.workers is not None else int(env_workers) if env_workers else (
            os.cpu_count() or 1)
    except ValueError:
        raise UsageError("CF_BUDGET_TUPLES and CF_WORKERS must be integers") from None
    if workers < 1 or budget < 1:
        raise UsageError("budget and workers must be positive")
    return {"budget": budget, "workers": workers}


def _emit(args, text: str):
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ------------------------------------------------------------------------------------

def cmd_machine(args, cfg) -> int:
    spec = args.file or args.machine
    if args.action == "normalize":
        machine, _ = load_machine(spec, require_complete=False)
        _emit(args, normalize(machine).to_text())
        return 0
    machine, label = load_machine(spec, require_complete=args.action != "parse")
    if args.action == "parse":
        lines = [machine.to_text().rstrip("\n")]
        lines += [f"# {k}: {'yes' if ok else 'no'}" for k, ok in machine.assumption_report().items()]
        _emit(args, "\n".join(lines) + "\n")
        return 0
    if args.action == "run":
        start = Configuration(1, *_registers(args.input))
        res = run(machine, start=start, fuel=args.fuel, keep_trace=True)
        lines = [f"{n}\t{c}" for n, c in enumerate(res.trace)]
        tail = (f"halted after {res.steps} steps, capacity {res.trace_max_sum}" if res.halted else
                f"no halt within {args.fuel} steps, capacity so far {res.trace_max_sum}")
        _emit(args, "\n".join(lines + [tail]) + "\n")
        return 0
    rep = capacity(machine, fuel=args.fuel)
    _emit(args, str(rep) + "\n")
    return 0


def _registers(text: str | None) -> tuple[int, int]:
    if not text:
        return 0, 0
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--input expects 'a,b', got {text!r}") from None
    if a < 0 or b < 0:
        raise UsageError("--input registers must be non-negative")
    return a, b


def cmd_algebra(args, cfg) -> int:
    machine, _ = load_machine(args.machine)
    alg = build_algebra(machine)
    if args.action == "build":
        lines = [f"states {machine.N}", f"domain size {alg.size}",
                 f"elements {' '.join(fmt_elem(e) for e in alg.elements)}",
                 f"operations {', '.join(f'{k}/{v}' for k, v in OPS.items())}"]
        bad = alg.validate()
        lines.append("case lists and vectorized forms agree" if not bad else "disagreements: " + "; ".join(bad))
        if args.table:
            name = op_name(args.table)
            if OPS[name] > 2:
                raise UsageError("--table prints unary and binary operations only")
            t = alg.table(name)
            if OPS[name] == 1:
                lines += [f"{name}({fmt_elem(x)}) = {fmt_elem(int(t[x]))}" for x in alg.elements]
            else:
                lines += [f"{fmt_elem(x)}: " + " ".join(fmt_elem(int(v)) for v in t[x]) for x in alg.elements]
        _emit(args, "\n".join(lines) + "\n")
        return 1 if bad else 0
    if args.action == "op":
        try:
            name = op_name(args.expr)
        except KeyError as exc:
            raise UsageError(f"algebra: {exc.args[0]}") from None
        vals = _element_args(args.args)
        if len(vals) != OPS[name]:
            raise UsageError(f"algebra: {name} takes {OPS[name]} arguments, got {len(vals)}")
        if any(isinstance(v, tuple) for v in vals):
            out = alg_mod.apply_tuplewise(alg, name, [v if isinstance(v, tuple) else (v,) for v in vals])
            _emit(args, ",".join(fmt_elem(v) for v in out) + "\n")
        else:
            _emit(args, fmt_elem(alg.op(name, *vals)) + "\n")
        return 0
    try:
        term = parse_term(args.expr)
    # malformed terms raise from the tokenizer or the arity check
    except (ValueError, KeyError) as exc:
        raise UsageError(f"algebra: bad term: {exc}") from None
    vals = _element_args(args.args)
    out = alg_mod.eval_term(alg, term, vals)
    _emit(args, (",".join(fmt_elem(v) for v in out) if isinstance(out, tuple) else fmt_elem(out)) + "\n")
    return 0


def cmd_rel(args, cfg) -> int:
    machine, _ = load_machine(args.machine)
    alg = build_algebra(machine)
    kw = {"budget": cfg["budget"], "workers": cfg["workers"]}
    a = args.args
    if args.action == "generate":
        gens = []
        for item in a:
            if Path(item).is_file():
                gens += [tuple(r) for r in load_relation(item, alg).rows.tolist()]
            else:
                v = _element_args([item])[0]
                gens.append(v if isinstance(v, tuple) else (v,))
        if not gens:
            raise UsageError("rel generate: give generator tuples like '(1,.),(1,0)' or a relation file")
        if len({len(g) for g in gens}) != 1:
            raise UsageError("rel generate: generators of different lengths")
        rel = generate(alg, gens, **kw)
    elif args.action == "sm":
        rel = sequential_relation(alg, _int(a, 0, "m"), **kw)
    elif args.action == "config":
        if len(a) != 4:
            raise UsageError("rel config <k> <alpha> <beta> <m>")
        k, al, be, m = (_int(a, i, n) for i, n in enumerate(("k", "alpha", "beta", "m")))
        if k not in machine.states:
            raise UsageError(f"rel config: state {k} out of range 0..{machine.N}")
        rel = config_set(alg, k, al, be, m)
    elif args.action == "gadget":
        if len(a) != 1 or a[0] not in GADGETS:
            raise UsageError(f"rel gadget <id>, id one of {', '.join(GADGETS)}")
        rel = build_gadget(alg, a[0])
    else:
        if not a:
            raise UsageError(f"rel {args.action} <relation file>")
        src = load_relation(a[0], alg)
        if args.action == "project":
            if len(a) != 2:
                raise UsageError("rel project <relation file> <coords, 1-based>")
            rel = project(src, _coords(a[1], src.arity))
        elif args.action == "ri":
            rel = build_RI(alg, src, **kw)
        else:
            _emit(args, "\n".join(classify(alg, src).lines()) + "\n")
            return 0
    _emit(args, rel.to_text(states=machine.N))
    return 0


def _int(a, i, name) -> int:
    try:
        v = int(a[i])
    except (IndexError, ValueError):
        raise UsageError(f"expected an integer <{name}>") from None
    if v < 0:
        raise UsageError(f"<{name}> must be non-negative")
    return v


def cmd_entail(args, cfg) -> int:
    machine, _ = load_machine(args.machine)
    alg = build_algebra(machine)
    catalog = [load_relation(p, alg) for p in args.catalog]
    if args.action == "eval":
        text = " ".join(args.args)
        if "INTERSECT" in text.upper():
            rel = canonical_form_eval(alg, catalog, parse_certificate(text))
        else:
            rel = eval_expression(alg, catalog, parse_expression(text))
        _emit(args, rel.to_text(states=machine.N))
        return 0
    if args.action == "check":
        if len(args.args) != 2:
            raise UsageError("entail check <certificate> <target relation file>")
        cert = parse_certificate(args.args[0])
        target = load_relation(args.args[1], alg)
        value = canonical_form_eval(alg, catalog, cert)
        same = value == target
        cons = halting_consequence(alg, catalog, cert, value)
        lines = [f"certificate {cert}", f"value size {len(value)}, target size {len(target)}",
                 "value equals target" if same else "value differs from target",
                 f"halting consequence: {cons.reason}" + ("" if cons.applicable else " (not applicable)")]
        _emit(args, "\n".join(lines) + "\n")
        return 0 if same and cons.holds is not False else 1
    if args.action == "preserves":
        if len(args.args) != 2:
            raise UsageError("entail preserves <operation: name, 'const (i,c)' or term> <relation file>")
        f = OpTable.parse(alg, args.args[0])
        rel = load_relation(args.args[1], alg)
        verdict = preserves(alg, f, rel, seed=args.seed)
        _emit(args, verdict.describe() + "\n")
        return 0 if verdict else 1
    if len(args.args) != 1:
        raise UsageError("entail search <target relation file>")
    target = load_relation(args.args[0], alg)
    res = search_entailment(alg, catalog, target, _bounds(args.bounds))
    _emit(args, res.describe() + "\n")
    return 0


def cmd_verify(args, cfg) -> int:
    machine, label = load_machine(args.machine)
    suites = SUITES if args.suite == "all" else (args.suite,)
    out, ok = [], True
    for s in suites:
        rep = run_suite(machine, s, seed=args.seed, budget=cfg["budget"], workers=cfg["workers"],
                        name=Path(args.machine).name)
        ok &= rep.passed
        out.append(rep.to_jsonl(args.timings) if args.report == "structured" else rep.to_text(args.timings))
    _emit(args, "".join(out) if args.report == "structured" else "\n".join(out))
    return 0 if ok else 1


# -- parser -----------------------------------------------------------------------------------------

def _seed(text: str) -> int:
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--machine", default=DEFAULT_MACHINE,
                        help="machine file or bundled fixture name (default: %(default)s)")
    common.add_argument("--workers", type=int, default=None, help="worker threads (env CF_WORKERS)")
    common.add_argument("--budget", type=int, default=None, help="closure tuple budget (env CF_BUDGET_TUPLES)")
    common.add_argument("--out", default=None, help="write output to this file")
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="sampling seed (default 0xC10E)")

    p = argparse.ArgumentParser(prog="minsky-clone", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("machine", parents=[common], help="parse, normalize and run Minsky machines")
    m.add_argument("action", choices=["parse", "normalize", "run", "capacity"])
    m.add_argument("file", nargs="?", help="machine file (default: --machine)")
    m.add_argument("--fuel", type=int, default=10**6)
    m.add_argument("--input", help="initial registers a,b")

    a = sub.add_parser("algebra", parents=[common], help="the algebra of a machine")
    a.add_argument("action", choices=["build", "op", "term-eval"])
    a.add_argument("expr", nargs="?", help="operation symbol or term")
    a.add_argument("args", nargs="*", help="elements '(i,c)' or tuples '(i,c),(j,d)'")
    a.add_argument("--table", help="with build: print the table of a unary or binary operation")

    r = sub.add_parser("rel", parents=[common], help="subpowers: generation, projection, classification")
    r.add_argument("action", choices=["generate", "project", "classify", "sm", "config", "ri", "gadget"])
    r.add_argument("args", nargs="*")

    e = sub.add_parser("entail", parents=[common], help="evaluate and search entailment certificates")
    e.add_argument("action", choices=["eval", "check", "search", "preserves"])
    e.add_argument("args", nargs="*")
    e.add_argument("--catalog", nargs="*", default=[], help="relation files R1, R2, ...")
    e.add_argument("--bounds", help="search bounds, e.g. max_arity=5,max_atoms=2")

    v = sub.add_parser("verify", parents=[common], help="run check suites")
    v.add_argument("suite", choices=[*SUITES, "all"])
    v.add_argument("--report", choices=["text", "structured"], default="text")
    v.add_argument("--timings", action="store_true", help="include per-check timings (not deterministic)")
    return p


COMMANDS = {"machine": cmd_machine, "algebra": cmd_algebra, "rel": cmd_rel, "entail": cmd_entail,
            "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = _settings(args)
        machine = getattr(args, "file", None) or args.machine
        print(f"settings: machine={machine} workers={cfg['workers']} budget={cfg['budget']} "
              f"seed={args.seed:#x}", file=sys.stderr)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except MachineError as exc:
        print(f"error: machine: {exc}", file=sys.stderr)
    except ClosureBudgetExceeded as exc:
        print(f"error: rel: closure budget of {exc.budget} tuples exceeded "
              f"({len(exc.partial)} tuples after {exc.partial.provenance.rounds} rounds)", file=sys.stderr)
    except (EntailError, EntailBudgetExceeded) as exc:
        print(f"error: entail: {exc}", file=sys.stderr)
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
