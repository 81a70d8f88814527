"""Executable check suites over a machine, its algebra and its relations.

Each suite is a list of named checks.  A check passes, fails with a concrete
witness, or is skipped with a reason (a closure over budget is always a skip,
never a pass).  Reports are deterministic: sampling uses generators seeded
from the suite seed and the check id, and timings are only printed on request.
"""

from __future__ import annotations

import itertools
import json
import time
import zlib
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import algebra as alg_mod
from .algebra import (CA, CB, CROSS, DOT, OPS, ZERO, Algebra, app, build_algebra,
                      derive_w, derive_z, elem, eval_term, fmt_elem, parse_elems, var)
from .gadgets import GADGETS, added_row_columns, build_gadget, certify_gadgets, describe_columns
from .minsky import MinskyMachine, parse_machine, run, run_within
from .subpower import (DEFAULT_BUDGET, ClosureBudgetExceeded, Relation, approx_halting, build_RI,
                       chi_compatible, classify, config_set, dot_part, generate,
                       inherent_nonhalting, is_computational, is_halting, is_synchronized,
                       permute, project, sequential_relation, sigma)

DEFAULT_SEED = 0xC10E
SUITES = ("basic-facts", "encoding-example", "coding-theorem", "halting-equivalence",
          "relations-lemmas", "gadgets", "tools", "t-halting")
EXHAUSTIVE_CELLS = 500_000
PROBES = 100_000


def fixture_text(name: str) -> str:
    return resources.files("minsky_clone").joinpath("fixtures").joinpath(name).read_text()


def load_fixture(name: str) -> MinskyMachine:
    return parse_machine(fixture_text(name if name.endswith(".mm") else name + ".mm"))


CORPUS = ("example", "trivial", "pingpong", "unbounded")


# -- report structures -----------------------------------------------------------------------

@dataclass
class CheckResult:
    id: str
    anchor: str
    status: str  # pass | fail | skipped
    detail: str
    witness: str | None = None
    millis: float = 0.0

    def record(self, suite: str, timings: bool) -> dict:
        return {"suite": suite, "id": self.id, "anchor": self.anchor, "status": self.status,
                "detail": self.detail, "witness": self.witness,
                "millis": round(self.millis, 1) if timings else None}


@dataclass
class SuiteReport:
    suite: str
    machine: str
    seed: int
    checks: list[CheckResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def counts(self) -> dict[str, int]:
        out = {"pass": 0, "fail": 0, "skipped": 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    def to_text(self, timings: bool = False) -> str:
        lines = [f"suite {self.suite}", f"machine {self.machine}", f"seed {self.seed:#x}"]
        lines += [f"note: {n}" for n in self.notes]
        for c in self.checks:
            tag = {"pass": "PASS", "fail": "FAIL", "skipped": "SKIP"}[c.status]
            line = f"[{tag}] {c.id} | {c.anchor} | {c.detail}"
            if timings:
                line += f" | {c.millis:.1f} ms"
            lines.append(line)
            if c.witness:
                lines.append(f"       witness: {c.witness}")
        n = self.counts()
        lines.append(f"summary: {n['pass']} passed, {n['fail']} failed, {n['skipped']} skipped")
        return "\n".join(lines) + "\n"

    def to_jsonl(self, timings: bool = False) -> str:
        return "".join(json.dumps(c.record(self.suite, timings), sort_keys=True, ensure_ascii=False) + "\n"
                       for c in self.checks)


class Skip(Exception):
    pass


class Fail(Exception):
    def __init__(self, detail: str, witness: str | None = None):
        super().__init__(detail)
        self.detail = detail
        self.witness = witness


class Ctx:
    def __init__(self, machine: MinskyMachine, seed: int, budget: int | None, workers: int):
        self.machine = machine
        self.alg = build_algebra(machine)
        self.seed = seed
        self.budget = budget
        self.workers = workers
        self._seq: dict[int, Relation] = {}
        self._rel: dict[str, Relation] = {}

    def rng(self, key: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(key.encode())])

    def S(self, m: int) -> Relation:
        if m not in self._seq:
            self._seq[m] = sequential_relation(self.alg, m, budget=self.budget, workers=self.workers)
        return self._seq[m]

    def gen(self, key: str, gens) -> Relation:
        if key not in self._rel:
            self._rel[key] = generate(self.alg, gens, budget=self.budget, workers=self.workers)
        return self._rel[key]

    def RI(self, key: str, rel: Relation) -> Relation:
        k = "RI:" + key
        if k not in self._rel:
            self._rel[k] = build_RI(self.alg, rel, budget=self.budget, workers=self.workers)
        return self._rel[k]


def _fmt(t) -> str:
    return ",".join(fmt_elem(int(v)) for v in t)


def _cfg_str(c) -> str:
    return f"({c[0]},{c[1]},{c[2]})"


# -- argument enumeration helpers ---------------------------------------------------------------

def _arg_grid(ctx: Ctx, k: int, key: str):
    """All ``k``-tuples of elements when small enough, else seeded random probes."""
    n = ctx.alg.size
    if n ** k <= EXHAUSTIVE_CELLS:
        grids = np.meshgrid(*[np.arange(n)] * k, indexing="ij")
        return [g.ravel() for g in grids], True
    picks = ctx.rng(key).integers(0, n, size=(PROBES, k))
    return [picks[:, j] for j in range(k)], False


def _rel_args(ctx: Ctx, rel: Relation, k: int, key: str, limit: int = 2_000_000, samples: int = 20_000):
    rows = rel.rows
    if len(rows) ** k <= limit:
        idx = np.unravel_index(np.arange(len(rows) ** k), (len(rows),) * k)
        return [rows[i] for i in idx], True
    picks = ctx.rng(key).integers(0, len(rows), size=(samples, k))
    return [rows[picks[:, j]] for j in range(k)], False


# -- basic facts about the algebra ---------------------------------------------------------------

def _state_hom(ctx: Ctx):
    notes = []
    for name, k in OPS.items():
        args, full = _arg_grid(ctx, k, "hom:" + name)
        out = ctx.alg.vop(name, *args) // 5
        key = np.zeros_like(out)
        for a in args:
            key = key * ctx.alg.num_states + a // 5
        pairs = np.unique(np.stack([key, out], axis=1), axis=0)
        keys, counts = np.unique(pairs[:, 0], return_counts=True)
        if (counts > 1).any():
            bad = keys[np.argmax(counts > 1)]
            hits = np.flatnonzero(key == bad)
            outs = {}
            for h in hits:
                outs.setdefault(int(out[h]), h)
            wit = [f"{name}({_fmt([a[h] for a in args])}) has state {s}" for s, h in list(outs.items())[:2]]
            raise Fail(f"{name}: output state not determined by input states", "; ".join(wit))
        notes.append(name if full else name + "*")
    return f"outputs' states depend only on input states for {', '.join(notes)} (* = {PROBES} probes, else exhaustive)"


def _x_absorbing(ctx: Ctx):
    done = []
    for name in ("meet", "M", "Mp", "H", "S"):
        k = OPS[name]
        args, full = _arg_grid(ctx, k, "xabs:" + name)
        has_x = np.zeros(len(args[0]), bool)
        for a in args:
            has_x |= a % 5 == CROSS
        out = ctx.alg.vop(name, *args)
        bad = has_x & (out % 5 != CROSS)
        if bad.any():
            h = int(np.argmax(bad))
            raise Fail(f"{name} is not X-absorbing", f"{name}({_fmt([a[h] for a in args])}) = {fmt_elem(int(out[h]))}")
        done.append(name if full else name + "*")
    return "X-absorbing: " + ", ".join(done)


def _I_absorbing(ctx: Ctx):
    E = [e for e in ctx.alg.elements if e % 5 != DOT]
    X = sorted(ctx.alg.X)
    for a in E:
        for x in X:
            out = ctx.alg.op("I", a, x)
            if out % 5 != CROSS:
                raise Fail("x -> I(a, x) does not send X into X", f"I({fmt_elem(a)},{fmt_elem(x)}) = {fmt_elem(out)}")
    return f"I(a, -) maps X into X for all {len(E)} elements a of E"


def _z_terms(ctx: Ctx):
    alg = ctx.alg
    sizes = []
    for i in alg.machine.states:
        t = derive_z(alg, i)
        vals = eval_term(alg, t, [tuple(alg.elements)])
        for x, v in zip(alg.elements, vals):
            want = elem(i, ZERO) if x % 5 >= ZERO else elem(i, CROSS)
            if v != want:
                raise Fail(f"z_{i} wrong", f"z_{i}({fmt_elem(x)}) = {fmt_elem(v)}, expected {fmt_elem(want)}")
        sizes.append(str(len(alg_mod.state_path(alg, 1, i))))
    return f"z_i matches on all {alg.size} elements for every state; path lengths {'/'.join(sizes)}"


def _w_terms(ctx: Ctx):
    alg = ctx.alg
    for i in alg.machine.states:
        t = derive_w(alg, i)
        for c in (CROSS, ZERO, CA, CB):
            x = elem(i, c)
            v = eval_term(alg, t, [x])
            want = elem(0, ZERO) if c == ZERO else elem(0, CROSS)
            if v != want:
                raise Fail(f"w_{i} wrong", f"w_{i}({fmt_elem(x)}) = {fmt_elem(v)}, expected {fmt_elem(want)}")
    return "w_i matches on <i,c> for every state i and content c other than dot"


def random_MMp_term(rng: np.random.Generator, depth: int) -> alg_mod.Term:
    if depth == 0 or rng.random() < 0.25:
        return var(int(rng.integers(1, 3)))
    if rng.random() < 0.5:
        return app("Mp", random_MMp_term(rng, depth - 1))
    return app("M", random_MMp_term(rng, depth - 1), random_MMp_term(rng, depth - 1))


class _MMpEval:
    """Scalar evaluation of M/Mp terms through lookup tables."""

    def __init__(self, alg: Algebra):
        self.M = alg.table("M").tolist()
        self.Mp = alg.table("Mp").tolist()

    def __call__(self, t: alg_mod.Term, a: int, b: int) -> int:
        if t.is_var:
            return a if t.var == 1 else b
        if t.op == "Mp":
            return self.Mp[self(t.args[0], a, b)]
        return self.M[self(t.args[0], a, b)][self(t.args[1], a, b)]


def _MMp_replay(ctx: Ctx, count: int = 10_000):
    alg = ctx.alg
    ev = _MMpEval(alg)
    rng = ctx.rng("mmp-replay")
    hits = 0
    for _ in range(count):
        t = random_MMp_term(rng, 5)
        s0 = int(rng.integers(0, alg.num_states))
        a, b = (elem(s0, int(c)) for c in rng.integers(0, 5, size=2))
        c = ev(t, a, b)
        if c % 5 == CROSS:
            continue
        hits += 1
        base = elem(s0, ZERO)
        got = ev(t, base, base)
        if got != elem(c // 5, ZERO):
            raise Fail("zero-content replay differs", f"t = {t}, a = {fmt_elem(a)}, b = {fmt_elem(b)}: "
                       f"replay gives {fmt_elem(got)}, expected {fmt_elem(elem(c // 5, ZERO))}")
    return f"{count} random terms over M, Mp on same-state arguments; {hits} outside X replay on <St a,0>"


def _MMp_states(ctx: Ctx, count: int = 10_000):
    alg = ctx.alg
    ev = _MMpEval(alg)
    rng = ctx.rng("mmp-states")
    hits = 0
    for _ in range(count):
        t = random_MMp_term(rng, 5)
        if t.variables() != {1, 2}:
            continue
        a, b = (int(v) for v in rng.integers(0, alg.size, size=2))
        c = ev(t, a, b)
        if c % 5 == CROSS:
            continue
        hits += 1
        if a // 5 != b // 5:
            raise Fail("term in both variables is defined outside X on arguments of different states",
                       f"t = {t}, a = {fmt_elem(a)}, b = {fmt_elem(b)}, t(a,b) = {fmt_elem(c)}")
    return f"{count} random terms over M, Mp on arbitrary arguments; {hits} values outside X of terms in both variables"


def _transcriptions(ctx: Ctx):
    bad = ctx.alg.validate()
    if bad:
        raise Fail("case-list and vectorized operations disagree", "; ".join(bad))
    return "case-list and vectorized evaluations agree (exhaustive up to 400000 argument lists, sampled above)"


def _totality(ctx: Ctx):
    for name, k in OPS.items():
        args, _ = _arg_grid(ctx, k, "total:" + name)
        out = ctx.alg.vop(name, *args)
        if ((out < 0) | (out >= ctx.alg.size)).any():
            raise Fail(f"{name} leaves the domain")
    for name in OPS:
        for args in itertools.product(ctx.alg.elements, repeat=min(OPS[name], 2)):
            full = tuple(args) + (elem(0, CROSS),) * (OPS[name] - len(args))
            ctx.alg.op(name, *full)
    return "every operation returns a domain element on every probed input"


BASIC = [
    ("basic.state-homomorphism", "state map is a homomorphism", _state_hom),
    ("basic.x-absorbing", "meet, M, Mp, H, S are X-absorbing", _x_absorbing),
    ("basic.I-absorbing", "I(a, -) is X-absorbing for a in E", _I_absorbing),
    ("basic.z-terms", "derived term z_i", _z_terms),
    ("basic.w-terms", "derived term w_i", _w_terms),
    ("basic.MMp-replay", "M/Mp terms replay on zero content", _MMp_replay),
    ("basic.MMp-state-agreement", "M/Mp terms in both variables need equal argument states", _MMp_states),
    ("basic.transcriptions", "case lists evaluated top to bottom", _transcriptions),
    ("basic.totality", "operations are total", _totality),
]


# -- the worked encoding example ----------------------------------------------------------------

EXAMPLE_TABLE = [(1, 0, 0), (2, 1, 0), (3, 1, 1), (3, 0, 1), (4, 0, 1), (4, 0, 0), (0, 0, 0)]

# (name, op, argument columns, expected output), one row per coordinate
EXAMPLE_DISPLAYS = [
    ("config 2|3|2|-", "M", ["(1,0),(1,0)", "(1,.),(1,0)", "(1,0),(1,.)"], "(2,0),(2,A),(2,.)"),
    ("config 3|1|3|2", "M", ["(2,0),(2,.)", "(2,.),(2,0)", "(2,A),(2,A)"], "(3,.),(3,B),(3,A)"),
    ("config 3|2|-|1", "M", ["(3,B),(3,B)", "(3,A),(3,.)", "(3,.),(3,A)"], "(3,B),(3,.),(3,0)"),
    ("config 4|3|-|2", "Mp", ["(3,0)", "(3,B)", "(3,.)"], "(4,0),(4,B),(4,.)"),
    ("config 4|1|-|-", "M", ["(4,B),(4,.)", "(4,.),(4,B)", "(4,0),(4,0)"], "(4,.),(4,0),(4,0)"),
    ("config 0|2|-|-", "Mp", ["(4,0)", "(4,.)", "(4,0)"], "(0,0),(0,.),(0,0)"),
]


def config_vector(k: int, dot: int, a: int | None = None, b: int | None = None, m: int = 3) -> tuple[int, ...]:
    t = [elem(k, ZERO)] * m
    t[dot] = elem(k, DOT)
    if a is not None:
        t[a] = elem(k, CA)
    if b is not None:
        t[b] = elem(k, CB)
    return tuple(t)


def _is_example(ctx: Ctx):
    if ctx.machine != load_fixture("example"):
        raise Skip("machine differs from the worked example")


def _ex_table(ctx: Ctx):
    _is_example(ctx)
    res = run(ctx.machine, fuel=10, keep_trace=True)
    got = [tuple(c) for c in res.trace]
    if got != EXAMPLE_TABLE or not res.halted:
        raise Fail("simulation table differs", " ".join(map(_cfg_str, got)))
    return "7 configurations: " + " ".join(map(_cfg_str, got))


def _ex_rules(ctx: Ctx):
    _is_example(ctx)
    alg = ctx.alg
    M = lambda x, y: tuple(alg.op("M", p, q) for p, q in zip(x, y))  # noqa: E731
    Mp = lambda x: tuple(alg.op("Mp", p) for p in x)  # noqa: E731
    C = config_vector
    n = 0
    for i, j, k in itertools.permutations(range(3)):
        rules = [
            (C(2, i, j), M(C(1, j), C(1, i))),
            (C(3, i, j, k), M(C(2, k, j), C(2, i, j))),
            (C(3, i, None, j), M(C(3, k, i, j), C(3, i, k, j))),
            (C(4, i, None, j), Mp(C(3, i, None, j))),
            (C(4, i), M(C(4, j, None, i), C(4, i, None, j))),
            (C(0, i), Mp(C(4, i))),
        ]
        for want, got in rules:
            n += 1
            if want != got:
                raise Fail("general step rule fails", f"i,j,k = {i + 1},{j + 1},{k + 1}: {_fmt(got)} != {_fmt(want)}")
    return f"all {n} instances of the six step rules over distinct i, j, k hold"


def _ex_displays(ctx: Ctx):
    _is_example(ctx)
    alg = ctx.alg
    for name, op, rows, want in EXAMPLE_DISPLAYS:
        cols = [parse_elems(r) for r in rows]
        got = tuple(alg.op(op, *r) for r in cols)
        if got != tuple(parse_elems(want)):
            raise Fail(f"{name} differs", f"{op} gives {_fmt(got)}, expected {want}")
    return f"{len(EXAMPLE_DISPLAYS)} displayed matrix evaluations reproduce element for element"


def _ex_membership(ctx: Ctx):
    _is_example(ctx)
    S3 = ctx.S(3)
    for k, a, b in EXAMPLE_TABLE:
        cfg = config_set(ctx.alg, k, a, b, 3)
        if not cfg.issubset(S3):
            missing = [t for t in cfg if t not in S3][0]
            raise Fail(f"Config{_cfg_str((k, a, b))} not inside S_3", _fmt(missing))
    return f"Config sets of all 7 table rows lie in S_3 (|S_3| = {len(S3)}, {S3.provenance.rounds} rounds)"


def _ex_profile(ctx: Ctx):
    _is_example(ctx)
    p = classify(ctx.alg, ctx.S(3))
    if not (p.computational and p.capacity == 2):
        raise Fail("S_3 should be computational with capacity 2", f"computational={p.computational}, capacity={p.capacity}")
    return "S_3 is computational with capacity 2; register counts read contents A and B"


ENCODING = [
    ("example.table", "simulation table of the worked example", _ex_table),
    ("example.step-rules", "step rules of the worked example", _ex_rules),
    ("example.displays", "displayed M/Mp evaluations", _ex_displays),
    ("example.config-membership", "configurations encoded in S_3", _ex_membership),
    ("example.profile", "S_3 computational with capacity 2", _ex_profile),
]


# -- coding theorem and halting equivalence --------------------------------------------------------

def _coding_forward(m: int):
    def check(ctx: Ctx):
        runw = run_within(ctx.machine, m - 1)
        S = ctx.S(m)
        for n, c in enumerate(runw.visited):
            cfg = config_set(ctx.alg, c.state, c.alpha, c.beta, m)
            if not cfg.issubset(S):
                raise Fail(f"step {n}: Config{_cfg_str(tuple(c))} not inside S_{m}",
                           _fmt([t for t in cfg if t not in S][0]))
        return (f"all {len(runw.visited)} configurations reached with capacity {m - 1} "
                f"(run ends: {runw.reason}) are encoded in S_{m} (|S_{m}| = {len(S)})")
    return check


def _all_configs(alg: Algebra, m: int):
    for k in alg.machine.states:
        for a in range(m):
            for b in range(m - a):
                yield (k, a, b), config_set(alg, k, a, b, m)


def _coding_backward(m: int):
    def check(ctx: Ctx):
        runw = run_within(ctx.machine, m - 1)
        if runw.halts:
            raise Skip(f"machine halts without exceeding capacity {m - 1}; the converse is only claimed otherwise")
        S = ctx.S(m)
        reached = {tuple(c) for c in runw.visited}
        found = 0
        for key, cfg in _all_configs(ctx.alg, m):
            inside = cfg.contains_in(S)
            if inside.any():
                found += 1
                if not inside.all():
                    raise Fail(f"Config{_cfg_str(key)} only partly inside S_{m}")
                if key not in reached:
                    raise Fail(f"Config{_cfg_str(key)} inside S_{m} but never reached within capacity {m - 1}")
        return (f"{found} Config sets inside S_{m}; every one is a configuration reached with capacity {m - 1} "
                f"(exact: run {runw.reason} after {len(runw.visited)} configurations)")
    return check


def _halting_equiv(m: int):
    def check(ctx: Ctx):
        runw = run_within(ctx.machine, m - 1)
        S = ctx.S(m)
        h = is_halting(S)
        if h != runw.halts:
            raise Fail(f"machine halts with capacity {m - 1}: {runw.halts}, S_{m} halting: {h}")
        return f"halts with capacity {m - 1}: {str(runw.halts).lower()}; S_{m} halting: {str(h).lower()}"
    return check


def _embedded(m: int):
    def check(ctx: Ctx):
        ell = m + 1
        gens = [sig + (elem(1, CA),) for sig in sigma(m)]
        R = ctx.gen(f"embed{m}", gens)
        p = classify(ctx.alg, R)
        if not p.computational or p.capacity != m - 1:
            raise Fail(f"embedded relation should be computational with capacity {m - 1}",
                       f"computational={p.computational}, capacity={p.capacity}")
        hs = is_halting(ctx.S(m))
        if p.halting != hs:
            raise Fail(f"S_{m} halting {hs} but the embedded relation halting {p.halting}")
        return (f"instance-level: arity-{ell} computational relation with capacity {m - 1} "
                f"(|R| = {len(R)}) is halting exactly when S_{m} is ({str(hs).lower()})")
    return check


def _sequential(m: int):
    def check(ctx: Ctx):
        S = ctx.S(m)
        p = classify(ctx.alg, S)
        if not p.computational or p.capacity != m - 1:
            raise Fail(f"S_{m} should be computational with capacity {m - 1}",
                       f"computational={p.computational}, capacity={p.capacity}")
        for perm in itertools.permutations(range(m)):
            if permute(S, perm) != S:
                raise Fail(f"S_{m} not invariant under a coordinate permutation", str([i + 1 for i in perm]))
        n = 0
        for key, cfg in _all_configs(ctx.alg, m):
            inside = cfg.contains_in(S)
            if inside.any() and not inside.all():
                raise Fail(f"Config{_cfg_str(key)} only partly inside S_{m}")
            n += 1
        if p.meets_C and not p.halting:
            raise Fail(f"S_{m} meets C^{m} but is not halting")
        return (f"S_{m}: capacity {m - 1}, invariant under all {len(list(itertools.permutations(range(m))))} "
                f"permutations, {n} Config sets all-or-nothing, meets C^{m}: {str(p.meets_C).lower()}, "
                f"halting: {str(p.halting).lower()}")
    return check


CODING = [(f"coding.sequential.m{m}", "properties of S_m", _sequential(m)) for m in (2, 3)] + \
         [(f"coding.forward.m{m}", "configurations reached are encoded", _coding_forward(m)) for m in (3, 4)] + \
         [(f"coding.backward.m{m}", "encoded configurations are reached", _coding_backward(m)) for m in (3, 4)]

HALTING = [(f"halting.equivalence.m{m}", "halts with capacity m-1 iff S_m halting", _halting_equiv(m))
           for m in (1, 2, 3, 4)] + \
          [(f"halting.embedded.m{m}", "capacity m-1 computational relations halt with S_m", _embedded(m))
           for m in (2, 3)]


# -- relation lemmas -------------------------------------------------------------------------------

def _relation_corpus(ctx: Ctx) -> list[tuple[str, Relation]]:
    out = [("S2", ctx.S(2)), ("S3", ctx.S(3)), ("T", _T(ctx))]
    out += [(g, build_gadget(ctx.alg, g)) for g in ("mu", "chi", "delta_forall")]
    out.append(("S3_I", ctx.RI("S3", ctx.S(3))))
    return out


def _leq(x: np.ndarray, y: np.ndarray, alg: Algebra) -> np.ndarray:
    return (alg.vop("meet", x, y) == x).all(axis=-1)


def _lemma_items(ctx: Ctx):
    alg = ctx.alg
    lines = []
    for name, R in _relation_corpus(ctx):
        if not len(R):
            continue
        comp, sync, halt = is_computational(R), is_synchronized(R), is_halting(R)
        tags = []
        if comp and not halt:
            (a, b, c), full = _rel_args(ctx, R, 3, f"n0:{name}")
            out = alg.vop("N0", a, b, c)
            ok = ~(out % 5 != CROSS).all(axis=1) | (out == c).all(axis=1)
            if not ok.all():
                h = int(np.argmin(ok))
                raise Fail(f"{name}: N0 output in Y^m differs from its last argument",
                           f"N0({_fmt(a[h])}; {_fmt(b[h])}; {_fmt(c[h])}) = {_fmt(out[h])}")
            tags.append("N0" + ("" if full else "*"))
        if comp:
            (u, x, y, z), full = _rel_args(ctx, R, 4, f"nd:{name}")
            out = alg.vop("Ndot", u, x, y, z)
            ok = _leq(out, x, alg) | _leq(out, y, alg)
            if not ok.all():
                h = int(np.argmin(ok))
                raise Fail(f"{name}: Ndot output below neither middle argument",
                           f"Ndot({_fmt(u[h])}; {_fmt(x[h])}; {_fmt(y[h])}; {_fmt(z[h])}) = {_fmt(out[h])}")
            tags.append("Ndot" + ("" if full else "*"))
        if sync:
            (u, v, x, y), full = _rel_args(ctx, R, 4, f"p:{name}")
            out = alg.vop("P", u, v, x, y)
            ok = (out == x).all(axis=1) | (out == y).all(axis=1)
            if not ok.all():
                h = int(np.argmin(ok))
                raise Fail(f"{name}: P output is neither of its last two arguments")
            tags.append("P" + ("" if full else "*"))
        (a, b, c), full = _rel_args(ctx, R, 3, f"s:{name}")
        out = alg.vop("S", a, b, c)
        ok = _leq(out, alg.vop("I", a, a), alg) & ((out % 5 == CROSS).all(axis=1) | _leq(out, a, alg))
        if not ok.all():
            h = int(np.argmin(ok))
            raise Fail(f"{name}: S output not below I(a,a) or a",
                       f"S({_fmt(a[h])}; {_fmt(b[h])}; {_fmt(c[h])}) = {_fmt(out[h])}")
        tags.append("S" + ("" if full else "*"))
        lines.append(f"{name}[{' '.join(tags)}]")
    return "N0/Ndot/P/S properties on " + ", ".join(lines) + " (* = 20000 sampled argument lists)"


def _sync_intersection(ctx: Ctx):
    if ctx.alg.num_states == 2:
        alg, where = ctx.alg, "this machine"
    else:
        alg, where = build_algebra(load_fixture("trivial")), "the two-state fixture machine"
    parts = []
    for m in (1, 2):
        inter = None
        count = 0
        for s in alg.machine.states:
            for contents in itertools.product(range(5), repeat=m):
                r = tuple(elem(s, c) for c in contents)
                R = generate(alg, [r], budget=ctx.budget)
                if not is_synchronized(R):
                    raise Fail("a singly generated relation is not synchronized", _fmt(r))
                inter = R if inter is None else inter & R
                count += 1
        want = Relation.from_tuples([(elem(s, CROSS),) * m for s in alg.machine.states], alg.size, m)
        if inter != want:
            raise Fail(f"m={m}: intersection of synchronized subpowers is not the synchronized X-tuples",
                       "; ".join(_fmt(t) for t in inter))
        parts.append(f"m={m}: {count} generated")
    return (f"on {where}, the intersection of all nonempty synchronized subpowers (via the singly generated ones) "
            f"is the set of synchronized X-tuples ({'; '.join(parts)})")


RELATIONS = [
    ("relations.operation-facts", "N0, Ndot, P, S facts on relations", _lemma_items),
    ("relations.synchronized-intersection", "intersection of synchronized subpowers", _sync_intersection),
]


# -- gadgets ---------------------------------------------------------------------------------------

def _gadget_cert(ctx: Ctx):
    rep = certify_gadgets(ctx.alg, seed=ctx.seed)
    if not rep.ok:
        bad = [r for r in rep.results if not r.ok][0]
        w = bad.verdict.describe() if not bad.verdict else bad.scalar_verdict.describe()
        raise Fail(f"{bad.gid} failed certification", w)
    g = [r for r in rep.results if r.gid == "gamma"][0]
    sizes = ", ".join(f"{r.gid} {r.size}" for r in rep.results)
    return (f"tier {rep.results[0].tier}: mu, chi, deltas closed under all nine operations, gamma under all "
            f"but I ({sizes}); I escape: {g.I_witness.describe()[12:]}")


def _gadget_shape(ctx: Ctx):
    for gid in GADGETS:
        R = build_gadget(ctx.alg, gid)
        rows = R.rows
        if (rows % 5 == DOT).any():
            raise Fail(f"{gid} contains a dot", _fmt(rows[np.argmax((rows % 5 == DOT).any(axis=1))]))
        if not is_synchronized(R):
            raise Fail(f"{gid} has a tuple with mixed states")
    G = build_gadget(ctx.alg, "gamma").rows
    y = G[(G % 5 != CROSS).all(axis=1)]
    ok = (y[:, 3:4] == y[:, :3]).any(axis=1)
    if not ok.all():
        raise Fail("gamma tuple in Y^4 whose last entry is not among the first three", _fmt(y[np.argmin(ok)]))
    return f"all gadgets avoid dot content and are synchronized; {len(y)} gamma tuples in Y^4 repeat an entry last"


def _gadget_rows(ctx: Ctx):
    checks = added_row_columns(ctx.alg, state=1)
    for name, cols, ok in checks:
        if not ok:
            raise Fail(f"added-row columns not in {name}", describe_columns(cols))
    return f"{len(checks)} added-row evaluations have all columns inside their gadget"


GADGET_CHECKS = [
    ("gadgets.certification", "closure of mu, chi, deltas and gamma", _gadget_cert),
    ("gadgets.shape", "gadget shape observations", _gadget_shape),
    ("gadgets.added-rows", "added rows for the deltas and gamma", _gadget_rows),
]


# -- tools -----------------------------------------------------------------------------------------

def _tools_corpus(ctx: Ctx) -> list[tuple[str, Relation]]:
    ext = [sig + (elem(1, CA),) for sig in sigma(2)]
    return [("S2", ctx.S(2)), ("S3", ctx.S(3)), ("S2+A", ctx.gen("S2+A", ext))]


def _kappa(ctx: Ctx) -> int | None:
    res = run(ctx.machine, fuel=100_000)
    return res.trace_max_sum if res.halted else None


def _tools_check(label: str):
    def check(ctx: Ctx):
        if label != "chi" and not _T_halting(ctx):
            raise Skip("T = Sg{<1,.>, <1,0>} is non-halting, and these properties presuppose it halts")
        kappa = _kappa(ctx)
        done = []
        for name, R in _tools_corpus(ctx):
            if not is_computational(R):
                raise Fail(f"{name} is not computational")
            m = R.arity
            D, H = set(dot_part(R)), set(approx_halting(R))
            prof = classify(ctx.alg, R)
            RI = ctx.RI(name, R)
            DI = set(dot_part(RI)) if len(RI) else set()
            if label == "capacity":
                for i in sorted(D & H):
                    sig = sigma(m)[i]
                    if sig not in R:
                        raise Fail(f"{name}: unit tuple for coordinate {i + 1} missing", _fmt(sig))
                if D and prof.halting != prof.meets_C:
                    raise Fail(f"{name}: halting {prof.halting} but meets C^m {prof.meets_C}")
                if prof.capacity != len(D & H) - 1:
                    raise Fail(f"{name}: capacity {prof.capacity} but |D and H| - 1 = {len(D & H) - 1}")
                if not prof.halting and kappa is not None and len(D & H) > kappa:
                    raise Fail(f"{name}: non-halting with |D and H| = {len(D & H)} > kappa = {kappa}")
                if prof.meets_C and prof.capacity != prof.weak_capacity:
                    raise Fail(f"{name}: meets C^m but capacity {prof.capacity} != weak {prof.weak_capacity}")
                done.append(f"{name}: D={_set(D)} H={_set(H)} capacity {prof.capacity}")
            elif label == "RI":
                K = {i for i in range(m) if ((R.rows % 5 == DOT) & (R.rows % 5 != CROSS).all(axis=1)[:, None]).any(axis=0)[i]}
                for p in itertools.permutations(range(m)):
                    if {p[i] for i in K} == K and len(RI) and permute(RI, p) != RI:
                        raise Fail(f"{name}: R_I not invariant under a permutation preserving K", str([x + 1 for x in p]))
                if D and is_halting(R) != is_halting(RI):
                    raise Fail(f"{name}: halting {is_halting(R)} but R_I halting {is_halting(RI)}")
                if len(D) >= 2 and DI != D & H:
                    raise Fail(f"{name}: D(R_I) = {_set(DI)} but D and H = {_set(D & H)}")
                extra = ""
                if DI:
                    sub = project(RI, sorted(DI))
                    Sk = ctx.S(len(DI))
                    if sub != Sk:
                        raise Fail(f"{name}: R_I on its dot part differs from S_{len(DI)}",
                                   f"sizes {len(sub)} vs {len(Sk)}")
                    extra = f", R_I(D_I) = S_{len(DI)}"
                    _off_dot(ctx, name, RI, DI)
                    extra += ", off-dot description exact"
                done.append(f"{name}: |R_I| = {len(RI)}, D_I={_set(DI)}{extra}")
            elif label == "inherent":
                if prof.halting:
                    done.append(f"{name}: halting, not applicable")
                    continue
                N = set(inherent_nonhalting(ctx.alg, R))
                if is_halting(project(R, sorted(N))):
                    raise Fail(f"{name}: R(N) halting", _set(N))
                if kappa is not None and len(N & D) > kappa:
                    raise Fail(f"{name}: |N and D| = {len(N & D)} > kappa = {kappa}")
                if D and not N & D:
                    raise Fail(f"{name}: N misses the dot part")
                if not set(range(m)) - D <= N:
                    raise Fail(f"{name}: N misses a non-dot coordinate")
                rows = R.rows
                if D:
                    hit = ((rows[:, sorted(N)] % 5 == DOT) | (rows[:, sorted(N)] % 5 == CROSS)).any(axis=1)
                    if not hit.all():
                        raise Fail(f"{name}: tuple with no dot or cross on N", _fmt(rows[np.argmin(hit)]))
                for r in rows:
                    for i in set(range(m)) - N:
                        if r[i] % 5 == DOT and not (r[sorted(N)] % 5 == CROSS).any():
                            raise Fail(f"{name}: dot off N without a cross on N", _fmt(r))
                if not DI <= N & D:
                    raise Fail(f"{name}: D(R_I) not inside N and D")
                if not H <= N:
                    raise Fail(f"{name}: H not inside N")
                if len(D) <= 1 and N != set(range(m)):
                    raise Fail(f"{name}: |D| <= 1 but N != [m]")
                done.append(f"{name}: N={_set(N)}")
            elif label == "chi":
                gens = R.provenance.generators
                if not chi_compatible(gens, []):
                    raise Fail(f"{name}: empty K should be vacuous")
                dflt = chi_compatible(gens)
                K = [i for i in range(m) if i not in D]
                done.append(f"{name}: chi-compatible over K={_set(K)}: {str(dflt).lower()}")
        return "; ".join(done)
    return check


def _off_dot(ctx: Ctx, name: str, RI: Relation, DI: set):
    m = RI.arity
    L = [i for i in range(m) if i not in DI]
    proj = project(RI, sorted(DI))
    for s in ctx.alg.machine.states:
        for contents in itertools.product(range(5), repeat=m):
            a = tuple(elem(s, c) for c in contents)
            rhs = tuple(a[i] for i in sorted(DI)) in proj and (
                all(a[i] == elem(s, ZERO) for i in L) or all(a[i] == elem(s, CROSS) for i in L))
            if (a in RI) != rhs:
                raise Fail(f"{name}: off-dot description of R_I fails", _fmt(a))


def _set(s) -> str:
    return "{" + ",".join(str(i + 1) for i in sorted(s)) + "}"


TOOLS = [
    ("tools.capacity", "dot part, approximately halting part and capacity", _tools_check("capacity")),
    ("tools.RI-structure", "structure of R_I", _tools_check("RI")),
    ("tools.inherent-nonhalting", "inherently non-halting part", _tools_check("inherent")),
    ("tools.chi-compatible", "chi-compatibility of generators", _tools_check("chi")),
]


# -- the unary halting gate ---------------------------------------------------------------------------

def _T(ctx: Ctx) -> Relation:
    return ctx.gen("T", [(elem(1, DOT),), (elem(1, ZERO),)])


def _T_halting(ctx: Ctx) -> bool:
    return (elem(0, DOT),) in _T(ctx)


def _t_gate(ctx: Ctx):
    T = _T(ctx)
    h = _T_halting(ctx)
    res = run(ctx.machine, fuel=100_000)
    if res.halted and not h:
        raise Fail("machine halts but T does not contain <0,.>")
    verdict = "halting" if h else "non-halting, so the machine cannot halt"
    return f"T = {{{', '.join(fmt_elem(t[0]) for t in T)}}} is {verdict}"


def _t_projection(ctx: Ctx):
    T = _T(ctx)
    for m in (2, 3):
        for i in range(m):
            if project(ctx.S(m), [i]) != T:
                raise Fail(f"S_{m} on coordinate {i + 1} differs from T")
    return "every single-coordinate projection of S_2 and S_3 equals T"


T_CHECKS = [
    ("t-halting.gate", "T = Sg{<1,.>, <1,0>} halting gate", _t_gate),
    ("t-halting.projection", "T is the coordinate projection of S_m", _t_projection),
]


SUITE_CHECKS: dict[str, list] = {
    "basic-facts": BASIC, "encoding-example": ENCODING, "coding-theorem": CODING,
    "halting-equivalence": HALTING, "relations-lemmas": RELATIONS, "gadgets": GADGET_CHECKS,
    "tools": TOOLS, "t-halting": T_CHECKS,
}

SUITE_NOTES = {
    "halting-equivalence": ["instance-level checks on constructed relations; the undecidability result and "
                            "the degree bound for halting machines are not computable here and are not checked"],
    "coding-theorem": ["the converse direction is checked as 'no spurious Config set', decided exactly by "
                       "exploring every configuration within the capacity bound"],
    "encoding-example": ["beta counts coordinates with content B"],
}


def run_suite(machine: MinskyMachine, suite: str, *, seed: int = DEFAULT_SEED, budget: int | None = DEFAULT_BUDGET,
              workers: int = 1, name: str | None = None) -> SuiteReport:
    if suite not in SUITE_CHECKS:
        raise KeyError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    ctx = Ctx(machine, seed, budget, workers)
    label = name or str(machine)
    report = SuiteReport(suite, f"{label} (N={machine.N}, |A|={ctx.alg.size})", seed,
                         notes=list(SUITE_NOTES.get(suite, [])))
    for cid, anchor, fn in SUITE_CHECKS[suite]:
        t0 = time.perf_counter()
        try:
            detail = fn(ctx)
            status, witness = "pass", None
        except Skip as exc:
            status, detail, witness = "skipped", str(exc), None
        except ClosureBudgetExceeded as exc:
            status, detail, witness = "skipped", f"closure budget exceeded ({exc.partial.provenance.rounds} rounds, " \
                                                 f"{len(exc.partial)} tuples)", None
        except Fail as exc:
            status, detail, witness = "fail", exc.detail, exc.witness
        report.checks.append(CheckResult(cid, anchor, status, detail, witness, 1000 * (time.perf_counter() - t0)))
    return report
