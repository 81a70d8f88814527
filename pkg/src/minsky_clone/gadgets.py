"""Auxiliary relations mu, chi, the three deltas and gamma, with closure certificates.

Every gadget is a union over machine states ``i`` of a fixed pattern in the
elements ``z = <i,0>``, ``a = <i,A>``, ``b = <i,B>`` and free parameters
ranging over ``E`` restricted to state ``i``.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .algebra import CA, CB, CROSS, OPS, ZERO, Algebra, elem, fmt_elem
from .subpower import ClosureVerdict, Relation, closed_under

GADGETS: dict[str, int] = {
    "mu": 2, "chi": 3, "delta_forall": 3, "delta_existsA": 3, "delta_existsB": 3, "gamma": 4,
}
REDUCT = tuple(op for op in OPS if op != "I")

# the nine fixed columns of each delta, in the letters z, a, b
_DELTA_COLUMNS = {
    "delta_forall": ("zzz", "zaz", "zbz", "azz", "aaa", "abz", "bzz", "baz", "bbb"),
    "delta_existsA": ("zzz", "zaa", "zbz", "aza", "aaa", "aba", "bzz", "baa", "bbb"),
    "delta_existsB": ("zzz", "zaz", "zbb", "azz", "aaa", "abb", "bzb", "bab", "bbb"),
}


def _state_tuples(gid: str, i: int) -> set[tuple[int, ...]]:
    z, a, b, x = elem(i, ZERO), elem(i, CA), elem(i, CB), elem(i, CROSS)
    E = (x, z, a, b)
    letter = {"z": z, "a": a, "b": b}
    out: set[tuple[int, ...]] = set()
    if gid == "mu":
        for e in E:
            out |= {(e, e), (e, x)}
    elif gid == "chi":
        for a1, a2 in itertools.product(E, repeat=2):
            out |= {(a1, a2, a2), (x, a2, x)}
    elif gid in _DELTA_COLUMNS:
        out |= {tuple(letter[ch] for ch in col) for col in _DELTA_COLUMNS[gid]}
        for c1, c2 in itertools.product(E, repeat=2):
            out |= {(x, c1, c2), (c1, x, c2)}
    elif gid == "gamma":
        out |= {(z, z, z, z), (a, a, a, a), (b, b, b, b)}
        out |= {(z, a, z, al) for al in (z, a)}
        out |= {(z, a, b, ga) for ga in (z, a, b)}
        out |= {(z, z, b, be) for be in (z, b)}
        for c1, c2, c3 in itertools.product(E, repeat=3):
            # within one state the triple meet is c1 if all agree, else <i,x>
            m = c1 if c1 == c2 == c3 else x
            out |= {(c1, c2, c3, m), (x, c1, c2, c3), (c1, x, c2, c3), (c1, c2, x, c3)}
    else:
        raise KeyError(f"unknown gadget {gid!r}; expected one of {', '.join(GADGETS)}")
    return out


def build_gadget(alg: Algebra, gid: str) -> Relation:
    tuples: set[tuple[int, ...]] = set()
    for i in range(alg.num_states):
        tuples |= _state_tuples(gid, i)
    return Relation.from_tuples(sorted(tuples), alg.size, GADGETS[gid])


def tier(alg: Algebra, exhaustive_max: int = 10, blockwise_max: int = 35) -> str:
    if alg.size <= exhaustive_max:
        return "exhaustive"
    return "blockwise" if alg.size <= blockwise_max else "sampled"


def scalar_spot_check(alg: Algebra, rel: Relation, ops, samples: int, rng: np.random.Generator,
                      exhaustive_limit: int = 200_000) -> tuple[int, ClosureVerdict]:
    """Check closure with the scalar case lists on argument lists drawn from ``rel``.

    Operations with at most ``exhaustive_limit`` argument lists are scanned
    completely; larger ones on ``samples`` random lists.
    """
    rows = [tuple(r) for r in rel.rows.tolist()]
    members = set(rows)
    checked = 0
    for op in ops:
        k = OPS[op]
        if len(rows) ** k <= exhaustive_limit:
            argsets = itertools.product(rows, repeat=k)
        else:
            picks = rng.integers(0, len(rows), size=(samples, k))
            argsets = ([rows[j] for j in pick] for pick in picks.tolist())
        for args in argsets:
            checked += 1
            out = tuple(alg.op(op, *col) for col in zip(*args))
            if out not in members:
                return checked, ClosureVerdict(False, op, tuple(args), out)
    return checked, ClosureVerdict(True)


@dataclass
class GadgetResult:
    gid: str
    size: int
    tier: str
    ops: tuple[str, ...]
    verdict: ClosureVerdict
    scalar_checked: int
    scalar_verdict: ClosureVerdict
    millis: float
    I_witness: ClosureVerdict | None = None

    @property
    def ok(self) -> bool:
        good = bool(self.verdict) and bool(self.scalar_verdict)
        if self.gid == "gamma":
            good = good and self.I_witness is not None and not self.I_witness.closed
        return good


@dataclass
class CertificationReport:
    domain_size: int
    results: list[GadgetResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def lines(self) -> list[str]:
        out = [f"domain size {self.domain_size}"]
        for r in self.results:
            ops = "all nine operations" if len(r.ops) == len(OPS) else "all operations except I"
            status = "closed" if r.verdict else r.verdict.describe()
            out.append(f"{r.gid}: {r.size} tuples, {ops}, tier {r.tier}: {status}; "
                       f"scalar check on {r.scalar_checked} argument lists: "
                       f"{'agrees' if r.scalar_verdict else r.scalar_verdict.describe()}")
            if r.I_witness is not None:
                out.append(f"{r.gid}: I escapes: {r.I_witness.describe()}")
        return out


def certify_gadgets(alg: Algebra, samples: int = 20_000, seed: int = 0xC10E,
                    exhaustive_max: int = 10, blockwise_max: int = 35) -> CertificationReport:
    """Certify mu, chi and the deltas under all nine operations, gamma under the reduct.

    The closure test enumerates every argument list up to the
    output-preserving compression of the closure engine, so it is exact at
    every tier; the tier label records the domain size class.  Gamma also
    gets a concrete ``I`` application leaving it.
    """
    rng = np.random.default_rng(seed)
    report = CertificationReport(alg.size)
    label = tier(alg, exhaustive_max, blockwise_max)
    for gid in GADGETS:
        t0 = time.perf_counter()
        rel = build_gadget(alg, gid)
        ops = REDUCT if gid == "gamma" else tuple(OPS)
        verdict = closed_under(alg, rel, ops)
        n, scalar = scalar_spot_check(alg, rel, ops, samples, rng)
        witness = closed_under(alg, rel, ["I"]) if gid == "gamma" else None
        report.results.append(GadgetResult(gid, len(rel), label, ops, verdict, n, scalar,
                                           1000 * (time.perf_counter() - t0), witness))
    return report


# -- the worked "added row" evaluations ------------------------------------------------

_TWO_ROWS = ("AB0BA", "0BBAA")
_ADDED = {"delta_forall": "0B00A", "delta_existsA": "AB0AA", "delta_existsB": "0BBBA"}


def added_row_columns(alg: Algebra, state: int = 1) -> list[tuple[str, tuple[tuple[int, ...], ...], bool]]:
    """Membership of the columns of the worked added-row evaluations.

    For each delta gadget, the two given rows plus its added row must have
    every column in the gadget.  For gamma, the three added rows plus a
    fourth row ``(alpha, B, beta, gamma, A)`` must have every column in
    gamma, for every choice ``alpha in {0,A}``, ``beta in {0,B}``,
    ``gamma in {0,A,B}``.
    """
    e = lambda ch: elem(state, {"0": ZERO, "A": CA, "B": CB}[ch])  # noqa: E731
    checks = []
    for gid, added in _ADDED.items():
        rel = build_gadget(alg, gid)
        cols = tuple(zip(*(tuple(e(c) for c in row) for row in (*_TWO_ROWS, added))))
        checks.append((gid, cols, all(c in rel for c in cols)))
    gamma = build_gadget(alg, "gamma")
    three = [_ADDED["delta_forall"], _ADDED["delta_existsA"], _ADDED["delta_existsB"]]
    for al, be, ga in itertools.product("0A", "0B", "0AB"):
        fourth = al + "B" + be + ga + "A"
        cols = tuple(zip(*(tuple(e(c) for c in row) for row in (*three, fourth))))
        checks.append((f"gamma[{al}{be}{ga}]", cols, all(c in gamma for c in cols)))
    return checks


def describe_columns(cols) -> str:
    return " | ".join(",".join(fmt_elem(v) for v in c) for c in cols)
