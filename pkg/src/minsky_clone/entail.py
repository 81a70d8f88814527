"""Entailment: building relations from a catalog by intersection, product,
coordinate permutation and projection, plus the polymorphism side.

Python indices are 0-based.  The certificate text format is 1-based:

    PROJECT [1,2] ; INTERSECT { PERMUTE [2,1,3] PRODUCT [R1,EQ] ; PERMUTE [1,2,3] PRODUCT [R2,R3] }

``R<k>`` names the ``k``-th catalog relation and ``EQ`` the equality relation.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .algebra import OPS, Algebra, Term, fmt_elem, op_name, parse_elem, parse_term
from .subpower import Relation, encode, meets_C, project, sigma

MAX_PRODUCT_ARITY = 12
MAX_INTERSECTION_WIDTH = 8
DEFAULT_TUPLE_BUDGET = 2_000_000
EQ = "EQ"


class EntailError(ValueError):
    pass


class EntailBudgetExceeded(RuntimeError):
    pass


# -- expressions ------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    index: int


@dataclass(frozen=True)
class Eq:
    pass


@dataclass(frozen=True)
class Intersect:
    children: tuple


@dataclass(frozen=True)
class Product:
    children: tuple


@dataclass(frozen=True)
class Permute:
    child: object
    perm: tuple[int, ...]  # column i of the result is column perm[i] of the child


@dataclass(frozen=True)
class Project:
    child: object
    coords: tuple[int, ...]


EntailExpr = Union[Atom, Eq, Intersect, Product, Permute, Project]


def arity_of(e: EntailExpr, catalog: Sequence[Relation]) -> int:
    if isinstance(e, Atom):
        if not 0 <= e.index < len(catalog):
            raise EntailError(f"catalog index {e.index} outside 0..{len(catalog) - 1}")
        return catalog[e.index].arity
    if isinstance(e, Eq):
        return 2
    if isinstance(e, Intersect):
        if not e.children:
            raise EntailError("intersection needs at least one child")
        ars = {arity_of(c, catalog) for c in e.children}
        if len(ars) != 1:
            raise EntailError(f"intersection of relations with arities {sorted(ars)}")
        return ars.pop()
    if isinstance(e, Product):
        return sum(arity_of(c, catalog) for c in e.children)
    if isinstance(e, Permute):
        n = arity_of(e.child, catalog)
        if sorted(e.perm) != list(range(n)):
            raise EntailError(f"{list(e.perm)} is not a permutation of 0..{n - 1}")
        return n
    if isinstance(e, Project):
        n = arity_of(e.child, catalog)
        if not e.coords or any(not 0 <= c < n for c in e.coords):
            raise EntailError(f"projection coordinates {list(e.coords)} invalid for arity {n}")
        return len(e.coords)
    raise TypeError(f"not an entailment expression: {e!r}")


def equality(alg: Algebra) -> Relation:
    return Relation.from_tuples([(a, a) for a in alg.elements], alg.size, 2)


def product(rels: Sequence[Relation], budget: int = DEFAULT_TUPLE_BUDGET,
            max_arity: int = MAX_PRODUCT_ARITY) -> Relation:
    base = rels[0].base
    arity = sum(r.arity for r in rels)
    if arity > max_arity:
        raise EntailBudgetExceeded(f"product arity {arity} exceeds the cap {max_arity}")
    size = math.prod(len(r) for r in rels)
    if size > budget:
        raise EntailBudgetExceeded(f"product would have {size} tuples (budget {budget})")
    codes = np.zeros(1, np.int64)
    for r in rels:
        codes = (codes[:, None] * (base ** r.arity) + r.codes[None, :]).ravel()
    return Relation(arity, base, codes[:size] if size else np.empty(0, np.int64), canonical=True)


def eval_expression(alg: Algebra, catalog: Sequence[Relation], e: EntailExpr,
                    budget: int = DEFAULT_TUPLE_BUDGET, max_arity: int = MAX_PRODUCT_ARITY) -> Relation:
    arity_of(e, catalog)
    memo: dict[int, Relation] = {}

    def ev(node) -> Relation:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Atom):
            out = catalog[node.index]
        elif isinstance(node, Eq):
            out = equality(alg)
        elif isinstance(node, Intersect):
            out = ev(node.children[0])
            for c in node.children[1:]:
                out = out & ev(c)
        elif isinstance(node, Product):
            out = product([ev(c) for c in node.children], budget, max_arity)
        elif isinstance(node, Permute):
            out = project(ev(node.child), node.perm)
        else:
            out = project(ev(node.child), node.coords)
        memo[key] = out
        return out

    return ev(e)


_EXPR_TOKEN = re.compile(r"\s*(R\d+|EQ|intersect|product|permute|project|\[[\d,\s]*\]|\(|\)|,)", re.I)


def parse_expression(text: str) -> EntailExpr:
    """Parse e.g. ``project[1](product(R1, EQ))`` (1-based indices)."""
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _EXPR_TOKEN.match(text, pos)
        if not m:
            raise EntailError(f"bad expression syntax at {text[pos:]!r}")
        toks.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    stack = {"i": 0}

    def peek():
        return toks[stack["i"]] if stack["i"] < len(toks) else None

    def take(want=None):
        t = peek()
        if t is None or (want is not None and t.lower() != want):
            raise EntailError(f"expected {want or 'a token'}, got {t!r}")
        stack["i"] += 1
        return t

    def ints(tok):
        body = tok.strip("[]").strip()
        return tuple(int(v) - 1 for v in body.split(",")) if body else ()

    def expr():
        t = take()
        low = t.lower()
        if low == "eq":
            return Eq()
        if low.startswith("r") and low[1:].isdigit():
            return Atom(int(low[1:]) - 1)
        if low in ("permute", "project"):
            idx = ints(take())
            take("(")
            child = expr()
            take(")")
            return Permute(child, idx) if low == "permute" else Project(child, idx)
        if low in ("intersect", "product"):
            take("(")
            kids = [expr()]
            while peek() == ",":
                take(",")
                kids.append(expr())
            take(")")
            return Intersect(tuple(kids)) if low == "intersect" else Product(tuple(kids))
        raise EntailError(f"unexpected token {t!r}")

    out = expr()
    if peek() is not None:
        raise EntailError(f"trailing tokens starting at {peek()!r}")
    return out


# -- canonical certificates ------------------------------------------------------------------

@dataclass(frozen=True)
class Factor:
    perm: tuple[int, ...]
    atoms: tuple  # catalog indices or EQ


@dataclass(frozen=True)
class CanonicalCertificate:
    projection: tuple[int, ...]
    factors: tuple[Factor, ...]

    def to_expr(self) -> EntailExpr:
        kids = tuple(Permute(Product(tuple(Eq() if a == EQ else Atom(a) for a in f.atoms)), f.perm)
                     for f in self.factors)
        return Project(Intersect(kids), self.projection)

    def __str__(self) -> str:
        one = lambda xs: "[" + ",".join(str(x + 1) for x in xs) + "]"  # noqa: E731
        atoms = lambda xs: "[" + ",".join(EQ if a == EQ else f"R{a + 1}" for a in xs) + "]"  # noqa: E731
        body = " ; ".join(f"PERMUTE {one(f.perm)} PRODUCT {atoms(f.atoms)}" for f in self.factors)
        return f"PROJECT {one(self.projection)} ; INTERSECT {{ {body} }}"

    def catalog_indices(self) -> set[int]:
        return {a for f in self.factors for a in f.atoms if a != EQ}


_CERT = re.compile(r"\s*PROJECT\s*\[([\d,\s]*)\]\s*;\s*INTERSECT\s*\{(.*)\}\s*$", re.S | re.I)
_FACTOR = re.compile(r"\s*PERMUTE\s*\[([\d,\s]*)\]\s*PRODUCT\s*\[([^\]]*)\]\s*$", re.I)


def parse_certificate(text: str) -> CanonicalCertificate:
    m = _CERT.match(text)
    if not m:
        raise EntailError("expected 'PROJECT [..] ; INTERSECT { PERMUTE [..] PRODUCT [..] ; ... }'")

    def ints(body):
        body = body.strip()
        return tuple(int(v) - 1 for v in body.split(",")) if body else ()

    factors = []
    for part in m.group(2).split(";"):
        if not part.strip():
            continue
        f = _FACTOR.match(part)
        if not f:
            raise EntailError(f"bad factor {part.strip()!r}")
        atoms = []
        for a in f.group(2).split(","):
            a = a.strip().upper()
            if a == EQ:
                atoms.append(EQ)
            elif re.fullmatch(r"R\d+", a):
                atoms.append(int(a[1:]) - 1)
            else:
                raise EntailError(f"bad relation name {a!r}")
        factors.append(Factor(ints(f.group(1)), tuple(atoms)))
    if not factors:
        raise EntailError("certificate has no factors")
    return CanonicalCertificate(ints(m.group(1)), tuple(factors))


def _factor_value(alg, catalog, f: Factor, budget, max_arity) -> Relation:
    rels = [equality(alg) if a == EQ else catalog[a] for a in f.atoms]
    for a in f.atoms:
        if a != EQ and not 0 <= a < len(catalog):
            raise EntailError(f"catalog index {a} outside 0..{len(catalog) - 1}")
    p = product(rels, budget, max_arity)
    if sorted(f.perm) != list(range(p.arity)):
        raise EntailError(f"{[x + 1 for x in f.perm]} is not a permutation of 1..{p.arity}")
    return project(p, f.perm)


def canonical_form_eval(alg: Algebra, catalog: Sequence[Relation], cert: CanonicalCertificate,
                        budget: int = DEFAULT_TUPLE_BUDGET, max_arity: int = MAX_PRODUCT_ARITY,
                        max_width: int = MAX_INTERSECTION_WIDTH) -> Relation:
    if len(cert.factors) > max_width:
        raise EntailBudgetExceeded(f"{len(cert.factors)} intersected factors exceed the cap {max_width}")
    values = [_factor_value(alg, catalog, f, budget, max_arity) for f in cert.factors]
    if len({v.arity for v in values}) != 1:
        raise EntailError("intersected factors have different arities")
    b = values[0]
    for v in values[1:]:
        b = b & v
    if any(not 0 <= c < b.arity for c in cert.projection) or not cert.projection:
        raise EntailError(f"projection {[c + 1 for c in cert.projection]} invalid for arity {b.arity}")
    return project(b, cert.projection)


@dataclass
class ConsequenceCheck:
    applicable: bool
    holds: bool | None
    reason: str


def halting_consequence(alg: Algebra, catalog: Sequence[Relation], cert: CanonicalCertificate,
                        value: Relation) -> ConsequenceCheck:
    """If every relation used has arity below ``m`` and the value contains the
    ``m`` unit tuples, the value must contain a tuple with all contents in C."""
    m = value.arity
    used = [catalog[i].arity for i in cert.catalog_indices()]
    if any(f.atoms.count(EQ) for f in cert.factors):
        used.append(2)
    n = max(used, default=0)
    if n >= m:
        return ConsequenceCheck(False, None, f"uses a relation of arity {n} >= {m}")
    if not all(t in value for t in sigma(m)):
        return ConsequenceCheck(False, None, "value does not contain the unit tuples")
    ok = meets_C(value)
    return ConsequenceCheck(True, ok, "value meets C^m" if ok else "value misses C^m")


# -- polymorphism checks ----------------------------------------------------------------------

class OpTable:
    """An ``n``-ary operation on the domain given by a vectorized function."""

    def __init__(self, arity: int, fn: Callable, label: str = "f"):
        self.arity = arity
        self.fn = fn
        self.label = label

    def __call__(self, *cols):
        return self.fn(*cols)

    @classmethod
    def from_table(cls, table: np.ndarray, label="table"):
        table = np.asarray(table)
        return cls(table.ndim, lambda *c: table[tuple(c)], label)

    @classmethod
    def from_op(cls, alg: Algebra, name: str):
        name = op_name(name)
        return cls(OPS[name], lambda *c: alg.vop(name, *c), name)

    @classmethod
    def from_term(cls, alg: Algebra, t: Term, arity: int | None = None):
        n = arity or max(t.variables())
        return cls(n, lambda *c: np.asarray(_eval_arrays(alg, t, c)), str(t))

    @classmethod
    def constant(cls, value: int, arity: int = 1):
        return cls(arity, lambda *c: np.full(np.shape(c[0]), value, np.int64), f"const {fmt_elem(value)}")

    @classmethod
    def projection(cls, arity: int, i: int):
        return cls(arity, lambda *c: np.asarray(c[i]), f"x{i + 1}")

    @classmethod
    def parse(cls, alg: Algebra, text: str):
        """An operation name, ``const (i,c)``, or a term such as ``M(x1, x2)``."""
        text = text.strip()
        if text.lower().startswith("const"):
            return cls.constant(parse_elem(text[5:]))
        try:
            return cls.from_op(alg, text)
        except KeyError:
            return cls.from_term(alg, parse_term(text))


def _eval_arrays(alg: Algebra, t: Term, cols):
    if t.is_var:
        return np.asarray(cols[t.var - 1])
    return alg.vop(t.op, *(_eval_arrays(alg, a, cols) for a in t.args))


@dataclass
class PreservationVerdict:
    preserved: bool
    exhaustive: bool
    checked: int
    args: tuple[tuple[int, ...], ...] = ()
    output: tuple[int, ...] | None = None

    def __bool__(self):
        return self.preserved

    def describe(self) -> str:
        how = "full scan" if self.exhaustive else "sampled"
        if self.preserved:
            return f"preserved ({how}, {self.checked} argument lists)"
        args = "; ".join(",".join(fmt_elem(v) for v in a) for a in self.args)
        out = ",".join(fmt_elem(v) for v in self.output)
        return f"not preserved ({how}): f[{args}] = {out}"


def preserves(alg: Algebra, f: OpTable, rel: Relation, full_scan_arity: int = 3,
              scan_limit: int = 2_000_000, samples: int = 20_000, seed: int = 0xC10E) -> PreservationVerdict:
    """Does ``f`` applied coordinatewise to tuples of ``rel`` stay in ``rel``?"""
    n = f.arity
    rows = rel.rows
    total = len(rows) ** n
    if not len(rows):
        return PreservationVerdict(True, True, 0)
    exhaustive = n <= full_scan_arity and total <= scan_limit
    if exhaustive:
        step = max(1, (1 << 20) // max(1, n * rel.arity))
        batches = (np.unravel_index(np.arange(s, min(total, s + step)), (len(rows),) * n)
                   for s in range(0, total, step))
    else:
        rng = np.random.default_rng(seed)
        picks = rng.integers(0, len(rows), size=(samples, n))
        batches = [tuple(picks[:, j] for j in range(n))]
    checked = 0
    for idx in batches:
        out = np.asarray(f(*(rows[i] for i in idx)), dtype=np.int64).reshape(len(idx[0]), rel.arity)
        ok = rel.contains_codes(encode(out, rel.base))
        checked += len(ok)
        if not ok.all():
            b = int(np.argmin(ok))
            return PreservationVerdict(False, exhaustive, checked,
                                       tuple(tuple(int(v) for v in rows[i[b]]) for i in idx),
                                       tuple(int(v) for v in out[b]))
    return PreservationVerdict(True, exhaustive, checked)


# -- certificate search -----------------------------------------------------------------------

@dataclass
class SearchBounds:
    max_arity: int = 6
    max_atoms: int = 3
    max_factors: int = MAX_INTERSECTION_WIDTH
    max_candidates: int = 20_000
    permutations: str = "auto"  # full | block | auto (full up to arity 5)
    tuple_budget: int = DEFAULT_TUPLE_BUDGET


@dataclass
class SearchResult:
    status: str  # found | not-found-within-bounds | budget-exhausted
    certificate: CanonicalCertificate | None = None
    candidates: int = 0
    note: str = ""

    def describe(self) -> str:
        out = f"{self.status} after {self.candidates} candidate factors"
        if self.certificate is not None:
            out += f": {self.certificate}"
        if self.note:
            out += f" ({self.note})"
        return out


def _block_perms(arities: Sequence[int]):
    """Reorder the product blocks, then permute inside each block."""
    seen = set()
    offsets = np.cumsum([0, *arities])
    blocks = [list(range(offsets[i], offsets[i + 1])) for i in range(len(arities))]
    for order in itertools.permutations(range(len(blocks))):
        inner = [itertools.permutations(blocks[b]) for b in order]
        for parts in itertools.product(*inner):
            p = tuple(x for part in parts for x in part)
            if p not in seen:
                seen.add(p)
                yield p


class _Budget(Exception):
    pass


def search_entailment(alg: Algebra, catalog: Sequence[Relation], target: Relation,
                      bounds: SearchBounds | None = None) -> SearchResult:
    """Bounded search for a certificate whose value equals ``target``.

    A ``not-found-within-bounds`` result says nothing about entailment.
    """
    b = bounds or SearchBounds()
    m = target.arity
    for i, r in enumerate(catalog):
        if r == target:
            return SearchResult("found", CanonicalCertificate(tuple(range(m)), (Factor(tuple(range(m)), (i,)),)), 0)
    atoms = list(range(len(catalog))) + [EQ]
    ar = {a: (2 if a == EQ else catalog[a].arity) for a in atoms}
    count = 0
    seen_values: set = set()

    def candidates(n):
        nonlocal count
        for k in range(1, b.max_atoms + 1):
            for combo in itertools.combinations_with_replacement(atoms, k):
                if sum(ar[a] for a in combo) != n:
                    continue
                try:
                    base = product([equality(alg) if a == EQ else catalog[a] for a in combo],
                                   b.tuple_budget, max(b.max_arity, n))
                except EntailBudgetExceeded:
                    continue
                full = b.permutations == "full" or (b.permutations == "auto" and n <= 5)
                perms = itertools.permutations(range(n)) if full else _block_perms([ar[a] for a in combo])
                for p in perms:
                    count += 1
                    if count > b.max_candidates:
                        raise _Budget
                    v = project(base, p)
                    key = (n, v.codes.tobytes())
                    if key in seen_values:
                        continue
                    seen_values.add(key)
                    yield Factor(tuple(p), combo), v

    try:
        for n in range(m, b.max_arity + 1):
            head = tuple(range(m))
            chosen: list[tuple[Factor, Relation]] = []
            current: Relation | None = None
            pool = []
            for f, v in candidates(n):
                if not target.issubset(project(v, head)):
                    continue
                pool.append((f, v))
            pool.sort(key=lambda fv: len(fv[1]))
            for f, v in pool:
                if len(chosen) >= b.max_factors:
                    break
                nxt = v if current is None else current & v
                if current is not None and len(nxt) == len(current):
                    continue
                if not target.issubset(project(nxt, head)):
                    continue
                chosen.append((f, v))
                current = nxt
                if project(current, head) == target:
                    return SearchResult("found", CanonicalCertificate(head, tuple(c[0] for c in chosen)), count)
    except _Budget:
        return SearchResult("budget-exhausted", None, count - 1, f"candidate cap {b.max_candidates}")
    return SearchResult("not-found-within-bounds", None, count,
                        f"arity <= {b.max_arity}, <= {b.max_atoms} atoms per product, "
                        f"<= {b.max_factors} factors")
