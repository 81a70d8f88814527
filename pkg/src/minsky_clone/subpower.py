"""Subpowers of the machine algebra: closure, projection and classification.

A relation is stored as a sorted array of int64 codes; the code of a tuple is
its base-``|A|`` numeral (first coordinate most significant), so numeric and
lexicographic order agree.

Closure runs round by round.  Round ``n`` applies every operation to every
argument list that uses at least one tuple first seen in round ``n-1``; the
set after round ``n`` is therefore exactly the ``n``-th stage of the
generation chain.  Before enumerating argument lists, each argument is
replaced by a representative that keeps only what the operation can see
(for ``I`` just the dot mask of ``x`` and the C-mask of ``y``, for ``P`` the
state vectors of ``u`` and ``v``, and so on).  That keeps the enumeration
small while producing exactly the same output set.
"""

from __future__ import annotations

import itertools
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra import (CA, CB, CROSS, DOT, OPS, ZERO, Algebra, elem, fmt_elem,
                      op_name, parse_elems)

DEFAULT_BUDGET = 2_000_000
_CHUNK_CELLS = 1 << 21


class ClosureBudgetExceeded(RuntimeError):
    """Closure outgrew its tuple budget; ``partial`` holds what was built."""

    def __init__(self, budget: int, partial: "Relation"):
        super().__init__(f"closure exceeded the budget of {budget} tuples "
                         f"(partial closure has {len(partial)} tuples after {partial.provenance.rounds} rounds)")
        self.budget = budget
        self.partial = partial


# -- encoding --------------------------------------------------------------------

def _powers(base: int, m: int) -> np.ndarray:
    if m and base ** m >= 2 ** 62:
        raise ValueError(f"arity {m} over a domain of {base} elements does not fit 64-bit tuple codes")
    return base ** np.arange(m - 1, -1, -1, dtype=np.int64)


def encode(rows: np.ndarray, base: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim != 2:
        raise ValueError("expected a 2-dimensional array of tuples")
    if rows.shape[1] == 0:
        return np.zeros(rows.shape[0], dtype=np.int64)
    return rows @ _powers(base, rows.shape[1])


def decode(codes: np.ndarray, base: int, m: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.shape[0], m), dtype=np.int64)
    rest = codes.copy()
    for j in range(m - 1, -1, -1):
        out[:, j] = rest % base
        rest //= base
    return out


@dataclass
class Provenance:
    generators: tuple[tuple[int, ...], ...] = ()
    rounds: int = 0
    peak_frontier: int = 0
    stage_sizes: tuple[int, ...] = ()
    note: str = ""


class Relation:
    """A finite set of ``m``-tuples over an algebra domain of size ``base``."""

    __slots__ = ("arity", "base", "codes", "provenance", "_rows")

    def __init__(self, arity: int, base: int, codes, provenance: Provenance | None = None, *, canonical=False):
        self.arity = arity
        self.base = base
        codes = np.asarray(codes, dtype=np.int64)
        self.codes = codes if canonical else np.unique(codes)
        self.provenance = provenance or Provenance()
        self._rows = None

    @classmethod
    def from_tuples(cls, tuples: Iterable[Sequence[int]], base: int, arity: int | None = None,
                    provenance: Provenance | None = None) -> "Relation":
        rows = [tuple(int(v) for v in t) for t in tuples]
        if arity is None:
            if not rows:
                raise ValueError("arity is required for an empty tuple set")
            arity = len(rows[0])
        if any(len(r) != arity for r in rows):
            raise ValueError("tuples of mixed arity")
        if any(not 0 <= v < base for r in rows for v in r):
            raise ValueError(f"tuple entry outside the domain 0..{base - 1}")
        arr = np.array(rows, dtype=np.int64).reshape(len(rows), arity)
        return cls(arity, base, encode(arr, base), provenance)

    @property
    def rows(self) -> np.ndarray:
        if self._rows is None:
            self._rows = decode(self.codes, self.base, self.arity)
            self._rows.flags.writeable = False
        return self._rows

    def __len__(self):
        return int(self.codes.shape[0])

    def __iter__(self):
        return (tuple(r) for r in self.rows.tolist())

    def __contains__(self, t) -> bool:
        if len(t) != self.arity:
            return False
        c = encode(np.array([t], dtype=np.int64), self.base)[0]
        i = np.searchsorted(self.codes, c)
        return bool(i < len(self.codes) and self.codes[i] == c)

    def contains_codes(self, codes: np.ndarray) -> np.ndarray:
        i = np.searchsorted(self.codes, codes)
        i = np.minimum(i, max(len(self.codes) - 1, 0))
        if not len(self.codes):
            return np.zeros(len(codes), bool)
        return self.codes[i] == codes

    def __eq__(self, other):
        return (isinstance(other, Relation) and self.arity == other.arity and self.base == other.base
                and np.array_equal(self.codes, other.codes))

    def __hash__(self):
        return hash((self.arity, self.base, self.codes.tobytes()))

    def issubset(self, other: "Relation") -> bool:
        return bool(self.contains_in(other).all())

    def contains_in(self, other: "Relation") -> np.ndarray:
        if self.arity != other.arity:
            raise ValueError("arity mismatch")
        return other.contains_codes(self.codes)

    def __and__(self, other: "Relation") -> "Relation":
        if self.arity != other.arity:
            raise ValueError("arity mismatch")
        return Relation(self.arity, self.base, np.intersect1d(self.codes, other.codes), canonical=True)

    def __or__(self, other: "Relation") -> "Relation":
        if self.arity != other.arity:
            raise ValueError("arity mismatch")
        return Relation(self.arity, self.base, np.union1d(self.codes, other.codes), canonical=True)

    def __repr__(self):
        return f"Relation(arity={self.arity}, size={len(self)})"

    def select(self, mask: np.ndarray) -> "Relation":
        return Relation(self.arity, self.base, self.codes[mask], canonical=True)

    def to_text(self, states: int | None = None, generators: bool = True) -> str:
        lines = [f"arity {self.arity}"]
        if states is not None:
            lines.append(f"states {states}")
        if generators:
            for g in self.provenance.generators:
                lines.append("# generator " + ",".join(fmt_elem(v) for v in g))
        lines += [",".join(fmt_elem(v) for v in r) for r in self.rows.tolist()]
        return "\n".join(lines) + "\n"


def parse_relation(text: str, base: int | None = None) -> Relation:
    """Read the relation file format.

    ``base`` defaults to ``5 * (N + 1)`` from the ``states N`` header.
    """
    arity = states = None
    gens, tuples = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*generator\s+(.*)", line)
            if m:
                gens.append(tuple(parse_elems(m.group(1))))
            continue
        head = line.split()
        if head[0] in ("arity", "states"):
            if len(head) != 2 or not head[1].isdigit():
                raise ValueError(f"line {lineno}: expected '{head[0]} <n>'")
            if head[0] == "arity":
                arity = int(head[1])
            else:
                states = int(head[1])
            continue
        try:
            tuples.append(tuple(parse_elems(line)))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if arity is None:
        raise ValueError("missing 'arity m' header")
    if base is None:
        if states is None:
            raise ValueError("missing 'states N' header and no domain size given")
        base = 5 * (states + 1)
    for t in tuples + gens:
        if len(t) != arity:
            raise ValueError(f"tuple of length {len(t)} in a relation of arity {arity}")
    return Relation.from_tuples(tuples, base, arity, Provenance(generators=tuple(gens)))


# -- argument representatives and enumeration plans ----------------------------------

@dataclass
class _Keys:
    """Distinct representatives together with one source tuple for each."""

    rep: np.ndarray
    src: np.ndarray

    def __len__(self):
        return len(self.rep)

    @staticmethod
    def cat(a: "_Keys", b: "_Keys") -> "_Keys":
        return _Keys(np.concatenate([a.rep, b.rep]), np.concatenate([a.src, b.src]))


def _unique_keys(rep: np.ndarray, src: np.ndarray, base: int) -> tuple[_Keys, np.ndarray]:
    codes = encode(rep, base)
    u, idx = np.unique(codes, return_index=True)
    return _Keys(rep[idx], src[idx]), u


def _split(rep_fn: Callable, old: np.ndarray, new: np.ndarray, base: int) -> tuple[_Keys, _Keys]:
    """Representatives of old tuples, and those reachable only from new tuples."""
    k_old, c_old = _unique_keys(rep_fn(old), old, base)
    k_new, c_new = _unique_keys(rep_fn(new), new, base)
    fresh = ~np.isin(c_new, c_old)
    return k_old, _Keys(k_new.rep[fresh], k_new.src[fresh])


@dataclass
class _Job:
    """All combinations of ``keys`` (one key per position) fed through ``fn``."""

    fn: Callable
    keys: list[_Keys]
    prefix: tuple = ()  # source tuples of context arguments placed before ``keys``
    widths: tuple = ()  # arguments packed into each key position's source (default 1 each)

    @property
    def count(self) -> int:
        return math.prod(len(k) for k in self.keys)


def _seminaive(fn, pairs: list[tuple[_Keys, _Keys]], prefix=(), widths=()) -> list[_Job]:
    jobs = []
    for p in range(len(pairs)):
        if not len(pairs[p][1]):
            continue
        keys = [pairs[q][0] for q in range(p)] + [pairs[p][1]] + \
               [_Keys.cat(*pairs[q]) for q in range(p + 1, len(pairs))]
        jobs.append(_Job(fn, keys, prefix, widths))
    return jobs


def _void(rows: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    return rows.view(np.dtype((np.void, 8 * rows.shape[1]))).ravel()


def _pair_keys(alg: Algebra, keep: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> _Keys:
    """Distinct ``(x', y')`` over ``xs x ys`` where off ``keep`` both become ``x meet y``.

    For ``Ndot`` with a fixed dot mask ``keep`` of its first argument, the
    output off the mask sees ``x`` and ``y`` only through their meet.
    """
    m = xs.shape[1]
    if not len(xs) or not len(ys):
        return _Keys(np.empty((0, 2 * m), np.int64), np.empty((0, 2 * m), np.int64))
    reps, srcs = [], []
    step = max(1, _CHUNK_CELLS // (4 * m))
    total = len(xs) * len(ys)
    for start in range(0, total, step):
        i, j = np.divmod(np.arange(start, min(total, start + step)), len(ys))
        x, y = xs[i], ys[j]
        w = alg.vop("meet", x, y)
        rep = np.concatenate([np.where(keep, x, w), np.where(keep, y, w)], axis=1)
        _, idx = np.unique(_void(rep), return_index=True)
        reps.append(rep[idx])
        srcs.append(np.concatenate([x[idx], y[idx]], axis=1))
    rep, src = np.concatenate(reps), np.concatenate(srcs)
    _, idx = np.unique(_void(rep), return_index=True)
    return _Keys(rep[idx], src[idx])


def _pair_split(alg, keep, old, new, all_new=False) -> tuple[_Keys, _Keys]:
    """Pair keys from old x old, and those reachable only with a new tuple."""
    if all_new:
        both = np.concatenate([old, new])
        return _Keys(np.empty((0, 2 * old.shape[1]), np.int64), np.empty((0, 2 * old.shape[1]), np.int64)), \
            _pair_keys(alg, keep, both, both)
    k_old = _pair_keys(alg, keep, old, old)
    both = np.concatenate([old, new])
    k_new = _Keys.cat(_pair_keys(alg, keep, new, both), _pair_keys(alg, keep, old, new))
    _, idx = np.unique(_void(k_new.rep), return_index=True)
    k_new = _Keys(k_new.rep[idx], k_new.src[idx])
    fresh = ~np.isin(_void(k_new.rep), _void(k_old.rep)) if len(k_old) else np.ones(len(k_new), bool)
    return k_old, _Keys(k_new.rep[fresh], k_new.src[fresh])


def _ndot_pair(vop, d, xy, z):
    m = z.shape[-1]
    return vop("Ndot", d, xy[..., :m], xy[..., m:], z)


def _all_of(pairs: list[tuple[_Keys, _Keys]]) -> list[_Keys]:
    return [_Keys.cat(*p) for p in pairs]


def _crossed(x):
    return x - x % 5 + CROSS


def _plan(alg: Algebra, name: str, old: np.ndarray, new: np.ndarray) -> list[_Job]:
    base = alg.size
    ident = lambda r: r  # noqa: E731
    vop = alg.vop

    if name in ("Mp", "H"):
        k, _ = _unique_keys(new, new, base)
        return [_Job(lambda x, _n=name: vop(_n, x), [k])] if len(k) else []

    if name in ("meet", "M"):
        p = _split(ident, old, new, base)
        return _seminaive(lambda x, y, _n=name: vop(_n, x, y), [p, p])

    if name == "I":
        px = _split(lambda r: np.where(r % 5 == DOT, DOT, CROSS), old, new, base)
        py = _split(lambda r: np.where(r % 5 >= ZERO, ZERO, CROSS), old, new, base)
        return _seminaive(lambda x, y: vop("I", x, y), [px, py])

    if name == "S":
        one0, onex, onedot = elem(1, ZERO), elem(1, CROSS), elem(1, DOT)
        px = _split(lambda r: np.where(r == one0, one0, onex), old, new, base)
        yz = lambda r: np.where(r == one0, one0, np.where(r == onedot, onedot, onex))  # noqa: E731
        py = _split(yz, old, new, base)
        return _seminaive(lambda x, y, z: vop("S", x, y, z), [px, py, py])

    jobs: list[_Job] = []

    if name == "N0":
        cls = lambda r: np.where(r == DOT, DOT, np.where(r == ZERO, ZERO, CROSS))  # noqa: E731
        cx_old, cx_new = _split(cls, old, new, base)
        for ks, is_new in ((cx_old, False), (cx_new, True)):
            for c, src in zip(ks.rep, ks.src):
                keep_y, keep_z = c == DOT, c == ZERO
                py = _split(lambda r: np.where(keep_y, r, _crossed(r)), old, new, base)
                pz = _split(lambda r: np.where(keep_z, r, _crossed(r)), old, new, base)
                fn = lambda y, z, _c=c: vop("N0", _c, y, z)  # noqa: E731
                if is_new:
                    jobs.append(_Job(fn, _all_of([py, pz]), (src,)))
                else:
                    jobs += _seminaive(fn, [py, pz], (src,))
        return jobs

    if name == "Ndot":
        du_old, du_new = _split(lambda r: np.where(r % 5 == DOT, DOT, CROSS), old, new, base)
        for ks, is_new in ((du_old, False), (du_new, True)):
            for d, src in zip(ks.rep, ks.src):
                keep = d == DOT
                pz = _split(lambda r: np.where(keep, r, _crossed(r)), old, new, base)
                fn = lambda xy, z, _d=d: _ndot_pair(vop, _d, xy, z)  # noqa: E731
                if is_new:
                    pxy = _Keys.cat(*_pair_split(alg, keep, old, new, all_new=True))
                    jobs.append(_Job(fn, [pxy, _Keys.cat(*pz)], (src,), (2, 1)))
                else:
                    jobs += _seminaive(fn, [_pair_split(alg, keep, old, new), pz], (src,), (2, 1))
        return jobs

    if name == "P":
        su_old, su_new = _split(_crossed, old, new, base)
        su_all = _Keys.cat(su_old, su_new)
        # masks reachable from old (u, v) pairs versus only via a new tuple
        masks: dict[bytes, tuple[np.ndarray, tuple, bool]] = {}
        for ku, kv, is_new in ((su_old, su_old, False), (su_new, su_all, True), (su_old, su_new, True)):
            for (u, us), (v, vs) in itertools.product(zip(ku.rep, ku.src), zip(kv.rep, kv.src)):
                mask = (u // 5) == (v // 5)
                key = mask.tobytes()
                if key not in masks or (masks[key][2] and not is_new):
                    masks[key] = (mask, (us, vs), is_new)
        zero = np.zeros(1, dtype=np.int64)
        for key in sorted(masks):
            mask, srcs, is_new = masks[key]
            px = _split(lambda r: np.where(mask, r, zero), old, new, base)
            py = _split(lambda r: np.where(mask, zero, r), old, new, base)
            fn = lambda x, y, _m=mask: np.where(_m, x, y)  # noqa: E731
            if is_new:
                jobs.append(_Job(fn, _all_of([px, py]), srcs))
            else:
                jobs += _seminaive(fn, [px, py], srcs)
        return jobs

    raise KeyError(name)


def _chunks(job: _Job, m: int):
    sizes = [len(k) for k in job.keys]
    total = math.prod(sizes)
    step = max(1, _CHUNK_CELLS // max(1, m * len(sizes)))
    for start in range(0, total, step):
        idx = np.unravel_index(np.arange(start, min(total, start + step)), sizes)
        yield idx, job.fn(*(k.rep[i] for k, i in zip(job.keys, idx)))


def _run_job(job: _Job, base: int, m: int) -> np.ndarray:
    if job.count == 0:
        return np.empty(0, np.int64)
    parts = [np.unique(encode(out, base)) for _, out in _chunks(job, m)]
    return np.unique(np.concatenate(parts)) if len(parts) > 1 else parts[0]


def _op_images(alg: Algebra, name: str, old: np.ndarray, new: np.ndarray, m: int) -> np.ndarray:
    parts = [_run_job(j, alg.size, m) for j in _plan(alg, name, old, new)]
    parts = [p for p in parts if len(p)]
    if not parts:
        return np.empty(0, np.int64)
    return np.unique(np.concatenate(parts))


def op_image(alg: Algebra, op: str, rel: Relation) -> Relation:
    """``F(R, ..., R)`` computed coordinatewise for one operation ``F``."""
    empty = np.empty((0, rel.arity), np.int64)
    return Relation(rel.arity, rel.base, _op_images(alg, op_name(op), empty, rel.rows, rel.arity), canonical=True)


# -- generation ----------------------------------------------------------------------

def _as_rows(alg: Algebra, generators) -> np.ndarray:
    if isinstance(generators, Relation):
        return generators.rows
    rows = [tuple(int(v) for v in g) for g in generators]
    if not rows:
        raise ValueError("cannot generate from an empty set of tuples")
    m = len(rows[0])
    if m < 1 or any(len(r) != m for r in rows):
        raise ValueError("generators must share one arity m >= 1")
    if any(not 0 <= v < alg.size for r in rows for v in r):
        raise ValueError("generator entry outside the algebra's domain")
    return np.array(rows, dtype=np.int64)


def generate(alg: Algebra, generators, budget: int | None = DEFAULT_BUDGET, workers: int = 1,
             max_rounds: int | None = None, ops: Iterable[str] | None = None) -> Relation:
    """The least relation containing ``generators`` closed under ``ops`` (default: all nine).

    Raises :class:`ClosureBudgetExceeded` once more than ``budget`` tuples
    are known; the exception carries the partial closure.  ``workers > 1``
    evaluates the operations of a round concurrently; the result is the same
    set either way.
    """
    rows = _as_rows(alg, generators)
    if not len(rows):
        raise ValueError("cannot generate from an empty set of tuples")
    m = rows.shape[1]
    base = alg.size
    names = [op_name(o) for o in (ops or OPS)]
    gens = tuple(tuple(r) for r in rows.tolist())
    current = np.unique(encode(rows, base))
    frontier = current
    sizes = [len(current)]
    peak = len(current)
    rounds = 0

    def prov(note=""):
        return Provenance(gens, rounds, peak, tuple(sizes), note)

    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while len(frontier) and (max_rounds is None or rounds < max_rounds):
            old = decode(np.setdiff1d(current, frontier, assume_unique=True), base, m)
            new = decode(frontier, base, m)
            if pool:
                parts = list(pool.map(lambda n: _op_images(alg, n, old, new, m), names))
            else:
                parts = [_op_images(alg, n, old, new, m) for n in names]
            found = np.unique(np.concatenate(parts))
            frontier = np.setdiff1d(found, current, assume_unique=True)
            rounds += 1
            if len(frontier):
                current = np.union1d(current, frontier)
                sizes.append(len(current))
                peak = max(peak, len(frontier))
            if budget is not None and len(current) > budget:
                raise ClosureBudgetExceeded(budget, Relation(m, base, current, prov("partial"), canonical=True))
    finally:
        if pool:
            pool.shutdown()
    note = "" if not len(frontier) else "stopped at round limit"
    return Relation(m, base, current, prov(note), canonical=True)


@dataclass
class ClosureVerdict:
    closed: bool
    op: str | None = None
    args: tuple[tuple[int, ...], ...] = ()
    output: tuple[int, ...] | None = None

    def __bool__(self):
        return self.closed

    def describe(self) -> str:
        if self.closed:
            return "closed"
        args = "; ".join(",".join(fmt_elem(v) for v in a) for a in self.args)
        return f"not closed: {self.op}[{args}] = {','.join(fmt_elem(v) for v in self.output)}"


def closed_under(alg: Algebra, rel: Relation, ops: Iterable[str] | None = None) -> ClosureVerdict:
    """Check closure under ``ops``; on failure report arguments and output."""
    names = [op_name(o) for o in (ops or OPS)]
    m = rel.arity
    empty = np.empty((0, m), np.int64)
    rows = rel.rows
    for name in names:
        for job in _plan(alg, name, empty, rows):
            if job.count == 0:
                continue
            for idx, out in _chunks(job, m):
                ok = rel.contains_codes(encode(out, alg.size))
                if not ok.all():
                    b = int(np.argmin(ok))
                    srcs = [tuple(int(v) for v in s) for s in job.prefix]
                    for pos, (k, i) in enumerate(zip(job.keys, idx)):
                        row = [int(v) for v in k.src[i[b]]]
                        w = job.widths[pos] if job.widths else 1
                        srcs += [tuple(row[q * m:(q + 1) * m]) for q in range(w)]
                    srcs = tuple(srcs)
                    # representatives were checked; recompute on the source tuples themselves
                    real = alg.vop(name, *(np.array(s) for s in srcs))
                    return ClosureVerdict(False, name, srcs, tuple(int(v) for v in real))
    return ClosureVerdict(True)


# -- relation-level constructions -------------------------------------------------------

def project(rel: Relation, coords: Sequence[int]) -> Relation:
    """Coordinatewise image on ``coords`` (0-based, repeats allowed)."""
    coords = list(coords)
    for c in coords:
        if not 0 <= c < rel.arity:
            raise IndexError(f"coordinate {c} outside 0..{rel.arity - 1}")
    rows = rel.rows[:, coords]
    if not coords:
        codes = np.zeros(min(1, len(rel)), np.int64)
    else:
        codes = encode(rows, rel.base)
    return Relation(len(coords), rel.base, codes)


def without(m: int, *drop: int) -> list[int]:
    """The coordinate list ``[m]`` minus ``drop``."""
    return [i for i in range(m) if i not in drop]


def permute(rel: Relation, perm: Sequence[int]) -> Relation:
    """Column ``i`` of the result is column ``perm[i]`` of ``rel``."""
    if sorted(perm) != list(range(rel.arity)):
        raise ValueError(f"{list(perm)} is not a permutation of 0..{rel.arity - 1}")
    return project(rel, perm)


def sigma(m: int) -> list[tuple[int, ...]]:
    """The ``m`` unit tuples: ``<1,.>`` at one coordinate and ``<1,0>`` elsewhere."""
    return [tuple(elem(1, DOT) if i == j else elem(1, ZERO) for j in range(m)) for i in range(m)]


def config_set(alg: Algebra, k: int, alpha: int, beta: int, m: int) -> Relation:
    """All coordinate arrangements encoding the configuration ``(k, alpha, beta)``."""
    if min(alpha, beta) < 0 or alpha + beta >= m:
        raise ValueError(f"need alpha + beta < m, got alpha={alpha}, beta={beta}, m={m}")
    if not 0 <= k < alg.num_states:
        raise ValueError(f"state {k} outside 0..{alg.num_states - 1}")
    out = []
    for d in range(m):
        rest = [i for i in range(m) if i != d]
        for a_pos in itertools.combinations(rest, alpha):
            left = [i for i in rest if i not in a_pos]
            for b_pos in itertools.combinations(left, beta):
                t = [elem(k, ZERO)] * m
                t[d] = elem(k, DOT)
                for i in a_pos:
                    t[i] = elem(k, CA)
                for i in b_pos:
                    t[i] = elem(k, CB)
                out.append(t)
    return Relation.from_tuples(out, alg.size, m)


def sequential_relation(alg: Algebra, m: int, **kw) -> Relation:
    return generate(alg, sigma(m), **kw)


# -- classification --------------------------------------------------------------------

def _synchronized_rows(rows: np.ndarray) -> np.ndarray:
    if rows.shape[1] == 0:
        return np.ones(len(rows), bool)
    st = rows // 5
    return (st == st[:, :1]).all(axis=1)


def halting_rows(rows: np.ndarray) -> np.ndarray:
    """Mask of halting vectors: entries in {<0,.>, <0,0>}, not all <0,0>."""
    if rows.shape[1] == 0:
        return np.zeros(len(rows), bool)
    inside = ((rows == elem(0, DOT)) | (rows == elem(0, ZERO))).all(axis=1)
    return inside & (rows == elem(0, DOT)).any(axis=1)


def is_halting(rel: Relation) -> bool:
    return bool(halting_rows(rel.rows).any())


def is_synchronized(rel: Relation) -> bool:
    return bool(_synchronized_rows(rel.rows).all())


def is_computational(rel: Relation) -> bool:
    rows = rel.rows
    return bool(_synchronized_rows(rows).all() and ((rows % 5 == DOT).sum(axis=1) <= 1).all())


def dot_part(rel: Relation) -> tuple[int, ...]:
    return tuple(int(i) for i in np.flatnonzero((rel.rows % 5 == DOT).any(axis=0)))


def approx_halting(rel: Relation) -> tuple[int, ...]:
    """Coordinates whose deletion leaves a halting projection."""
    rows = rel.rows
    return tuple(i for i in range(rel.arity)
                 if halting_rows(rows[:, without(rel.arity, i)]).any())


def meets_C(rel: Relation) -> bool:
    """Whether some tuple has every content in {0, A, B}."""
    return bool((rel.rows % 5 >= ZERO).all(axis=1).any()) if len(rel) else False


def _capacity(rows: np.ndarray, restrict_Y: bool) -> tuple[int, tuple[tuple[int, tuple[int, ...]], ...]]:
    if restrict_Y:
        rows = rows[(rows % 5 != CROSS).all(axis=1)]
    dots = rows % 5 == DOT
    witnesses = []
    for i in np.flatnonzero(dots.any(axis=0)):
        r = rows[int(np.argmax(dots[:, i]))]
        witnesses.append((int(i), tuple(int(v) for v in r)))
    return len(witnesses) - 1, tuple(witnesses)


@dataclass
class RelationProfile:
    arity: int
    size: int
    synchronized: bool
    computational: bool
    halting: bool
    halting_witness: tuple[int, ...] | None
    dot_part: tuple[int, ...]
    approx_halting: tuple[int, ...]
    capacity: int
    capacity_witnesses: tuple
    weak_capacity: int
    weak_capacity_witnesses: tuple
    meets_C: bool = False

    def lines(self, one_based: bool = True) -> list[str]:
        sh = 1 if one_based else 0
        coords = lambda s: "{" + ",".join(str(i + sh) for i in s) + "}"  # noqa: E731
        hw = ",".join(fmt_elem(v) for v in self.halting_witness) if self.halting_witness else "-"
        out = [
            f"arity {self.arity}", f"size {self.size}",
            f"synchronized {str(self.synchronized).lower()}",
            f"computational {str(self.computational).lower()}",
            f"halting {str(self.halting).lower()} witness {hw}",
            f"meets_C {str(self.meets_C).lower()}",
            f"dot_part {coords(self.dot_part)}",
            f"approx_halting {coords(self.approx_halting)}",
            f"capacity {self.capacity}",
        ]
        for i, r in self.capacity_witnesses:
            out.append(f"  witness coord {i + sh}: {','.join(fmt_elem(v) for v in r)}")
        out.append(f"weak_capacity {self.weak_capacity}")
        return out


def classify(alg: Algebra | None, rel: Relation) -> RelationProfile:
    rows = rel.rows
    hm = halting_rows(rows)
    witness = tuple(int(v) for v in rows[int(np.argmax(hm))]) if hm.any() else None
    cap, capw = _capacity(rows, True)
    weak, weakw = _capacity(rows, False)
    return RelationProfile(
        arity=rel.arity, size=len(rel), synchronized=is_synchronized(rel),
        computational=is_computational(rel), halting=witness is not None, halting_witness=witness,
        dot_part=dot_part(rel), approx_halting=approx_halting(rel),
        capacity=cap, capacity_witnesses=capw, weak_capacity=weak, weak_capacity_witnesses=weakw,
        meets_C=meets_C(rel),
    )


# -- parts used for analysing non-halting relations --------------------------------------

def inherent_nonhalting(alg: Algebra | None, rel: Relation) -> tuple[int, ...]:
    """A coordinate set on which ``rel`` stays non-halting.

    Starting from all coordinates, dot coordinates are dropped (highest index
    first, repeated until nothing changes) as long as the projection stays
    non-halting and still meets the dot part.  Coordinates outside the dot
    part are never dropped.
    """
    if not is_computational(rel):
        raise ValueError("relation is not computational")
    if is_halting(rel):
        raise ValueError("relation is halting")
    D = set(dot_part(rel))
    keep = list(range(rel.arity))
    rows = rel.rows
    changed = True
    while changed:
        changed = False
        for i in sorted(D & set(keep), reverse=True):
            cand = [j for j in keep if j != i]
            if not D & set(cand):
                continue
            if not halting_rows(rows[:, cand]).any():
                keep = cand
                changed = True
    return tuple(sorted(set(keep) | (set(range(rel.arity)) - D)))


def I_generators(alg: Algebra, rel: Relation) -> Relation:
    """``I(a, b)`` for all ``a, b`` in ``rel`` without crossed coordinates."""
    rows = rel.rows[(rel.rows % 5 != CROSS).all(axis=1)]
    m = rel.arity
    empty = np.empty((0, m), np.int64)
    return Relation(m, rel.base, _op_images(alg, "I", empty, rows, m) if len(rows) else [], canonical=True)


def build_RI(alg: Algebra, rel: Relation, **kw) -> Relation:
    gens = I_generators(alg, rel)
    if not len(gens):
        return Relation(rel.arity, rel.base, [], Provenance(note="no tuple of the relation avoids X"))
    return generate(alg, gens, **kw)


def chi_compatible(generators, K: Iterable[int] | None = None) -> bool:
    """Check that on ``K`` every generator is constant ``<i,x>`` or lies in ``{<i,0>,<i,A>,<i,B>}``.

    Without ``K`` the coordinates never carrying a dot are used; no
    operation creates a dot at a coordinate where no argument has one, so
    these are exactly the non-dot coordinates of the generated relation.
    """
    rows = generators.rows if isinstance(generators, Relation) else np.array(
        [tuple(g) for g in generators], dtype=np.int64)
    if rows.size == 0:
        return True
    if K is None:
        K = [i for i in range(rows.shape[1]) if not (rows[:, i] % 5 == DOT).any()]
    K = list(K)
    if not K:
        return True
    sub = rows[:, K]
    same_state = (sub // 5 == sub[:, :1] // 5).all(axis=1)
    all_cross = (sub % 5 == CROSS).all(axis=1)
    all_C = (sub % 5 >= ZERO).all(axis=1)
    return bool((same_state & (all_cross | all_C)).all())


def unary_T(alg: Algebra, **kw) -> Relation:
    """The unary subuniverse generated by ``<1,.>`` and ``<1,0>``."""
    return generate(alg, [(elem(1, DOT),), (elem(1, ZERO),)], **kw)
