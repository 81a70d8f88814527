"""The finite algebra attached to a Minsky machine.

Elements are pairs ``<state, content>`` with content one of dot, cross, 0,
A, B.  They are stored as plain ints ``5 * state + content`` using the
content codes below; every file format relies on this encoding.

Each of the nine fundamental operations exists twice: as a scalar
case-list transcription (``Algebra.op``), evaluated strictly top to bottom
with the first matching case winning, and as a numpy version
(``Algebra.vop``) used by the closure engine.  The two are cross-checked in
the test-suite and by :meth:`Algebra.validate`.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .minsky import MachineError, MinskyMachine


class Content(IntEnum):
    DOT = 0
    CROSS = 1
    ZERO = 2
    A = 3
    B = 4


DOT, CROSS, ZERO, CA, CB = (int(c) for c in Content)
SYMBOLS = ".x0AB"
REGISTER_CONTENT = {"A": CA, "B": CB}

# name -> arity, in the fixed signature order
OPS: dict[str, int] = {
    "meet": 2, "M": 2, "Mp": 1, "I": 2, "H": 1, "N0": 3, "S": 3, "Ndot": 4, "P": 4,
}
ALIASES = {
    "^": "meet", "∧": "meet", "wedge": "meet", "M'": "Mp", "M′": "Mp",
    "N∙": "Ndot", "N.": "Ndot", "Nd": "Ndot",
}


def op_name(sym: str) -> str:
    name = ALIASES.get(sym, sym)
    if name not in OPS:
        raise KeyError(f"unknown operation {sym!r}; expected one of {', '.join(OPS)}")
    return name


def elem(state: int, content: int | str) -> int:
    if isinstance(content, str):
        content = SYMBOLS.index(content)
    return 5 * state + int(content)


def state_of(e):
    return e // 5


def content_of(e):
    return e % 5


def cross(e):
    """The element with the same state and content cross."""
    return e - e % 5 + CROSS


def fmt_elem(e: int) -> str:
    return f"({e // 5},{SYMBOLS[e % 5]})"


_ELEM = re.compile(r"\(\s*(\d+)\s*,\s*([.x0AB∙×])\s*\)")


def parse_elem(text: str) -> int:
    m = _ELEM.fullmatch(text.strip())
    if not m:
        raise ValueError(f"bad element {text!r}; expected (i,c) with c in {{., x, 0, A, B}}")
    c = {"∙": ".", "×": "x"}.get(m.group(2), m.group(2))
    return elem(int(m.group(1)), c)


def parse_elems(text: str) -> list[int]:
    found = _ELEM.findall(text)
    rest = _ELEM.sub("", text).replace(",", "").strip()
    if rest:
        raise ValueError(f"unparsable text {rest!r} in element list")
    return [elem(int(s), {"∙": ".", "×": "x"}.get(c, c)) for s, c in found]


class Algebra:
    """The algebra of a machine with one instruction per nonzero state."""

    def __init__(self, machine: MinskyMachine):
        if not machine.is_complete():
            missing = [s for s in range(1, machine.num_states) if s not in machine.instructions]
            raise MachineError(f"machine lacks instructions for states {missing}; normalize it first")
        self.machine = machine
        self.num_states = machine.num_states
        self.size = 5 * machine.num_states
        n = machine.num_states
        self._has = np.zeros(n, bool)
        self._inc = np.zeros(n, bool)
        self._dec = np.zeros(n, bool)
        self._reg = np.full(n, -1, np.int64)
        self._nz = np.zeros(n, np.int64)  # increment target / nonzero branch
        self._zt = np.zeros(n, np.int64)  # zero branch
        for s, ins in machine.instructions.items():
            self._has[s] = True
            self._inc[s] = ins.is_increment
            self._dec[s] = not ins.is_increment
            self._reg[s] = REGISTER_CONTENT[ins.register]
            self._nz[s] = ins.target
            self._zt[s] = ins.zero_target if ins.zero_target is not None else 0
        self._tables: dict[str, np.ndarray] = {}

    def __repr__(self):
        return f"Algebra({self.machine}, |A|={self.size})"

    # -- classification ------------------------------------------------------

    @property
    def elements(self) -> range:
        return range(self.size)

    @cached_property
    def X(self) -> frozenset:
        return frozenset(e for e in self.elements if e % 5 == CROSS)

    @cached_property
    def Y(self) -> frozenset:
        return frozenset(self.elements) - self.X

    @cached_property
    def D(self) -> frozenset:
        return frozenset(e for e in self.elements if e % 5 == DOT)

    @cached_property
    def E(self) -> frozenset:
        return frozenset(self.elements) - self.D

    @cached_property
    def C(self) -> frozenset:
        return frozenset(self.elements) - self.X - self.D

    def block(self, state: int) -> list[int]:
        return [5 * state + c for c in range(5)]

    # -- scalar case lists ----------------------------------------------------

    def op(self, name: str, *args: int) -> int:
        name = op_name(name)
        if len(args) != OPS[name]:
            raise TypeError(f"{name} takes {OPS[name]} arguments, got {len(args)}")
        return getattr(self, "_op_" + name)(*args)

    def _op_meet(self, x, y):
        if x == y:
            return x
        return elem(min(x // 5, y // 5), CROSS)

    def _op_M(self, x, y):
        i = x // 5
        ins = self.machine.instructions.get(i)
        same = i == y // 5
        if ins is not None and same:
            r = REGISTER_CONTENT[ins.register]
            j = ins.target
            cx, cy = x % 5, y % 5
            if cx == DOT and cy == ZERO and ins.is_increment:
                return elem(j, r)
            if cx == DOT and cy == r and not ins.is_increment:
                return elem(j, ZERO)
            if cx == ZERO and cy == DOT and ins.is_increment:
                return elem(j, DOT)
            if cx == r and cy == DOT and not ins.is_increment:
                return elem(j, DOT)
            if x == y and cx != DOT:
                return elem(j, cx)
            return elem(j, CROSS)
        return cross(y)

    def _op_Mp(self, x):
        i, c = x // 5, x % 5
        ins = self.machine.instructions.get(i)
        if ins is not None and not ins.is_increment:
            if c != REGISTER_CONTENT[ins.register]:
                return elem(ins.zero_target, c)
            return elem(ins.zero_target, CROSS)
        return cross(x)

    def _op_I(self, x, y):
        if x % 5 == DOT:
            return elem(1, DOT)
        if y % 5 in (ZERO, CA, CB):
            return elem(1, ZERO)
        return elem(1, CROSS)

    def _op_H(self, x):
        if x in (elem(0, ZERO), elem(0, DOT)):
            return elem(0, ZERO)
        return elem(0, CROSS)

    def _op_N0(self, x, y, z):
        same = y // 5 == z // 5
        if x == elem(0, DOT) and same:
            return y
        if x == elem(0, ZERO) and z % 5 != DOT and same:
            return z
        return cross(self._op_meet(y, z))

    def _op_S(self, x, y, z):
        if (x == elem(1, ZERO) and y // 5 == 1 and z // 5 == 1
                and (y % 5, z % 5) in ((DOT, ZERO), (ZERO, DOT), (ZERO, ZERO))):
            return elem(1, ZERO)
        return elem(1, CROSS)

    def _op_Ndot(self, u, x, y, z):
        same = x // 5 == y // 5 == z // 5
        u_dot = u % 5 == DOT
        if x == y and x % 5 != CROSS and same:
            return x
        if u_dot and y % 5 == CROSS and same:
            return x
        if u_dot and x % 5 == CROSS and same:
            return y
        if u_dot and z in (x, y) and same:
            return z
        return cross(self._op_meet(self._op_meet(x, y), z))

    def _op_P(self, u, v, x, y):
        if u // 5 == v // 5:
            return x
        return y

    # -- vectorized versions ----------------------------------------------------

    def vop(self, name: str, *args):
        """Elementwise (broadcasting) evaluation on integer arrays."""
        name = op_name(name)
        if len(args) != OPS[name]:
            raise TypeError(f"{name} takes {OPS[name]} arguments, got {len(args)}")
        arrays = [np.asarray(a, dtype=np.int64) for a in args]
        return getattr(self, "_v_" + name)(*arrays)

    @staticmethod
    def _v_meet(x, y):
        return np.where(x == y, x, 5 * np.minimum(x // 5, y // 5) + CROSS)

    def _v_M(self, x, y):
        i = x // 5
        cx, cy = x % 5, y % 5
        same = i == y // 5
        has, inc, dec, r, j = self._has[i], self._inc[i], self._dec[i], self._reg[i], self._nz[i]
        ok = same & has
        out = np.where(ok, 5 * j + CROSS, 5 * (y // 5) + CROSS)
        out = np.where(ok & (x == y) & (cx != DOT), 5 * j + cx, out)
        out = np.where(ok & dec & (cx == r) & (cy == DOT), 5 * j + DOT, out)
        out = np.where(ok & inc & (cx == ZERO) & (cy == DOT), 5 * j + DOT, out)
        out = np.where(ok & dec & (cx == DOT) & (cy == r), 5 * j + ZERO, out)
        out = np.where(ok & inc & (cx == DOT) & (cy == ZERO), 5 * j + r, out)
        return out

    def _v_Mp(self, x):
        i, c = x // 5, x % 5
        dec = self._dec[i]
        k = self._zt[i]
        moved = np.where(c != self._reg[i], 5 * k + c, 5 * k + CROSS)
        return np.where(dec, moved, x - c + CROSS)

    @staticmethod
    def _v_I(x, y):
        cy = y % 5
        out = np.where((cy != DOT) & (cy != CROSS), 5 + ZERO, 5 + CROSS)
        return np.where(x % 5 == DOT, 5 + DOT, out)

    @staticmethod
    def _v_H(x):
        return np.where((x == ZERO) | (x == DOT), ZERO, CROSS) + 0 * x

    def _v_N0(self, x, y, z):
        same = y // 5 == z // 5
        fallback = self._v_meet(y, z)
        out = fallback - fallback % 5 + CROSS
        out = np.where((x == ZERO) & (z % 5 != DOT) & same, z, out)
        return np.where((x == DOT) & same, y, out)

    @staticmethod
    def _v_S(x, y, z):
        cy, cz = y % 5, z % 5
        pair = ((cy == DOT) & (cz == ZERO)) | ((cy == ZERO) & (cz == DOT)) | ((cy == ZERO) & (cz == ZERO))
        ok = (x == 5 + ZERO) & (y // 5 == 1) & (z // 5 == 1) & pair
        return np.where(ok, 5 + ZERO, 5 + CROSS)

    def _v_Ndot(self, u, x, y, z):
        same = (x // 5 == y // 5) & (y // 5 == z // 5)
        ud = u % 5 == DOT
        m = self._v_meet(self._v_meet(x, y), z)
        out = m - m % 5 + CROSS
        out = np.where(ud & ((z == x) | (z == y)) & same, z, out)
        out = np.where(ud & (x % 5 == CROSS) & same, y, out)
        out = np.where(ud & (y % 5 == CROSS) & same, x, out)
        return np.where((x == y) & (x % 5 != CROSS) & same, x, out)

    @staticmethod
    def _v_P(u, v, x, y):
        return np.where(u // 5 == v // 5, x, y)

    # -- tables -------------------------------------------------------------------

    def table(self, name: str) -> np.ndarray:
        """Full operation table of shape ``(|A|,) * arity`` (cached)."""
        name = op_name(name)
        if name not in self._tables:
            k = OPS[name]
            grids = np.meshgrid(*[np.arange(self.size)] * k, indexing="ij")
            self._tables[name] = self.vop(name, *grids).astype(np.int16)
        return self._tables[name]

    def validate(self, max_cells: int = 400_000, samples: int = 20_000, seed: int = 0xC10E) -> list[str]:
        """Compare scalar and vectorized operations; return a list of mismatches.

        Operations with at most ``max_cells`` argument tuples are compared
        exhaustively, the rest on ``samples`` random tuples.
        """
        rng = np.random.default_rng(seed)
        problems = []
        for name, k in OPS.items():
            if self.size ** k <= max_cells:
                args = np.array(list(itertools.product(range(self.size), repeat=k)), dtype=np.int64)
            else:
                args = rng.integers(0, self.size, size=(samples, k))
            got = self.vop(name, *args.T)
            for row, g in zip(args.tolist(), got.tolist()):
                want = self.op(name, *row)
                if want != g:
                    problems.append(f"{name}{tuple(fmt_elem(a) for a in row)}: case list {fmt_elem(want)}, "
                                    f"vectorized {fmt_elem(g)}")
                    break
        return problems


def build_algebra(machine: MinskyMachine, validate: bool = False) -> Algebra:
    alg = Algebra(machine)
    if validate:
        bad = alg.validate()
        if bad:
            raise AssertionError("operation transcriptions disagree: " + "; ".join(bad))
    return alg


def apply_op(alg: Algebra, op: str, args: Sequence[int]) -> int:
    return alg.op(op, *args)


def apply_tuplewise(alg: Algebra, op: str, tuples: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Apply ``op`` coordinatewise to equal-length tuples."""
    arrays = [np.asarray(t, dtype=np.int64) for t in tuples]
    if len({a.shape for a in arrays}) > 1:
        raise ValueError("tuples must share one arity")
    return tuple(int(v) for v in alg.vop(op, *arrays))


# -- terms ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Term:
    """A term over the nine operation symbols; leaves are variables x1, x2, ...

    Subterms may be shared, so a term is really a DAG; evaluation is memoized
    per node.
    """

    op: str | None = None
    args: tuple["Term", ...] = ()
    var: int = 0

    def __post_init__(self):
        if self.op is None:
            if self.var < 1 or self.args:
                raise ValueError("a variable leaf needs an index >= 1 and no arguments")
        else:
            object.__setattr__(self, "op", op_name(self.op))
            if len(self.args) != OPS[self.op]:
                raise ValueError(f"{self.op} takes {OPS[self.op]} arguments, got {len(self.args)}")

    @property
    def is_var(self) -> bool:
        return self.op is None

    def nodes(self) -> list["Term"]:
        seen: dict[int, Term] = {}
        todo = [self]
        while todo:
            t = todo.pop()
            if id(t) not in seen:
                seen[id(t)] = t
                todo.extend(t.args)
        return list(seen.values())

    def symbols(self) -> set[str]:
        return {t.op for t in self.nodes() if not t.is_var}

    def avoids(self, op: str) -> bool:
        return op_name(op) not in self.symbols()

    def variables(self) -> set[int]:
        return {t.var for t in self.nodes() if t.is_var}

    def depth(self) -> int:
        memo: dict[int, int] = {}

        def d(t):
            if id(t) not in memo:
                memo[id(t)] = 0 if t.is_var else 1 + max(d(a) for a in t.args)
            return memo[id(t)]
        return d(self)

    def __str__(self) -> str:
        memo: dict[int, str] = {}

        def s(t):
            if id(t) not in memo:
                memo[id(t)] = f"x{t.var}" if t.is_var else f"{t.op}({', '.join(s(a) for a in t.args)})"
            return memo[id(t)]
        return s(self)

    def __eq__(self, other):
        return isinstance(other, Term) and str(self) == str(other)

    def __hash__(self):
        return hash(str(self))


def var(i: int) -> Term:
    return Term(var=i)


def app(op: str, *args: Term) -> Term:
    return Term(op, tuple(args))


def eval_term(alg: Algebra, t: Term, env: Sequence) -> int | tuple[int, ...]:
    """Evaluate ``t`` with ``x_i`` bound to ``env[i-1]``.

    Environment entries may be elements or equal-length tuples; tuples are
    evaluated coordinatewise and a tuple is returned.
    """
    tuplewise = any(isinstance(v, (tuple, list, np.ndarray)) for v in env)
    vals = [np.asarray(v, dtype=np.int64) for v in env]
    memo: dict[int, np.ndarray] = {}
    order = []
    seen = set()
    stack = [(t, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        stack.extend((a, False) for a in node.args)
    for node in order:
        if node.is_var:
            if node.var > len(vals):
                raise KeyError(f"variable x{node.var} is unbound")
            memo[id(node)] = vals[node.var - 1]
        else:
            memo[id(node)] = alg.vop(node.op, *(memo[id(a)] for a in node.args))
    out = memo[id(t)]
    if tuplewise:
        return tuple(int(v) for v in np.atleast_1d(out))
    return int(out)


_TERM_TOKEN = re.compile(r"\s*(?:(x\d+)|([A-Za-z0-9_'′∧∙^.]+)\s*\(|(\))|(,))")


def parse_term(text: str) -> Term:
    """Parse ``M(x1, Mp(x1))``-style term syntax."""
    pos = 0

    def parse() -> Term:
        nonlocal pos
        m = _TERM_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad term syntax at {text[pos:]!r}")
        pos = m.end()
        if m.group(1):
            return var(int(m.group(1)[1:]))
        if not m.group(2):
            raise ValueError(f"unexpected {m.group(0)!r} in term")
        name = op_name(m.group(2))
        args = []
        for k in range(OPS[name]):
            args.append(parse())
            m = _TERM_TOKEN.match(text, pos)
            want = 4 if k < OPS[name] - 1 else 3
            if not m or not m.group(want):
                raise ValueError(f"expected {',' if want == 4 else ')'} in term at {text[pos:]!r}")
            pos = m.end()
        return app(name, *args)

    t = parse()
    if text[pos:].strip():
        raise ValueError(f"trailing text {text[pos:]!r} after term")
    return t


# -- derived terms ------------------------------------------------------------------

def state_path(alg: Algebra, start: int, goal: int) -> list[str]:
    """Shortest list of ``M``/``Mp`` moves from ``start`` to ``goal``.

    ``M`` follows the increment / nonzero branch, ``Mp`` the zero branch;
    BFS explores ``M`` first so ties prefer it.
    """
    if start == goal:
        return []
    prev: dict[int, tuple[int, str]] = {start: (start, "")}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        ins = alg.machine.instructions.get(s)
        if ins is None:
            continue
        moves = [("M", ins.target)] + ([] if ins.is_increment else [("Mp", ins.zero_target)])
        for sym, t in moves:
            if t not in prev:
                prev[t] = (s, sym)
                if t == goal:
                    path = []
                    while t != start:
                        t, sym = prev[t]
                        path.append(sym)
                    return path[::-1]
                queue.append(t)
    raise MachineError(f"state {goal} is not reachable from state {start}")


def _compose(path: Iterable[str], base: Term) -> Term:
    t = base
    for sym in path:
        t = app("M", t, t) if sym == "M" else app("Mp", t)
    return t


def derive_state_term(alg: Algebra, from_state: int, to_state: int, base: Term | None = None) -> Term:
    """Unary ``{M, Mp}`` term sending ``<from,0>`` to ``<to,0>``."""
    return _compose(state_path(alg, from_state, to_state), base or var(1))


def _T(x: Term) -> Term:
    ixx = app("I", x, x)
    return app("S", ixx, ixx, ixx)


def derive_z(alg: Algebra, i: int) -> Term:
    """Term with value ``<i,0>`` on C and ``<i,x>`` elsewhere."""
    return derive_state_term(alg, 1, i, base=_T(var(1)))


def derive_w(alg: Algebra, i: int) -> Term:
    """Term sending ``<i,0>`` to ``<0,0>`` and ``<i,c>`` (c in x, A, B) to ``<0,x>``."""
    return app("H", derive_state_term(alg, i, 0))
