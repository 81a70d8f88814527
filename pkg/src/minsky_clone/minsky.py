"""Two-register Minsky machines: parsing, execution and normalization.

A machine has states ``0..N``; state 0 halts and state 1 is initial.  Two
instruction shapes exist::

    i R j       increment register R, go to j
    i R k j     if R == 0 go to k, else decrement R and go to j

Machines are immutable; every transform returns a new machine.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

REGISTERS = ("A", "B")


class MachineError(ValueError):
    """Structural problem with a machine (bad references, missing rules)."""


class MachineSyntaxError(MachineError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Instruction:
    state: int
    register: str
    target: int
    zero_target: int | None = None

    def __post_init__(self):
        if self.register not in REGISTERS:
            raise MachineError(f"unknown register {self.register!r}")
        if self.state == 0:
            raise MachineError("state 0 is the halting state and takes no instruction")
        if self.state < 0 or self.target < 0 or (self.zero_target is not None and self.zero_target < 0):
            raise MachineError("state ids must be non-negative")

    @property
    def is_increment(self) -> bool:
        return self.zero_target is None

    @property
    def kind(self) -> str:
        return "increment" if self.is_increment else "test-decrement"

    def successors(self) -> tuple[int, ...]:
        if self.is_increment:
            return (self.target,)
        return (self.zero_target, self.target)

    def __str__(self) -> str:
        if self.is_increment:
            return f"{self.state} {self.register} {self.target}"
        return f"{self.state} {self.register} {self.zero_target} {self.target}"


@dataclass(frozen=True)
class Configuration:
    state: int
    alpha: int = 0
    beta: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("registers are non-negative")

    def __iter__(self) -> Iterator[int]:
        return iter((self.state, self.alpha, self.beta))

    def __str__(self) -> str:
        return f"({self.state},{self.alpha},{self.beta})"


@dataclass(frozen=True)
class MinskyMachine:
    """States are ``0..num_states-1``; ``instructions`` maps state -> rule."""

    num_states: int
    instructions: Mapping[int, Instruction] = field(hash=False)

    def __post_init__(self):
        if self.num_states < 2:
            raise MachineError("a machine needs the halting state 0 and the initial state 1")
        object.__setattr__(self, "instructions", dict(sorted(self.instructions.items())))
        for s, ins in self.instructions.items():
            if s != ins.state:
                raise MachineError(f"instruction {ins} filed under state {s}")
            for t in (s, *ins.successors()):
                if t >= self.num_states:
                    raise MachineError(f"instruction {ins} references state {t} >= {self.num_states}")

    @classmethod
    def from_instructions(cls, instructions: Iterable[Instruction], num_states: int | None = None):
        table: dict[int, Instruction] = {}
        for ins in instructions:
            if ins.state in table:
                raise MachineError(f"duplicate instruction for state {ins.state}")
            table[ins.state] = ins
        if num_states is None:
            used = [0, 1] + [t for ins in table.values() for t in (ins.state, *ins.successors())]
            num_states = max(used) + 1
        return cls(num_states, table)

    @property
    def N(self) -> int:
        return self.num_states - 1

    @property
    def states(self) -> range:
        return range(self.num_states)

    def __getitem__(self, state: int) -> Instruction:
        return self.instructions[state]

    def __eq__(self, other):
        if not isinstance(other, MinskyMachine):
            return NotImplemented
        return self.num_states == other.num_states and dict(self.instructions) == dict(other.instructions)

    def __hash__(self):
        return hash((self.num_states, tuple(self.instructions.values())))

    def is_complete(self) -> bool:
        return all(s in self.instructions for s in range(1, self.num_states))

    def edges(self) -> Iterator[tuple[int, int]]:
        """Edges of the state graph (state 0 loops on itself)."""
        yield (0, 0)
        for s, ins in self.instructions.items():
            for t in dict.fromkeys(ins.successors()):
                yield (s, t)

    def successors(self, state: int) -> tuple[int, ...]:
        if state == 0:
            return (0,)
        ins = self.instructions.get(state)
        return ins.successors() if ins else ()

    def reachable_from(self, start: int = 1) -> set[int]:
        seen = {start}
        todo = [start]
        while todo:
            s = todo.pop()
            for t in self.successors(s):
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return seen

    def reaching(self, goal: int = 0) -> set[int]:
        """States with a (possibly empty) path to ``goal``."""
        preds: dict[int, set[int]] = {}
        for s, t in self.edges():
            preds.setdefault(t, set()).add(s)
        seen = {goal}
        todo = [goal]
        while todo:
            t = todo.pop()
            for s in preds.get(t, ()):
                if s not in seen:
                    seen.add(s)
                    todo.append(s)
        return seen

    def assumption_report(self) -> dict[str, bool]:
        """Which of the standing structural assumptions hold.

        ``zeroes_on_halt`` is a sound syntactic check (see
        :func:`halts_with_zero_registers`), not a semantic decision.
        """
        reach = self.reachable_from(1)
        to_zero = self.reaching(0)
        first = self.instructions.get(1)
        return {
            "zeroes_on_halt": halts_with_zero_registers(self),
            "one_instruction_per_state": self.is_complete(),
            "increment_first": first is not None and first.is_increment,
            "all_states_on_path": all(s in reach and s in to_zero for s in self.states),
        }

    def is_normalized(self) -> bool:
        return all(self.assumption_report().values())

    def to_text(self) -> str:
        lines = [f"states {self.N}"]
        lines += [str(ins) for ins in self.instructions.values()]
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return "{" + ", ".join(
            f"({ins.state},{ins.register},{ins.target})" if ins.is_increment
            else f"({ins.state},{ins.register},{ins.zero_target},{ins.target})"
            for ins in self.instructions.values()) + "}"


_TOKEN = re.compile(r"\S+")


def parse_machine(text: str) -> MinskyMachine:
    """Parse the line-oriented machine format.

    Each instruction is ``i R j`` or ``i R k j``.  ``#`` starts a comment,
    ``/`` and ``;`` may separate several instructions on one line, and an
    optional ``states N`` directive fixes the state set to ``0..N``.
    """
    instructions: dict[int, Instruction] = {}
    where: dict[int, int] = {}
    declared: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        for chunk in re.split(r"[/;]", body):
            toks = _TOKEN.findall(chunk)
            if not toks:
                continue
            if toks[0].lower() == "states":
                if len(toks) != 2 or not toks[1].isdigit():
                    raise MachineSyntaxError("expected 'states N'", lineno)
                declared = int(toks[1])
                continue
            if len(toks) not in (3, 4):
                raise MachineSyntaxError(f"expected 'i R j' or 'i R k j', got {chunk.strip()!r}", lineno)
            nums = [toks[0]] + toks[2:]
            if not all(t.isdigit() for t in nums):
                raise MachineSyntaxError(f"state ids must be non-negative integers in {chunk.strip()!r}", lineno)
            reg = toks[1].upper()
            if reg not in REGISTERS:
                raise MachineSyntaxError(f"register must be A or B, got {toks[1]!r}", lineno)
            state = int(toks[0])
            if state == 0:
                raise MachineSyntaxError("state 0 is the halting state and takes no instruction", lineno)
            if state in instructions:
                raise MachineSyntaxError(
                    f"duplicate instruction for state {state} (first on line {where[state]})", lineno)
            if len(toks) == 3:
                ins = Instruction(state, reg, int(toks[2]))
            else:
                ins = Instruction(state, reg, int(toks[3]), int(toks[2]))
            if declared is not None:
                for t in (state, *ins.successors()):
                    if t > declared:
                        raise MachineSyntaxError(f"state {t} outside 0..{declared}", lineno)
            instructions[state] = ins
            where[state] = lineno
    if 1 not in instructions:
        raise MachineSyntaxError("no instruction for state 1")
    num = None if declared is None else declared + 1
    return MinskyMachine.from_instructions(instructions.values(), num)


# -- execution ---------------------------------------------------------------

def step(machine: MinskyMachine, cfg: Configuration) -> Configuration:
    i, a, b = cfg
    if i == 0:
        return cfg
    if i >= machine.num_states:
        raise MachineError(f"state {i} outside the machine")
    ins = machine.instructions.get(i)
    if ins is None:
        raise MachineError(f"no instruction for state {i}")
    if ins.is_increment:
        return Configuration(ins.target, a + 1, b) if ins.register == "A" else Configuration(ins.target, a, b + 1)
    value = a if ins.register == "A" else b
    if value == 0:
        return Configuration(ins.zero_target, a, b)
    return Configuration(ins.target, a - 1, b) if ins.register == "A" else Configuration(ins.target, a, b - 1)


@dataclass(frozen=True)
class RunResult:
    outcome: str  # "halted" | "fuel-exhausted"
    steps: int
    trace_max_sum: int
    final: Configuration
    trace: tuple[Configuration, ...] = ()

    @property
    def halted(self) -> bool:
        return self.outcome == "halted"


def run(machine: MinskyMachine, start: Configuration | None = None, fuel: int = 10**6,
        keep_trace: bool = False) -> RunResult:
    """Iterate :func:`step` until state 0 or ``fuel`` steps have been taken."""
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    cfg = start if start is not None else Configuration(1, 0, 0)
    trace = [cfg] if keep_trace else None
    best = cfg.alpha + cfg.beta
    n = 0
    while cfg.state != 0 and n < fuel:
        cfg = step(machine, cfg)
        n += 1
        best = max(best, cfg.alpha + cfg.beta)
        if trace is not None:
            trace.append(cfg)
    outcome = "halted" if cfg.state == 0 else "fuel-exhausted"
    return RunResult(outcome, n, best, cfg, tuple(trace or ()))


def iterate(machine: MinskyMachine, start: Configuration | None = None) -> Iterator[Configuration]:
    """Yield ``M^0(start), M^1(start), ...`` forever (state 0 repeats)."""
    cfg = start if start is not None else Configuration(1, 0, 0)
    while True:
        yield cfg
        cfg = step(machine, cfg)


@dataclass(frozen=True)
class CapacityReport:
    halts: bool | None  # None: not decided within fuel
    capacity: int       # exact capacity if halts, else the fuel-bounded k-step capacity
    steps: int
    fuel: int

    def __str__(self) -> str:
        if self.halts:
            return f"halts after {self.steps} steps with capacity {self.capacity}"
        return f"no halt within {self.fuel} steps; {self.steps}-step capacity {self.capacity}"


def capacity(machine: MinskyMachine, fuel: int = 10**6) -> CapacityReport:
    res = run(machine, fuel=fuel)
    return CapacityReport(True if res.halted else None, res.trace_max_sum, res.steps, fuel)


@dataclass(frozen=True)
class BoundedRun:
    halts: bool                          # reaches state 0 with alpha + beta <= bound throughout
    reason: str                          # "halted" | "exceeded" | "cycle"
    visited: tuple[Configuration, ...]   # M^0, M^1, ... while within the bound (first repeat excluded)


def run_within(machine: MinskyMachine, bound: int) -> BoundedRun:
    """Decide whether the machine halts with capacity ``bound``.

    Only finitely many configurations satisfy ``alpha + beta <= bound``, so
    the run either halts, leaves that set, or repeats a configuration.
    """
    cfg = Configuration(1, 0, 0)
    seen: dict[Configuration, int] = {}
    order: list[Configuration] = []
    while True:
        if cfg.alpha + cfg.beta > bound:
            return BoundedRun(False, "exceeded", tuple(order))
        if cfg in seen:
            return BoundedRun(False, "cycle", tuple(order))
        seen[cfg] = len(order)
        order.append(cfg)
        if cfg.state == 0:
            return BoundedRun(True, "halted", tuple(order))
        cfg = step(machine, cfg)


# -- normalization -----------------------------------------------------------

_POS, _ANY = "+", "?"
_EXACT_CAP = 8  # exact register values tracked up to this bound, then "+"


def _meet(f: tuple, g: tuple) -> tuple:
    def one(a, b):
        if a == b:
            return a
        if a != 0 and b != 0 and _ANY not in (a, b):
            return _POS
        return _ANY
    return tuple(one(a, b) for a, b in zip(f, g))


def _edge_facts(ins: Instruction, fact: tuple):
    """Feasible out-edges of ``ins`` with the register facts they carry.

    A fact is an exact small value, ``"+"`` (nonzero) or ``"?"``.
    """
    r = REGISTERS.index(ins.register)
    v = fact[r]

    def put(x):
        return fact[:r] + (x,) + fact[r + 1:]

    if ins.is_increment:
        yield ins.target, put(v + 1 if isinstance(v, int) and v < _EXACT_CAP else _POS)
        return
    if v in (0, _ANY):
        yield ins.zero_target, put(0)
    if v != 0:
        yield ins.target, put(v - 1 if isinstance(v, int) else _ANY)


def _entry_facts(machine: MinskyMachine) -> tuple[dict[int, tuple], list[tuple]]:
    """Per-register value facts on entry to each state.

    Fixpoint over feasible edges from (1,0,0); also returns the facts
    carried by each feasible edge into state 0.
    """
    known: dict[int, tuple] = {1: (0, 0)}
    todo = deque([1])
    while todo:
        s = todo.popleft()
        ins = machine.instructions.get(s)
        if ins is None:
            continue
        for t, fact in _edge_facts(ins, known[s]):
            if t == 0:
                continue
            new = fact if t not in known else _meet(known[t], fact)
            if new != known.get(t):
                known[t] = new
                todo.append(t)
    into_halt = [fact for s, k in known.items() if s in machine.instructions
                 for t, fact in _edge_facts(machine.instructions[s], k) if t == 0]
    return known, into_halt


def halts_with_zero_registers(machine: MinskyMachine) -> bool:
    """Sound check that every feasible entry into state 0 has A = B = 0."""
    _, into_halt = _entry_facts(machine)
    return all(f == (0, 0) for f in into_halt)


PING_PONG = "1 A 2\n2 A 0 1\n"


def _retarget(ins: Instruction, old: int, new: int) -> Instruction:
    t = new if ins.target == old else ins.target
    z = ins.zero_target
    if z is not None and z == old:
        z = new
    return Instruction(ins.state, ins.register, t, z)


def complete(machine: MinskyMachine) -> MinskyMachine:
    """Give every instruction-less nonzero state a self-loop ``(k,A,k)``."""
    table = dict(machine.instructions)
    for s in range(1, machine.num_states):
        table.setdefault(s, Instruction(s, "A", s))
    return MinskyMachine(machine.num_states, table)


def add_register_drain(machine: MinskyMachine) -> MinskyMachine:
    """Redirect halting into two fresh states that empty A, then B."""
    k = machine.num_states
    table = {s: _retarget(ins, 0, k) for s, ins in machine.instructions.items()}
    table[k] = Instruction(k, "A", k, k + 1)
    table[k + 1] = Instruction(k + 1, "B", k + 1, 0)
    return MinskyMachine(k + 2, table)


def increment_first(machine: MinskyMachine) -> MinskyMachine:
    """Make the initial instruction an increment.

    A test-decrement at state 1 moves to a fresh state ``s``; the new state
    1 increments A into a fresh state ``p`` which decrements it again and
    continues at ``s``.
    """
    first = machine.instructions[1]
    if first.is_increment:
        return machine
    s, p = machine.num_states, machine.num_states + 1
    table = {st: _retarget(ins, 1, s) for st, ins in machine.instructions.items() if st != 1}
    moved = _retarget(first, 1, s)
    table[s] = Instruction(s, moved.register, moved.target, moved.zero_target)
    table[1] = Instruction(1, "A", p)
    table[p] = Instruction(p, "A", s, s)
    return MinskyMachine(machine.num_states + 2, table)


def route_to_halt(machine: MinskyMachine) -> MinskyMachine:
    """Replace each edge ``i -> k`` with ``i ~> 0`` and ``k !~> 0`` by a loop back to ``i``."""
    good = machine.reaching(0)
    table = dict(machine.instructions)
    nxt = machine.num_states
    for i in sorted(good - {0}):
        ins = table[i]
        if ins.is_increment:
            continue
        if ins.zero_target not in good:
            n = nxt
            nxt += 1
            table[n] = Instruction(n, ins.register, i, i)
            ins = Instruction(i, ins.register, ins.target, n)
        if ins.target not in good:
            n = nxt
            nxt += 1
            table[n] = Instruction(n, ins.register, i)
            ins = Instruction(i, ins.register, n, ins.zero_target)
        table[i] = ins
    return MinskyMachine(nxt, table)


def prune_and_renumber(machine: MinskyMachine) -> MinskyMachine:
    """Drop states unreachable from 1; renumber in BFS order, fixing 0 and 1."""
    order = [1]
    index = {0: 0, 1: 1}
    queue = deque([1])
    while queue:
        s = queue.popleft()
        for t in machine.successors(s):
            if t not in index:
                index[t] = len(order) + 1
                order.append(t)
                queue.append(t)
    table = {}
    for s in order:
        ins = machine.instructions[s]
        z = None if ins.zero_target is None else index[ins.zero_target]
        table[index[s]] = Instruction(index[s], ins.register, index[ins.target], z)
    return MinskyMachine(len(order) + 1, table)


def normalize(machine: MinskyMachine) -> MinskyMachine:
    """Return an equivalent machine satisfying all standing assumptions.

    Order: complete, drain registers before halting (only when the
    syntactic check cannot already prove it), increment-first, route every
    state to halt, prune, renumber.  Halting status on (1,0,0) is kept.
    """
    if 1 not in machine.instructions:
        raise MachineError("machine has no instruction for state 1")
    m = complete(machine)
    if not halts_with_zero_registers(m):
        m = add_register_drain(m)
    m = increment_first(m)
    if 1 not in m.reaching(0):
        # no path to halting at all: any normalized non-halting machine is equivalent
        return parse_machine(PING_PONG)
    m = route_to_halt(m)
    return prune_and_renumber(m)
