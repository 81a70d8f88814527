import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minsky_clone.algebra import (CA, CB, CROSS, DOT, OPS, ZERO, Algebra, app, apply_op, apply_tuplewise,
                                  build_algebra, content_of, derive_state_term, derive_w, derive_z, elem, eval_term,
                                  fmt_elem, parse_elem, parse_elems, parse_term, state_of, var)
from minsky_clone.minsky import MachineError, parse_machine

from conftest import FIXTURES, algebra

E = parse_elem


def test_domain_sizes(ex_alg, triv_alg):
    assert ex_alg.size == 25 and triv_alg.size == 10
    assert len(ex_alg.X) == len(ex_alg.D) == 5
    assert len(ex_alg.C) == 15 and len(ex_alg.E) == 20 and len(ex_alg.Y) == 20


def test_element_text_roundtrip():
    for e in range(25):
        assert parse_elem(fmt_elem(e)) == e
    assert fmt_elem(elem(3, DOT)) == "(3,.)"
    assert parse_elems("(1,.),(2,x),(0,A)") == [elem(1, DOT), elem(2, CROSS), elem(0, CA)]
    assert state_of(elem(4, CB)) == 4 and content_of(elem(4, CB)) == CB


def test_incomplete_machine_rejected():
    with pytest.raises(MachineError):
        Algebra(parse_machine("1 A 2"))


@pytest.mark.parametrize("op, args, out", [
    ("M", ["(1,.)", "(1,0)"], "(2,A)"),
    ("M", ["(1,0)", "(1,0)"], "(2,0)"),
    ("Mp", ["(3,0)"], "(4,0)"),
    ("I", ["(3,.)", "(2,B)"], "(1,.)"),
    ("H", ["(0,.)"], "(0,0)"),
    ("meet", ["(2,A)", "(2,A)"], "(2,A)"),
    ("meet", ["(2,A)", "(1,B)"], "(1,x)"),
])
def test_operation_examples(ex_alg, op, args, out):
    assert apply_op(ex_alg, op, [E(a) for a in args]) == E(out)


def test_arity_is_checked(ex_alg):
    with pytest.raises(TypeError):
        ex_alg.op("M", 0)


def test_symbol_aliases(ex_alg):
    a, b = E("(1,.)"), E("(1,0)")
    assert ex_alg.op("∧", a, b) == ex_alg.op("meet", a, b)
    assert ex_alg.op("M'", E("(3,0)")) == ex_alg.op("Mp", E("(3,0)"))


def test_term_examples(ex_alg):
    assert eval_term(ex_alg, var(1), [E("(2,B)")]) == E("(2,B)")
    t = parse_term("H(I(x1,x1))")
    assert eval_term(ex_alg, t, [E("(2,A)")]) == E("(0,x)")
    col = eval_term(ex_alg, parse_term("M(x1, x2)"),
                    [parse_elems("(1,0),(1,.),(1,0)"), parse_elems("(1,0),(1,0),(1,.)")])
    assert col == tuple(parse_elems("(2,0),(2,A),(2,.)"))
    assert apply_tuplewise(ex_alg, "M", [parse_elems("(1,0),(1,.),(1,0)"),
                                         parse_elems("(1,0),(1,0),(1,.)")]) == col


def test_term_parse_print_roundtrip():
    for text in ["x1", "M(x1, Mp(x2))", "Ndot(x1, x2, x3, x4)", "H(I(x1, x1))"]:
        t = parse_term(text)
        assert parse_term(str(t)) == t


def test_derived_state_terms(ex_alg):
    t = derive_state_term(ex_alg, 1, 0)
    assert eval_term(ex_alg, t, [E("(1,0)")]) == E("(0,0)")
    assert t.symbols() <= {"M", "Mp"}
    assert len([n for n in t.nodes() if not n.is_var]) == 4
    assert derive_state_term(ex_alg, 2, 2) == var(1)
    assert eval_term(ex_alg, derive_state_term(ex_alg, 1, 3), [E("(1,0)")]) == E("(3,0)")


def test_z_and_w_examples(ex_alg):
    z3, w3 = derive_z(ex_alg, 3), derive_w(ex_alg, 3)
    assert eval_term(ex_alg, z3, [E("(1,A)")]) == E("(3,0)")
    assert eval_term(ex_alg, z3, [E("(1,.)")]) == E("(3,x)")
    assert eval_term(ex_alg, w3, [E("(3,0)")]) == E("(0,0)")
    assert eval_term(ex_alg, w3, [E("(3,B)")]) == E("(0,x)")


@pytest.mark.parametrize("name", FIXTURES)
def test_z_w_pointwise_everywhere(name):
    alg = algebra(name)
    for i in alg.machine.states:
        z, w = derive_z(alg, i), derive_w(alg, i)
        for x in alg.elements:
            assert eval_term(alg, z, [x]) == (elem(i, ZERO) if x % 5 >= ZERO else elem(i, CROSS))
        for c in (CROSS, ZERO, CA, CB):
            assert eval_term(alg, w, [elem(i, c)]) == (elem(0, ZERO) if c == ZERO else elem(0, CROSS))


@pytest.mark.parametrize("name", FIXTURES)
def test_case_lists_agree_with_vectorized_forms(name):
    assert algebra(name).validate() == []


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(FIXTURES), st.sampled_from(sorted(OPS)), st.data())
def test_scalar_equals_vectorized_random(name, op, data):
    alg = algebra(name)
    args = [data.draw(st.integers(0, alg.size - 1)) for _ in range(OPS[op])]
    vec = alg.vop(op, *(np.array([a]) for a in args))
    assert int(vec[0]) == alg.op(op, *args)


@pytest.mark.parametrize("name", FIXTURES)
@pytest.mark.parametrize("op", sorted(OPS))
def test_state_map_is_homomorphism(name, op):
    alg = algebra(name)
    k = OPS[op]
    blocks = [alg.block(s) for s in alg.machine.states]
    rng = np.random.default_rng(7)
    for states in itertools.product(range(alg.num_states), repeat=k):
        picks = [rng.choice(blocks[s], size=40) for s in states]
        out = alg.vop(op, *picks) // 5
        assert len(set(out.tolist())) == 1, (op, states)


def test_x_absorbing_exhaustive_small(triv_alg):
    alg = triv_alg
    for op in ("meet", "M", "Mp", "H", "S"):
        for args in itertools.product(alg.elements, repeat=OPS[op]):
            if any(a % 5 == CROSS for a in args):
                assert alg.op(op, *args) % 5 == CROSS


def test_tables_are_cached_and_total(ex_alg):
    t = ex_alg.table("M")
    assert t.shape == (25, 25) and t.min() >= 0 and t.max() < 25
    assert ex_alg.table("M") is t


def test_build_algebra_validate_flag():
    alg = build_algebra(parse_machine("1 A 0 1"), validate=True)
    assert alg.size == 10


def test_app_checks_arity():
    with pytest.raises(ValueError):
        app("M", var(1))
