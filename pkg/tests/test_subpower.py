import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from minsky_clone.algebra import CA, CB, CROSS, DOT, OPS, ZERO, elem, parse_elems
from minsky_clone.subpower import (ClosureBudgetExceeded, Relation, build_RI, chi_compatible, classify, closed_under,
                                   config_set, decode, dot_part, approx_halting, encode, generate,
                                   inherent_nonhalting, is_computational, is_halting, is_synchronized, meets_C,
                                   op_image, parse_relation, permute, project, sequential_relation, sigma, unary_T)

from conftest import FIXTURES, algebra, seq


def naive_closure(alg, gens, cap=26):
    """Fixpoint of applying every operation to every argument list, no shortcuts."""
    rows = {tuple(g) for g in gens}
    while True:
        arr = np.array(sorted(rows), dtype=np.int64)
        if len(arr) > cap:
            return None
        new = set()
        for op, k in OPS.items():
            idx = np.meshgrid(*[np.arange(len(arr))] * k, indexing="ij")
            args = [arr[i.ravel()] for i in idx]
            out = alg.vop(op, *args)
            new |= {tuple(r) for r in out.tolist()}
        if new <= rows:
            return rows
        rows |= new


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["trivial", "pingpong"]), st.integers(1, 2), st.data())
def test_engine_matches_naive_closure(name, m, data):
    alg = algebra(name)
    n = data.draw(st.integers(1, 3))
    gens = [tuple(data.draw(st.integers(0, alg.size - 1)) for _ in range(m)) for _ in range(n)]
    expected = naive_closure(alg, gens)
    assume(expected is not None)
    got = generate(alg, gens)
    assert {tuple(r) for r in got.rows.tolist()} == expected


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 24), min_size=1, max_size=3))
def test_engine_matches_naive_unary_example(gens):
    alg = algebra("example")
    expected = naive_closure(alg, [(g,) for g in gens], cap=25)
    got = generate(alg, [(g,) for g in gens])
    assert {r[0] for r in got.rows.tolist()} == {r[0] for r in expected}


def test_engine_matches_naive_on_trivial_S2():
    alg = algebra("trivial")
    assert {tuple(r) for r in seq("trivial", 2).rows.tolist()} == naive_closure(alg, sigma(2))


@pytest.mark.parametrize("name, sizes", [
    ("example", (37, 260)), ("trivial", (16, 40)), ("pingpong", (23, 93)), ("unbounded", (31, 122)),
])
def test_sequential_relation_sizes(name, sizes):
    assert (len(seq(name, 2)), len(seq(name, 3))) == sizes


def test_S3_contains_displayed_column(ex_alg):
    assert tuple(parse_elems("(3,.),(3,B),(3,A)")) in seq("example", 3)


def test_generate_is_idempotent():
    S3 = seq("example", 3)
    again = generate(algebra("example"), S3.rows.tolist())
    assert again == S3 and np.array_equal(again.codes, S3.codes)


def test_generate_independent_of_workers():
    alg = algebra("pingpong")
    a = sequential_relation(alg, 3, workers=1)
    b = sequential_relation(alg, 3, workers=4)
    assert np.array_equal(a.codes, b.codes)
    assert a.provenance.stage_sizes == b.provenance.stage_sizes


def test_budget_exceeded_reports_partial(ex_alg):
    with pytest.raises(ClosureBudgetExceeded) as info:
        sequential_relation(ex_alg, 3, budget=50)
    assert len(info.value.partial) > 0 and info.value.budget == 50


def test_T_halting_for_example(ex_alg):
    T = unary_T(ex_alg)
    assert (elem(0, DOT),) in T
    assert sequential_relation(ex_alg, 1) == generate(ex_alg, [(elem(1, DOT),)])


def test_config_sets(ex_alg):
    assert set(config_set(ex_alg, 1, 0, 0, 3)) == set(sigma(3))
    c = config_set(ex_alg, 3, 1, 1, 3)
    assert set(c) == set(itertools.permutations((elem(3, DOT), elem(3, CA), elem(3, CB))))
    assert len(config_set(ex_alg, 0, 0, 0, 3)) == 3


def test_S4_permutation_invariant():
    S4 = seq("example", 4)
    assert len(S4) == 986
    for p in itertools.permutations(range(4)):
        assert permute(S4, p) == S4


@pytest.mark.parametrize("name", FIXTURES)
@pytest.mark.parametrize("m", [2, 3])
def test_sequential_profile(name, m):
    S = seq(name, m)
    p = classify(algebra(name), S)
    assert p.computational and p.capacity == m - 1
    if p.meets_C:
        assert p.halting


def test_projection_of_S3_strictly_contains_S2():
    S2, S3 = seq("example", 2), seq("example", 3)
    P = project(S3, [0, 1])
    assert S2.issubset(P) and S2 != P


def test_classify_profiles(ex_alg):
    p = classify(ex_alg, seq("example", 3))
    assert p.computational and p.halting and p.capacity == 2 and p.dot_part == (0, 1, 2)
    # synchronization is per tuple: unary relations always have it, the binary full power does not
    assert classify(ex_alg, Relation.from_tuples([(e,) for e in range(25)], 25, 1)).synchronized
    full = Relation.from_tuples(list(itertools.product(range(25), repeat=2)), 25, 2)
    assert not classify(ex_alg, full).synchronized
    q = classify(algebra("unbounded"), seq("unbounded", 3))
    assert q.computational and not q.halting


def test_closed_under(ex_alg):
    assert closed_under(ex_alg, seq("example", 3))
    v = closed_under(ex_alg, Relation.from_tuples(sigma(2), 25, 2))
    assert not v.closed and v.op is not None
    out = tuple(ex_alg.op(v.op, *col) for col in zip(*v.args))
    assert out == v.output and out not in Relation.from_tuples(sigma(2), 25, 2)


def test_op_image_inside_closure(ex_alg):
    S3 = seq("example", 3)
    for op in OPS:
        assert op_image(ex_alg, op, S3).issubset(S3)


def test_project_duplicates_and_arity_zero():
    S2 = seq("example", 2)
    d = project(S2, [0, 0])
    assert all(r[0] == r[1] for r in d.rows.tolist())
    assert len(project(S2, [])) == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.data())
def test_encode_decode_roundtrip(m, data):
    rows = np.array([[data.draw(st.integers(0, 24)) for _ in range(m)] for _ in range(5)], dtype=np.int64)
    assert np.array_equal(decode(encode(rows, 25), 25, m), rows)


@settings(max_examples=50, deadline=None)
@given(st.permutations(range(3)))
def test_permute_is_size_preserving_bijection(p):
    R = seq("pingpong", 3)
    Q = permute(R, p)
    assert len(Q) == len(R)
    inv = [p.index(i) for i in range(3)]
    assert permute(Q, inv) == R


def test_relation_text_roundtrip():
    S3 = seq("example", 3)
    back = parse_relation(S3.to_text(states=4))
    assert back == S3 and back.provenance.generators == S3.provenance.generators


def test_inherent_nonhalting_shapes(ex_alg):
    alg = algebra("pingpong")
    no_dot = generate(alg, [(elem(1, ZERO), elem(1, CROSS))])
    assert dot_part(no_dot) == () and inherent_nonhalting(alg, no_dot) == (0, 1)
    one_dot = generate(alg, [(elem(1, DOT), elem(1, ZERO))])
    assert len(dot_part(one_dot)) == 1 and inherent_nonhalting(alg, one_dot) == (0, 1)
    S3 = seq("pingpong", 3)
    N = set(inherent_nonhalting(alg, S3))
    assert not is_halting(project(S3, sorted(N)))
    assert N & set(dot_part(S3))
    with pytest.raises(ValueError):
        inherent_nonhalting(ex_alg, seq("example", 3))


def test_build_RI(ex_alg):
    S3 = seq("example", 3)
    RI = build_RI(ex_alg, S3)
    assert set(dot_part(RI)) == set(dot_part(S3)) & set(approx_halting(S3))
    crossed = Relation.from_tuples([(elem(1, CROSS),) * 2], 25, 2)
    assert len(build_RI(ex_alg, crossed)) == 0


def test_chi_compatible():
    assert chi_compatible(sigma(3), [])
    assert not chi_compatible([(elem(1, CROSS), elem(1, CA))], [0, 1])
    assert chi_compatible([(elem(1, CROSS), elem(1, CROSS)), (elem(2, CA), elem(2, ZERO))], [0, 1])
    assert chi_compatible(sigma(3))


def test_predicates():
    S2 = seq("example", 2)
    assert is_synchronized(S2) and is_computational(S2) and not meets_C(S2)
