import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minsky_clone.algebra import CA, elem
from minsky_clone.entail import (EQ, Atom, CanonicalCertificate, EntailBudgetExceeded, EntailError, Eq, Factor,
                                 Intersect, OpTable, Permute, Product, Project, SearchBounds, arity_of,
                                 canonical_form_eval, equality, eval_expression, halting_consequence,
                                 parse_certificate, parse_expression, preserves, product, search_entailment)
from minsky_clone.gadgets import build_gadget
from minsky_clone.subpower import Relation, permute, project

from conftest import algebra, seq


@pytest.fixture(scope="module")
def cat():
    alg = algebra("example")
    return alg, [seq("example", 2), build_gadget(alg, "mu"), project(seq("example", 2), [0])]


def test_algebraic_identities(cat):
    alg, c = cat
    R = c[0]
    assert eval_expression(alg, c, Intersect((Atom(0), Atom(0)))) == R
    assert eval_expression(alg, c, Project(Permute(Atom(0), (0, 1)), (0, 1))) == R
    U = c[2]
    assert eval_expression(alg, c, Project(Product((Atom(2), Eq())), (0,))) == U
    assert eval_expression(alg, c, parse_expression("project[1](product(R3, EQ))")) == U


def test_equality_relation(cat):
    alg, _ = cat
    E = equality(alg)
    assert len(E) == 25 and all(a == b for a, b in E.rows.tolist())


def test_product_sizes_and_cap(cat):
    alg, c = cat
    p = product([c[0], c[1]])
    assert p.arity == 4 and len(p) == len(c[0]) * len(c[1])
    with pytest.raises(EntailBudgetExceeded):
        product([c[0]] * 7, max_arity=12)


def test_single_factor_certificate(cat):
    alg, c = cat
    cert = CanonicalCertificate((0, 1), (Factor((0, 1), (1,)),))
    assert canonical_form_eval(alg, c, cert) == c[1]


def test_certificate_text_roundtrip():
    text = "PROJECT [1,2] ; INTERSECT { PERMUTE [2,1,3] PRODUCT [R1,EQ] ; PERMUTE [1,2,3] PRODUCT [R2,R3] }"
    cert = parse_certificate(text)
    assert str(cert) == text
    assert cert.catalog_indices() == {0, 1, 2}
    with pytest.raises(EntailError):
        parse_certificate("INTERSECT { }")


@st.composite
def certificates(draw):
    # atoms: 0 -> unary, 1 and 2 -> binary, EQ -> binary
    arity = {0: 1, 1: 2, 2: 2, EQ: 2}
    n_fac = draw(st.integers(1, 3))
    combos = [c for k in (1, 2) for c in itertools.product([0, 1, 2, EQ], repeat=k)]
    target_n = draw(st.integers(1, 4))
    usable = [c for c in combos if sum(arity[a] for a in c) == target_n]
    if not usable:
        target_n = 2
        usable = [(1,)]
    factors = []
    for _ in range(n_fac):
        combo = draw(st.sampled_from(usable))
        perm = tuple(draw(st.permutations(range(target_n))))
        factors.append(Factor(perm, combo))
    proj = tuple(draw(st.lists(st.integers(0, target_n - 1), min_size=1, max_size=3)))
    return CanonicalCertificate(proj, tuple(factors))


@settings(max_examples=1000, deadline=None)
@given(certificates())
def test_canonical_form_agrees_with_expression_tree(cert):
    alg = algebra("trivial")
    S2 = seq("trivial", 2)
    c = [project(S2, [0]), S2, build_gadget(alg, "mu")]
    expr = cert.to_expr()
    a = canonical_form_eval(alg, c, cert)
    b = eval_expression(alg, c, expr)
    assert a == b and arity_of(expr, c) == a.arity


@settings(max_examples=100, deadline=None)
@given(st.permutations(range(3)))
def test_permute_bijective_and_intersection_monotone(p):
    alg = algebra("pingpong")
    S3 = seq("pingpong", 3)
    c = [S3, permute(S3, (1, 0, 2))]
    v = eval_expression(alg, c, Permute(Atom(0), tuple(p)))
    assert len(v) == len(S3)
    inter = eval_expression(alg, c, Intersect((Atom(0), Atom(1))))
    assert inter.issubset(S3) and inter.issubset(c[1])


def test_search_trivial_cases(cat):
    alg, c = cat
    res = search_entailment(alg, c, c[1])
    assert res.status == "found" and canonical_form_eval(alg, c, res.certificate) == c[1]
    flipped = permute(c[1], (1, 0))
    res = search_entailment(alg, c, flipped)
    assert res.status == "found" and len(res.certificate.factors) == 1
    assert canonical_form_eval(alg, c, res.certificate) == flipped


def test_search_finds_intersection_certificate():
    alg = algebra("example")
    S2 = seq("example", 2)
    outside = [t for t in itertools.product(range(25), repeat=2) if t not in S2]
    extra1, extra2 = outside[0], outside[-1]
    R1 = Relation.from_tuples(list(S2) + [extra1], 25, 2)
    R2 = Relation.from_tuples(list(S2) + [extra2], 25, 2)
    res = search_entailment(alg, [R1, R2], S2, SearchBounds(max_arity=2))
    assert res.status == "found"
    assert canonical_form_eval(alg, [R1, R2], res.certificate) == S2
    assert len(res.certificate.factors) == 2


def test_search_for_S3_from_binary_relations_is_bounded(cat):
    alg, c = cat
    S3 = seq("example", 3)
    res = search_entailment(alg, c[:2], S3, SearchBounds(max_arity=4, max_atoms=2))
    assert res.status in ("found", "not-found-within-bounds", "budget-exhausted")
    if res.status == "found":
        value = canonical_form_eval(alg, c[:2], res.certificate)
        check = halting_consequence(alg, c[:2], res.certificate, value)
        assert check.holds is not False


def test_halting_consequence_on_certificate():
    alg = algebra("example")
    S3 = seq("example", 3)
    S2 = seq("example", 2)
    # S2 x T with the third coordinate pinned by equality: arity-2 inputs only
    cert = parse_certificate("PROJECT [1,2,3] ; INTERSECT { PERMUTE [1,2,3,4] PRODUCT [R1,R1] }")
    value = canonical_form_eval(alg, [S2], cert)
    check = halting_consequence(alg, [S2], cert, value)
    assert check.applicable is False or check.holds
    assert halting_consequence(alg, [S3], CanonicalCertificate((0, 1, 2), (Factor((0, 1, 2), (0,)),)),
                               S3).applicable is False


def test_preservation(ex_alg):
    S2 = seq("example", 2)
    v = preserves(ex_alg, OpTable.constant(elem(1, CA)), S2)
    assert not v and v.exhaustive
    assert v.output == (elem(1, CA), elem(1, CA)) and v.output not in S2
    mu = build_gadget(ex_alg, "mu")
    assert preserves(ex_alg, OpTable.constant(elem(1, CA)), mu)
    for name in ("meet", "M", "Mp", "I", "H", "N0", "S", "Ndot", "P"):
        assert preserves(ex_alg, OpTable.from_op(ex_alg, name), seq("example", 3))
    assert preserves(ex_alg, OpTable.parse(ex_alg, "M(x1, Mp(x2))"), S2)
    assert preserves(ex_alg, OpTable.projection(3, 1), S2)


def test_preservation_table(triv_alg):
    table = np.array(triv_alg.table("meet"))
    f = OpTable.from_table(table)
    assert preserves(triv_alg, f, seq("trivial", 2)).preserved


def test_parse_expression_errors():
    with pytest.raises(EntailError):
        parse_expression("project[1](")
    with pytest.raises(EntailError):
        parse_expression("frobnicate(R1)")

