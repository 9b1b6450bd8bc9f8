import random
from itertools import combinations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bunchlab import tiling as T
from bunchlab.frames import (
    COMPLEMENT, EPS, AbstractModel, Evaluator, Frame, FrameViolation, Model, MultipleTiles,
    UnsupportedFormula, WitnessNotFound, associative_tables, build_truncated_model,
    complex_algebra, complex_algebra_check, countermodel_search, evaluate, even_odd,
    extract_tiling, format_model, frame_from_table, neg_tables, parity_letter, parse_frame,
    parse_model, random_frame, refuting_states, validate_frame,
)
from bunchlab.syntax import COMMUTATIVE, NONCOMMUTATIVE, Atom, Binary, Neg, ParseError, parse_formula
from strategies import formulas

TAU = T.periodic_tiling(T.FIG2A, 4)


def subsets(n):
    for k in range(n + 1):
        for c in combinations(range(n), k):
            yield frozenset(c)


def naive_eval(model, f, mode=COMMUTATIVE):
    """Satisfaction straight from the clauses, on Python sets."""
    fr, n = model.frame, model.frame.n
    S = frozenset(range(n))
    if isinstance(f, Atom):
        return model.valuation[f.name]
    if isinstance(f, Neg):
        return frozenset(fr.negate(naive_eval(model, f.child, mode)))
    a, b = naive_eval(model, f.left, mode), naive_eval(model, f.right, mode)
    if f.kind == "and":
        return a & b
    if f.kind == "or":
        return a | b
    if f.kind == "ldiv" or f.kind == "wand":
        return frozenset(s for s in S if all(fr.comp(x, s) <= b for x in a))
    if f.kind == "rdiv":
        return frozenset(s for s in S if all(fr.comp(s, y) <= a for y in b))
    raise AssertionError(f.kind)


def union_frame(k):
    """Subsets of {0..k-1} under union, states are bitmasks."""
    n = 1 << k
    idx = np.arange(n)
    return Frame(n, idx[:, None] | idx[None, :], COMPLEMENT)


# ---------------------------------------------------------------- frames

def test_union_frame_is_valid():
    assert validate_frame(union_frame(2)) == []


def test_non_associative_frame_reported():
    f = Frame(2, {(0, 0): {1}, (1, 0): {1}, (0, 1): {0}})
    bad = validate_frame(f)
    assert bad and all(v.kind == "associativity" for v in bad)


def test_negation_must_be_disjoint():
    f = Frame(1, {}, {frozenset({0}): {0}})
    assert validate_frame(f) == [FrameViolation("disjointivity", ((0,), (0,)))]


def test_dict_and_array_frames_agree():
    g = union_frame(2)
    d = Frame(4, {(i, j): {i | j} for i in range(4) for j in range(4)}, COMPLEMENT)
    assert (g.rel == d.rel).all()
    assert g == d


def test_frame_rejects_out_of_range():
    with pytest.raises(ValueError):
        Frame(2, {(0, 2): {0}})
    with pytest.raises(ValueError):
        Frame(0, {})


# ---------------------------------------------------------------- satisfaction

def test_union_frame_examples():
    fr = union_frame(2)
    m = Model(fr, {"p": {1, 3}, "q": {2, 3}})
    assert evaluate(m, parse_formula("p & q")) == {3}
    assert evaluate(m, parse_formula("p -* q")) == {2, 3}  # s with s u {0} in q
    assert evaluate(m, parse_formula("~p")) == {0, 2}
    assert evaluate(m, parse_formula("p & ~p")) == frozenset()


def test_negation_table_lookup():
    fr = Frame(2, {(0, 0): {0}}, {frozenset({0}): {1}})
    m = Model(fr, {"p": {0}})
    assert evaluate(m, parse_formula("~p")) == {1}
    assert evaluate(m, parse_formula("~~p")) == frozenset()


def test_unsupported_connectives():
    m = Model(union_frame(1), {"p": {0}})
    with pytest.raises(UnsupportedFormula):
        evaluate(m, parse_formula("p * p"))
    with pytest.raises(UnsupportedFormula):
        evaluate(m, parse_formula("q"))


FRAGMENT = formulas(kinds=("and", "or", "ldiv", "rdiv"), consts=False, max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000), FRAGMENT)
def test_evaluator_matches_naive_semantics(seed, f):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    fr = random_frame(n, rng)
    val = {a: frozenset(s for s in range(n) if rng.random() < 0.5) for a in "pqrs"}
    m = Model(fr, val)
    assert evaluate(m, f, NONCOMMUTATIVE) == naive_eval(m, f, NONCOMMUTATIVE)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), FRAGMENT)
def test_conjunction_with_negation_is_empty(seed, f):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    m = Model(random_frame(n, rng), {a: {0} for a in "pqrs"})
    assert evaluate(m, Binary("and", f, Neg(f)), NONCOMMUTATIVE) == frozenset()


# ---------------------------------------------------------------- enumeration and algebra

def _brute_associative(n):
    out = []
    for table in product(range(1 << n), repeat=n * n):
        f = frame_from_table(n, table)
        if not validate_frame(f):
            out.append(table)
    return out


def test_two_state_associative_tables_match_brute_force():
    got = list(associative_tables(2))
    brute = _brute_associative(2)
    assert sorted(got) == sorted(brute)
    assert len(got) == len(set(got)) == 50


def test_one_state_tables():
    assert sorted(associative_tables(1)) == [(0,), (1,)]


def test_neg_tables_are_disjointive_and_complete():
    tables = list(neg_tables(2))
    # the image of X ranges over subsets of its complement: 4 * 2 * 2 * 1 choices
    assert len(tables) == 16
    for t in tables:
        assert all(not (k & v) for k, v in t.items())


def test_all_small_frames_give_residuated_lattices():
    for n in (1, 2):
        for table in associative_tables(n):
            for neg in neg_tables(n):
                assert complex_algebra_check(frame_from_table(n, table, neg)) == []


def test_random_three_state_frames_give_residuated_lattices():
    rng = random.Random(7)
    for _ in range(40):
        f = random_frame(3, rng)
        assert validate_frame(f) == []
        assert complex_algebra_check(f) == []


def test_non_associative_frame_breaks_semigroup_law():
    f = Frame(2, {(0, 0): {1}, (1, 0): {1}, (0, 1): {0}})
    laws = {v.law for v in complex_algebra_check(f)}
    assert "semigroup" in laws


def test_union_frame_division():
    # with union as composition, X \ Y holds the sets whose union with every member of X stays in Y
    A = complex_algebra(union_frame(2))
    X, Y = 0b0010, 0b1010  # X = {{0}}, Y = {{0}, {0,1}}
    assert A.ldiv[X][Y] == 0b1111 & sum(1 << s for s in range(4) if (1 | s) in (1, 3))


def test_complex_algebra_size_guard():
    with pytest.raises(ValueError):
        complex_algebra(union_frame(3))


# ---------------------------------------------------------------- countermodels

def test_excluded_middle_refuted_on_one_state():
    f = parse_formula("p | ~p")
    r = countermodel_search(f, 2)
    assert r.model.frame.n == 1 and r.model.valuation["p"] == frozenset()
    assert validate_frame(r.model.frame) == []
    assert refuting_states(r.model, f) == r.refuting == {0}


def test_left_division_identity_refuted_on_two_states():
    f = parse_formula("p \\ p", NONCOMMUTATIVE)
    r = countermodel_search(f, 2, NONCOMMUTATIVE)
    m = r.model
    assert m.frame.n == 2
    assert validate_frame(m.frame) == []
    assert refuting_states(m, f, NONCOMMUTATIVE) == r.refuting != frozenset()
    assert naive_eval(m, f) != frozenset(range(2))


def test_valid_formula_has_no_small_countermodel():
    r = countermodel_search(parse_formula("(p & ~p) -* q"), 2)
    assert r.model is None and not r.exhausted and r.examined > 0


def test_model_budget():
    r = countermodel_search(parse_formula("(p & ~p) -* q"), 2, max_models=10)
    assert r.exhausted and r.examined == 10


def test_model_file_roundtrip():
    m = countermodel_search(parse_formula("p \\ p", NONCOMMUTATIVE), 2, NONCOMMUTATIVE).model
    again = parse_model(format_model(m))
    assert again.frame == m.frame and again.valuation == m.valuation


def test_frame_file_with_negation():
    text = "states 2\ncomp 0 0 : 0\ncomp 1 1 : 1 0\nneg {0} : {1}\nneg {} : {0,1}\n"
    f = parse_frame(text)
    assert f.comp(1, 1) == {0, 1} and f.negate(frozenset()) == {0, 1}
    assert parse_frame(format_model(Model(f))) == f


@pytest.mark.parametrize("text", [
    "comp 0 0 : 0\n", "states 1\ncomp 0 : 0\n", "states 1\nfoo\n", "states 1\ncomp 0 0 : 3\n",
    "states 1\nneg 0 : 0\n", "states 1\nval P : 0\n",
])
def test_bad_model_files(text):
    with pytest.raises(ParseError):
        parse_model(text)


# ---------------------------------------------------------------- truncated tiling model

def test_truncated_model_shape():
    m = build_truncated_model(TAU, 2)
    assert m.frame.n == 16 and m.frame.neg == COMPLEMENT
    assert validate_frame(m.frame) == []
    assert m.valuation["oe"] == {s for s in range(16) if parity_letter(*even_odd(s)) == "oe"}
    assert m.meta["K"] == 2


def test_truncated_model_atoms():
    m = build_truncated_model(TAU, 2)
    assert m.valuation["xx"] == {1, 4}  # the single even elements
    assert 0 not in m.valuation["cc"]
    for s in range(16):
        e, o = even_odd(s)
        assert (s in m.valuation[parity_letter(e, o)])
        t = TAU(e, o)
        assert s in m.valuation[f"u{t.up}"] and s in m.valuation[f"r{t.right}"]


def test_hypothesis_fails_at_empty_set_in_finite_truncation():
    # the boundary: nothing beyond K elements exists to witness the last x-step
    for K in (2, 3):
        m = build_truncated_model(TAU, K)
        assert 0 not in evaluate(m, T.hypothesis(T.FIG2A), NONCOMMUTATIVE)


def test_even_odd_counts():
    assert even_odd(0b1011) == (1, 2)
    assert even_odd(0) == (0, 0)


@pytest.mark.parametrize("K", [2, 3])
def test_abstraction_agrees_on_all_sets(K):
    m = build_truncated_model(TAU, K)
    absm = AbstractModel(TAU, K, NONCOMMUTATIVE)
    ev = Evaluator(m, NONCOMMUTATIVE)
    for f in T.subformulas(T.compile_phi(T.FIG2A)):
        sat = ev.sat(f)
        table = absm.table(f)
        for s in range(m.frame.n):
            assert sat[s] == table[even_odd(s)]


def test_abstract_eps_is_empty_set():
    absm = AbstractModel(TAU, 3)
    assert absm.eval(Atom("ee"), EPS) and not absm.eval(Atom("cc"), EPS)
    with pytest.raises(ValueError):
        absm.eval(Atom("ee"), (4, 0))


# ---------------------------------------------------------------- extraction

@pytest.fixture(scope="module")
def model_k4():
    return build_truncated_model(TAU, 4)


def test_extraction_recovers_tiling(model_k4):
    ex = extract_tiling(model_k4, 3, s=0)
    a = ex.assignment()
    assert T.is_valid(T.FIG2A, a)
    for (m, n), t in ex.tiles.items():
        assert t == TAU.index(m, n)
        assert ex.parities[(m, n)] == parity_letter(m, n)
        assert even_odd(ex.points[(m, n)]) == (m, n)


def test_extraction_small_grid(model_k4):
    ex = extract_tiling(model_k4, 1, s=0)
    assert set(ex.tiles) == {(1, 0)}


def test_extraction_from_full_set_fails(model_k4):
    with pytest.raises(WitnessNotFound):
        extract_tiling(model_k4, 3, s=255)


def test_duplicate_tiles_reported():
    W = T.TileSet(T.FIG2A.tiles + (T.FIG2A[0],))
    tau = T.PeriodicTiling(W, TAU.table)
    with pytest.raises(MultipleTiles) as info:
        extract_tiling(build_truncated_model(tau, 3), 2, s=0)
    assert info.value.code == "multiple-tiles"
