from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from bunchlab import acm
from bunchlab.calculus import (
    OPEN, RULES, Focus, Proof, RuleError, check_proof, comma_growth_derivation,
    comma_growth_formulas, locate, multiplicative_length, parse_proof, plug,
    premises_for, print_proof, sequent_graph, subbunch,
)
from bunchlab.search import prove_bounded
from bunchlab.syntax import (
    ADD_UNIT, Atom, Comma, Leaf, ParseError, Sequent, bunch_canonical, bunch_depth,
    parse_bunch, parse_sequent,
)
from corpus import GOLDEN, MUTATED


# ---------------------------------------------------------------- golden and mutated corpora

def test_corpus_covers_every_rule_twice():
    counts = {r: 0 for r in RULES}
    for rule, _ in GOLDEN:
        counts[rule] += 1
    assert min(counts.values()) >= 2
    assert len(GOLDEN) >= 40


@pytest.mark.parametrize("rule,text", GOLDEN, ids=[f"{r}-{i}" for i, (r, _) in enumerate(GOLDEN)])
def test_golden_instance_checks(rule, text):
    p = parse_proof(text)
    assert p.rule == rule
    report = check_proof(p, allow_open=True)
    assert report.ok, [str(v) for v in report.violations]


@pytest.mark.parametrize("text,code", MUTATED, ids=[c for _, c in MUTATED])
def test_mutated_instance_rejected(text, code):
    report = check_proof(parse_proof(text), allow_open=True)
    assert [v.code for v in report.violations if v.where == ()] == [code]


def test_unknown_rule_rejected():
    p = Proof("frob", parse_sequent("p => p"))
    assert [v.code for v in check_proof(p).violations] == ["unknown-rule"]


def test_open_leaf_rejected_in_closed_mode():
    p = parse_proof('(c [at=/] "p => q" (open [] "p; p => q"))')
    assert check_proof(p, allow_open=True).ok
    assert [v.code for v in check_proof(p).violations] == ["open-leaf"]


def test_star_right_cannot_share_the_bunch():
    p = parse_proof('(starR [split=0,1] "p, q => p * q" (open [] "p, q => p") (open [] "p, q => q"))')
    assert not check_proof(p, allow_open=True).ok


@pytest.mark.parametrize("rule,text", GOLDEN[::3])
def test_certificate_roundtrip(rule, text):
    p = parse_proof(text)
    assert parse_proof(print_proof(p)) == p
    assert print_proof(parse_proof(print_proof(p, indent=0))) == print_proof(p)


@pytest.mark.parametrize("text", [
    '(ax [] "p => p"', '(frob [] "p => p")', '(ax [] "p => p") junk',
    '(w [at=x] "p => p")', '(ax [zz=1] "p => p")',
])
def test_malformed_certificates(text):
    with pytest.raises(ParseError):
        parse_proof(text)


def test_checker_rejects_other_modes():
    with pytest.raises(ValueError):
        check_proof(parse_proof(GOLDEN[0][1]), mode="gbi")


# ---------------------------------------------------------------- contexts

def test_focus_pick_and_plug():
    b = bunch_canonical(parse_bunch("r, (p; q; s)"))
    fo = Focus((1,), (0, 2))
    assert subbunch(b, fo) == bunch_canonical(parse_bunch("p; s"))
    assert plug(b, fo, ADD_UNIT) == bunch_canonical(parse_bunch("r, q"))


def test_locate_finds_picked_children():
    b = bunch_canonical(parse_bunch("r, (p; q; s)"))
    assert locate(b, parse_bunch("s; p")) == Focus((1,), (0, 2))


def test_bad_focus_raises():
    with pytest.raises(RuleError) as info:
        premises_for("w", parse_sequent("p => p").canonical(), focus=Focus((3,)))
    assert info.value.code == "bad-focus"


# ---------------------------------------------------------------- proofs from search

SEQUENTS = [
    "p & (q | r) => p & q | p & r",
    "p, q => q * p",
    "p * q => q * p",
    "p -* q, p => q",
    "p; p -> q => q",
    "e+ => top",
    "p => p & p",
    "bot => q",
]


@pytest.mark.parametrize("text", SEQUENTS)
def test_search_output_checks(text):
    r = prove_bounded(parse_sequent(text))
    assert r.found
    assert check_proof(r.proof).ok


def _mutate_conclusions(p: Proof, target: int, counter: list) -> Proof:
    counter[0] += 1
    if counter[0] - 1 == target:
        s = p.conclusion
        return replace(p, conclusion=Sequent(Comma(s.antecedent, Leaf(Atom("zz"))), s.succedent))
    prems = tuple(_mutate_conclusions(q, target, counter) for q in p.premises)
    return replace(p, premises=prems)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SEQUENTS), st.integers(0, 50))
def test_any_changed_conclusion_is_caught(text, k):
    p = prove_bounded(parse_sequent(text)).proof
    k %= p.size()
    bad = _mutate_conclusions(p, k, [0])
    assert not check_proof(bad).ok


# ---------------------------------------------------------------- gadgets

def _machine(text):
    m, cfg = acm.parse_machine(text)
    return m, cfg


def test_base_gadget_has_six_nodes():
    m, _ = _machine("states q0 qf\nfinal qf\nregisters 1\ndec q0 qf 1\n")
    from bunchlab.calculus import gadget_proof
    p = gadget_proof("base", m, m.config("qf"))
    assert p.size() == 5 and p.height() == 5  # ax, eq, unitL, w, andL
    assert [n.rule for n in p.nodes()] == ["andL", "w", "unitL", "eq", "ax"]
    assert check_proof(p).ok


@pytest.mark.parametrize("op", ["inc", "dec", "fork"])
def test_instruction_gadgets_check(op):
    from bunchlab.calculus import gadget_proof
    lines = {"inc": "inc q0 q1 1\ndec q1 qf 1", "dec": "dec q0 qf 1", "fork": "fork q0 qf qf"}[op]
    m, _ = _machine(f"states q0 q1 qf\nfinal qf\nregisters 1\n{lines}\n")
    start = m.config("q0", (1,) if op == "dec" else (0,))
    tree = acm.accepts_bounded(m, start, 4)
    assert tree is not None and tree.instruction.op == op
    p = acm.soundness_proof(m, tree)
    assert check_proof(p).ok
    with pytest.raises(ValueError):
        gadget_proof("fork" if op != "fork" else "increment", m, start, [], tree.instruction)


# ---------------------------------------------------------------- multiplicative length

def test_multiplicative_length_examples():
    assert multiplicative_length(parse_sequent("p, q, r => s")) == 1
    assert multiplicative_length(parse_sequent("p, ((q, r); (q, r)) => s")) == 2
    assert multiplicative_length(parse_sequent("p => q")) == 0


def test_multiplicative_length_polarity():
    assert multiplicative_length(parse_sequent("p * q => r")) == 1
    assert multiplicative_length(parse_sequent("p => q * r")) == 0
    assert multiplicative_length(parse_sequent("p => q -* r")) == 1
    assert multiplicative_length(parse_sequent("q -* r => p")) == 0
    # the antecedent of a positive wand is negative, so a star there counts
    assert multiplicative_length(parse_sequent("p => (q * r) -* s")) == 2


def test_sequent_graph_has_single_source():
    g = sequent_graph(parse_sequent("p, (q; r -* s) => t * u"))
    targets = {b for _, b in g.edges}
    assert [n for n in range(len(g.labels)) if n not in targets] == [0]


# ---------------------------------------------------------------- comma growth

def test_comma_growth_single_iteration():
    steps = comma_growth_derivation(1)
    assert len(steps) == 11
    x, A, q = comma_growth_formulas()
    top = steps[-1].conclusion
    assert top.succedent == q
    assert bunch_canonical(top.antecedent) == bunch_canonical(Comma(x, Comma(x, A)))
    assert steps[0].conclusion == Sequent(Leaf(A), q)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_comma_growth_depth_and_checks(n):
    steps = comma_growth_derivation(n)
    assert bunch_depth(steps[-1].conclusion.antecedent) == 2 * n
    for p in steps:
        assert check_proof(p, allow_open=True).ok
    assert steps[-1].rule == OPEN


def test_comma_growth_rejects_zero():
    with pytest.raises(ValueError):
        comma_growth_derivation(0)
