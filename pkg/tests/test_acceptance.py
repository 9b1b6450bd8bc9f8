"""The twelve acceptance criteria, one test each.

Each test prints ``criterion N: PASS|FAIL`` with its timing; the lines are also
collected into the terminal summary by conftest.
"""
import random
import time
from itertools import product
from pathlib import Path

import pytest

from bunchlab import acm
from bunchlab import tiling as T
from bunchlab.calculus import (
    check_proof, comma_growth_derivation, multiplicative_length, parse_proof,
)
from bunchlab.frames import (
    AbstractModel, Evaluator, associative_tables, build_truncated_model,
    complex_algebra_check, countermodel_search, even_odd, extract_tiling,
    frame_from_table, neg_tables, parity_letter, random_frame, refuting_states,
    validate_frame,
)
from bunchlab.search import Budget, prove_bounded
from bunchlab.syntax import (
    NONCOMMUTATIVE, Atom, Binary, Comma, Neg, Leaf, Semi, bunch_depth, parse_bunch, parse_formula,
    parse_sequent,
)
from conftest import ACCEPTANCE_LINES
from corpus import GOLDEN, MUTATED

HERE = Path(__file__).parent


def report(n, title, ok, seconds, detail=""):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {title} ({seconds:.3f}s){' ' + detail if detail else ''}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_proof_kernel():
    t0 = time.perf_counter()
    per_rule = {}
    good = 0
    for rule, text in GOLDEN:
        per_rule[rule] = per_rule.get(rule, 0) + 1
        good += check_proof(parse_proof(text), allow_open=True).ok
    caught = 0
    for text, code in MUTATED:
        codes = [v.code for v in check_proof(parse_proof(text), allow_open=True).violations
                 if v.where == ()]
        caught += codes == [code]
    dt = time.perf_counter() - t0
    ok = (len(GOLDEN) >= 40 and min(per_rule.values()) >= 2 and len(per_rule) == 21
          and good == len(GOLDEN) and caught == len(MUTATED) and dt < 1.0)
    report(1, "proof kernel corpora", ok, dt,
           f"golden {good}/{len(GOLDEN)}, mutated {caught}/{len(MUTATED)}")


def test_criterion_02_distributivity():
    t0 = time.perf_counter()
    r = prove_bounded(parse_sequent("p & (q | r) => (p & q) | (p & r)"), Budget(max_depth=12))
    ok = r.found and r.depth <= 12 and check_proof(r.proof).ok
    dt = time.perf_counter() - t0
    report(2, "distributivity proof", ok and dt < 5.0, dt, f"depth {r.depth}, nodes {r.nodes}")


def _random_bunch(rng, leaves):
    if leaves == 1:
        return Leaf(Atom(rng.choice("pqrs")))
    k = rng.randint(1, leaves - 1)
    node = rng.choice([Comma, Semi])
    return node(_random_bunch(rng, k), _random_bunch(rng, leaves - k))


def test_criterion_03_depth_identity():
    t0 = time.perf_counter()
    X, Y, Z = parse_bunch("p"), parse_bunch("q"), parse_bunch("r, s")
    left, right = bunch_depth(Comma(Comma(X, Y), Z)), bunch_depth(Comma(X, Comma(Y, Z)))
    ok = left == 2 and right == 3 and left == bunch_depth(Z) + 1 and right == bunch_depth(Z) + 2
    rng = random.Random(20240101)
    tried = bad = 0
    while tried < 1000:
        x, y, z = (_random_bunch(rng, rng.randint(1, 7)) for _ in range(3))
        dz = bunch_depth(z)
        if not (dz > bunch_depth(x) and dz > bunch_depth(y)):
            continue
        tried += 1
        if bunch_depth(Comma(Comma(x, y), z)) != dz + 1 or bunch_depth(Comma(x, Comma(y, z))) != dz + 2:
            bad += 1
    dt = time.perf_counter() - t0
    report(3, "depth identity", ok and bad == 0, dt, f"{tried} random triples, {bad} failures")


def test_criterion_04_multiplicative_length():
    t0 = time.perf_counter()
    a = multiplicative_length(parse_sequent("p, q, r => s"))
    b = multiplicative_length(parse_sequent("p, ((q, r); (q, r)) => s"))
    report(4, "multiplicative length", a == 1 and b == 2, time.perf_counter() - t0,
           f"conclusion {a}, premise {b}")


def test_criterion_05_comma_growth():
    t0 = time.perf_counter()
    steps = comma_growth_derivation(5)
    top = bunch_depth(steps[-1].conclusion.antecedent)
    # one check of the whole derivation visits every node once; each spine step must be
    # a premise of the step below it, so all of them are covered
    report_ = check_proof(steps[0], allow_open=True)
    linked = all(any(q is nxt for q in cur.premises) for cur, nxt in zip(steps, steps[1:]))
    opens = sum(1 for q in steps[0].nodes() if q.rule == "open")
    all_ok = report_.ok and not report_.violations and linked and opens >= 1
    dt = time.perf_counter() - t0
    report(5, "comma growth", all_ok and top >= 5 and dt < 1.0, dt,
           f"{len(steps)} sequents, top depth {top}")


def test_criterion_06_fig2_tile_sets():
    t0 = time.perf_counter()
    got = T.search_periodic(T.FIG2A, 4)
    a_ok = got is not None and got[:2] == (1, 2) and T.is_valid(T.FIG2A, got[2])
    candidates = 0
    b_valid = 0
    for combo in product(range(len(T.FIG2B)), repeat=4):
        candidates += 1
        cells = {(x, y): combo[2 * y + x] for x in range(2) for y in range(2)}
        b_valid += T.is_valid(T.FIG2B, T.TileAssignment("region", 2, 2, cells))
    b_ok = (candidates == 16 and b_valid == 0 and T.tiles_region(T.FIG2B, 2, 2) is None
            and T.search_periodic(T.FIG2B, 4) is None)
    dt = time.perf_counter() - t0
    report(6, "example tile sets", a_ok and b_ok and dt < 1.0, dt,
           f"(a) periods {got[:2] if got else None}, (b) {b_valid}/{candidates} 2x2 candidates valid")


def test_criterion_07_reduction_compiler():
    t0 = time.perf_counter()
    phi = T.compile_phi(T.FIG2A)
    atoms = phi.atoms()
    outer = phi.kind == "ldiv" and phi.right == Atom("p")
    conj, h = [], phi.left
    while isinstance(h, Binary) and h.kind == "and" and len(conj) < 3:
        conj.append(h.right)
        h = h.left
    conj.append(h)
    conj.reverse()
    outer = (outer and isinstance(conj[0], Neg)
             and [c.kind for c in conj[1:]] == ["ldiv", "rdiv", "rdiv"])

    def disjuncts(f):
        if isinstance(f, Binary) and f.kind == "or":
            return disjuncts(f.left) + disjuncts(f.right)
        return [f]
    alpha = conj[3].left
    golden = parse_formula((HERE / "golden" / "phi_fig2a.txt").read_text().strip(), NONCOMMUTATIVE)
    ok = (len(atoms) == 20 and "p" in atoms and outer and len(disjuncts(alpha)) == 4
          and conj[1].right == alpha and conj[2].left.right == alpha and phi == golden)
    report(7, "reduction compiler", ok, time.perf_counter() - t0,
           f"{len(atoms)} atoms, {len(disjuncts(alpha))} parity disjuncts")


def test_criterion_08_round_trip():
    t0 = time.perf_counter()
    tau = T.periodic_tiling(T.FIG2A, 4)
    model = build_truncated_model(tau, 4)
    ex = extract_tiling(model, 3, s=0)
    a = ex.assignment()
    shifted = {(m - 1, n): tau.index(m, n) for m in range(1, 4) for n in range(3)}
    parities = all(ex.parities[(m, n)] == parity_letter(m, n) for (m, n) in ex.points)
    coords = all(even_odd(s) == mn for mn, s in ex.points.items())
    ok = (model.frame.n == 256 and T.is_valid(T.FIG2A, a) and a.cells == shifted
          and len(ex.tiles) == 9 and parities and coords)
    dt = time.perf_counter() - t0
    report(8, "truncated model round trip", ok and dt < 30.0, dt, f"{ex.checked} witness checks")


def test_criterion_09_abstraction_soundness():
    t0 = time.perf_counter()
    K = 3
    tau = T.periodic_tiling(T.FIG2A, 4)
    model = build_truncated_model(tau, K)
    ev = Evaluator(model, NONCOMMUTATIVE)
    absm = AbstractModel(tau, K, NONCOMMUTATIVE)
    states = [s for s in range(model.frame.n) if max(even_odd(s)) <= 1]
    subs = T.subformulas(T.compile_phi(T.FIG2A))
    bad = compared = 0
    for f in subs:
        sat = ev.sat(f)
        for s in states:
            compared += 1
            bad += bool(sat[s]) != absm.eval(f, even_odd(s))
    report(9, "abstraction soundness", bad == 0, time.perf_counter() - t0,
           f"{len(subs)} subformulas x {len(states)} sets, {bad} disagreements")


def test_criterion_10_finite_algebra_axioms():
    t0 = time.perf_counter()
    frames = violations = 0
    for n in (1, 2):
        for table in associative_tables(n):
            for neg in neg_tables(n):
                f = frame_from_table(n, table, neg)
                frames += 1
                violations += len(validate_frame(f)) + len(complex_algebra_check(f))
    rng = random.Random(20240101)
    for _ in range(200):
        f = random_frame(3, rng)
        frames += 1
        violations += len(validate_frame(f)) + len(complex_algebra_check(f))
    report(10, "finite algebra axioms", violations == 0, time.perf_counter() - t0,
           f"{frames} frames, {violations} violations")


def test_criterion_11_countermodels():
    t0 = time.perf_counter()
    lem = parse_formula("p | ~p")
    r1 = countermodel_search(lem, 1)
    ok1 = (r1.model is not None and r1.model.frame.n == 1 and not validate_frame(r1.model.frame)
           and refuting_states(r1.model, lem) == r1.refuting != frozenset())
    div = parse_formula("p \\ p", NONCOMMUTATIVE)
    r2 = countermodel_search(div, 2, NONCOMMUTATIVE)
    ok2 = (r2.model is not None and r2.model.frame.n <= 2 and not validate_frame(r2.model.frame)
           and refuting_states(r2.model, div, NONCOMMUTATIVE) == r2.refuting != frozenset())
    report(11, "countermodels", ok1 and ok2, time.perf_counter() - t0,
           f"p | ~p at size {r1.model.frame.n if r1.model else '-'}, "
           f"p \\ p at size {r2.model.frame.n if r2.model else '-'}")


def test_criterion_12_acm_soundness():
    t0 = time.perf_counter()
    proofs = failures = 0
    machines = []
    for name in ("decrement.acm", "fork.acm"):
        m, start = acm.parse_machine((HERE / "data" / name).read_text())
        tree = acm.accepts_bounded(m, start, 6)
        proofs += 1
        failures += tree is None or not check_proof(acm.soundness_proof(m, tree)).ok
    rng = random.Random(20240101)
    while len(machines) < 50:
        machines.append(acm.random_machine(rng, 3, 2, 4))
    for m in machines:
        for cfg in acm.configurations(m, 3):
            tree = acm.accepts_bounded(m, cfg, 6)
            if tree is None:
                continue
            proofs += 1
            failures += not check_proof(acm.soundness_proof(m, tree)).ok
    dt = time.perf_counter() - t0
    report(12, "ACM soundness proofs", failures == 0 and dt < 60.0, dt,
           f"{len(machines)} random machines, {proofs} proofs, {failures} failures")
