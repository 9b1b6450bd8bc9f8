"""Bounded backward proof search for LBI.

The search is cut-free and works on canonical sequents.  Each round of
iterative deepening fixes a height bound and a per-branch contraction
allowance, so the proof reported for a budget is the first one in a fixed
exploration order.  A ``not-found`` answer says nothing about provability.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .calculus import (
    ROOT, Focus, Proof, derive, items, leaves, plug, subbunch,
)
from .syntax import (
    ADD_UNIT, BOT, MULT_UNIT, TOP, UNIT, Binary, Comma, Leaf, Neg, Semi, Sequent,
    bunch_canonical, imp_parts, make_node, wand_parts,
)

FOUND = "found"
EXHAUSTED = "budget-exhausted"
NO_RULE = "no-rule-applies"


@dataclass
class Budget:
    max_depth: int = 12
    max_contractions: int = 1
    max_nodes: int = 200_000

    def __post_init__(self):
        if self.max_depth < 1 or self.max_contractions < 0 or self.max_nodes < 1:
            raise ValueError("budget components must be positive")


@dataclass
class SearchResult:
    status: str
    proof: Proof | None
    nodes: int
    depth: int  # height bound of the successful (or last) round
    contractions: int

    @property
    def found(self) -> bool:
        return self.proof is not None


class _OutOfNodes(Exception):
    pass


class _Search:
    def __init__(self, budget: Budget):
        self.budget = budget
        self.nodes = 0
        self.cut_off = False
        self.failed: set = set()

    def prove(self, s: Sequent, depth: int, contr: int, path: frozenset):
        key = (s, depth, contr)
        if key in self.failed:
            return None
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise _OutOfNodes
        if s in path:
            return None
        got = self._prove(s, depth, contr, path | {s})
        if got is None:
            self.failed.add(key)
        return got

    def _prove(self, s: Sequent, depth: int, contr: int, path):
        closed = _close(s)
        if closed is not None:
            if closed.height() <= depth:
                return closed
            self.cut_off = True
            return None
        if depth <= 1:
            self.cut_off = True
            return None
        C, f = s.antecedent, s.succedent
        d = depth - 1

        # invertible steps: apply the first one and commit
        inv = _invertible(s)
        if inv is not None:
            rule, params, prems = inv
            subs = []
            for q in prems:
                sub = self.prove(q, d, contr, path)
                if sub is None:
                    return None
                subs.append(sub)
            return derive(rule, s, subs, **params)

        for rule, params, prems in _choices(s):
            subs = []
            for q in prems:
                sub = self.prove(q, d, contr, path)
                if sub is None:
                    break
                subs.append(sub)
            else:
                return derive(rule, s, subs, **params)

        cands = list(_contractions(s))
        if cands and contr == 0:
            self.cut_off = True
        if contr > 0:
            for fo in cands:
                dd = subbunch(C, fo)
                q = Sequent(plug(C, fo, make_node(Semi, [dd, dd])), f)
                sub = self.prove(q, d, contr - 1, path)
                if sub is not None:
                    return derive("c", s, [sub], focus=fo)
        return None


def _close(s: Sequent) -> Proof | None:
    """Zero-premise closures, possibly after one weakening."""
    C, f = s.antecedent, s.succedent
    if C == Leaf(f):
        return derive("ax", s)
    if f == TOP:
        top = derive("topR", Sequent(ADD_UNIT, TOP))
        return top if C == ADD_UNIT else derive("w", s, [top], focus=ROOT)
    if C == MULT_UNIT and f == UNIT:
        return derive("unitR", s)
    for path, g in leaves(C):
        if g == BOT:
            return derive("botL", s, focus=Focus(path))
    if isinstance(C, Semi) and Leaf(f) in C.children:
        k = C.children.index(Leaf(f))
        rest = tuple(i for i in range(len(C.children)) if i != k)
        return derive("w", s, [derive("ax", Sequent(Leaf(f), f))], focus=Focus((), rest))
    return None


def _invertible(s: Sequent):
    C, f = s.antecedent, s.succedent
    for path, g in leaves(C):
        fo = Focus(path)
        if g == UNIT:
            return "unitL", dict(focus=fo), [Sequent(plug(C, fo, MULT_UNIT), f)]
        if g == TOP:
            return "topL", dict(focus=fo), [Sequent(plug(C, fo, ADD_UNIT), f)]
        if isinstance(g, Binary) and g.kind in ("and", "star"):
            node = (Semi if g.kind == "and" else Comma)(Leaf(g.left), Leaf(g.right))
            return ("andL" if g.kind == "and" else "starL"), dict(focus=fo), \
                [Sequent(plug(C, fo, node), f)]
    wp = wand_parts(f)
    if wp is not None:
        return "wandR", {}, [Sequent(make_node(Comma, [C, Leaf(wp[0])]), wp[1])]
    ip = imp_parts(f)
    if ip is not None:
        return "impR", {}, [Sequent(make_node(Semi, [C, Leaf(ip[0])]), ip[1])]
    for path, g in leaves(C):
        if isinstance(g, Binary) and g.kind == "or":
            fo = Focus(path)
            return "orL", dict(focus=fo), [Sequent(plug(C, fo, Leaf(g.left)), f),
                                           Sequent(plug(C, fo, Leaf(g.right)), f)]
    return None


def _splits(parts):
    n = len(parts)
    seen = set()
    for r in range(n + 1):
        for pick in combinations(range(n), r):
            key = (tuple(parts[i] for i in pick),
                   tuple(p for i, p in enumerate(parts) if i not in pick))
            if key in seen:
                continue
            seen.add(key)
            yield pick


def _choices(s: Sequent):
    C, f = s.antecedent, s.succedent
    if isinstance(f, Binary) and f.kind == "or":
        yield "orR1", {}, [Sequent(C, f.left)]
        yield "orR2", {}, [Sequent(C, f.right)]
    if isinstance(f, Binary) and f.kind in ("and", "star"):
        node_type, rule = (Semi, "andR") if f.kind == "and" else (Comma, "starR")
        parts = items(C, node_type)
        for pick in _splits(parts):
            left = make_node(node_type, [parts[i] for i in pick])
            right = make_node(node_type, [p for i, p in enumerate(parts) if i not in pick])
            yield rule, dict(split=pick), [Sequent(left, f.left), Sequent(right, f.right)]
    # left rules for wands and implications, over every choice of the side context
    for rule, node_type, reader in (("wandL", Comma, wand_parts), ("impL", Semi, imp_parts)):
        for fo, parts, k, (a, b) in _left_sites(C, node_type, reader):
            others = [i for i in range(len(parts)) if i != k]
            for r in range(len(others) + 1):
                for extra in combinations(others, r):
                    if fo.path is not None and extra:
                        pick = tuple(sorted(extra + (k,)))
                        focus = Focus(fo.path, pick) if len(pick) < len(parts) else Focus(fo.path)
                        sub = make_node(node_type, [parts[i] for i in pick])
                        act = items(sub, node_type).index(parts[k])
                    else:
                        focus = Focus(fo.path + (k,)) if len(parts) > 1 else fo
                        act = 0
                    delta = make_node(node_type, [parts[i] for i in extra])
                    yield rule, dict(focus=focus, active=act), [
                        Sequent(delta, a), Sequent(plug(C, focus, Leaf(b)), f)]


def _left_sites(C, node_type, reader):
    """(focus of the enclosing node, its items, index of the active leaf, parts)."""
    def walk(b, path):
        if isinstance(b, Leaf):
            got = reader(b.formula)
            if got is not None and not (path and _parent_is(C, path, node_type)):
                yield Focus(path), [b], 0, got
            return
        if isinstance(b, (Comma, Semi)):
            if type(b) is node_type:
                for k, c in enumerate(b.children):
                    if isinstance(c, Leaf):
                        got = reader(c.formula)
                        if got is not None:
                            yield Focus(path), list(b.children), k, got
            for i, c in enumerate(b.children):
                yield from walk(c, path + (i,))
    yield from walk(C, ())


def _parent_is(C, path, node_type) -> bool:
    node = C
    for i in path[:-1]:
        node = node.children[i]
    return type(node) is node_type


def _contractions(s: Sequent):
    C, f = s.antecedent, s.succedent
    seen = set()
    for path, g in leaves(C):
        if (wand_parts(g) or isinstance(g, Neg) or
                (isinstance(g, Binary) and g.kind == "himp")) and g not in seen:
            seen.add(g)
            yield Focus(path)
    if isinstance(f, Binary) and f.kind == "and" and C not in (ADD_UNIT,):
        yield ROOT


def prove_bounded(s: Sequent, budget: Budget | int | None = None) -> SearchResult:
    """Search for a cut-free proof of ``s`` within ``budget``."""
    if budget is None:
        budget = Budget()
    elif isinstance(budget, int):
        budget = Budget(max_depth=budget)
    goal = s.canonical()
    search = _Search(budget)
    last = (1, 0)
    try:
        for depth in range(1, budget.max_depth + 1):
            for contr in range(budget.max_contractions + 1):
                last = (depth, contr)
                search.failed.clear()
                got = search.prove(goal, depth, contr, frozenset())
                if got is not None:
                    proof = _restore_root(got, s)
                    return SearchResult(FOUND, proof, search.nodes, depth, contr)
                if not search.cut_off:
                    return SearchResult(NO_RULE, None, search.nodes, depth, contr)
                search.cut_off = False
    except _OutOfNodes:
        return SearchResult(EXHAUSTED, None, search.nodes, *last)
    return SearchResult(EXHAUSTED, None, search.nodes, *last)


def _restore_root(p: Proof, s: Sequent) -> Proof:
    """Report the conclusion as the user wrote it; the checker matches modulo equivalence."""
    if p.conclusion == s:
        return p
    return Proof(p.rule, s, p.premises, p.focus, p.split, p.active, p.cut)
