"""LBI proof objects, the rule checker and proof certificates.

Rules act on canonical bunches.  A rule that works inside a context
Gamma(-) names its hole with a :class:`Focus`: a path of child indices
from the root of the canonical antecedent, optionally followed by a
``pick`` of several children of an n-ary node (the picked children,
joined by that node's separator, form the focused sub-bunch).

Negation ``~a`` is read as ``a -> bot`` by the implication rules, and in
the commutative calculus ``a \\ b`` and ``b / a`` are read as ``a -* b``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .syntax import (
    ADD_UNIT, BOT, MULT_UNIT, TOP, UNIT, Atom, Binary, Bunch, Comma, Const, Formula, Leaf,
    Neg, ParseError, Semi, Sequent, bunch_canonical, imp_parts, make_node,
    parse_formula, parse_sequent, print_formula, print_sequent, wand_parts,
)

RULES = (
    "ax", "eq", "w", "c", "cut", "botL", "unitL", "unitR", "topL", "topR",
    "starL", "starR", "wandL", "wandR", "orR1", "orR2", "andL", "andR",
    "impL", "impR", "orL",
)
OPEN = "open"

# rule tag -> (number of premises, parameters it uses)
_SHAPE = {
    "ax": (0, ()), "eq": (1, ()), "w": (1, ("focus",)), "c": (1, ("focus",)),
    "cut": (2, ("focus", "cut")), "botL": (0, ("focus",)), "unitL": (1, ("focus",)),
    "unitR": (0, ()), "topL": (1, ("focus",)), "topR": (0, ()),
    "starL": (1, ("focus",)), "starR": (2, ("split",)),
    "wandL": (2, ("focus", "active")), "wandR": (1, ()),
    "orR1": (1, ()), "orR2": (1, ()), "andL": (1, ("focus",)), "andR": (2, ("split",)),
    "impL": (2, ("focus", "active")), "impR": (1, ()), "orL": (2, ("focus",)),
    OPEN: (0, ()),
}


@dataclass(frozen=True)
class Focus:
    path: tuple = ()
    pick: tuple | None = None

    def __str__(self):
        s = "/" + "/".join(map(str, self.path))
        if self.pick is not None:
            s += "{" + ",".join(map(str, self.pick)) + "}"
        return s


ROOT = Focus()


class RuleError(Exception):
    """A rule instance does not fit its schema; ``code`` names the mismatch."""

    def __init__(self, code: str, msg: str):
        self.code = code
        super().__init__(msg)


# ---------------------------------------------------------------- contexts

def _node_at(b: Bunch, path: Sequence[int]) -> Bunch:
    for i in path:
        if not isinstance(b, (Comma, Semi)) or not 0 <= i < len(b.children):
            raise RuleError("bad-focus", f"path {list(path)} leaves the bunch")
        b = b.children[i]
    return b


def _check_pick(node: Bunch, pick) -> None:
    if not isinstance(node, (Comma, Semi)):
        raise RuleError("bad-focus", "pick on a node without children")
    if not pick or list(pick) != sorted(set(pick)) or pick[-1] >= len(node.children) or pick[0] < 0:
        raise RuleError("bad-focus", f"bad pick {pick}")


def subbunch(b: Bunch, focus: Focus) -> Bunch:
    """The sub-bunch of canonical ``b`` selected by ``focus``."""
    node = _node_at(b, focus.path)
    if focus.pick is None:
        return node
    _check_pick(node, focus.pick)
    return make_node(type(node), [node.children[i] for i in focus.pick])


def plug(b: Bunch, focus: Focus, new: Bunch) -> Bunch:
    """Canonical form of ``b`` with the focused sub-bunch replaced by ``new``."""
    new = bunch_canonical(new)

    def go(node: Bunch, path: Sequence[int]) -> Bunch:
        if not path:
            if focus.pick is None:
                return new
            _check_pick(node, focus.pick)
            rest = [c for i, c in enumerate(node.children) if i not in focus.pick]
            return make_node(type(node), rest + [new])
        if not isinstance(node, (Comma, Semi)) or not 0 <= path[0] < len(node.children):
            raise RuleError("bad-focus", f"path {list(focus.path)} leaves the bunch")
        kids = list(node.children)
        kids[path[0]] = go(kids[path[0]], path[1:])
        return make_node(type(node), kids)

    return go(b, focus.path)


def items(b: Bunch, node_type) -> list[Bunch]:
    """View ``b`` as a list joined by ``node_type`` (the unit is the empty list)."""
    if type(b) is node_type:
        return list(b.children)
    if b == (MULT_UNIT if node_type is Comma else ADD_UNIT):
        return []
    return [b]


def locate(b: Bunch, target: Bunch) -> Focus:
    """Find a focus whose sub-bunch is ``target`` (both canonicalised)."""
    b = bunch_canonical(b)
    target = bunch_canonical(target)
    found = _locate(b, target, ())
    if found is None:
        raise ValueError(f"{target} does not occur in {b}")
    return found


def _locate(b: Bunch, target: Bunch, path: tuple) -> Focus | None:
    if b == target:
        return Focus(path)
    if not isinstance(b, (Comma, Semi)):
        return None
    if type(target) is type(b):
        pool = list(enumerate(b.children))
        pick = []
        for t in target.children:
            for k, (i, c) in enumerate(pool):
                if c == t:
                    pick.append(i)
                    del pool[k]
                    break
            else:
                pick = None
                break
        if pick is not None:
            return Focus(path, tuple(sorted(pick)))
    for i, c in enumerate(b.children):
        got = _locate(c, target, path + (i,))
        if got is not None:
            return got
    return None


def leaves(b: Bunch, path: tuple = ()) -> Iterator[tuple[tuple, Formula]]:
    if isinstance(b, Leaf):
        yield path, b.formula
    elif isinstance(b, (Comma, Semi)):
        for i, c in enumerate(b.children):
            yield from leaves(c, path + (i,))


# ---------------------------------------------------------------- proofs

@dataclass(frozen=True)
class Proof:
    rule: str
    conclusion: Sequent
    premises: tuple = ()
    focus: Focus | None = None
    split: tuple | None = None
    active: int | None = None
    cut: Formula | None = None

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def height(self) -> int:
        return 1 + max((p.height() for p in self.premises), default=0)

    def nodes(self) -> Iterator["Proof"]:
        yield self
        for p in self.premises:
            yield from p.nodes()

    def open_leaves(self) -> list["Proof"]:
        return [n for n in self.nodes() if n.rule == OPEN]

    def __str__(self):
        return print_proof(self)


@dataclass
class Violation:
    where: tuple  # premise indices from the root
    rule: str
    code: str
    message: str

    def __str__(self):
        loc = "root" if not self.where else "root." + ".".join(map(str, self.where))
        return f"{loc}: {self.rule}: {self.code}: {self.message}"


@dataclass
class CheckReport:
    violations: list = field(default_factory=list)
    nodes: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def premises_for(rule: str, concl: Sequent, focus: Focus | None = None,
                 split: tuple | None = None, active: int | None = None,
                 cut: Formula | None = None) -> list[Sequent]:
    """The canonical premises a rule instance must have, or RuleError.

    ``concl`` must already be canonical.
    """
    C, f = concl.antecedent, concl.succedent
    if rule not in _SHAPE:
        raise RuleError("unknown-rule", f"unknown rule {rule!r}")
    if "focus" in _SHAPE[rule][1] and focus is None:
        raise RuleError("bad-focus", "missing focus")

    def active_leaf():
        sub = subbunch(C, focus)
        if not isinstance(sub, Leaf):
            raise RuleError("active-shape", f"focused sub-bunch {sub} is not a formula")
        return sub.formula

    def kind_of(g, *kinds):
        if not (isinstance(g, Binary) and g.kind in kinds):
            raise RuleError("active-shape", f"{print_formula(g)} is not a {'/'.join(kinds)} formula")
        return g.left, g.right

    if rule == OPEN:
        return []
    if rule == "ax":
        if C != Leaf(f):
            raise RuleError("not-axiom", "antecedent is not the succedent formula")
        return []
    if rule == "eq":
        return [concl]
    if rule == "w":
        subbunch(C, focus)
        return [Sequent(plug(C, focus, ADD_UNIT), f)]
    if rule == "c":
        d = subbunch(C, focus)
        return [Sequent(plug(C, focus, make_node(Semi, [d, d])), f)]
    if rule == "cut":
        if cut is None:
            raise RuleError("active-shape", "cut needs a cut formula")
        d = subbunch(C, focus)
        return [Sequent(d, cut), Sequent(plug(C, focus, Leaf(cut)), f)]
    if rule == "botL":
        if active_leaf() != BOT:
            raise RuleError("active-shape", "focused formula is not bot")
        return []
    if rule in ("unitL", "topL"):
        want, unit = (UNIT, MULT_UNIT) if rule == "unitL" else (TOP, ADD_UNIT)
        if active_leaf() != want:
            raise RuleError("active-shape", f"focused formula is not {print_formula(want)}")
        return [Sequent(plug(C, focus, unit), f)]
    if rule == "unitR":
        if C != MULT_UNIT or f != UNIT:
            raise RuleError("not-axiom", "unitR needs e* => unit")
        return []
    if rule == "topR":
        if C != ADD_UNIT or f != TOP:
            raise RuleError("not-axiom", "topR needs e+ => top")
        return []
    if rule in ("starL", "andL"):
        node_type, kind = (Comma, "star") if rule == "starL" else (Semi, "and")
        a, b = kind_of(active_leaf(), kind)
        return [Sequent(plug(C, focus, node_type(Leaf(a), Leaf(b))), f)]
    if rule == "orL":
        a, b = kind_of(active_leaf(), "or")
        return [Sequent(plug(C, focus, Leaf(a)), f), Sequent(plug(C, focus, Leaf(b)), f)]
    if rule in ("starR", "andR"):
        node_type, kind = (Comma, "star") if rule == "starR" else (Semi, "and")
        a, b = kind_of(f, kind)
        parts = items(C, node_type)
        if split is None or list(split) != sorted(set(split)) or any(
                not 0 <= i < len(parts) for i in split):
            raise RuleError("bad-split", f"bad split {split} of {len(parts)} parts")
        left = make_node(node_type, [parts[i] for i in split])
        right = make_node(node_type, [p for i, p in enumerate(parts) if i not in split])
        return [Sequent(left, a), Sequent(right, b)]
    if rule in ("wandR", "impR"):
        node_type, parts = (Comma, wand_parts(f)) if rule == "wandR" else (Semi, imp_parts(f))
        if parts is None:
            raise RuleError("active-shape", f"{print_formula(f)} has the wrong main connective")
        a, b = parts
        return [Sequent(make_node(node_type, [C, Leaf(a)]), b)]
    if rule in ("orR1", "orR2"):
        a, b = kind_of(f, "or")
        return [Sequent(C, a if rule == "orR1" else b)]
    if rule in ("wandL", "impL"):
        node_type, reader = (Comma, wand_parts) if rule == "wandL" else (Semi, imp_parts)
        sub = subbunch(C, focus)
        parts = items(sub, node_type)
        if active is None or not 0 <= active < len(parts):
            raise RuleError("active-shape", f"active index {active} out of range")
        act = parts[active]
        got = reader(act.formula) if isinstance(act, Leaf) else None
        if got is None:
            raise RuleError("active-shape", f"{act} has the wrong main connective")
        a, b = got
        delta = make_node(node_type, [p for i, p in enumerate(parts) if i != active])
        return [Sequent(delta, a), Sequent(plug(C, focus, Leaf(b)), f)]
    raise RuleError("unknown-rule", rule)  # pragma: no cover


def check_proof(p: Proof, mode: str = "bi", allow_open: bool = False) -> CheckReport:
    """Check every node of ``p`` against its rule."""
    if mode not in ("bi", "commutative"):
        raise ValueError("the proof kernel implements the commutative calculus LBI only")
    report = CheckReport()
    stack = [((), p)]
    while stack:
        where, node = stack.pop()
        report.nodes += 1
        for i, q in enumerate(node.premises):
            stack.append((where + (i,), q))
        v = _check_node(node, allow_open)
        if v is not None:
            code, msg = v
            report.violations.append(Violation(where, node.rule, code, msg))
    report.violations.sort(key=lambda v: v.where)
    return report


def _check_node(node: Proof, allow_open: bool):
    if node.rule == OPEN and not allow_open:
        return "open-leaf", "open leaf in a closed proof"
    if node.rule not in _SHAPE:
        return "unknown-rule", f"unknown rule {node.rule!r}"
    n, _ = _SHAPE[node.rule]
    if len(node.premises) != n:
        return "premise-count", f"expected {n} premises, found {len(node.premises)}"
    concl = node.conclusion.canonical()
    try:
        want = premises_for(node.rule, concl, node.focus, node.split, node.active, node.cut)
    except RuleError as e:
        return e.code, str(e)
    for i, (w, q) in enumerate(zip(want, node.premises)):
        got = q.conclusion.canonical()
        if got.succedent != w.succedent:
            return "succedent-mismatch", (
                f"premise {i} succedent {print_formula(got.succedent)}, "
                f"expected {print_formula(w.succedent)}")
        if got.antecedent != w.antecedent:
            return "antecedent-mismatch", (
                f"premise {i} antecedent {got.antecedent}, expected {w.antecedent}")
    return None


def derive(rule: str, conclusion: Sequent, premises=(), **params) -> Proof:
    return Proof(rule, conclusion, tuple(premises), **params)


# ---------------------------------------------------------------- certificates

def print_proof(p: Proof, indent: int | None = None) -> str:
    """Prefix certificate ``(RULE [params] "sequent" subproof*)``."""
    parts = []
    if p.focus is not None:
        parts.append(f"at={p.focus}")
    if p.active is not None:
        parts.append(f"act={p.active}")
    if p.split is not None:
        parts.append("split=" + (",".join(map(str, p.split)) or "-"))
    if p.cut is not None:
        parts.append(f'cut="{print_formula(p.cut)}"')
    head = f'({p.rule} [{" ".join(parts)}] "{print_sequent(p.conclusion)}"'
    if not p.premises:
        return head + ")"
    if indent is None:
        return head + " " + " ".join(print_proof(q) for q in p.premises) + ")"
    pad = "\n" + " " * (indent + 2)
    return head + "".join(pad + print_proof(q, indent + 2) for q in p.premises) + ")"


_CERT_TOKEN = re.compile(r'\s*(?:(\()|(\))|(\[[^\]]*\])|("[^"]*")|([A-Za-z0-9]+))')


def parse_proof(text: str) -> Proof:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _CERT_TOKEN.match(text, pos)
        if not m:
            raise ParseError("bad certificate text", pos)
        toks.append((m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    i = 0

    def node() -> Proof:
        nonlocal i
        if i >= len(toks) or toks[i][0] != "(":
            raise ParseError("expected '('", toks[i][1] if i < len(toks) else len(text))
        rule = toks[i + 1][0] if i + 1 < len(toks) else ""
        if rule not in _SHAPE:
            raise ParseError(f"unknown rule {rule!r}", toks[i + 1][1] if i + 1 < len(toks) else len(text))
        i += 2
        params = {}
        if i < len(toks) and toks[i][0].startswith("["):
            params = _parse_params(toks[i][0][1:-1], toks[i][1])
            i += 1
        if i >= len(toks) or not toks[i][0].startswith('"'):
            raise ParseError("expected a quoted sequent", toks[i][1] if i < len(toks) else len(text))
        seq = parse_sequent(toks[i][0][1:-1])
        i += 1
        prems = []
        while i < len(toks) and toks[i][0] == "(":
            prems.append(node())
        if i >= len(toks) or toks[i][0] != ")":
            raise ParseError("expected ')'", toks[i][1] if i < len(toks) else len(text))
        i += 1
        return Proof(rule, seq, tuple(prems), **params)

    p = node()
    if i != len(toks):
        raise ParseError("trailing text after certificate", toks[i][1])
    return p


_FOCUS_RE = re.compile(r"/((?:\d+(?:/\d+)*)?)(?:\{(\d+(?:,\d+)*)\})?\Z")


def _parse_params(body: str, pos: int) -> dict:
    out = {}
    for m in re.finditer(r'(\w+)=("[^"]*"|\S+)', body):
        key, val = m.group(1), m.group(2)
        if key == "at":
            fm = _FOCUS_RE.match(val)
            if not fm:
                raise ParseError(f"bad focus {val!r}", pos)
            path = tuple(int(x) for x in fm.group(1).split("/")) if fm.group(1) else ()
            pick = tuple(int(x) for x in fm.group(2).split(",")) if fm.group(2) else None
            out["focus"] = Focus(path, pick)
        elif key == "act":
            out["active"] = int(val)
        elif key == "split":
            out["split"] = tuple(int(x) for x in val.split(",")) if val != "-" else ()
        elif key == "cut":
            out["cut"] = parse_formula(val.strip('"'))
        else:
            raise ParseError(f"unknown parameter {key!r}", pos)
    return out


# ---------------------------------------------------------------- building helpers

def _at(concl: Sequent, target) -> Focus:
    if isinstance(target, Formula):
        target = Leaf(target)
    return locate(concl.antecedent, target)


def _index_in(node_type, parts, target: Bunch) -> tuple[Bunch, int]:
    """Canonical node over ``parts`` and the position of ``target`` among its items."""
    node = make_node(node_type, parts)
    return node, items(node, node_type).index(bunch_canonical(target))


def weaken_to_top(s: Sequent) -> Proof:
    """Any bunch proves top: weaken everything away, then topR."""
    top = derive("topR", Sequent(ADD_UNIT, TOP))
    if bunch_canonical(s.antecedent) == ADD_UNIT:
        return top
    return derive("w", s, [top], focus=ROOT)


def _uses(kind: str) -> None:
    if kind not in ("base", "increment", "decrement", "fork"):
        raise ValueError(f"unknown gadget kind {kind!r}")


def gadget_proof(kind: str, machine, configuration, subproofs: Sequence[Proof] = (),
                 instruction=None) -> Proof:
    """Proof of ``q, R, theta => q_f`` from proofs for the successor configurations.

    ``machine`` supplies ``terms()`` -> (i, t, theta), ``final``,
    ``instructions``, ``instruction_formula(ins)``, ``config_bunch(cfg)``
    and ``step(cfg, ins)`` (the successor configurations, or None).
    """
    _uses(kind)
    i_f, t_f, theta = machine.terms()
    qf = Atom(machine.final)
    top_imp = wand_parts(theta.left) if isinstance(theta, Binary) else None
    if not (isinstance(theta, Binary) and theta.kind == "and" and top_imp and theta.right == UNIT):
        raise ValueError("theta must have the shape (top -* t) & unit")
    wand_top = theta.left
    goal = Sequent(machine.config_bunch(configuration), qf)

    if kind == "base":
        state, regs = configuration
        if state != machine.final or any(regs):
            raise ValueError("the base gadget needs the final state with empty registers")
        p = derive("ax", Sequent(Leaf(qf), qf))
        s1 = Sequent(Comma(Leaf(qf), MULT_UNIT), qf)
        p = derive("eq", s1, [p])
        s2 = Sequent(Comma(Leaf(qf), Leaf(UNIT)), qf)
        p = derive("unitL", s2, [p], focus=_at(s2, UNIT))
        s3 = Sequent(Comma(Leaf(qf), Semi(Leaf(wand_top), Leaf(UNIT))), qf)
        p = derive("w", s3, [p], focus=_at(s3, wand_top))
        s4 = Sequent(Comma(Leaf(qf), Leaf(theta)), qf)
        return derive("andL", s4, [p], focus=_at(s4, theta))

    if instruction is None or instruction not in machine.instructions:
        raise ValueError("the instruction does not belong to the machine")
    if instruction.op != {"increment": "inc", "decrement": "dec", "fork": "fork"}[kind]:
        raise ValueError(f"{kind} gadget used with a {instruction.op} instruction")
    succ = machine.step(configuration, instruction)
    if succ is None:
        raise ValueError("instruction not applicable to the configuration")
    if len(subproofs) != len(succ):
        raise ValueError(f"expected {len(succ)} subproofs, got {len(subproofs)}")
    for cfg, sp in zip(succ, subproofs):
        want = Sequent(machine.config_bunch(cfg), qf).canonical()
        if sp.conclusion.canonical() != want:
            raise ValueError(f"subproof proves {sp.conclusion}, expected {want}")

    A = goal.antecedent
    state, regs = configuration
    ins_f = machine.instruction_formula(instruction)

    # top: the instruction-specific left rule
    s_ins = Sequent(make_node(Comma, [bunch_canonical(A), Leaf(ins_f)]), qf)
    a, b = wand_parts(ins_f)
    q_leaf = Leaf(Atom(state))
    if kind == "decrement":
        r_leaf = Leaf(Atom(machine.register_name(instruction.reg)))
        sub, act = _index_in(Comma, [q_leaf, r_leaf, Leaf(ins_f)], Leaf(ins_f))
        left = derive("starR", Sequent(Comma(q_leaf, r_leaf), a),
                      [derive("ax", Sequent(q_leaf, a.left)), derive("ax", Sequent(r_leaf, a.right))],
                      split=(items(make_node(Comma, [q_leaf, r_leaf]), Comma).index(q_leaf),))
        p = derive("wandL", s_ins, [left, subproofs[0]], focus=_at(s_ins, sub), active=act)
    else:
        sub, act = _index_in(Comma, [q_leaf, Leaf(ins_f)], Leaf(ins_f))
        left = derive("ax", Sequent(q_leaf, a))
        rest = plug(bunch_canonical(s_ins.antecedent), _at(s_ins, sub), Leaf(b))
        s_b = Sequent(rest, qf)
        if kind == "increment":
            right = derive("starL", s_b, [subproofs[0]], focus=_at(s_b, b))
        else:
            right = derive("orL", s_b, list(subproofs), focus=_at(s_b, b))
        p = derive("wandL", s_ins, [left, right], focus=_at(s_ins, sub), active=act)

    # select the instruction out of the conjunction i
    conj = _conjuncts(i_f)
    if len(conj) > 1:
        s_all = Sequent(make_node(Comma, [bunch_canonical(A), make_node(Semi, [Leaf(c) for c in conj])]), qf)
        others = list(conj)
        others.remove(ins_f)
        p = derive("w", s_all, [p], focus=_at(s_all, make_node(Semi, [Leaf(c) for c in others])))
        s_i = Sequent(make_node(Comma, [bunch_canonical(A), Leaf(i_f)]), qf)
        p = _and_left_chain(s_i, i_f, p)

    # i -* q_f, then t, then top -* t, then theta
    p = derive("wandR", Sequent(A, Wand_like(i_f, qf, t_f)), [p])
    ctx = bunch_canonical(A)
    s_t = Sequent(Semi(Leaf(t_f), A), qf)
    _, t_act = _index_in(Semi, [Leaf(t_f), ctx], Leaf(t_f))
    p = derive("impL", s_t, [p, derive("ax", Sequent(Leaf(qf), qf))], focus=ROOT, active=t_act)
    q_and_regs = [c for c in items(ctx, Comma) if c != Leaf(theta)]
    first = Comma(tuple(q_and_regs) + (Leaf(wand_top),))
    s_w = Sequent(Semi(first, A), qf)
    w_node, w_act = _index_in(Comma, q_and_regs + [Leaf(wand_top)], Leaf(wand_top))
    delta = Sequent(make_node(Comma, q_and_regs), TOP)
    p = derive("wandL", s_w, [weaken_to_top(delta), p], focus=_at(s_w, w_node), active=w_act)
    inner = Comma(tuple(q_and_regs) + (Semi(Leaf(wand_top), Leaf(UNIT)),))
    s_wk = Sequent(Semi(inner, A), qf)
    p = derive("w", s_wk, [p], focus=_at(s_wk, UNIT))
    s_th = Sequent(Semi(A, A), qf)
    p = derive("andL", s_th, [p], focus=_at(s_th, theta))
    return derive("c", goal, [p], focus=ROOT)


def Wand_like(i_f: Formula, qf: Formula, t_f: Formula) -> Formula:
    """The antecedent of t: ``i -* q_f`` or its division form, as used in t."""
    ante, _ = imp_parts(t_f)
    if wand_parts(ante) != (i_f, qf):
        raise ValueError("t must have the shape (i -* q_f) -> q_f")
    return ante


def _conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, Binary) and f.kind == "and":
        return _conjuncts(f.left) + _conjuncts(f.right)
    return [f]


def _and_left_chain(s_i: Sequent, i_f: Formula, top: Proof) -> Proof:
    """andL steps from ``Gamma, i`` up to ``Gamma, (I1; ...; In)`` ending in ``top``."""
    # sequents from bottom: unfold the left fold one conjunction at a time
    seqs = [s_i]
    cur = bunch_canonical(s_i.antecedent)
    pending = [i_f]
    foci = []
    while pending:
        g = pending.pop()
        if not (isinstance(g, Binary) and g.kind == "and"):
            continue
        fo = locate(cur, Leaf(g))
        foci.append(fo)
        cur = plug(cur, fo, Semi(Leaf(g.left), Leaf(g.right)))
        seqs.append(Sequent(cur, s_i.succedent))
        pending.extend([g.right, g.left])
    p = top
    for k in range(len(foci) - 1, -1, -1):
        p = derive("andL", seqs[k], [p], focus=foci[k])
    return p


# ---------------------------------------------------------------- gap demonstrations

@dataclass
class SequentGraph:
    """Occurrence graph of a sequent: node 0 is the succedent root (the source)."""
    labels: list
    polarity: list  # +1 / -1
    weight: list
    edges: list  # (parent, child)

    def children(self) -> dict:
        out: dict = {i: [] for i in range(len(self.labels))}
        for a, b in self.edges:
            out[a].append(b)
        return out

    def longest(self) -> int:
        kids = self.children()
        best: dict = {}
        order = []
        stack = [0]
        while stack:
            n = stack.pop()
            order.append(n)
            stack.extend(kids[n])
        for n in reversed(order):
            best[n] = self.weight[n] + max((best[c] for c in kids[n]), default=0)
        return best[0]


def sequent_graph(s: Sequent) -> SequentGraph:
    g = SequentGraph([], [], [], [])

    def add(label, pol, w, parent):
        g.labels.append(label)
        g.polarity.append(pol)
        g.weight.append(w)
        k = len(g.labels) - 1
        if parent is not None:
            g.edges.append((parent, k))
        return k

    def formula(f: Formula, pol: int, parent):
        if isinstance(f, Atom):
            return add(f.name, pol, 0, parent)
        if isinstance(f, Const):
            return add(f.kind, pol, 0, parent)
        if isinstance(f, Neg):
            k = add("~", pol, 0, parent)
            formula(f.child, -pol, k)
            return k
        wp = wand_parts(f)
        if wp is not None:
            k = add(f.kind, pol, 1 if pol > 0 else 0, parent)
            formula(wp[0], -pol, k)
            formula(wp[1], pol, k)
            return k
        if f.kind == "himp":
            k = add("->", pol, 0, parent)
            formula(f.left, -pol, k)
            formula(f.right, pol, k)
            return k
        k = add(f.kind, pol, 1 if (f.kind == "star" and pol < 0) else 0, parent)
        formula(f.left, pol, k)
        formula(f.right, pol, k)
        return k

    def bunch(b: Bunch, parent):
        if isinstance(b, Leaf):
            return formula(b.formula, -1, parent)
        if isinstance(b, Comma):
            k = add(",", -1, 1, parent)
        elif isinstance(b, Semi):
            k = add(";", -1, 0, parent)
        else:
            return add(str(b), -1, 0, parent)
        for c in b.children:
            bunch(c, k)
        return k

    root = formula(s.succedent, +1, None)
    bunch(bunch_canonical(s.antecedent), root)
    return g


def multiplicative_length(s: Sequent) -> int:
    """Max over source paths of negative stars/commas plus positive wands."""
    return sequent_graph(s).longest()


def count_multiplicatives(s: Sequent) -> int:
    """Occurrences of star, wand and the divisions in the sequent's formulas."""
    from .syntax import bunch_formulas
    fs = list(bunch_formulas(s.antecedent)) + [s.succedent]
    return sum(1 for f in fs for g in f.walk()
               if isinstance(g, Binary) and g.kind in ("star", "wand", "ldiv", "rdiv"))


def comma_growth_formulas():
    """x = s -* unit and A = a -* ((x -* q) -> c), with the goal atom q."""
    s, a, q, c = (Atom(n) for n in "saqc")
    x = Binary("wand", s, UNIT)
    A = Binary("wand", a, Binary("himp", Binary("wand", x, q), c))
    return x, A, q


def comma_growth_derivation(n: int) -> list[Proof]:
    """Backward deduction from ``A => q`` that piles up commas.

    Returns the spine of the derivation from the root up; ``steps[0]`` is
    the whole partial proof and ``steps[-1]`` is the open top sequent.
    Side premises that are not of interest stay as open leaves.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    x, A, q = comma_growth_formulas()
    xq = Binary("wand", x, q)
    imp = Binary("himp", xq, Atom("c"))
    s_atom, a_atom = x.left, A.left

    def opened(seq):
        return derive(OPEN, seq)

    # build top-down as a list of (rule, conclusion, params, side premises, index of main premise)
    plan = []
    E: Bunch = Leaf(A)
    for _ in range(2 * n):
        cur = Sequent(E, q)
        plan.append(("c", cur, dict(focus=ROOT), [], 0))
        first, second = E, E
        # peel the x's off the first copy
        while isinstance(first, Comma):
            inner = first.children[1]
            s_here = Sequent(Semi(first, second), q)
            canon = bunch_canonical(s_here.antecedent)
            copy_focus = locate(canon, first)
            x_focus = Focus(copy_focus.path + (items(bunch_canonical(first), Comma).index(Leaf(x)),)) \
                if copy_focus.pick is None else None
            if x_focus is None:
                raise AssertionError("unexpected canonical layout")
            plan.append(("wandL", s_here, dict(focus=x_focus, active=0),
                         [Sequent(MULT_UNIT, s_atom)], 1))
            s_one = Sequent(Semi(Comma(Leaf(UNIT), inner), second), q)
            plan.append(("unitL", s_one, dict(focus=_at(s_one, UNIT)), [], 0))
            first = inner
        s_a = Sequent(Semi(first, second), q)
        plan.append(("wandL", s_a, dict(focus=_at(s_a, A), active=0), [Sequent(MULT_UNIT, a_atom)], 1))
        s_imp = Sequent(Semi(Leaf(imp), second), q)
        _, act = _index_in(Semi, [Leaf(imp), bunch_canonical(second)], Leaf(imp))
        plan.append(("impL", s_imp, dict(focus=ROOT, active=act), [Sequent(Leaf(Atom("c")), q)], 0))
        plan.append(("wandR", Sequent(second, xq), {}, [], 0))
        E = Comma(Leaf(x), second)
    top = opened(Sequent(E, q))
    spine = [top]
    node = top
    for rule, concl, params, sides, main_at in reversed(plan):
        prems = [opened(sq) for sq in sides]
        prems.insert(main_at, node)
        node = derive(rule, concl, prems, **params)
        spine.append(node)
    spine.reverse()
    return spine
