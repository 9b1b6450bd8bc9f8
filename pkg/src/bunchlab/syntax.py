"""Formulas, bunches and sequents.

Surface syntax (ASCII)::

    ~  negation          \\  /  -*   divisions and magic wand
    *  fusion            &      conjunction
    |  disjunction       ->     implication
    top bot unit         constants
    e* e+                multiplicative / additive empty bunch

Binding strength, tightest first: ``~``, then ``\\ / -*``, then ``*``,
then ``&``, then ``|``, then ``->``.  ``&``, ``|`` and ``*`` associate to
the left; a chain of divisions or of ``->`` without explicit parentheses
is rejected as ambiguous.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

COMMUTATIVE = "commutative"
NONCOMMUTATIVE = "noncommutative"
MODES = (COMMUTATIVE, NONCOMMUTATIVE)

CONSTS = ("top", "bot", "unit")
BINARY_KINDS = ("and", "or", "himp", "star", "wand", "ldiv", "rdiv")

_TOKEN_OF = {
    "and": "&", "or": "|", "himp": "->", "star": "*",
    "wand": "-*", "ldiv": "\\", "rdiv": "/",
}
_KIND_OF = {v: k for k, v in _TOKEN_OF.items()}

# precedence levels, larger binds tighter
_LEVEL = {"himp": 1, "or": 2, "and": 3, "star": 4, "wand": 5, "ldiv": 5, "rdiv": 5}
_LEFT_ASSOC = {"and", "or", "star"}
_NEG_LEVEL = 6


class SyntaxError_(ValueError):
    """Raised on malformed input; carries a column when one is known."""

    def __init__(self, msg: str, pos: int | None = None):
        self.pos = pos
        if pos is not None:
            msg = f"{msg} (column {pos + 1})"
        super().__init__(msg)


ParseError = SyntaxError_


# ---------------------------------------------------------------- formulas

class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)

    def atoms(self) -> set[str]:
        return set(_atoms(self))

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def walk(self) -> Iterator["Formula"]:
        stack = [self]
        while stack:
            f = stack.pop()
            yield f
            if isinstance(f, Neg):
                stack.append(f.child)
            elif isinstance(f, Binary):
                stack.append(f.right)
                stack.append(f.left)


def _cache_hash(obj, parts):
    object.__setattr__(obj, "_h", hash(parts))


@dataclass(frozen=True, eq=False)
class Atom(Formula):
    name: str

    def __post_init__(self):
        _cache_hash(self, ("atom", self.name))

    def __eq__(self, other):
        return isinstance(other, Atom) and other.name == self.name

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Atom({self.name!r})"


@dataclass(frozen=True, eq=False)
class Const(Formula):
    kind: str

    def __post_init__(self):
        if self.kind not in CONSTS:
            raise ValueError(f"unknown constant {self.kind!r}")
        _cache_hash(self, ("const", self.kind))

    def __eq__(self, other):
        return isinstance(other, Const) and other.kind == self.kind

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Const({self.kind!r})"


@dataclass(frozen=True, eq=False)
class Neg(Formula):
    child: Formula

    def __post_init__(self):
        _cache_hash(self, ("neg", self.child))

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Neg) and other._h == self._h and other.child == self.child

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Neg({self.child!r})"


@dataclass(frozen=True, eq=False)
class Binary(Formula):
    kind: str
    left: Formula
    right: Formula

    def __post_init__(self):
        if self.kind not in BINARY_KINDS:
            raise ValueError(f"unknown connective {self.kind!r}")
        _cache_hash(self, (self.kind, self.left, self.right))

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Binary) and other._h == self._h and other.kind == self.kind
                and other.left == self.left and other.right == self.right)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Binary({self.kind!r}, {self.left!r}, {self.right!r})"


TOP, BOT, UNIT = Const("top"), Const("bot"), Const("unit")


def And(a, b): return Binary("and", a, b)
def Or(a, b): return Binary("or", a, b)
def Imp(a, b): return Binary("himp", a, b)
def Star(a, b): return Binary("star", a, b)
def Wand(a, b): return Binary("wand", a, b)
def Ldiv(a, b): return Binary("ldiv", a, b)
def Rdiv(a, b): return Binary("rdiv", a, b)


def big(kind: str, parts: Iterable[Formula]) -> Formula:
    """Left-fold a non-empty sequence with a binary connective."""
    parts = list(parts)
    if not parts:
        raise ValueError("empty fold")
    acc = parts[0]
    for p in parts[1:]:
        acc = Binary(kind, acc, p)
    return acc


def wand_parts(f: Formula) -> tuple[Formula, Formula] | None:
    """(antecedent, consequent) if f is a wand or a division read commutatively."""
    if isinstance(f, Binary):
        if f.kind in ("wand", "ldiv"):
            return f.left, f.right
        if f.kind == "rdiv":
            return f.right, f.left
    return None


def imp_parts(f: Formula) -> tuple[Formula, Formula] | None:
    """(antecedent, consequent) of an additive implication; ~a counts as a -> bot."""
    if isinstance(f, Binary) and f.kind == "himp":
        return f.left, f.right
    if isinstance(f, Neg):
        return f.child, BOT
    return None


def _atoms(f: Formula) -> Iterator[str]:
    for g in f.walk():
        if isinstance(g, Atom):
            yield g.name


def substitute(f: Formula, name: str, g: Formula) -> Formula:
    if isinstance(f, Atom):
        return g if f.name == name else f
    if isinstance(f, Neg):
        return Neg(substitute(f.child, name, g))
    if isinstance(f, Binary):
        return Binary(f.kind, substitute(f.left, name, g), substitute(f.right, name, g))
    return f


def formula_key(f: Formula) -> tuple:
    """A total order on formulas (used to sort bunch children)."""
    if isinstance(f, Atom):
        return (0, f.name)
    if isinstance(f, Const):
        return (1, f.kind)
    if isinstance(f, Neg):
        return (2, formula_key(f.child))
    return (3, f.kind, formula_key(f.left), formula_key(f.right))


# ---------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<arrow>=>)|(?P<op>->|-\*|e\*(?![A-Za-z0-9_(~])|e\+|[~&|*\\/(),;])|(?P<id>[A-Za-z_][A-Za-z0-9_']*))"
)
_ATOM_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


def tokenize(text: str) -> list[tuple[str, int]]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        tok = m.group(m.lastgroup)
        if m.lastgroup == "id" and tok not in CONSTS and not _ATOM_RE.match(tok):
            raise ParseError(f"bad identifier {tok!r}", start)
        toks.append((tok, start))
        pos = m.end()
    return toks


# ---------------------------------------------------------------- formula parser

class _Parser:
    def __init__(self, text: str, mode: str):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.text = text
        self.mode = mode
        self.toks = tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def pos(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.pos())
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, found {tok!r}", self.pos())
        self.i += 1
        return tok

    def done(self):
        if self.peek() is not None:
            raise ParseError(f"unexpected token {self.peek()!r}", self.pos())

    # precedence climbing with the chaining restrictions
    def formula(self, min_level: int = 1) -> Formula:
        left = self.unary()
        last_kind = None
        while True:
            tok = self.peek()
            kind = _KIND_OF.get(tok)
            if kind is None or _LEVEL[kind] < min_level:
                return left
            level = _LEVEL[kind]
            if kind == "wand" and self.mode == NONCOMMUTATIVE:
                raise ParseError("'-*' is not available in noncommutative mode", self.pos())
            if last_kind is not None and _LEVEL[last_kind] == level and not (
                    kind in _LEFT_ASSOC and kind == last_kind):
                raise ParseError(f"chained {tok!r} needs explicit parentheses", self.pos())
            self.take()
            right = self.formula(level + 1)
            left = Binary(kind, left, right)
            last_kind = kind

    def unary(self) -> Formula:
        tok = self.peek()
        if tok == "~":
            self.take()
            return Neg(self.unary())
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok is None:
            raise ParseError("unexpected end of input", self.pos())
        if tok in CONSTS:
            self.take()
            return Const(tok)
        if _ATOM_RE.match(tok):
            self.take()
            return Atom(tok)
        raise ParseError(f"unexpected token {tok!r}", self.pos())

    # bunches: a parenthesised group is a bunch node iff it has a top-level , or ;
    def group_separator(self) -> str | None:
        depth = 0
        for tok, _ in self.toks[self.i:]:
            if tok == "(":
                depth += 1
            elif tok == ")":
                depth -= 1
                if depth == 0:
                    return None
            elif depth == 1 and tok in (",", ";"):
                return tok
        return None

    def bunch(self) -> "Bunch":
        tok = self.peek()
        if tok == "e*":
            self.take()
            return MULT_UNIT
        if tok == "e+":
            self.take()
            return ADD_UNIT
        if tok == "(":
            sep = self.group_separator()
            if sep is not None:
                self.take("(")
                kids = self.bunch_list(sep)
                self.take(")")
                return (Comma if sep == "," else Semi)(tuple(kids))
        return Leaf(self.formula())

    def bunch_list(self, sep: str) -> list:
        kids = [self.bunch()]
        while self.peek() in (",", ";"):
            if self.peek() != sep:
                raise ParseError("mixed ',' and ';' need parentheses", self.pos())
            self.take()
            kids.append(self.bunch())
        return kids

    def top_bunch(self) -> "Bunch":
        kids = [self.bunch()]
        if self.peek() in (",", ";"):
            sep = self.peek()
            while self.peek() in (",", ";"):
                if self.peek() != sep:
                    raise ParseError("mixed ',' and ';' need parentheses", self.pos())
                self.take()
                kids.append(self.bunch())
            return (Comma if sep == "," else Semi)(tuple(kids))
        return kids[0]


def parse_formula(text: str, mode: str = COMMUTATIVE) -> Formula:
    if not text or not text.strip():
        raise ParseError("empty formula")
    p = _Parser(text, mode)
    f = p.formula()
    p.done()
    return f


def print_formula(f: Formula) -> str:
    return _pf(f)


def _pf(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Const):
        return f.kind
    if isinstance(f, Neg):
        c = f.child
        s = _pf(c)
        return "~" + (f"({s})" if isinstance(c, Binary) else s)
    level = _LEVEL[f.kind]
    ls, rs = _pf(f.left), _pf(f.right)
    if isinstance(f.left, Binary):
        ll = _LEVEL[f.left.kind]
        # a left child of the same level survives only for the same left-assoc operator
        if ll < level or (ll == level and not (f.kind in _LEFT_ASSOC and f.left.kind == f.kind)):
            ls = f"({ls})"
    if isinstance(f.right, Binary) and _LEVEL[f.right.kind] <= level:
        rs = f"({rs})"
    return f"{ls} {_TOKEN_OF[f.kind]} {rs}"


# ---------------------------------------------------------------- bunches

class Bunch:
    __slots__ = ()

    def __str__(self) -> str:
        return print_bunch(self)


@dataclass(frozen=True)
class Leaf(Bunch):
    formula: Formula

    def __repr__(self):
        return f"Leaf({print_formula(self.formula)})"


@dataclass(frozen=True)
class _Unit(Bunch):
    kind: str  # "mult" | "add"

    def __repr__(self):
        return "MultUnit" if self.kind == "mult" else "AddUnit"


MULT_UNIT = _Unit("mult")
ADD_UNIT = _Unit("add")
MultUnit, AddUnit = MULT_UNIT, ADD_UNIT


@dataclass(frozen=True)
class Comma(Bunch):
    children: tuple

    def __init__(self, *children):
        if len(children) == 1 and isinstance(children[0], (tuple, list)):
            children = tuple(children[0])
        children = tuple(_as_bunch(c) for c in children)
        if len(children) < 2:
            raise ValueError("a comma node needs at least two children")
        object.__setattr__(self, "children", children)

    def __repr__(self):
        return "Comma(" + ", ".join(map(repr, self.children)) + ")"


@dataclass(frozen=True)
class Semi(Bunch):
    children: tuple

    def __init__(self, *children):
        if len(children) == 1 and isinstance(children[0], (tuple, list)):
            children = tuple(children[0])
        children = tuple(_as_bunch(c) for c in children)
        if len(children) < 2:
            raise ValueError("a semicolon node needs at least two children")
        object.__setattr__(self, "children", children)

    def __repr__(self):
        return "Semi(" + "; ".join(map(repr, self.children)) + ")"


def _as_bunch(x) -> Bunch:
    if isinstance(x, Bunch):
        return x
    if isinstance(x, Formula):
        return Leaf(x)
    if isinstance(x, str):
        return Leaf(parse_formula(x))
    raise TypeError(f"not a bunch: {x!r}")


BunchNode = Union[Comma, Semi]


def unit_of(node_type) -> Bunch:
    return MULT_UNIT if node_type is Comma else ADD_UNIT


def bunch_key(b: Bunch) -> tuple:
    if isinstance(b, Leaf):
        return (0, formula_key(b.formula))
    if b == MULT_UNIT:
        return (1,)
    if b == ADD_UNIT:
        return (2,)
    tag = 3 if isinstance(b, Comma) else 4
    return (tag, tuple(bunch_key(c) for c in b.children))


def make_node(node_type, children: Iterable[Bunch]) -> Bunch:
    """Build a canonical node of the given type from canonical children."""
    unit = unit_of(node_type)
    flat = []
    for c in children:
        if type(c) is node_type:
            flat.extend(c.children)
        elif c != unit:
            flat.append(c)
    if not flat:
        return unit
    if len(flat) == 1:
        return flat[0]
    flat.sort(key=bunch_key)
    return node_type(tuple(flat))


def bunch_canonical(b: Bunch) -> Bunch:
    if isinstance(b, (Comma, Semi)):
        return make_node(type(b), (bunch_canonical(c) for c in b.children))
    return b


def bunch_equiv(a: Bunch, b: Bunch) -> bool:
    return bunch_canonical(a) == bunch_canonical(b)


def bunch_to_formula(b: Bunch) -> Formula:
    if isinstance(b, Leaf):
        return b.formula
    if b == MULT_UNIT:
        return UNIT
    if b == ADD_UNIT:
        return TOP
    kind = "star" if isinstance(b, Comma) else "and"
    parts = [bunch_to_formula(c) for c in b.children]
    # n-ary nodes read as right-nested, matching how binary input is written
    acc = parts[-1]
    for p in reversed(parts[:-1]):
        acc = Binary(kind, p, acc)
    return acc


def bunch_depth(b: Bunch) -> int:
    """Comma depth; an n-ary comma counts as its right-nested binary reading."""
    if isinstance(b, Semi):
        return max(bunch_depth(c) for c in b.children)
    if isinstance(b, Comma):
        k = len(b.children)
        return max(bunch_depth(c) + min(i + 1, k - 1) for i, c in enumerate(b.children))
    return 0


def bunch_formulas(b: Bunch) -> Iterator[Formula]:
    if isinstance(b, Leaf):
        yield b.formula
    elif isinstance(b, (Comma, Semi)):
        for c in b.children:
            yield from bunch_formulas(c)


def bunch_substitute(b: Bunch, name: str, g: Formula) -> Bunch:
    if isinstance(b, Leaf):
        return Leaf(substitute(b.formula, name, g))
    if isinstance(b, (Comma, Semi)):
        return type(b)(tuple(bunch_substitute(c, name, g) for c in b.children))
    return b


def print_bunch(b: Bunch, top: bool = True) -> str:
    if isinstance(b, Leaf):
        return print_formula(b.formula)
    if b == MULT_UNIT:
        return "e*"
    if b == ADD_UNIT:
        return "e+"
    sep = ", " if isinstance(b, Comma) else "; "
    inner = sep.join(print_bunch(c, False) for c in b.children)
    return inner if top else f"({inner})"


def parse_bunch(text: str, mode: str = COMMUTATIVE) -> Bunch:
    p = _Parser(text, mode)
    b = p.top_bunch()
    p.done()
    return b


# ---------------------------------------------------------------- sequents

@dataclass(frozen=True)
class Sequent:
    antecedent: Bunch
    succedent: Formula

    def __str__(self):
        return print_sequent(self)

    def canonical(self) -> "Sequent":
        return Sequent(bunch_canonical(self.antecedent), self.succedent)


def print_sequent(s: Sequent) -> str:
    return f"{print_bunch(s.antecedent)} => {print_formula(s.succedent)}"


def parse_sequent(text: str, mode: str = COMMUTATIVE) -> Sequent:
    if "=>" not in text:
        raise ParseError("a sequent needs '=>'")
    p = _Parser(text, mode)
    if p.peek() == "=>":
        raise ParseError("empty antecedent; write e* or e+", p.pos())
    b = p.top_bunch()
    p.take("=>")
    f = p.formula()
    p.done()
    return Sequent(b, f)
