"""Finite disjointive associative frames: semantics, complex algebras, countermodels,
and the truncated tiling model with its grid-extraction procedure."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import tiling as T
from .syntax import COMMUTATIVE, Atom, Binary, Formula, Neg, ParseError

COMPLEMENT = "complement"


def _mask(states: Iterable[int]) -> int:
    m = 0
    for s in states:
        m |= 1 << s
    return m


def _members(mask: int) -> frozenset:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


class Frame:
    """A carrier 0..n-1 with a set-valued composition and a negation table.

    ``comp`` is either a mapping (i, j) -> states (omitted pairs compose to the empty
    set) or an (n, n) integer array of single images with -1 for the empty set.
    ``neg`` is a mapping from sets to sets (omitted sets go to the empty set) or the
    string ``"complement"``.
    """

    def __init__(self, n: int, comp, neg=None):
        if n < 1:
            raise ValueError("a frame needs at least one state")
        self.n = n
        self.func: np.ndarray | None = None
        self._rel: np.ndarray | None = None
        if isinstance(comp, np.ndarray):
            if comp.shape != (n, n) or comp.min() < -1 or comp.max() >= n:
                raise ValueError("functional composition table has the wrong shape")
            self.func = comp.astype(np.int64)
            self._table = None
        else:
            table = {}
            for (i, j), image in dict(comp).items():
                image = frozenset(image)
                if not (0 <= i < n and 0 <= j < n and all(0 <= k < n for k in image)):
                    raise ValueError(f"composition entry ({i}, {j}) out of range")
                if image:
                    table[(i, j)] = image
            self._table = table
        if neg is None:
            neg = {}
        if neg != COMPLEMENT:
            neg = {frozenset(k): frozenset(v) for k, v in dict(neg).items() if v}
            for k, v in neg.items():
                if not all(0 <= s < n for s in k | v):
                    raise ValueError("negation entry out of range")
        self.neg = neg

    def comp(self, i: int, j: int) -> frozenset:
        if self.func is not None:
            k = int(self.func[i, j])
            return frozenset() if k < 0 else frozenset((k,))
        return self._table.get((i, j), frozenset())

    @property
    def rel(self) -> np.ndarray:
        """Boolean array r[i, j, k] = k in i o j."""
        if self._rel is None:
            r = np.zeros((self.n, self.n, self.n), dtype=bool)
            if self.func is not None:
                i, j = np.nonzero(self.func >= 0)
                r[i, j, self.func[i, j]] = True
            else:
                for (i, j), image in self._table.items():
                    r[i, j, list(image)] = True
            self._rel = r
        return self._rel

    def comp_entries(self) -> Iterator[tuple[int, int, frozenset]]:
        for i in range(self.n):
            for j in range(self.n):
                image = self.comp(i, j)
                if image:
                    yield i, j, image

    def negate(self, states: frozenset) -> frozenset:
        if self.neg == COMPLEMENT:
            return frozenset(range(self.n)) - states
        return self.neg.get(frozenset(states), frozenset())

    def __eq__(self, other):
        return (isinstance(other, Frame) and self.n == other.n and self.neg == other.neg
                and list(self.comp_entries()) == list(other.comp_entries()))

    def __repr__(self):
        return f"Frame(n={self.n})"


@dataclass
class Model:
    frame: Frame
    valuation: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.valuation = {k: frozenset(v) for k, v in self.valuation.items()}
        for k, v in self.valuation.items():
            if not all(0 <= s < self.frame.n for s in v):
                raise ValueError(f"valuation of {k} leaves the carrier")


# ---------------------------------------------------------------- validation

@dataclass(frozen=True)
class FrameViolation:
    kind: str  # "associativity" | "disjointivity"
    where: tuple

    def __str__(self):
        return f"{self.kind} at {self.where}"


def _lift_rows(f: Frame) -> np.ndarray:
    """(x o y) o z as a boolean array indexed [x, y, z, k]."""
    r = f.rel.astype(np.int32)
    return np.einsum("xyu,uzk->xyzk", r, r) > 0


def _lift_cols(f: Frame) -> np.ndarray:
    r = f.rel.astype(np.int32)
    return np.einsum("yzv,xvk->xyzk", r, r) > 0


def validate_frame(f: Frame, limit: int = 50) -> list[FrameViolation]:
    """Every violating triple and negation entry, up to ``limit`` of them."""
    out: list[FrameViolation] = []
    if f.func is not None:
        g = f.func
        n = f.n
        xy = g[:, :, None]  # x o y
        left = np.where(xy >= 0, g[np.maximum(xy, 0), np.arange(n)[None, None, :]], -1)
        yz = g[None, :, :]
        right = np.where(yz >= 0, g[np.arange(n)[:, None, None], np.maximum(yz, 0)], -1)
        bad = np.argwhere(left != right)
    else:
        bad = np.argwhere((_lift_rows(f) != _lift_cols(f)).any(axis=3))
    for x, y, z in bad[:limit]:
        out.append(FrameViolation("associativity", (int(x), int(y), int(z))))
    if f.neg != COMPLEMENT:
        for k, v in sorted(f.neg.items(), key=lambda kv: _mask(kv[0])):
            if k & v and len(out) < limit:
                out.append(FrameViolation("disjointivity", (tuple(sorted(k)), tuple(sorted(k & v)))))
    return out


# ---------------------------------------------------------------- satisfaction

class UnsupportedFormula(ValueError):
    pass


class Evaluator:
    """Satisfaction sets as boolean vectors, memoised per subformula."""

    def __init__(self, model: Model, mode: str = COMMUTATIVE):
        self.model = model
        self.frame = model.frame
        self.mode = mode
        self.cache: dict = {}
        self._neg_lookup = None

    def sat(self, f: Formula) -> np.ndarray:
        got = self.cache.get(f)
        if got is None:
            got = self._sat(f)
            got.setflags(write=False)
            self.cache[f] = got
        return got

    def states(self, f: Formula) -> frozenset:
        return frozenset(int(i) for i in np.flatnonzero(self.sat(f)))

    def holds(self, f: Formula, s: int) -> bool:
        return bool(self.sat(f)[s])

    def _sat(self, f: Formula) -> np.ndarray:
        n = self.frame.n
        if isinstance(f, Atom):
            if f.name not in self.model.valuation:
                raise UnsupportedFormula(f"no valuation for atom {f.name!r}")
            v = np.zeros(n, dtype=bool)
            v[list(self.model.valuation[f.name])] = True
            return v
        if isinstance(f, Neg):
            return self._negate(self.sat(f.child))
        if isinstance(f, Binary):
            if f.kind == "and":
                return self.sat(f.left) & self.sat(f.right)
            if f.kind == "or":
                return self.sat(f.left) | self.sat(f.right)
            if f.kind == "ldiv" or (f.kind == "wand" and self.mode == COMMUTATIVE):
                return self.ldiv(self.sat(f.left), self.sat(f.right))
            if f.kind == "rdiv":
                return self.rdiv(self.sat(f.left), self.sat(f.right))
        raise UnsupportedFormula(f"{f} is outside the evaluated fragment")

    def _bad(self, target: np.ndarray) -> np.ndarray:
        """bad[i, j]: some element of i o j lies outside ``target``."""
        fr = self.frame
        if fr.func is not None:
            g = fr.func
            return (g >= 0) & ~target[np.maximum(g, 0)]
        return (fr.rel & ~target[None, None, :]).any(axis=2)

    def ldiv(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """{s | a o s is inside b}"""
        return ~self._bad(b)[a, :].any(axis=0)

    def rdiv(self, b: np.ndarray, a: np.ndarray) -> np.ndarray:
        """{s | s o a is inside b}"""
        return ~self._bad(b)[:, a].any(axis=1)

    def _negate(self, v: np.ndarray) -> np.ndarray:
        fr = self.frame
        if fr.neg == COMPLEMENT:
            return ~v
        out = np.zeros(fr.n, dtype=bool)
        image = fr.neg.get(frozenset(int(i) for i in np.flatnonzero(v)))
        if image:
            out[list(image)] = True
        return out


def evaluate(model: Model, f: Formula, mode: str = COMMUTATIVE) -> frozenset:
    """The satisfaction set of ``f``."""
    return Evaluator(model, mode).states(f)


def refuting_states(model: Model, f: Formula, mode: str = COMMUTATIVE) -> frozenset:
    return frozenset(range(model.frame.n)) - evaluate(model, f, mode)


# ---------------------------------------------------------------- complex algebras

@dataclass
class FiniteAlgebra:
    """The powerset of a frame with lifted operations; subsets are bitmasks."""
    n: int
    prod: list  # prod[X][Y]
    ldiv: list  # ldiv[X][Z] = X \ Z
    rdiv: list  # rdiv[Z][Y] = Z / Y
    neg: list

    @property
    def size(self) -> int:
        return 1 << self.n


MAX_ALGEBRA_STATES = 5


def complex_algebra(f: Frame) -> FiniteAlgebra:
    if f.n > MAX_ALGEBRA_STATES:
        raise ValueError(f"complex algebra limited to {MAX_ALGEBRA_STATES} states")
    n, size = f.n, 1 << f.n
    point = [[_mask(f.comp(i, j)) for j in range(n)] for i in range(n)]
    prod = [[0] * size for _ in range(size)]
    for X in range(size):
        xs = [i for i in range(n) if X >> i & 1]
        for Y in range(size):
            m = 0
            for i in xs:
                for j in range(n):
                    if Y >> j & 1:
                        m |= point[i][j]
            prod[X][Y] = m
    ldiv = [[_mask(s for s in range(n) if prod[X][1 << s] & ~Z == 0) for Z in range(size)]
            for X in range(size)]
    rdiv = [[_mask(s for s in range(n) if prod[1 << s][Y] & ~Z == 0) for Y in range(size)]
            for Z in range(size)]
    neg = [_mask(f.negate(_members(X))) for X in range(size)]
    return FiniteAlgebra(n, prod, ldiv, rdiv, neg)


@dataclass(frozen=True)
class AlgebraViolation:
    law: str
    args: tuple

    def __str__(self):
        return f"{self.law} fails at {self.args}"


def complex_algebra_check(f: Frame, limit: int = 20) -> list[AlgebraViolation]:
    """Exhaustive check of the lattice, semigroup, residuation and disjointive laws."""
    A = complex_algebra(f)
    size, top = A.size, A.size - 1
    out: list[AlgebraViolation] = []

    def fail(law, *args):
        if len(out) < limit:
            out.append(AlgebraViolation(law, args))

    for X in range(size):
        if X & A.neg[X]:
            fail("disjointive", X)
        if (X | 0) != X or (X & top) != X:
            fail("bounds", X)
    for X, Y, Z in product(range(size), repeat=3):
        if X & (Y | Z) != (X & Y) | (X & Z):
            fail("meet-distributivity", X, Y, Z)
        if X | (Y & Z) != (X | Y) & (X | Z):
            fail("join-distributivity", X, Y, Z)
        if A.prod[A.prod[X][Y]][Z] != A.prod[X][A.prod[Y][Z]]:
            fail("semigroup", X, Y, Z)
        fused = A.prod[X][Y] & ~Z == 0
        if fused != (Y & ~A.ldiv[X][Z] == 0):
            fail("left-residuation", X, Y, Z)
        if fused != (X & ~A.rdiv[Z][Y] == 0):
            fail("right-residuation", X, Y, Z)
    for X, Y in product(range(size), repeat=2):
        if X & (X | Y) != X or X | (X & Y) != X:
            fail("absorption", X, Y)
    return out


# ---------------------------------------------------------------- enumeration

def _assoc_ok(n: int, e: list, k_max: int) -> bool:
    """Check associativity on the triples whose entries are all assigned (index >= k_max)."""
    def get(i, j):
        k = i * n + j
        return e[k] if k >= k_max else None

    def lift(left, z, on_left):
        m = 0
        for u in range(n):
            if left >> u & 1:
                v = get(u, z) if on_left else get(z, u)
                if v is None:
                    return None
                m |= v
        return m

    for x, y, z in product(range(n), repeat=3):
        xy, yz = get(x, y), get(y, z)
        if xy is None or yz is None:
            continue
        a = lift(xy, z, True)
        if a is None:
            continue
        b = lift(yz, x, False)
        if b is not None and a != b:
            return False
    return True


def associative_tables(n: int, rng: random.Random | None = None) -> Iterator[tuple]:
    """Associative set-valued tables on n states as tuples of bitmasks, entry i*n + j.

    Without ``rng`` the order is numeric, reading the table as a base-2^n numeral
    whose least significant digit is entry (0, 0).  With ``rng`` each entry's values
    are tried in a random order.
    """
    cells = n * n
    e = [0] * cells
    values = list(range(1 << n))

    def go(k):
        if k < 0:
            yield tuple(e)
            return
        order = values if rng is None else rng.sample(values, len(values))
        for v in order:
            e[k] = v
            if _assoc_ok(n, e, k):
                yield from go(k - 1)
        e[k] = 0

    yield from go(cells - 1)


def frame_from_table(n: int, table: tuple, neg=None) -> Frame:
    comp = {(k // n, k % n): _members(v) for k, v in enumerate(table) if v}
    return Frame(n, comp, neg)


def random_frame(n: int, rng: random.Random) -> Frame:
    """A random associative frame with a random disjointive negation table."""
    table = next(associative_tables(n, rng))
    neg = {}
    full = (1 << n) - 1
    for X in range(1 << n):
        free = full & ~X
        image = rng.randrange(1 << n) & free
        if image:
            neg[_members(X)] = _members(image)
    return frame_from_table(n, table, neg)


def neg_tables(n: int) -> Iterator[dict]:
    """All disjointive negation tables, in numeric order with the empty set's image least significant."""
    size = 1 << n
    full = size - 1
    choices = [[v for v in range(size) if v & ~(full & ~X) == 0] for X in range(size)]
    for combo in product(*reversed(choices)):
        images = combo[::-1]
        yield {_members(X): _members(v) for X, v in enumerate(images) if v}


def _has_neg(f: Formula) -> bool:
    return any(isinstance(g, Neg) for g in f.walk())


def valuations(atoms: list[str], n: int) -> Iterator[dict]:
    """Assignments of subsets, first atom least significant, empty set first."""
    size = 1 << n
    for combo in product(range(size), repeat=len(atoms)):
        yield {a: _members(v) for a, v in zip(atoms, reversed(combo))}


@dataclass
class CountermodelResult:
    model: Model | None
    refuting: frozenset
    examined: int
    exhausted: bool = False  # ran out of the model budget


def countermodel_search(f: Formula, max_size: int, mode: str = COMMUTATIVE,
                        max_models: int = 5_000_000) -> CountermodelResult:
    """The first model, in enumeration order, whose satisfaction set for ``f`` is not everything."""
    if max_size < 1:
        raise ValueError("max size must be at least 1")
    atoms = sorted(f.atoms())
    examined = 0
    for n in range(1, max_size + 1):
        negs = list(neg_tables(n)) if _has_neg(f) else [{}]
        for table in associative_tables(n):
            for neg in negs:
                fr = frame_from_table(n, table, neg)
                for val in valuations(atoms, n):
                    examined += 1
                    if examined > max_models:
                        return CountermodelResult(None, frozenset(), examined - 1, True)
                    m = Model(fr, val)
                    bad = refuting_states(m, f, mode)
                    if bad:
                        return CountermodelResult(m, bad, examined)
    return CountermodelResult(None, frozenset(), examined)


# ---------------------------------------------------------------- file formats

_SET_RE = re.compile(r"\{([^}]*)\}")


def _ints(text: str, lineno: int) -> list[int]:
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ParseError(f"line {lineno}: expected state numbers") from None


def parse_model(text: str) -> Model:
    """Frame files hold ``states``, ``comp`` and ``neg`` lines; models add ``val`` lines."""
    n = None
    comp: dict = {}
    neg: dict = {}
    val: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "states":
            n = _ints(rest, lineno)
            if len(n) != 1:
                raise ParseError(f"line {lineno}: 'states n'")
            n = n[0]
        elif head in ("comp", "neg", "val"):
            if ":" not in rest:
                raise ParseError(f"line {lineno}: missing ':'")
            lhs, rhs = rest.split(":", 1)
            if head == "comp":
                ij = _ints(lhs, lineno)
                if len(ij) != 2:
                    raise ParseError(f"line {lineno}: 'comp i j : k ...'")
                comp[tuple(ij)] = _ints(rhs, lineno)
            elif head == "neg":
                lm, rm = _SET_RE.fullmatch(lhs.strip()), _SET_RE.fullmatch(rhs.strip())
                if not lm or not rm:
                    raise ParseError(f"line {lineno}: 'neg {{i,...}} : {{j,...}}'")
                neg[frozenset(_ints(lm.group(1), lineno))] = _ints(rm.group(1), lineno)
            else:
                name = lhs.strip()
                if not re.fullmatch(r"[a-z][a-z0-9_]*", name):
                    raise ParseError(f"line {lineno}: bad atom name {name!r}")
                val[name] = _ints(rhs, lineno)
        elif head == "neg-complement":
            neg = COMPLEMENT
        else:
            raise ParseError(f"line {lineno}: unknown directive {head!r}")
    if n is None:
        raise ParseError("missing 'states' line")
    try:
        return Model(Frame(n, comp, neg), val)
    except ValueError as e:
        raise ParseError(str(e)) from None


def parse_frame(text: str) -> Frame:
    return parse_model(text).frame


def format_model(m: Model) -> str:
    fr = m.frame
    lines = [f"states {fr.n}"]
    for i, j, image in fr.comp_entries():
        lines.append(f"comp {i} {j} : " + " ".join(map(str, sorted(image))))
    if fr.neg == COMPLEMENT:
        lines.append("neg-complement")
    else:
        for k, v in sorted(fr.neg.items(), key=lambda kv: _mask(kv[0])):
            lines.append("neg {%s} : {%s}" % (",".join(map(str, sorted(k))),
                                              ",".join(map(str, sorted(v)))))
    for a in sorted(m.valuation):
        lines.append(f"val {a} : " + " ".join(map(str, sorted(m.valuation[a]))))
    return "\n".join(lines) + "\n"


def format_frame(f: Frame) -> str:
    return format_model(Model(f))


# ---------------------------------------------------------------- the truncated tiling model

def even_odd(mask: int) -> tuple[int, int]:
    """(|X_e|, |X_o|) for the set with bitmask ``mask``; element i is bit i."""
    e = bin(mask & 0x5555555555555555).count("1")
    o = bin(mask & 0xAAAAAAAAAAAAAAAA).count("1")
    return e, o


def parity_letter(m: int, n: int) -> str:
    return ("e" if m % 2 == 0 else "o") + ("e" if n % 2 == 0 else "o")


def atom_truth(tau: T.PeriodicTiling, m: int, n: int) -> set[str]:
    """The atoms true at any set with m even and n odd elements."""
    t = tau(m, n)
    true = {parity_letter(m, n), f"u{t.up}", f"d{t.down}", f"l{t.left}", f"r{t.right}"}
    if (m, n) == (1, 0):
        true.add("xx")
    if (m, n) == (0, 1):
        true.add("yy")
    if (m, n) != (0, 0):
        true.add("cc")
    return true


def build_truncated_model(tau: T.PeriodicTiling, K: int) -> Model:
    """Sets over {0..2K-1} under union, with complement as negation."""
    if K < 1:
        raise ValueError("K must be at least 1")
    if K > 8:
        raise ValueError("K above 8 gives more than 65536 states")
    problems = T.adjacency_violations(tau.tiles, tau.table)
    if problems or tau.table.kind != "torus":
        raise ValueError(f"tiling is not valid on its period: {problems[:3]}")
    n = 1 << (2 * K)
    idx = np.arange(n)
    func = idx[:, None] | idx[None, :]
    val: dict = {a: set() for a in T.vocabulary(tau.tiles)}
    for s in range(n):
        for a in atom_truth(tau, *even_odd(s)):
            val[a].add(s)
    return Model(Frame(n, func, COMPLEMENT), val, meta={"tau": tau, "K": K})


# ---------------------------------------------------------------- abstract evaluation

EPS = "eps"


class AbstractModel:
    """Satisfaction in the truncated model read off the (|X_e|, |X_o|) abstraction.

    Union is commutative, so both divisions at X quantify over sets A with
    A u X in view: A shares ke <= m even and ko <= n odd elements with X and brings
    fe <= K - m and fo <= K - n fresh ones.  A then has abstraction
    (fe + ke, fo + ko) and the union has (m + fe, n + fo).
    """

    def __init__(self, tau: T.PeriodicTiling, K: int, mode: str = COMMUTATIVE):
        self.tau, self.K, self.mode = tau, K, mode
        self.cache: dict = {}

    def table(self, f: Formula) -> np.ndarray:
        got = self.cache.get(f)
        if got is None:
            got = self._table(f)
            self.cache[f] = got
        return got

    def _table(self, f: Formula) -> np.ndarray:
        K = self.K
        out = np.zeros((K + 1, K + 1), dtype=bool)
        if isinstance(f, Atom):
            for m in range(K + 1):
                for n in range(K + 1):
                    out[m, n] = f.name in atom_truth(self.tau, m, n)
            return out
        if isinstance(f, Neg):
            return ~self.table(f.child)
        if isinstance(f, Binary):
            if f.kind == "and":
                return self.table(f.left) & self.table(f.right)
            if f.kind == "or":
                return self.table(f.left) | self.table(f.right)
            if f.kind in ("ldiv", "rdiv") or (f.kind == "wand" and self.mode == COMMUTATIVE):
                a, b = (f.right, f.left) if f.kind == "rdiv" else (f.left, f.right)
                return self._div(self.table(a), self.table(b))
        raise UnsupportedFormula(f"{f} is outside the evaluated fragment")

    def _div(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        K = self.K
        out = np.ones((K + 1, K + 1), dtype=bool)
        pts = np.argwhere(a)
        for m in range(K + 1):
            for n in range(K + 1):
                for i, j in pts:
                    fe = slice(max(0, i - m), min(i, K - m) + 1)
                    fo = slice(max(0, j - n), min(j, K - n) + 1)
                    if not b[m + fe.start:m + fe.stop, n + fo.start:n + fo.stop].all():
                        out[m, n] = False
                        break
        return out

    def eval(self, f: Formula, state) -> bool:
        m, n = (0, 0) if state == EPS else state
        if not (0 <= m <= self.K and 0 <= n <= self.K):
            raise ValueError(f"abstract state {state} exceeds the bound K={self.K}")
        return bool(self.table(f)[m, n])


def eval_abstract(f: Formula, state, K: int, tau: T.PeriodicTiling) -> bool:
    return AbstractModel(tau, K).eval(f, state)


# ---------------------------------------------------------------- grid extraction

class ExtractionError(RuntimeError):
    code = "extraction"


class WitnessNotFound(ExtractionError):
    code = "witness-not-found"


class MultipleTiles(ExtractionError):
    code = "multiple-tiles"


@dataclass
class Extraction:
    points: dict  # (m, n) -> state
    xs: dict  # m -> witness for x'
    ys: dict  # n -> witness for y'
    tiles: dict  # (m, n) -> tile index
    parities: dict  # (m, n) -> parity letter
    G: int
    checked: int

    def assignment(self) -> T.TileAssignment:
        """Cell (m - 1, n) holds the tile at point <m, n>."""
        return T.TileAssignment("region", self.G, self.G,
                                {(m - 1, n): t for (m, n), t in self.tiles.items()})


class _Extractor:
    def __init__(self, model: Model, W: T.TileSet, budget: int):
        self.ev = Evaluator(model, COMMUTATIVE)
        self.W = W
        self.n = model.frame.n
        self.budget = budget
        self.checked = 0
        B = T._Builder("noncommutative")
        self.x1 = self.ev.sat(T.primed(B, T.X))
        self.y1 = self.ev.sat(T.primed(B, T.Y))
        self.compl = {p: self.ev.sat(T.complement(p)) for p in T.PARITIES}
        self.alpha = {p: self.ev.sat(T.alpha(W, p)) for p in T.PARITIES}
        self.letters = {p: self.ev.sat(T._PAR[p]) for p in T.PARITIES}
        self.literals = [self.ev.sat(T.tile_literal(W, t)) for t in W]
        self.frame = model.frame

    def _tick(self):
        self.checked += 1
        if self.checked > self.budget:
            raise WitnessNotFound(f"budget of {self.budget} candidate checks exhausted")

    def left_step(self, s: int, avoid: str) -> tuple[int, int]:
        """Lowest (x, u) with x |= x', u in x o s and u outside avoid^c."""
        for x in np.flatnonzero(self.x1):
            for u in sorted(self.frame.comp(int(x), s)):
                self._tick()
                if not self.compl[avoid][u]:
                    return int(x), u
        raise WitnessNotFound(f"no x' witness from state {s} towards {avoid}")

    def right_step(self, s: int, avoid: str) -> tuple[int, int]:
        for y in np.flatnonzero(self.y1):
            for u in sorted(self.frame.comp(s, int(y))):
                self._tick()
                if not self.compl[avoid][u]:
                    return int(y), u
        raise WitnessNotFound(f"no y' witness from state {s} towards {avoid}")

    def corner(self, first: frozenset, then, target: int, where) -> int:
        """Lowest v in ``first`` whose composition via ``then`` reaches ``target``."""
        for v in sorted(first):
            self._tick()
            if target in then(v):
                return v
        raise WitnessNotFound(f"no associativity witness for point {where}")


def extract_tiling(model: Model, G: int, s: int | None = None, W: T.TileSet | None = None,
                   budget: int = 10_000_000) -> Extraction:
    """Rebuild a G x G tiling from a model refuting the tiling formula at ``s``."""
    if G < 1:
        raise ValueError("grid size must be positive")
    if W is None:
        tau = model.meta.get("tau")
        if tau is None:
            raise ValueError("a tile set is needed for models without a tiling")
        W = tau.tiles
    ex = _Extractor(model, W, budget)
    fr = model.frame
    if s is None:
        hyp = ex.ev.sat(T.hypothesis(W, "noncommutative"))
        found = np.flatnonzero(hyp)
        if not len(found):
            raise WitnessNotFound("no state satisfies the hypothesis of the tiling formula")
        s = int(found[0])
    if not 0 <= s < fr.n:
        raise ValueError(f"state {s} outside the carrier")

    P: dict = {}
    xs: dict = {}
    ys: dict = {}
    xs[1], P[(1, 0)] = ex.left_step(s, "oe")
    # staircase: y-steps leave <k+1, k>, x-steps leave <k, k>
    m, n = 1, 0
    while (m, n) != (G, G - 1):
        par = parity_letter(m, n)
        if not ex.alpha[par][P[(m, n)]]:
            raise WitnessNotFound(f"point {(m, n)} does not satisfy its parity formula")
        if m > n:
            ys[n + 1], P[(m, n + 1)] = ex.right_step(P[(m, n)], parity_letter(m, n + 1))
            n += 1
        else:
            xs[m + 1], P[(m + 1, n)] = ex.left_step(P[(m, n)], parity_letter(m + 1, n))
            m += 1

    # above the staircase: <m, n+1> in <m, n> o y_{n+1}, <m+1, n+1> in x_{m+1} o <m, n+1>
    for d in range(1, G):
        for m in range(1, G - d):
            n = m + d
            P[(m, n)] = ex.corner(fr.comp(P[(m, n - 1)], ys[n]),
                                  lambda v, m=m: fr.comp(xs[m + 1], v), P[(m + 1, n)], (m, n))
    # below: <m+1, n> in x_{m+1} o <m, n>, <m+1, n+1> in <m+1, n> o y_{n+1}
    for e in range(2, G + 1):
        for n in range(0, G - e + 1):
            m = n + e
            P[(m, n)] = ex.corner(fr.comp(xs[m], P[(m - 1, n)]),
                                  lambda v, n=n: fr.comp(v, ys[n + 1]), P[(m, n + 1)], (m, n))

    tiles, parities = {}, {}
    for (m, n), st in sorted(P.items()):
        pars = [p for p in T.PARITIES if ex.letters[p][st]]
        if pars != [parity_letter(m, n)]:
            raise ExtractionError(f"point {(m, n)} has parity letters {pars}")
        if not ex.alpha[pars[0]][st]:
            raise ExtractionError(f"point {(m, n)} fails its parity formula")
        hits = [i for i, lit in enumerate(ex.literals) if lit[st]]
        if len(hits) != 1:
            if hits:
                raise MultipleTiles(f"point {(m, n)} satisfies tiles {hits}")
            raise ExtractionError(f"point {(m, n)} satisfies no tile literal")
        tiles[(m, n)] = hits[0]
        parities[(m, n)] = pars[0]
    return Extraction(P, xs, ys, tiles, parities, G, ex.checked)
