"""Wang tiles: region and torus solvers, and the tile-set-to-formula compiler."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, NamedTuple

from .syntax import (
    COMMUTATIVE, NONCOMMUTATIVE, Atom, Binary, Formula, Neg, ParseError, big,
)


class Tile(NamedTuple):
    up: int
    down: int
    left: int
    right: int

    def __str__(self):
        return f"{self.up} {self.down} {self.left} {self.right}"


@dataclass(frozen=True)
class TileSet:
    tiles: tuple
    k: int = 0

    def __post_init__(self):
        tiles = tuple(Tile(*t) for t in self.tiles)
        object.__setattr__(self, "tiles", tiles)
        top = max((max(t) for t in tiles), default=0)
        if any(min(t) < 1 for t in tiles):
            raise ValueError("colours are positive integers")
        if self.k == 0:
            object.__setattr__(self, "k", top)
        elif top > self.k:
            raise ValueError(f"colour {top} exceeds k={self.k}")

    def __len__(self):
        return len(self.tiles)

    def __iter__(self):
        return iter(self.tiles)

    def __getitem__(self, i) -> Tile:
        return self.tiles[i]


FIG2A = TileSet(((1, 3, 2, 2), (3, 1, 2, 2)))
FIG2B = TileSet(((1, 3, 2, 2), (1, 1, 3, 2)))


@dataclass
class TileAssignment:
    """Tile indices on a ``width x height`` rectangle or torus, keyed by (x, y)."""
    kind: str  # "region" | "torus"
    width: int
    height: int
    cells: dict = field(default_factory=dict)

    def __call__(self, x: int, y: int) -> int:
        if self.kind == "torus":
            return self.cells[(x % self.width, y % self.height)]
        return self.cells[(x, y)]

    def rows(self) -> list[list[int]]:
        """Rows from the top (largest y) down, as drawn."""
        return [[self.cells[(x, y)] for x in range(self.width)]
                for y in reversed(range(self.height))]

    def unfold(self, width: int, height: int) -> "TileAssignment":
        return TileAssignment("region", width, height,
                              {(x, y): self(x, y) for x in range(width) for y in range(height)})


def adjacency_violations(W: TileSet, a: TileAssignment) -> list[tuple]:
    """Mismatched neighbour pairs; torus assignments include the wrap-around edges."""
    bad = []
    if set(a.cells) != {(x, y) for x in range(a.width) for y in range(a.height)}:
        return [("shape", "assignment does not cover its shape")]
    wrap = a.kind == "torus"
    for (x, y), i in sorted(a.cells.items()):
        t = W[i]
        if x + 1 < a.width or wrap:
            j = a(x + 1, y)
            if t.right != W[j].left:
                bad.append(("h", (x, y), ((x + 1) % a.width, y)))
        if y + 1 < a.height or wrap:
            j = a(x, y + 1)
            if t.up != W[j].down:
                bad.append(("v", (x, y), (x, (y + 1) % a.height)))
    return bad


def is_valid(W: TileSet, a: TileAssignment) -> bool:
    return not adjacency_violations(W, a)


@dataclass
class SolveStats:
    nodes: int = 0


def _solve(W: TileSet, width: int, height: int, torus: bool, stats: SolveStats):
    """Depth-first fill, bottom row first and left to right; smallest tile index first."""
    cells: dict = {}
    order = [(x, y) for y in range(height) for x in range(width)]

    def fits(x, y, i):
        t = W[i]
        if x > 0 and W[cells[(x - 1, y)]].right != t.left:
            return False
        if y > 0 and W[cells[(x, y - 1)]].up != t.down:
            return False
        if torus:
            # on a side of length one the wrap-around neighbour is the tile itself
            if x == width - 1 and t.right != W[cells.get((0, y), i)].left:
                return False
            if y == height - 1 and t.up != W[cells.get((x, 0), i)].down:
                return False
        return True

    def go(k):
        if k == len(order):
            return True
        x, y = order[k]
        for i in range(len(W)):
            stats.nodes += 1
            if fits(x, y, i):
                cells[(x, y)] = i
                if go(k + 1):
                    return True
                del cells[(x, y)]
        return False

    if go(0):
        return TileAssignment("torus" if torus else "region", width, height, dict(cells))
    return None


def tiles_region(W: TileSet, width: int, height: int, stats: SolveStats | None = None):
    if width < 1 or height < 1:
        raise ValueError("region sides must be positive")
    return _solve(W, width, height, False, stats or SolveStats())


def period_order(max_period: int) -> list[tuple[int, int]]:
    """Candidate (p, q) torus sizes: by area, then by p."""
    return sorted(product(range(1, max_period + 1), repeat=2), key=lambda pq: (pq[0] * pq[1], pq))


def _torus_job(args):
    W, p, q = args
    stats = SolveStats()
    return _solve(W, p, q, True, stats), stats.nodes


def search_periodic(W: TileSet, max_period: int, stats: SolveStats | None = None,
                    workers: int = 1):
    """First (p, q, assignment) in ``period_order`` with a valid p x q torus tiling."""
    if max_period < 1:
        raise ValueError("max period must be positive")
    stats = stats or SolveStats()
    jobs = [(W, p, q) for p, q in period_order(max_period)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_torus_job, jobs))
    else:
        results = []
        for job in jobs:
            got = _torus_job(job)
            results.append(got)
            if got[0] is not None:
                break
    for (_, p, q), (a, nodes) in zip(jobs, results):
        stats.nodes += nodes
        if a is not None:
            return p, q, a
    return None


@dataclass(frozen=True)
class PeriodicTiling:
    """A tiling of the plane repeating a torus assignment."""
    tiles: TileSet
    table: TileAssignment

    def __call__(self, m: int, n: int) -> Tile:
        return self.tiles[self.table(m, n)]

    def index(self, m: int, n: int) -> int:
        return self.table(m, n)


def periodic_tiling(W: TileSet, max_period: int, workers: int = 1) -> PeriodicTiling | None:
    got = search_periodic(W, max_period, workers=workers)
    return None if got is None else PeriodicTiling(W, got[2])


# ---------------------------------------------------------------- files

def parse_tiles(text: str) -> TileSet:
    tiles = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4 or not all(p.isdigit() and int(p) > 0 for p in parts):
            raise ParseError(f"line {lineno}: expected four positive integers 'u d l r'")
        tiles.append(tuple(int(p) for p in parts))
    if not tiles:
        raise ParseError("no tiles in file")
    return TileSet(tuple(tiles))


def format_tiles(W: TileSet) -> str:
    return "".join(f"{t}\n" for t in W)


def format_assignment(a: TileAssignment) -> str:
    lines = [f"{a.width} {a.height}"]
    lines += [" ".join(map(str, row)) for row in a.rows()]
    return "\n".join(lines) + "\n"


def parse_assignment(text: str, kind: str = "region") -> TileAssignment:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    try:
        w, h = (int(v) for v in lines[0].split())
        rows = [[int(v) for v in ln.split()] for ln in lines[1:]]
    except (ValueError, IndexError):
        raise ParseError("assignment needs a 'w h' header and integer rows") from None
    if len(rows) != h or any(len(r) != w for r in rows):
        raise ParseError(f"expected {h} rows of {w} entries")
    cells = {(x, h - 1 - r): rows[r][x] for r in range(h) for x in range(w)}
    return TileAssignment(kind, w, h, cells)


# ---------------------------------------------------------------- the tiling formula

PARITIES = ("ee", "oe", "oo", "eo")


def letter(side: str, colour: int) -> Atom:
    return Atom(f"{side}{colour}")


X, Y, C, P = Atom("xx"), Atom("yy"), Atom("cc"), Atom("p")
EE, OE, OO, EO = (Atom(n) for n in PARITIES)
_PAR = dict(zip(PARITIES, (EE, OE, OO, EO)))


def vocabulary(W: TileSet) -> list[str]:
    """The 4k edge letters, xx, yy, cc, the parity letters and p."""
    names = [f"{side}{j}" for side in "udlr" for j in range(1, W.k + 1)]
    return names + ["xx", "yy", "cc", *PARITIES, "p"]


class _Builder:
    def __init__(self, mode: str):
        if mode not in (COMMUTATIVE, NONCOMMUTATIVE):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode

    def ldiv(self, a: Formula, b: Formula) -> Formula:  # a \ b
        return Binary("wand" if self.mode == COMMUTATIVE else "ldiv", a, b)

    def rdiv(self, b: Formula, a: Formula) -> Formula:  # b / a
        if self.mode == COMMUTATIVE:
            return Binary("wand", a, b)
        return Binary("rdiv", b, a)


def tile_literal(W: TileSet, t: Tile) -> Formula:
    parts = []
    for side, colour in zip("udlr", t):
        parts.append(letter(side, colour))
        parts.extend(Neg(letter(side, j)) for j in range(1, W.k + 1) if j != colour)
    return big("and", parts)


def complement(par: str) -> Formula:
    """The notational complement: disjunction of the other three parity letters."""
    return big("or", [_PAR[q] for q in PARITIES if q != par])


def primed(B: _Builder, a: Atom) -> Formula:
    return big("and", [a, C, B.ldiv(C, C)])


# per parity class: (x-successor parity, y-successor parity, advance formula maker)
_ALPHA = {
    "ee": ("oe", "eo"),
    "oe": ("ee", "oo"),
    "oo": ("eo", "oe"),
    "eo": ("oo", "ee"),
}
# the order in which the negated parity letters are listed for each class
_NEG_ORDER = {
    "ee": ("oe", "oo", "eo"),
    "oe": ("oo", "eo", "ee"),
    "oo": ("eo", "ee", "oe"),
    "eo": ("ee", "oe", "oo"),
}


def parity_advance(B: _Builder, par: str) -> Formula:
    """The negated division saying a fresh x (ee, oo) or y (oe, eo) step exists."""
    xs, ys = _ALPHA[par]
    if par in ("ee", "oo"):
        return Neg(B.ldiv(primed(B, X), complement(xs)))
    return Neg(B.rdiv(complement(ys), primed(B, Y)))


def _match_bracket(stay: str, go: str, matches: list[Formula]) -> Formula:
    if not matches:
        # an empty disjunction is false, so "stay or (go and false)" is just "stay"
        return _PAR[stay]
    return Binary("or", _PAR[stay], Binary("and", _PAR[go], big("or", matches)))


def alpha(W: TileSet, par: str, mode: str = NONCOMMUTATIVE) -> Formula:
    B = _Builder(mode)
    xs, ys = _ALPHA[par]
    disjuncts = []
    for t in W:
        right = [tile_literal(W, u) for u in W if u.left == t.right]
        above = [tile_literal(W, u) for u in W if u.down == t.up]
        disjuncts.append(big("and", [
            tile_literal(W, t),
            B.ldiv(X, _match_bracket(par, xs, right)),
            B.rdiv(_match_bracket(par, ys, above), Y),
        ]))
    head = [_PAR[par]] + [Neg(_PAR[q]) for q in _NEG_ORDER[par]]
    return big("and", head + [parity_advance(B, par), big("or", disjuncts)])


def alpha_all(W: TileSet, mode: str = NONCOMMUTATIVE) -> Formula:
    return big("or", [alpha(W, par, mode) for par in PARITIES])


def hypothesis(W: TileSet, mode: str = NONCOMMUTATIVE) -> Formula:
    """The bracketed conjunction whose division into p is the tiling formula."""
    B = _Builder(mode)
    a = alpha_all(W, mode)
    return big("and", [
        parity_advance(B, "ee"),
        B.ldiv(C, a),
        B.rdiv(B.ldiv(C, a), C),
        B.rdiv(a, C),
    ])


def compile_phi(W: TileSet, mode: str = NONCOMMUTATIVE) -> Formula:
    if not len(W):
        raise ValueError("empty tile set")
    return _Builder(mode).ldiv(hypothesis(W, mode), P)


def subformulas(f: Formula) -> list[Formula]:
    """Distinct subformulas, children before parents."""
    seen: dict = {}
    stack = [(f, False)]
    while stack:
        g, done = stack.pop()
        if g in seen:
            continue
        if done or not hasattr(g, "left") and not hasattr(g, "child"):
            seen[g] = None
            continue
        stack.append((g, True))
        if hasattr(g, "child"):
            stack.append((g.child, False))
        else:
            stack.append((g.right, False))
            stack.append((g.left, False))
    return list(seen)
