"""And-branching counter machines and their encoding into BI sequents."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

from . import calculus
from .syntax import (
    COMMUTATIVE, NONCOMMUTATIVE, TOP, UNIT, Atom, Binary, Comma, Formula, Leaf,
    ParseError, big,
)

OPS = ("inc", "dec", "fork")
_RESERVED = {"top", "bot", "unit"}


@dataclass(frozen=True)
class Instruction:
    op: str
    src: str
    dst: str
    reg: int | None = None  # inc/dec
    dst2: str | None = None  # fork

    def __str__(self):
        if self.op == "fork":
            return f"fork {self.src} {self.dst} {self.dst2}"
        return f"{self.op} {self.src} {self.dst} {self.reg}"


class Configuration(NamedTuple):
    state: str
    regs: tuple

    def __str__(self):
        regs = " ".join(f"r{i + 1}^{n}" for i, n in enumerate(self.regs) if n)
        return f"{self.state} {regs}".strip()


@dataclass(frozen=True)
class Machine:
    states: tuple
    final: str
    k: int
    instructions: tuple
    mode: str = COMMUTATIVE

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if self.final not in self.states:
            raise ValueError(f"final state {self.final!r} is not a state")
        regs = {self.register_name(i) for i in range(1, self.k + 1)}
        for q in self.states:
            if not calculus_atom_ok(q) or q in regs:
                raise ValueError(f"bad state name {q!r}")
        for ins in self.instructions:
            if ins.op not in OPS:
                raise ValueError(f"unknown instruction {ins.op!r}")
            named = [ins.src, ins.dst] + ([ins.dst2] if ins.op == "fork" else [])
            for q in named:
                if q not in self.states:
                    raise ValueError(f"instruction {ins} mentions unknown state {q!r}")
            if ins.op != "fork" and not (ins.reg is not None and 1 <= ins.reg <= self.k):
                raise ValueError(f"instruction {ins} has a bad register index")

    @staticmethod
    def register_name(i: int) -> str:
        return f"r{i}"

    def config(self, state: str, regs: Sequence[int] | None = None) -> Configuration:
        regs = tuple(regs) if regs is not None else (0,) * self.k
        if len(regs) != self.k or any(n < 0 for n in regs):
            raise ValueError("bad register vector")
        if state not in self.states:
            raise ValueError(f"unknown state {state!r}")
        return Configuration(state, regs)

    def with_mode(self, mode: str) -> "Machine":
        return replace(self, mode=mode)

    # -- semantics
    def step(self, cfg: Configuration, ins: Instruction) -> list | None:
        if cfg.state != ins.src:
            return None
        regs = list(cfg.regs)
        if ins.op == "inc":
            regs[ins.reg - 1] += 1
            return [Configuration(ins.dst, tuple(regs))]
        if ins.op == "dec":
            if regs[ins.reg - 1] == 0:
                return None
            regs[ins.reg - 1] -= 1
            return [Configuration(ins.dst, tuple(regs))]
        return [Configuration(ins.dst, cfg.regs), Configuration(ins.dst2, cfg.regs)]

    def is_accepting(self, cfg: Configuration) -> bool:
        return cfg.state == self.final and not any(cfg.regs)

    # -- encoding
    def instruction_formula(self, ins: Instruction, mode: str | None = None) -> Formula:
        mode = mode or self.mode
        q, q1 = Atom(ins.src), Atom(ins.dst)
        if ins.op == "inc":
            lhs, rhs = q, Binary("star", q1, Atom(self.register_name(ins.reg)))
        elif ins.op == "dec":
            lhs, rhs = Binary("star", q, Atom(self.register_name(ins.reg))), q1
        else:
            lhs, rhs = q, Binary("or", q1, Atom(ins.dst2))
        if mode == COMMUTATIVE:
            return Binary("wand", lhs, rhs)
        return Binary("rdiv", rhs, lhs)

    def terms(self, mode: str | None = None) -> tuple[Formula, Formula, Formula]:
        return encode(self, mode or self.mode)

    def config_bunch(self, cfg: Configuration, mode: str | None = None):
        _, _, theta = self.terms(mode)
        parts = [Leaf(Atom(cfg.state))]
        for i, n in enumerate(cfg.regs):
            parts.extend([Leaf(Atom(self.register_name(i + 1)))] * n)
        parts.append(Leaf(theta))
        return Comma(tuple(parts))

    def atoms(self) -> set[str]:
        return set(self.states) | {self.register_name(i) for i in range(1, self.k + 1)}


def calculus_atom_ok(name: str) -> bool:
    import re
    return bool(re.fullmatch(r"[a-z][a-z0-9_]*", name)) and name not in _RESERVED


def encode(m: Machine, mode: str = COMMUTATIVE) -> tuple[Formula, Formula, Formula]:
    """The reduction terms (i, t, theta)."""
    if mode not in (COMMUTATIVE, NONCOMMUTATIVE):
        raise ValueError(f"unknown mode {mode!r}")
    if not m.instructions:
        raise ValueError("a machine without instructions has no instruction conjunction")
    qf = Atom(m.final)
    i = big("and", [m.instruction_formula(ins, mode) for ins in m.instructions])
    if mode == COMMUTATIVE:
        t = Binary("himp", Binary("wand", i, qf), qf)
        theta = Binary("and", Binary("wand", TOP, t), UNIT)
    else:
        t = Binary("himp", Binary("ldiv", i, qf), qf)
        theta = Binary("and", Binary("ldiv", TOP, t), UNIT)
    return i, t, theta


# ---------------------------------------------------------------- computation trees

@dataclass(frozen=True)
class ComputationTree:
    config: Configuration
    instruction: Instruction | None = None
    children: tuple = ()

    def height(self) -> int:
        return 0 if not self.children else 1 + max(c.height() for c in self.children)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def leaves(self):
        if not self.children:
            yield self
        for c in self.children:
            yield from c.leaves()

    def render(self, indent: int = 0) -> str:
        via = f"   [{self.instruction}]" if self.instruction else ""
        lines = [" " * indent + str(self.config) + via]
        for c in self.children:
            lines.append(c.render(indent + 2))
        return "\n".join(lines)


def tree_problems(m: Machine, tree: ComputationTree) -> list[str]:
    """Reasons why ``tree`` is not an accepting computation tree of ``m``."""
    out = []
    stack = [tree]
    while stack:
        node = stack.pop()
        if not node.children:
            if node.instruction is not None:
                out.append(f"leaf {node.config} carries an instruction")
            if not m.is_accepting(node.config):
                out.append(f"leaf {node.config} is not the final configuration")
            continue
        if node.instruction not in m.instructions:
            out.append(f"{node.config}: instruction {node.instruction} is not in the machine")
            continue
        succ = m.step(node.config, node.instruction)
        if succ is None:
            out.append(f"{node.config}: instruction {node.instruction} does not apply")
        elif [c.config for c in node.children] != succ:
            out.append(f"{node.config}: children do not match {node.instruction}")
        stack.extend(node.children)
    return out


@dataclass
class SearchStats:
    nodes: int = 0
    depth_reached: int = 0


def accepts_bounded(m: Machine, cfg: Configuration, depth_budget: int,
                    stats: SearchStats | None = None) -> ComputationTree | None:
    """Iterative deepening for an accepting tree of height <= depth_budget."""
    if depth_budget < 0:
        raise ValueError("depth budget must be non-negative")
    stats = stats if stats is not None else SearchStats()
    for d in range(depth_budget + 1):
        stats.depth_reached = d
        memo: dict = {}
        got = _accept(m, cfg, d, memo, stats)
        if got is not None:
            return got
    return None


def _accept(m, cfg, d, memo, stats):
    key = (cfg, d)
    if key in memo:
        return memo[key]
    stats.nodes += 1
    result = None
    if m.is_accepting(cfg):
        result = ComputationTree(cfg)
    elif d > 0:
        for ins in m.instructions:
            succ = m.step(cfg, ins)
            if succ is None:
                continue
            kids = []
            for c in succ:
                sub = _accept(m, c, d - 1, memo, stats)
                if sub is None:
                    break
                kids.append(sub)
            else:
                result = ComputationTree(cfg, ins, tuple(kids))
                break
    memo[key] = result
    return result


_KIND = {"inc": "increment", "dec": "decrement", "fork": "fork"}


def soundness_proof(m: Machine, tree: ComputationTree) -> calculus.Proof:
    """Proof of ``q, R, theta => q_f`` assembled from gadgets along ``tree``."""
    problems = tree_problems(m, tree)
    if problems:
        raise ValueError("invalid computation tree: " + "; ".join(problems))
    return _sound(m, tree)


def _sound(m: Machine, tree: ComputationTree) -> calculus.Proof:
    if not tree.children:
        return calculus.gadget_proof("base", m, tree.config)
    subs = [_sound(m, c) for c in tree.children]
    return calculus.gadget_proof(_KIND[tree.instruction.op], m, tree.config, subs, tree.instruction)


# ---------------------------------------------------------------- files and generators

def parse_machine(text: str) -> tuple[Machine, Configuration | None]:
    """Read the machine file format; an optional ``start q n1 .. nk`` line gives a configuration."""
    states = final = None
    k = None
    ins = []
    start = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head, args = words[0], words[1:]
        try:
            if head == "states":
                states = tuple(args)
            elif head == "final" and len(args) == 1:
                final = args[0]
            elif head == "registers" and len(args) == 1:
                k = int(args[0])
            elif head in ("inc", "dec") and len(args) == 3:
                ins.append(Instruction(head, args[0], args[1], reg=int(args[2])))
            elif head == "fork" and len(args) == 3:
                ins.append(Instruction("fork", args[0], args[1], dst2=args[2]))
            elif head == "start" and args:
                start = (args[0], tuple(int(a) for a in args[1:]))
            else:
                raise ValueError(f"cannot read {line!r}")
        except ValueError as e:
            raise ParseError(f"line {lineno}: {e}") from None
    if states is None or final is None or k is None:
        raise ParseError("machine file needs 'states', 'final' and 'registers' lines")
    try:
        m = Machine(states, final, k, tuple(ins))
        cfg = None
        if start is not None:
            regs = start[1] + (0,) * (k - len(start[1]))
            cfg = m.config(start[0], regs)
    except ValueError as e:
        raise ParseError(str(e)) from None
    return m, cfg


def format_machine(m: Machine) -> str:
    lines = ["states " + " ".join(m.states), f"final {m.final}", f"registers {m.k}"]
    lines += [str(i) for i in m.instructions]
    return "\n".join(lines) + "\n"


def random_machine(rng: random.Random, max_states: int = 3, max_registers: int = 2,
                   max_instructions: int = 4) -> Machine:
    n = rng.randint(1, max_states)
    states = tuple(f"q{j}" for j in range(n - 1)) + ("qf",)
    k = rng.randint(1, max_registers)
    ins = []
    for _ in range(rng.randint(1, max_instructions)):
        op = rng.choice(OPS)
        src, dst = rng.choice(states), rng.choice(states)
        if op == "fork":
            ins.append(Instruction(op, src, dst, dst2=rng.choice(states)))
        else:
            ins.append(Instruction(op, src, dst, reg=rng.randint(1, k)))
    return Machine(states, "qf", k, tuple(ins))


def configurations(m: Machine, max_sum: int):
    """All configurations with register sum <= max_sum, in a fixed order."""
    def vecs(k, total):
        if k == 0:
            yield ()
            return
        for a in range(total + 1):
            for rest in vecs(k - 1, total - a):
                yield (a,) + rest
    for q in m.states:
        for v in vecs(m.k, max_sum):
            yield Configuration(q, v)
