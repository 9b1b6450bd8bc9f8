"""Command-line entry point: ``bunchlab <subcommand> ...``.

The first output line is always ``status: <ok|refuted|not-found|violation|error>``.
Exit codes: 0 for ok, 1 for refuted, not-found and violation, 2 for usage or
input-format errors.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import acm, calculus, frames, search, tiling
from .syntax import (
    COMMUTATIVE, NONCOMMUTATIVE, ParseError, Sequent, bunch_depth, parse_bunch,
    parse_formula, parse_sequent, print_bunch, print_formula, print_sequent,
)

EXIT = {"ok": 0, "refuted": 1, "not-found": 1, "violation": 1, "error": 2}
DEFAULT_SEED = 20240101


class UsageError(Exception):
    pass


@dataclass
class CommandResult:
    status: str
    fields: list = field(default_factory=list)  # (key, value) summary lines
    artifacts: list = field(default_factory=list)
    body: str = ""

    @property
    def exit_code(self) -> int:
        return EXIT[self.status]

    def add(self, key, value):
        self.fields.append((key, value))
        return self

    def render(self, fmt: str = "text") -> str:
        sep = "\t" if fmt == "tabular" else ": "
        lines = [f"status{sep}{self.status}"]
        lines += [f"{k}{sep}{v}" for k, v in self.fields]
        lines += [f"wrote{sep}{p}" for p in self.artifacts]
        out = "\n".join(lines)
        if self.body:
            out += "\n" + self.body.rstrip("\n")
        return out + "\n"


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write(res: CommandResult, path: str | None, text: str):
    if path and path != "-":
        Path(path).write_text(text)
        res.artifacts.append(path)


def _kernel_mode(mode: str) -> str:
    if mode not in ("bi", "commutative"):
        raise UsageError(f"the proof kernel supports --mode bi only, not {mode!r}")
    return "bi"


def _formula_mode(mode: str) -> str:
    return NONCOMMUTATIVE if mode == NONCOMMUTATIVE else COMMUTATIVE


# ---------------------------------------------------------------- calculus commands

def cmd_parse(a) -> CommandResult:
    mode = _formula_mode(a.mode)
    text = a.text
    if "=>" in text:
        s = parse_sequent(text, mode)
        return CommandResult("ok").add("kind", "sequent").add("canonical", print_sequent(s.canonical()))\
            .add("printed", print_sequent(s))
    try:
        f = parse_formula(text, mode)
        return CommandResult("ok").add("kind", "formula").add("printed", print_formula(f))
    except ParseError:
        b = parse_bunch(text, mode)
        return CommandResult("ok").add("kind", "bunch").add("printed", print_bunch(b))


def cmd_prove(a) -> CommandResult:
    _kernel_mode(a.mode)
    s = parse_sequent(a.sequent)
    budget = search.Budget(max_depth=a.budget, max_contractions=a.contractions,
                           max_nodes=a.max_nodes)
    t0 = time.perf_counter()
    r = search.prove_bounded(s, budget)
    res = CommandResult("ok" if r.found else "not-found")
    res.add("result", r.status).add("nodes", f"{r.nodes}/{budget.max_nodes}")
    res.add("depth", f"{r.depth}/{budget.max_depth}")
    res.add("contractions", f"{r.contractions}/{budget.max_contractions}")
    res.add("seconds", f"{time.perf_counter() - t0:.3f}")
    if r.found:
        report = calculus.check_proof(r.proof)
        res.add("checked", "ok" if report.ok else "FAILED")
        if not report.ok:
            res.status = "violation"
        res.add("height", r.proof.height())
        _write(res, a.out, calculus.print_proof(r.proof, indent=2) + "\n")
    return res


def cmd_check(a) -> CommandResult:
    _kernel_mode(a.mode)
    p = calculus.parse_proof(_read(a.certificate))
    report = calculus.check_proof(p, allow_open=a.allow_open)
    res = CommandResult("ok" if report.ok else "violation")
    res.add("conclusion", print_sequent(p.conclusion)).add("height", p.height())
    res.add("violations", len(report.violations))
    shown = [str(v) for v in report.violations[:20]]
    if len(report.violations) > 20:
        shown.append(f"... {len(report.violations) - 20} more")
    res.body = "\n".join(shown)
    return res


def cmd_depth(a) -> CommandResult:
    b = parse_bunch(a.bunch, _formula_mode(a.mode))
    return CommandResult("ok").add("bunch", print_bunch(b)).add("depth", bunch_depth(b))


def cmd_mult_length(a) -> CommandResult:
    s = parse_sequent(a.sequent, _formula_mode(a.mode))
    return CommandResult("ok").add("sequent", print_sequent(s))\
        .add("multiplicative-length", calculus.multiplicative_length(s))


def cmd_comma_growth(a) -> CommandResult:
    if a.n < 1:
        raise UsageError("n must be at least 1")
    steps = calculus.comma_growth_derivation(a.n)
    report = calculus.check_proof(steps[0], allow_open=True)
    top = steps[-1].conclusion
    res = CommandResult("ok" if report.ok else "violation")
    res.add("iterations", a.n).add("spine-sequents", len(steps))
    res.add("top-depth", bunch_depth(top.antecedent)).add("checked", "ok" if report.ok else "FAILED")
    if a.verbose:
        res.body = "\n".join(print_sequent(p.conclusion) for p in reversed(steps))
    _write(res, a.out, calculus.print_proof(steps[0], indent=2) + "\n")
    return res


# ---------------------------------------------------------------- tiling commands

def cmd_tile_solve(a) -> CommandResult:
    W = tiling.parse_tiles(_read(a.tiles))
    if a.check:
        asg = tiling.parse_assignment(_read(a.check), "torus" if a.torus else "region")
        if any(not 0 <= i < len(W) for i in asg.cells.values()):
            raise UsageError("assignment mentions a tile index outside the tile set")
        bad = tiling.adjacency_violations(W, asg)
        res = CommandResult("ok" if not bad else "violation").add("adjacency", "ok" if not bad else "broken")
        res.body = "\n".join(map(str, bad))
        return res
    stats = tiling.SolveStats()
    got = tiling.tiles_region(W, a.width, a.height, stats)
    res = CommandResult("ok" if got else "not-found").add("region", f"{a.width}x{a.height}")
    res.add("nodes", stats.nodes)
    if got:
        res.add("adjacency", "ok" if tiling.is_valid(W, got) else "broken")
        text = tiling.format_assignment(got)
        res.body = text
        _write(res, a.out, text)
    return res


def cmd_tile_periodic(a) -> CommandResult:
    W = tiling.parse_tiles(_read(a.tiles))
    stats = tiling.SolveStats()
    got = tiling.search_periodic(W, a.max_period, stats, workers=a.workers)
    res = CommandResult("ok" if got else "not-found").add("max-period", a.max_period)
    res.add("nodes", stats.nodes)
    if got:
        p, q, asg = got
        res.add("periods", f"{p} {q}")
        text = tiling.format_assignment(asg)
        res.body = text
        _write(res, a.out, text)
    return res


def cmd_compile_phi(a) -> CommandResult:
    W = tiling.parse_tiles(_read(a.tiles))
    mode = _formula_mode(a.mode)
    phi = tiling.compile_phi(W, mode)
    atoms = phi.atoms()
    res = CommandResult("ok").add("atoms", f"{len(atoms - {'p'})} + p").add("size", phi.size())
    res.add("mode", mode)
    _write(res, a.out, print_formula(phi) + "\n")
    return res


# ---------------------------------------------------------------- frame commands

def cmd_frame_validate(a) -> CommandResult:
    fr = frames.parse_frame(_read(a.frame))
    bad = [str(v) for v in frames.validate_frame(fr)]
    if a.algebra:
        try:
            bad += [str(v) for v in frames.complex_algebra_check(fr)]
        except ValueError as e:
            raise UsageError(str(e)) from None
    res = CommandResult("ok" if not bad else "violation").add("states", fr.n)
    res.add("violations", len(bad))
    res.body = "\n".join(bad)
    return res


def cmd_model_check(a) -> CommandResult:
    m = frames.parse_model(_read(a.model))
    mode = _formula_mode(a.mode)
    f = parse_formula(a.formula, mode)
    try:
        sat = frames.evaluate(m, f, mode)
    except frames.UnsupportedFormula as e:
        raise UsageError(str(e)) from None
    bad = sorted(set(range(m.frame.n)) - sat)
    if a.state is not None:
        if not 0 <= a.state < m.frame.n:
            raise UsageError("state outside the carrier")
        ok = a.state in sat
        return CommandResult("ok" if ok else "refuted").add("state", a.state)\
            .add("satisfied", "yes" if ok else "no")
    res = CommandResult("ok" if not bad else "refuted").add("satisfied-at", len(sat))
    res.add("refuted-at", " ".join(map(str, bad)) or "-")
    return res


def cmd_countermodel(a) -> CommandResult:
    mode = _formula_mode(a.mode)
    f = parse_formula(a.formula, mode)
    try:
        r = frames.countermodel_search(f, a.max_size, mode, max_models=a.budget)
    except frames.UnsupportedFormula as e:
        raise UsageError(str(e)) from None
    res = CommandResult("ok" if r.model else "not-found").add("examined", f"{r.examined}/{a.budget}")
    if r.exhausted:
        res.add("result", "budget-exhausted")
    if r.model:
        res.add("states", r.model.frame.n).add("refuted-at", " ".join(map(str, sorted(r.refuting))))
        text = frames.format_model(r.model)
        res.body = text
        _write(res, a.out, text)
    return res


def _tau(a) -> tiling.PeriodicTiling:
    W = tiling.parse_tiles(_read(a.tau))
    tau = tiling.periodic_tiling(W, a.max_period, workers=a.workers)
    if tau is None:
        raise _NotFound(f"tile set has no torus tiling up to period {a.max_period}")
    return tau


class _NotFound(Exception):
    pass


def cmd_truncated_model(a) -> CommandResult:
    tau = _tau(a)
    m = frames.build_truncated_model(tau, a.K)
    res = CommandResult("ok").add("states", m.frame.n)
    res.add("periods", f"{tau.table.width} {tau.table.height}")
    _write(res, a.out, frames.format_model(m))
    return res


def cmd_extract_tiling(a) -> CommandResult:
    tau = _tau(a)
    if a.G > a.K - 1:
        raise UsageError("grid size must be at most K - 1 so fresh witnesses exist")
    m = frames.build_truncated_model(tau, a.K)
    try:
        ex = frames.extract_tiling(m, a.G, s=a.state, budget=a.budget)
    except frames.ExtractionError as e:
        return CommandResult("not-found").add("error", e.code).add("detail", str(e))
    asg = ex.assignment()
    ok = tiling.is_valid(tau.tiles, asg)
    agree = all(asg.cells[(mm - 1, n)] == tau.index(mm, n) for (mm, n) in ex.tiles)
    res = CommandResult("ok" if ok else "violation").add("adjacency", "ok" if ok else "broken")
    res.add("matches-tau", "yes" if agree else "no").add("checked", f"{ex.checked}/{a.budget}")
    text = tiling.format_assignment(asg)
    res.body = text
    _write(res, a.out, text)
    return res


# ---------------------------------------------------------------- machine commands

def _machine(a):
    if a.random:
        m = acm.random_machine(random.Random(a.seed))
        return m, None
    if not a.machine:
        raise UsageError("give a machine file or --random")
    return acm.parse_machine(_read(a.machine))


def _start(a, m, cfg):
    if a.start:
        words = a.start.split()
        try:
            regs = tuple(int(w) for w in words[1:])
            regs += (0,) * (m.k - len(regs))
            return m.config(words[0], regs)
        except (ValueError, IndexError) as e:
            raise UsageError(f"bad --start: {e}") from None
    if cfg is None:
        raise UsageError("no start configuration: add a 'start' line or --start")
    return cfg


def cmd_acm_run(a) -> CommandResult:
    m, cfg = _machine(a)
    cfg = _start(a, m, cfg)
    stats = acm.SearchStats()
    tree = acm.accepts_bounded(m, cfg, a.budget, stats)
    res = CommandResult("ok" if tree else "not-found").add("start", str(cfg))
    res.add("nodes", stats.nodes).add("depth", f"{stats.depth_reached}/{a.budget}")
    if a.random:
        res.body = acm.format_machine(m)
    if tree:
        res.add("height", tree.height())
        res.body += tree.render() + "\n"
    return res


def cmd_acm_encode(a) -> CommandResult:
    m, cfg = _machine(a)
    mode = _formula_mode(a.mode)
    i, t, theta = acm.encode(m, mode)
    res = CommandResult("ok").add("mode", mode).add("i", print_formula(i))
    res.add("t", print_formula(t)).add("theta", print_formula(theta))
    if cfg is not None or a.start:
        cfg = _start(a, m, cfg)
        from .syntax import Atom
        s = Sequent(m.config_bunch(cfg, mode), Atom(m.final))
        res.add("sequent", print_sequent(s))
    return res


def cmd_acm_prove(a) -> CommandResult:
    _kernel_mode(a.kmode)
    m, cfg = _machine(a)
    cfg = _start(a, m, cfg)
    stats = acm.SearchStats()
    tree = acm.accepts_bounded(m, cfg, a.budget, stats)
    res = CommandResult("ok" if tree else "not-found").add("nodes", stats.nodes)
    res.add("depth", f"{stats.depth_reached}/{a.budget}")
    if tree is None:
        return res
    proof = acm.soundness_proof(m, tree)
    report = calculus.check_proof(proof)
    if not report.ok:
        res.status = "violation"
    res.add("checked", "ok" if report.ok else "FAILED").add("proof-height", proof.height())
    _write(res, a.out, calculus.print_proof(proof, indent=2) + "\n")
    return res


# ---------------------------------------------------------------- wiring

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "tabular"), default="text")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--workers", type=int, default=1)

    p = argparse.ArgumentParser(prog="bunchlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        return sp

    modes = (COMMUTATIVE, NONCOMMUTATIVE)

    sp = cmd("parse", cmd_parse, "parse and reprint a formula, bunch or sequent")
    sp.add_argument("text")
    sp.add_argument("--mode", choices=modes, default=COMMUTATIVE)

    sp = cmd("prove", cmd_prove, "bounded proof search")
    sp.add_argument("sequent")
    sp.add_argument("--mode", default="bi")
    sp.add_argument("--budget", type=int, default=12, help="maximum proof height")
    sp.add_argument("--contractions", type=int, default=1, help="contractions per branch")
    sp.add_argument("--max-nodes", type=int, default=200_000)
    sp.add_argument("--out", default="proof.cert")

    sp = cmd("check", cmd_check, "check a proof certificate")
    sp.add_argument("certificate")
    sp.add_argument("--mode", default="bi")
    sp.add_argument("--allow-open", action="store_true")

    sp = cmd("depth", cmd_depth, "depth of a bunch")
    sp.add_argument("bunch")
    sp.add_argument("--mode", choices=modes, default=COMMUTATIVE)

    sp = cmd("mult-length", cmd_mult_length, "multiplicative length of a sequent")
    sp.add_argument("sequent")
    sp.add_argument("--mode", choices=modes, default=COMMUTATIVE)

    sp = cmd("comma-growth", cmd_comma_growth, "derivation with growing comma depth")
    sp.add_argument("n", type=int)
    sp.add_argument("--out", default="comma_growth.cert")
    sp.add_argument("--verbose", action="store_true")

    sp = cmd("tile-solve", cmd_tile_solve, "tile a rectangle, or check an assignment")
    sp.add_argument("tiles")
    sp.add_argument("--width", type=int, default=2)
    sp.add_argument("--height", type=int, default=2)
    sp.add_argument("--check", help="assignment file to check instead of solving")
    sp.add_argument("--torus", action="store_true", help="check with wrap-around edges")
    sp.add_argument("--out", default="tiling.txt")

    sp = cmd("tile-periodic", cmd_tile_periodic, "search for a torus tiling")
    sp.add_argument("tiles")
    sp.add_argument("--max-period", type=int, default=4)
    sp.add_argument("--out", default="periodic.txt")

    sp = cmd("compile-phi", cmd_compile_phi, "compile a tile set to its formula")
    sp.add_argument("tiles")
    sp.add_argument("--mode", choices=modes, default=NONCOMMUTATIVE)
    sp.add_argument("--out", default="phi.txt")

    sp = cmd("frame-validate", cmd_frame_validate, "check frame axioms")
    sp.add_argument("frame")
    sp.add_argument("--algebra", action="store_true", help="also check the complex algebra")

    sp = cmd("model-check", cmd_model_check, "evaluate a formula in a model")
    sp.add_argument("model")
    sp.add_argument("formula")
    sp.add_argument("--state", type=int)
    sp.add_argument("--mode", choices=modes, default=COMMUTATIVE)

    sp = cmd("countermodel", cmd_countermodel, "search small frames for a countermodel")
    sp.add_argument("formula")
    sp.add_argument("--max-size", type=int, default=2)
    sp.add_argument("--budget", type=int, default=1_000_000, help="maximum models examined")
    sp.add_argument("--mode", choices=modes, default=COMMUTATIVE)
    sp.add_argument("--out", default="countermodel.txt")

    for name, fn, help in (("truncated-model", cmd_truncated_model, "build the finite tiling model"),
                           ("extract-tiling", cmd_extract_tiling, "rebuild a tiling from the model")):
        sp = cmd(name, fn, help)
        sp.add_argument("--tau", required=True, help="tile file; its first torus tiling is used")
        sp.add_argument("--K", type=int, default=4)
        sp.add_argument("--max-period", type=int, default=4)
        if name == "extract-tiling":
            sp.add_argument("--G", type=int, default=3)
            sp.add_argument("--state", type=int, default=0)
            sp.add_argument("--budget", type=int, default=10_000_000, help="witness checks")
            sp.add_argument("--out", default="extracted.txt")
        else:
            sp.add_argument("--out", default="truncated_model.txt")

    for name, fn, help in (("acm-run", cmd_acm_run, "search for an accepting computation"),
                           ("acm-encode", cmd_acm_encode, "print the reduction terms"),
                           ("acm-prove", cmd_acm_prove, "emit a checked proof from a computation")):
        sp = cmd(name, fn, help)
        sp.add_argument("machine", nargs="?")
        sp.add_argument("--random", action="store_true", help="use a random machine from --seed")
        sp.add_argument("--start", help="configuration 'q n1 n2 ...'")
        if name == "acm-encode":
            sp.add_argument("--mode", choices=modes, default=COMMUTATIVE)
        else:
            sp.add_argument("--budget", type=int, default=6, help="maximum tree height")
        if name == "acm-prove":
            sp.add_argument("--mode", dest="kmode", default="bi")
            sp.add_argument("--out", default="acm_proof.cert")
    return p


def run(argv: list[str]) -> CommandResult:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        if e.code == 0:
            raise
        return CommandResult("error").add("error", "usage")
    try:
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be positive")
        res = args.fn(args)
    except (ParseError, UsageError, ValueError) as e:
        res = CommandResult("error").add("error", str(e))
    except _NotFound as e:
        res = CommandResult("not-found").add("detail", str(e))
    res.format = getattr(args, "format", "text")
    return res


def main(argv: list[str] | None = None) -> int:
    res = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(res.render(getattr(res, "format", "text")))
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
