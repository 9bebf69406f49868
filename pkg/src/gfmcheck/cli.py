"""Command-line front end.

Every command goes through ``run``, which returns a CommandOutcome instead of
printing, so the whole surface can be tested in-process.  ``main`` prints the
report and writes the emitted documents.

Exit codes: 0 the queried property holds, 1 it fails, 2 bad input or usage,
3 a resource budget ran out.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .automata import (AutomatonFormatError, Nbw, Nfa, SafetyAutomaton, load_automaton, make_complete,
                       rebase, serialize)
from .criterion import _ChainBuilder, decide_gfm
from .generators import (DOLLAR, dollar_instance, fork_instance, fork_witness_mc, random_instances,
                         running_example)
from .limits import BudgetExceeded, limits
from .mdp import (LabelledMc, ModelFormatError, compare_on_mc, dump_model, fmt, lasso_mc, load_model,
                  max_buchi_prob, maximal_end_components, product_mdp, psem, psyn)
from .omega import difference_witness, pruned_automaton, residual_language, safety_is_gfg
from .reference import build_gfm_equivalent
from .trees import BOX, STAGES, STAR, build_emptiness_game, build_stage, decide_qgfm, dump_stage

HOLDS, FAILS, USAGE, BUDGET = 0, 1, 2, 3


@dataclass
class CommandOutcome:
    code: int
    report: str
    documents: dict = field(default_factory=dict)  # path -> text


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")

    def exit(self, status=0, message=None):
        if status:
            raise UsageError(message or "usage error")
        raise _HelpShown()


class _HelpShown(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _automaton(path: str):
    return load_automaton(_read(path))


def _nbw(path: str) -> Nbw:
    A = _automaton(path)
    if not isinstance(A, Nbw):
        raise UsageError(f"{path}: expected an nbw or nfa document, got {A.kind}")
    return A


def _chain(path: str) -> LabelledMc:
    M = load_model(_read(path))
    if not M.is_chain:
        raise UsageError(f"{path}: expected a Markov chain")
    return M


def _value(x: Fraction, decimal: bool) -> str:
    text = fmt(x)
    if decimal:
        text += f" (~{float(x):.6f})"
    return text


def _state(text: str) -> int:
    t = text[1:] if text[:1] in ("q", "Q") else text
    if not t.isdigit():
        raise UsageError(f"bad state {text!r}")
    return int(t)


def _json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------- falsifier

def _branching_chain(rng, alphabet, branches: int) -> LabelledMc:
    """A short random prefix whose last state branches into several lassos."""
    b = _ChainBuilder(alphabet)
    prefix = [b.state(rng.choice(alphabet)) for _ in range(rng.randint(1, 2))]
    for s, t in zip(prefix, prefix[1:]):
        b.uniform(s, [t])
    targets, weights = [], []
    for k in range(branches):
        u = [rng.choice(alphabet) for _ in range(rng.randint(0, 1))]
        v = [rng.choice(alphabet) for _ in range(rng.randint(1, 2))]
        targets.append(b.part(("lasso", k), lasso_mc(alphabet, u, v)))
        weights.append(rng.randint(1, 3))
    total = sum(weights)
    row: dict = {}
    for t, w in zip(targets, weights):
        row[t] = row.get(t, 0) + Fraction(w, total)
    b.rows[prefix[-1]] = row
    return b.build(prefix[0])


def _random_chain(rng, alphabet) -> LabelledMc:
    inst = random_instances("mc", size=rng.randint(1, 4), alphabet=alphabet,
                            density=rng.choice((0.3, 0.5, 0.8)), seed=rng.randrange(1 << 30))
    return inst[0].model


def _fork_style(rng, alphabet) -> LabelledMc:
    plain = [s for s in alphabet if s != DOLLAR]
    words = ["".join(rng.choice(plain) for _ in range(rng.randint(1, 2))) for _ in range(2)]
    return fork_witness_mc(words[0], words[1], alphabet)


def _candidates(N: Nbw, trials: int, seed: int):
    rng = random.Random(seed)
    alphabet = tuple(N.alphabet)
    forkable = DOLLAR in alphabet and "a" in alphabet and len(alphabet) > 1
    for i in range(trials):
        k = i % 3
        if k == 0:
            yield _branching_chain(rng, alphabet, 2)
        elif k == 1:
            yield _random_chain(rng, alphabet)
        elif forkable:
            yield _fork_style(rng, alphabet)
        else:
            yield _branching_chain(rng, alphabet, 3)


def falsify(N: Nbw, trials: int, seed: int = 0) -> LabelledMc | None:
    """Search sampled MCs for one with PSyn < PSem.  Returning None is
    evidence of GFM-ness, never proof."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    N = make_complete(N)
    for M in _candidates(N, trials, seed):
        cmp = compare_on_mc(N, M)
        if cmp.psyn < cmp.psem:
            return M
    return None


# ---------------------------------------------------------------- commands

def _verdict_outcome(v, args, what: str) -> CommandOutcome:
    lines = [f"{what}: {'holds' if v.holds else 'fails'}", f"decision: {v.decision}", f"route: {v.route}"]
    docs = {}
    if v.witness is not None:
        M = v.witness
        C = make_complete(_nbw(args.automaton))
        cmp = compare_on_mc(C, M)
        lines.append(f"witness states: {M.size}")
        lines.append(f"witness psem: {_value(cmp.psem, args.decimal)}")
        lines.append(f"witness psyn: {_value(cmp.psyn, args.decimal)}")
        if args.witness:
            docs[args.witness] = dump_model(M)
            lines.append(f"witness written to {args.witness}")
    for key in sorted(v.diagnostics):
        lines.append(f"{key}: {v.diagnostics[key]}")
    return CommandOutcome(HOLDS if v.holds else FAILS, "\n".join(lines) + "\n", docs)


def _cmd_check(args):
    return _verdict_outcome(decide_gfm(_nbw(args.automaton), args.method), args, "GFM")


def _cmd_qgfm(args):
    return _verdict_outcome(decide_qgfm(_nbw(args.automaton)), args, "QGFM")


def _cmd_gfg_safety(args):
    S = _automaton(args.automaton)
    if not isinstance(S, SafetyAutomaton):
        raise UsageError(f"{args.automaton}: expected a safety document, got {S.kind}")
    ok, pruning = safety_is_gfg(S)
    lines = [f"GFG: {'holds' if ok else 'fails'}"]
    docs = {}
    if ok and args.pruned:
        docs[args.pruned] = serialize(pruned_automaton(S, pruning))
        lines.append(f"pruned automaton written to {args.pruned}")
    return CommandOutcome(HOLDS if ok else FAILS, "\n".join(lines) + "\n", docs)


def _cmd_residual(args):
    C = make_complete(_nbw(args.automaton))
    q, r = _state(args.source), _state(args.target)
    for x in (q, r):
        if not 0 <= x < C.state_count:
            raise UsageError(f"state {x} out of range")
    if args.letter not in C.alphabet:
        raise UsageError(f"letter {args.letter!r} not in alphabet")
    if r not in C.succ(q, args.letter):
        raise UsageError(f"({q}, {args.letter}, {r}) is not a transition")
    w = difference_witness(residual_language(C, q, args.letter), rebase(C, r))
    if w is None:
        return CommandOutcome(HOLDS, f"transition ({q}, {args.letter}, {r}) is residual\n")
    return CommandOutcome(FAILS, f"transition ({q}, {args.letter}, {r}) is not residual\n"
                                 f"lost word after {args.letter}: {w}\n")


def _cmd_value(fn):
    def cmd(args):
        M = _chain(args.model)
        N = _nbw(args.automaton)
        return CommandOutcome(HOLDS, _value(fn(M, N), args.decimal) + "\n")
    return cmd


def _cmd_product(args):
    M = load_model(_read(args.model))
    N = _nbw(args.automaton)
    P = product_mdp(M, N)
    mecs = maximal_end_components(P)
    accepting = [ec for ec in mecs if ec.states & P.accepting]
    value, _ = max_buchi_prob(P)
    doc = {
        "states": [list(st) for st in P.states],
        "accepting": sorted(list(P.states[i]) for i in P.accepting),
        "mecs": [{"states": sorted(list(P.states[u]) for u in ec.states),
                  "accepting": bool(ec.states & P.accepting)} for ec in mecs],
        "max_buchi_prob": fmt(value),
    }
    lines = [
        f"product states: {len(P.states)}",
        "accepting pairs: " + " ".join(f"({s},{q})" for s, q in sorted(P.accepting_pairs)),
        f"end components: {len(mecs)} ({len(accepting)} accepting)",
        f"max Buchi probability: {_value(value, args.decimal)}",
    ]
    docs = {args.out: _json(doc)} if args.out else {}
    return CommandOutcome(HOLDS, "\n".join(lines) + "\n", docs)


def _emit(args, name, text, lines):
    if args.out:
        return {name: text}
    lines.append(text.rstrip("\n"))
    return {}


def _cmd_gen(args):
    lines, docs = [], {}
    if args.construction == "example":
        N, M = running_example()
        if args.out:
            docs[args.out] = serialize(N)
            lines.append(f"automaton written to {args.out}")
        else:
            lines.append(serialize(N).rstrip("\n"))
        if args.model_out:
            docs[args.model_out] = dump_model(M)
            lines.append(f"chain written to {args.model_out}")
        return CommandOutcome(HOLDS, "\n".join(lines) + "\n", docs)
    if args.construction in ("fork", "dollar"):
        if not args.input:
            raise UsageError(f"gen {args.construction} needs an NFA file")
        A = _automaton(args.input)
        if not isinstance(A, Nfa):
            raise UsageError(f"{args.input}: expected an nfa document, got {A.kind}")
        inst = fork_instance(A) if args.construction == "fork" else dollar_instance(A)
        lines.append(f"tag: {inst.tag}")
        docs.update(_emit(args, args.out, serialize(inst.automaton), lines))
        if args.out:
            lines.append(f"automaton written to {args.out}")
        if args.instance_out:
            docs[args.instance_out] = _json(inst.to_doc())
        return CommandOutcome(HOLDS, "\n".join(lines) + "\n", docs)
    insts = random_instances(args.kind, size=args.size, alphabet=args.alphabet, density=args.density,
                             seed=args.seed, count=args.count, deterministic=args.deterministic,
                             prefix=args.prefix, period=args.period)
    for i, inst in enumerate(insts):
        text = serialize(inst.automaton) if inst.automaton is not None else dump_model(inst.model)
        if args.out:
            path = args.out if len(insts) == 1 else _indexed(args.out, i)
            docs[path] = text
            lines.append(f"instance {i} written to {path}")
        else:
            lines.append(text.rstrip("\n"))
    if args.instance_out:
        docs[args.instance_out] = _json([inst.to_doc() for inst in insts])
    return CommandOutcome(HOLDS, "\n".join(lines) + "\n", docs)


def _indexed(path: str, i: int) -> str:
    stem, dot, ext = path.rpartition(".")
    return f"{stem}-{i}.{ext}" if dot else f"{path}-{i}"


def _cmd_falsify(args):
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    N = _nbw(args.automaton)
    M = falsify(N, args.trials, args.seed)
    if M is None:
        return CommandOutcome(HOLDS, f"no gap found in {args.trials} trials (evidence, not proof)\n")
    cmp = compare_on_mc(make_complete(N), M)
    lines = [f"gap found: psem {_value(cmp.psem, args.decimal)}, psyn {_value(cmp.psyn, args.decimal)}",
             f"chain states: {M.size}"]
    docs = {}
    if args.witness:
        docs[args.witness] = dump_model(M)
        lines.append(f"chain written to {args.witness}")
    return CommandOutcome(FAILS, "\n".join(lines) + "\n", docs)


def stage_letters(C: Nbw, G: Nbw | None, stage: str) -> list:
    """Representative letters for a dump: every symbol, with the strategy
    annotations set uniformly to box or to the wildcard direction."""
    syms = list(C.alphabet)
    if stage in ("T_C", "dual_T_C", "T_G"):
        return syms
    n = C.state_count
    fcs = [tuple([BOX] * n), tuple([STAR] * n)]
    m = G.state_count if G is not None else 0
    out = []
    for s in syms:
        for fc in fcs:
            if stage in ("U_C", "U_C_w", "U_C_p", "U_C_prime"):
                out.append((s, fc, (BOX, C.initial)))
            elif stage == "D_G_prime":
                out.extend((s, fc, r) for r in range(m))
            else:
                out.extend((s, fc, (c, r)) for c in (BOX, STAR) for r in range(m))
    return out


def _cmd_stage_dump(args):
    C = make_complete(_nbw(args.automaton))
    if args.game:
        text = build_emptiness_game(C, build_gfm_equivalent(C)).dump()
    else:
        if not args.stage:
            raise UsageError("stage-dump needs --stage or --game")
        G = build_gfm_equivalent(C) if "_G" in args.stage else None
        A = build_stage(C, G, args.stage)
        text = dump_stage(A, stage_letters(C, G, args.stage))
    if args.out:
        return CommandOutcome(HOLDS, f"dump written to {args.out}\n", {args.out: text})
    return CommandOutcome(HOLDS, text)


# ---------------------------------------------------------------- parser

def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("budgets")
    g.add_argument("--max-states", type=int, default=argparse.SUPPRESS,
                   help="determinization state budget (default 200000)")
    g.add_argument("--max-positions", type=int, default=argparse.SUPPRESS,
                   help="game position budget (default 5000000)")
    g.add_argument("--timeout", type=float, default=argparse.SUPPRESS, help="wall-clock seconds")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--decimal", action="store_true", default=argparse.SUPPRESS,
                   help="append a rounded decimal to exact fractions")

    p = _Parser(prog="gfmcheck", description="Decide and probe good-for-MDPs Buchi automata.")
    p.add_argument("--max-states", type=int, default=None)
    p.add_argument("--max-positions", type=int, default=None)
    p.add_argument("--timeout", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decimal", action="store_true", default=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, fn, help_text):
        c = sub.add_parser(name, parents=[common], help=help_text)
        c.set_defaults(func=fn)
        return c

    c = cmd("check", _cmd_check, "decide whether an NBW is GFM")
    c.add_argument("automaton")
    c.add_argument("--method", choices=("pipeline", "criterion", "both"), default="pipeline")
    c.add_argument("--witness", help="write the witness chain here")

    c = cmd("qgfm", _cmd_qgfm, "decide qualitative GFM-ness with the tree-automaton pipeline")
    c.add_argument("automaton")
    c.add_argument("--witness")

    c = cmd("gfg-safety", _cmd_gfg_safety, "solve the letter game of a safety automaton")
    c.add_argument("automaton")
    c.add_argument("--pruned", help="write the pruned deterministic automaton here")

    c = cmd("residual", _cmd_residual, "test whether a transition is residual")
    c.add_argument("automaton")
    c.add_argument("--from", dest="source", required=True)
    c.add_argument("--letter", required=True)
    c.add_argument("--to", dest="target", required=True)

    for name, fn in (("psem", psem), ("psyn", psyn)):
        c = cmd(name, _cmd_value(fn), f"print {name} of a chain against an NBW")
        c.add_argument("model")
        c.add_argument("automaton")

    c = cmd("product", _cmd_product, "product MDP, its end components and the optimal value")
    c.add_argument("model")
    c.add_argument("automaton")
    c.add_argument("--out")

    c = cmd("gen", _cmd_gen, "generate instances")
    c.add_argument("construction", choices=("fork", "dollar", "example", "random"))
    c.add_argument("input", nargs="?", help="NFA document for fork and dollar")
    c.add_argument("--out")
    c.add_argument("--model-out")
    c.add_argument("--instance-out", help="write instance documents with provenance here")
    c.add_argument("--kind", choices=("nbw", "nfa", "mc", "lasso_mc"), default="nbw")
    c.add_argument("--size", type=int, default=3)
    c.add_argument("--alphabet", default="ab")
    c.add_argument("--density", type=float, default=0.5)
    c.add_argument("--count", type=int, default=1)
    c.add_argument("--deterministic", action="store_true")
    c.add_argument("--prefix", default="")
    c.add_argument("--period", default="")

    c = cmd("falsify", _cmd_falsify, "search random chains for a PSyn < PSem gap")
    c.add_argument("automaton")
    c.add_argument("--trials", type=int, default=200)
    c.add_argument("--witness")

    c = cmd("stage-dump", _cmd_stage_dump, "dump a pipeline stage or the emptiness game as JSON")
    c.add_argument("automaton")
    c.add_argument("--stage", choices=STAGES)
    c.add_argument("--game", action="store_true")
    c.add_argument("--out")
    return p


def run(argv) -> CommandOutcome:
    parser = _parser()
    try:
        args = parser.parse_args(list(argv))
    except UsageError as exc:
        return CommandOutcome(USAGE, f"error: {exc}\n")
    except _HelpShown:
        return CommandOutcome(HOLDS, "")
    try:
        with limits(args.max_states, args.max_positions, args.timeout):
            return args.func(args)
    except BudgetExceeded as exc:
        return CommandOutcome(BUDGET, f"{exc}\n")
    except (UsageError, AutomatonFormatError, ModelFormatError, ValueError) as exc:
        return CommandOutcome(USAGE, f"error: {exc}\n")


def main(argv=None) -> int:
    out = run(sys.argv[1:] if argv is None else argv)
    for path, text in out.documents.items():
        try:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            sys.stderr.write(f"error: cannot write {path}: {exc.strerror}\n")
            return USAGE
    stream = sys.stderr if out.code in (USAGE, BUDGET) else sys.stdout
    stream.write(out.report)
    return out.code


if __name__ == "__main__":
    sys.exit(main())
