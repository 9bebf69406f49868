"""Tree automata for the qualitative GFM check and the emptiness game.

Two layers live here.  The stage automata are alternating tree automata with
explicit positive Boolean transition formulas; they exist so the chain of
constructions can be checked on small regular trees with ``accepts_tree``.
The decision path skips straight to the deterministic end of that chain: the
branch automaton of the strategy-annotated candidate is determinized, paired
with the reference automaton's deterministic tree automaton, and the
emptiness of the product is decided by a parity game whose positions are
generated on demand.

Direction sets are the candidate states plus the extra direction ``STAR``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .automata import Nbw, make_complete, productive_states
from .games import ACCEPT, REJECT, ParityGame, solve_parity_game
from .graphs import accepting_lasso
from .limits import check_deadline, check_positions, check_states
from .mdp import LabelledMc, compare_on_mc, fmt, make_mc
from .omega import _image, safra_initial, safra_step
from .reference import LimitDeterministicNbw, build_gfm_equivalent
from .verdict import GFM, NOT_GFM, GfmVerdict

STAR = "*"
BOX = "box"
DIAMOND = "diamond"


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Atom:
    """``op`` is BOX, DIAMOND, ("boxtimes", j), ("boxtimes_to", j, direction)
    or ("dir", direction)."""
    op: object
    state: object
    colour: int


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


TRUE = And(())
FALSE = Or(())


def conj(parts) -> object:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts) -> object:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else Or(parts)


def _op_str(op) -> str:
    if op == BOX:
        return "□"
    if op == DIAMOND:
        return "◇"
    if op[0] == "boxtimes":
        return f"⊠{op[1]}"
    if op[0] == "boxtimes_to":
        return f"⊠{op[1]}^{op[2]}"
    return str(op[1])


def formula_str(f) -> str:
    if isinstance(f, Atom):
        return f"({_op_str(f.op)},{f.state},{f.colour})"
    if f == TRUE:
        return "true"
    if f == FALSE:
        return "false"
    sep = " ∧ " if isinstance(f, And) else " ∨ "
    return "(" + sep.join(formula_str(p) for p in f.parts) + ")"


def atoms(f):
    if isinstance(f, Atom):
        yield f
    else:
        for p in f.parts:
            yield from atoms(p)


# ---------------------------------------------------------------- trees

@dataclass(frozen=True)
class RegularTree:
    """A finite rooted graph whose unravelling is the tree.

    ``succ[v]`` is a tuple of (direction, child) pairs with distinct
    directions; ``labels[v]`` is the node label.
    """
    labels: tuple
    succ: tuple
    root: int = 0

    def __post_init__(self):
        if len(self.labels) != len(self.succ):
            raise ValueError("labels and successors differ in length")
        for v, out in enumerate(self.succ):
            if not out:
                raise ValueError(f"node {v} has no successor")
            dirs = [d for d, _ in out]
            if len(set(dirs)) != len(dirs):
                raise ValueError(f"node {v} repeats a direction")

    def directions(self, v: int) -> list:
        return [d for d, _ in self.succ[v]]

    def child(self, v: int, direction):
        for d, c in self.succ[v]:
            if d == direction:
                return c
        return None


def tree_of_mc(M: LabelledMc) -> RegularTree:
    """The transition graph of an MC, with target states as directions."""
    succ = tuple(tuple((t, t) for t, _ in M.row(s)) for s in range(M.size))
    return RegularTree(tuple(M.labels), succ, M.initial)


def _dir_key(d):
    return (1, "") if d == STAR else (0, repr(d))


def widen(t: RegularTree, extra) -> RegularTree:
    """Every direction υ becomes the directions (υ, y) for y in ``extra``."""
    succ = tuple(tuple(((d, y), c) for d, c in out for y in extra) for out in t.succ)
    return RegularTree(t.labels, succ, t.root)


def prune(t: RegularTree, state_count: int) -> RegularTree:
    """Keep one direction (υ_q, q) per q in the extended state set and rename it q.

    The choice follows the strategy annotation in the label (σ, f_C, f_G);
    unconstrained choices take the least available υ.
    """
    dirs = list(range(state_count)) + [STAR]
    succ = []
    for v, out in enumerate(t.succ):
        _, fc, fg = t.labels[v]
        by_y: dict = {}
        for (u, y), c in out:
            by_y.setdefault(y, {})[u] = c
        row = []
        for y in dirs:
            options = by_y.get(y, {})
            want = fg[0] if y == STAR else fc[y]
            if want != BOX and want in options:
                u = want
            else:
                u = min(options, key=_dir_key)
            row.append((y, options[u]))
        succ.append(tuple(row))
    return RegularTree(t.labels, tuple(succ), t.root)


def relabel(t: RegularTree) -> RegularTree:
    """(σ, f_C, (c, q')) becomes (σ, f'_C, q') with directions replaced by DIAMOND."""
    labels = tuple((s, tuple(BOX if x == BOX else DIAMOND for x in fc), fg[1])
                   for s, fc, fg in t.labels)
    return RegularTree(labels, t.succ, t.root)


# ---------------------------------------------------------------- stages

STAGES = ("T_C", "dual_T_C", "T_G", "U_C", "U_C_w", "U_C_p", "U_C_prime",
          "D_G", "D_G_w", "D_G_p", "D_G_prime")


@dataclass(frozen=True)
class AlternatingTreeAutomaton:
    name: str
    kind: str
    states: tuple
    initial: object
    colours: tuple
    delta: Callable = field(compare=False)
    symbol_of: Callable = field(compare=False)

    def transition(self, q, letter):
        return self.delta(q, letter)


def _symbol(letter):
    return letter if isinstance(letter, str) else letter[0]


def build_stage(C: Nbw, G: Nbw | None, stage: str) -> AlternatingTreeAutomaton:
    """Instantiate one stage.  Letters are σ for the T stages, (σ, f_C, f_G)
    for the strategy-annotated stages and (σ, f'_C, q') for the primed ones;
    ``f_C``/``f'_C`` are tuples indexed by candidate state."""
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    if not C.is_complete:
        raise ValueError("candidate automaton must be complete")
    if stage.endswith("G") or "_G_" in stage:
        if G is None:
            raise ValueError(f"stage {stage} needs the reference automaton")
    F = C.accepting

    def succ_c(q, sym):
        return sorted(C.succ(q, sym))

    if stage == "T_C":
        def delta(q, s):
            return disj([Atom(BOX, r, 2) if r in F else conj([Atom(BOX, r, 2), Atom(DIAMOND, r, 1)])
                         for r in succ_c(q, s)])
        return _stage(stage, "ABS", C, (1, 2), delta)
    if stage == "dual_T_C":
        def delta(q, s):
            return conj([Atom(DIAMOND, r, 1) if r in F else disj([Atom(DIAMOND, r, 1), Atom(BOX, r, 0)])
                         for r in succ_c(q, s)])
        return _stage(stage, "ACS", C, (0, 1), delta)
    if stage in ("U_C", "U_C_w", "U_C_p"):
        def direction(v, r):
            return {"U_C": v, "U_C_w": (v, r), "U_C_p": r}[stage]

        def delta(q, letter):
            s, fc, _ = letter
            return conj([Atom(BOX, r, 0) if fc[r] == BOX else Atom(("dir", direction(fc[r], r)), r, 1)
                         for r in succ_c(q, s)])
        return _stage(stage, "UCT", C, (0, 1), delta)
    if stage == "U_C_prime":
        def delta(q, letter):
            s, fc, _ = letter
            return conj([Atom(BOX, r, 0) if fc[r] == BOX else Atom(("dir", r), r, 1)
                         for r in succ_c(q, s)])
        return _stage(stage, "UCT", C, (0, 1), delta)

    FG = G.accepting
    if stage == "T_G":
        def delta(q, s):
            return disj([Atom(BOX, r, 2) if r in FG else Atom(("boxtimes", 1), r, 2)
                         for r in sorted(G.succ(q, s))])
        return _stage(stage, "NBS", G, (1, 2), delta)

    def ref_delta(q, letter):
        s = letter[0]
        if stage == "D_G_prime":
            r = letter[2]
            c = BOX if r in FG else STAR
        else:
            c, r = letter[2]
        if r not in G.succ(q, s):
            return FALSE
        if c == BOX:
            return Atom(BOX, r, 2)
        target = {"D_G": c, "D_G_w": (c, STAR), "D_G_p": STAR, "D_G_prime": STAR}[stage]
        return Atom(("boxtimes_to", 1, target), r, 2)
    return _stage(stage, "DBN", G, (1, 2), ref_delta)


def _stage(name, kind, A, colours, delta):
    return AlternatingTreeAutomaton(name, kind, tuple(range(A.state_count)), A.initial,
                                    colours, delta, _symbol)


def stage_doc(A: AlternatingTreeAutomaton, letters) -> dict:
    rows = []
    for q in A.states:
        for letter in letters:
            rows.append({"state": q, "letter": repr(letter),
                         "formula": formula_str(A.transition(q, letter))})
    return {"name": A.name, "kind": A.kind, "initial": A.initial,
            "colours": list(A.colours), "states": list(A.states), "transitions": rows}


def dump_stage(A: AlternatingTreeAutomaton, letters) -> str:
    return json.dumps(stage_doc(A, letters), indent=1, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------- membership

def _expand_atom(atom: Atom, children) -> object:
    """Unfold an atom over the (direction, child) pairs of a node into a
    formula whose leaves are (child, state, colour) triples."""
    op, q, c = atom.op, atom.state, atom.colour
    if op == BOX:
        return conj([("go", ch, q, c) for _, ch in children])
    if op == DIAMOND:
        return disj([("go", ch, q, c) for _, ch in children])
    if op[0] == "boxtimes":
        j = op[1]
        return disj([conj([("go", ch, q, j if d == d1 else c) for d, ch in children])
                     for d1, _ in children])
    if op[0] == "boxtimes_to":
        j, target = op[1], op[2]
        return conj([("go", ch, q, j if d == target else c) for d, ch in children])
    target = op[1]
    for d, ch in children:
        if d == target:
            return ("go", ch, q, c)
    return TRUE


def acceptance_game(A: AlternatingTreeAutomaton, t: RegularTree) -> ParityGame:
    """The membership game of A on the unravelling of t.

    Formula positions have priority 0; a position reached through an atom
    carries the atom's colour.  Accept resolves disjunctions.
    """
    game = ParityGame()
    index: dict = {}
    true_v = game.add(ACCEPT, 0, "true")
    game.succ[true_v].append(true_v)
    false_v = game.add(REJECT, 1, "false")
    game.succ[false_v].append(false_v)
    work = []

    def state_pos(v, q, c):
        key = (v, q, c)
        if key not in index:
            index[key] = game.add(ACCEPT, c, ("state", v, q, c))
            work.append(key)
        return index[key]

    def build(f):
        if isinstance(f, tuple) and f and f[0] == "go":
            return state_pos(f[1], f[2], f[3])
        if f == TRUE:
            return true_v
        if f == FALSE:
            return false_v
        if isinstance(f, Atom):
            raise AssertionError("atoms must be expanded first")
        owner = REJECT if isinstance(f, And) else ACCEPT
        u = game.add(owner, 0, type(f).__name__)
        game.succ[u] = [build(p) for p in f.parts]
        return u

    def expand(f, children):
        if isinstance(f, Atom):
            return _expand_atom(f, children)
        return type(f)(tuple(expand(p, children) for p in f.parts))

    game.initial = state_pos(t.root, A.initial, 0)
    while work:
        key = work.pop()
        v, q, _ = key
        f = A.transition(q, t.labels[v])
        game.succ[index[key]] = [build(expand(f, t.succ[v]))]
    return game


def accepts_tree(A: AlternatingTreeAutomaton, t) -> bool:
    if isinstance(t, LabelledMc):
        t = tree_of_mc(t)
    game = acceptance_game(A, t)
    winner, _ = solve_parity_game(game)
    return winner[game.initial] == ACCEPT


# ---------------------------------------------------------------- deterministic side

class CandidateDpt:
    """The deterministic parity tree automaton for the primed candidate UCT.

    Each branch is read by the dual of the branch UCW: an NBW over
    (σ, box set, direction) whose runs follow the candidate restricted to
    ``live`` states, keep a successor r when r is boxed or is the direction
    taken, and accept when r is reached unboxed through its own direction.
    Its Safra determinization, with every colour raised by one, is replayed
    along each direction.
    """

    def __init__(self, C: Nbw, live=None):
        C = make_complete(C)
        self.C = C
        self.n = C.state_count
        live_mask = (1 << self.n) - 1 if live is None else sum(1 << q for q in live)
        self.live = live_mask
        self.delta = [[sum(1 << r for r in C.delta[q][a]) & live_mask for q in range(self.n)]
                      for a in range(len(C.alphabet))]
        self.initial = safra_initial((1 << C.initial) & live_mask)
        self._cache: dict = {}
        self._seen = {self.initial}

    def root(self, tree) -> int:
        return tree[0][1] if tree else 0

    def move(self, tree, a: int, box: int, d):
        """Successor tree and colour for letter index a, box mask and
        direction d (a state or STAR)."""
        image = _image(self.root(tree), self.delta[a])
        box &= image
        dbit = 0 if d == STAR else (1 << d) & image & ~box
        key = (tree, a, box, dbit)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        table = self.delta[a]
        succ = [m & (box | dbit) for m in table]
        acc = [m & dbit for m in table]
        new, colour = safra_step(tree, succ, acc, self.n)
        if new not in self._seen:
            self._seen.add(new)
            check_states(len(self._seen), "candidate tree determinization")
        res = (new, colour + 1)
        self._cache[key] = res
        return res

    def box_mask(self, fc) -> int:
        return sum(1 << q for q in range(self.n) if fc[q] == BOX)

    def step(self, state, label, direction):
        s, fc, _ = label
        return self.move(state, self.C.letter(s), self.box_mask(fc), direction)


class ReferenceDbn:
    """Deterministic Büchi tree automaton of the reference automaton with its
    strategy made explicit: the label names the next state, which must be a
    successor of the current one."""

    def __init__(self, G: Nbw):
        self.G = G
        self.initial = G.initial

    def move(self, qg: int, a: int, nxt: int, d):
        if nxt not in self.G.delta[qg][a]:
            return None
        return nxt, 2 if (nxt in self.G.accepting or d != STAR) else 1

    def step(self, state, label, direction):
        return self.move(state, self.G.letter(label[0]), label[2], direction)


class IntersectionDpt:
    """Product with colour memory: while the reference side is not accepting
    the memory keeps the largest candidate colour; an accepting reference
    step emits the memory and restarts it."""

    def __init__(self, dc: CandidateDpt, dg: ReferenceDbn, memory: int = 2):
        self.dc = dc
        self.dg = dg
        self.initial = (dc.initial, dg.initial, memory)

    @staticmethod
    def combine(i: int, ic: int, ig: int):
        if ig == 1:
            return max(i, ic), 1
        return ic, i

    def move(self, state, a, box, nxt, d):
        tc, qg, i = state
        g = self.dg.move(qg, a, nxt, d)
        if g is None:
            return None
        tc2, ic = self.dc.move(tc, a, box, d)
        i2, j = self.combine(i, ic, g[1])
        return (tc2, g[0], i2), j

    def step(self, state, label, direction):
        s, fc, nxt = label
        return self.move(state, self.dc.C.letter(s), self.dc.box_mask(fc), nxt, direction)


def build_dc(C: Nbw, G: Nbw | None = None, live=None) -> CandidateDpt:
    return CandidateDpt(C, live)


def build_reference_dbn(G: Nbw) -> ReferenceDbn:
    return ReferenceDbn(G)


def build_intersection(dc: CandidateDpt, dg: ReferenceDbn) -> IntersectionDpt:
    return IntersectionDpt(dc, dg)


def deterministic_accepts(D, t: RegularTree) -> bool:
    """Run a deterministic tree automaton on the tree graph: accept iff no
    transition is invalid and no reachable cycle has an odd top colour."""
    start = (t.root, D.initial)
    bad = []

    def edges_of(node):
        v, q = node
        out = []
        for d, ch in t.succ[v]:
            res = D.step(q, t.labels[v], d)
            if res is None:
                bad.append(node)
                continue
            out.append((d, (ch, res[0]), (res[1] + 1,)))
        return out

    lasso = accepting_lasso(start, edges_of)
    return not bad and lasso is None


# ---------------------------------------------------------------- emptiness game

@dataclass
class EmptinessGame(ParityGame):
    candidate: Nbw | None = None
    reference: Nbw | None = None


def _submasks(mask: int):
    subs = [0]
    bits = [1 << i for i in range(mask.bit_length()) if mask >> i & 1]
    for b in bits:
        subs += [s | b for s in subs]
    return sorted(subs)


def build_emptiness_game(C: Nbw, G: Nbw) -> EmptinessGame:
    """Accept positions hold (candidate tree, reference state, memory, arrival
    colour) and pick a letter (σ, box set, next reference state); reject
    positions pick a direction.  Only productive candidate states are
    tracked, unproductive ones are boxed implicitly, and accepting states are
    never boxed."""
    C = make_complete(C)
    live = productive_states(C)
    dc = CandidateDpt(C, live)
    dg = ReferenceDbn(G)
    prod = IntersectionDpt(dc, dg)
    n = C.state_count
    f_mask = sum(1 << q for q in C.accepting)
    game = EmptinessGame(candidate=C, reference=G)
    a_index: dict = {}
    r_index: dict = {}
    work = deque()

    def a_pos(state, j):
        key = (state, j)
        v = a_index.get(key)
        if v is None:
            v = game.add(ACCEPT, j, ("A",) + key)
            a_index[key] = v
            work.append(v)
            if len(game) % 1024 == 0:
                check_positions(len(game), "emptiness game")
                check_deadline("emptiness game")
        return v

    game.initial = a_pos(prod.initial, 0)
    while work:
        v = work.popleft()
        state, _ = game.info[v][1], game.info[v][2]
        tc, qg, _ = state
        root = dc.root(tc)
        moves = []
        for a, sym in enumerate(C.alphabet):
            image = _image(root, dc.delta[a])
            for box in _submasks(image & ~f_mask):
                diamonds = image & ~box
                dirs = [q for q in range(n) if diamonds >> q & 1]
                others = [q for q in range(n) if not diamonds >> q & 1]
                if others:
                    dirs.append(others[0])
                dirs.append(STAR)
                for nxt in sorted(G.delta[qg][a]):
                    rkey = (state, a, box, nxt)
                    r = r_index.get(rkey)
                    if r is None:
                        r = game.add(REJECT, 0, ("R", state, sym, box, nxt))
                        r_index[rkey] = r
                        targets = []
                        for d in dirs:
                            state2, j = prod.move(state, a, box, nxt, d)
                            u = a_pos(state2, j)
                            if u not in targets:
                                targets.append(u)
                        game.succ[r] = targets
                    moves.append(r)
        if not moves:
            # no letter keeps the reference run alive
            dead = game.add(REJECT, 1, ("dead",))
            game.succ[dead] = [dead]
            moves.append(dead)
        game.succ[v] = moves
    check_positions(len(game), "emptiness game")
    return game


def extract_witness_mc(strategy: dict, game: EmptinessGame) -> LabelledMc:
    """Turn accept's winning strategy into a labelled MC and verify it."""
    C = game.candidate
    if game.initial not in strategy:
        raise ValueError("accept does not win the emptiness game")
    index = {game.initial: 0}
    order = [game.initial]
    labels = []
    rows = []
    i = 0
    while i < len(order):
        v = order[i]
        r = strategy.get(v)
        if r is None or game.info[r][0] != "R":
            raise ValueError("strategy leaves accept's winning region")
        labels.append(game.info[r][2])
        succ = game.succ[r]
        for u in succ:
            if u not in index:
                index[u] = len(order)
                order.append(u)
        p = Fraction(1, len(succ))
        rows.append({index[u]: p for u in succ})
        i += 1
    M = make_mc(C.alphabet, labels, 0, rows)
    cmp = compare_on_mc(C, M)
    if not cmp.qualitative_gap:
        raise AssertionError(f"witness fails verification: psem={fmt(cmp.psem)} psyn={fmt(cmp.psyn)}")
    return M


def decide_qgfm(C: Nbw, G: LimitDeterministicNbw | None = None) -> GfmVerdict:
    """QGFM holds iff the emptiness game is won by reject."""
    C = make_complete(C)
    if C.initial not in productive_states(C):
        return GfmVerdict(GFM, "pipeline", None, {"empty_language": True})
    if G is None:
        G = build_gfm_equivalent(C)
    game = build_emptiness_game(C, G)
    winner, strategy = solve_parity_game(game)
    diag = {"reference_states": G.state_count, "game_positions": len(game)}
    if winner[game.initial] == REJECT:
        return GfmVerdict(GFM, "pipeline", None, diag)
    M = extract_witness_mc(strategy, game)
    cmp = compare_on_mc(C, M)
    diag.update({"witness_psem": fmt(cmp.psem), "witness_psyn": fmt(cmp.psyn)})
    return GfmVerdict(NOT_GFM, "pipeline", M, diag)
