"""Determinization, complementation and language comparison for omega-automata.

The determinizer is a Safra-tree construction with compact node names (names
are assigned in creation order and closed up when nodes die).  It works on
transition-based Büchi acceptance given as bitmasks, so the same code serves
ordinary NBWs and the branch automata of the tree pipeline.  Output colours
follow the max-parity convention: the largest colour seen infinitely often
must be even.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from . import graphs
from .automata import (LassoWord, Nbw, Npw, SafetyAutomaton, accepts_lasso,
                       make_complete, make_safety, rebase)
from .limits import check_states


class EmptyHull(ValueError):
    """The safety hull of an empty-language automaton has no states."""


@dataclass(frozen=True)
class Dpw:
    """Deterministic parity automaton with transition colours."""

    alphabet: tuple[str, ...]
    state_count: int
    initial: int
    trans: tuple[tuple[int, ...], ...]
    colour: tuple[tuple[int, ...], ...]

    is_dpw = True
    kind = "dpw"

    def coloured_edges(self, d: int):
        return [(a, self.trans[d][a], self.colour[d][a]) for a in range(len(self.alphabet))]

    def colours(self) -> set[int]:
        return {c for row in self.colour for c in row}

    def rerooted(self, d: int) -> "Dpw":
        return Dpw(self.alphabet, self.state_count, d, self.trans, self.colour)

    def to_npw(self) -> Npw:
        """State-coloured copy: state (d, c) remembers the colour it was entered with."""
        low = min(self.colours(), default=0)
        index = {(self.initial, low): 0}
        order = [(self.initial, low)]
        rows = []
        k = 0
        while k < len(order):
            d, _ = order[k]
            row = []
            for a in range(len(self.alphabet)):
                key = (self.trans[d][a], self.colour[d][a])
                if key not in index:
                    index[key] = len(order)
                    order.append(key)
                row.append(frozenset([index[key]]))
            rows.append(tuple(row))
            k += 1
        return Npw(self.alphabet, len(order), 0, tuple(rows), tuple(c for _, c in order), True)


# ---------------------------------------------------------------- Safra trees
#
# A tree is a tuple of (parent, label) pairs in name order; the root has
# parent -1, labels are bitmasks over automaton states.  The empty tuple is
# the rejecting sink reached once every run has died.

def _image(mask: int, table) -> int:
    out = 0
    q = 0
    while mask:
        if mask & 1:
            out |= table[q]
        mask >>= 1
        q += 1
    return out


def safra_step(tree: tuple, succ, acc, n: int):
    """One Safra step.  ``succ[q]``/``acc[q]`` are successor masks (all / via
    accepting transitions).  Returns (new tree, max-parity colour)."""
    m = len(tree)
    if m == 0:
        return tree, 1
    parent = [p for p, _ in tree]
    labels = [_image(l, succ) for _, l in tree]
    spawn = [_image(l, acc) for _, l in tree]
    for i in range(m):
        if spawn[i]:
            parent.append(i)
            labels.append(spawn[i])
    total = len(labels)
    children = [[] for _ in range(total)]
    for j in range(1, total):
        children[parent[j]].append(j)

    # horizontal merge: a state stays only in its oldest branch
    order = []
    stack = [0]
    while stack:
        i = stack.pop()
        order.append(i)
        stack.extend(reversed(children[i]))
    for i in order:
        seen = 0
        for c in children[i]:
            labels[c] &= labels[i] & ~seen
            seen |= labels[c]

    alive = [labels[i] != 0 for i in range(total)]
    green = []
    for i in order:
        if not alive[i]:
            continue
        kids = [c for c in children[i] if alive[c]]
        if kids:
            union = 0
            for c in kids:
                union |= labels[c]
            if union == labels[i]:
                if i < m:
                    green.append(i)
                stack = list(kids)
                while stack:
                    c = stack.pop()
                    alive[c] = False
                    stack.extend(children[c])
    removed = [i for i in range(m) if not alive[i]]
    e = min(removed) if removed else None
    f = min(green) if green else None
    if f is not None and (e is None or f < e):
        cmin = 2 * (f + 1)
    elif e is not None:
        cmin = 2 * (e + 1) - 1
    else:
        cmin = 2 * n + 1
    newname = {}
    out = []
    for i in range(total):
        if alive[i]:
            newname[i] = len(out)
            out.append((newname[parent[i]] if i else -1, labels[i]))
    return tuple(out), 2 * n + 2 - cmin


def safra_initial(init_mask: int) -> tuple:
    return ((-1, init_mask),) if init_mask else ()


def tree_states(tree: tuple) -> int:
    """Mask of automaton states alive in a Safra tree (the root label)."""
    return tree[0][1] if tree else 0


def _nbw_masks(A: Nbw):
    succ = []
    acc = []
    fmask = 0
    for q in A.accepting:
        fmask |= 1 << q
    for a in range(len(A.alphabet)):
        s = []
        for q in range(A.state_count):
            m = 0
            for t in A.delta[q][a]:
                m |= 1 << t
            s.append(m)
        succ.append(tuple(s))
        acc.append(tuple(m & fmask for m in s))
    return succ, acc


@lru_cache(maxsize=512)
def determinize(A: Nbw) -> Dpw:
    """Language-equivalent DPW.  Incomplete inputs are handled (dead runs
    end in the empty tree)."""
    succ, acc = _nbw_masks(A)
    n = A.state_count
    k = len(A.alphabet)
    start = safra_initial(1 << A.initial)
    index = {start: 0}
    order = [start]
    trans = []
    colour = []
    i = 0
    while i < len(order):
        tree = order[i]
        trow = []
        crow = []
        for a in range(k):
            nxt, c = safra_step(tree, succ[a], acc[a], n)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                check_states(len(order), "determinization")
            trow.append(index[nxt])
            crow.append(c)
        trans.append(tuple(trow))
        colour.append(tuple(crow))
        i += 1
    return Dpw(A.alphabet, len(order), 0, tuple(trans), tuple(colour))


def complement(D: Dpw) -> Dpw:
    return Dpw(D.alphabet, D.state_count, D.initial, D.trans,
               tuple(tuple(c + 1 for c in row) for row in D.colour))


# ---------------------------------------------------------------- comparison

def _edges_fn(A) -> Callable:
    return A.coloured_edges


def _as_dpw(B) -> Dpw:
    if isinstance(B, Dpw):
        return B
    if isinstance(B, Npw):
        raise TypeError("parity automata must be deterministic DPWs here")
    return determinize(B)


def difference_witness(A, B) -> LassoWord | None:
    """A lasso in L(A) minus L(B), or None when L(A) is contained in L(B).

    A may be nondeterministic (searched directly); B is determinized and
    complemented.
    """
    if list(A.alphabet) != list(B.alphabet):
        raise ValueError("alphabets differ")
    comp = complement(_as_dpw(B))
    a_edges = _edges_fn(A)

    def edges_of(node):
        x, d = node
        out = []
        for a, y, c in a_edges(x):
            out.append((a, (y, comp.trans[d][a]), (c, comp.colour[d][a])))
        return out

    found = graphs.accepting_lasso((A.initial, comp.initial), edges_of)
    if found is None:
        return None
    prefix, cycle = found
    w = LassoWord(tuple(A.alphabet[i] for i in prefix), tuple(A.alphabet[i] for i in cycle))
    if not accepts_lasso(A, w) or accepts_lasso(B, w):
        raise AssertionError(f"difference witness {w} failed verification")
    return w


def language_equal(A, B) -> bool:
    return difference_witness(A, B) is None and difference_witness(B, A) is None


def residual_language(C: Nbw, q: int, symbol: str) -> Dpw:
    """DPW for symbol^{-1} L(C_q): C_q determinized and rerooted after the symbol."""
    D = determinize(rebase(make_complete(C), q))
    return D.rerooted(D.trans[D.initial][C.letter(symbol)])


def is_residual_transition(C: Nbw, q: int, symbol: str, r: int) -> bool:
    if r not in C.succ(q, symbol):
        raise ValueError(f"({q}, {symbol}, {r}) is not a transition")
    C = make_complete(C)
    res = residual_language(C, q, symbol)
    Cr = rebase(C, r)
    return difference_witness(Cr, res) is None and difference_witness(res, Cr) is None


# ---------------------------------------------------------------- safety

def safety_core(S: SafetyAutomaton) -> frozenset:
    """Member states from which an infinite run exists."""
    live = set(S.states)
    changed = True
    while changed:
        changed = False
        for q in sorted(live):
            if not any(ts & live for ts in S.delta[q]):
                live.discard(q)
                changed = True
    return frozenset(live)


def _mask_succ(S: SafetyAutomaton, P: frozenset, a: int, live: frozenset) -> frozenset:
    out = set()
    for q in P:
        out |= S.delta[q][a]
    return frozenset(out & live)


def safety_language_equal(S: SafetyAutomaton, T: SafetyAutomaton) -> bool:
    """Equality of safety languages by a paired subset construction."""
    if list(S.alphabet) != list(T.alphabet):
        raise ValueError("alphabets differ")
    ls, lt = safety_core(S), safety_core(T)
    ps = frozenset([S.initial]) & ls if S.initial is not None else frozenset()
    pt = frozenset([T.initial]) & lt if T.initial is not None else frozenset()
    start = (ps, pt)
    seen = {start}
    queue = deque([start])
    while queue:
        ps, pt = queue.popleft()
        if bool(ps) != bool(pt):
            return False
        if not ps:
            continue
        for a in range(len(S.alphabet)):
            nxt = (_mask_succ(S, ps, a, ls), _mask_succ(T, pt, a, lt))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return True


def safety_is_gfg(S: SafetyAutomaton):
    """Solve the letter game.  Returns (is_gfg, pruning) where the pruning maps
    (state, subset, symbol) to the chosen successor on winning positions."""
    live = safety_core(S)
    if S.initial is None or S.initial not in live:
        return True, {}
    k = len(S.alphabet)
    start = (S.initial, frozenset([S.initial]))
    positions = [start]
    seen = {start}
    moves = {}
    i = 0
    while i < len(positions):
        q, P = positions[i]
        i += 1
        for a in range(k):
            P2 = _mask_succ(S, P, a, live)
            if not P2:
                continue
            opts = sorted(S.delta[q][a] & live)
            moves[(q, P, a)] = [(t, P2) for t in opts]
            for pos in moves[(q, P, a)]:
                if pos not in seen:
                    seen.add(pos)
                    positions.append(pos)
    losing: set = set()
    changed = True
    while changed:
        changed = False
        for pos in positions:
            if pos in losing:
                continue
            q, P = pos
            for a in range(k):
                opts = moves.get((q, P, a))
                if opts is None:
                    continue
                if all(o in losing for o in opts):
                    losing.add(pos)
                    changed = True
                    break
    if start in losing:
        return False, None
    pruning = {}
    for q, P in positions:
        if (q, P) in losing:
            continue
        for a in range(k):
            opts = moves.get((q, P, a))
            if opts:
                pruning[(q, P, S.alphabet[a])] = next(o[0] for o in opts if o not in losing)
    return True, pruning


def pruned_automaton(S: SafetyAutomaton, pruning: dict) -> SafetyAutomaton:
    """The deterministic safety automaton induced by a letter-game strategy."""
    live = safety_core(S)
    if S.initial is None or S.initial not in live:
        return make_safety(S.alphabet, 1, None, [], [])
    start = (S.initial, frozenset([S.initial]))
    index = {start: 0}
    order = [start]
    edges = []
    i = 0
    while i < len(order):
        q, P = order[i]
        for a, sym in enumerate(S.alphabet):
            t = pruning.get((q, P, sym))
            if t is None:
                continue
            nxt = (t, _mask_succ(S, P, a, live))
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            edges.append((i, sym, [index[nxt]]))
        i += 1
    return make_safety(S.alphabet, len(order), 0, range(len(order)), edges)


def dpw_productive(D: Dpw) -> set[int]:
    def edges_of(d):
        return [(a, t, (c,)) for a, t, c in D.coloured_edges(d)]
    order, edges = graphs.explore(range(D.state_count), edges_of)
    return graphs.backward_closure(order, edges, graphs.good_nodes(order, edges))


def dpw_lasso_from(D: Dpw, d: int) -> LassoWord | None:
    """An accepted lasso for the DPW started in state d."""
    def edges_of(x):
        return [(a, t, (c,)) for a, t, c in D.coloured_edges(x)]
    found = graphs.accepting_lasso(d, edges_of)
    if found is None:
        return None
    prefix, cycle = found
    return LassoWord(tuple(D.alphabet[i] for i in prefix), tuple(D.alphabet[i] for i in cycle))


@dataclass(frozen=True)
class SafetyHull:
    """Deterministic safety automaton of extendable prefixes.

    Hull state i stands for the DPW state ``dpw_state[i]`` paired with the set
    ``subset[i]`` of candidate states reachable on the same prefix.
    """

    automaton: SafetyAutomaton
    dpw: Dpw
    dpw_state: tuple[int, ...]
    subset: tuple[frozenset, ...]


def safety_hull(C: Nbw) -> SafetyHull:
    C = make_complete(C)
    D = determinize(C)
    good = dpw_productive(D)
    if D.initial not in good:
        raise EmptyHull("language is empty, the safety hull has no states")
    start = (D.initial, frozenset([C.initial]))
    index = {start: 0}
    order = [start]
    edges = []
    i = 0
    while i < len(order):
        d, R = order[i]
        for a, sym in enumerate(C.alphabet):
            d2 = D.trans[d][a]
            if d2 not in good:
                continue
            R2 = frozenset(t for q in R for t in C.delta[q][a])
            nxt = (d2, R2)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                check_states(len(order), "safety hull")
            edges.append((i, sym, [index[nxt]]))
        i += 1
    S = make_safety(C.alphabet, len(order), 0, range(len(order)), edges)
    return SafetyHull(S, D, tuple(d for d, _ in order), tuple(R for _, R in order))
