"""The safety-automaton criterion for GFM-ness and its witness MCs.

S keeps the productive states whose own automaton is QGFM together with the
residual transitions among them; T keeps all productive states and all
transitions among them.  C is GFM exactly when L(S) = L(T) and S is good for
games.  When the criterion fails, two MC constructions expose the gap: one
with a strict PSyn < PSem gap, one that also keeps PSem at 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .automata import LassoWord, Nbw, SafetyAutomaton, make_complete, make_safety, productive_states, rebase
from .mdp import LabelledMc, compare_on_mc, fmt, lasso_mc, make_mc
from .omega import (EmptyHull, difference_witness, dpw_lasso_from, is_residual_transition,
                    residual_language, safety_hull, safety_is_gfg, safety_language_equal)
from .trees import decide_qgfm
from .verdict import GFM, NOT_GFM, GfmVerdict


@lru_cache(maxsize=4096)
def _state_verdict(C: Nbw, q: int) -> GfmVerdict:
    return decide_qgfm(rebase(C, q))


def qgfm_state_set(C: Nbw) -> frozenset:
    C = make_complete(C)
    return frozenset(q for q in range(C.state_count) if _state_verdict(C, q).holds)


@dataclass(frozen=True)
class SafetyPair:
    S: SafetyAutomaton
    T: SafetyAutomaton
    non_qgfm: tuple          # productive states that are not QGFM
    non_residual: tuple      # (q, symbol, r) among productive states


def build_safety_pair(C: Nbw) -> SafetyPair:
    C = make_complete(C)
    prod = productive_states(C)
    good = qgfm_state_set(C) & prod
    t_edges, s_edges, bad = [], [], []
    for q in sorted(prod):
        for a, sym in enumerate(C.alphabet):
            targets = sorted(C.delta[q][a] & prod)
            if not targets:
                continue
            t_edges.append((q, sym, targets))
            keep = []
            for r in targets:
                if is_residual_transition(C, q, sym, r):
                    if q in good and r in good:
                        keep.append(r)
                else:
                    bad.append((q, sym, r))
            if keep:
                s_edges.append((q, sym, keep))
    n = C.state_count
    T = make_safety(C.alphabet, n, C.initial if C.initial in prod else None, sorted(prod), t_edges)
    S = make_safety(C.alphabet, n, C.initial if C.initial in good else None, sorted(good), s_edges)
    return SafetyPair(S, T, tuple(sorted(prod - good)), tuple(bad))


def check_criterion(C: Nbw) -> bool:
    pair = build_safety_pair(C)
    return safety_language_equal(pair.S, pair.T) and safety_is_gfg(pair.S)[0]


class _ChainBuilder:
    """Assemble an MC from fresh states and embedded copies of other MCs."""

    def __init__(self, alphabet):
        self.alphabet = tuple(alphabet)
        self.labels: list = []
        self.rows: list = []
        self._parts: dict = {}

    def state(self, label) -> int:
        self.labels.append(label)
        self.rows.append(None)
        return len(self.labels) - 1

    def part(self, key, M: LabelledMc) -> int:
        """Embed M once per key; returns the index of its initial state."""
        if key in self._parts:
            return self._parts[key]
        base = len(self.labels)
        for s in range(M.size):
            self.labels.append(M.labels[s])
            self.rows.append({base + t: p for t, p in M.row(s)})
        self._parts[key] = base + M.initial
        return self._parts[key]

    def uniform(self, s: int, targets):
        targets = list(dict.fromkeys(targets))
        self.rows[s] = {t: Fraction(1, len(targets)) for t in targets}

    def build(self, initial: int) -> LabelledMc:
        # renumber so the initial state comes first and unreachable parts vanish
        order = [initial]
        index = {initial: 0}
        i = 0
        while i < len(order):
            for t in sorted(self.rows[order[i]]):
                if t not in index:
                    index[t] = len(order)
                    order.append(t)
            i += 1
        rows = [{index[t]: p for t, p in self.rows[s].items()} for s in order]
        return make_mc(self.alphabet, [self.labels[s] for s in order], 0, rows)


def _transition_word(C: Nbw, t) -> LassoWord:
    q, sym, r = t
    w = difference_witness(residual_language(C, q, sym), rebase(C, r))
    if w is None:
        raise AssertionError(f"transition {t} is residual")
    return w


def _state_witness(C: Nbw, q: int) -> LabelledMc:
    v = _state_verdict(C, q)
    if v.holds:
        raise AssertionError(f"state {q} is QGFM")
    return v.witness


def _require_failure(C: Nbw) -> SafetyPair:
    pair = build_safety_pair(C)
    if safety_language_equal(pair.S, pair.T) and safety_is_gfg(pair.S)[0]:
        raise ValueError("the criterion holds, the automaton is GFM")
    return pair


def _initial_fallback(C: Nbw, pair: SafetyPair) -> LabelledMc:
    # the centre only forces choices after the first step; when the initial
    # state itself is the culprit its own witness is the answer
    if C.initial in pair.non_qgfm:
        return _state_witness(C, C.initial)
    raise AssertionError("no central state yields a gap")


def witness_not_gfm(C: Nbw) -> LabelledMc:
    """Complete graph over one state per symbol, each also moving uniformly to
    a witness for every non-QGFM state and a lasso for every non-residual
    transition.  Verified to show PSyn < PSem."""
    C = make_complete(C)
    pair = _require_failure(C)
    b = _ChainBuilder(C.alphabet)
    central = [b.state(sym) for sym in C.alphabet]
    extra = [b.part(("q", q), _state_witness(C, q)) for q in pair.non_qgfm]
    for t in pair.non_residual:
        w = _transition_word(C, t)
        extra.append(b.part(("w", w), lasso_mc(C.alphabet, w.prefix, w.period)))
    for s in central:
        b.uniform(s, central + extra)
    for s in central:
        M = b.build(s)
        cmp = compare_on_mc(C, M)
        if cmp.psyn < cmp.psem:
            return M
    return _initial_fallback(C, pair)


def witness_not_qgfm(C: Nbw) -> LabelledMc:
    """Central states (σ, h) pair a symbol with a safety-hull state h read
    before σ.  Besides moving on inside the hull, (σ, h) moves to a lasso
    completing σ to an accepted word, to the witness of every non-QGFM state
    reachable by σ from the subset of h, and to a lasso for every
    non-residual transition on σ leaving that subset.  Verified to show
    PSem = 1 and PSyn < 1."""
    C = make_complete(C)
    pair = _require_failure(C)
    try:
        hull = safety_hull(C)
    except EmptyHull:
        raise ValueError("empty language, the automaton is GFM") from None
    H = hull.automaton
    D = hull.dpw
    bad_states = set(pair.non_qgfm)
    by_source: dict = {}
    for t in pair.non_residual:
        by_source.setdefault((t[0], t[1]), []).append(t)

    def successor(h, a):
        ts = H.delta[h][a]
        return next(iter(ts)) if ts else None

    # central states reachable from the hull's initial state, then a fixpoint
    # that drops states with nowhere to go inside the centre
    nodes = []
    seen = set()
    stack = [(a, H.initial) for a in range(len(C.alphabet)) if successor(H.initial, a) is not None]
    for x in stack:
        seen.add(x)
    while stack:
        a, h = stack.pop()
        nodes.append((a, h))
        h2 = successor(h, a)
        for a2 in range(len(C.alphabet)):
            if successor(h2, a2) is not None and (a2, h2) not in seen:
                seen.add((a2, h2))
                stack.append((a2, h2))
    nodes.sort()
    alive = set(nodes)
    changed = True
    while changed:
        changed = False
        for a, h in sorted(alive):
            h2 = successor(h, a)
            if not any((a2, h2) in alive for a2 in range(len(C.alphabet))):
                alive.discard((a, h))
                changed = True

    b = _ChainBuilder(C.alphabet)
    ids = {x: b.state(C.alphabet[x[0]]) for x in sorted(alive)}
    for (a, h), s in ids.items():
        sym = C.alphabet[a]
        h2 = successor(h, a)
        targets = [ids[(a2, h2)] for a2 in range(len(C.alphabet)) if (a2, h2) in ids]
        w = dpw_lasso_from(D, D.trans[hull.dpw_state[h]][a])
        targets.append(b.part(("w", w), lasso_mc(C.alphabet, w.prefix, w.period)))
        R = hull.subset[h]
        reach = set()
        for q in R:
            reach |= C.delta[q][a]
        for q in sorted(reach & bad_states):
            targets.append(b.part(("q", q), _state_witness(C, q)))
        for q in sorted(R):
            for t in by_source.get((q, sym), ()):
                wt = _transition_word(C, t)
                targets.append(b.part(("w", wt), lasso_mc(C.alphabet, wt.prefix, wt.period)))
        b.uniform(s, targets)
    for a in range(len(C.alphabet)):
        x = (a, H.initial)
        if x not in ids:
            continue
        M = b.build(ids[x])
        if compare_on_mc(C, M).qualitative_gap:
            return M
    return _initial_fallback(C, pair)


def decide_gfm(C: Nbw, mode: str = "pipeline") -> GfmVerdict:
    if mode not in ("pipeline", "criterion", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    C = make_complete(C)
    if mode == "pipeline":
        return decide_qgfm(C)
    pair = build_safety_pair(C)
    equal = safety_language_equal(pair.S, pair.T)
    gfg = safety_is_gfg(pair.S)[0]
    diag = {
        "non_qgfm_states": list(pair.non_qgfm),
        "non_residual_transitions": [[q, s, r] for q, s, r in pair.non_residual],
        "languages_equal": equal,
        "s_is_gfg": gfg,
    }
    ok = equal and gfg
    if mode == "criterion":
        if ok:
            return GfmVerdict(GFM, "criterion", None, diag)
        M = witness_not_qgfm(C)
        cmp = compare_on_mc(C, M)
        diag.update({"witness_psem": fmt(cmp.psem), "witness_psyn": fmt(cmp.psyn)})
        return GfmVerdict(NOT_GFM, "criterion", M, diag)
    pipe = decide_qgfm(C)
    if pipe.holds != ok:
        raise AssertionError(f"pipeline says {pipe.decision}, criterion says {'GFM' if ok else 'NOT_GFM'}")
    diag.update(pipe.diagnostics)
    return GfmVerdict(pipe.decision, "both-agree", pipe.witness, diag)
