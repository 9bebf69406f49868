"""A language-equivalent limit-deterministic NBW used as the GFM reference.

The automaton follows the DPW of the input in its initial part and may at any
step jump into a deterministic copy that commits to an even colour e: from
then on a D-transition of colour e is accepting and any larger colour kills
the run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .automata import Nbw, automaton_doc, make_complete, make_nbw
from .omega import determinize, difference_witness

SINK = ("sink",)


@dataclass(frozen=True)
class LimitDeterministicNbw(Nbw):
    initial_part: frozenset = frozenset()
    accepting_part: frozenset = frozenset()
    names: tuple = ()

    def to_doc(self) -> dict:
        doc = automaton_doc(self)
        doc["parts"] = {"initial": sorted(self.initial_part),
                        "accepting": sorted(self.accepting_part)}
        return doc

    def serialize(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True, indent=1) + "\n"


def build_gfm_equivalent(C: Nbw, verify: bool | None = None) -> LimitDeterministicNbw:
    """Build the reference automaton.

    ``verify`` controls the internal language check: True always, False
    never, None (default) only while the reverse inclusion is cheap enough,
    i.e. the result has at most 48 states.
    """
    C = make_complete(C)
    D = determinize(C)
    evens = sorted(c for c in D.colours() if c % 2 == 0)
    k = len(C.alphabet)
    start = ("I", D.initial)
    index = {start: 0}
    order = [start]
    edges = []

    def num(st):
        if st not in index:
            index[st] = len(order)
            order.append(st)
        return index[st]

    i = 0
    while i < len(order):
        st = order[i]
        for a in range(k):
            sym = C.alphabet[a]
            if st == SINK:
                targets = [SINK]
            elif st[0] == "I":
                d = st[1]
                d2 = D.trans[d][a]
                targets = [("I", d2)] + [("A", d2, e, False) for e in evens]
            else:
                _, d, e, _ = st
                c = D.colour[d][a]
                d2 = D.trans[d][a]
                if c > e:
                    targets = [SINK]
                else:
                    targets = [("A", d2, e, c == e)]
            edges.append((i, sym, [num(t) for t in targets]))
        i += 1
    accepting = [index[st] for st in order if st != SINK and st[0] == "A" and st[3]]
    base = make_nbw(C.alphabet, len(order), 0, accepting, edges)
    G = LimitDeterministicNbw(base.alphabet, base.state_count, 0, base.delta, base.accepting,
                              "nbw",
                              frozenset(index[s] for s in order if s != SINK and s[0] == "I"),
                              frozenset(index[s] for s in order if s == SINK or s[0] == "A"),
                              tuple(order))
    if verify or (verify is None and G.state_count <= 48):
        w = difference_witness(G, C) or difference_witness(C, G)
        if w is not None:
            raise AssertionError(f"reference automaton differs from input on {w}")
    elif verify is None:
        if difference_witness(G, C) is not None:
            raise AssertionError("reference automaton accepts a word outside the input language")
    return G


def is_limit_deterministic(A: Nbw) -> bool:
    """Every state reachable from an accepting state has one successor per symbol."""
    seen = set()
    stack = sorted(A.accepting)
    seen.update(stack)
    while stack:
        q = stack.pop()
        for targets in A.delta[q]:
            if len(targets) != 1:
                return False
            for t in targets:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
    return True
