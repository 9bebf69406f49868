"""Instance factories: the dollar extension, the fork construction, the
running example and seeded random automata and chains.

Ground-truth tags never come from the decision procedures; the fork tag is
read off universality (subset construction) and emptiness (reachability) of
the input NFA.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .automata import Nbw, Nfa, automaton_doc, make_nbw
from .mdp import LabelledMc, lasso_mc, make_mc, model_doc

DOLLAR = "$"
GFM_TAG = "GFM"
NOT_GFM_TAG = "NOT_GFM"
UNKNOWN_TAG = "UNKNOWN"


@dataclass
class LabelledInstance:
    kind: str
    automaton: Nbw | None = None
    model: LabelledMc | None = None
    tag: str = UNKNOWN_TAG
    provenance: dict = field(default_factory=dict)

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "automaton": automaton_doc(self.automaton) if self.automaton is not None else None,
            "model": model_doc(self.model) if self.model is not None else None,
            "tag": self.tag,
            "provenance": self.provenance,
        }


def _require_complete(A: Nbw):
    if not A.is_complete:
        raise ValueError("input automaton must be complete")
    if DOLLAR in A.alphabet:
        raise ValueError(f"alphabet already contains {DOLLAR!r}")


def dollar_extend(A: Nfa) -> Nbw:
    """Add the letter $ and a fresh accepting state f (numbered last).

    $ leads from final states to f and from the others back to the initial
    state; f behaves like the initial state on every letter.
    """
    _require_complete(A)
    n = A.state_count
    f = n
    alphabet = tuple(A.alphabet) + (DOLLAR,)
    edges = []
    for q in range(n):
        for a, sym in enumerate(A.alphabet):
            edges.append((q, sym, sorted(A.delta[q][a])))
        edges.append((q, DOLLAR, [f] if q in A.accepting else [A.initial]))
    for sym in alphabet:
        if sym == DOLLAR:
            edges.append((f, sym, [f] if A.initial in A.accepting else [A.initial]))
        else:
            edges.append((f, sym, sorted(A.delta[A.initial][A.letter(sym)])))
    return make_nbw(alphabet, n + 1, A.initial, [f], edges)


def universal_nfa(alphabet) -> Nfa:
    return make_nbw(alphabet, 1, 0, [0], [(0, s, [0]) for s in alphabet], kind="nfa")


def is_universal(A: Nfa) -> bool:
    """Subset construction: every reachable subset must contain a final state."""
    start = frozenset([A.initial])
    seen = {start}
    stack = [start]
    while stack:
        P = stack.pop()
        if not P & A.accepting:
            return False
        for a in range(len(A.alphabet)):
            nxt = frozenset(t for q in P for t in A.delta[q][a])
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return True


def is_empty(A: Nfa) -> bool:
    """No final state is reachable."""
    return not (A.reachable() & A.accepting)


def fork_of(A: Nfa) -> Nbw:
    """fork(A_f).  States: those of A_f (f last), then the initial and final
    state of the fixed universal side, then the fork state (initial) and the
    two branch states.  The second branch state only moves on $."""
    Af = dollar_extend(A)
    Bf = dollar_extend(universal_nfa(A.alphabet))
    m = Af.state_count
    b0, bf = m, m + 1
    q_fork, q_a, q_b = m + 2, m + 3, m + 4
    edges = list(Af.edges())
    for q, sym, rs in Bf.edges():
        edges.append((q + m, sym, [r + m for r in rs]))
    for sym in Af.alphabet:
        edges.append((q_fork, sym, [q_a, q_b]))
        edges.append((q_a, sym, [Af.initial]))
    edges.append((q_b, DOLLAR, [b0]))
    return make_nbw(Af.alphabet, m + 5, q_fork, [m - 1, bf], edges)


def fork_instance(A: Nfa) -> LabelledInstance:
    """The tag is GFM for universal A and also for empty L(A): then only the
    universal side accepts and committing to it after one letter is optimal."""
    universal = is_universal(A)
    empty = is_empty(A)
    return LabelledInstance("nbw", fork_of(A), None, GFM_TAG if universal or empty else NOT_GFM_TAG,
                            {"construction": "fork", "nfa": automaton_doc(A),
                             "universal": universal, "empty": empty,
                             "tag_source": "subset-construction universality and reachability emptiness"})


def dollar_instance(A: Nfa) -> LabelledInstance:
    return LabelledInstance("nbw", dollar_extend(A), None, GFM_TAG,
                            {"construction": "dollar", "nfa": automaton_doc(A),
                             "tag_source": "every dollar extension of a complete NFA is GFM"})


def fork_witness_mc(w_a: str, w_b: str, alphabet) -> LabelledMc:
    """Emit a, then a or $ (1/2 each), then with 1/2 each repeat w_a$ or w_b$ forever."""
    alphabet = tuple(alphabet)
    for w in (w_a, w_b):
        if DOLLAR in w or any(c not in alphabet for c in w):
            raise ValueError(f"word {w!r} must use letters of {alphabet} other than $")
    if "a" not in alphabet or DOLLAR not in alphabet:
        raise ValueError("alphabet must contain 'a' and '$'")
    labels = ["a", "a", DOLLAR]
    rows: list = [{1: Fraction(1, 2), 2: Fraction(1, 2)}, None, None]
    starts = []
    for w in (w_a, w_b):
        cycle = list(w) + [DOLLAR]
        base = len(labels)
        starts.append(base)
        for i, c in enumerate(cycle):
            labels.append(c)
            rows.append({base + (i + 1) % len(cycle): 1})
    split = {starts[0]: Fraction(1, 2), starts[1]: Fraction(1, 2)} if starts[0] != starts[1] else {starts[0]: 1}
    rows[1] = dict(split)
    rows[2] = dict(split)
    return make_mc(alphabet, labels, 0, rows)


def running_example() -> tuple[Nbw, LabelledMc]:
    """The four-state NBW accepting a^ω and ab^ω, and the three-state chain
    that branches 1/3 : 2/3 into an a-loop and a b-loop."""
    N = make_nbw("ab", 4, 0, [1, 2], [
        (0, "a", [1, 2]), (0, "b", [3]),
        (1, "a", [1]), (1, "b", [3]),
        (2, "a", [3]), (2, "b", [2]),
        (3, "a", [3]), (3, "b", [3]),
    ])
    M = make_mc("ab", "aab", 0, [{1: Fraction(1, 3), 2: Fraction(2, 3)}, {1: 1}, {2: 1}])
    return N, M


def suffix_nfa() -> Nfa:
    """Complete three-state NFA for words starting with b."""
    return make_nbw("ab", 3, 0, [2], [
        (0, "a", [1]), (0, "b", [1, 2]),
        (1, "a", [1]), (1, "b", [1]),
        (2, "a", [2]), (2, "b", [2]),
    ], kind="nfa")


def _random_automaton(rng, n, alphabet, density, deterministic, kind):
    edges = []
    for q in range(n):
        for s in alphabet:
            if deterministic:
                targets = [rng.randrange(n)]
            else:
                targets = [r for r in range(n) if rng.random() < density] or [rng.randrange(n)]
            edges.append((q, s, targets))
    accepting = [q for q in range(n) if rng.random() < 0.5]
    return make_nbw(alphabet, n, 0, accepting, edges, kind=kind)


def _random_mc(rng, n, alphabet, density):
    labels = [rng.choice(alphabet) for _ in range(n)]
    rows = []
    for _ in range(n):
        targets = [t for t in range(n) if rng.random() < density] or [rng.randrange(n)]
        weights = [rng.randint(1, 4) for _ in targets]
        total = sum(weights)
        rows.append({t: Fraction(w, total) for t, w in zip(targets, weights)})
    return make_mc(alphabet, labels, 0, rows)


def random_instances(kind: str, size: int = 3, alphabet="ab", density: float = 0.5,
                     seed: int = 0, count: int = 1, deterministic: bool = False,
                     prefix: str = "", period: str = "") -> list[LabelledInstance]:
    """Seeded random complete automata ("nbw", "nfa"), chains ("mc") or the
    lasso chain of prefix·period^ω ("lasso_mc")."""
    if kind not in ("nbw", "nfa", "mc", "lasso_mc"):
        raise ValueError(f"unknown instance kind {kind!r}")
    if size < 1 or count < 1:
        raise ValueError("size and count must be at least 1")
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    alphabet = tuple(alphabet)
    if kind == "lasso_mc":
        if not period:
            raise ValueError("lasso_mc needs a non-empty period")
        M = lasso_mc(alphabet, tuple(prefix), tuple(period))
        return [LabelledInstance("mc", None, M, UNKNOWN_TAG,
                                 {"construction": "lasso_mc", "prefix": prefix, "period": period})]
    rng = random.Random(seed)
    out = []
    for i in range(count):
        prov = {"construction": "random", "kind": kind, "size": size, "alphabet": list(alphabet),
                "density": density, "seed": seed, "index": i, "deterministic": deterministic}
        if kind == "mc":
            out.append(LabelledInstance("mc", None, _random_mc(rng, size, alphabet, density),
                                        UNKNOWN_TAG, prov))
        else:
            A = _random_automaton(rng, size, alphabet, density, deterministic, kind)
            out.append(LabelledInstance(kind, A, None, UNKNOWN_TAG, prov))
    return out
