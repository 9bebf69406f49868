"""Labelled Markov chains and MDPs with exact rational probabilities.

Covers the product of a model with an NBW, maximal end components, optimal
Büchi probabilities (policy iteration over exact linear solves) and the
semantic/syntactic satisfaction probabilities of an automaton on a chain.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import graphs
from .automata import Nbw, check_alphabet, make_complete
from .omega import determinize

Dist = tuple  # tuple of (target, Fraction), sorted by target


class ModelFormatError(ValueError):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def _dist(pairs) -> Dist:
    acc: dict[int, Fraction] = {}
    for t, p in pairs:
        p = Fraction(p)
        if p < 0:
            raise ValueError("negative probability")
        if p:
            acc[t] = acc.get(t, Fraction(0)) + p
    return tuple(sorted(acc.items()))


@dataclass(frozen=True)
class LabelledMdp:
    alphabet: tuple[str, ...]
    labels: tuple[str, ...]
    initial: int
    actions: tuple  # actions[s] = ((name, dist), ...)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", check_alphabet(self.alphabet))
        n = len(self.labels)
        if n == 0:
            raise ValueError("model needs at least one state")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        if len(self.actions) != n:
            raise ValueError("one action list per state required")
        for s, lab in enumerate(self.labels):
            if lab not in self.alphabet:
                raise ValueError(f"label {lab!r} of state {s} not in alphabet")
            if not self.actions[s]:
                raise ValueError(f"state {s} has no action")
            names = [a for a, _ in self.actions[s]]
            if len(set(names)) != len(names):
                raise ValueError(f"duplicate action names at state {s}")
            for name, dist in self.actions[s]:
                if sum(p for _, p in dist) != 1:
                    raise ValueError(f"distribution of ({s}, {name}) does not sum to 1")
                for t, _ in dist:
                    if not 0 <= t < n:
                        raise ValueError(f"target {t} out of range")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def is_chain(self) -> bool:
        return all(len(acts) == 1 for acts in self.actions)


class LabelledMc(LabelledMdp):
    """A labelled MDP with exactly one action per state."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_chain:
            raise ValueError("a Markov chain has one action per state")

    def row(self, s: int) -> Dist:
        return self.actions[s][0][1]


def make_mc(alphabet, labels, initial, rows: Sequence) -> LabelledMc:
    """rows[s] is a mapping or iterable of (target, probability)."""
    acts = []
    for r in rows:
        pairs = r.items() if isinstance(r, dict) else r
        acts.append((("α", _dist(pairs)),))
    return LabelledMc(tuple(alphabet), tuple(labels), initial, tuple(acts))


def make_mdp(alphabet, labels, initial, actions: Sequence) -> LabelledMdp:
    """actions[s] is a list of (name, {target: probability})."""
    acts = []
    for lst in actions:
        acts.append(tuple((name, _dist(d.items() if isinstance(d, dict) else d)) for name, d in lst))
    cls = LabelledMc if all(len(a) == 1 for a in acts) else LabelledMdp
    return cls(tuple(alphabet), tuple(labels), initial, tuple(acts))


def lasso_mc(alphabet, prefix: Sequence[str], period: Sequence[str]) -> LabelledMc:
    """Chain emitting prefix . period^omega with probability one."""
    word = list(prefix) + list(period)
    if not period:
        raise ValueError("period must be non-empty")
    n = len(word)
    rows = [{i + 1 if i + 1 < n else len(prefix): 1} for i in range(n)]
    return make_mc(alphabet, word, 0, rows)


# ---------------------------------------------------------------- JSON codec

def model_doc(M: LabelledMdp) -> dict:
    return {
        "kind": "mc" if M.is_chain else "mdp",
        "alphabet": list(M.alphabet),
        "initial": M.initial,
        "states": [{"label": lab} for lab in M.labels],
        "actions": [
            {"state": s, "name": name, "dist": [{"to": t, "p": f"{p.numerator}/{p.denominator}"}
                                                for t, p in dist]}
            for s, acts in enumerate(M.actions) for name, dist in acts
        ],
    }


def dump_model(M: LabelledMdp) -> str:
    return json.dumps(model_doc(M), sort_keys=True, indent=1) + "\n"


def _fraction(text, where):
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ModelFormatError(where, f"probability must be a 'num/den' string, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ModelFormatError(where, f"bad probability {text!r}") from None


def parse_model(doc: dict) -> LabelledMdp:
    if not isinstance(doc, dict):
        raise ModelFormatError("$", "document must be an object")
    for key in ("kind", "alphabet", "initial", "states", "actions"):
        if key not in doc:
            raise ModelFormatError("$", f"missing field {key!r}")
    kind = doc["kind"]
    if kind not in ("mc", "mdp"):
        raise ModelFormatError("$.kind", f"unknown kind {kind!r}")
    try:
        alphabet = check_alphabet(doc["alphabet"])
    except (ValueError, TypeError) as exc:
        raise ModelFormatError("$.alphabet", str(exc)) from None
    states = doc["states"]
    if not isinstance(states, list) or not states:
        raise ModelFormatError("$.states", "expected a non-empty list")
    labels = []
    for i, st in enumerate(states):
        if not isinstance(st, dict) or st.get("label") not in alphabet:
            raise ModelFormatError(f"$.states[{i}].label", "label missing or not in alphabet")
        labels.append(st["label"])
    n = len(labels)
    init = doc["initial"]
    if not isinstance(init, int) or not 0 <= init < n:
        raise ModelFormatError("$.initial", f"index {init!r} out of range")
    per_state: list[list] = [[] for _ in range(n)]
    for k, act in enumerate(doc["actions"]):
        where = f"$.actions[{k}]"
        if not isinstance(act, dict):
            raise ModelFormatError(where, "expected an object")
        s = act.get("state")
        if not isinstance(s, int) or not 0 <= s < n:
            raise ModelFormatError(where + ".state", f"index {s!r} out of range")
        pairs = []
        for j, entry in enumerate(act.get("dist", [])):
            t = entry.get("to")
            if not isinstance(t, int) or not 0 <= t < n:
                raise ModelFormatError(f"{where}.dist[{j}].to", f"index {t!r} out of range")
            pairs.append((t, _fraction(entry.get("p"), f"{where}.dist[{j}].p")))
        if sum(p for _, p in pairs) != 1:
            raise ModelFormatError(where + ".dist", "probabilities do not sum to exactly 1")
        per_state[s].append((str(act.get("name", "α")), _dist(pairs)))
    for s in range(n):
        if not per_state[s]:
            raise ModelFormatError("$.actions", f"state {s} has no action")
    acts = tuple(tuple(a) for a in per_state)
    if kind == "mc":
        if any(len(a) != 1 for a in acts):
            raise ModelFormatError("$.actions", "a chain needs exactly one action per state")
        return LabelledMc(alphabet, tuple(labels), init, acts)
    try:
        return LabelledMdp(alphabet, tuple(labels), init, acts)
    except ValueError as exc:
        raise ModelFormatError("$", str(exc)) from None


def load_model(text: str) -> LabelledMdp:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return parse_model(doc)


# ---------------------------------------------------------------- linear algebra

def _gauss(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        if pv != 1:
            a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                ar, ac = a[r], a[col]
                for c in range(col, n + 1):
                    if ac[c]:
                        ar[c] -= f * ac[c]
    return [a[i][n] for i in range(n)]


def solve_chain(rows: dict, fixed: dict) -> dict:
    """Solve x_u = sum p * x_v for every u not in ``fixed``.

    ``rows[u]`` lists (v, p).  Unknowns reaching no fixed value must not form
    closed classes.  Blocks are solved bottom-up by strongly connected
    component to keep fractions small.
    """
    values = dict(fixed)
    unknown = [u for u in rows if u not in fixed]
    uset = set(unknown)

    def succ(u):
        return [v for v, _ in rows[u] if v in uset]

    for block in graphs.sccs(unknown, succ):
        if len(block) == 1 and all(v != block[0] for v, _ in rows[block[0]]):
            u = block[0]
            values[u] = sum((p * values[v] for v, p in rows[u]), Fraction(0))
            continue
        pos = {u: i for i, u in enumerate(block)}
        m = len(block)
        mat = [[Fraction(0)] * m for _ in range(m)]
        rhs = [Fraction(0)] * m
        for u in block:
            i = pos[u]
            mat[i][i] += 1
            for v, p in rows[u]:
                if v in pos:
                    mat[i][pos[v]] -= p
                else:
                    rhs[i] += p * values[v]
        for u, x in zip(block, _gauss(mat, rhs)):
            values[u] = x
    return values


def chain_probability(rows: dict, initial, good_bscc) -> tuple[Fraction, dict]:
    """Probability of ending in a bottom SCC accepted by ``good_bscc``.

    ``rows`` maps every state to (successor, probability) pairs.
    Returns (value at initial, value per state).
    """
    nodes = list(rows)
    comps = graphs.sccs(nodes, lambda u: [v for v, _ in rows[u]])
    fixed = {}
    for comp in comps:
        cs = set(comp)
        if all(v in cs for u in comp for v, _ in rows[u]):
            val = Fraction(1) if good_bscc(cs) else Fraction(0)
            for u in comp:
                fixed[u] = val
    order = nodes
    edges = {u: [(None, v, (0,)) for v, _ in rows[u]] for u in order}
    can = graphs.backward_closure(order, edges, [u for u, x in fixed.items() if x == 1])
    for u in nodes:
        if u not in can:
            fixed[u] = Fraction(0)
    values = solve_chain(rows, fixed)
    return values[initial], values


# ---------------------------------------------------------------- product

@dataclass(frozen=True)
class ProductMdp:
    """Product of a labelled MDP with an NBW, restricted to reachable states.

    ``states[i]`` is the pair (s, q); ``actions[i]`` lists ((name, q'), dist)
    with dist over state indices.  Index 0 is the initial state.
    """

    states: tuple
    actions: tuple
    accepting: frozenset

    @property
    def index(self) -> dict:
        return {st: i for i, st in enumerate(self.states)}

    @property
    def accepting_pairs(self) -> frozenset:
        return frozenset(self.states[i] for i in self.accepting)


def product_mdp(M: LabelledMdp, N: Nbw) -> ProductMdp:
    if list(M.alphabet) != list(N.alphabet):
        missing = [l for l in M.labels if l not in N.alphabet]
        if missing:
            raise ValueError(f"label {missing[0]!r} not in automaton alphabet")
    N = make_complete(N)
    start = (M.initial, N.initial)
    index = {start: 0}
    order = [start]
    actions = []
    i = 0
    while i < len(order):
        s, q = order[i]
        acts = []
        for q2 in sorted(N.succ(q, M.labels[s])):
            for name, dist in M.actions[s]:
                out = []
                for t, p in dist:
                    key = (t, q2)
                    if key not in index:
                        index[key] = len(order)
                        order.append(key)
                    out.append((index[key], p))
                acts.append(((name, q2), tuple(sorted(out))))
        actions.append(tuple(acts))
        i += 1
    acc = frozenset(i for i, (_, q) in enumerate(order) if q in N.accepting)
    return ProductMdp(tuple(order), tuple(actions), acc)


def _action_lists(P):
    """Uniform view: per state, list of distributions."""
    if isinstance(P, ProductMdp):
        return [[dist for _, dist in acts] for acts in P.actions]
    return [[dist for _, dist in acts] for acts in P.actions]


@dataclass(frozen=True)
class EndComponent:
    states: frozenset
    actions: frozenset  # (state, action index)


def _mecs(dists: list[list]) -> list[EndComponent]:
    n = len(dists)
    live = {s: set(range(len(dists[s]))) for s in range(n)}
    while True:
        nodes = sorted(live)

        def succ(u):
            return sorted({t for a in live[u] for t, _ in dists[u][a] if t in live})

        comp_of = {}
        for k, comp in enumerate(graphs.sccs(nodes, succ)):
            for u in comp:
                comp_of[u] = k
        changed = False
        for u in nodes:
            keep = {a for a in live[u]
                    if all(t in comp_of and comp_of[t] == comp_of[u] for t, _ in dists[u][a])}
            if keep != live[u]:
                live[u] = keep
                changed = True
        for u in nodes:
            if not live[u]:
                del live[u]
                changed = True
        if not changed:
            break
    groups: dict[int, set] = {}
    for u in live:
        groups.setdefault(comp_of[u], set()).add(u)
    result = []
    for members in groups.values():
        result.append(EndComponent(frozenset(members),
                                   frozenset((u, a) for u in members for a in live[u])))
    result.sort(key=lambda ec: min(ec.states))
    return result


def maximal_end_components(P) -> list[EndComponent]:
    return _mecs(_action_lists(P))


def _attractor_choice(ec: EndComponent, dists, goal: int) -> dict:
    """Positional choice inside an end component reaching ``goal`` almost surely."""
    acts: dict[int, list] = {}
    for u, a in sorted(ec.actions):
        acts.setdefault(u, []).append(a)
    choice = {goal: acts[goal][0]}
    layer = {goal}
    while len(choice) < len(ec.states):
        grown = False
        for u in sorted(ec.states):
            if u in choice:
                continue
            for a in acts[u]:
                if any(t in layer for t, _ in dists[u][a]):
                    choice[u] = a
                    grown = True
                    break
        layer = set(choice)
        if not grown:
            raise AssertionError("end component is not strongly connected")
    return choice


def induced_chain(P, strategy: dict) -> dict:
    dists = _action_lists(P)
    return {u: list(dists[u][strategy[u]]) for u in range(len(dists))}


def buchi_value_of_chain(rows: dict, accepting, initial=0) -> Fraction:
    return chain_probability(rows, initial, lambda comp: bool(comp & accepting))[0]


def max_buchi_prob(P: ProductMdp):
    """Maximal probability of visiting the accepting states infinitely often.

    Returns (value, strategy) where the strategy maps each product state
    (s, q) to its chosen action (name, q').
    """
    dists = _action_lists(P)
    n = len(dists)
    mecs = _mecs(dists)
    good = [ec for ec in mecs if ec.states & P.accepting]
    bad = [ec for ec in mecs if not ec.states & P.accepting]
    # quotient: accepting end components become one target node, the other
    # maximal end components collapse to a single node each
    node_of = {}
    for ec in good:
        for u in ec.states:
            node_of[u] = "T"
    for k, ec in enumerate(bad):
        for u in ec.states:
            node_of[u] = ("M", k)
    for u in range(n):
        node_of.setdefault(u, ("S", u))
    node_acts: dict = {}
    for u in range(n):
        nd = node_of[u]
        if nd == "T":
            continue
        inside = None
        if nd[0] == "M":
            inside = {a for (v, a) in bad[nd[1]].actions if v == u}
        for a, dist in enumerate(dists[u]):
            if inside is not None and a in inside:
                continue
            agg: dict = {}
            for t, p in dist:
                agg[node_of[t]] = agg.get(node_of[t], Fraction(0)) + p
            node_acts.setdefault(nd, []).append(((u, a), sorted(agg.items(), key=repr)))
    nodes = sorted({node_of[u] for u in range(n)}, key=repr)
    reach_edges = {nd: [(None, t, (0,)) for _, d in node_acts.get(nd, []) for t, _ in d]
                   for nd in nodes}
    can = graphs.backward_closure(nodes, reach_edges, ["T"] if "T" in reach_edges else [])
    fixed = {nd: Fraction(0) for nd in nodes if nd not in can}
    fixed["T"] = Fraction(1)
    policy = {nd: 0 for nd in nodes if nd not in fixed}
    while True:
        rows = {nd: node_acts[nd][policy[nd]][1] for nd in policy}
        for nd in fixed:
            rows[nd] = []
        vals = solve_chain(rows, fixed)
        improved = False
        for nd in sorted(policy, key=repr):
            cur = vals[nd]
            best, best_i = cur, policy[nd]
            for i, (_, d) in enumerate(node_acts[nd]):
                v = sum((p * vals[t] for t, p in d), Fraction(0))
                if v > best:
                    best, best_i = v, i
            if best_i != policy[nd]:
                policy[nd] = best_i
                improved = True
        if not improved:
            break
    # lift the quotient policy back to product states
    strategy: dict[int, int] = {}
    for ec in good:
        f = min(ec.states & P.accepting)
        strategy.update(_attractor_choice(ec, dists, f))
    for k, ec in enumerate(bad):
        nd = ("M", k)
        if nd in policy:
            (u, a) = node_acts[nd][policy[nd]][0]
            inner = _attractor_choice(ec, dists, u)
            inner[u] = a
            strategy.update(inner)
        else:
            strategy.update(_attractor_choice(ec, dists, min(ec.states)))
    for u in range(n):
        if u in strategy:
            continue
        nd = node_of[u]
        strategy[u] = node_acts[nd][policy[nd]][0][1] if nd in policy else 0
    value = vals[node_of[0]] if node_of[0] != "T" else Fraction(1)
    check = buchi_value_of_chain(induced_chain(P, strategy), P.accepting)
    if check != value:
        raise AssertionError(f"strategy achieves {check}, expected {value}")
    named = {P.states[u]: P.actions[u][a][0] for u, a in strategy.items()}
    return value, named


def psyn(M: LabelledMc, N: Nbw) -> Fraction:
    return max_buchi_prob(product_mdp(M, N))[0]


def psem(M: LabelledMc, N: Nbw) -> Fraction:
    """Probability that the chain emits a word of L(N)."""
    if not M.is_chain:
        raise ValueError("psem is defined here for Markov chains")
    D = determinize(make_complete(N))
    letter = {s: i for i, s in enumerate(D.alphabet)}
    start = (M.initial, D.initial)
    rows: dict = {}
    colour: dict = {}
    queue = deque([start])
    rows[start] = None
    while queue:
        s, d = queue.popleft()
        a = letter[M.labels[s]]
        d2, c = D.trans[d][a], D.colour[d][a]
        out = []
        for t, p in M.actions[s][0][1]:
            key = (t, d2)
            out.append((key, p))
            if key not in rows:
                rows[key] = None
                queue.append(key)
        rows[(s, d)] = out
        colour[(s, d)] = c

    def good(comp):
        return max(colour[u] for u in comp) % 2 == 0

    return chain_probability(rows, start, good)[0]


@dataclass(frozen=True)
class Comparison:
    psem: Fraction
    psyn: Fraction
    equal: bool
    qualitative_gap: bool


def compare_on_mc(N: Nbw, M: LabelledMc) -> Comparison:
    sem = psem(M, N)
    syn = psyn(M, N)
    if not 0 <= syn <= sem <= 1:
        raise AssertionError(f"inconsistent values psyn={syn} psem={sem}")
    return Comparison(sem, syn, sem == syn, sem == 1 and syn < 1)


def fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"
