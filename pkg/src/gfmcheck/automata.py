"""Finite-word and omega-word automata: representations, JSON codec, basic analyses.

States are integers 0..n-1.  Transition tables are stored densely as
``delta[q][i]`` where ``i`` is the position of the symbol in the alphabet.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import graphs


class AutomatonFormatError(ValueError):
    """Malformed automaton document.  ``location`` names the offending field."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


def check_alphabet(symbols: Sequence[str]) -> tuple[str, ...]:
    symbols = tuple(symbols)
    if not symbols:
        raise ValueError("alphabet must be non-empty")
    if len(set(symbols)) != len(symbols):
        raise ValueError("alphabet has duplicate symbols")
    for s in symbols:
        if not isinstance(s, str) or not s:
            raise ValueError(f"bad symbol {s!r}")
    return symbols


def _table(state_count, alphabet, edges):
    index = {s: i for i, s in enumerate(alphabet)}
    rows = [[set() for _ in alphabet] for _ in range(state_count)]
    for q, sym, targets in edges:
        rows[q][index[sym]].update(targets)
    return tuple(tuple(frozenset(c) for c in row) for row in rows)


@dataclass(frozen=True)
class _Base:
    alphabet: tuple[str, ...]
    state_count: int
    initial: int
    delta: tuple[tuple[frozenset, ...], ...]

    _optional_initial = False

    def __post_init__(self):
        object.__setattr__(self, "alphabet", check_alphabet(self.alphabet))
        n = self.state_count
        if n < 1:
            raise ValueError("state_count must be positive")
        if self.initial is None and self._optional_initial:
            pass
        elif not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        if len(self.delta) != n or any(len(row) != len(self.alphabet) for row in self.delta):
            raise ValueError("transition table has the wrong shape")
        for q, row in enumerate(self.delta):
            for targets in row:
                for t in targets:
                    if not 0 <= t < n:
                        raise ValueError(f"transition target {t} out of range in state {q}")

    def letter(self, symbol: str) -> int:
        return self.alphabet.index(symbol)

    def succ(self, q: int, symbol: str) -> frozenset:
        return self.delta[q][self.letter(symbol)]

    @property
    def is_complete(self) -> bool:
        return all(targets for row in self.delta for targets in row)

    @property
    def is_deterministic(self) -> bool:
        return all(len(targets) == 1 for row in self.delta for targets in row)

    def edges(self):
        """(q, symbol, sorted targets) for every non-empty transition entry."""
        for q, row in enumerate(self.delta):
            for i, targets in enumerate(row):
                if targets:
                    yield q, self.alphabet[i], sorted(targets)

    def reachable(self, start: int | None = None) -> set[int]:
        start = self.initial if start is None else start
        seen = {start}
        stack = [start]
        while stack:
            q = stack.pop()
            for targets in self.delta[q]:
                for t in targets:
                    if t not in seen:
                        seen.add(t)
                        stack.append(t)
        return seen


@dataclass(frozen=True)
class Nbw(_Base):
    """Nondeterministic Büchi word automaton with state-based acceptance."""

    accepting: frozenset = frozenset()
    kind: str = "nbw"

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        for q in self.accepting:
            if not 0 <= q < self.state_count:
                raise ValueError(f"accepting state {q} out of range")

    def coloured_edges(self, q: int):
        """Outgoing edges as (letter index, target, colour): 2 leaving F, else 1."""
        c = 2 if q in self.accepting else 1
        return [(i, t, c) for i, ts in enumerate(self.delta[q]) for t in sorted(ts)]


@dataclass(frozen=True)
class Nfa(Nbw):
    """Finite-word automaton; same data as an NBW, read over finite words."""

    kind: str = "nfa"


@dataclass(frozen=True)
class Npw(_Base):
    """Nondeterministic parity word automaton, state colours, max-even accepts."""

    colours: tuple[int, ...] = ()
    deterministic_marker: bool = False

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "colours", tuple(self.colours))
        if len(self.colours) != self.state_count:
            raise ValueError("one colour per state required")
        if any(c < 0 for c in self.colours):
            raise ValueError("colours must be natural numbers")

    kind = "npw"

    def coloured_edges(self, q: int):
        c = self.colours[q]
        return [(i, t, c) for i, ts in enumerate(self.delta[q]) for t in sorted(ts)]


@dataclass(frozen=True)
class SafetyAutomaton(_Base):
    """All member states are final; a missing transition means rejection.

    ``states`` is the member set (indices outside it are unused).  ``initial``
    may be None, which marks the empty language.
    """

    states: frozenset = frozenset()
    kind: str = "safety"
    _optional_initial = True

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "states", frozenset(self.states))
        if self.initial is not None and self.initial not in self.states:
            raise ValueError("initial state must be a member state")
        for q, row in enumerate(self.delta):
            for targets in row:
                if targets and (q not in self.states or not targets <= self.states):
                    raise ValueError("safety transitions must stay among member states")

    @property
    def accepting(self) -> frozenset:
        return self.states


@dataclass(frozen=True)
class LassoWord:
    """The ultimately periodic word prefix . period^omega."""

    prefix: tuple[str, ...]
    period: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "period", tuple(self.period))
        if not self.period:
            raise ValueError("lasso period must be non-empty")

    def __str__(self):
        return f"{' '.join(self.prefix) or 'ε'} ({' '.join(self.period)})^ω"


def make_nbw(alphabet, state_count, initial, accepting, edges, kind="nbw") -> Nbw:
    """Build an NBW (or NFA) from (q, symbol, targets) triples."""
    alphabet = check_alphabet(alphabet)
    cls = Nfa if kind == "nfa" else Nbw
    return cls(alphabet, state_count, initial, _table(state_count, alphabet, edges),
               frozenset(accepting), kind)


def make_safety(alphabet, state_count, initial, states, edges) -> SafetyAutomaton:
    alphabet = check_alphabet(alphabet)
    return SafetyAutomaton(alphabet, state_count, initial,
                           _table(state_count, alphabet, edges), frozenset(states))


# ---------------------------------------------------------------- JSON codec

def _require(doc, key, where):
    if key not in doc:
        raise AutomatonFormatError(where, f"missing field {key!r}")
    return doc[key]


def _int(value, where, lo=0, hi=None):
    if not isinstance(value, int) or isinstance(value, bool):
        raise AutomatonFormatError(where, f"expected an integer, got {value!r}")
    if value < lo or (hi is not None and value >= hi):
        raise AutomatonFormatError(where, f"index {value} out of range")
    return value


def parse_automaton(doc: dict):
    if not isinstance(doc, dict):
        raise AutomatonFormatError("$", "document must be an object")
    kind = _require(doc, "kind", "$")
    if kind not in ("nfa", "nbw", "npw", "safety"):
        raise AutomatonFormatError("$.kind", f"unknown kind {kind!r}")
    alphabet = _require(doc, "alphabet", "$")
    try:
        alphabet = check_alphabet(alphabet)
    except (ValueError, TypeError) as exc:
        raise AutomatonFormatError("$.alphabet", str(exc)) from None
    n = _int(_require(doc, "state_count", "$"), "$.state_count", lo=1)
    initial = _require(doc, "initial", "$")
    if not (kind == "safety" and initial is None):
        initial = _int(initial, "$.initial", hi=n)
    trans = _require(doc, "transitions", "$")
    if not isinstance(trans, list):
        raise AutomatonFormatError("$.transitions", "expected a list")
    edges = []
    for k, t in enumerate(trans):
        where = f"$.transitions[{k}]"
        if not isinstance(t, dict):
            raise AutomatonFormatError(where, "expected an object")
        q = _int(_require(t, "from", where), where + ".from", hi=n)
        sym = _require(t, "letter", where)
        if sym not in alphabet:
            raise AutomatonFormatError(where + ".letter", f"symbol {sym!r} not in alphabet")
        to = _require(t, "to", where)
        if not isinstance(to, list):
            raise AutomatonFormatError(where + ".to", "expected a list")
        targets = [_int(x, f"{where}.to[{j}]", hi=n) for j, x in enumerate(to)]
        edges.append((q, sym, targets))
    if kind == "npw":
        cols = _require(doc, "colors", "$")
        if not isinstance(cols, list) or len(cols) != n:
            raise AutomatonFormatError("$.colors", "expected one colour per state")
        cols = [_int(c, f"$.colors[{j}]") for j, c in enumerate(cols)]
        return Npw(alphabet, n, initial, _table(n, alphabet, edges), tuple(cols),
                   bool(doc.get("deterministic", False)))
    acc = _require(doc, "accepting", "$")
    if not isinstance(acc, list):
        raise AutomatonFormatError("$.accepting", "expected a list")
    acc = [_int(x, f"$.accepting[{j}]", hi=n) for j, x in enumerate(acc)]
    if kind == "safety":
        try:
            return make_safety(alphabet, n, initial, acc, edges)
        except ValueError as exc:
            raise AutomatonFormatError("$", str(exc)) from None
    return make_nbw(alphabet, n, initial, acc, edges, kind)


def load_automaton(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AutomatonFormatError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return parse_automaton(doc)


def automaton_doc(A) -> dict:
    kind = A.kind
    doc = {
        "kind": kind,
        "alphabet": list(A.alphabet),
        "state_count": A.state_count,
        "initial": A.initial,
    }
    if kind == "npw":
        doc["colors"] = list(A.colours)
        if A.deterministic_marker:
            doc["deterministic"] = True
    else:
        doc["accepting"] = sorted(A.accepting)
    doc["transitions"] = [{"from": q, "letter": s, "to": ts} for q, s, ts in A.edges()]
    return doc


def serialize(A) -> str:
    """Canonical text: sorted keys, transitions by (from, letter order, to)."""
    return json.dumps(automaton_doc(A), sort_keys=True, indent=1) + "\n"


# ---------------------------------------------------------------- operations

def make_complete(A: Nbw) -> Nbw:
    """Add one rejecting sink if some (q, symbol) has no successor."""
    if A.is_complete:
        return A
    sink = A.state_count
    rows = []
    for row in A.delta:
        rows.append(tuple(ts if ts else frozenset([sink]) for ts in row))
    rows.append(tuple(frozenset([sink]) for _ in A.alphabet))
    return type(A)(A.alphabet, A.state_count + 1, A.initial, tuple(rows), A.accepting, A.kind)


def _graph_of(A):
    def edges_of(q):
        return [(i, t, (c,)) for i, t, c in A.coloured_edges(q)]
    return edges_of


def productive_states(A) -> set[int]:
    """States with a non-empty language (an accepting lasso starts there)."""
    order, edges = graphs.explore(range(A.state_count), _graph_of(A))
    return graphs.backward_closure(order, edges, graphs.good_nodes(order, edges))


def nonempty_lasso(A, q: int | None = None) -> LassoWord | None:
    """Some accepted lasso from q (default: the initial state), or None."""
    q = A.initial if q is None else q
    found = graphs.accepting_lasso(q, _graph_of(A))
    if found is None:
        return None
    prefix, cycle = found
    return LassoWord(tuple(A.alphabet[i] for i in prefix), tuple(A.alphabet[i] for i in cycle))


def rebase(A, q: int):
    if not 0 <= q < A.state_count:
        raise IndexError(f"state {q} out of range")
    if q == A.initial:
        return A
    if isinstance(A, Npw):
        return Npw(A.alphabet, A.state_count, q, A.delta, A.colours, A.deterministic_marker)
    return type(A)(A.alphabet, A.state_count, q, A.delta, A.accepting, A.kind)


def _lasso_positions(A, w: LassoWord):
    idx = {s: i for i, s in enumerate(A.alphabet)}
    try:
        letters = [idx[s] for s in w.prefix + w.period]
    except KeyError as exc:
        raise ValueError(f"symbol {exc.args[0]!r} not in alphabet") from None
    return letters, len(w.prefix)


def accepts_lasso(A, w: LassoWord) -> bool:
    letters, plen = _lasso_positions(A, w)
    total = len(letters)
    if getattr(A, "is_dpw", False):
        d = A.initial
        for a in letters[:plen]:
            d = A.trans[d][a]
        seen = {}
        starts = []
        while d not in seen:
            seen[d] = len(starts)
            starts.append(d)
            for a in letters[plen:]:
                d = A.trans[d][a]
        top = -1
        for d0 in starts[seen[d]:]:
            for a in letters[plen:]:
                top = max(top, A.colour[d0][a])
                d0 = A.trans[d0][a]
        return top % 2 == 0

    def edges_of(node):
        q, pos = node
        nxt = pos + 1 if pos + 1 < total else plen
        a = letters[pos]
        if isinstance(A, Npw):
            c = A.colours[q]
        elif isinstance(A, SafetyAutomaton):
            c = 0
        else:
            c = 2 if q in A.accepting else 1
        return [(a, (t, nxt), (c,)) for t in sorted(A.delta[q][a])]

    return graphs.accepting_lasso((A.initial, 0), edges_of) is not None


def all_lassos(alphabet: Sequence[str], max_prefix: int, max_period: int) -> Iterable[LassoWord]:
    """Every lasso with |u| <= max_prefix and 1 <= |v| <= max_period."""
    from itertools import product
    for lu in range(max_prefix + 1):
        for u in product(alphabet, repeat=lu):
            for lv in range(1, max_period + 1):
                for v in product(alphabet, repeat=lv):
                    yield LassoWord(u, v)
