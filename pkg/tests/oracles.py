"""Independent reference computations used as test oracles.

Nothing here calls the decision code under test: graphs are searched with
plain DFS, linear systems are solved by textbook Gaussian elimination.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def reach(start, succ):
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in succ(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def reach_all(starts, succ):
    seen = set()
    for s in starts:
        if s not in seen:
            seen |= reach(s, succ)
    return seen


# ---------------------------------------------------------------- words

def nbw_accepts_lasso(A, prefix, period) -> bool:
    """Product of A with the lasso positions; accept iff some reachable
    accepting node lies on a cycle."""
    word = list(prefix) + list(period)
    p, n = len(prefix), len(word)
    idx = {s: i for i, s in enumerate(A.alphabet)}

    def succ(node):
        q, i = node
        j = i + 1 if i + 1 < n else p
        return [(r, j) for r in A.delta[q][idx[word[i]]]]

    nodes = reach((A.initial, 0), succ)
    for node in nodes:
        if node[0] in A.accepting and node in reach_all(succ(node), succ):
            return True
    return False


def lassos(alphabet, max_prefix, max_period):
    for lp in range(max_prefix + 1):
        for prefix in itertools.product(alphabet, repeat=lp):
            for lq in range(1, max_period + 1):
                for period in itertools.product(alphabet, repeat=lq):
                    yield prefix, period


# ---------------------------------------------------------------- chains

def gauss(mat, rhs):
    n = len(rhs)
    a = [list(row) + [r] for row, r in zip(mat, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


def chain_buchi(rows: dict, accepting, initial) -> Fraction:
    """rows[u] = [(v, p)].  Probability of visiting ``accepting`` infinitely often."""
    succ = lambda u: [v for v, p in rows[u] if p]
    nodes = reach(initial, succ)
    r = {u: reach(u, succ) for u in nodes}
    bottom = [u for u in nodes if all(u in r[v] for v in r[u])]
    good = {u for u in bottom if any(v in accepting for v in r[u])}
    can = {u for u in nodes if r[u] & good}
    unknown = sorted(can - good, key=repr)
    pos = {u: i for i, u in enumerate(unknown)}
    m = len(unknown)
    mat = [[Fraction(0)] * m for _ in range(m)]
    rhs = [Fraction(0)] * m
    for u in unknown:
        i = pos[u]
        mat[i][i] += 1
        for v, p in rows[u]:
            if v in pos:
                mat[i][pos[v]] -= p
            elif v in good:
                rhs[i] += p
    sol = gauss(mat, rhs) if m else []
    if initial in good:
        return Fraction(1)
    if initial not in pos:
        return Fraction(0)
    return sol[pos[initial]]


def brute_max_buchi(P) -> Fraction:
    """Maximise over every memoryless strategy of the product."""
    choices = [range(len(acts)) for acts in P.actions]
    best = Fraction(0)
    for strat in itertools.product(*choices):
        rows = {u: list(P.actions[u][a][1]) for u, a in enumerate(strat)}
        best = max(best, chain_buchi(rows, P.accepting, 0))
    return best


def brute_psyn(M, N) -> Fraction:
    """Optimum over memoryless resolutions of N's choices on M x N, built directly."""
    idx = {s: i for i, s in enumerate(N.alphabet)}
    start = (M.initial, N.initial)
    states = sorted(reach(start, lambda x: [(t, r) for t, _ in M.row(x[0])
                                            for r in N.delta[x[1]][idx[M.labels[x[0]]]]]))
    opts = {x: sorted(N.delta[x[1]][idx[M.labels[x[0]]]]) for x in states}
    best = Fraction(0)
    for pick in itertools.product(*(opts[x] for x in states)):
        choice = dict(zip(states, pick))
        rows = {x: [((t, choice[x]), p) for t, p in M.row(x[0])] for x in states}
        # Büchi on states whose automaton component is accepting
        best = max(best, chain_buchi(rows, {x for x in states if x[1] in N.accepting}, start))
    return best


# ---------------------------------------------------------------- strategy runs

def _symbol(label):
    return label if isinstance(label, str) else label[0]


def dual_run_accepts(C, t, fc_of) -> bool:
    """Run of the complemented Büchi tree automaton of C on t under the
    positional choice fc_of(v, r) in {"box"} or a direction.  Accepting iff
    no reachable cycle of the run graph takes a colour-1 edge."""
    idx = {s: i for i, s in enumerate(C.alphabet)}

    def edges(node):
        v, q = node
        out = []
        for r in sorted(C.delta[q][idx[_symbol(t.labels[v])]]):
            c = fc_of(v, r)
            if c == "box":
                out += [((ch, r), 0) for _, ch in t.succ[v]]
            else:
                ch = t.child(v, c)
                if ch is not None:
                    out.append(((ch, r), 1))
        return out

    succ = lambda x: [y for y, _ in edges(x)]
    nodes = reach((t.root, C.initial), succ)
    for x in nodes:
        for y, col in edges(x):
            if col == 1 and x in reach(y, succ):
                return False
    return True


def reference_run_accepts(G, t, fg_of) -> bool:
    """Run of the Büchi tree automaton of G on t under fg_of(v, q) = (c, q').
    Invalid choices reject.  Accepting iff every reachable cycle has a
    colour-2 edge."""
    idx = {s: i for i, s in enumerate(G.alphabet)}

    def edges(node):
        v, q = node
        c, q2 = fg_of(v, q)
        if q2 not in G.delta[q][idx[_symbol(t.labels[v])]]:
            return None
        if c == "box":
            if q2 not in G.accepting:
                return None
            return [((ch, q2), 2) for _, ch in t.succ[v]]
        if q2 in G.accepting or t.child(v, c) is None:
            return None
        return [((ch, q2), 1 if d == c else 2) for d, ch in t.succ[v]]

    start = (t.root, G.initial)
    nodes = [start]
    seen = {start}
    out = {}
    while nodes:
        x = nodes.pop()
        e = edges(x)
        if e is None:
            return False
        out[x] = e
        for y, _ in e:
            if y not in seen:
                seen.add(y)
                nodes.append(y)
    # a cycle of colour-1 edges only
    low = lambda x: [y for y, col in out[x] if col == 1]
    for x in out:
        if x in reach_all(low(x), low):
            return False
    return True
