"""Graph utilities: strongly connected components and parity-cycle search.

Edges carry a label and a tuple of colours, one per parity condition.  A cycle
is good when, for every condition, the largest colour on it is even.
"""

from __future__ import annotations

from collections import deque
from itertools import product
from typing import Callable, Hashable, Iterable, Sequence

Edge = tuple  # (label, target, colours)


def sccs(nodes: Sequence[Hashable], succ: Callable[[Hashable], Iterable[Hashable]]):
    """Tarjan's algorithm, iterative.  Components come out sinks first."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    result: list[list] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(succ(nxt))))
                    advanced = True
                    break
                if nxt in on_stack and index[nxt] < low[node]:
                    low[node] = index[nxt]
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[node] < low[parent]:
                    low[parent] = low[node]
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                result.append(comp)
    return result


def explore(initials: Iterable[Hashable], edges_of: Callable[[Hashable], list]):
    """Breadth-first exploration.  Returns (nodes in discovery order, edge map)."""
    order: list = []
    edges: dict = {}
    queue = deque()
    for i in initials:
        if i not in edges:
            edges[i] = None
            order.append(i)
            queue.append(i)
    while queue:
        u = queue.popleft()
        out = list(edges_of(u))
        edges[u] = out
        for _, v, _ in out:
            if v not in edges:
                edges[v] = None
                order.append(v)
                queue.append(v)
    return order, edges


def _bfs_path(start, goal, edges, allowed=None):
    """Labels along a shortest path start -> goal (edges explored in list order)."""
    if start == goal:
        return []
    prev = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for lab, v, cols in edges[u]:
            if allowed is not None and not allowed(u, v, cols):
                continue
            if v in prev:
                continue
            prev[v] = (u, lab)
            if v == goal:
                path = []
                while prev[v] is not None:
                    u2, l2 = prev[v]
                    path.append(l2)
                    v = u2
                return path[::-1]
            queue.append(v)
    raise ValueError("no path")


def _even_options(edges, order, k):
    opts = [set() for _ in range(k)]
    for u in order:
        for _, _, cols in edges[u]:
            for i in range(k):
                if cols[i] % 2 == 0:
                    opts[i].add(cols[i])
    return [sorted(o) for o in opts]


def _good_components(order, edges, k):
    """Yield (combo, component, required edges) for every good component."""
    if not order:
        return
    k_opts = _even_options(edges, order, k)
    if any(not o for o in k_opts):
        return
    rank = {u: i for i, u in enumerate(order)}
    for combo in product(*k_opts):
        def ok(cols, combo=combo):
            return all(cols[i] <= combo[i] for i in range(k))

        def succ(u, ok=ok):
            return [v for _, v, cols in edges[u] if ok(cols)]

        comps = sccs(order, succ)
        comps.sort(key=lambda c: min(rank[u] for u in c))
        for comp in comps:
            members = set(comp)
            need: list = [None] * k
            for u in sorted(comp, key=rank.__getitem__):
                for lab, v, cols in edges[u]:
                    if v not in members or not ok(cols):
                        continue
                    for i in range(k):
                        if need[i] is None and cols[i] == combo[i]:
                            need[i] = (u, lab, v)
            if all(e is not None for e in need):
                yield combo, members, need


def accepting_lasso(initial: Hashable, edges_of: Callable[[Hashable], list]):
    """Find a reachable good cycle.

    Returns (prefix labels, cycle labels) or None.  The cycle returns to the
    node where the prefix ends, so the run is a genuine lasso of the graph.
    """
    order, edges = explore([initial], edges_of)
    if not order or not any(edges[u] for u in order):
        return None
    k = None
    for u in order:
        if edges[u]:
            k = len(edges[u][0][2])
            break
    for combo, members, need in _good_components(order, edges, k):
        hits = []
        for e in need:
            if e not in hits:
                hits.append(e)
        start = hits[0][0]

        def inside(u, v, cols, members=members, combo=combo):
            return v in members and all(cols[i] <= combo[i] for i in range(k))

        prefix = _bfs_path(initial, start, edges)
        cycle: list = []
        cur = start
        for u, lab, v in hits:
            cycle += _bfs_path(cur, u, edges, inside)
            cycle.append(lab)
            cur = v
        cycle += _bfs_path(cur, start, edges, inside)
        return prefix, cycle
    return None


def good_nodes(order, edges) -> set:
    """Nodes lying on some good cycle (single parity condition)."""
    found: set = set()
    for _, members, _ in _good_components(order, edges, 1):
        found |= members
    return found


def backward_closure(order, edges, targets) -> set:
    pred: dict = {u: [] for u in order}
    for u in order:
        for _, v, _ in edges[u]:
            pred[v].append(u)
    seen = set(targets)
    queue = deque(seen)
    while queue:
        v = queue.popleft()
        for u in pred[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return seen
