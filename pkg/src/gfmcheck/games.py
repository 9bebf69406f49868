"""Max-parity games solved with Zielonka's recursive algorithm.

Player 0 (accept) wins a play when the largest priority seen infinitely often
is even; player 1 (reject) wins otherwise.  Priorities sit on positions; a
colour on a move is modelled by the priority of the position it enters.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

ACCEPT = 0
REJECT = 1


@dataclass
class ParityGame:
    owner: list[int] = field(default_factory=list)
    priority: list[int] = field(default_factory=list)
    succ: list[list[int]] = field(default_factory=list)
    info: list = field(default_factory=list)
    initial: int = 0

    def add(self, owner: int, priority: int, info=None) -> int:
        self.owner.append(owner)
        self.priority.append(priority)
        self.succ.append([])
        self.info.append(info)
        return len(self.owner) - 1

    def __len__(self):
        return len(self.owner)

    def to_doc(self) -> dict:
        return {
            "initial": self.initial,
            "positions": [
                {"id": v, "owner": "accept" if self.owner[v] == ACCEPT else "reject",
                 "colour": self.priority[v], "info": repr(self.info[v]),
                 "moves": list(self.succ[v])}
                for v in range(len(self))
            ],
        }

    def dump(self) -> str:
        return json.dumps(self.to_doc(), indent=1) + "\n"


def _attractor(game, pred, player, target, nodes, strategy):
    attr = set(target)
    queue = list(target)
    count = {}
    while queue:
        v = queue.pop()
        for u in pred[v]:
            if u not in nodes or u in attr:
                continue
            if game.owner[u] == player:
                attr.add(u)
                strategy[u] = v
                queue.append(u)
            else:
                c = count.get(u)
                if c is None:
                    c = sum(1 for w in game.succ[u] if w in nodes)
                c -= 1
                count[u] = c
                if c == 0:
                    attr.add(u)
                    queue.append(u)
    return attr


def _zielonka(game, pred, nodes):
    """Returns (win0, win1, strat) with strat defined on each player's own
    positions inside their winning region."""
    if not nodes:
        return set(), set(), {}
    d = max(game.priority[v] for v in nodes)
    p = d % 2
    top = {v for v in nodes if game.priority[v] == d}
    strat: dict = {}
    attr_strat: dict = {}
    a = _attractor(game, pred, p, top, nodes, attr_strat)
    w0, w1, sub = _zielonka(game, pred, nodes - a)
    wins = [w0, w1]
    if not wins[1 - p]:
        strat.update({v: s for v, s in sub.items() if game.owner[v] == p})
        strat.update({v: s for v, s in attr_strat.items() if game.owner[v] == p})
        for v in top:
            if game.owner[v] == p:
                strat[v] = next(w for w in game.succ[v] if w in nodes)
        res = [set(), set()]
        res[p] = set(nodes)
        return res[0], res[1], strat
    b_strat: dict = {}
    b = _attractor(game, pred, 1 - p, wins[1 - p], nodes, b_strat)
    v0, v1, sub2 = _zielonka(game, pred, nodes - b)
    res = [v0, v1]
    res[1 - p] = res[1 - p] | b
    for v, s in sub.items():
        if v in wins[1 - p] and game.owner[v] == 1 - p:
            strat[v] = s
    for v, s in b_strat.items():
        if game.owner[v] == 1 - p:
            strat[v] = s
    for v, s in sub2.items():
        strat[v] = s
    return res[0], res[1], strat


def solve_parity_game(game: ParityGame):
    """Returns (winner per position, positional strategy per owned winning position)."""
    n = len(game)
    for v in range(n):
        if not game.succ[v]:
            raise ValueError(f"position {v} has no move")
    pred = [[] for _ in range(n)]
    for v in range(n):
        for w in game.succ[v]:
            pred[w].append(v)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10000 + 4 * n))
    try:
        w0, w1, strat = _zielonka(game, pred, set(range(n)))
    finally:
        sys.setrecursionlimit(limit)
    winner = [ACCEPT if v in w0 else REJECT for v in range(n)]
    return winner, strat
