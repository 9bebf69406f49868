"""Resource budgets shared by the expensive constructions.

Budgets live in a context variable so that deeply nested constructions can
check them without threading extra arguments through every call.
"""

from __future__ import annotations

import contextvars
import time
from contextlib import contextmanager
from dataclasses import dataclass, replace

DEFAULT_MAX_STATES = 200_000
DEFAULT_MAX_POSITIONS = 5_000_000


class BudgetExceeded(Exception):
    """Raised when a construction outgrows its configured budget."""

    def __init__(self, stage: str, detail: str):
        super().__init__(f"budget exceeded in {stage}: {detail}")
        self.stage = stage
        self.detail = detail


@dataclass(frozen=True)
class Limits:
    max_states: int = DEFAULT_MAX_STATES
    max_positions: int = DEFAULT_MAX_POSITIONS
    deadline: float | None = None


_current = contextvars.ContextVar("gfmcheck_limits", default=Limits())


def current() -> Limits:
    return _current.get()


@contextmanager
def limits(max_states: int | None = None, max_positions: int | None = None,
           timeout: float | None = None):
    """Temporarily tighten or relax the active budget."""
    active = _current.get()
    changes = {}
    if max_states is not None:
        changes["max_states"] = max_states
    if max_positions is not None:
        changes["max_positions"] = max_positions
    if timeout is not None:
        deadline = time.monotonic() + timeout
        if active.deadline is not None:
            deadline = min(deadline, active.deadline)
        changes["deadline"] = deadline
    token = _current.set(replace(active, **changes))
    try:
        yield _current.get()
    finally:
        _current.reset(token)


def check_states(count: int, stage: str) -> None:
    lim = _current.get()
    if count > lim.max_states:
        raise BudgetExceeded(stage, f"more than {lim.max_states} states")
    if lim.deadline is not None and count % 256 == 0 and time.monotonic() > lim.deadline:
        raise BudgetExceeded(stage, "timeout")


def check_positions(count: int, stage: str) -> None:
    lim = _current.get()
    if count > lim.max_positions:
        raise BudgetExceeded(stage, f"more than {lim.max_positions} positions")
    if lim.deadline is not None and count % 256 == 0 and time.monotonic() > lim.deadline:
        raise BudgetExceeded(stage, "timeout")


def check_deadline(stage: str) -> None:
    lim = _current.get()
    if lim.deadline is not None and time.monotonic() > lim.deadline:
        raise BudgetExceeded(stage, "timeout")
