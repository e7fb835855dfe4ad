"""Exception hierarchy and resource budgets shared by all modules."""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, replace


class MwmsoError(Exception):
    """Base class for all library errors."""

    exit_code = 2


class UsageError(MwmsoError):
    exit_code = 2


class ResourceError(MwmsoError):
    """A configured state or count budget was exceeded."""

    exit_code = 3


class StructuralError(MwmsoError):
    """Malformed automaton, mismatched alphabets, out-of-domain weights."""

    exit_code = 4


class FormulaSyntaxError(MwmsoError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class ScopeError(MwmsoError):
    pass


class NotRestrictedError(MwmsoError):
    """Sentence lies outside the fragment the compiler accepts."""

    exit_code = 4


class DomainError(StructuralError):
    """A weight or value lies outside the domain of a valuation structure."""


@dataclass(frozen=True)
class Budgets:
    states: int = 2**16
    count: int = 2**24


_BUDGETS: contextvars.ContextVar[Budgets] = contextvars.ContextVar("mwmso_budgets", default=Budgets())


def budgets() -> Budgets:
    return _BUDGETS.get()


@contextlib.contextmanager
def use_budgets(states: int | None = None, count: int | None = None):
    """Temporarily override the state/count ceilings."""
    current = _BUDGETS.get()
    new = replace(
        current,
        states=current.states if states is None else states,
        count=current.count if count is None else count,
    )
    token = _BUDGETS.set(new)
    try:
        yield new
    finally:
        _BUDGETS.reset(token)


def check_states(n: int, what: str = "automaton") -> None:
    limit = _BUDGETS.get().states
    if n > limit:
        raise ResourceError(f"{what} exceeds the state budget ({n} > {limit})")


def check_count(n: int) -> None:
    limit = _BUDGETS.get().count
    if n > limit:
        raise ResourceError(f"multiset total count exceeds the budget ({n} > {limit})")
