"""Multi-weighted automata and multi-weighted MSO logic with multiset semantics."""

from .errors import (
    DomainError,
    FormulaSyntaxError,
    MwmsoError,
    NotRestrictedError,
    ResourceError,
    ScopeError,
    StructuralError,
    UsageError,
    use_budgets,
)
from .multiset import EMPTY, FiniteMultiset, cauchy_product, lift_val, union

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "DomainError",
    "FiniteMultiset",
    "FormulaSyntaxError",
    "MwmsoError",
    "NotRestrictedError",
    "ResourceError",
    "ScopeError",
    "StructuralError",
    "UsageError",
    "cauchy_product",
    "lift_val",
    "union",
    "use_budgets",
]
