"""Finite multisets over an arbitrary weight domain.

A :class:`FiniteMultiset` is an immutable counting map ``element -> count``
with strictly positive counts. Union, Cauchy product and the lifted
valuation are the operations used by the multiset semantics of formulas and
by automata carrying multiset weights.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Hashable, Iterable, Iterator, Mapping, Sequence
from typing import Any, NamedTuple

from .errors import check_count


def canonical_sorted(items: Iterable[Any]) -> list[Any]:
    """Sort by natural order, falling back to ``repr`` for mixed types."""
    items = list(items)
    try:
        return sorted(items)
    except TypeError:
        return sorted(items, key=repr)


class FiniteMultiset(Mapping):
    """Immutable finitely supported multiset.

    >>> r = FiniteMultiset({"a": 1}) | FiniteMultiset({"a": 2})
    >>> r["a"], r.total
    (3, 3)
    """

    __slots__ = ("_counts", "_hash")

    def __init__(self, counts: Mapping[Hashable, int] | Iterable[tuple[Hashable, int]] = ()):
        items = counts.items() if isinstance(counts, Mapping) else counts
        data: dict[Hashable, int] = {}
        for m, c in items:
            if c < 0:
                raise ValueError(f"negative count {c} for {m!r}")
            if c:
                data[m] = data.get(m, 0) + int(c)
        check_count(sum(data.values()))
        self._counts = data
        self._hash: int | None = None

    @classmethod
    def simple(cls, m: Hashable) -> FiniteMultiset:
        """The multiset ``[m]`` containing one copy of ``m``."""
        return cls({m: 1})

    @classmethod
    def of(cls, elements: Iterable[Hashable]) -> FiniteMultiset:
        counts: dict[Hashable, int] = {}
        for m in elements:
            counts[m] = counts.get(m, 0) + 1
        return cls(counts)

    # Mapping protocol; missing elements have count 0.
    def __getitem__(self, m: Hashable) -> int:
        return self._counts.get(m, 0)

    def __contains__(self, m: object) -> bool:
        return m in self._counts

    def __iter__(self) -> Iterator[Hashable]:
        return iter(canonical_sorted(self._counts))

    def __len__(self) -> int:
        return len(self._counts)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FiniteMultiset):
            return self._counts == other._counts
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._counts.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._counts)

    def __or__(self, other: FiniteMultiset) -> FiniteMultiset:
        return union(self, other)

    def __repr__(self) -> str:
        inner = ", ".join(f"{m!r}: {c}" for m, c in self.items())
        return f"FiniteMultiset({{{inner}}})"

    @property
    def support(self) -> frozenset:
        return frozenset(self._counts)

    @property
    def total(self) -> int:
        return sum(self._counts.values())

    def items(self) -> list[tuple[Hashable, int]]:  # type: ignore[override]
        """Pairs ``(element, count)`` in canonical element order."""
        return [(m, self._counts[m]) for m in canonical_sorted(self._counts)]

    def map(self, f: Callable[[Hashable], Hashable]) -> FiniteMultiset:
        out: dict[Hashable, int] = {}
        for m, c in self._counts.items():
            k = f(m)
            out[k] = out.get(k, 0) + c
        return FiniteMultiset(out)


EMPTY = FiniteMultiset()


def union(r1: FiniteMultiset, r2: FiniteMultiset) -> FiniteMultiset:
    """Pointwise sum of counts."""
    if not r2:
        return r1
    if not r1:
        return r2
    out = dict(r1._counts)
    for m, c in r2._counts.items():
        out[m] = out.get(m, 0) + c
    return FiniteMultiset(out)


def union_all(rs: Iterable[FiniteMultiset]) -> FiniteMultiset:
    out: dict[Hashable, int] = {}
    for r in rs:
        for m, c in r._counts.items():
            out[m] = out.get(m, 0) + c
    return FiniteMultiset(out)


def cauchy_product(
    r1: FiniteMultiset, r2: FiniteMultiset, prod: Callable[[Any, Any], Any]
) -> FiniteMultiset:
    """``(r1 . r2)(m)`` sums ``r1(m1) * r2(m2)`` over all ``prod(m1, m2) == m``."""
    if not r1 or not r2:
        return EMPTY
    check_count(r1.total * r2.total)
    out: dict[Hashable, int] = {}
    for m1, c1 in r1._counts.items():
        for m2, c2 in r2._counts.items():
            m = prod(m1, m2)
            out[m] = out.get(m, 0) + c1 * c2
    return FiniteMultiset(out)


class Fold(NamedTuple):
    """Incremental presentation of a valuation function.

    ``val(m1, ..., mn) == finish(step(...step(start(m1), m2)..., mn))``.
    Folding lets the lifted valuation merge equal partial aggregates instead
    of enumerating every tuple of support elements.
    """

    start: Callable[[Any], Hashable]
    step: Callable[[Hashable, Any], Hashable]
    finish: Callable[[Hashable], Any]


def sequence_fold(val: Callable[[Sequence[Any]], Any]) -> Fold:
    """Fold that records the whole sequence and applies ``val`` at the end."""
    return Fold(lambda m: (m,), lambda acc, m: acc + (m,), lambda acc: val(acc))


def lift_val(
    rs: Sequence[FiniteMultiset],
    val: Callable[[Sequence[Any]], Any],
    fold: Fold | None = None,
) -> FiniteMultiset:
    """Valuation lifted to multisets.

    ``Val(r1..rn)(m)`` sums ``prod_i r_i(m_i)`` over all tuples with
    ``val(m1..mn) == m``.
    """
    if not rs:
        raise ValueError("lift_val needs at least one multiset")
    if any(not r for r in rs):
        return EMPTY
    total = 1
    for r in rs:
        total *= r.total
    check_count(total)
    if fold is None:
        out: dict[Hashable, int] = {}
        for combo in itertools.product(*(r._counts.items() for r in rs)):
            weight = 1
            for _, c in combo:
                weight *= c
            m = val(tuple(e for e, _ in combo))
            out[m] = out.get(m, 0) + weight
        return FiniteMultiset(out)
    partial: dict[Hashable, int] = {}
    for m, c in rs[0]._counts.items():
        acc = fold.start(m)
        partial[acc] = partial.get(acc, 0) + c
    for r in rs[1:]:
        nxt: dict[Hashable, int] = {}
        for acc, c in partial.items():
            for m, k in r._counts.items():
                a2 = fold.step(acc, m)
                nxt[a2] = nxt.get(a2, 0) + c * k
        partial = nxt
    out = {}
    for acc, c in partial.items():
        m = fold.finish(acc)
        out[m] = out.get(m, 0) + c
    return FiniteMultiset(out)
