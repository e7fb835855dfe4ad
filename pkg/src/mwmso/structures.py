"""Valuation structures: weight domain, valuation, product, unit, evaluator.

Weights are tuples of :class:`fractions.Fraction` (tuples of ``int`` for the
energy structure). Extended values use ``math.inf``; Python compares it with
``Fraction`` correctly.
"""

from __future__ import annotations

import math
import re
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import DomainError, UsageError
from .multiset import FiniteMultiset, Fold

Weight = tuple
INF = math.inf


def _vadd(a: Weight, b: Weight) -> Weight:
    return tuple(x + y for x, y in zip(a, b))


def _vsum(ms: Sequence[Weight]) -> Weight:
    acc = ms[0]
    for m in ms[1:]:
        acc = _vadd(acc, m)
    return acc


def format_number(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.12g}"
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


def format_weight(m: Weight) -> str:
    return "<" + ",".join(format_number(c) for c in m) + ">"


_NUM = re.compile(r"\s*(-?(?:inf|\d+(?:/\d+)?(?:\.\d+)?))\s*$")


def parse_number(text: str) -> Fraction | float:
    m = _NUM.match(text)
    if not m:
        raise UsageError(f"not a rational number: {text!r}")
    tok = m.group(1)
    if tok.endswith("inf"):
        return -INF if tok.startswith("-") else INF
    return Fraction(tok)


def parse_weight(text: str) -> tuple:
    """Parse an angle-bracketed literal such as ``<1/2, -3>``."""
    s = text.strip()
    if not (s.startswith("<") and s.endswith(">")):
        raise UsageError(f"weight literal must look like <a,b,...>: {text!r}")
    body = s[1:-1].strip()
    if not body:
        raise UsageError("empty weight literal")
    return tuple(parse_number(part) for part in body.split(","))


# --- evaluators ---------------------------------------------------------------


def _ratio(x, y):
    # x/0 is +inf for every x, including 0
    if y == 0:
        return INF
    if isinstance(x, float) and math.isinf(x):
        return x
    return Fraction(x) / Fraction(y)


def phi_ratio(r: FiniteMultiset):
    """Maximum ``x / y`` over the support; ``-inf`` on the empty multiset."""
    if not r:
        return -INF
    return max(_ratio(x, y) for x, y in r.support)


def phi_twocost(r: FiniteMultiset, p):
    """Cheapest primary cost among pairs whose secondary cost is at most ``p``."""
    values = [x for x, y in r.support if y <= p]
    return min(values) if values else INF


def phi_displacement(r: FiniteMultiset) -> float:
    """Count-weighted mean Euclidean norm (0.0 on the empty multiset)."""
    if not r:
        return 0.0
    total = 0
    acc = 0.0
    for v, c in r.items():
        sq = sum(Fraction(x) * Fraction(x) for x in v)
        acc += c * math.sqrt(sq)
        total += c
    return acc / total


def energy_prod(u1: Weight, u2: Weight, emax: Weight) -> Weight:
    """Componentwise sum clamped into ``[-emax, emax]``."""
    for u in (u1, u2):
        if len(u) != len(emax) or any(abs(x) > e for x, e in zip(u, emax)):
            raise DomainError(f"energy vector {u!r} outside [-{emax}, {emax}]")
    return tuple(max(min(a + b, e), -e) for a, b, e in zip(u1, u2, emax))


# --- structures ------------------------------------------------------------------


class PvStructure:
    """Base class: subclasses define ``val``, ``prod``, ``unit`` and ``phi``."""

    name: str = "abstract"
    arity: int = 1
    unit: Weight = ()
    fold: Fold | None = None

    def val(self, ms: Sequence[Weight]) -> Weight:
        raise NotImplementedError

    def prod(self, a: Weight, b: Weight) -> Weight:
        raise NotImplementedError

    def phi(self, r: FiniteMultiset) -> Any:
        raise NotImplementedError

    def coerce(self, literal: tuple) -> Weight:
        """Check a parsed literal against the weight domain."""
        if len(literal) != self.arity:
            raise DomainError(
                f"{self.name} weights have {self.arity} components, got {len(literal)}"
            )
        if any(isinstance(x, float) for x in literal):
            raise DomainError(f"{self.name} weights must be finite rationals")
        return tuple(Fraction(x) for x in literal)

    def format_value(self, k: Any) -> str:
        return format_number(k)

    def __repr__(self) -> str:
        return self.name


class _SumStructure(PvStructure):
    """Val and product are both the componentwise sum; unit is the zero vector."""

    def __init__(self, arity: int):
        self.arity = arity
        self.unit = tuple(Fraction(0) for _ in range(arity))
        self.fold = Fold(lambda m: m, _vadd, lambda acc: acc)

    def val(self, ms):
        return _vsum(ms)

    def prod(self, a, b):
        return _vadd(a, b)


class RatioStructure(_SumStructure):
    """Reward/cost pairs; behavior is the best accumulated ratio."""

    def __init__(self):
        super().__init__(2)
        self.name = "ratio"

    def coerce(self, literal):
        m = super().coerce(literal)
        if m[1] < 0:
            raise DomainError(f"ratio costs must be nonnegative: {format_weight(m)}")
        return m

    def phi(self, r):
        return phi_ratio(r)


class TwoCostStructure(_SumStructure):
    """Primary/secondary costs; behavior is the cheapest primary under a bound."""

    def __init__(self, p):
        super().__init__(2)
        self.p = Fraction(p)
        self.name = f"twocost({format_number(self.p)})"

    def phi(self, r):
        return phi_twocost(r, self.p)


class DisplacementStructure(_SumStructure):
    """Displacement vectors in n dimensions; behavior is the mean length."""

    def __init__(self, n: int):
        if n < 1:
            raise UsageError("disp(n) needs n >= 1")
        super().__init__(n)
        self.name = f"disp({n})"

    def phi(self, r):
        return phi_displacement(r)


class OmegaStructure:
    """Infinite-word variant: ``val_omega`` takes a lasso-presented sequence."""

    name = "abstract-omega"
    arity = 1
    unit: Weight = ()

    def val_omega(self, prefix: Sequence[Weight], period: Sequence[Weight]) -> Weight:
        raise NotImplementedError

    def prod(self, a, b):
        raise NotImplementedError

    def phi(self, r: FiniteMultiset):
        raise NotImplementedError

    def coerce(self, literal: tuple) -> Weight:
        raise NotImplementedError

    def format_value(self, k):
        return format_number(k)

    def __repr__(self) -> str:
        return self.name


class OmegaRatioStructure(OmegaStructure):
    """Supremum (limsup) reward/cost ratio of infinite runs.

    Rewards may be infinite on the weight domain; ``inf + (-inf)`` is fixed
    to ``-inf``. Sequences that are not finite reward / nonnegative cost are
    rejected, except for ``m`` followed by units.
    """

    name = "omega-ratio"
    arity = 2

    def __init__(self):
        self.unit = (Fraction(0), Fraction(0))

    def coerce(self, literal):
        if len(literal) != 2:
            raise DomainError("omega-ratio weights have 2 components")
        x, y = literal
        if isinstance(y, float) or y < 0:
            raise DomainError("omega-ratio costs must be finite and nonnegative")
        x = x if isinstance(x, float) else Fraction(x)
        return (x, Fraction(y))

    def prod(self, a, b):
        out = []
        for x, y in zip(a, b):
            if isinstance(x, float) and isinstance(y, float) and math.isinf(x) and math.isinf(y) and x != y:
                out.append(-INF)
            else:
                out.append(x + y)
        return tuple(out)

    def phi(self, r):
        return phi_ratio(r)

    def val_omega(self, prefix, period):
        if not period:
            raise DomainError("lasso period must be nonempty")
        prefix, period = list(prefix), list(period)
        if all(m == self.unit for m in period) and all(m == self.unit for m in prefix[1:]):
            return prefix[0] if prefix else self.unit
        for x, y in prefix + period:
            if isinstance(x, float) or isinstance(y, float) or y < 0:
                raise DomainError("omega-ratio valuation is only defined on finite rewards, nonnegative costs")
        r_pre = sum((x for x, _ in prefix), Fraction(0))
        c_pre = sum((y for _, y in prefix), Fraction(0))
        r_per = sum((x for x, _ in period), Fraction(0))
        c_per = sum((y for _, y in period), Fraction(0))
        rewards_converge = all(x == 0 for x, _ in period)
        costs_converge = all(y == 0 for _, y in period)
        if rewards_converge and costs_converge:
            return (r_pre, c_pre)
        one = Fraction(1)
        if c_per > 0:
            return (r_per / c_per, one)
        # costs stay at c_pre forever, rewards do not converge
        if c_pre == 0:
            return (INF, one)
        if r_per > 0:
            return (INF, one)
        if r_per < 0:
            return (-INF, one)
        best = None
        acc = r_pre
        for x, _ in period:
            acc += x
            best = acc if best is None else max(best, acc)
        return (best / c_pre, one)


class EnergyStructure(OmegaStructure):
    """Bounded integer energy vectors under clamped addition."""

    def __init__(self, emax: Sequence[int]):
        emax = tuple(int(e) for e in emax)
        if not emax or any(e <= 0 for e in emax):
            raise UsageError("energy(Emax...) needs positive bounds")
        self.emax = emax
        self.arity = len(emax)
        self.unit = tuple(0 for _ in emax)
        self.name = "energy(" + ",".join(map(str, emax)) + ")"

    @property
    def domain_size(self) -> int:
        n = 1
        for e in self.emax:
            n *= 2 * e + 1
        return n

    def coerce(self, literal):
        if len(literal) != self.arity:
            raise DomainError(f"{self.name} weights have {self.arity} components")
        out = []
        for x, e in zip(literal, self.emax):
            if isinstance(x, float) or Fraction(x).denominator != 1 or abs(x) > e:
                raise DomainError(f"energy weight {literal!r} outside [-{e}, {e}] integers")
            out.append(int(x))
        return tuple(out)

    def prod(self, a, b):
        return energy_prod(a, b, self.emax)

    def phi(self, r):
        return any(all(x >= 0 for x in m) for m in r.support)

    def val_omega(self, prefix, period):
        if not period:
            raise DomainError("lasso period must be nonempty")
        v = self.unit
        low = list(v)
        for m in prefix:
            v = self.prod(v, m)
            low = [min(a, b) for a, b in zip(low, v)]
        seen = set()
        phase = 0
        while (phase, v) not in seen:
            seen.add((phase, v))
            v = self.prod(v, period[phase])
            low = [min(a, b) for a, b in zip(low, v)]
            phase = (phase + 1) % len(period)
        return tuple(low)


_SPEC = re.compile(r"^\s*([a-z-]+)\s*(?:\(([^)]*)\))?\s*$")


def parse_structure(text: str) -> PvStructure | OmegaStructure:
    """Build a structure from its CLI name, e.g. ``twocost(10)`` or ``energy(2,3)``."""
    m = _SPEC.match(text)
    if not m:
        raise UsageError(f"bad structure spec {text!r}")
    name, args = m.group(1), m.group(2)
    params = [a.strip() for a in args.split(",")] if args else []
    if name == "ratio" and not params:
        return RatioStructure()
    if name == "twocost" and len(params) == 1:
        p = parse_number(params[0])
        if isinstance(p, float):
            raise UsageError("twocost bound must be rational")
        return TwoCostStructure(p)
    if name == "disp" and len(params) == 1:
        return DisplacementStructure(int(params[0]))
    if name == "omega-ratio" and not params:
        return OmegaRatioStructure()
    if name == "energy" and params:
        return EnergyStructure([int(p) for p in params])
    raise UsageError(f"unknown structure {text!r}")


@dataclass(frozen=True)
class Violation:
    law: str
    sample: Any
    detail: str


def validate_structure(s, samples: Sequence[Weight], max_pad: int = 6) -> list[Violation]:
    """Check the identity, unit-padding and unit laws on the given samples."""
    out: list[Violation] = []
    one = s.unit
    for m in samples:
        if isinstance(s, OmegaStructure):
            got = s.val_omega([m], [one])
            if got != m:
                out.append(Violation("omega-padding", m, f"Val^w({format_weight(m)} 1^w) = {format_weight(got)}"))
        else:
            got = s.val([m])
            if got != m:
                out.append(Violation("identity", m, f"Val({format_weight(m)}) = {format_weight(got)}"))
            for k in range(1, max_pad + 1):
                got = s.val([m] + [one] * k)
                if got != m:
                    out.append(Violation("padding", m, f"Val({format_weight(m)}, 1 x{k}) = {format_weight(got)}"))
                    break
        for law, got in (("right-unit", s.prod(m, one)), ("left-unit", s.prod(one, m))):
            if got != m:
                out.append(Violation(law, m, f"{law} on {format_weight(m)} gives {format_weight(got)}"))
    return out
