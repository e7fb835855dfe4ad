"""Multi-weighted MSO formulas over finite words.

Variables starting with a lowercase letter are first-order (positions),
uppercase ones are second-order (position sets). Words are sequences of
letters, positions are 0-based.
"""

from __future__ import annotations

import re
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .errors import FormulaSyntaxError, ResourceError, ScopeError, UsageError
from .multiset import EMPTY, FiniteMultiset, cauchy_product, lift_val, union_all
from .structures import format_weight, parse_weight


def is_first_order(name: str) -> bool:
    return name[:1].islower()


def is_second_order(name: str) -> bool:
    return name[:1].isupper()


# --- AST -----------------------------------------------------------------------------


class Formula:
    """Base of all AST nodes; nodes are immutable and hash structurally."""

    __slots__ = ()

    @property
    def children(self) -> tuple[Formula, ...]:
        return ()

    def __hash__(self) -> int:
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self._keys))
            object.__setattr__(self, "_h", h)
        return h

    def __str__(self) -> str:
        return to_text(self)


def _free_of(node) -> frozenset:
    if isinstance(node, Label):
        return frozenset([node.var])
    if isinstance(node, Leq):
        return frozenset([node.x, node.y])
    if isinstance(node, In):
        return frozenset([node.x, node.X])
    if isinstance(node, Const):
        return frozenset()
    if isinstance(node, _Quant):
        return node.body.free - {node.var}
    out = frozenset()
    for c in node.children:
        out |= c.free
    return out


def _init_node(node) -> None:
    free = _free_of(node)
    object.__setattr__(node, "free", free)
    object.__setattr__(node, "free_order", tuple(sorted(free)))


@dataclass(frozen=True)
class Label(Formula):
    letter: Hashable
    var: str
    free: frozenset = field(init=False, repr=False, compare=False)
    free_order: tuple = field(init=False, repr=False, compare=False)
    _keys = ("letter", "var")
    __hash__ = Formula.__hash__

    def __post_init__(self):
        _init_node(self)


@dataclass(frozen=True)
class Leq(Formula):
    x: str
    y: str
    free: frozenset = field(init=False, repr=False, compare=False)
    free_order: tuple = field(init=False, repr=False, compare=False)
    _keys = ("x", "y")
    __hash__ = Formula.__hash__

    def __post_init__(self):
        _init_node(self)


@dataclass(frozen=True)
class In(Formula):
    x: str
    X: str
    free: frozenset = field(init=False, repr=False, compare=False)
    free_order: tuple = field(init=False, repr=False, compare=False)
    _keys = ("x", "X")
    __hash__ = Formula.__hash__

    def __post_init__(self):
        _init_node(self)


@dataclass(frozen=True)
class Const(Formula):
    weight: tuple
    free: frozenset = field(init=False, repr=False, compare=False)
    free_order: tuple = field(init=False, repr=False, compare=False)
    _keys = ("weight",)
    __hash__ = Formula.__hash__

    def __post_init__(self):
        _init_node(self)


@dataclass(frozen=True)
class Not(Formula):
    body: Formula
    free: frozenset = field(init=False, repr=False, compare=False)
    free_order: tuple = field(init=False, repr=False, compare=False)
    _keys = ("body",)
    __hash__ = Formula.__hash__

    def __post_init__(self):
        _init_node(self)

    @property
    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula
    free: frozenset = field(init=False, repr=False, compare=False)
    free_order: tuple = field(init=False, repr=False, compare=False)
    _keys = ("left", "right")
    __hash__ = Formula.__hash__

    def __post_init__(self):
        _init_node(self)

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula
    free: frozenset = field(init=False, repr=False, compare=False)
    free_order: tuple = field(init=False, repr=False, compare=False)
    _keys = ("left", "right")
    __hash__ = Formula.__hash__

    def __post_init__(self):
        _init_node(self)

    @property
    def children(self):
        return (self.left, self.right)


class _Quant(Formula):
    __slots__ = ()
    second_order = False
    symbol = ""

    @property
    def children(self):
        return (self.body,)


def _quant(name: str, symbol: str, second_order: bool):
    @dataclass(frozen=True)
    class Q(_Quant):
        var: str
        body: Formula
        free: frozenset = field(init=False, repr=False, compare=False)
        free_order: tuple = field(init=False, repr=False, compare=False)
        _keys = ("var", "body")
        __hash__ = Formula.__hash__

        def __post_init__(self):
            ok = is_second_order(self.var) if second_order else is_first_order(self.var)
            if not ok:
                kind = "second" if second_order else "first"
                raise ScopeError(f"{self.var!r} is not a {kind}-order variable name")
            _init_node(self)

    Q.__name__ = Q.__qualname__ = name
    Q.symbol = symbol
    Q.second_order = second_order
    return Q


Exists1 = _quant("Exists1", "exists", False)
Forall1 = _quant("Forall1", "forall", False)
Exists2 = _quant("Exists2", "exists", True)
Forall2 = _quant("Forall2", "forall", True)


def implies(b: Formula, psi: Formula) -> Formula:
    """``b -> psi`` abbreviates ``(b & psi) | !b``."""
    return Or(And(b, psi), Not(b))


def big_or(fs: Sequence[Formula]) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def big_and(fs: Sequence[Formula]) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def subformulas(f: Formula) -> Iterable[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.children))


def letters_of(f: Formula) -> set:
    return {g.letter for g in subformulas(f) if isinstance(g, Label)}


def variables_of(f: Formula) -> set[str]:
    out: set[str] = set()
    for g in subformulas(f):
        out |= g.free
        if isinstance(g, _Quant):
            out.add(g.var)
    return out


# --- boolean layer -----------------------------------------------------------------


def is_boolean(f: Formula) -> bool:
    hit = f.__dict__.get("_bool")
    if hit is None:
        if isinstance(f, (Label, Leq, In)):
            hit = True
        elif isinstance(f, (Not, Forall1, Forall2)):
            hit = is_boolean(f.body)
        elif isinstance(f, And):
            hit = is_boolean(f.left) and is_boolean(f.right)
        else:
            hit = False
        object.__setattr__(f, "_bool", hit)
    return hit


def is_almost_boolean(f: Formula) -> bool:
    if isinstance(f, Const) or is_boolean(f):
        return True
    if isinstance(f, (And, Or)):
        return is_almost_boolean(f.left) and is_almost_boolean(f.right)
    return False


def as_boolean(f: Formula) -> Formula:
    """Rewrite a formula into the boolean layer, reading connectives classically.

    ``|`` and ``exists`` are not boolean constructors; in a boolean context
    they are expanded through De Morgan dualities.
    """
    if isinstance(f, (Label, Leq, In)):
        return f
    if isinstance(f, Not):
        return Not(as_boolean(f.body))
    if isinstance(f, And):
        return And(as_boolean(f.left), as_boolean(f.right))
    if isinstance(f, Or):
        return Not(And(Not(as_boolean(f.left)), Not(as_boolean(f.right))))
    if isinstance(f, Forall1):
        return Forall1(f.var, as_boolean(f.body))
    if isinstance(f, Forall2):
        return Forall2(f.var, as_boolean(f.body))
    if isinstance(f, Exists1):
        return Not(Forall1(f.var, Not(as_boolean(f.body))))
    if isinstance(f, Exists2):
        return Not(Forall2(f.var, Not(as_boolean(f.body))))
    raise FormulaSyntaxError(f"weight constant {format_weight(f.weight)} inside a boolean context")


def check_boolean_layer(f: Formula) -> None:
    """Raise when negation or ``forall X`` is applied to a non-boolean body."""
    for g in subformulas(f):
        if isinstance(g, (Not, Forall2)) and not is_boolean(g.body):
            raise FormulaSyntaxError(f"{'!' if isinstance(g, Not) else 'forall ' + g.var} needs a boolean body")


# --- classification -------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    """Per-node tags (preorder, keyed by child-index path) and the two restriction flags."""

    tags: tuple
    forall_restricted: bool
    and_restricted: bool
    diagnostics: tuple

    @property
    def restricted(self) -> bool:
        return self.forall_restricted and self.and_restricted

    @property
    def root_tag(self) -> str:
        return self.tags[0][1]

    def report(self) -> str:
        lines = [
            f"top-level class: {self.root_tag}",
            f"forall-restricted: {'yes' if self.forall_restricted else 'no'}",
            f"and-restricted: {'yes' if self.and_restricted else 'no'}",
            f"syntactically restricted: {'yes' if self.restricted else 'no'}",
        ]
        lines += [f"  {d}" for d in self.diagnostics]
        return "\n".join(lines)


def node_tag(f: Formula) -> str:
    if is_boolean(f):
        return "boolean"
    if is_almost_boolean(f):
        return "almost-boolean"
    return "weighted"


def classify(f: Formula) -> Classification:
    tags = []
    diags = []
    forall_ok = and_ok = True

    def walk(g: Formula, path: tuple):
        nonlocal forall_ok, and_ok
        tags.append((path, node_tag(g)))
        if isinstance(g, Forall1) and not is_almost_boolean(g.body):
            forall_ok = False
            diags.append(f"at {_path_text(path)}: body of 'forall {g.var}' is not almost boolean: {_short(g)}")
        if isinstance(g, And):
            both_ab = is_almost_boolean(g.left) and is_almost_boolean(g.right)
            if not (both_ab or is_boolean(g.left) or is_boolean(g.right)):
                and_ok = False
                diags.append(f"at {_path_text(path)}: conjunction of two non-boolean, non-almost-boolean sides: {_short(g)}")
        for i, c in enumerate(g.children):
            walk(c, path + (i,))

    walk(f, ())
    if forall_ok and not and_ok:
        diags.append("formula is only forall-restricted; compiling it would need a val-commutative structure (not supported)")
    elif and_ok and not forall_ok:
        diags.append("formula is only and-restricted; compiling it would need a left-multiplicative structure (not supported)")
    return Classification(tuple(tags), forall_ok, and_ok, tuple(diags))


def _path_text(path: tuple) -> str:
    return "root" if not path else "root/" + "/".join(map(str, path))


def _short(f: Formula, limit: int = 60) -> str:
    s = to_text(f)
    return s if len(s) <= limit else s[: limit - 3] + "..."


# --- printing -------------------------------------------------------------------------

_IDENT = re.compile(r"^[A-Za-z0-9_]+$")


def _letter_text(letter, aliases: Mapping | None) -> str:
    name = (aliases or {}).get(letter, letter)
    name = str(name)
    return name if _IDENT.match(name) else "{" + name + "}"


def to_text(f: Formula, aliases: Mapping | None = None) -> str:
    """Fully parenthesized ASCII rendering that :func:`parse` reads back."""
    parts: list[str] = []

    def emit(g):
        if isinstance(g, Label):
            parts.append(f"P_{_letter_text(g.letter, aliases)}({g.var})")
        elif isinstance(g, Leq):
            parts.append(f"{g.x} <= {g.y}")
        elif isinstance(g, In):
            parts.append(f"{g.x} in {g.X}")
        elif isinstance(g, Const):
            parts.append(format_weight(g.weight))
        elif isinstance(g, Not):
            parts.append("!(")
            emit(g.body)
            parts.append(")")
        elif isinstance(g, (And, Or)):
            parts.append("(")
            emit(g.left)
            parts.append(" & " if isinstance(g, And) else " | ")
            emit(g.right)
            parts.append(")")
        elif isinstance(g, _Quant):
            parts.append(f"({g.symbol} {g.var}. ")
            emit(g.body)
            parts.append(")")
        else:  # pragma: no cover
            raise TypeError(g)

    emit(f)
    return "".join(parts)


# --- parsing ----------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<label>P_(?:\{[^}]*\}|[^\s(]+))
  | (?P<arrow>->|→)
  | (?P<leq><=|≤)
  | (?P<weight><[-\s\d/.,inf]*>)
  | (?P<not>!|¬)
  | (?P<and>&|∧)
  | (?P<or>\||∨)
  | (?P<exists>∃)
  | (?P<forall>∀)
  | (?P<member>∈)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<dot>\.)
  | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"exists": "exists", "forall": "forall", "in": "member"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        val = m.group(kind)
        if kind == "ident" and val in _KEYWORDS:
            kind = _KEYWORDS[val]
        if kind != "ws":
            out.append((kind, val, pos))
        pos = m.end()
    out.append(("eof", "", pos))
    return out


class _Parser:
    def __init__(self, text, structure, alphabet, aliases):
        self.toks = _tokenize(text)
        self.i = 0
        self.structure = structure
        self.alphabet = None if alphabet is None else set(alphabet)
        self.aliases = dict(aliases or {})
        self.bound: list[str] = []
        self.all_bound: set[str] = set()

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            expected = {"rpar": "')'", "dot": "'.'", "ident": "a variable", "lpar": "'('"}.get(kind, kind)
            raise FormulaSyntaxError(f"expected {expected}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.peek()[0] == "arrow":
            tok = self.take()
            right = self.formula()
            try:
                b = as_boolean(left)
            except FormulaSyntaxError as exc:
                raise FormulaSyntaxError(f"left side of '->' must be boolean: {exc}", tok[2]) from None
            return implies(b, right)
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.peek()[0] == "or":
            self.take()
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.unary()
        while self.peek()[0] == "and":
            self.take()
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "not":
            self.take()
            body = self.unary()
            try:
                return Not(as_boolean(body))
            except FormulaSyntaxError as exc:
                raise FormulaSyntaxError(f"negation needs a boolean body: {exc}", pos) from None
        if kind in ("exists", "forall"):
            return self.quantifier()
        if kind == "lpar":
            self.take()
            f = self.formula()
            self.take("rpar")
            return f
        return self.atom()

    def quantifier(self) -> Formula:
        kind, _, pos = self.take()
        _, var, vpos = self.take("ident")
        if var in self.bound:
            raise ScopeError(f"variable {var!r} is already bound in this scope (at offset {vpos})")
        if self.peek()[0] == "dot":
            self.take()
        self.bound.append(var)
        self.all_bound.add(var)
        body = self.formula()
        self.bound.pop()
        if is_first_order(var):
            return (Exists1 if kind == "exists" else Forall1)(var, body)
        if kind == "exists":
            return Exists2(var, body)
        try:
            return Forall2(var, as_boolean(body))
        except FormulaSyntaxError as exc:
            raise FormulaSyntaxError(f"'forall {var}' needs a boolean body: {exc}", pos) from None

    def atom(self) -> Formula:
        kind, val, pos = self.take()
        if kind == "label":
            name = val[2:]
            if name.startswith("{"):
                name = name[1:-1]
            letter = self.aliases.get(name, name)
            if self.alphabet is not None and letter not in self.alphabet:
                raise FormulaSyntaxError(f"unknown letter {name!r}", pos)
            self.take("lpar")
            _, var, vpos = self.take("ident")
            if not is_first_order(var):
                raise FormulaSyntaxError(f"P_{name} expects a first-order variable, got {var!r}", vpos)
            self.take("rpar")
            return Label(letter, var)
        if kind == "weight":
            try:
                lit = parse_weight(val)
                w = self.structure.coerce(lit) if self.structure is not None else lit
            except Exception as exc:
                raise FormulaSyntaxError(f"bad weight literal {val!r}: {exc}", pos) from None
            return Const(w)
        if kind == "ident":
            nk, _, npos = self.peek()
            if nk == "leq":
                self.take()
                _, y, ypos = self.take("ident")
                for v, p in ((val, pos), (y, ypos)):
                    if not is_first_order(v):
                        raise FormulaSyntaxError(f"'<=' compares first-order variables, got {v!r}", p)
                return Leq(val, y)
            if nk == "member":
                self.take()
                _, X, xpos = self.take("ident")
                if not is_first_order(val):
                    raise FormulaSyntaxError(f"left of 'in' must be first-order, got {val!r}", pos)
                if not is_second_order(X):
                    raise FormulaSyntaxError(f"right of 'in' must be second-order, got {X!r}", xpos)
                return In(val, X)
            raise FormulaSyntaxError(f"variable {val!r} must be followed by '<=' or 'in'", npos)
        raise FormulaSyntaxError(f"unexpected {val or 'end of input'!r}", pos)


def parse(
    text: str,
    structure=None,
    alphabet: Iterable[Hashable] | None = None,
    aliases: Mapping[str, Hashable] | None = None,
) -> Formula:
    """Parse formula text.

    ``aliases`` maps ASCII spellings to letters; weights are coerced by
    ``structure`` when given; unknown letters are rejected when ``alphabet``
    is given.
    """
    p = _Parser(text, structure, alphabet, aliases)
    f = p.formula()
    if p.peek()[0] != "eof":
        _, val, pos = p.peek()
        raise FormulaSyntaxError(f"unexpected {val!r}", pos)
    clash = f.free & p.all_bound
    if clash:
        raise ScopeError(f"variables {sorted(clash)} occur both free and bound")
    check_boolean_layer(f)
    return f


# --- assignments and the extended alphabet ----------------------------------------------


@dataclass(frozen=True)
class AssignedWord:
    """A word with a (V, w)-assignment; ``assignment`` maps names to positions / position sets."""

    word: tuple
    assignment: tuple = ()
    scope: frozenset = frozenset()

    @classmethod
    def make(cls, word: Sequence[Hashable], assignment: Mapping[str, Any] | None = None, scope: Iterable[str] | None = None):
        assignment = dict(assignment or {})
        norm = {}
        for v, val in assignment.items():
            norm[v] = frozenset(val) if is_second_order(v) else val
        scope = frozenset(norm) if scope is None else frozenset(scope)
        extra = set(norm) - scope
        if extra:
            raise ScopeError(f"assigned variables {sorted(extra)} are outside the scope")
        return cls(tuple(word), tuple(sorted(norm.items())), scope)

    @property
    def sigma(self) -> dict:
        return dict(self.assignment)

    @property
    def valid(self) -> bool:
        n = len(self.word)
        sigma = self.sigma
        for v in self.scope:
            if v not in sigma:
                return False
            val = sigma[v]
            if is_first_order(v):
                if not isinstance(val, int) or not 0 <= val < n:
                    return False
            elif any(not 0 <= i < n for i in val):
                return False
        return True


def extended_letter(a: Hashable, marks: Iterable[str]) -> tuple:
    return (a, tuple(sorted(marks)))


def extended_alphabet(alphabet: Iterable[Hashable], scope: Iterable[str]) -> list[tuple]:
    """All letters of ``Sigma x {0,1}^V`` in canonical order."""
    from itertools import combinations

    scope = sorted(scope)
    subsets = [c for k in range(len(scope) + 1) for c in combinations(scope, k)]
    from .multiset import canonical_sorted

    return [(a, s) for a in canonical_sorted(set(alphabet)) for s in subsets]


def encode(aw: AssignedWord) -> tuple:
    """Encode a (valid) assigned word over the extended alphabet."""
    sigma = aw.sigma
    out = []
    for i, a in enumerate(aw.word):
        marks = []
        for v in aw.scope:
            val = sigma.get(v)
            if val is None:
                continue
            if (val == i) if is_first_order(v) else (i in val):
                marks.append(v)
        out.append(extended_letter(a, marks))
    return tuple(out)


def decode(word: Sequence[tuple], scope: Iterable[str]) -> AssignedWord | None:
    """Inverse of :func:`encode`; ``None`` when some first-order row is not a single 1."""
    scope = frozenset(scope)
    base = tuple(a for a, _ in word)
    sigma: dict[str, Any] = {}
    for v in scope:
        pos = [i for i, (_, marks) in enumerate(word) if v in marks]
        if is_first_order(v):
            if len(pos) != 1:
                return None
            sigma[v] = pos[0]
        else:
            sigma[v] = frozenset(pos)
    for _, marks in word:
        if not set(marks) <= scope:
            return None
    return AssignedWord.make(base, sigma, scope)


# --- direct multiset semantics --------------------------------------------------------------

SECOND_ORDER_LIMIT = 20


def _has_second_order_quantifier(f: Formula) -> bool:
    return any(isinstance(g, (Exists2, Forall2)) for g in subformulas(f))


def _subsets_lex(n: int) -> list[frozenset]:
    """Subsets of {0..n-1} ordered lexicographically by bit vector (position 0 first)."""
    out = []
    for code in range(1 << n):
        out.append(frozenset(i for i in range(n) if code >> (n - 1 - i) & 1))
    return out


class _Evaluator:
    def __init__(self, word: tuple, s):
        self.word = word
        self.n = len(word)
        self.s = s
        self.one = FiniteMultiset.simple(s.unit)
        self.memo: dict = {}
        self._subsets = None

    def subsets(self):
        if self._subsets is None:
            self._subsets = _subsets_lex(self.n)
        return self._subsets

    def ev(self, f: Formula, sigma: dict) -> FiniteMultiset:
        key = (f, tuple(sigma[v] for v in f.free_order))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        r = self._ev(f, sigma)
        self.memo[key] = r
        return r

    def _ev(self, f, sigma):
        one = self.one
        if isinstance(f, Label):
            return one if self.word[sigma[f.var]] == f.letter else EMPTY
        if isinstance(f, Leq):
            return one if sigma[f.x] <= sigma[f.y] else EMPTY
        if isinstance(f, In):
            return one if sigma[f.x] in sigma[f.X] else EMPTY
        if isinstance(f, Const):
            return FiniteMultiset.simple(f.weight)
        if isinstance(f, Not):
            return EMPTY if self.ev(f.body, sigma) else one
        if isinstance(f, And):
            left = self.ev(f.left, sigma)
            if not left:
                return EMPTY
            return cauchy_product(left, self.ev(f.right, sigma), self.s.prod)
        if isinstance(f, Or):
            return self.ev(f.left, sigma) | self.ev(f.right, sigma)
        domain = self.subsets() if f.second_order else range(self.n)
        saved = sigma.get(f.var, _MISSING)
        try:
            if isinstance(f, (Exists1, Exists2)):
                parts = []
                for val in domain:
                    sigma[f.var] = val
                    parts.append(self.ev(f.body, sigma))
                return union_all(parts)
            if isinstance(f, Forall2):
                # boolean body: lifting over {eps, [1]} is the conjunction
                for val in domain:
                    sigma[f.var] = val
                    if not self.ev(f.body, sigma):
                        return EMPTY
                return one
            parts = []
            for val in domain:
                sigma[f.var] = val
                r = self.ev(f.body, sigma)
                if not r:
                    return EMPTY
                parts.append(r)
            return lift_val(parts, self.s.val, self.s.fold)
        finally:
            if saved is _MISSING:
                sigma.pop(f.var, None)
            else:
                sigma[f.var] = saved


_MISSING = object()


def _as_assigned(aw) -> AssignedWord:
    if isinstance(aw, AssignedWord):
        return aw
    return AssignedWord.make(tuple(aw))


def eval_multiset(f: Formula, aw: AssignedWord | Sequence[Hashable], s) -> FiniteMultiset:
    """Multiset semantics of ``f`` on an assigned word; invalid assignments give the empty multiset."""
    aw = _as_assigned(aw)
    if not aw.word:
        raise UsageError("formulas are evaluated on nonempty words only")
    if not f.free <= aw.scope:
        raise ScopeError(f"free variables {sorted(f.free - aw.scope)} are not in the scope")
    if not aw.valid:
        return EMPTY
    if len(aw.word) > SECOND_ORDER_LIMIT and _has_second_order_quantifier(f):
        raise ResourceError(
            f"direct evaluation with set quantifiers is limited to words of length {SECOND_ORDER_LIMIT}"
        )
    sigma = {v: val for v, val in aw.assignment if v in f.free}
    return _Evaluator(aw.word, s).ev(f, sigma)


def eval_encoded(f: Formula, word: Sequence[tuple], scope: Iterable[str], s) -> FiniteMultiset:
    """Multiset semantics on a word over the extended alphabet."""
    aw = decode(word, scope)
    if aw is None:
        return EMPTY
    return eval_multiset(f, aw, s)


def evaluate(f: Formula, aw: AssignedWord | Sequence[Hashable], s) -> Any:
    return s.phi(eval_multiset(f, aw, s))


# the operation is called ``eval`` in the public interface
eval = evaluate  # noqa: A001
