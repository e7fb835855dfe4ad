"""Translation between syntactically restricted sentences and multi-weighted automata.

Subformula automata work over the extended alphabet of their free
variables and carry multiset payloads; the final automaton is unfolded to
element payloads. Letters of an extended alphabet are pairs
``(letter, marks)`` where ``marks`` is the sorted tuple of variables whose
row holds a 1 at that position.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass

from .automata import (
    Dfa,
    Mwa,
    complement,
    determinize,
    empty_automaton,
    intersect,
    inverse_relabel,
    is_empty,
    minimize,
    nfa_project,
    product_with_dfa,
    relabel_project,
    scan_dfa,
    to_element_payloads,
    trim,
    union_automata,
    union_dfa,
)
from .errors import NotRestrictedError, StructuralError, UsageError
from .logic import (
    And,
    Const,
    Exists1,
    Exists2,
    Forall1,
    Forall2,
    Formula,
    In,
    Label,
    Leq,
    Not,
    Or,
    big_and,
    big_or,
    classify,
    extended_alphabet,
    is_almost_boolean,
    is_boolean,
    is_first_order,
    letters_of,
)
from .multiset import EMPTY, FiniteMultiset, canonical_sorted, cauchy_product
from .automata import unfold

# --- validity and boolean formulas ------------------------------------------------------


def _first_order(scope: Iterable[str]) -> frozenset:
    return frozenset(v for v in scope if is_first_order(v))


def valid_dfa(alphabet: Iterable[Hashable], scope: Iterable[str]) -> Dfa:
    """DFA for the valid words of the extended alphabet: one mark per first-order row."""
    fo = _first_order(scope)

    def step(seen, letter):
        marks = fo.intersection(letter[1])
        if marks & seen:
            return None
        return seen | marks

    return scan_dfa(extended_alphabet(alphabet, scope), frozenset(), step, lambda seen: seen == fo)


def _atom_dfa(alphabet, scope, check) -> Dfa:
    """Valid words on which ``check(letter, marks, seen_before)`` never fails."""
    fo = _first_order(scope)

    def step(seen, letter):
        marks = frozenset(letter[1])
        if marks & fo & seen:
            return None
        if not check(letter[0], marks, seen):
            return None
        return seen | (marks & fo)

    return minimize(scan_dfa(extended_alphabet(alphabet, scope), frozenset(), step, lambda seen: seen == fo))


class _Context:
    def __init__(self, alphabet: Sequence[Hashable], structure, trace: list | None):
        self.alphabet = tuple(canonical_sorted(set(alphabet)))
        self.s = structure
        self.trace = trace
        self._dfa: dict = {}
        self._valid: dict = {}
        self._steps: dict = {}
        self._ext: dict = {}

    def log(self, msg: str) -> None:
        if self.trace is not None:
            self.trace.append(msg)

    def ext(self, scope: frozenset) -> list:
        if scope not in self._ext:
            self._ext[scope] = extended_alphabet(self.alphabet, scope)
        return self._ext[scope]

    def valid(self, scope: frozenset) -> Dfa:
        if scope not in self._valid:
            self._valid[scope] = minimize(valid_dfa(self.alphabet, scope))
        return self._valid[scope]

    # boolean layer ------------------------------------------------------------------

    def boolean(self, f: Formula, scope: frozenset) -> Dfa:
        key = (f, scope)
        if key not in self._dfa:
            self._dfa[key] = minimize(self._boolean(f, scope))
        return self._dfa[key]

    def _boolean(self, f: Formula, scope: frozenset) -> Dfa:
        if isinstance(f, Label):
            return _atom_dfa(self.alphabet, scope, lambda a, marks, seen: f.var not in marks or a == f.letter)
        if isinstance(f, Leq):
            return _atom_dfa(
                self.alphabet,
                scope,
                lambda a, marks, seen: f.y not in marks or f.x in marks or f.x in seen,
            )
        if isinstance(f, In):
            return _atom_dfa(self.alphabet, scope, lambda a, marks, seen: f.x not in marks or f.X in marks)
        if isinstance(f, And):
            return intersect(self.boolean(f.left, scope), self.boolean(f.right, scope))
        if isinstance(f, Not):
            return intersect(complement(self.boolean(f.body, scope)), self.valid(scope))
        if isinstance(f, (Forall1, Forall2)):
            dual = Not((Exists1 if isinstance(f, Forall1) else Exists2)(f.var, Not(f.body)))
            return self._boolean_exists_dual(dual, scope)
        raise StructuralError(f"not a boolean formula: {f}")

    def _boolean_exists_dual(self, dual: Not, scope: frozenset) -> Dfa:
        inner = dual.body  # exists v. !body, evaluated classically
        v = inner.var
        if v in scope:
            raise StructuralError(f"variable {v!r} is rebound inside its own scope")
        wider = scope | {v}
        d = self.boolean(inner.body, wider)
        drop = _dropper(v)
        projected = minimize(determinize(nfa_project(d.to_nfa(), drop)))
        projected = _with_alphabet(projected, self.ext(scope))
        exists = intersect(projected, self.valid(scope))
        return intersect(complement(exists), self.valid(scope))

    # step functions -----------------------------------------------------------------

    def step(self, f: Formula, scope: frozenset) -> StepFunction:
        key = (f, scope)
        if key not in self._steps:
            self._steps[key] = self._step(f, scope)
            self.log(f"step function for {_short(f)} over {sorted(scope)}: {len(self._steps[key].blocks)} blocks")
        return self._steps[key]

    def _step(self, f: Formula, scope: frozenset) -> StepFunction:
        one = FiniteMultiset.simple(self.s.unit)
        if isinstance(f, Const):
            n = self.valid(scope)
            return StepFunction.make(scope, [(n, FiniteMultiset.simple(f.weight)), (minimize(complement(n)), EMPTY)])
        if is_boolean(f):
            d = self.boolean(f, scope)
            return StepFunction.make(scope, [(d, one), (minimize(complement(d)), EMPTY)])
        if isinstance(f, (And, Or)):
            left = self.step(f.left, scope)
            right = self.step(f.right, scope)
            if isinstance(f, Or):
                combine = lambda c1, c2: c1 | c2
            else:
                combine = lambda c1, c2: cauchy_product(c1, c2, self.s.prod)
            blocks = []
            for d1, c1 in left.blocks:
                for d2, c2 in right.blocks:
                    d = minimize(intersect(d1, d2))
                    if not is_empty(d):
                        blocks.append((d, combine(c1, c2)))
            return StepFunction.make(scope, blocks)
        raise StructuralError(f"not an almost boolean formula: {f}")

    # weighted layer -----------------------------------------------------------------

    def automaton(self, f: Formula) -> Mwa:
        scope = f.free
        if is_almost_boolean(f):
            a = self._from_step(self.step(f, scope))
        elif isinstance(f, Or):
            a = union_automata(self.widen(self.automaton(f.left), f.left.free, scope),
                               self.widen(self.automaton(f.right), f.right.free, scope))
        elif isinstance(f, And):
            if is_boolean(f.right):
                weighted, guard = f.left, f.right
            elif is_boolean(f.left):
                weighted, guard = f.right, f.left
            else:
                raise NotRestrictedError(f"conjunction without a boolean side: {_short(f)}")
            a = self.widen(self.automaton(weighted), weighted.free, scope)
            a = product_with_dfa(a, self.boolean(guard, scope))
        elif isinstance(f, (Exists1, Exists2)):
            wider = scope | {f.var}
            a = self.widen(self.automaton(f.body), f.body.free, wider)
            a = relabel_project(a, _dropper(f.var), self.ext(scope))
        elif isinstance(f, Forall1):
            if not is_almost_boolean(f.body):
                raise NotRestrictedError(f"body of 'forall {f.var}' is not almost boolean: {_short(f)}")
            a = self._forall(f, scope)
        else:
            raise NotRestrictedError(f"cannot compile {_short(f)}")
        a = trim(a)
        self.log(f"automaton for {_short(f)}: {len(a.states)} states, {len(a.transitions)} transitions")
        return a

    def widen(self, a: Mwa, inner: frozenset, outer: frozenset) -> Mwa:
        """Cylindrify from the extended alphabet of ``inner`` to that of ``outer``."""
        if inner == outer:
            return a
        keep = inner
        a = inverse_relabel(a, self.ext(outer), lambda x: (x[0], tuple(v for v in x[1] if v in keep)))
        if _first_order(outer) - inner:
            a = product_with_dfa(a, self.valid(outer))
        return a

    def _from_step(self, sf: StepFunction) -> Mwa:
        """Union over blocks of (first letter carries the coefficient, then [1]) restricted to the block."""
        one = FiniteMultiset.simple(self.s.unit)
        alphabet = self.ext(sf.scope)
        weights = {}
        init = ("init",)
        final = []
        for j, (d, c) in enumerate(sf.blocks):
            if not c:
                continue
            for x in alphabet:
                weights[(init, x, (j, d.delta[d.start][x]))] = c
            for p in range(d.n_states):
                for x in alphabet:
                    weights[((j, p), x, (j, d.delta[p][x]))] = one
            final += [(j, q) for q in d.final]
        if not weights:
            return empty_automaton(alphabet)
        states = {t[0] for t in weights} | {t[2] for t in weights}
        return Mwa(alphabet, states, [init], final, weights, kind="multiset")

    def _forall(self, f: Forall1, scope: frozenset) -> Mwa:
        """Each position claims the block its instantiation falls in; the claims are checked
        by a DFA (complement of the guessed-violation automaton) and then erased."""
        x = f.var
        wider = scope | {x}
        sf = self.step(f.body, wider)
        blocks = [(d, c) for d, c in sf.blocks if c]
        alphabet = self.ext(scope)
        if not blocks:
            return empty_automaton(alphabet)
        claims_alphabet = [(letter, j) for letter in alphabet for j in range(len(blocks))]
        fo = _first_order(scope)

        def with_x(letter):
            return (letter[0], tuple(sorted(letter[1] + (x,))))

        # after the guess only x-free letters are read; entries whose outcome is
        # already fixed are dropped (always accepted) or kill the state (never accepted)
        settled = [_settled_states(d, alphabet) for d, _ in blocks]

        def step(state, cl):
            seen, live = state
            letter, claim = cl
            marks = fo.intersection(letter[1])
            if marks & seen:
                return None
            nxt = set()
            for j, q, guessed in live:
                d = blocks[j][0]
                moves = [(d.delta[q][letter], guessed)]
                if not guessed and j == claim:
                    moves.append((d.delta[q][with_x(letter)], True))
                for q2, g2 in moves:
                    if g2:
                        safe, doomed = settled[j]
                        if q2 in doomed:
                            return None
                        if q2 in safe:
                            continue
                    nxt.add((j, q2, g2))
            return (seen | marks, frozenset(nxt))

        def accept(state):
            seen, live = state
            if seen != fo:
                return False
            return not any(g and q not in blocks[j][0].final for j, q, g in live)

        start = (frozenset(), frozenset((j, d.start, False) for j, (d, _) in enumerate(blocks)))
        checker = minimize(scan_dfa(claims_alphabet, start, step, accept))
        self.log(f"claim checker for {_short(f)}: {checker.n_states} states over {len(claims_alphabet)} letters")
        coeff = [c for _, c in blocks]
        weights = {}
        for p in range(checker.n_states):
            for cl in checker.alphabet:
                weights[(p, cl, checker.delta[p][cl])] = coeff[cl[1]]
        a = trim(Mwa(checker.alphabet, range(checker.n_states), [checker.start], checker.final, weights, kind="multiset"))
        if not a.initial:
            return empty_automaton(alphabet)
        return relabel_project(a, lambda cl: cl[0], alphabet)


def _settled_states(d: Dfa, letters: Sequence) -> tuple[frozenset, frozenset]:
    """States from which every word over ``letters`` (the empty one included) is
    accepted, resp. rejected."""
    safe = set(d.final)
    doomed = set(range(d.n_states)) - d.final
    changed = True
    while changed:
        changed = False
        for group in (safe, doomed):
            for q in list(group):
                if any(d.delta[q][x] not in group for x in letters):
                    group.discard(q)
                    changed = True
    return frozenset(safe), frozenset(doomed)


def _dropper(v: str):
    return lambda letter: (letter[0], tuple(m for m in letter[1] if m != v))


def _with_alphabet(d: Dfa, alphabet: Sequence) -> Dfa:
    """Re-home a DFA on a (super)set alphabet; missing letters go to a rejecting sink."""
    if set(d.alphabet) == set(alphabet):
        return d
    sink = d.n_states
    rows = [{a: row.get(a, sink) for a in alphabet} for row in d.delta]
    rows.append({a: sink for a in alphabet})
    return Dfa(alphabet, rows, d.start, d.final)


def _short(f: Formula, limit: int = 50) -> str:
    s = str(f)
    return s if len(s) <= limit else s[: limit - 3] + "..."


# --- public interface --------------------------------------------------------------------


@dataclass(frozen=True)
class StepFunction:
    """Partition of the extended words into DFA languages with constant multiset values."""

    scope: frozenset
    blocks: tuple

    @classmethod
    def make(cls, scope: frozenset, blocks: Iterable[tuple[Dfa, FiniteMultiset]]) -> StepFunction:
        by_coeff: dict = {}
        for d, c in blocks:
            by_coeff[c] = minimize(union_dfa(by_coeff[c], d)) if c in by_coeff else d
        ordered = sorted(by_coeff.items(), key=lambda item: (not item[0], repr(item[0].items())))
        return cls(frozenset(scope), tuple((d, c) for c, d in ordered))

    def value(self, word: Sequence[Hashable]) -> FiniteMultiset:
        for d, c in self.blocks:
            if d.accepts(word):
                return c
        raise StructuralError("word falls in no block")


def _alphabet_for(f: Formula, alphabet: Iterable[Hashable] | None) -> tuple:
    used = letters_of(f)
    if alphabet is None:
        if not used:
            raise UsageError("the alphabet cannot be inferred from a formula without letter predicates")
        return tuple(canonical_sorted(used))
    alphabet = tuple(canonical_sorted(set(alphabet)))
    missing = used - set(alphabet)
    if missing:
        raise UsageError(f"formula mentions letters {sorted(map(str, missing))} outside the alphabet")
    return alphabet


def boolean_to_dfa(f: Formula, scope: Iterable[str], alphabet: Iterable[Hashable] | None = None) -> Dfa:
    """Minimal DFA over the extended alphabet accepting the valid words that satisfy ``f``."""
    scope = frozenset(scope)
    if not f.free <= scope:
        raise UsageError(f"free variables {sorted(f.free - scope)} are not in the scope")
    if not is_boolean(f):
        raise StructuralError(f"not a boolean formula: {f}")
    return _Context(_alphabet_for(f, alphabet), None, None).boolean(f, scope)


def step_function(f: Formula, scope: Iterable[str], structure, alphabet: Iterable[Hashable] | None = None) -> StepFunction:
    scope = frozenset(scope)
    if not f.free <= scope:
        raise UsageError(f"free variables {sorted(f.free - scope)} are not in the scope")
    if not is_almost_boolean(f):
        raise StructuralError(f"not an almost boolean formula: {f}")
    return _Context(_alphabet_for(f, alphabet), structure, None).step(f, scope)


def compile_formula(
    f: Formula,
    structure,
    alphabet: Iterable[Hashable] | None = None,
    trace: list | None = None,
) -> Mwa:
    """Automaton with element payloads whose multiset behavior equals the formula's semantics.

    Sentences give an automaton over the plain alphabet; formulas with free
    variables give one over the extended alphabet of their free variables.
    """
    report = classify(f)
    if not report.restricted:
        raise NotRestrictedError("formula is not syntactically restricted:\n  " + "\n  ".join(report.diagnostics))
    ctx = _Context(_alphabet_for(f, alphabet), structure, trace)
    a = ctx.automaton(f)
    a = unfold(a) if a.states else a
    a = to_element_payloads(a)
    ctx.log(f"unfolded automaton: {len(a.states)} states, {len(a.transitions)} transitions")
    if not f.free:
        a = relabel_project(a, lambda letter: letter[0], ctx.alphabet)
    return a


compile = compile_formula  # noqa: A001


# --- automaton to sentence --------------------------------------------------------------------


def _first(x: str, y: str) -> Formula:
    return Forall1(y, Leq(x, y))


def _last(x: str, y: str) -> Formula:
    return Forall1(y, Leq(y, x))


def _succ(x: str, y: str, z: str) -> Formula:
    # x < y with no position strictly between
    return And(Not(Leq(y, x)), Forall1(z, Not(And(Not(Leq(z, x)), Not(Leq(y, z))))))


def _never(*conds: Formula, over: Sequence[str]) -> Formula:
    body: Formula = Not(big_and(list(conds)))
    for v in reversed(over):
        body = Forall1(v, body)
    return body


def automaton_to_formula(a: Mwa, set_prefix: str = "T") -> Formula:
    """Sentence whose multiset semantics equals the multiset behavior of ``a``.

    One set variable per transition marks the positions where a run uses it.
    The run constraints for transition ``i`` are stated right under its
    quantifier so that partial assignments are pruned early; the body
    dispatches the transition weight at every position.
    """
    if a.kind != "element":
        raise StructuralError("automaton_to_formula expects element payloads")
    trans = list(a.transitions)
    if not trans:
        return Not(Forall1("x", Leq("x", "x")))
    names = [f"{set_prefix}{i}" for i in range(len(trans))]
    x, y, z = "x", "y", "z"
    constraints: list[list[Formula]] = []
    for i, (p, letter, q) in enumerate(trans):
        Xi = names[i]
        cs = [_never(In(x, Xi), Not(Label(letter, x)), over=[x])]
        cs += [_never(In(x, Xi), In(x, names[j]), over=[x]) for j in range(i)]
        if p not in a.initial:
            cs.append(_never(In(x, Xi), _first(x, y), over=[x]))
        if q not in a.final:
            cs.append(_never(In(x, Xi), _last(x, y), over=[x]))
        for j in range(i + 1):
            pj, _, qj = trans[j]
            if qj != p:
                cs.append(_never(In(x, names[j]), In(y, Xi), _succ(x, y, z), over=[x, y]))
            if j < i and q != pj:
                cs.append(_never(In(x, Xi), In(y, names[j]), _succ(x, y, z), over=[x, y]))
        constraints.append(cs)
    cover = Forall1(x, Not(big_and([Not(In(x, n)) for n in names])))
    dispatch = Forall1(x, big_or([And(In(x, n), Const(a.weights[t])) for n, t in zip(names, trans)]))
    body: Formula = And(cover, dispatch)
    for i in reversed(range(len(trans))):
        body = Exists2(names[i], And(big_and(constraints[i]), body))
    return body


__all__ = [
    "StepFunction",
    "automaton_to_formula",
    "boolean_to_dfa",
    "compile",
    "compile_formula",
    "step_function",
    "valid_dfa",
]
