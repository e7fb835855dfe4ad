"""Finite-word automata: NFAs, complete DFAs and multi-weighted automata.

Transition payloads of a :class:`Mwa` are either plain weights (``kind ==
"element"``) or :class:`FiniteMultiset` values (``kind == "multiset"``), the
latter being the intermediate form produced by the compiler.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Callable, Hashable, Iterable, Sequence
from typing import Any

from .errors import StructuralError, UsageError, check_states
from .multiset import EMPTY, FiniteMultiset, canonical_sorted, sequence_fold

Transition = tuple  # (source, letter, target)


class Nfa:
    """Nondeterministic automaton ``(Q, I, T, F)`` over an explicit alphabet."""

    def __init__(
        self,
        alphabet: Iterable[Hashable],
        states: Iterable[Hashable],
        initial: Iterable[Hashable],
        final: Iterable[Hashable],
        transitions: Iterable[Transition],
    ):
        self.alphabet = tuple(canonical_sorted(set(alphabet)))
        self.states = tuple(canonical_sorted(set(states)))
        self.initial = frozenset(initial)
        self.final = frozenset(final)
        self.transitions = tuple(canonical_sorted(set(transitions)))
        self._validate()
        self._out: dict | None = None

    def _validate(self) -> None:
        if not self.alphabet:
            raise StructuralError("alphabet must be nonempty")
        qs, sigma = set(self.states), set(self.alphabet)
        if not self.initial <= qs or not self.final <= qs:
            raise StructuralError("initial/final states must be declared states")
        for p, a, q in self.transitions:
            if p not in qs or q not in qs:
                raise StructuralError(f"transition {(p, a, q)!r} uses an undeclared state")
            if a not in sigma:
                raise StructuralError(f"transition {(p, a, q)!r} uses a letter outside the alphabet")

    @property
    def out(self) -> dict:
        """``(state, letter) -> [transition, ...]`` in canonical order."""
        if self._out is None:
            out: dict = {}
            for t in self.transitions:
                out.setdefault((t[0], t[1]), []).append(t)
            self._out = out
        return self._out

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(|Q|={len(self.states)}, |T|={len(self.transitions)}, "
            f"|Sigma|={len(self.alphabet)})"
        )


class Mwa(Nfa):
    """Multi-weighted automaton: an :class:`Nfa` plus one payload per transition."""

    def __init__(self, alphabet, states, initial, final, weights: dict[Transition, Any], kind: str | None = None):
        super().__init__(alphabet, states, initial, final, weights.keys())
        if kind is None:
            kinds = {isinstance(v, FiniteMultiset) for v in weights.values()}
            if len(kinds) > 1:
                raise StructuralError("payload kind must be uniform across the automaton")
            kind = "multiset" if kinds == {True} else "element"
        if kind not in ("element", "multiset"):
            raise StructuralError(f"unknown payload kind {kind!r}")
        if any(isinstance(v, FiniteMultiset) != (kind == "multiset") for v in weights.values()):
            raise StructuralError("payload kind must be uniform across the automaton")
        self.kind = kind
        self.weights = dict(weights)

    def payload_items(self, t: Transition) -> list[tuple[Any, int]]:
        pay = self.weights[t]
        return pay.items() if self.kind == "multiset" else [(pay, 1)]


class Dfa:
    """Complete deterministic automaton on states ``0..n-1``."""

    __slots__ = ("alphabet", "delta", "start", "final")

    def __init__(self, alphabet: Sequence[Hashable], delta: Sequence[dict], start: int, final: Iterable[int]):
        self.alphabet = tuple(alphabet)
        self.delta = [dict(row) for row in delta]
        self.start = start
        self.final = frozenset(final)
        for row in self.delta:
            if len(row) != len(self.alphabet) or any(a not in row for a in self.alphabet):
                raise StructuralError("DFA transition function must be complete")

    @property
    def n_states(self) -> int:
        return len(self.delta)

    def run(self, word: Sequence[Hashable]) -> int:
        q = self.start
        for a in word:
            q = self.delta[q][a]
        return q

    def accepts(self, word: Sequence[Hashable]) -> bool:
        return self.run(word) in self.final

    def to_nfa(self) -> Nfa:
        return Nfa(
            self.alphabet,
            range(self.n_states),
            [self.start],
            self.final,
            [(p, a, q) for p, row in enumerate(self.delta) for a, q in row.items()],
        )

    def __repr__(self) -> str:
        return f"Dfa(|Q|={self.n_states}, |F|={len(self.final)}, |Sigma|={len(self.alphabet)})"


# --- words and paths -----------------------------------------------------------------


def _check_word(a: Nfa, w: Sequence[Hashable]) -> None:
    if len(w) == 0:
        raise UsageError("behaviors are defined on nonempty words only")
    sigma = set(a.alphabet)
    for x in w:
        if x not in sigma:
            raise UsageError(f"letter {x!r} is not in the alphabet")


def accepting_paths(a: Nfa, w: Sequence[Hashable]) -> list[tuple[Transition, ...]]:
    """All accepting paths on ``w`` in canonical transition order."""
    _check_word(a, w)
    out = a.out
    paths: list[tuple[Transition, ...]] = []

    def extend(q, i, prefix):
        if i == len(w):
            if q in a.final:
                paths.append(tuple(prefix))
            return
        for t in out.get((q, w[i]), ()):
            prefix.append(t)
            extend(t[2], i + 1, prefix)
            prefix.pop()

    for q0 in canonical_sorted(a.initial):
        extend(q0, 0, [])
    return paths


def multiset_behavior(a: Mwa, w: Sequence[Hashable], s) -> FiniteMultiset:
    """Multiset of path weights over all accepting paths on ``w``.

    With multiset payloads every path contributes the lifted valuation of
    its payloads.
    """
    _check_word(a, w)
    fold = s.fold or sequence_fold(s.val)
    out = a.out
    cur: dict = {}
    for p in a.initial:
        for t in out.get((p, w[0]), ()):
            bucket = cur.setdefault(t[2], {})
            for m, k in a.payload_items(t):
                acc = fold.start(m)
                bucket[acc] = bucket.get(acc, 0) + k
    for x in w[1:]:
        nxt: dict = {}
        for p, accs in cur.items():
            for t in out.get((p, x), ()):
                items = a.payload_items(t)
                bucket = nxt.setdefault(t[2], {})
                for acc, c in accs.items():
                    for m, k in items:
                        a2 = fold.step(acc, m)
                        bucket[a2] = bucket.get(a2, 0) + c * k
        cur = nxt
    result: dict = {}
    for q, accs in cur.items():
        if q in a.final:
            for acc, c in accs.items():
                m = fold.finish(acc)
                result[m] = result.get(m, 0) + c
    return FiniteMultiset(result)


def behavior(a: Mwa, w: Sequence[Hashable], s) -> Any:
    return s.phi(multiset_behavior(a, w, s))


# --- weighted constructions ------------------------------------------------------------


def _renumbered(alphabet, initial, final, weights, kind) -> Mwa:
    """Rename states to ``0..n-1`` in BFS order from the initial states."""
    succ: dict = {}
    for (p, a, q) in weights:
        succ.setdefault(p, []).append((a, q))
    order: dict = {}
    queue = deque()
    for q in canonical_sorted(initial):
        order[q] = len(order)
        queue.append(q)
    while queue:
        p = queue.popleft()
        for _, q in sorted(succ.get(p, ()), key=lambda e: (repr(e[0]), repr(e[1]))):
            if q not in order:
                order[q] = len(order)
                queue.append(q)
    check_states(len(order))
    new_weights = {
        (order[p], a, order[q]): v for (p, a, q), v in weights.items() if p in order and q in order
    }
    return Mwa(
        alphabet,
        range(len(order)),
        [order[q] for q in initial],
        [order[q] for q in final if q in order],
        new_weights,
        kind=kind,
    )


def trim(a):
    """Drop states that lie on no path from an initial to a final state."""
    fwd = _reach(a.initial, {}, a.transitions, forward=True)
    bwd = _reach(a.final, {}, a.transitions, forward=False)
    keep = fwd & bwd
    trans = [t for t in a.transitions if t[0] in keep and t[2] in keep]
    if isinstance(a, Mwa):
        return Mwa(
            a.alphabet, keep, a.initial & keep, a.final & keep, {t: a.weights[t] for t in trans}, kind=a.kind
        )
    return Nfa(a.alphabet, keep, a.initial & keep, a.final & keep, trans)


def _reach(start, _unused, transitions, forward: bool) -> set:
    adj: dict = {}
    for p, _, q in transitions:
        if forward:
            adj.setdefault(p, []).append(q)
        else:
            adj.setdefault(q, []).append(p)
    seen = set(start)
    stack = list(start)
    while stack:
        p = stack.pop()
        for q in adj.get(p, ()):
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def unfold(a: Mwa) -> Mwa:
    """Replace multiset payloads by copies of transitions carrying simple multisets.

    New states are the initial states plus triples ``(t, m, i)`` where ``t``
    is the incoming transition, ``m`` an element of its payload and ``i`` a
    copy index; keying by the whole transition keeps copies of different
    incoming transitions apart. Empty payloads unfold to zero copies.
    """
    if a.kind != "multiset":
        raise StructuralError("unfold expects multiset payloads")
    copies: dict[Transition, list] = {}
    for t in a.transitions:
        copies[t] = [(t, m, i) for m, c in a.weights[t].items() for i in range(1, c + 1)]
    by_source: dict = {}
    for t in a.transitions:
        by_source.setdefault(t[0], []).append(t)
    weights: dict = {}
    init = [("i", p) for p in a.initial]
    for p in a.initial:
        for t in by_source.get(p, ()):
            for c in copies[t]:
                weights[(("i", p), t[1], ("c",) + c)] = FiniteMultiset.simple(c[1])
    for t1 in a.transitions:
        for t2 in by_source.get(t1[2], ()):
            for c1 in copies[t1]:
                for c2 in copies[t2]:
                    weights[(("c",) + c1, t2[1], ("c",) + c2)] = FiniteMultiset.simple(c2[1])
    final = [("c",) + c for t in a.transitions if t[2] in a.final for c in copies[t]]
    return trim(_renumbered(a.alphabet, init, final, weights, "multiset"))


def to_element_payloads(a: Mwa) -> Mwa:
    """Strip brackets ``[m] -> m``; every payload must be a simple multiset."""
    if a.kind == "element":
        return a
    weights = {}
    for t, r in a.weights.items():
        if len(r) != 1 or r.total != 1:
            raise StructuralError(f"payload {r!r} on {t!r} is not a simple multiset")
        weights[t] = next(iter(r))
    return Mwa(a.alphabet, a.states, a.initial, a.final, weights, kind="element")


def to_multiset_payloads(a: Mwa) -> Mwa:
    if a.kind == "multiset":
        return a
    weights = {t: FiniteMultiset.simple(m) for t, m in a.weights.items()}
    return Mwa(a.alphabet, a.states, a.initial, a.final, weights, kind="multiset")


def union_automata(a1: Mwa, a2: Mwa) -> Mwa:
    """Disjoint union; the multiset behavior is the union of behaviors."""
    if set(a1.alphabet) != set(a2.alphabet):
        raise StructuralError("union needs equal alphabets")
    if a1.kind != a2.kind:
        raise StructuralError("union needs equal payload kinds")
    weights = {((1, p), x, (1, q)): v for (p, x, q), v in a1.weights.items()}
    weights.update({((2, p), x, (2, q)): v for (p, x, q), v in a2.weights.items()})
    states = [(1, q) for q in a1.states] + [(2, q) for q in a2.states]
    init = [(1, q) for q in a1.initial] + [(2, q) for q in a2.initial]
    fin = [(1, q) for q in a1.final] + [(2, q) for q in a2.final]
    m = Mwa(a1.alphabet, states, init, fin, weights, kind=a1.kind)
    return _renumbered(m.alphabet, m.initial, m.final, m.weights, m.kind) if m.initial else _empty_like(m)


def _empty_like(a: Mwa) -> Mwa:
    return Mwa(a.alphabet, [], [], [], {}, kind=a.kind)


def empty_automaton(alphabet, kind: str = "multiset") -> Mwa:
    return Mwa(alphabet, [], [], [], {}, kind=kind)


def product_with_dfa(a: Mwa, d: Dfa) -> Mwa:
    """Restrict ``a`` to the language of ``d``; weights are copied from ``a``."""
    if set(a.alphabet) != set(d.alphabet):
        raise StructuralError("product needs equal alphabets")
    out = a.out
    weights: dict = {}
    init = [(p, d.start) for p in a.initial]
    seen = set(init)
    queue = deque(init)
    while queue:
        p, s = queue.popleft()
        for x in a.alphabet:
            s2 = d.delta[s][x]
            for t in out.get((p, x), ()):
                dst = (t[2], s2)
                weights[((p, s), x, dst)] = a.weights[t]
                if dst not in seen:
                    seen.add(dst)
                    queue.append(dst)
                    check_states(len(seen), "product automaton")
    final = [st for st in seen if st[0] in a.final and st[1] in d.final]
    res = Mwa(a.alphabet, seen, init, final, weights, kind=a.kind)
    res = trim(res)
    if not res.initial:
        return _empty_like(a)
    return _renumbered(res.alphabet, res.initial, res.final, res.weights, res.kind)


def relabel_project(a: Mwa, h: Callable[[Hashable], Hashable] | dict, alphabet: Iterable[Hashable] | None = None) -> Mwa:
    """Letter-to-letter image automaton.

    The behavior on a word ``v`` is the union of the behaviors on all
    preimages of ``v``. Multiset payloads of transitions identified by ``h``
    are merged; with element payloads, states remember the original letter
    that entered them so that such transitions stay distinct.
    """
    hf = h.get if isinstance(h, dict) else h
    image = {x: hf(x) for x in a.alphabet}
    target = set(image.values()) if alphabet is None else set(alphabet)
    if not set(image.values()) <= target:
        raise StructuralError("letter map leaves the target alphabet")
    if len(set(image.values())) == len(image):
        weights = {(p, image[x], q): v for (p, x, q), v in a.weights.items()}
        return Mwa(target, a.states, a.initial, a.final, weights, kind=a.kind)
    if a.kind == "multiset":
        # lifting is additive in every argument, so parallel transitions can be merged with a union
        merged: dict = {}
        for (p, x, q), v in a.weights.items():
            key = (p, image[x], q)
            merged[key] = merged[key] | v if key in merged else v
        return Mwa(target, a.states, a.initial, a.final, merged, kind=a.kind)
    by_source: dict = {}
    for t in a.transitions:
        by_source.setdefault(t[0], []).append(t)
    weights = {}
    for p in a.initial:
        for (_, x, q) in by_source.get(p, ()):
            weights[(("i", p), image[x], ("s", q, x))] = a.weights[(p, x, q)]
    entered: dict = {}
    for (_, x, q) in a.transitions:
        entered.setdefault(q, set()).add(x)
    for p, letters in entered.items():
        for y in letters:
            for (_, x, q) in by_source.get(p, ()):
                weights[(("s", p, y), image[x], ("s", q, x))] = a.weights[(p, x, q)]
    init = [("i", p) for p in a.initial]
    final = [("s", q, x) for q, letters in entered.items() if q in a.final for x in letters]
    res = trim(Mwa(target, [s for t in weights for s in (t[0], t[2])] + init, init, final, weights, kind=a.kind))
    if not res.initial:
        return Mwa(target, [], [], [], {}, kind=a.kind)
    return _renumbered(res.alphabet, res.initial, res.final, res.weights, res.kind)


def inverse_relabel(a: Mwa, alphabet: Iterable[Hashable], h: Callable[[Hashable], Hashable]) -> Mwa:
    """Automaton over ``alphabet`` whose behavior on ``u`` is that of ``a`` on ``h(u)``."""
    alphabet = list(alphabet)
    by_letter: dict = {}
    for b in alphabet:
        by_letter.setdefault(h(b), []).append(b)
    weights = {}
    for (p, x, q), v in a.weights.items():
        for b in by_letter.get(x, ()):
            weights[(p, b, q)] = v
    return Mwa(alphabet, a.states, a.initial, a.final, weights, kind=a.kind)


# --- classical constructions ------------------------------------------------------------


def scan_dfa(
    alphabet: Sequence[Hashable],
    init: Hashable,
    step: Callable[[Hashable, Hashable], Hashable | None],
    accept: Callable[[Hashable], bool],
) -> Dfa:
    """Build a DFA by exploring ``step`` from ``init``; ``None`` is a rejecting sink."""
    alphabet = tuple(canonical_sorted(alphabet))
    index = {init: 0}
    keys = [init]
    rows: list[dict] = []
    sink = None
    i = 0
    while i < len(keys):
        st = keys[i]
        row = {}
        for x in alphabet:
            nxt = step(st, x) if st is not _SINK else None
            if nxt is None:
                if sink is None:
                    sink = len(keys)
                    index[_SINK] = sink
                    keys.append(_SINK)
                row[x] = sink
            else:
                if nxt not in index:
                    index[nxt] = len(keys)
                    keys.append(nxt)
                    check_states(len(keys), "DFA")
                row[x] = index[nxt]
        rows.append(row)
        i += 1
    final = [j for j, st in enumerate(keys) if st is not _SINK and accept(st)]
    return Dfa(alphabet, rows, 0, final)


_SINK = object()


def determinize(n: Nfa) -> Dfa:
    """Subset construction; the empty subset is the rejecting sink."""
    out = n.out
    final = n.final

    def step(S, x):
        return frozenset(t[2] for p in S for t in out.get((p, x), ()))

    return scan_dfa(n.alphabet, frozenset(n.initial), step, lambda S: bool(S & final))


def complement(d: Dfa) -> Dfa:
    return Dfa(d.alphabet, d.delta, d.start, set(range(d.n_states)) - d.final)


def _product(d1: Dfa, d2: Dfa, accept: Callable[[bool, bool], bool]) -> Dfa:
    if set(d1.alphabet) != set(d2.alphabet):
        raise StructuralError("DFA product needs equal alphabets")
    return scan_dfa(
        d1.alphabet,
        (d1.start, d2.start),
        lambda st, x: (d1.delta[st[0]][x], d2.delta[st[1]][x]),
        lambda st: accept(st[0] in d1.final, st[1] in d2.final),
    )


def intersect(d1: Dfa, d2: Dfa) -> Dfa:
    return _product(d1, d2, lambda a, b: a and b)


def union_dfa(d1: Dfa, d2: Dfa) -> Dfa:
    return _product(d1, d2, lambda a, b: a or b)


def minimize(d: Dfa) -> Dfa:
    """Minimal complete DFA, states numbered in BFS order (canonical)."""
    reach = [d.start]
    seen = {d.start}
    for p in reach:
        for x in d.alphabet:
            q = d.delta[p][x]
            if q not in seen:
                seen.add(q)
                reach.append(q)
    cls = {p: int(p in d.final) for p in reach}
    n_cls = len(set(cls.values()))
    while True:
        sig = {p: (cls[p],) + tuple(cls[d.delta[p][x]] for x in d.alphabet) for p in reach}
        ids: dict = {}
        new = {p: ids.setdefault(sig[p], len(ids)) for p in reach}
        if len(ids) == n_cls:
            break
        cls, n_cls = new, len(ids)
    rep = {}
    for p in reach:
        rep.setdefault(cls[p], p)
    order = {cls[d.start]: 0}
    queue = [cls[d.start]]
    for c in queue:
        for x in d.alphabet:
            c2 = cls[d.delta[rep[c]][x]]
            if c2 not in order:
                order[c2] = len(order)
                queue.append(c2)
    rows = [None] * len(order)
    for c, i in order.items():
        rows[i] = {x: order[cls[d.delta[rep[c]][x]]] for x in d.alphabet}
    final = [order[c] for c in order if rep[c] in d.final]
    return Dfa(d.alphabet, rows, 0, final)


def is_empty(d: Dfa) -> bool:
    """True when no nonempty word is accepted."""
    seen = set()
    stack = [d.delta[d.start][x] for x in d.alphabet]
    while stack:
        p = stack.pop()
        if p in seen:
            continue
        if p in d.final:
            return False
        seen.add(p)
        stack.extend(d.delta[p][x] for x in d.alphabet)
    return True


def universal_dfa(alphabet) -> Dfa:
    alphabet = tuple(canonical_sorted(alphabet))
    return Dfa(alphabet, [{x: 0 for x in alphabet}], 0, [0])


def empty_dfa(alphabet) -> Dfa:
    alphabet = tuple(canonical_sorted(alphabet))
    return Dfa(alphabet, [{x: 0 for x in alphabet}], 0, [])


def nfa_union(n1: Nfa, n2: Nfa) -> Nfa:
    tag = lambda i, q: (i, q)
    return Nfa(
        set(n1.alphabet) | set(n2.alphabet),
        [tag(1, q) for q in n1.states] + [tag(2, q) for q in n2.states],
        [tag(1, q) for q in n1.initial] + [tag(2, q) for q in n2.initial],
        [tag(1, q) for q in n1.final] + [tag(2, q) for q in n2.final],
        [(tag(1, p), x, tag(1, q)) for p, x, q in n1.transitions]
        + [(tag(2, p), x, tag(2, q)) for p, x, q in n2.transitions],
    )


def nfa_project(n: Nfa, h: Callable[[Hashable], Hashable]) -> Nfa:
    """Unweighted letter-to-letter image (multiplicities are irrelevant here)."""
    return Nfa({h(x) for x in n.alphabet}, n.states, n.initial, n.final, [(p, h(x), q) for p, x, q in n.transitions])


def is_deterministic_complete(n: Nfa) -> bool:
    if len(n.initial) != 1:
        return False
    out = n.out
    return all(len(out.get((p, x), ())) == 1 for p in n.states for x in n.alphabet)


def dfa_from_nfa(n: Nfa) -> Dfa:
    """Reinterpret a deterministic complete :class:`Nfa` as a :class:`Dfa`."""
    if not is_deterministic_complete(n):
        raise StructuralError("automaton is not deterministic and complete")
    idx = {q: i for i, q in enumerate(n.states)}
    out = n.out
    rows = [{x: idx[out[(p, x)][0][2]] for x in n.alphabet} for p in n.states]
    return Dfa(n.alphabet, rows, idx[next(iter(n.initial))], [idx[q] for q in n.final])


__all__ = [
    "EMPTY",
    "Dfa",
    "Mwa",
    "Nfa",
    "accepting_paths",
    "behavior",
    "complement",
    "determinize",
    "empty_automaton",
    "intersect",
    "inverse_relabel",
    "is_empty",
    "minimize",
    "multiset_behavior",
    "product_with_dfa",
    "relabel_project",
    "scan_dfa",
    "to_element_payloads",
    "to_multiset_payloads",
    "trim",
    "unfold",
    "union_automata",
    "union_dfa",
]
