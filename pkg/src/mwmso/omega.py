"""Muller multi-weighted automata evaluated on ultimately periodic words.

Runs on ``u v^w`` are explored in the product of the automaton with the
lasso positions ``0 .. |u|+|v|-1`` (the last position loops back to ``|u|``).
"""

from __future__ import annotations

from collections import deque
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import DomainError, StructuralError, UsageError
from .multiset import canonical_sorted
from .structures import INF, EnergyStructure, OmegaRatioStructure


@dataclass(frozen=True)
class LassoWord:
    prefix: tuple
    period: tuple

    def __post_init__(self):
        if not self.period:
            raise UsageError("lasso period must be nonempty")

    @property
    def size(self) -> int:
        return len(self.prefix) + len(self.period)

    def letter(self, pos: int) -> Hashable:
        return self.prefix[pos] if pos < len(self.prefix) else self.period[pos - len(self.prefix)]

    def next(self, pos: int) -> int:
        return pos + 1 if pos + 1 < self.size else len(self.prefix)

    def rotated(self) -> LassoWord:
        """Same infinite word with the first period letter moved into the prefix."""
        return LassoWord(self.prefix + self.period[:1], self.period[1:] + self.period[:1])

    def __str__(self) -> str:
        return "".join(map(str, self.prefix)) + "(" + "".join(map(str, self.period)) + ")^w"


def parse_lasso(text: str, tokenize=None) -> LassoWord:
    """Parse ``u(v)^w``; ``tokenize`` splits a string into letters (default: characters)."""
    text = text.strip()
    if not text.endswith(")^w") or "(" not in text:
        raise UsageError(f"lasso words look like u(v)^w, got {text!r}")
    cut = text.rindex("(", 0, len(text) - 3)
    split = tokenize or (lambda s: tuple(s))
    return LassoWord(tuple(split(text[:cut])), tuple(split(text[cut + 1 : -3])))


class MullerMwa:
    """Automaton with a Muller acceptance family instead of final states."""

    def __init__(self, alphabet, states, initial, muller: Iterable[Iterable[Hashable]], weights: dict):
        self.alphabet = tuple(canonical_sorted(set(alphabet)))
        self.states = tuple(canonical_sorted(set(states)))
        self.initial = frozenset(initial)
        self.muller = frozenset(frozenset(S) for S in muller)
        self.weights = dict(weights)
        self.transitions = tuple(canonical_sorted(self.weights))
        qs = set(self.states)
        if not self.alphabet:
            raise StructuralError("alphabet must be nonempty")
        if not self.initial <= qs:
            raise StructuralError("initial states must be declared states")
        for S in self.muller:
            if not S or not S <= qs:
                raise StructuralError(f"acceptance set {sorted(S, key=repr)} must be a nonempty set of states")
        for p, a, q in self.transitions:
            if p not in qs or q not in qs or a not in self.alphabet:
                raise StructuralError(f"transition {(p, a, q)!r} uses an undeclared state or letter")
        self.out: dict = {}
        for t in self.transitions:
            self.out.setdefault((t[0], t[1]), []).append(t)

    def __repr__(self) -> str:
        return f"MullerMwa(|Q|={len(self.states)}, |T|={len(self.transitions)}, |F|={len(self.muller)})"


# --- graph helpers -------------------------------------------------------------------------


def _check_word(a: MullerMwa, w: LassoWord) -> None:
    for x in w.prefix + w.period:
        if x not in a.alphabet:
            raise UsageError(f"letter {x!r} is not in the alphabet")


def _explore(starts: Iterable, succ) -> dict:
    """Reachable graph as ``node -> [(edge_label, node), ...]``."""
    graph: dict = {}
    queue = deque()
    for s in starts:
        if s not in graph:
            graph[s] = None
            queue.append(s)
    while queue:
        n = queue.popleft()
        edges = list(succ(n))
        graph[n] = edges
        for _, m in edges:
            if m not in graph:
                graph[m] = None
                queue.append(m)
    return graph


def _sccs(nodes: list, adj) -> list[list]:
    """Tarjan's algorithm, iterative; ``adj(n)`` yields successor nodes."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list[list] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(adj(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            n, it = work[-1]
            advanced = False
            for m in it:
                if m not in index:
                    index[m] = low[m] = counter
                    counter += 1
                    stack.append(m)
                    on_stack.add(m)
                    work.append((m, iter(adj(m))))
                    advanced = True
                    break
                if m in on_stack:
                    low[n] = min(low[n], index[m])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[n])
            if low[n] == index[n]:
                comp = []
                while True:
                    m = stack.pop()
                    on_stack.discard(m)
                    comp.append(m)
                    if m == n:
                        break
                out.append(comp)
    return out


@dataclass(frozen=True)
class _Component:
    acceptance: frozenset
    nodes: frozenset


def _muller_components(graph: dict, state_of, muller) -> list[_Component]:
    """Strongly connected pieces (inside one acceptance set) whose states are exactly that set."""
    found = []
    for S in canonical_sorted(muller):
        inside = [n for n in graph if state_of(n) in S]
        inside_set = set(inside)

        def adj(n):
            return [m for _, m in graph[n] if m in inside_set]

        for comp in _sccs(inside, adj):
            comp_set = frozenset(comp)
            nontrivial = len(comp) > 1 or any(m == comp[0] for m in adj(comp[0]))
            if nontrivial and {state_of(n) for n in comp} == S:
                found.append(_Component(S, comp_set))
    return found


def _product(a: MullerMwa, w: LassoWord) -> dict:
    _check_word(a, w)

    def succ(node):
        q, pos = node
        return [(t, (t[2], w.next(pos))) for t in a.out.get((q, w.letter(pos)), ())]

    return _explore([(q, 0) for q in canonical_sorted(a.initial)], succ)


def accepting_lasso_exists(a: MullerMwa, w: LassoWord) -> bool:
    graph = _product(a, w)
    return bool(_muller_components(graph, lambda n: n[0], a.muller))


# --- witnesses ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class LassoRun:
    """An accepting run: ``stem`` then forever ``tour`` (a closed walk covering its component).

    ``cycle`` is an optional closed walk from the tour's start node that the
    simulation repeats between tours.
    """

    stem: tuple
    tour: tuple
    cycle: tuple = ()

    def transitions(self, steps: int) -> list:
        """The first ``steps`` transitions of the run, with geometrically spaced tours."""
        out = list(self.stem)
        reps = 1
        while len(out) < steps:
            out.extend(self.tour)
            if self.cycle:
                for _ in range(reps):
                    out.extend(self.cycle)
                    if len(out) >= steps:
                        break
                reps *= 2
        return out[:steps]


def _bfs_path(graph: dict, sources: Iterable, target, allowed=None) -> list:
    """Edges of a shortest path from any source to ``target`` (nodes limited to ``allowed``)."""
    parent = {s: None for s in sources}
    queue = deque(parent)
    while queue:
        n = queue.popleft()
        if n == target:
            path = []
            while parent[n] is not None:
                prev, e = parent[n]
                path.append((prev, e, n))
                n = prev
            return path[::-1]
        for e, m in graph[n]:
            if m not in parent and (allowed is None or m in allowed):
                parent[m] = (n, e)
                queue.append(m)
    raise StructuralError("no path in product graph")  # pragma: no cover


def _tour(graph: dict, comp: frozenset, start) -> list:
    """Closed walk (at least one edge) from ``start`` visiting every node of the component."""
    walk: list = []
    here = start
    for target in canonical_sorted(comp - {start}):
        walk += _bfs_path(graph, [here], target, comp)
        here = target
    if here != start:
        walk += _bfs_path(graph, [here], start, comp)
    else:
        loop = next(e for e, m in graph[start] if m == start)
        walk.append((start, loop, start))
    return walk


def _stem(graph: dict, roots: Iterable, target) -> list:
    return _bfs_path(graph, roots, target)


# --- energy ----------------------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyResult:
    value: bool
    run: LassoRun | None = None


def energy_behavior(a: MullerMwa, w: LassoWord, s: EnergyStructure, witness: bool = False):
    """True iff some accepting run keeps every running energy value (the initial 0 included)
    componentwise nonnegative."""
    for t, m in a.weights.items():
        s.coerce(m)
    _check_word(a, w)
    zero = s.unit

    def succ(node):
        q, pos, v = node
        out = []
        for t in a.out.get((q, w.letter(pos)), ()):
            v2 = s.prod(v, a.weights[t])
            if all(x >= 0 for x in v2):
                out.append((t, (t[2], w.next(pos), v2)))
        return out

    roots = [(q, 0, zero) for q in canonical_sorted(a.initial)]
    graph = _explore(roots, succ)
    comps = _muller_components(graph, lambda n: n[0], a.muller)
    if not comps:
        return EnergyResult(False) if witness else False
    if not witness:
        return True
    comp = comps[0]
    start = min(comp.nodes, key=repr)
    run = LassoRun(tuple(_stem(graph, roots, start)), tuple(_tour(graph, comp.nodes, start)))
    return EnergyResult(True, run)


def simulate_energy(a: MullerMwa, s: EnergyStructure, run: LassoRun, steps: int = 10_000) -> tuple:
    """Running clamped energies along a run; returns the componentwise minimum (0 included)."""
    v = s.unit
    low = list(v)
    for _, t, _ in run.transitions(steps):
        v = s.prod(v, a.weights[t])
        low = [min(x, y) for x, y in zip(low, v)]
    return tuple(low)


# --- supremum ratio ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class RatioResult:
    value: Any
    run: LassoRun | None = None


def _cycle_through_edges(pred: dict, last, n: int) -> list:
    node = last
    for _ in range(n):
        node = pred[node][0]
    cycle = []
    cur = node
    while True:
        e = pred[cur]
        cycle.append(e)
        cur = e[0]
        if cur == node:
            break
    return cycle[::-1]


def _max_ratio_cycle(edges: list, nodes: list) -> tuple[Fraction, list]:
    """Maximum reward/cost ratio over the cycles of a strongly connected graph.

    ``edges`` are ``(u, v, reward, cost, label)`` with positive cost on every
    cycle. Iterates: find a cycle whose ``reward - lam*cost`` is positive,
    move ``lam`` to its ratio, until none is left.
    """
    first = _any_cycle(edges, nodes)
    lam = _ratio_of(first)
    best = first
    while True:
        dist = {q: Fraction(0) for q in nodes}
        pred: dict = {}
        last = None
        for _ in range(len(nodes)):
            last = None
            for e in edges:
                u, v, r, c, _ = e
                cand = dist[u] + r - lam * c
                if cand > dist[v]:
                    dist[v] = cand
                    pred[v] = e
                    last = v
            if last is None:
                break
        if last is None:
            return lam, best
        cycle = _cycle_through_edges(pred, last, len(nodes))
        new = _ratio_of(cycle)
        if new <= lam:  # pragma: no cover - a positive cycle always has a larger ratio
            raise AssertionError("ratio iteration did not improve")
        lam, best = new, cycle


def _ratio_of(cycle: list) -> Fraction:
    r = sum((e[2] for e in cycle), Fraction(0))
    c = sum((e[3] for e in cycle), Fraction(0))
    return r / c


def _any_cycle(edges: list, nodes: list) -> list:
    out: dict = {}
    for e in edges:
        out.setdefault(e[0], []).append(e)
    start = nodes[0]
    # walk until a node repeats; in a strongly connected graph every node has a successor
    seen = {start: 0}
    path = []
    cur = start
    while True:
        e = out[cur][0]
        path.append(e)
        cur = e[1]
        if cur in seen:
            return path[seen[cur]:]
        seen[cur] = len(path)


def ratio_sup_behavior(a: MullerMwa, w: LassoWord, s: OmegaRatioStructure | None = None, witness: bool = False):
    """Supremum over accepting runs of the limsup reward/cost ratio; ``-inf`` without accepting runs."""
    s = s or OmegaRatioStructure()
    for t, m in a.weights.items():
        r, c = s.coerce(m)
        if isinstance(r, float):
            raise DomainError(f"ratio weights must be finite, found {m!r} on {t!r}")
    graph = _product(a, w)
    _refuse_zero_cost_cycles(a, graph)
    comps = _muller_components(graph, lambda n: n[0], a.muller)
    if not comps:
        return RatioResult(-INF) if witness else -INF
    best_val = None
    best = None
    for comp in comps:
        nodes = canonical_sorted(comp.nodes)
        edges = [
            (n, m, a.weights[t][0], a.weights[t][1], t)
            for n in nodes
            for t, m in graph[n]
            if m in comp.nodes
        ]
        lam, cycle = _max_ratio_cycle(edges, nodes)
        if best_val is None or lam > best_val:
            best_val, best = lam, (comp, cycle)
    if not witness:
        return best_val
    comp, cycle = best
    start = cycle[0][0]
    roots = [(q, 0) for q in canonical_sorted(a.initial)]
    run = LassoRun(
        tuple(_stem(graph, roots, start)),
        tuple(_tour(graph, comp.nodes, start)),
        tuple((e[0], e[4], e[1]) for e in cycle),
    )
    return RatioResult(best_val, run)


def _refuse_zero_cost_cycles(a: MullerMwa, graph: dict) -> None:
    nodes = list(graph)
    zero_adj = {n: [m for t, m in graph[n] if a.weights[t][1] == 0] for n in nodes}
    for comp in _sccs(nodes, lambda n: zero_adj[n]):
        if len(comp) > 1 or comp[0] in zero_adj[comp[0]]:
            raise DomainError("the product graph has a cycle of total cost 0; the supremum ratio is not computed")


def simulate_ratio(a: MullerMwa, run: LassoRun, steps: int = 10_000) -> Fraction:
    """Prefix reward/cost ratio after ``steps`` transitions of a run."""
    r = c = Fraction(0)
    for _, t, _ in run.transitions(steps):
        r += a.weights[t][0]
        c += a.weights[t][1]
    return r / c if c else (INF if r >= 0 else -INF)


def omega_behavior(a: MullerMwa, w: LassoWord, s) -> Any:
    if isinstance(s, EnergyStructure):
        return energy_behavior(a, w, s)
    if isinstance(s, OmegaRatioStructure):
        return ratio_sup_behavior(a, w, s)
    raise UsageError(f"structure {s!r} has no infinite-word evaluation")


__all__ = [
    "EnergyResult",
    "LassoRun",
    "LassoWord",
    "MullerMwa",
    "RatioResult",
    "accepting_lasso_exists",
    "energy_behavior",
    "omega_behavior",
    "parse_lasso",
    "ratio_sup_behavior",
    "simulate_energy",
    "simulate_ratio",
]
