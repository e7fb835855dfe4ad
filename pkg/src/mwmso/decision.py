"""Threshold emptiness for ratio and two-cost automata on finite words."""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .automata import Mwa, behavior, trim
from .errors import DomainError, StructuralError, UsageError
from .structures import RatioStructure, TwoCostStructure


@dataclass(frozen=True)
class DecisionResult:
    answer: bool
    witness: tuple | None = None
    value: Any = None

    def __bool__(self) -> bool:
        return self.answer


def _rational(nu) -> Fraction:
    if isinstance(nu, float) or isinstance(nu, bool):
        raise UsageError(f"threshold must be an exact rational, got {nu!r}")
    try:
        return Fraction(nu)
    except (TypeError, ValueError):
        raise UsageError(f"threshold must be an exact rational, got {nu!r}") from None


def _check_weights(a: Mwa, what: str) -> None:
    if a.kind != "element":
        raise StructuralError("decision procedures expect element payloads")
    for t, (x, y) in a.weights.items():
        for v in (x, y):
            if isinstance(v, float):
                raise DomainError(f"{what}: weight {(x, y)!r} on {t!r} is not a finite rational")


def _word(path) -> tuple:
    return tuple(t[1] for t in path)


def _first_path(a: Mwa, allowed) -> list | None:
    """Shortest accepting path (length >= 1) using only transitions in ``allowed``."""
    out: dict = {}
    for t in a.transitions:
        if allowed(t):
            out.setdefault(t[0], []).append(t)
    parent: dict = {}
    queue = deque()
    for p in sorted(a.initial, key=repr):
        for t in out.get(p, ()):
            if t[2] not in parent:
                parent[t[2]] = (None, t)
                queue.append(t[2])
    # states are entered by at least one transition here, so parent chains are nonempty
    while queue:
        q = queue.popleft()
        if q in a.final:
            path = []
            node = q
            while True:
                prev, t = parent[node]
                path.append(t)
                if prev is None:
                    break
                node = prev
            return path[::-1]
        for t in out.get(q, ()):
            if t[2] not in parent:
                parent[t[2]] = (q, t)
                queue.append(t[2])
    return None


def _positive_cycle(states, edges) -> list | None:
    """A cycle with positive total weight, as a list of edges, or ``None``.

    ``edges`` are ``(u, v, weight, label)``; longest-path Bellman-Ford from a
    virtual source connected to every state.
    """
    dist = {q: Fraction(0) for q in states}
    pred: dict = {}
    last = None
    for _ in range(len(dist)):
        last = None
        for e in edges:
            u, v, w, _ = e
            if dist[u] + w > dist[v]:
                dist[v] = dist[u] + w
                pred[v] = e
                last = v
        if last is None:
            return None
    node = last
    for _ in range(len(dist)):
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


def ratio_emptiness_geq(a: Mwa, nu) -> DecisionResult:
    """Is there a word whose ratio behavior is at least ``nu``?

    A cost-0 accepting path answers yes outright (ratio ``inf``). Otherwise
    every accepting path has positive cost, and a path reaches the threshold
    iff its weight under ``r - nu*c`` is nonnegative.
    """
    nu = _rational(nu)
    _check_weights(a, "ratio decision")
    for t, (_, c) in a.weights.items():
        if c < 0:
            raise DomainError(f"ratio costs must be nonnegative, found {c} on {t!r}")
    s = RatioStructure()
    a = trim(a)
    if not a.initial:
        return DecisionResult(False)
    zero = _first_path(a, lambda t: a.weights[t][1] == 0)
    if zero is not None:
        w = _word(zero)
        return _confirmed(a, w, s, lambda v: v >= nu)
    gain = {t: a.weights[t][0] - nu * a.weights[t][1] for t in a.transitions}
    edges = [(p, q, gain[(p, x, q)], (p, x, q)) for p, x, q in a.transitions]
    cycle = _positive_cycle(a.states, edges)
    horizon = len(a.states)
    if cycle is not None:
        horizon = _pumped_length(a, gain, cycle)
    path = _best_layered(a, gain, horizon)
    if path is None:
        return DecisionResult(False)
    return _confirmed(a, _word(path), s, lambda v: v >= nu)


def _pumped_length(a: Mwa, gain: dict, cycle: list) -> int:
    """Length of a witness prefix + cycle^k + suffix with nonnegative gain."""
    start = cycle[0][0]
    pre = _path_between(a, a.initial, {start})
    suf = _path_between(a, {start}, a.final)
    g_pre = sum((gain[t] for t in pre), Fraction(0))
    g_suf = sum((gain[t] for t in suf), Fraction(0))
    g_cyc = sum((e[2] for e in cycle), Fraction(0))
    if g_cyc <= 0:
        raise AssertionError("cycle extraction returned a non-positive cycle")  # pragma: no cover
    k = max(1, math.ceil(-(g_pre + g_suf) / g_cyc))
    return len(pre) + k * len(cycle) + len(suf)


def _path_between(a: Mwa, sources, targets) -> list:
    """Shortest (possibly empty) path from ``sources`` into ``targets``."""
    parent = {q: None for q in sources}
    queue = deque(sorted(sources, key=repr))
    out: dict = {}
    for t in a.transitions:
        out.setdefault(t[0], []).append(t)
    while queue:
        q = queue.popleft()
        if q in targets:
            path = []
            while parent[q] is not None:
                t = parent[q]
                path.append(t)
                q = t[0]
            return path[::-1]
        for t in out.get(q, ()):
            if t[2] not in parent:
                parent[t[2]] = t
                queue.append(t[2])
    raise StructuralError("trimmed automaton lost a connecting path")  # pragma: no cover


def _best_layered(a: Mwa, gain: dict, horizon: int) -> list | None:
    """Shortest accepting path with nonnegative gain among lengths 1..horizon."""
    layer: dict = {}
    back: list[dict] = []
    for t in a.transitions:
        if t[0] in a.initial:
            g = gain[t]
            if t[2] not in layer or g > layer[t[2]][0]:
                layer[t[2]] = (g, t)
    for length in range(1, horizon + 1):
        back.append(layer)
        hits = [(q, g) for q, (g, _) in layer.items() if q in a.final and g >= 0]
        if hits:
            q = min(hits, key=lambda h: (-h[1], repr(h[0])))[0]
            path = []
            for lvl in reversed(back):
                t = lvl[q][1]
                path.append(t)
                q = t[0]
            return path[::-1]
        nxt: dict = {}
        for t in a.transitions:
            if t[0] in layer:
                g = layer[t[0]][0] + gain[t]
                if t[2] not in nxt or g > nxt[t[2]][0]:
                    nxt[t[2]] = (g, t)
        layer = nxt
    return None


def _confirmed(a: Mwa, word: tuple, s, ok) -> DecisionResult:
    value = behavior(a, word, s)
    if not ok(value):
        raise AssertionError(f"witness {word!r} fails re-validation (value {value})")  # pragma: no cover
    return DecisionResult(True, word, value)


def twocost_emptiness_leq(a: Mwa, nu, structure: TwoCostStructure) -> DecisionResult:
    """Is there a word whose two-cost behavior is at most ``nu``?

    Pareto label-setting over (primary, secondary) sums; labels exceeding a
    bound are pruned, which is sound because all components are nonnegative.
    The witness found first has the least primary cost.
    """
    nu = _rational(nu)
    p = structure.p
    _check_weights(a, "two-cost decision")
    for t, (x, y) in a.weights.items():
        if x < 0 or y < 0:
            raise DomainError(f"two-cost decision needs nonnegative components, found {(x, y)!r} on {t!r}")
    a = trim(a)
    out: dict = {}
    for t in a.transitions:
        out.setdefault(t[0], []).append(t)
    heap: list = []
    labels: dict = {}
    counter = 0

    def push(x, y, length, t, parent):
        nonlocal counter
        if x > nu or y > p:
            return
        q = t[2]
        for x2, y2 in labels.get(q, ()):
            if x2 <= x and y2 <= y:
                return
        labels[q] = [(x2, y2) for x2, y2 in labels.get(q, ()) if not (x <= x2 and y <= y2)] + [(x, y)]
        counter += 1
        heapq.heappush(heap, (x, y, length, counter, q, t, parent))

    for q0 in a.initial:
        for t in out.get(q0, ()):
            x, y = a.weights[t]
            push(x, y, 1, t, None)
    while heap:
        entry = heapq.heappop(heap)
        x, y, length, _, q, t, parent = entry
        if (x, y) not in labels.get(q, ()):
            continue  # dominated after it was queued
        if q in a.final:
            path = []
            node = entry
            while node is not None:
                path.append(node[5])
                node = node[6]
            return _confirmed(a, _word(path[::-1]), structure, lambda v: v <= nu)
        for t2 in out.get(q, ()):
            x2, y2 = a.weights[t2]
            push(x + x2, y + y2, length + 1, t2, entry)
    return DecisionResult(False)


__all__ = ["DecisionResult", "ratio_emptiness_geq", "twocost_emptiness_leq"]
