"""Shared generators and brute-force reference implementations."""

from __future__ import annotations

import itertools
import sys
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import settings

from mwmso.automata import Mwa, accepting_paths
from mwmso.multiset import FiniteMultiset

settings.register_profile("default", deadline=None, derandomize=True)
settings.load_profile("default")


def words(alphabet, max_len, min_len=1):
    for n in range(min_len, max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def random_weight(rng: random.Random, arity=2, lo=-3, hi=3, nonneg_last=False):
    w = [Fraction(rng.randint(lo, hi), rng.choice([1, 1, 2])) for _ in range(arity)]
    if nonneg_last:
        w[-1] = abs(w[-1])
    return tuple(w)


def random_multiset(rng: random.Random, arity=2, max_support=3, max_count=2, allow_empty=True):
    n = rng.randint(0 if allow_empty else 1, max_support)
    return FiniteMultiset({random_weight(rng, arity): rng.randint(1, max_count) for _ in range(n)} or {})


def random_mwa(
    rng: random.Random,
    n_states=3,
    alphabet=("a", "b"),
    n_transitions=6,
    kind="element",
    weight=None,
    max_initial=2,
):
    """Random automaton with distinct transitions; may have unreachable parts."""
    weight = weight or (lambda: random_weight(rng))
    states = list(range(n_states))
    pool = [(p, x, q) for p in states for x in alphabet for q in states]
    trans = rng.sample(pool, min(n_transitions, len(pool)))
    weights = {}
    for t in trans:
        if kind == "multiset":
            r = FiniteMultiset({weight(): rng.randint(1, 2) for _ in range(rng.randint(1, 2))})
            weights[t] = r
        else:
            weights[t] = weight()
    initial = rng.sample(states, rng.randint(1, max_initial))
    final = rng.sample(states, rng.randint(1, n_states))
    return Mwa(alphabet, states, initial, final, weights, kind=kind)


def path_behavior(a: Mwa, w, s) -> FiniteMultiset:
    """Reference multiset behavior: enumerate accepting paths, expand multiset payloads."""
    out: Counter = Counter()
    for path in accepting_paths(a, w):
        choices = [a.payload_items(t) for t in path]
        for combo in itertools.product(*choices):
            count = 1
            for _, c in combo:
                count *= c
            out[s.val([m for m, _ in combo])] += count
    return FiniteMultiset(dict(out))


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
