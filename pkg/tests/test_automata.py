import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import path_behavior, random_mwa, words
from mwmso.automata import (
    Dfa,
    Mwa,
    Nfa,
    accepting_paths,
    behavior,
    complement,
    determinize,
    inverse_relabel,
    intersect,
    is_empty,
    minimize,
    multiset_behavior,
    product_with_dfa,
    relabel_project,
    scan_dfa,
    to_element_payloads,
    to_multiset_payloads,
    trim,
    unfold,
    union_automata,
    union_dfa,
)
from mwmso.errors import ResourceError, StructuralError, UsageError, use_budgets
from mwmso.multiset import EMPTY, FiniteMultiset
from mwmso.structures import EnergyStructure, RatioStructure, TwoCostStructure

RATIO = RatioStructure()
AB = ("a", "b")


def test_constructor_validation():
    with pytest.raises(StructuralError):
        Nfa([], [0], [0], [0], [])
    with pytest.raises(StructuralError):
        Nfa("a", [0], [1], [0], [])
    with pytest.raises(StructuralError):
        Nfa("a", [0], [0], [0], [(0, "b", 0)])
    with pytest.raises(StructuralError):
        Mwa("a", [0], [0], [0], {(0, "a", 0): (F(1), F(1))}, kind="multiset")


def test_behavior_rejects_empty_word_and_foreign_letters():
    a = random_mwa(random.Random(1))
    with pytest.raises(UsageError):
        multiset_behavior(a, (), RATIO)
    with pytest.raises(UsageError):
        multiset_behavior(a, ("c",), RATIO)


def test_two_paths_with_equal_weight_are_counted_twice():
    w = (F(1), F(1))
    a = Mwa("a", [0, 1, 2], [0], [1, 2], {(0, "a", 1): w, (0, "a", 2): w})
    assert multiset_behavior(a, "a", RATIO) == FiniteMultiset({w: 2})
    assert behavior(a, "a", RATIO) == 1


@pytest.mark.parametrize("seed", range(40))
def test_dp_behavior_matches_path_enumeration(seed):
    rng = random.Random(seed)
    kind = "multiset" if seed % 2 else "element"
    a = random_mwa(rng, n_states=3, n_transitions=8, kind=kind)
    for w in words(AB, 4):
        assert multiset_behavior(a, w, RATIO) == path_behavior(a, w, RATIO)


def test_nonadditive_valuation_through_behavior():
    s = TwoCostStructure(3)
    a = Mwa("a", [0], [0], [0], {(0, "a", 0): (F(1), F(2))})
    assert behavior(a, "a", s) == 1
    assert behavior(a, "aa", s) == float("inf")


@pytest.mark.parametrize("seed", range(100))
def test_unfold_preserves_multiset_behavior(seed):
    rng = random.Random(1000 + seed)
    a = random_mwa(rng, n_states=3, n_transitions=rng.randint(3, 9), kind="multiset")
    u = unfold(a)
    assert all(r.total == 1 for r in u.weights.values())
    e = to_element_payloads(u)
    for w in words(AB, 4):
        expected = multiset_behavior(a, w, RATIO)
        assert multiset_behavior(u, w, RATIO) == expected
        assert multiset_behavior(e, w, RATIO) == expected


def test_unfold_keeps_copies_of_different_incoming_transitions_apart():
    # two transitions into q with the same payload must not be merged into one state
    m1, m2 = (F(1), F(0)), (F(0), F(1))
    a = Mwa(
        AB,
        [0, 1],
        [0],
        [1],
        {
            (0, "a", 1): FiniteMultiset({m1: 1}),
            (0, "b", 1): FiniteMultiset({m1: 1}),
            (1, "a", 1): FiniteMultiset({m2: 2}),
        },
    )
    u = unfold(a)
    for w in words(AB, 4):
        assert multiset_behavior(u, w, RATIO) == multiset_behavior(a, w, RATIO)


def test_unfold_drops_empty_payloads():
    a = Mwa("a", [0], [0], [0], {(0, "a", 0): EMPTY}, kind="multiset")
    assert unfold(a).transitions == ()


@pytest.mark.parametrize("seed", range(20))
def test_union_is_multiset_union(seed):
    rng = random.Random(seed)
    a1, a2 = random_mwa(rng), random_mwa(rng)
    u = union_automata(a1, a2)
    for w in words(AB, 3):
        assert multiset_behavior(u, w, RATIO) == multiset_behavior(a1, w, RATIO) | multiset_behavior(a2, w, RATIO)


def _ends_with_a() -> Dfa:
    return scan_dfa(AB, 0, lambda q, x: 1 if x == "a" else 0, lambda q: q == 1)


@pytest.mark.parametrize("seed", range(20))
def test_product_restricts_to_language(seed):
    a = random_mwa(random.Random(seed), kind="multiset" if seed % 2 else "element")
    d = _ends_with_a()
    p = product_with_dfa(a, d)
    for w in words(AB, 4):
        expected = multiset_behavior(a, w, RATIO) if w[-1] == "a" else EMPTY
        assert multiset_behavior(p, w, RATIO) == expected


@pytest.mark.parametrize("seed", range(30))
def test_relabel_project_unions_preimages(seed):
    rng = random.Random(seed)
    kind = "multiset" if seed % 2 else "element"
    sigma = ("a", "b", "c")
    a = random_mwa(rng, alphabet=sigma, n_transitions=10, kind=kind)
    h = {"a": "x", "b": "x", "c": "y"}
    p = relabel_project(a, h, ["x", "y"])
    for w in words(("x", "y"), 3):
        expected = EMPTY
        for v in words(sigma, len(w), len(w)):
            if tuple(h[c] for c in v) == w:
                expected = expected | multiset_behavior(a, v, RATIO)
        assert multiset_behavior(p, w, RATIO) == expected


@pytest.mark.parametrize("seed", range(20))
def test_inverse_relabel(seed):
    a = random_mwa(random.Random(seed))
    h = {"a": "a", "b": "b", "c": "a"}
    b = inverse_relabel(a, ["a", "b", "c"], h.get)
    for w in words(("a", "b", "c"), 3):
        assert multiset_behavior(b, w, RATIO) == multiset_behavior(a, tuple(h[c] for c in w), RATIO)


def test_trim_keeps_behavior_and_removes_dead_states():
    w = (F(1), F(1))
    a = Mwa("a", [0, 1, 2, 3], [0], [1], {(0, "a", 1): w, (0, "a", 2): w, (3, "a", 1): w})
    t = trim(a)
    assert set(t.states) == {0, 1}
    assert multiset_behavior(t, "a", RATIO) == multiset_behavior(a, "a", RATIO)


def test_payload_conversions_roundtrip():
    a = random_mwa(random.Random(3))
    assert to_element_payloads(to_multiset_payloads(a)).weights == a.weights
    with pytest.raises(StructuralError):
        to_element_payloads(Mwa("a", [0], [0], [0], {(0, "a", 0): FiniteMultiset({(F(1), F(1)): 2})}))


def test_energy_payloads_behave_with_running_minimum():
    s = EnergyStructure([2])

    class Finite:
        # energy valuation on finite runs: running minimum of the clamped partial sums
        fold = None
        unit = s.unit

        @staticmethod
        def val(ms):
            return s.val_omega(list(ms), [s.unit])

    a = Mwa("a", [0], [0], [0], {(0, "a", 0): (-1,)})
    assert multiset_behavior(a, "aaa", Finite) == FiniteMultiset({(-2,): 1})


def test_state_budget():
    step = lambda q, x: q + 1
    with use_budgets(states=50):
        with pytest.raises(ResourceError):
            scan_dfa(AB, 0, step, lambda q: True)


# --- DFA constructions against brute-force membership -----------------------------------------

nfa_specs = st.tuples(
    st.integers(1, 4),
    st.lists(st.tuples(st.integers(0, 3), st.sampled_from(AB), st.integers(0, 3)), max_size=10),
    st.sets(st.integers(0, 3), min_size=1, max_size=2),
    st.sets(st.integers(0, 3), max_size=3),
)


def _nfa(spec) -> Nfa:
    n, trans, init, fin = spec
    ok = lambda q: q < n
    return Nfa(AB, range(n), filter(ok, init), filter(ok, fin), [t for t in trans if ok(t[0]) and ok(t[2])])


def _accepts(n: Nfa, w) -> bool:
    return bool(accepting_paths(n, w))


@given(nfa_specs, nfa_specs)
@settings(max_examples=150)
def test_boolean_operations_match_membership(s1, s2):
    n1, n2 = _nfa(s1), _nfa(s2)
    d1, d2 = determinize(n1), determinize(n2)
    m1 = minimize(d1)
    for w in words(AB, 5):
        x, y = _accepts(n1, w), _accepts(n2, w)
        assert d1.accepts(w) == x
        assert m1.accepts(w) == x
        assert complement(d1).accepts(w) == (not x)
        assert intersect(d1, d2).accepts(w) == (x and y)
        assert union_dfa(d1, d2).accepts(w) == (x or y)


@given(nfa_specs)
@settings(max_examples=150)
def test_minimize_is_canonical(spec):
    d = determinize(_nfa(spec))
    m = minimize(d)
    again = minimize(complement(complement(d)))
    assert m.n_states <= d.n_states
    assert (m.delta, m.start, m.final) == (again.delta, again.start, again.final)


@given(nfa_specs)
@settings(max_examples=150)
def test_emptiness_on_nonempty_words(spec):
    n = _nfa(spec)
    m = minimize(determinize(n))
    # a shortest accepted word of a minimal DFA is shorter than its state count
    brute = not any(_accepts(n, w) for w in words(AB, min(m.n_states, 8)))
    if m.n_states <= 8:
        assert is_empty(m) == brute
