import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mwmso.errors import DomainError, UsageError
from mwmso.multiset import EMPTY, FiniteMultiset
from mwmso.structures import (
    DisplacementStructure,
    EnergyStructure,
    OmegaRatioStructure,
    RatioStructure,
    TwoCostStructure,
    format_number,
    format_weight,
    parse_structure,
    parse_weight,
    validate_structure,
)

INF = math.inf
fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@given(st.lists(fractions, min_size=1, max_size=4))
def test_weight_literal_roundtrip(xs):
    m = tuple(xs)
    assert parse_weight(format_weight(m)) == m


def test_number_formatting():
    assert format_number(F(3, 4)) == "3/4"
    assert format_number(F(-2)) == "-2"
    assert format_number(INF) == "inf"
    assert format_number(-INF) == "-inf"
    assert format_number(math.sqrt(2)) == "1.41421356237"


@pytest.mark.parametrize("bad", ["1,2", "<>", "<a,1>", "<1/0x>"])
def test_bad_literals(bad):
    with pytest.raises(UsageError):
        parse_weight(bad)


@pytest.mark.parametrize(
    "text, cls, name",
    [
        ("ratio", RatioStructure, "ratio"),
        ("twocost(10)", TwoCostStructure, "twocost(10)"),
        ("disp(3)", DisplacementStructure, "disp(3)"),
        ("omega-ratio", OmegaRatioStructure, "omega-ratio"),
        ("energy(2, 3)", EnergyStructure, "energy(2,3)"),
    ],
)
def test_parse_structure(text, cls, name):
    s = parse_structure(text)
    assert isinstance(s, cls)
    assert s.name == name
    assert parse_structure(s.name).name == name


@pytest.mark.parametrize("text", ["rati", "disp(0)", "energy(0)", "twocost", "energy"])
def test_parse_structure_rejects(text):
    with pytest.raises(UsageError):
        parse_structure(text)


def test_ratio_phi():
    s = RatioStructure()
    assert s.phi(EMPTY) == -INF
    assert s.phi(FiniteMultiset({(F(1), F(2)): 1, (F(3), F(4)): 5})) == F(3, 4)
    assert s.phi(FiniteMultiset({(F(0), F(0)): 1})) == INF
    assert s.phi(FiniteMultiset({(F(-1), F(0)): 1})) == INF
    with pytest.raises(DomainError):
        s.coerce((F(1), F(-1)))


def test_twocost_phi():
    s = TwoCostStructure(10)
    r = FiniteMultiset({(F(5), F(9)): 1, (F(3), F(11)): 1, (F(7), F(2)): 1})
    assert s.phi(r) == 5
    assert s.phi(FiniteMultiset({(F(1), F(11)): 1})) == INF
    assert s.phi(EMPTY) == INF


def test_displacement_phi_is_count_weighted_mean():
    s = DisplacementStructure(2)
    r = FiniteMultiset({(F(2), F(0)): 1, (F(0), F(0)): 2, (F(-2), F(0)): 1})
    assert s.phi(r) == 1.0
    assert s.phi(FiniteMultiset({(F(1), F(1)): 3})) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert s.phi(EMPTY) == 0.0


@pytest.mark.parametrize("s", [RatioStructure(), TwoCostStructure(4), DisplacementStructure(3)])
@given(data=st.data())
def test_pv_laws_hold(s, data):
    samples = [tuple(data.draw(fractions) for _ in range(s.arity)) for _ in range(5)]
    samples = [s.coerce((m[0], abs(m[1])) + m[2:]) if s.arity > 1 else m for m in samples]
    assert validate_structure(s, samples) == []


def test_omega_ratio_unit_padding_and_cases():
    s = OmegaRatioStructure()
    one = s.unit
    for m in [(F(3), F(2)), (INF, F(1)), (-INF, F(0))]:
        assert s.val_omega([m], [one]) == m
    assert s.val_omega([], [(F(1), F(1)), (F(3), F(1))]) == (F(2), F(1))
    # costs converge, rewards grow
    assert s.val_omega([(F(0), F(2))], [(F(1), F(0))]) == (INF, F(1))
    assert s.val_omega([(F(0), F(2))], [(F(-1), F(0))]) == (-INF, F(1))
    # costs converge, rewards oscillate: limsup of partial rewards over fixed cost
    assert s.val_omega([(F(1), F(2))], [(F(2), F(0)), (F(-2), F(0))]) == (F(3, 2), F(1))
    assert s.val_omega([(F(1), F(2))], [one]) == (F(1), F(2))
    assert s.prod((INF, F(0)), (-INF, F(0))) == (-INF, F(0))
    assert validate_structure(s, [(F(1), F(1)), (F(-2), F(3))]) == []


def test_energy_clamping_and_running_minimum():
    s = EnergyStructure([2])
    assert s.prod((2,), (1,)) == (2,)
    assert s.prod((-2,), (-1,)) == (-2,)
    assert s.val_omega([], [(1,)]) == (0,)
    assert s.val_omega([], [(-1,)]) == (-2,)
    assert s.val_omega([(1,), (1,)], [(-1,), (1,)]) == (0,)
    assert s.phi(FiniteMultiset({(0,): 1})) is True
    assert s.phi(FiniteMultiset({(-1,): 1})) is False
    with pytest.raises(DomainError):
        s.coerce((3,))
    with pytest.raises(DomainError):
        s.coerce((F(1, 2),))


def test_energy_fails_padding_law_on_positive_weights():
    # the initial level 0 takes part in the running minimum, so Val^w(m 1^w) != m for m > 0
    s = EnergyStructure([2])
    laws = {v.law for v in validate_structure(s, [(1,)])}
    assert laws == {"omega-padding"}
    assert validate_structure(s, [(0,), (-1,)]) == []
