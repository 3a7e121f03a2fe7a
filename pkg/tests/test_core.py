from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delegatebox import (
    Alternative,
    CostModel,
    EmptySupport,
    EnumerationLimitExceeded,
    Instance,
    InvalidParameters,
    NegativeValue,
    ProbabilitySumMismatch,
    expected_of_max,
    expected_value,
    instance_digest,
    instance_from_json,
    instance_to_json,
    iter_realizations,
    make_distribution,
)
from delegatebox.core import as_number, format_number

from oracles import brute_expected_of_max


def box(pairs, cost=0):
    return Alternative(make_distribution(pairs), cost)


def test_make_distribution_two_point():
    d = make_distribution([(0, "0.5"), (1, "0.5")])
    assert d.atoms == ((F(0), F(1, 2)), (F(1), F(1, 2)))


def test_make_distribution_point_mass():
    d = make_distribution([(1, 1)])
    assert d.atoms == ((F(1), F(1)),)
    assert expected_value(d) == 1


def test_make_distribution_merges_duplicates():
    d = make_distribution([(0, "0.3"), (0, "0.2"), (2, "0.5")])
    assert d.atoms == ((F(0), F(1, 2)), (F(2), F(1, 2)))


def test_make_distribution_drops_zero_probability_atoms():
    d = make_distribution([(1, 1), (5, 0)])
    assert d.values == (F(1),)


def test_make_distribution_errors():
    with pytest.raises(NegativeValue):
        make_distribution([(-1, 1)])
    with pytest.raises(ProbabilitySumMismatch):
        make_distribution([(0, "0.5"), (1, "0.6")])
    with pytest.raises(EmptySupport):
        make_distribution([])
    with pytest.raises(ProbabilitySumMismatch):
        make_distribution([(0, "-0.5"), (1, "1.5")])


def test_expected_value_examples():
    assert expected_value(make_distribution([(10, "0.1"), (0, "0.9")])) == 1
    assert expected_value(make_distribution([(0, "0.25"), (2, "0.75")])) == F(3, 2)


def test_expected_of_max_single_alternative_is_mean():
    inst = Instance((box([(0, "0.25"), (2, "0.75")]),))
    assert expected_of_max(inst) == F(3, 2)


def test_expected_of_max_three_uniform_dice():
    third = F(1, 3)
    alts = tuple(box([(0, third), (1, third), (2, third)]) for _ in range(3))
    inst = Instance(alts)
    oracle = brute_expected_of_max(inst)
    assert oracle == F(5, 3)  # 27-outcome enumeration
    assert expected_of_max(inst) == oracle


def test_expected_of_max_shifted_positive_on_three_box_gap():
    # two clean boxes worth 2 w.p. 1/2, one sure box whose cost eats it
    alts = (
        box([(0, "0.5"), (2, "0.5")]),
        box([(0, "0.5"), (2, "0.5")]),
        box([(1, 1)], 1),
    )
    inst = Instance(alts)
    assert expected_of_max(inst, "shifted_positive") == F(3, 2)


def test_expected_of_max_matches_brute_force_with_costs():
    alts = (
        box([(0, "0.5"), (3, "0.5")], 1),
        box([(1, "0.25"), (2, "0.75")], "0.5"),
    )
    inst = Instance(alts)
    costs = inst.singleton_costs()
    want = brute_expected_of_max(inst, lambda i, v: max(v - costs[i], F(0)))
    assert expected_of_max(inst, "shifted_positive") == want


small_prob_weights = st.lists(st.integers(1, 8), min_size=1, max_size=3)


@st.composite
def small_instances(draw, max_n=3, with_costs=True):
    n = draw(st.integers(1, max_n))
    alts = []
    for _ in range(n):
        weights = draw(small_prob_weights)
        total = sum(weights)
        values = draw(
            st.lists(
                st.integers(0, 12),
                min_size=len(weights),
                max_size=len(weights),
                unique=True,
            )
        )
        atoms = [(F(v), F(w, total)) for v, w in zip(values, weights)]
        cost = F(draw(st.integers(0, 8)), 4) if with_costs else F(0)
        alts.append(Alternative(make_distribution(atoms), cost))
    return Instance(tuple(alts))


@given(small_instances())
@settings(max_examples=60, deadline=None)
def test_max_dominates_each_mean(inst):
    top = expected_of_max(inst)
    assert all(top >= m for m in inst.expected_values())


@given(small_instances(), small_instances(max_n=1))
@settings(max_examples=60, deadline=None)
def test_adding_an_alternative_never_decreases_the_max(inst, extra):
    grown = Instance(inst.alternatives + extra.alternatives)
    assert expected_of_max(grown) >= expected_of_max(inst)


@given(small_instances())
@settings(max_examples=60, deadline=None)
def test_exact_and_float_modes_agree(inst):
    exact = expected_of_max(inst, "shifted_positive")
    approx = expected_of_max(inst.to_float(), "shifted_positive")
    assert abs(float(exact) - approx) <= 1e-9


def test_iter_realizations_limit():
    inst = Instance(tuple(box([(0, "0.5"), (1, "0.5")]) for _ in range(4)))
    with pytest.raises(EnumerationLimitExceeded):
        list(iter_realizations(inst, limit=15))
    assert len(list(iter_realizations(inst, limit=16))) == 16


def test_instance_json_round_trip():
    inst = Instance(
        (box([(0, "0.5"), (3, "0.5")], "0.25"), box([(1, 1)], "1/3")),
        delegation_cost="0.5",
    )
    back = instance_from_json(instance_to_json(inst))
    assert back == inst
    assert instance_digest(back) == instance_digest(inst)


def test_monotone_cost_model_round_trip_and_lookup():
    table = {
        frozenset(): 0,
        frozenset({0}): 1,
        frozenset({1}): 1,
        frozenset({0, 1}): F(3, 2),
    }
    inst = Instance(
        (box([(0, "0.5"), (2, "0.5")]), box([(1, 1)])),
        CostModel.monotone(table),
    )
    assert inst.singleton_cost(0) == 1
    assert inst.inspection_cost({0, 1}) == F(3, 2)
    back = instance_from_json(instance_to_json(inst))
    assert back.inspection_cost({0, 1}) == F(3, 2)


def test_monotone_table_validation():
    bad = {
        frozenset(): 0,
        frozenset({0}): 2,
        frozenset({1}): 1,
        frozenset({0, 1}): 1,  # smaller than c({0})
    }
    with pytest.raises(InvalidParameters):
        Instance(
            (box([(1, 1)]), box([(1, 1)])),
            CostModel.monotone(bad),
        )


def test_mixed_modes_rejected():
    exact_alt = box([(1, 1)])
    float_alt = Alternative(make_distribution([(1, 1)], mode="float"))
    with pytest.raises(InvalidParameters):
        Instance((exact_alt, float_alt))


def test_number_formatting_round_trips():
    for x in [F(3, 4), F(1, 3), F(-7, 20), F(5), F(1, 6)]:
        assert as_number(format_number(x)) == x


def test_float_decimal_reading():
    assert as_number(0.1) == F(1, 10)
    assert as_number("1/3") == F(1, 3)
