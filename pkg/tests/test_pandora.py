from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delegatebox import (
    Alternative,
    CapMismatch,
    Instance,
    StateLimitExceeded,
    make_distribution,
)
from delegatebox.instances import random_corpus, tightness
from delegatebox.pandora import (
    INSPECT,
    SELECT_CLOSED,
    STOP,
    Cap,
    capped_value_distribution,
    evaluate_policy,
    expected_shortfall,
    pnoi_optimal,
    pnoi_value_upper_bound,
    policy_from_rows,
    policy_to_rows,
    reservation_cap,
    run_policy,
    weitzman_value,
)

from oracles import exhaustive_policy_optimum, full_history_optimal


def box(pairs, cost=0):
    return Alternative(make_distribution(pairs), cost)


half_coin = [(0, "0.5"), (1, "0.5")]


class TestReservationCap:
    def test_half_coin_quarter_cost(self):
        cap = reservation_cap(box(half_coin, "0.25"))
        assert cap.sigma == F(1, 2)
        assert not cap.never_worthwhile

    def test_zero_cost_saturates_at_top_of_support(self):
        cap = reservation_cap(box([(0, "0.25"), (2, "0.5"), (5, "0.25")]))
        assert cap.sigma == 5

    def test_cost_equal_to_mean_collapses_to_zero(self):
        cap = reservation_cap(box(half_coin, "0.5"))
        assert cap.sigma == 0
        assert not cap.never_worthwhile

    def test_cost_above_mean_is_flagged_not_an_error(self):
        cap = reservation_cap(box(half_coin, 2))
        assert cap.sigma == 0
        assert cap.never_worthwhile

    @given(st.integers(0, 16), st.integers(1, 16))
    @settings(max_examples=80, deadline=None)
    def test_cap_equation_residual_is_zero(self, num, den):
        alt = box([(0, "0.25"), (1, "0.25"), (3, "0.5")], 0)
        mean = alt.dist.mean()
        cost = F(num, den)
        if cost > mean:
            return
        cap = reservation_cap(Alternative(alt.dist, cost))
        assert expected_shortfall(alt.dist, cap.sigma) == cost or cost == 0

    @given(st.integers(0, 28), st.integers(0, 28))
    @settings(max_examples=80, deadline=None)
    def test_caps_are_antitone_in_cost(self, a, b):
        dist = make_distribution([(0, "0.25"), (2, "0.25"), (4, "0.5")])
        lo, hi = sorted((F(a, 8), F(b, 8)))
        cap_lo = reservation_cap(Alternative(dist, lo))
        cap_hi = reservation_cap(Alternative(dist, hi))
        assert cap_lo.sigma >= cap_hi.sigma


class TestCappedValue:
    def test_half_coin_capped_at_half(self):
        alt = box(half_coin, "0.25")
        d = capped_value_distribution(alt, reservation_cap(alt))
        assert d.atoms == ((F(0), F(1, 2)), (F(1, 2), F(1, 2)))

    def test_saturated_cap_leaves_distribution_alone(self):
        alt = box(half_coin, 0)
        assert capped_value_distribution(alt, reservation_cap(alt)) == alt.dist

    def test_zero_cap_is_a_point_mass_at_zero(self):
        alt = box(half_coin, "0.5")
        d = capped_value_distribution(alt, reservation_cap(alt))
        assert d.atoms == ((F(0), F(1)),)

    def test_foreign_cap_rejected(self):
        alt = box(half_coin, "0.25")
        with pytest.raises(CapMismatch):
            capped_value_distribution(alt, Cap(F(1, 4), 0))


class TestWeitzman:
    def test_single_half_coin(self):
        inst = Instance((box(half_coin, "0.25"),))
        assert weitzman_value(inst) == F(1, 4)

    def test_free_inspection_recovers_the_expected_max(self):
        inst = Instance((box(half_coin), box([(0, "0.5"), (3, "0.5")])))
        # E[max]: 3 w.p. 1/2, else 1 w.p. 1/4
        assert weitzman_value(inst) == F(3, 2) + F(1, 4)

    def test_costs_at_the_mean_kill_all_value(self):
        inst = Instance((box(half_coin, "0.5"), box([(2, 1)], 2)))
        assert weitzman_value(inst) == 0

    def test_simulation_agrees_with_capped_expectation_on_corpus(self):
        for inst in random_corpus(seed=101, count=40):
            weitzman_value(inst)  # raises internally on any disagreement


class TestOptimalSearch:
    def test_three_box_gap_value(self):
        eps = F(1, 100)
        value, policy = pnoi_optimal(tightness(eps))
        assert value == 3 - 3 * eps + eps * eps
        # opens a free box first
        assert policy.action(frozenset({0, 1, 2}), None) == (INSPECT, 0)

    def test_deterministic_box_is_selected_closed_despite_huge_cost(self):
        inst = Instance((box([(1, 1)], 5),))
        value, policy = pnoi_optimal(inst)
        assert value == 1
        assert policy.action(frozenset({0}), None) == (SELECT_CLOSED, 0)

    def test_two_coins_match_exhaustive_tree_enumeration(self):
        inst = Instance(tuple(box([(0, "0.5"), (2, "0.5")], "0.1") for _ in range(2)))
        value, _ = pnoi_optimal(inst)
        assert value == exhaustive_policy_optimum(inst)

    def test_matches_full_history_oracle_on_corpus(self):
        for inst in random_corpus(seed=77, count=30, max_n=3):
            assert pnoi_optimal(inst)[0] == full_history_optimal(inst)

    def test_dominates_weitzman_and_best_mean(self):
        for inst in random_corpus(seed=55, count=40):
            value, _ = pnoi_optimal(inst)
            assert value >= weitzman_value(inst)
            assert value >= max(inst.expected_values())

    def test_policy_replay_reproduces_the_value(self):
        for inst in random_corpus(seed=42, count=25, max_n=3):
            value, policy = pnoi_optimal(inst)
            assert evaluate_policy(inst, policy) == value

    def test_stop_preferred_on_worthless_ties(self):
        inst = Instance((box([(0, 1)]),))
        value, policy = pnoi_optimal(inst)
        assert value == 0
        assert policy.action(frozenset({0}), None) == (STOP, None)

    def test_state_limit(self):
        inst = Instance(tuple(box(half_coin, "0.25") for _ in range(3)))
        with pytest.raises(StateLimitExceeded):
            pnoi_optimal(inst, state_limit=10)


class TestUpperBound:
    def test_three_box_gap_bound_dominates_the_optimum(self):
        inst = tightness(F(1, 2))
        bound = pnoi_value_upper_bound(inst)
        value, _ = pnoi_optimal(inst)
        assert bound == F(5, 2)
        assert value == F(7, 4)
        assert bound >= value

    def test_free_inspection_bound(self):
        inst = Instance((box(half_coin), box([(0, "0.5"), (3, "0.5")])))
        assert pnoi_value_upper_bound(inst) == weitzman_value(inst) + F(3, 2)

    def test_single_deterministic_free_box_doubles(self):
        inst = Instance((box([(7, 1)]),))
        assert pnoi_value_upper_bound(inst) == 14

    def test_bound_holds_on_corpus(self):
        for inst in random_corpus(seed=9, count=40):
            assert pnoi_value_upper_bound(inst) >= pnoi_optimal(inst)[0]


def test_policy_serialization_round_trip():
    inst = tightness(F(1, 10))
    value, policy = pnoi_optimal(inst)
    back = policy_from_rows(policy_to_rows(policy))
    assert back.table == policy.table
    assert evaluate_policy(inst, back) == value


def test_run_policy_reports_outcome():
    inst = tightness(F(1, 2))
    _, policy = pnoi_optimal(inst)
    outcome = run_policy(policy, (F(2), F(0), F(1)))
    assert outcome.selected == 0
    assert outcome.inspected == frozenset({0})
