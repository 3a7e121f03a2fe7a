from fractions import Fraction as F

import pytest

from delegatebox import (
    Alternative,
    Instance,
    RegimeMismatch,
    expected_of_max,
    make_distribution,
)
from delegatebox.bounds import (
    COSTLESS,
    COSTLY,
    IDENTICAL,
    audit,
    render_audit_table,
    upper_bound_costless,
    upper_bound_costly,
)
from delegatebox.delegation import (
    costly_mechanism,
    identical_cost_mechanism,
    maximal_mechanism_costless,
)
from delegatebox.instances import random_corpus, tightness
from delegatebox.pandora import pnoi_optimal


def box(pairs, cost=0):
    return Alternative(make_distribution(pairs), cost)


class TestUpperBoundCostless:
    def test_three_box_gap(self):
        eps = F(1, 100)
        assert upper_bound_costless(tightness(eps)) == 1 + (2 - eps)

    def test_prohibitive_costs_leave_only_the_best_mean(self):
        inst = Instance((box([(0, "0.5"), (1, "0.5")], 2), box([(2, 1)], 3)))
        assert upper_bound_costless(inst) == 2

    def test_single_free_deterministic_box_doubles(self):
        inst = Instance((box([(7, 1)]),))
        assert upper_bound_costless(inst) == 14


class TestUpperBoundCostly:
    def test_free_delegation_collapses_to_the_costless_bound(self):
        inst = tightness(F(1, 10))
        assert upper_bound_costly(inst) == upper_bound_costless(inst)
        assert pnoi_optimal(inst)[0] <= upper_bound_costless(inst)

    def test_prohibitive_delegation_leaves_the_direct_search_value(self):
        base = tightness(F(1, 10))
        inst = Instance(base.alternatives, base.cost_model, 100)
        assert upper_bound_costly(inst) == pnoi_optimal(inst)[0]

    def test_quarter_surplus_formula(self):
        base = next(random_corpus(seed=17, count=1, max_n=3))
        surplus = expected_of_max(base, "shifted_positive")
        inst = Instance(base.alternatives, base.cost_model, F(1, 4) * surplus)
        want = max(
            pnoi_optimal(inst)[0],
            upper_bound_costless(inst) - inst.delegation_cost,
        )
        assert upper_bound_costly(inst) == want


class TestAudit:
    def test_three_box_gap_costless_passes(self):
        inst = tightness(F(1, 100))
        report = maximal_mechanism_costless(inst)
        result = audit(inst, report, COSTLESS)
        assert result.passed
        assert result.claimed_bound == 3
        assert result.ratio == F(299, 100)
        assert result.ratio <= 3

    def test_single_box_passes(self):
        inst = Instance((box([(3, 1)]),))
        result = audit(inst, maximal_mechanism_costless(inst), COSTLESS)
        assert result.passed
        assert result.ratio <= result.claimed_bound

    def test_quarter_alpha_claims_factor_four(self):
        base = next(random_corpus(seed=19, count=1, max_n=3))
        surplus = expected_of_max(base, "shifted_positive")
        inst = Instance(base.alternatives, base.cost_model, F(1, 4) * surplus)
        result = audit(inst, costly_mechanism(inst), COSTLY, alpha=F(1, 4))
        assert result.claimed_bound == 4
        assert result.passed

    def test_identical_regime_uses_the_common_cost_split(self):
        inst = Instance((box([(0, "0.5"), (2, "0.5")], 1), box([(1, 1)], 1)))
        result = audit(inst, identical_cost_mechanism(inst), IDENTICAL)
        assert result.claimed_bound == 2
        want_ub = max(max(inst.expected_values()), expected_of_max(inst) - 1)
        assert result.ub_used == want_ub
        assert result.passed

    def test_regime_mismatches(self):
        costly_inst = Instance((box([(1, 1)]),), delegation_cost=1)
        with pytest.raises(RegimeMismatch):
            report = maximal_mechanism_costless(tightness(F(1, 10)))
            audit(costly_inst, report, COSTLESS)
        unequal = Instance((box([(1, 1)], 1), box([(1, 1)], 2)))
        equal = Instance((box([(1, 1)], 1), box([(1, 1)], 1)))
        with pytest.raises(RegimeMismatch):
            audit(unequal, identical_cost_mechanism(equal), IDENTICAL)
        free = tightness(F(1, 10))
        with pytest.raises(RegimeMismatch):
            audit(free, costly_mechanism(free), COSTLY, alpha=F(1, 4))
        with pytest.raises(RegimeMismatch):
            audit(free, costly_mechanism(free), COSTLY)

    def test_ratio_sweep_rises_toward_three(self):
        ratios = []
        for eps in (F(1, 5), F(1, 10), F(1, 20), F(1, 100)):
            inst = tightness(eps)
            result = audit(inst, maximal_mechanism_costless(inst), COSTLESS)
            assert result.passed
            ratios.append(result.ratio)
        assert ratios == sorted(ratios)
        assert all(r < 3 for r in ratios)

    def test_costless_bound_holds_on_corpus(self):
        for inst in random_corpus(seed=23, count=60):
            report = maximal_mechanism_costless(inst)
            result = audit(inst, report, COSTLESS)
            assert result.passed
            assert pnoi_optimal(inst)[0] <= result.ub_costless

    def test_render_table_mentions_the_verdict(self):
        inst = tightness(F(1, 10))
        result = audit(inst, maximal_mechanism_costless(inst), COSTLESS)
        text = render_audit_table(result)
        assert "pass" in text
        assert "ub_used" in text
