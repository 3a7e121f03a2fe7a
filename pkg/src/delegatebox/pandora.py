"""Search machinery for boxes with inspection costs.

Reservation caps, the descending-cap (index) policy for obligatory
inspection, and an exact dynamic program for the optimal adaptive policy when
inspection is optional (select-a-closed-box allowed).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Optional

from .core import (
    DEFAULT_STATE_LIMIT,
    FLOAT_TOL,
    Alternative,
    CapMismatch,
    DelegateboxError,
    DiscreteDistribution,
    Instance,
    InvalidParameters,
    Number,
    Outcome,
    PolicyIncomplete,
    StateLimitExceeded,
    expected_max_of_dists,
    format_number,
    iter_realizations,
)

# Policy action kinds.
INSPECT = "inspect"
SELECT_CLOSED = "select_closed"
SELECT_OPENED_BEST = "select_opened_best"
STOP = "stop"

Action = tuple  # (kind, index or None)


@dataclass(frozen=True)
class Cap:
    """Reservation value: the cap solving E[(X - cap)+] = inspection cost.

    When the cost exceeds E[X] no nonnegative cap exists; the cap is clamped
    to 0 and flagged, since such a box is never worth opening but may still be
    selected closed. A zero cost saturates the cap at the top of the support.
    """

    sigma: Number
    alternative_index: int = 0
    never_worthwhile: bool = False


def expected_shortfall(dist: DiscreteDistribution, threshold: Number) -> Number:
    """E[(X - t)+], the decreasing piecewise-linear function inverted by caps."""
    return sum((v - threshold) * p for v, p in dist.atoms if v > threshold)


def reservation_cap(alt: Alternative, index: int = 0) -> Cap:
    """Solve E[(X - cap)+] = c exactly by piecewise-linear inversion."""
    dist, cost = alt.dist, alt.inspect_cost
    mode_zero = Fraction(0) if dist.mode == "exact" else 0.0
    if cost == 0:
        return Cap(dist.max_value(), index)
    mean = dist.mean()
    if cost > mean:
        return Cap(mode_zero, index, never_worthwhile=True)
    # Walk segments from the top of the support down; on the segment below
    # value v_k the shortfall is tail_sum - tail_prob * s.
    atoms = dist.atoms
    tail_prob = mode_zero
    tail_sum = mode_zero
    for k in range(len(atoms) - 1, -1, -1):
        v_k, p_k = atoms[k]
        tail_prob = tail_prob + p_k
        tail_sum = tail_sum + v_k * p_k
        lower = atoms[k - 1][0] if k > 0 else mode_zero
        candidate = (tail_sum - cost) / tail_prob
        if candidate >= lower:
            return Cap(candidate, index)
    return Cap(mode_zero, index)  # cost == mean lands here in float mode


def _cap_residual(alt: Alternative, cap: Cap) -> Number:
    return expected_shortfall(alt.dist, cap.sigma) - alt.inspect_cost


def _check_cap(alt: Alternative, cap: Cap) -> None:
    if cap.never_worthwhile:
        if alt.inspect_cost <= alt.dist.mean():
            raise CapMismatch("cap flagged never-worthwhile but cost <= E[X]")
        return
    residual = _cap_residual(alt, cap)
    tol = 0 if alt.dist.mode == "exact" else FLOAT_TOL
    # A zero-cost cap sits anywhere at or above the top of the support.
    if alt.inspect_cost == 0 and cap.sigma >= alt.dist.max_value():
        return
    if abs(residual) > tol:
        raise CapMismatch(
            f"cap {format_number(cap.sigma)} does not solve the cap equation "
            f"(residual {residual})"
        )


def capped_value_distribution(alt: Alternative, cap: Cap) -> DiscreteDistribution:
    """Distribution of min(X, cap) for a cap belonging to this alternative."""
    _check_cap(alt, cap)
    sigma = cap.sigma
    return alt.dist.transform(lambda v: min(v, sigma))


def instance_caps(instance: Instance) -> list[Cap]:
    return [
        reservation_cap(alt, i) for i, alt in enumerate(instance.alternatives)
    ]


def _require_additive(instance: Instance, what: str) -> None:
    if instance.cost_model.kind != "additive":
        raise InvalidParameters(f"{what} requires an additive cost model")


def weitzman_value(instance: Instance, limit: Optional[int] = None) -> Number:
    """Exact expected payoff of the descending-cap policy (obligatory inspection).

    Computed two independent ways that must agree: simulating the policy over
    the product support, and E[max_i min(X_i, cap_i)] from the capped-value
    distributions. A disagreement is an internal error.
    """
    _require_additive(instance, "weitzman_value")
    caps = instance_caps(instance)
    capped = [
        capped_value_distribution(alt, cap)
        for alt, cap in zip(instance.alternatives, caps)
    ]
    by_capped = expected_max_of_dists(capped)

    order = sorted(range(instance.n), key=lambda i: (-caps[i].sigma, i))
    costs = [alt.inspect_cost for alt in instance.alternatives]
    z = instance.zero()
    by_simulation = z
    for values, p in iter_realizations(instance, limit):
        best = z  # stopping with nothing in hand is worth 0
        paid = z
        for i in order:
            if best >= caps[i].sigma:
                break
            paid = paid + costs[i]
            if values[i] > best:
                best = values[i]
        by_simulation = by_simulation + p * (best - paid)

    tol = 0 if instance.mode == "exact" else FLOAT_TOL
    if abs(by_simulation - by_capped) > tol:
        raise DelegateboxError(
            f"descending-cap simulation {by_simulation} disagrees with "
            f"capped-value expectation {by_capped}"
        )
    return by_capped


@dataclass(frozen=True, eq=False)
class PnoiPolicy:
    """Decision table over states (unopened set, best observed value or None).

    Each inspect action shrinks the unopened set, so every policy terminates.
    """

    table: dict

    def action(self, unopened: frozenset, best) -> Action:
        try:
            return self.table[(unopened, best)]
        except KeyError:
            raise PolicyIncomplete(
                f"no action for state (unopened={sorted(unopened)}, best={best})"
            ) from None


def run_policy(policy: PnoiPolicy, realization) -> Outcome:
    """Execute a policy on one realization of all box values."""
    n = len(realization)
    unopened = frozenset(range(n))
    best = None
    best_index: Optional[int] = None
    inspected: set[int] = set()
    while True:
        kind, index = policy.action(unopened, best)
        if kind == STOP:
            return Outcome(None, frozenset(inspected))
        if kind == SELECT_OPENED_BEST:
            if best_index is None:
                raise PolicyIncomplete("select_opened_best before any inspection")
            return Outcome(best_index, frozenset(inspected))
        if kind == SELECT_CLOSED:
            if index in inspected:
                raise PolicyIncomplete(f"select_closed on opened box {index}")
            return Outcome(index, frozenset(inspected))
        if kind == INSPECT:
            if index not in unopened:
                raise PolicyIncomplete(f"inspect on opened box {index}")
            inspected.add(index)
            unopened = unopened - {index}
            value = realization[index]
            if best is None or value > best:
                best = value
                best_index = index
        else:
            raise PolicyIncomplete(f"unknown action kind {kind!r}")


def evaluate_policy(
    instance: Instance, policy: PnoiPolicy, limit: Optional[int] = None
) -> Number:
    """Exact expected payoff of running a policy directly (no delegation)."""
    total = instance.zero()
    for values, p in iter_realizations(instance, limit):
        outcome = run_policy(policy, values)
        gain = values[outcome.selected] if outcome.selected is not None else instance.zero()
        total = total + p * (gain - instance.inspection_cost(outcome.inspected))
    return total


# Tie-break ranks: among equal-value actions prefer stopping over selecting
# the opened best, over selecting a closed box (lowest index), over
# inspecting (lowest index). Keeps returned policies deterministic.
_RANK = {STOP: 0, SELECT_OPENED_BEST: 1, SELECT_CLOSED: 2, INSPECT: 3}


def pnoi_optimal(
    instance: Instance, state_limit: int = DEFAULT_STATE_LIMIT
) -> tuple[Number, PnoiPolicy]:
    """Exact optimal adaptive value when selecting a closed box is allowed.

    Dynamic program over (unopened set, best observed value): independence
    across boxes means the continuation problem depends on the history only
    through these two, which the test suite checks against a full-history
    oracle.
    """
    _require_additive(instance, "pnoi_optimal")
    n = instance.n
    dists = [alt.dist for alt in instance.alternatives]
    costs = [alt.inspect_cost for alt in instance.alternatives]
    means = [d.mean() for d in dists]
    distinct_values = {v for d in dists for v in d.values}
    states = (2**n) * (len(distinct_values) + 1)
    if states > state_limit:
        raise StateLimitExceeded(f"{states} states exceed the limit {state_limit}")

    z = instance.zero()
    memo: dict = {}
    chosen: dict = {}

    def value(unopened: frozenset, best) -> Number:
        key = (unopened, best)
        if key in memo:
            return memo[key]
        candidates: list[tuple[Number, int, int, Action]] = [(z, 0, -1, (STOP, None))]
        if best is not None:
            candidates.append((best, 1, -1, (SELECT_OPENED_BEST, None)))
        for j in sorted(unopened):
            candidates.append((means[j], 2, j, (SELECT_CLOSED, j)))
        for j in sorted(unopened):
            rest = unopened - {j}
            cont = -costs[j]
            for v, p in dists[j].atoms:
                nxt = v if best is None or v > best else best
                cont = cont + p * value(rest, nxt)
            candidates.append((cont, 3, j, (INSPECT, j)))
        top = max(c[0] for c in candidates)
        val, _, _, action = min(
            (c for c in candidates if c[0] == top), key=lambda c: (c[1], c[2])
        )
        memo[key] = val
        chosen[key] = action
        return val

    root = value(frozenset(range(n)), None)
    return root, PnoiPolicy(dict(chosen))


def pnoi_value_upper_bound(instance: Instance) -> Number:
    """E[max_i min(X_i, cap_i)] + max_i E[X_i].

    Sound upper bound on the optimal adaptive value: inspected boxes
    contribute at most their capped value, and the gain from a box selected
    closed is at most the best mean.
    """
    _require_additive(instance, "pnoi_value_upper_bound")
    capped = [
        capped_value_distribution(alt, cap)
        for alt, cap in zip(instance.alternatives, instance_caps(instance))
    ]
    return expected_max_of_dists(capped) + max(instance.expected_values())


# --- policy serialization ---------------------------------------------------


def _best_sort_key(best):
    return (0, 0) if best is None else (1, best)


def policy_to_rows(policy: PnoiPolicy) -> list[dict]:
    """Serialize a policy as (state, action) rows for audit logs."""
    rows = []
    for (unopened, best), (kind, index) in sorted(
        policy.table.items(),
        key=lambda kv: (len(kv[0][0]), sorted(kv[0][0]), _best_sort_key(kv[0][1])),
    ):
        state = {
            "unopened": sorted(unopened),
            "best": "none" if best is None else _num_str(best),
        }
        action = {"kind": kind}
        if index is not None:
            action["index"] = index
        rows.append({"state": state, "action": action})
    return rows


def _num_str(x: Number):
    return format_number(x) if isinstance(x, Fraction) else float(x)


def policy_from_rows(rows: list[dict], mode: str = "exact") -> PnoiPolicy:
    from .core import as_number

    table = {}
    for row in rows:
        state = row["state"]
        best = state["best"]
        best_val = None if best == "none" else as_number(best, mode)
        action = row["action"]
        table[(frozenset(state["unopened"]), best_val)] = (
            action["kind"],
            action.get("index"),
        )
    return PnoiPolicy(table)
