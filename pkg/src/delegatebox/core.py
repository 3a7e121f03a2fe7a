"""Discrete distributions, problem instances, and the exact expectation engine.

Everything runs in one of two arithmetic modes: ``exact`` (fractions.Fraction
end to end, so equality checks are true equalities) or ``float`` (IEEE doubles
with a 1e-9 comparison tolerance). Containers are immutable after construction
and safe to share across threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from itertools import product
from math import isfinite, prod
from typing import Callable, Iterator, Literal, Optional, Sequence, Union

Number = Union[Fraction, float]
Mode = Literal["exact", "float"]

FLOAT_TOL = 1e-9
FLOAT_PROB_TOL = 1e-12
DEFAULT_ENUMERATION_LIMIT = 10**7
DEFAULT_STATE_LIMIT = 10**6

SCHEMA_VERSION = "delegatebox/1"


class DelegateboxError(Exception):
    """Base class for all library errors."""


class NegativeValue(DelegateboxError):
    pass


class ProbabilitySumMismatch(DelegateboxError):
    pass


class EmptySupport(DelegateboxError):
    pass


class EnumerationLimitExceeded(DelegateboxError):
    pass


class StateLimitExceeded(DelegateboxError):
    pass


class CapMismatch(DelegateboxError):
    pass


class PolicyIncomplete(DelegateboxError):
    pass


class NotCostless(DelegateboxError):
    pass


class CostsNotIdentical(DelegateboxError):
    pass


class RegimeMismatch(DelegateboxError):
    pass


class ShapeMismatch(DelegateboxError):
    pass


class InvalidParameters(DelegateboxError):
    pass


def as_number(value, mode: Mode = "exact") -> Number:
    """Convert ``value`` to the requested arithmetic mode.

    In exact mode, floats are read through their shortest decimal
    representation (0.1 becomes 1/10, not the 53-bit binary fraction), and
    strings may be decimals ("0.25") or fractions ("1/3").
    """
    if mode == "exact":
        if isinstance(value, Fraction):
            return value
        if isinstance(value, bool):
            raise InvalidParameters(f"not a number: {value!r}")
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            try:
                return Fraction(value)
            except (ValueError, ZeroDivisionError) as exc:
                raise InvalidParameters(f"cannot parse number: {value!r}") from exc
        if isinstance(value, float):
            if not isfinite(value):
                raise InvalidParameters(f"non-finite value: {value!r}")
            return Fraction(Decimal(repr(value)))
        raise InvalidParameters(f"unsupported number type: {type(value).__name__}")
    if mode == "float":
        if isinstance(value, str):
            value = Fraction(value)
        out = float(value)
        if not isfinite(out):
            raise InvalidParameters(f"non-finite value: {value!r}")
        return out
    raise InvalidParameters(f"unknown arithmetic mode: {mode!r}")


def zero(mode: Mode) -> Number:
    return Fraction(0) if mode == "exact" else 0.0


def format_number(x: Number) -> str:
    """Render a number as a string that round-trips exactly.

    Exact values print as decimal strings when the denominator allows it
    ("0.75") and as "p/q" otherwise; floats print via repr.
    """
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    if isinstance(x, Fraction):
        num, den = x.numerator, x.denominator
        if den == 1:
            return str(num)
        twos = fives = 0
        d = den
        while d % 2 == 0:
            d //= 2
            twos += 1
        while d % 5 == 0:
            d //= 5
            fives += 1
        if d == 1:
            k = max(twos, fives)
            scaled = num * 10**k // den
            sign = "-" if scaled < 0 else ""
            digits = str(abs(scaled)).rjust(k + 1, "0")
            return f"{sign}{digits[:-k]}.{digits[-k:]}"
        return f"{num}/{den}"
    return repr(float(x))


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite support of nonnegative values; atoms sorted by increasing value."""

    atoms: tuple[tuple[Number, Number], ...]

    @property
    def values(self) -> tuple[Number, ...]:
        return tuple(v for v, _ in self.atoms)

    @property
    def probs(self) -> tuple[Number, ...]:
        return tuple(p for _, p in self.atoms)

    @property
    def mode(self) -> Mode:
        return "exact" if isinstance(self.atoms[0][0], Fraction) else "float"

    def mean(self) -> Number:
        return sum(v * p for v, p in self.atoms)

    def max_value(self) -> Number:
        return self.atoms[-1][0]

    def min_value(self) -> Number:
        return self.atoms[0][0]

    def cdf(self, t: Number) -> Number:
        """P(X <= t)."""
        return sum(p for v, p in self.atoms if v <= t)

    def prob_at_least(self, t: Number) -> Number:
        return sum(p for v, p in self.atoms if v >= t)

    def transform(self, fn: Callable[[Number], Number]) -> "DiscreteDistribution":
        """Distribution of fn(X); transformed values are merged and re-sorted."""
        return DiscreteDistribution(_merge_atoms((fn(v), p) for v, p in self.atoms))

    def to_float(self) -> "DiscreteDistribution":
        return DiscreteDistribution(
            tuple((float(v), float(p)) for v, p in self.atoms)
        )


def _merge_atoms(pairs) -> tuple[tuple[Number, Number], ...]:
    acc: dict = {}
    for v, p in pairs:
        acc[v] = acc.get(v, 0) + p
    return tuple(sorted((v, p) for v, p in acc.items() if p != 0))


def make_distribution(pairs: Sequence[tuple], mode: Mode = "exact") -> DiscreteDistribution:
    """Build a validated distribution from (value, prob) pairs.

    Duplicate values are merged, zero-probability atoms dropped, and the
    result is sorted by value. Probabilities must sum to exactly 1 in exact
    mode, or to within 1e-12 in float mode (then renormalized).
    """
    if not pairs:
        raise EmptySupport("distribution needs at least one atom")
    converted = []
    for v, p in pairs:
        v = as_number(v, mode)
        p = as_number(p, mode)
        if v < 0:
            raise NegativeValue(f"negative support value: {v}")
        if p < 0:
            raise ProbabilitySumMismatch(f"negative probability: {p}")
        converted.append((v, p))
    atoms = _merge_atoms(converted)
    if not atoms:
        raise EmptySupport("all atoms had zero probability")
    total = sum(p for _, p in atoms)
    if mode == "exact":
        if total != 1:
            raise ProbabilitySumMismatch(f"probabilities sum to {total}, not 1")
    else:
        if abs(total - 1.0) > FLOAT_PROB_TOL:
            raise ProbabilitySumMismatch(f"probabilities sum to {total!r}")
        atoms = tuple((v, p / total) for v, p in atoms)
    return DiscreteDistribution(atoms)


def expected_value(dist: DiscreteDistribution) -> Number:
    """E[X] for a validated distribution."""
    return dist.mean()


@dataclass(frozen=True)
class Alternative:
    """One box: the principal's utility distribution plus its inspection cost."""

    dist: DiscreteDistribution
    inspect_cost: Number = 0

    def __post_init__(self):
        object.__setattr__(self, "inspect_cost", as_number(self.inspect_cost, self.dist.mode))
        if self.inspect_cost < 0:
            raise NegativeValue(f"negative inspection cost: {self.inspect_cost}")


@dataclass(frozen=True)
class CostModel:
    """Additive per-alternative costs, or a monotone set function over subsets."""

    kind: Literal["additive", "monotone"]
    table: Optional[dict] = None

    @staticmethod
    def additive() -> "CostModel":
        return CostModel("additive")

    @staticmethod
    def monotone(table: dict) -> "CostModel":
        return CostModel("monotone", {frozenset(k): v for k, v in table.items()})


@dataclass(frozen=True)
class Instance:
    """The alternatives, a cost model, and the delegation cost."""

    alternatives: tuple[Alternative, ...]
    cost_model: CostModel = CostModel("additive")
    delegation_cost: Number = 0

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        if not self.alternatives:
            raise InvalidParameters("instance needs at least one alternative")
        mode = self.alternatives[0].dist.mode
        for alt in self.alternatives:
            if alt.dist.mode != mode:
                raise InvalidParameters("mixed arithmetic modes in one instance")
        object.__setattr__(self, "delegation_cost", as_number(self.delegation_cost, mode))
        if self.delegation_cost < 0:
            raise NegativeValue(f"negative delegation cost: {self.delegation_cost}")
        if self.cost_model.kind == "monotone":
            self._check_monotone_table(mode)

    def _check_monotone_table(self, mode: Mode) -> None:
        n = len(self.alternatives)
        table = self.cost_model.table or {}
        norm = {frozenset(k): as_number(v, mode) for k, v in table.items()}
        # CostModel.monotone owns its dict, so normalize numbers in place.
        table.clear()
        table.update(norm)
        if len(table) != 2**n:
            raise InvalidParameters("monotone cost table must cover all subsets")
        if table.get(frozenset(), None) != 0:
            raise InvalidParameters("monotone cost table needs c(empty)=0")
        for subset, cost in table.items():
            if cost < 0:
                raise NegativeValue("negative set cost")
            for i in range(n):
                if i not in subset:
                    bigger = subset | {i}
                    if bigger not in table:
                        raise InvalidParameters("monotone cost table must cover all subsets")
                    if table[bigger] < cost:
                        raise InvalidParameters("cost table is not monotone")

    @property
    def n(self) -> int:
        return len(self.alternatives)

    @property
    def mode(self) -> Mode:
        return self.alternatives[0].dist.mode

    def zero(self) -> Number:
        return zero(self.mode)

    def singleton_cost(self, i: int) -> Number:
        """Cost of inspecting alternative i on its own."""
        if self.cost_model.kind == "additive":
            return self.alternatives[i].inspect_cost
        return self.cost_model.table[frozenset([i])]

    def singleton_costs(self) -> tuple[Number, ...]:
        return tuple(self.singleton_cost(i) for i in range(self.n))

    def inspection_cost(self, inspected) -> Number:
        subset = frozenset(inspected)
        if self.cost_model.kind == "additive":
            return sum(
                (self.alternatives[i].inspect_cost for i in subset), start=self.zero()
            )
        return self.cost_model.table[subset]

    def expected_values(self) -> tuple[Number, ...]:
        return tuple(alt.dist.mean() for alt in self.alternatives)

    def support_product_size(self) -> int:
        return prod(len(alt.dist.atoms) for alt in self.alternatives)

    def to_float(self) -> "Instance":
        alts = tuple(
            Alternative(alt.dist.to_float(), float(alt.inspect_cost))
            for alt in self.alternatives
        )
        if self.cost_model.kind == "monotone":
            cm = CostModel.monotone(
                {k: float(v) for k, v in self.cost_model.table.items()}
            )
        else:
            cm = CostModel.additive()
        return Instance(alts, cm, float(self.delegation_cost))


Realization = tuple  # one utility per alternative, drawn from its support


@dataclass(frozen=True)
class Outcome:
    """Result of running a search: selection (if any), inspected set, delegation flag."""

    selected: Optional[int]
    inspected: frozenset
    delegated: bool = False


def iter_realizations(
    instance: Instance, limit: Optional[int] = None
) -> Iterator[tuple[Realization, Number]]:
    """Yield every point of the product support with its probability.

    Raises EnumerationLimitExceeded if the product support is larger than
    ``limit`` (default 10^7).
    """
    cap = DEFAULT_ENUMERATION_LIMIT if limit is None else limit
    size = instance.support_product_size()
    if size > cap:
        raise EnumerationLimitExceeded(
            f"product support has {size} points, limit is {cap}"
        )
    atom_lists = [alt.dist.atoms for alt in instance.alternatives]
    for combo in product(*atom_lists):
        values = tuple(v for v, _ in combo)
        p = prod((p for _, p in combo), start=1)
        yield values, p


def expected_max_of_dists(dists: Sequence[DiscreteDistribution]) -> Number:
    """Exact E[max_i X_i] for independent distributions.

    Computed from the product of the marginal CDFs over the union of the
    supports, so the cost is linear in the total support size rather than in
    the product space.
    """
    if not dists:
        raise EmptySupport("need at least one distribution")
    union = sorted({v for d in dists for v in d.values})
    total = 0
    f_prev = 0
    for t in union:
        f_t = prod((d.cdf(t) for d in dists), start=1)
        total += t * (f_t - f_prev)
        f_prev = f_t
    return total


IDENTITY = "identity"
SHIFTED_POSITIVE = "shifted_positive"


def _transform_fn(instance: Instance, transform) -> Callable[[int, Number], Number]:
    if transform == IDENTITY or transform is None:
        return lambda i, v: v
    if transform == SHIFTED_POSITIVE:
        costs = instance.singleton_costs()
        z = instance.zero()
        return lambda i, v: max(v - costs[i], z)
    if callable(transform):
        return transform
    raise InvalidParameters(f"unknown transform: {transform!r}")


def expected_of_max(instance: Instance, transform=IDENTITY) -> Number:
    """Exact E[max_i f_i(X_i)] over independent alternatives.

    ``transform`` is "identity", "shifted_positive" (each value maps to
    (x - c_i)+), or a callable (index, value) -> value.
    """
    fn = _transform_fn(instance, transform)
    dists = [
        alt.dist.transform(lambda v, i=i: fn(i, v))
        for i, alt in enumerate(instance.alternatives)
    ]
    return expected_max_of_dists(dists)


def surplus_dists(instance: Instance) -> list[DiscreteDistribution]:
    """Per-alternative distributions of (X_i - c_i)+."""
    fn = _transform_fn(instance, SHIFTED_POSITIVE)
    return [
        alt.dist.transform(lambda v, i=i: fn(i, v))
        for i, alt in enumerate(instance.alternatives)
    ]


# --- JSON instance schema -------------------------------------------------
#
# {"alternatives": [{"support": [[v, p], ...], "cost": c}, ...],
#  "cost_model": {"type": "additive"} | {"type": "monotone", "table": {...}},
#  "delegation_cost": c}
#
# Exact mode renders every number as a string ("0.25" or "1/3") so nothing is
# lost to binary floats; float mode uses plain JSON numbers.


def _num_to_json(x: Number):
    return format_number(x) if isinstance(x, Fraction) else float(x)


def _subset_key(subset: frozenset) -> str:
    return ",".join(str(i) for i in sorted(subset))


def _subset_from_key(key: str) -> frozenset:
    if key == "":
        return frozenset()
    return frozenset(int(part) for part in key.split(","))


def instance_to_obj(instance: Instance) -> dict:
    alts = [
        {
            "support": [[_num_to_json(v), _num_to_json(p)] for v, p in alt.dist.atoms],
            "cost": _num_to_json(alt.inspect_cost),
        }
        for alt in instance.alternatives
    ]
    if instance.cost_model.kind == "monotone":
        cm = {
            "type": "monotone",
            "table": {
                _subset_key(s): _num_to_json(c)
                for s, c in sorted(
                    instance.cost_model.table.items(), key=lambda kv: _subset_key(kv[0])
                )
            },
        }
    else:
        cm = {"type": "additive"}
    return {
        "alternatives": alts,
        "cost_model": cm,
        "delegation_cost": _num_to_json(instance.delegation_cost),
    }


def instance_to_json(instance: Instance, indent: Optional[int] = None) -> str:
    return json.dumps(instance_to_obj(instance), sort_keys=True, indent=indent)


def instance_from_obj(obj: dict, mode: Mode = "exact") -> Instance:
    try:
        alts = tuple(
            Alternative(
                make_distribution([(v, p) for v, p in alt["support"]], mode),
                as_number(alt.get("cost", 0), mode),
            )
            for alt in obj["alternatives"]
        )
        cm_obj = obj.get("cost_model", {"type": "additive"})
        if cm_obj.get("type") == "monotone":
            cm = CostModel.monotone(
                {
                    _subset_from_key(k): as_number(v, mode)
                    for k, v in cm_obj["table"].items()
                }
            )
        else:
            cm = CostModel.additive()
        return Instance(alts, cm, as_number(obj.get("delegation_cost", 0), mode))
    except (KeyError, TypeError) as exc:
        raise InvalidParameters(f"malformed instance object: {exc}") from exc


def instance_from_json(text: str, mode: Mode = "exact") -> Instance:
    return instance_from_obj(json.loads(text), mode)


def instance_digest(instance: Instance) -> str:
    """Short stable identifier for an instance (hash of its canonical JSON)."""
    canonical = instance_to_json(instance)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]
