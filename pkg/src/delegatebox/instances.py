"""Generators: the named counterexample families and seeded random instances.

Random supports live on a coarse rational grid so exact arithmetic stays
cheap across thousands of generated instances.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .core import (
    Alternative,
    Instance,
    InvalidParameters,
    Number,
    ShapeMismatch,
    as_number,
    make_distribution,
)
from .delegation import SignalingMechanism
from .pandora import INSPECT, PnoiPolicy, SELECT_CLOSED, SELECT_OPENED_BEST, STOP

FAMILIES = (
    "identical_binary",
    "tightness",
    "inapprox_first_best",
    "info_value",
    "spmi_fail",
    "random",
)


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameters(f"unknown family: {self.family!r}")


@dataclass(frozen=True)
class Generated:
    instance: Instance
    spec: GeneratorSpec
    mechanism: Optional[SignalingMechanism] = None


def _frac(x) -> Fraction:
    return as_number(x, "exact")


def identical_binary(n: int, p, v=1, c=0, delegation_cost=0) -> Instance:
    """n copies of {v w.p. p, 0 otherwise}, each costing c to inspect."""
    n = int(n)
    p, v, c = _frac(p), _frac(v), _frac(c)
    if n < 1 or not 0 < p <= 1 or v <= 0:
        raise InvalidParameters("need n >= 1, 0 < p <= 1, v > 0")
    if p == 1:
        dist = make_distribution([(v, 1)])
    else:
        dist = make_distribution([(0, 1 - p), (v, p)])
    alts = tuple(Alternative(dist, c) for _ in range(n))
    return Instance(alts, delegation_cost=_frac(delegation_cost))


def tightness(eps) -> Instance:
    """Two free boxes worth 1/eps w.p. eps each, plus a sure 1 that costs 1 to open.

    The optimal search opens the free boxes and settles for the sure box
    (unopened) otherwise, worth 3 - 3 eps + eps^2, while the composed
    costless mechanism only extracts 1: the family pins the factor 3.
    """
    eps = _frac(eps)
    if not 0 < eps < 1:
        raise InvalidParameters("need 0 < eps < 1")
    rare = make_distribution([(0, 1 - eps), (1 / eps, eps)])
    sure = make_distribution([(1, 1)])
    alts = (
        Alternative(rare, 0),
        Alternative(rare, 0),
        Alternative(sure, 1),
    )
    return Instance(alts)


def inapprox_first_best(n: int) -> Instance:
    """n rare prizes worth n each, with inspections priced at n - 1.

    Inspection costs sit at (1 - 1/n) times the top support value, so any
    policy that ever opens a box nets at most the hindsight maximum times
    1/n; selecting blind nets at most 1. The hindsight optimum still grows
    like (1 - 1/e) n, so no implemented mechanism comes close to it.
    """
    n = int(n)
    if n < 2:
        raise InvalidParameters("need n >= 2")
    eps = Fraction(1, n)
    dist = make_distribution([(0, 1 - eps), (n, eps)])
    cost = (1 - eps) * n  # == n - 1
    alts = tuple(Alternative(dist, cost) for _ in range(n))
    return Instance(alts)


def _info_policy(n: int, keep: int, support) -> PnoiPolicy:
    # Opens every box except `keep` in ascending order; selects `keep` closed
    # iff everything observed was 0, otherwise walks away.
    table: dict = {}

    def fill(unopened: frozenset, best) -> None:
        others = sorted(unopened - {keep})
        if others:
            j = others[0]
            table[(unopened, best)] = (INSPECT, j)
            seen = set()
            for v in support:
                nxt = v if best is None or v > best else best
                if nxt in seen:
                    continue
                seen.add(nxt)
                fill(unopened - {j}, nxt)
        elif best == 0:
            table[(unopened, best)] = (SELECT_CLOSED, keep)
        else:
            table[(unopened, best)] = (STOP, None)

    fill(frozenset(range(n)), None)
    return PnoiPolicy(table)


def info_value(n: int, eps) -> tuple[Instance, SignalingMechanism]:
    """n free boxes worth 1 w.p. eps, plus the steering mechanism over n signals.

    Signal i opens every box but i and selects i closed iff the others all
    came up 0, so a best-responding agent routes the principal to the unique
    nonzero box without it ever being opened.
    """
    n = int(n)
    eps = _frac(eps)
    if n < 2 or not 0 < eps < 1:
        raise InvalidParameters("need n >= 2 and 0 < eps < 1")
    dist = make_distribution([(0, 1 - eps), (1, eps)])
    alts = tuple(Alternative(dist, 0) for _ in range(n))
    instance = Instance(alts)
    support = dist.values
    signals = tuple(range(n))
    policies = {i: _info_policy(n, i, support) for i in signals}
    return instance, SignalingMechanism(signals, policies)


def spmi_fail(n: int = 2) -> Instance:
    """Boxes worth 1 w.p. 1/2 whose inspection costs eat the whole value."""
    n = int(n)
    if n < 1:
        raise InvalidParameters("need n >= 1")
    dist = make_distribution([(0, Fraction(1, 2)), (1, Fraction(1, 2))])
    alts = tuple(Alternative(dist, 1) for _ in range(n))
    return Instance(alts)


def random_instance(
    rng: random.Random,
    n: int,
    support_size: int = 3,
    value_max: int = 8,
    cost_max: int = 2,
    cdel_max: int = 0,
) -> Instance:
    """Seeded random instance on a coarse grid (values k/2, costs k/4, probs k/16)."""
    if n < 1 or support_size < 1:
        raise InvalidParameters("need n >= 1 and support_size >= 1")
    alternatives = []
    for _ in range(n):
        size = rng.randint(1, support_size)
        grid = [Fraction(k, 2) for k in range(2 * value_max + 1)]
        values = rng.sample(grid, size)
        weights = _random_composition(rng, size, 16)
        atoms = [(v, Fraction(w, 16)) for v, w in zip(values, weights)]
        cost = Fraction(rng.randint(0, 4 * cost_max), 4)
        alternatives.append(Alternative(make_distribution(atoms), cost))
    cdel = Fraction(rng.randint(0, 4 * cdel_max), 4) if cdel_max else Fraction(0)
    return Instance(tuple(alternatives), delegation_cost=cdel)


def _random_composition(rng: random.Random, parts: int, total: int) -> list[int]:
    # positive integers summing to `total`
    cuts = sorted(rng.sample(range(1, total), parts - 1)) if parts > 1 else []
    bounds = [0] + cuts + [total]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def random_corpus(
    seed: int,
    count: int,
    max_n: int = 4,
    support_size: int = 3,
    value_max: int = 8,
    cost_max: int = 2,
    cdel_max: int = 0,
) -> Iterator[Instance]:
    """Deterministic stream of random instances for property suites."""
    rng = random.Random(seed)
    for _ in range(count):
        yield random_instance(
            rng, rng.randint(1, max_n), support_size, value_max, cost_max, cdel_max
        )


def random_signaling_mechanism(
    rng: random.Random, instance: Instance, max_signals: int = 3
) -> SignalingMechanism:
    """Random terminating decision tables over 1..max_signals signals."""
    n = instance.n
    supports = [alt.dist.values for alt in instance.alternatives]

    def fill(table: dict, unopened: frozenset, best) -> None:
        state = (unopened, best)
        if state in table:
            return
        actions = [(STOP, None)]
        if best is not None:
            actions.append((SELECT_OPENED_BEST, None))
        actions.extend((SELECT_CLOSED, j) for j in sorted(unopened))
        actions.extend((INSPECT, j) for j in sorted(unopened))
        kind, j = rng.choice(actions)
        table[state] = (kind, j)
        if kind == INSPECT:
            seen = set()
            for v in supports[j]:
                nxt = v if best is None or v > best else best
                if nxt not in seen:
                    seen.add(nxt)
                    fill(table, unopened - {j}, nxt)

    count = rng.randint(1, max_signals)
    signals = tuple(range(count))
    policies = {}
    for sig in signals:
        table: dict = {}
        fill(table, frozenset(range(n)), None)
        policies[sig] = PnoiPolicy(table)
    return SignalingMechanism(signals, policies)


def inspection_only_best(instance: Instance) -> Number:
    """Best direct policy on an identical-binary instance, by sweeping k.

    Symmetry collapses every adaptive direct policy to: open up to k boxes,
    take the first hit, and settle for a closed box (worth p*v) if k < n hits
    nothing. Returns the best value over k in 0..n.
    """
    p, v, c, n = _identical_binary_shape(instance)
    best = p * v  # k = 0: select a closed box outright
    miss = 1 - p
    for k in range(1, n + 1):
        val = instance.zero()
        for i in range(1, k + 1):
            val = val + p * miss ** (i - 1) * (v - i * c)
        tail = p * v if k < n else instance.zero()
        val = val + miss**k * (tail - k * c)
        if val > best:
            best = val
    return best


def _identical_binary_shape(instance: Instance):
    if instance.cost_model.kind != "additive":
        raise ShapeMismatch("identical-binary instances use additive costs")
    first = instance.alternatives[0]
    for alt in instance.alternatives:
        if alt.dist != first.dist or alt.inspect_cost != first.inspect_cost:
            raise ShapeMismatch("alternatives are not identical")
    atoms = first.dist.atoms
    if len(atoms) == 1:
        v, p = atoms[0][0], atoms[0][1]
        if v <= 0:
            raise ShapeMismatch("need one positive value")
    elif len(atoms) == 2 and atoms[0][0] == 0:
        v, p = atoms[1]
    else:
        raise ShapeMismatch("support must be {0, v} or {v}")
    return p, v, first.inspect_cost, instance.n


def gen(spec: GeneratorSpec) -> Generated:
    """Materialize a generator spec; info_value also returns its mechanism."""
    params = dict(spec.params)
    family = spec.family
    try:
        if family == "identical_binary":
            return Generated(identical_binary(**params), spec)
        if family == "tightness":
            return Generated(tightness(**params), spec)
        if family == "inapprox_first_best":
            return Generated(inapprox_first_best(**params), spec)
        if family == "info_value":
            instance, mech = info_value(**params)
            return Generated(instance, spec, mech)
        if family == "spmi_fail":
            return Generated(spmi_fail(**params), spec)
        if family == "random":
            seed = params.pop("seed")
            rng = random.Random(seed)
            return Generated(random_instance(rng, **params), spec)
    except TypeError as exc:
        raise InvalidParameters(f"bad parameters for {family}: {exc}") from exc
    raise InvalidParameters(f"unknown family: {family!r}")
