"""Domain model for restricted items selection with interval costs.

An instance consists of m item sets. Exactly ``quota`` items must be picked
from each set, certain cross-item pairs are forbidden, and every item cost is
only known to lie in an integer interval. All types here are immutable values
and all operations are pure functions, so they can be shared freely between
concurrent solver runs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, NamedTuple, Optional, Sequence

# Solver status labels shared across modules.
OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration_limit"
TIME_LIMIT = "time_limit"


class InfeasibleError(Exception):
    """Raised by operations that cannot proceed without a feasible selection."""


class ItemRef(NamedTuple):
    """Position of an item, 0-based: (set index, item index)."""

    set_index: int
    item_index: int


class CostInterval(NamedTuple):
    """Closed integer cost interval [lo, hi]."""

    lo: int
    hi: int


class ForbiddenPair(NamedTuple):
    """Two items that cannot be selected together. Stored with a < b."""

    a: ItemRef
    b: ItemRef

    @staticmethod
    def of(a: ItemRef, b: ItemRef) -> "ForbiddenPair":
        if b < a:
            a, b = b, a
        return ForbiddenPair(a, b)


@dataclass(frozen=True)
class ItemSet:
    quota: int
    items: tuple[CostInterval, ...]

    @property
    def size(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class Instance:
    """An items-selection instance: sets with quotas plus forbidden pairs."""

    sets: tuple[ItemSet, ...]
    forbidden: tuple[ForbiddenPair, ...]

    @property
    def m(self) -> int:
        return len(self.sets)

    @property
    def total_items(self) -> int:
        return sum(s.size for s in self.sets)

    def interval(self, ref: ItemRef) -> CostInterval:
        return self.sets[ref.set_index].items[ref.item_index]

    def item_refs(self) -> Iterator[ItemRef]:
        for i, s in enumerate(self.sets):
            for j in range(s.size):
                yield ItemRef(i, j)


def make_instance(
    set_specs: Iterable[tuple[int, Sequence[tuple[int, int]]]],
    pairs: Iterable[Sequence[int]] = (),
) -> Instance:
    """Build an Instance from plain data, canonicalizing the forbidden pairs.

    ``set_specs`` is an iterable of (quota, [(lo, hi), ...]); ``pairs`` holds
    quadruples (i, k, j, l) or pairs of (set, item) tuples. Symmetric
    duplicates are merged and pairs are stored sorted.
    """
    sets = tuple(
        ItemSet(quota, tuple(CostInterval(int(lo), int(hi)) for lo, hi in items))
        for quota, items in set_specs
    )
    canon = set()
    for p in pairs:
        if len(p) == 4:
            a = ItemRef(int(p[0]), int(p[1]))
            b = ItemRef(int(p[2]), int(p[3]))
        else:
            a = ItemRef(*p[0])
            b = ItemRef(*p[1])
        canon.add(ForbiddenPair.of(a, b))
    return Instance(sets=sets, forbidden=tuple(sorted(canon)))


@dataclass(frozen=True, order=True)
class Selection:
    """Per-set tuples of chosen item indices, each sorted ascending."""

    chosen: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, per_set: Iterable[Iterable[int]]) -> "Selection":
        return cls(tuple(tuple(sorted(set(int(j) for j in js))) for js in per_set))

    def contains(self, ref: ItemRef) -> bool:
        return ref.item_index in self.chosen[ref.set_index]

    def items(self) -> Iterator[ItemRef]:
        for i, js in enumerate(self.chosen):
            for j in js:
                yield ItemRef(i, j)


@dataclass(frozen=True)
class Scenario:
    """One realized cost per item, nested the same way as Instance.sets."""

    costs: tuple[tuple[int, ...], ...]

    def cost(self, ref: ItemRef) -> int:
        return self.costs[ref.set_index][ref.item_index]


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class RegretReport:
    """Regret of a selection, with the adversary witness and its scenario."""

    regret: int
    witness: Selection
    scenario: Scenario


@dataclass(frozen=True)
class RobustResult:
    """Outcome of a min-max regret solve (exact or brute force)."""

    status: str
    x_star: Optional[Selection]
    regret: Optional[int]
    lower_bound: int
    upper_bound: Optional[int]
    gap: Fraction
    iterations: int
    trajectory: tuple[dict, ...] = field(default=())


def validate(instance: Instance) -> ValidationReport:
    """Check structural well-formedness; returns a report, never raises.

    Same-set forbidden pairs are legal for solvers but reported as warnings
    since the stock generator never emits them.
    """
    errors: list[str] = []
    warnings: list[str] = []
    for i, s in enumerate(instance.sets):
        if s.quota < 1:
            errors.append(f"set {i}: quota {s.quota} must be positive")
        if s.quota > s.size:
            errors.append(f"set {i}: quota {s.quota} exceeds set size {s.size}")
        for j, iv in enumerate(s.items):
            if iv.lo > iv.hi:
                errors.append(f"item ({i},{j}): interval lower bound {iv.lo} above upper bound {iv.hi}")
            if iv.lo < 0:
                errors.append(f"item ({i},{j}): negative cost bound {iv.lo}")

    def ref_ok(ref: ItemRef) -> bool:
        return 0 <= ref.set_index < instance.m and 0 <= ref.item_index < instance.sets[ref.set_index].size

    seen: set[ForbiddenPair] = set()
    for pair in instance.forbidden:
        if not ref_ok(pair.a) or not ref_ok(pair.b):
            errors.append(f"pair {pair}: references an item outside the instance")
            continue
        if pair.a == pair.b:
            errors.append(f"pair {pair}: joins an item with itself")
            continue
        if pair.b < pair.a:
            errors.append(f"pair {pair}: not in canonical order")
        if pair in seen:
            errors.append(f"pair {pair}: duplicate")
        seen.add(pair)
        if pair.a.set_index == pair.b.set_index:
            warnings.append(f"pair {pair}: joins two items of the same set")
    return ValidationReport(tuple(errors), tuple(warnings))


def _check_selection_shape(instance: Instance, x: Selection) -> None:
    if len(x.chosen) != instance.m:
        raise ValueError(f"selection covers {len(x.chosen)} sets, instance has {instance.m}")
    for i, js in enumerate(x.chosen):
        for j in js:
            if not 0 <= j < instance.sets[i].size:
                raise ValueError(f"selection references item ({i},{j}) outside set of size {instance.sets[i].size}")


def is_feasible(instance: Instance, x: Selection) -> bool:
    """True iff every quota is met exactly and no forbidden pair is fully chosen."""
    _check_selection_shape(instance, x)
    for i, js in enumerate(x.chosen):
        if len(js) != instance.sets[i].quota:
            return False
    chosen = [frozenset(js) for js in x.chosen]
    for pair in instance.forbidden:
        if pair.a.item_index in chosen[pair.a.set_index] and pair.b.item_index in chosen[pair.b.set_index]:
            return False
    return True


def worst_case_scenario(instance: Instance, x: Selection) -> Scenario:
    """Regret-maximizing scenario for x: chosen items at hi, the rest at lo."""
    _check_selection_shape(instance, x)
    costs = []
    for i, s in enumerate(instance.sets):
        js = set(x.chosen[i]) if i < len(x.chosen) else set()
        costs.append(tuple(iv.hi if j in js else iv.lo for j, iv in enumerate(s.items)))
    return Scenario(tuple(costs))


def cost_of(scenario: Scenario, x: Selection) -> int:
    """Total cost of the chosen items under the scenario."""
    if len(scenario.costs) != len(x.chosen):
        raise ValueError("scenario and selection cover different numbers of sets")
    total = 0
    for i, js in enumerate(x.chosen):
        row = scenario.costs[i]
        for j in js:
            if not 0 <= j < len(row):
                raise ValueError(f"selection references item ({i},{j}) outside the scenario")
            total += row[j]
    return total


def evaluate_regret(
    instance: Instance,
    x: Selection,
    ris_solver: Optional[Callable[[Instance, Scenario], object]] = None,
) -> RegretReport:
    """Exact regret of a feasible selection.

    The regret is the gap between x's cost and the optimal cost under x's
    worst-case scenario; ``ris_solver`` computes that optimum (defaults to the
    dispatching deterministic solver).
    """
    if not is_feasible(instance, x):
        raise ValueError("selection is infeasible; regret is undefined")
    if ris_solver is None:
        from .deterministic import solve_ris as ris_solver
    scenario = worst_case_scenario(instance, x)
    sol = ris_solver(instance, scenario)
    if sol.status != OPTIMAL:
        raise InfeasibleError("inner deterministic solve failed on a feasible instance")
    regret = cost_of(scenario, x) - sol.value
    assert regret >= 0, "regret must be nonnegative for a feasible selection"
    return RegretReport(regret=regret, witness=sol.selection, scenario=scenario)


def midpoint_scenario(instance: Instance) -> Scenario:
    """Scenario with every cost at the interval midpoint, rounded down."""
    return Scenario(tuple(tuple((iv.lo + iv.hi) // 2 for iv in s.items) for s in instance.sets))


def sample_extreme_scenario(instance: Instance, rng: random.Random) -> Scenario:
    """Random vertex of the scenario box: each cost is lo or hi with probability 1/2."""
    costs = []
    for s in instance.sets:
        costs.append(tuple(iv.hi if rng.random() < 0.5 else iv.lo for iv in s.items))
    return Scenario(tuple(costs))


def as_degenerate_instance(instance: Instance, scenario: Scenario) -> Instance:
    """Copy of the instance with every interval collapsed to the scenario cost."""
    sets = tuple(
        ItemSet(s.quota, tuple(CostInterval(c, c) for c in scenario.costs[i]))
        for i, s in enumerate(instance.sets)
    )
    return Instance(sets=sets, forbidden=instance.forbidden)


def item_offsets(instance: Instance) -> tuple[tuple[int, ...], int]:
    """Flat indexing helper: per-set offsets and the total item count."""
    offsets = []
    n = 0
    for s in instance.sets:
        offsets.append(n)
        n += s.size
    return tuple(offsets), n


def conflict_adjacency(instance: Instance) -> dict[ItemRef, set[ItemRef]]:
    """Adjacency of the conflict graph, only items that appear in some pair."""
    adj: dict[ItemRef, set[ItemRef]] = {}
    for pair in instance.forbidden:
        adj.setdefault(pair.a, set()).add(pair.b)
        adj.setdefault(pair.b, set()).add(pair.a)
    return adj


# --- JSON (de)serialization ------------------------------------------------
#
# Instance: {"sets": [{"p": int, "items": [[lo,hi], ...]}, ...],
#            "forbidden": [[i,k,j,l], ...]}          (0-based indices)
# Selection: {"chosen": [[j, ...], ...]}
# A deterministic scenario travels as an instance with [c,c] intervals.


def instance_to_dict(instance: Instance) -> dict:
    return {
        "sets": [
            {"p": s.quota, "items": [[iv.lo, iv.hi] for iv in s.items]}
            for s in instance.sets
        ],
        "forbidden": [
            [p.a.set_index, p.a.item_index, p.b.set_index, p.b.item_index]
            for p in instance.forbidden
        ],
    }


def instance_from_dict(data: dict) -> Instance:
    try:
        set_specs = [(int(s["p"]), [(int(lo), int(hi)) for lo, hi in s["items"]]) for s in data["sets"]]
        pairs = [tuple(int(v) for v in quad) for quad in data.get("forbidden", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed instance document: {exc}") from exc
    for quad in pairs:
        if len(quad) != 4:
            raise ValueError(f"forbidden pair {quad!r} is not a quadruple")
    return make_instance(set_specs, pairs)


def instance_to_json(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2, sort_keys=True) + "\n"


def instance_from_json(text: str) -> Instance:
    return instance_from_dict(json.loads(text))


def selection_to_dict(x: Selection) -> dict:
    return {"chosen": [list(js) for js in x.chosen]}


def selection_from_dict(data: dict) -> Selection:
    try:
        return Selection.of(data["chosen"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed selection document: {exc}") from exc


def selection_to_json(x: Selection) -> str:
    return json.dumps(selection_to_dict(x), indent=2, sort_keys=True) + "\n"


def selection_from_json(text: str) -> Selection:
    return selection_from_dict(json.loads(text))
