"""Exact deterministic solvers for the restricted items selection problem.

``solve_ris`` classifies the conflict structure and dispatches: no conflicts
go to per-set sorting, clique-structured conflicts to the min-cost flow
reformulation, everything else to branch and bound. Brute-force enumerators
double as testing oracles, including one for the min-max regret problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator, Optional

import numpy as np

from .bnb import LinearForm, flatten_selection, minimize_max_forms
from .model import (
    INFEASIBLE,
    OPTIMAL,
    Instance,
    ItemRef,
    RobustResult,
    Scenario,
    Selection,
    conflict_adjacency,
    item_offsets,
)

UNCONSTRAINED = "unconstrained"
CLIQUE_COMPONENTS = "clique_components"
GENERAL = "general"

ENUMERATION_GUARD = 10_000_000


@dataclass(frozen=True)
class StructureClass:
    """Conflict-graph shape of an instance; ``classes`` is the clique
    partition (all items, singletons included) when the variant is
    clique_components, else None."""

    variant: str
    classes: Optional[tuple[tuple[ItemRef, ...], ...]] = None


@dataclass(frozen=True)
class RisSolution:
    status: str
    selection: Optional[Selection] = None
    value: Optional[int] = None


def clique_partition(instance: Instance) -> Optional[tuple[tuple[ItemRef, ...], ...]]:
    """Partition of all items into conflict-graph components, or None when
    some component is not a clique. Singleton items form their own class."""
    adj = conflict_adjacency(instance)
    seen: set[ItemRef] = set()
    classes: list[tuple[ItemRef, ...]] = []
    for ref in instance.item_refs():
        if ref in seen:
            continue
        if ref not in adj:
            classes.append((ref,))
            continue
        component = [ref]
        seen.add(ref)
        frontier = [ref]
        while frontier:
            cur = frontier.pop()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    component.append(nxt)
                    frontier.append(nxt)
        for u, v in combinations(component, 2):
            if v not in adj[u]:
                return None
        classes.append(tuple(sorted(component)))
    classes.sort(key=lambda cls: cls[0])
    return tuple(classes)


def classify(instance: Instance) -> StructureClass:
    """Detect the polynomial special cases of the conflict structure."""
    if not instance.forbidden:
        return StructureClass(UNCONSTRAINED)
    classes = clique_partition(instance)
    if classes is None:
        return StructureClass(GENERAL)
    return StructureClass(CLIQUE_COMPONENTS, classes)


def solve_greedy(instance: Instance, scenario: Scenario) -> RisSolution:
    """Per-set sorting solver, exact when there are no forbidden pairs.

    Ties go to the smallest item index, which makes the result the
    lexicographically smallest optimal selection.
    """
    chosen = []
    value = 0
    for i, s in enumerate(instance.sets):
        order = sorted(range(s.size), key=lambda j: (scenario.costs[i][j], j))
        take = order[: s.quota]
        value += sum(scenario.costs[i][j] for j in take)
        chosen.append(take)
    return RisSolution(OPTIMAL, Selection.of(chosen), value)


def solve_bnb(
    instance: Instance,
    scenario: Scenario,
    upper_bound_hint: Optional[int] = None,
) -> RisSolution:
    """General exact solver via branch and bound.

    ``upper_bound_hint`` only prunes; passing a hint below the true optimum is
    a contract violation and raises AssertionError.
    """
    flat = tuple(c for row in scenario.costs for c in row)
    form = LinearForm(flat, 0)
    status, sel, val = minimize_max_forms(instance, [form], prune_above=upper_bound_hint)
    if status == INFEASIBLE and upper_bound_hint is not None:
        status2, sel2, val2 = minimize_max_forms(instance, [form])
        if status2 == OPTIMAL:
            raise AssertionError(
                f"upper_bound_hint {upper_bound_hint} is below the optimal value {val2}"
            )
        return RisSolution(INFEASIBLE)
    if status == INFEASIBLE:
        return RisSolution(INFEASIBLE)
    return RisSolution(OPTIMAL, sel, val)


def solve_ris(instance: Instance, scenario: Scenario) -> RisSolution:
    """Structure-dispatching exact solver."""
    sc = classify(instance)
    if sc.variant == UNCONSTRAINED:
        return solve_greedy(instance, scenario)
    if sc.variant == CLIQUE_COMPONENTS:
        from .flow import solve_via_flow

        return solve_via_flow(instance, scenario)
    return solve_bnb(instance, scenario)


def _enumeration_size(instance: Instance) -> int:
    size = 1
    for s in instance.sets:
        size *= math.comb(s.size, s.quota)
    return size


def _quota_selections(instance: Instance) -> Iterator[tuple[tuple[int, ...], ...]]:
    """All quota-respecting selections in lexicographic order."""
    per_set = [list(combinations(range(s.size), s.quota)) for s in instance.sets]
    return product(*per_set)


def iter_feasible_selections(instance: Instance) -> Iterator[Selection]:
    """Lazily enumerate the feasible set in lexicographic order (no guard)."""
    pairs = [
        ((p.a.set_index, p.a.item_index), (p.b.set_index, p.b.item_index))
        for p in instance.forbidden
    ]
    for combo in _quota_selections(instance):
        sets = [frozenset(js) for js in combo]
        ok = True
        for (ai, aj), (bi, bj) in pairs:
            if aj in sets[ai] and bj in sets[bi]:
                ok = False
                break
        if ok:
            yield Selection(tuple(combo))


def brute_force_ris(instance: Instance, scenario: Scenario) -> RisSolution:
    """Exhaustive oracle; rejects instances above the enumeration guard."""
    if _enumeration_size(instance) > ENUMERATION_GUARD:
        raise ValueError("instance exceeds the brute-force enumeration guard")
    best_val: Optional[int] = None
    best_sel: Optional[Selection] = None
    for sel in iter_feasible_selections(instance):
        val = sum(scenario.costs[i][j] for i, js in enumerate(sel.chosen) for j in js)
        if best_val is None or val < best_val:
            best_val = val
            best_sel = sel
    if best_sel is None:
        return RisSolution(INFEASIBLE)
    return RisSolution(OPTIMAL, best_sel, best_val)


def brute_force_minmax_regret(instance: Instance) -> RobustResult:
    """Exhaustive min-max regret oracle.

    Enumerates the full feasible set once, then evaluates every selection's
    regret against every adversary selection under its worst-case scenario.
    The inner minimum is computed with a vectorized pass that is arithmetic-
    for-arithmetic the same enumeration brute_force_ris performs. Integers
    stay below 2**53 so the float matmul is exact.
    """
    if _enumeration_size(instance) > ENUMERATION_GUARD:
        raise ValueError("instance exceeds the brute-force enumeration guard")
    feasible = list(iter_feasible_selections(instance))
    if not feasible:
        return RobustResult(
            status=INFEASIBLE,
            x_star=None,
            regret=None,
            lower_bound=0,
            upper_bound=None,
            gap=Fraction(0),
            iterations=0,
        )
    offsets, n = item_offsets(instance)
    lo = np.empty(n, dtype=np.float64)
    hi = np.empty(n, dtype=np.float64)
    for i, s in enumerate(instance.sets):
        for j, iv in enumerate(s.items):
            lo[offsets[i] + j] = iv.lo
            hi[offsets[i] + j] = iv.hi
    delta = hi - lo
    X = np.zeros((len(feasible), n), dtype=np.float64)
    for row, sel in enumerate(feasible):
        X[row, flatten_selection(instance, sel)] = 1.0
    base = X @ lo  # adversary cost when nothing overlaps the decision
    own = X @ hi  # decision cost in its own worst-case scenario

    best_val: Optional[int] = None
    best_idx = -1
    chunk = max(1, 2_000_000 // max(1, len(feasible)))
    for start in range(0, len(feasible), chunk):
        stop = min(start + chunk, len(feasible))
        overlap = (X[start:stop] * delta) @ X.T
        inner = (overlap + base[None, :]).min(axis=1)
        regrets = own[start:stop] - inner
        for k in range(stop - start):
            val = int(round(regrets[k]))
            if best_val is None or val < best_val:
                best_val = val
                best_idx = start + k
    assert best_val is not None and best_val >= 0
    return RobustResult(
        status=OPTIMAL,
        x_star=feasible[best_idx],
        regret=best_val,
        lower_bound=best_val,
        upper_bound=best_val,
        gap=Fraction(0),
        iterations=0,
    )
