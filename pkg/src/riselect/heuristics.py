"""Sampling and evolutionary initialization for the regret solver.

The cut pool starts from the optimal selections of randomly sampled extreme
scenarios plus the final population of an evolutionary search. The search
seeds itself with the midpoint-scenario solution and improves a small
population by feasibility-preserving mutation and crossover, scoring members
by their exact regret. The best member doubles as the initial upper bound.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .deterministic import solve_ris
from .model import (
    OPTIMAL,
    InfeasibleError,
    Instance,
    Selection,
    evaluate_regret,
    is_feasible,
    midpoint_scenario,
    sample_extreme_scenario,
)

FEASIBILITY_RETRIES = 50


@dataclass(frozen=True)
class EvoParams:
    iterations: int = 20
    population_size: int = 10
    ops_per_iteration: int = 100  # applied to both crossover and mutation
    rng_seed: int = 0


@dataclass(frozen=True)
class Population:
    """Feasible selections with their regrets, ascending by regret."""

    members: tuple[tuple[Selection, int], ...]
    best_regret_history: tuple[int, ...] = ()

    @property
    def best(self) -> tuple[Selection, int]:
        return self.members[0]


def mutate(instance: Instance, x: Selection, rng: random.Random) -> Selection:
    """Swap chosen and unchosen items inside randomly picked sets.

    The number of affected sets and of swaps per set are both random. Only a
    feasible result is returned; after bounded retries the input comes back
    unchanged. Sets with quota equal to size cannot change.
    """
    m = instance.m
    for _ in range(FEASIBILITY_RETRIES):
        count = rng.randint(1, m)
        affected = rng.sample(range(m), count)
        chosen = [list(js) for js in x.chosen]
        changed = False
        for i in affected:
            s = instance.sets[i]
            swappable = min(len(chosen[i]), s.size - len(chosen[i]))
            if swappable < 1:
                continue
            swaps = rng.randint(1, swappable)
            out = rng.sample(chosen[i], swaps)
            pool = [j for j in range(s.size) if j not in chosen[i]]
            inn = rng.sample(pool, swaps)
            chosen[i] = [j for j in chosen[i] if j not in out] + inn
            changed = True
        if not changed:
            continue
        candidate = Selection.of(chosen)
        if is_feasible(instance, candidate):
            return candidate
    return x


def crossover(instance: Instance, x1: Selection, x2: Selection, rng: random.Random) -> Selection:
    """Replace randomly picked sets of the first parent with the second's.

    Falls back to the first parent when no feasible combination shows up
    within the retry budget.
    """
    m = instance.m
    for _ in range(FEASIBILITY_RETRIES):
        chosen = [
            x2.chosen[i] if rng.random() < 0.5 else x1.chosen[i] for i in range(m)
        ]
        candidate = Selection(tuple(chosen))
        if is_feasible(instance, candidate):
            return candidate
    return x1


class _RegretCache:
    """Memoized exact regret evaluation keyed by selection."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.cache: dict[Selection, int] = {}

    def __call__(self, x: Selection) -> int:
        val = self.cache.get(x)
        if val is None:
            val = evaluate_regret(self.instance, x, solve_ris).regret
            self.cache[x] = val
        return val


def evolve(instance: Instance, params: EvoParams = EvoParams()) -> Population:
    """Run the evolutionary search and return the final population."""
    rng = random.Random(params.rng_seed)
    seed_sol = solve_ris(instance, midpoint_scenario(instance))
    if seed_sol.status != OPTIMAL:
        raise InfeasibleError("instance has no feasible selection")
    score = _RegretCache(instance)
    pop: list[Selection] = [seed_sol.selection]
    history: list[int] = []
    for _ in range(params.iterations):
        candidates = list(pop)
        for _ in range(params.ops_per_iteration):
            a = pop[rng.randrange(len(pop))]
            b = pop[rng.randrange(len(pop))]
            candidates.append(crossover(instance, a, b, rng))
        for _ in range(params.ops_per_iteration):
            a = pop[rng.randrange(len(pop))]
            candidates.append(mutate(instance, a, rng))
        unique = sorted(set(candidates), key=lambda s: (score(s), s.chosen))
        pop = unique[: params.population_size]
        history.append(score(pop[0]))
    members = tuple((s, score(s)) for s in pop)
    return Population(members=members, best_regret_history=tuple(history))


def initialize_cuts(
    instance: Instance,
    n_scenarios: int = 100,
    rng: Optional[random.Random] = None,
    evo_params: Optional[EvoParams] = EvoParams(),
    pool: Optional[Population] = None,
):
    """Build the initial cut set for the regret solver.

    One optimal selection per sampled extreme scenario (duplicates merged),
    then every member of the evolved population. ``pool`` short-circuits the
    evolution when the caller already ran it. Raises InfeasibleError when the
    instance has no feasible selection.
    """
    from .regret import Cut, CutSet  # local import: regret depends on this module

    if rng is None:
        rng = random.Random(0)
    selections: list[Selection] = []
    seen: set[Selection] = set()
    for _ in range(n_scenarios):
        scenario = sample_extreme_scenario(instance, rng)
        sol = solve_ris(instance, scenario)
        if sol.status != OPTIMAL:
            raise InfeasibleError("instance has no feasible selection")
        if sol.selection not in seen:
            seen.add(sol.selection)
            selections.append(sol.selection)
    if pool is None and evo_params is not None:
        pool = evolve(instance, evo_params)
    if pool is not None:
        for sel, _ in pool.members:
            if sel not in seen:
                seen.add(sel)
                selections.append(sel)
    if not selections:
        raise InfeasibleError("no scenarios sampled and no heuristic pool provided")
    return CutSet([Cut(s) for s in selections])
