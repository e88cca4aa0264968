"""Seeded random instance generation for benchmarks and test suites."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import Instance, ItemRef, make_instance

MODE_NORMAL = "normal"
MODE_TRANSITIVE = "transitive"


@dataclass(frozen=True)
class GenParams:
    m: int
    r: int  # uniform set size
    p: int  # uniform quota
    k_pairs: int  # sampled forbidden pairs (before any closure)
    mode: str = MODE_NORMAL
    cost_min: int = 1
    cost_max: int = 100
    rng_seed: int = 0


def _cross_set_pairs(m: int, r: int) -> list[tuple[int, int, int, int]]:
    pairs = []
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(r):
                for l in range(r):
                    pairs.append((i, k, j, l))
    return pairs


def generate_instance(params: GenParams) -> Instance:
    """Draw an instance: per item two uniform integers ordered into [lo, hi],
    then ``k_pairs`` distinct cross-set pairs sampled without replacement.

    Transitive mode replaces the sampled pairs with the clique completion of
    their conflict-graph components, so that every component is a clique;
    completion may introduce same-set pairs when a component holds two items
    of one set. Deterministic for a fixed seed.
    """
    if params.mode not in (MODE_NORMAL, MODE_TRANSITIVE):
        raise ValueError(f"unknown mode {params.mode!r}")
    if params.p > params.r:
        raise ValueError(f"quota {params.p} exceeds set size {params.r}")
    if params.k_pairs < 0:
        raise ValueError("k_pairs must be nonnegative")
    rng = random.Random(params.rng_seed)
    sets = []
    for _ in range(params.m):
        items = []
        for _ in range(params.r):
            a = rng.randint(params.cost_min, params.cost_max)
            b = rng.randint(params.cost_min, params.cost_max)
            items.append((min(a, b), max(a, b)))
        sets.append((params.p, items))

    population = _cross_set_pairs(params.m, params.r)
    if params.k_pairs > len(population):
        raise ValueError(
            f"k_pairs={params.k_pairs} exceeds the {len(population)} available cross-set pairs"
        )
    seeds = rng.sample(population, params.k_pairs)

    if params.mode == MODE_NORMAL:
        return make_instance(sets, seeds)

    # clique completion: union-find over seed pairs, then all in-component pairs
    parent: dict[ItemRef, ItemRef] = {}

    def find(x: ItemRef) -> ItemRef:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, k, j, l in seeds:
        for ref in (ItemRef(i, k), ItemRef(j, l)):
            parent.setdefault(ref, ref)
        ra, rb = find(ItemRef(i, k)), find(ItemRef(j, l))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    components: dict[ItemRef, list[ItemRef]] = {}
    for ref in parent:
        components.setdefault(find(ref), []).append(ref)
    closed = []
    for members in components.values():
        members.sort()
        for a_idx in range(len(members)):
            for b_idx in range(a_idx + 1, len(members)):
                a, b = members[a_idx], members[b_idx]
                closed.append((a.set_index, a.item_index, b.set_index, b.item_index))
    return make_instance(sets, closed)
