"""Shared builders for the test suite."""

from __future__ import annotations

import random

from riselect import Instance, make_instance
from riselect.generator import (
    MODE_NORMAL,
    MODE_TRANSITIVE,
    GenParams,
    generate_instance,
)
from riselect.reductions import QuantifiedDnf, parse_dnf

# Three sets of three items, quota two, four forbidden pairs. The first three
# pairs chain items (0,0), (1,0), (2,0) into a triangle, the fourth couples
# (0,1) with (1,1). Costs are fixed and degenerate; the optimum is 22.
EXAMPLE1_COSTS = [[3, 5, 2], [4, 1, 6], [2, 7, 3]]
EXAMPLE1_PAIRS = [(0, 0, 1, 0), (1, 0, 2, 0), (0, 0, 2, 0), (0, 1, 1, 1)]
EXAMPLE1_OPTIMUM = 22  # frozen from the brute-force oracle


def example1_instance(costs=None) -> Instance:
    rows = EXAMPLE1_COSTS if costs is None else costs
    return make_instance(
        [(2, [(c, c) for c in row]) for row in rows],
        EXAMPLE1_PAIRS,
    )


def example1_interval_instance() -> Instance:
    """Same structure with nondegenerate intervals [c, c+4]."""
    return make_instance(
        [(2, [(c, c + 4) for c in row]) for row in EXAMPLE1_COSTS],
        EXAMPLE1_PAIRS,
    )


# Four three-literal clauses over three x-variables and two y-variables; a
# positive exists-forall instance (x = (1,1,0) works).
EXAMPLE2_TEXT = "x1 x2 y1\nx1 -y1 y2\nx2 -x3 -y2\nx3 -y1 -y2\n"


def example2_formula() -> QuantifiedDnf:
    return parse_dnf(EXAMPLE2_TEXT)


def random_small_instance(rng: random.Random, k_max: int = 6) -> Instance:
    """Random instance inside the oracle box: m<=4, r<=5, p<=2, K<=k_max."""
    m = rng.randint(2, 4)
    r = rng.randint(2, 5)
    p = rng.randint(1, min(2, r))
    mode = MODE_NORMAL if rng.random() < 0.5 else MODE_TRANSITIVE
    k = rng.randint(0, min(k_max, (m * (m - 1) // 2) * r * r))
    params = GenParams(m=m, r=r, p=p, k_pairs=k, mode=mode, rng_seed=rng.randrange(1 << 30))
    return generate_instance(params)
