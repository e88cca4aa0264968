"""Exact min-max regret solver by cut generation.

The relaxed master problem keeps a finite pool of adversary selections
(cuts). Each round solves the master exactly, evaluates the true regret of
the master solution, and either certifies optimality or adds the regret
witness as a new cut. Against a cut y the master objective contributes the
linear form

    l_y(x) = sum_ij a_ij x_ij - b_y,   a_ij = lo_ij if y_ij else hi_ij,
                                       b_y  = sum_ij lo_ij y_ij,

which equals (cost of x) - (cost of y) under x's worst-case scenario, so the
master minimizes the pointwise max of these forms over the feasible set. The
master objective is a valid lower bound for any cut subset, and every
evaluated master solution yields an upper bound.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .bnb import LinearForm, SearchTimeout, max_form_value, minimize_max_forms
from .deterministic import solve_ris
from .heuristics import EvoParams, Population, evolve, initialize_cuts
from .model import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    TIME_LIMIT,
    InfeasibleError,
    Instance,
    RobustResult,
    Selection,
    cost_of,
    evaluate_regret,
    is_feasible,
    item_offsets,
    midpoint_scenario,
    validate,
    worst_case_scenario,
)


@dataclass(frozen=True)
class Cut:
    """An adversary selection y inducing the master constraint c(x).y >= z."""

    y: Selection


class CutSet:
    """Ordered, duplicate-free cut pool with last-solve slacks."""

    def __init__(self, cuts: Iterable[Cut] = ()):
        self._cuts: list[Cut] = []
        self._ages: list[int] = []
        self._seen: set[Selection] = set()
        self._next_age = 0
        self.slacks: Optional[list[int]] = None
        for cut in cuts:
            if cut.y not in self._seen:
                self._append(cut)

    def _append(self, cut: Cut, age: Optional[int] = None) -> None:
        self._cuts.append(cut)
        self._ages.append(self._next_age if age is None else age)
        self._next_age = max(self._next_age, self._ages[-1]) + 1
        self._seen.add(cut.y)
        if self.slacks is not None:
            # a fresh cut has no recorded slack yet; zero keeps lengths aligned
            # and the newest cut is protected from pruning anyway
            self.slacks.append(0)

    def add(self, cut: Cut) -> None:
        if cut.y in self._seen:
            raise ValueError("duplicate cut")
        self._append(cut)

    @property
    def cuts(self) -> tuple[Cut, ...]:
        return tuple(self._cuts)

    def ages(self) -> tuple[int, ...]:
        return tuple(self._ages)

    def __len__(self) -> int:
        return len(self._cuts)

    def __contains__(self, y: Selection) -> bool:
        return y in self._seen


@dataclass(frozen=True)
class MasterSolution:
    x_hat: Selection
    z_hat: int
    # cuts whose constraint was needed to prove x_hat optimal; seeding the
    # next solve with them makes the lazy activation loop converge fast
    active_cuts: tuple[Selection, ...] = ()


@dataclass(frozen=True)
class SolverConfig:
    epsilon: Fraction = Fraction(0)  # integer data makes 0 exact
    iteration_limit: int = 500
    master_time_limit: float = 60.0
    cut_prune_count: int = 3
    rng_seed: int = 0
    init_scenarios: int = 100
    heuristic_init: bool = True
    evo_params: Optional[EvoParams] = None


def cut_objective_coefficients(instance: Instance, y: Selection) -> LinearForm:
    """Linear form l_y with l_y(x) = cost(c(x), x) - cost(c(x), y) for binary x."""
    offsets, n = item_offsets(instance)
    coeffs = [0] * n
    b = 0
    ysets = [set(js) for js in y.chosen]
    for i, s in enumerate(instance.sets):
        for j, iv in enumerate(s.items):
            if j in ysets[i]:
                coeffs[offsets[i] + j] = iv.lo
                b += iv.lo
            else:
                coeffs[offsets[i] + j] = iv.hi
    return LinearForm(tuple(coeffs), b)


def _upper_cost(instance: Instance, x: Selection) -> int:
    return sum(instance.interval(ref).hi for ref in x.items())


def _adversary_cost(instance: Instance, x: Selection, y: Selection) -> int:
    scenario = worst_case_scenario(instance, x)
    return cost_of(scenario, y)


ACTIVATE_PER_ROUND = 3  # most-violated cuts activated per lazy round


def _solve_master_lazy(
    instance: Instance,
    forms: list[LinearForm],
    incumbent: Optional[Selection],
    active_seed: Iterable[int],
    time_limit: Optional[float],
) -> tuple[Selection, int, list[int]]:
    """Exact master minimization with lazy cut activation.

    Branch and bound runs on an active subset of the forms; the subset
    minimizer is optimal for the full set once no inactive form exceeds the
    subset objective at it, otherwise the most violated forms join the active
    set and the search repeats. Most cuts stay inactive, which keeps the
    per-node bound cheap even for large pools.
    """
    nforms = len(forms)
    active = sorted(set(i for i in active_seed if 0 <= i < nforms))
    if not active:
        active = [0]
    deadline = time.monotonic() + time_limit if time_limit is not None else None
    best: Optional[Selection] = incumbent
    while True:
        remaining = None
        if deadline is not None:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise SearchTimeout()
        sub = [forms[i] for i in active]
        status, sel, val = minimize_max_forms(
            instance, sub, incumbent=best, time_limit=remaining
        )
        if status == INFEASIBLE:
            raise InfeasibleError("instance has no feasible selection")
        values = [f.value_at(instance, sel) for f in forms]
        worst = max(values)
        if worst <= val:
            return sel, worst, active
        violated = sorted(
            (i for i in range(nforms) if values[i] > val),
            key=lambda i: (-values[i], i),
        )
        active = sorted(set(active) | set(violated[:ACTIVATE_PER_ROUND]))
        if best is None or max_form_value(instance, forms, sel) < max_form_value(
            instance, forms, best
        ):
            best = sel


def solve_master(
    instance: Instance,
    cuts: CutSet,
    config: SolverConfig = SolverConfig(),
    incumbent: Optional[Selection] = None,
    active_hint: Iterable[Selection] = (),
) -> MasterSolution:
    """Solve the relaxed master exactly for the current cut pool.

    Returns the minimizer x_hat with z_hat = min over cuts of c(x_hat).y and
    refreshes ``cuts.slacks``. Raises SearchTimeout when the master time limit
    runs out and InfeasibleError when the instance has no feasible selection.
    """
    if len(cuts) == 0:
        raise ValueError("the master problem needs at least one cut")
    pool = cuts.cuts
    forms = [cut_objective_coefficients(instance, cut.y) for cut in pool]
    hint_set = set(active_hint)
    seed = [i for i, cut in enumerate(pool) if cut.y in hint_set]
    sel, val, active = _solve_master_lazy(
        instance, forms, incumbent, seed, config.master_time_limit
    )
    adversary = [_adversary_cost(instance, sel, cut.y) for cut in pool]
    z_hat = min(adversary)
    cuts.slacks = [a - z_hat for a in adversary]
    assert val == _upper_cost(instance, sel) - z_hat
    return MasterSolution(
        x_hat=sel,
        z_hat=z_hat,
        active_cuts=tuple(pool[i].y for i in active),
    )


def prune_cuts(cuts: CutSet, count: int) -> CutSet:
    """Drop the ``count`` largest-slack cuts, never the most recent one.

    Ties resolve oldest-first; with fewer than count + 2 cuts this is a no-op.
    Requires slacks from the last master solve.
    """
    if len(cuts) <= count + 1:
        return cuts
    if cuts.slacks is None:
        raise ValueError("prune_cuts needs slacks from a master solve")
    ages = cuts.ages()
    newest = max(range(len(cuts)), key=lambda i: ages[i])
    order = sorted(
        (i for i in range(len(cuts)) if i != newest),
        key=lambda i: (-cuts.slacks[i], ages[i]),
    )
    drop = set(order[:count])
    kept = CutSet()
    for i, cut in enumerate(cuts.cuts):
        if i not in drop:
            kept._append(cut, age=ages[i])
    return kept


def minmax_regret(
    instance: Instance,
    config: SolverConfig = SolverConfig(),
    on_iteration: Optional[Callable[[dict], None]] = None,
) -> RobustResult:
    """Cut-generation solve of the interval min-max regret problem.

    Loop: solve the master, evaluate the true regret of its solution, stop
    when the master objective already covers that regret (within epsilon),
    otherwise add the regret witness as a cut. On a master timeout the cut
    pool is pruned and the master retried; when the pool is down to one cut
    and still times out, the best-known solution is returned with the current
    bounds. ``on_iteration`` receives one record per round, synchronously.
    """
    report = validate(instance)
    if not report.ok:
        raise ValueError("invalid instance: " + "; ".join(report.errors))

    base_rng = random.Random(config.rng_seed)
    scen_seed = base_rng.randrange(2**63)
    evo_seed = base_rng.randrange(2**63)

    t_start = time.monotonic()
    trajectory: list[dict] = []
    ub: Optional[int] = None
    x_best: Optional[Selection] = None
    lb = 0  # regret is never negative
    warm_pool: list[Selection] = []

    def result(status: str, iterations: int) -> RobustResult:
        gap = Fraction(0)
        if ub is not None and ub > 0 and lb < ub:
            gap = Fraction(ub - lb, ub)
        return RobustResult(
            status=status,
            x_star=x_best,
            regret=ub,
            lower_bound=lb,
            upper_bound=ub,
            gap=gap,
            iterations=iterations,
            trajectory=tuple(trajectory),
        )

    try:
        if config.heuristic_init:
            evo = config.evo_params or EvoParams(rng_seed=evo_seed)
            pool = evolve(instance, evo)
            cuts = initialize_cuts(
                instance,
                n_scenarios=config.init_scenarios,
                rng=random.Random(scen_seed),
                pool=pool,
            )
            x_best, ub = pool.best
            warm_pool = [sel for sel, _ in pool.members]
        else:
            seed_sol = solve_ris(instance, midpoint_scenario(instance))
            if seed_sol.status != OPTIMAL:
                return result(INFEASIBLE, 0)
            cuts = CutSet([Cut(seed_sol.selection)])
            rep = evaluate_regret(instance, seed_sol.selection, solve_ris)
            x_best, ub = seed_sol.selection, rep.regret
            warm_pool = [seed_sol.selection]
    except InfeasibleError:
        return result(INFEASIBLE, 0)

    last_x_hat: Optional[Selection] = None
    active_hint: set[Selection] = set()
    for iteration in range(1, config.iteration_limit + 1):
        pruned_this_round = 0
        t_master = time.monotonic()
        while True:
            candidates = list(warm_pool)
            if last_x_hat is not None:
                candidates.append(last_x_hat)
            if x_best is not None:
                candidates.append(x_best)
            forms = [cut_objective_coefficients(instance, cut.y) for cut in cuts.cuts]
            incumbent = min(
                candidates,
                key=lambda s: (max_form_value(instance, forms, s), s.chosen),
                default=None,
            )
            try:
                master = solve_master(
                    instance, cuts, config, incumbent=incumbent, active_hint=active_hint
                )
                active_hint = set(master.active_cuts)
                break
            except InfeasibleError:
                return result(INFEASIBLE, iteration - 1)
            except SearchTimeout:
                if len(cuts) <= 1:
                    return result(TIME_LIMIT, iteration - 1)
                if cuts.slacks is None:
                    cuts.slacks = [0] * len(cuts)  # no master solved yet: age decides
                before = len(cuts)
                cuts = prune_cuts(cuts, config.cut_prune_count)
                if len(cuts) == before:
                    # prune guard made it a no-op; fall back to the newest cut only
                    newest = max(range(len(cuts)), key=lambda i: cuts.ages()[i])
                    only = CutSet([cuts.cuts[newest]])
                    pruned_this_round += before - 1
                    cuts = only
                else:
                    pruned_this_round += before - len(cuts)
        master_time = time.monotonic() - t_master

        x_hat = master.x_hat
        master_obj = _upper_cost(instance, x_hat) - master.z_hat
        lb = max(lb, master_obj)

        t_sub = time.monotonic()
        rep = evaluate_regret(instance, x_hat, solve_ris)
        sub_time = time.monotonic() - t_sub
        if ub is None or rep.regret < ub:
            ub = rep.regret
            x_best = x_hat

        record = {
            "iteration": iteration,
            "lb": lb,
            "master_objective": master_obj,
            "ub": ub,
            "n_cuts": len(cuts),
            "master_time": master_time,
            "sub_time": sub_time,
            "pruned": pruned_this_round,
            "elapsed": time.monotonic() - t_start,
        }
        trajectory.append(record)
        if on_iteration is not None:
            on_iteration(dict(record))

        if master_obj >= rep.regret - config.epsilon:
            x_best = x_hat
            ub = rep.regret
            return result(OPTIMAL, iteration)

        violation = _adversary_cost(instance, x_hat, rep.witness)
        assert violation < master.z_hat, "new cut must be strictly violated by the master solution"
        assert rep.witness not in cuts, "witness of an unconverged round cannot already be a cut"
        cuts.add(Cut(rep.witness))
        last_x_hat = x_hat

    return result(ITERATION_LIMIT, config.iteration_limit)
