import itertools
import random

import pytest

from riselect import (
    Instance,
    Scenario,
    Selection,
    as_degenerate_instance,
    cost_of,
    evaluate_regret,
    instance_from_json,
    instance_to_json,
    is_feasible,
    make_instance,
    midpoint_scenario,
    sample_extreme_scenario,
    selection_from_json,
    selection_to_json,
    validate,
    worst_case_scenario,
)
from riselect.deterministic import brute_force_ris, solve_greedy

from util import EXAMPLE1_PAIRS, example1_instance, example1_interval_instance


def test_validate_quota_exceeds_size():
    inst = make_instance([(4, [(1, 2), (1, 2), (1, 2)])])
    report = validate(inst)
    assert any("exceeds set size" in e for e in report.errors)


def test_validate_same_set_pair_is_warning_only():
    inst = make_instance([(1, [(1, 1), (2, 2)]), (1, [(1, 1)])], [(0, 0, 0, 1)])
    report = validate(inst)
    assert report.ok
    assert any("same set" in w for w in report.warnings)


def test_validate_example1_clean():
    report = validate(example1_interval_instance())
    assert report.errors == () and report.warnings == ()


def test_validate_bad_interval_and_index():
    inst = make_instance([(1, [(5, 2), (-1, 3)])], [(0, 0, 0, 9)])
    report = validate(inst)
    assert any("lower bound" in e for e in report.errors)
    assert any("negative" in e for e in report.errors)
    assert any("outside the instance" in e for e in report.errors)


def test_pairs_canonicalized_and_deduplicated():
    inst = make_instance(
        [(1, [(1, 1), (1, 1)]), (1, [(1, 1), (1, 1)])],
        [(1, 0, 0, 1), (0, 1, 1, 0), (0, 1, 1, 0)],
    )
    assert len(inst.forbidden) == 1
    pair = inst.forbidden[0]
    assert (pair.a.set_index, pair.a.item_index) == (0, 1)
    assert (pair.b.set_index, pair.b.item_index) == (1, 0)


def test_is_feasible_no_constraints():
    inst = make_instance([(2, [(1, 1)] * 3), (1, [(1, 1)] * 2)])
    assert is_feasible(inst, Selection.of([[0, 1], [1]]))


def test_is_feasible_forbidden_pair_rejected():
    # pair (0,0)-(1,0) fully selected makes the selection infeasible
    inst = example1_instance()
    x = Selection.of([[0, 1], [0, 1], [1, 2]])
    assert not is_feasible(inst, x)
    # avoiding both violated pairs restores feasibility
    assert is_feasible(inst, Selection.of([[1, 2], [0, 2], [1, 2]]))


def test_is_feasible_quota_violation():
    inst = example1_instance()
    assert not is_feasible(inst, Selection.of([[0], [0, 1], [1, 2]]))


def test_is_feasible_matches_direct_constraint_check():
    # all bit-vectors of a 10-item instance against a literal constraint check
    inst = make_instance(
        [(1, [(1, 1)] * 3), (2, [(1, 1)] * 4), (2, [(1, 1)] * 3)],
        [(0, 0, 1, 1), (1, 2, 2, 0), (0, 2, 2, 2), (1, 0, 1, 1)],
    )
    sizes = [s.size for s in inst.sets]
    refs = [(i, j) for i, r in enumerate(sizes) for j in range(r)]
    for bits in itertools.product((0, 1), repeat=len(refs)):
        chosen = [[] for _ in sizes]
        for (i, j), bit in zip(refs, bits):
            if bit:
                chosen[i].append(j)
        sel = Selection.of(chosen)
        quotas_ok = all(len(sel.chosen[i]) == inst.sets[i].quota for i in range(inst.m))
        pairs_ok = all(
            not (sel.contains(p.a) and sel.contains(p.b)) for p in inst.forbidden
        )
        assert is_feasible(inst, sel) == (quotas_ok and pairs_ok)


def test_worst_case_scenario_vertex_of_box():
    inst = example1_interval_instance()
    x = Selection.of([[1, 2], [0, 1], [1, 2]])
    scen = worst_case_scenario(inst, x)
    for ref in inst.item_refs():
        iv = inst.interval(ref)
        expected = iv.hi if x.contains(ref) else iv.lo
        assert scen.cost(ref) == expected
        assert scen.cost(ref) in (iv.lo, iv.hi)


def test_worst_case_scenario_all_zero_selection():
    inst = example1_interval_instance()
    scen = worst_case_scenario(inst, Selection.of([[], [], []]))
    for ref in inst.item_refs():
        assert scen.cost(ref) == inst.interval(ref).lo


def test_worst_case_scenario_degenerate():
    inst = example1_instance()
    a = worst_case_scenario(inst, Selection.of([[0, 1], [0, 1], [0, 1]]))
    b = worst_case_scenario(inst, Selection.of([[], [], []]))
    assert a == b


def test_cost_of():
    scen = Scenario(((3, 1, 2),))
    assert cost_of(scen, Selection.of([[]])) == 0
    assert cost_of(scen, Selection.of([[0, 2]])) == 5
    with pytest.raises(ValueError):
        cost_of(scen, Selection.of([[0], [1]]))


def test_cost_of_matches_direct_sum():
    inst = example1_interval_instance()
    rng = random.Random(5)
    scen = sample_extreme_scenario(inst, rng)
    x = Selection.of([[1, 2], [0, 1], [1, 2]])
    direct = sum(scen.costs[i][j] for i, js in enumerate(x.chosen) for j in js)
    assert cost_of(scen, x) == direct


def test_evaluate_regret_degenerate_zero():
    inst = example1_instance()
    opt = brute_force_ris(inst, midpoint_scenario(inst))
    report = evaluate_regret(inst, opt.selection)
    assert report.regret == 0


def test_evaluate_regret_degenerate_suboptimal_gap():
    inst = make_instance([(1, [(4, 4), (9, 9)])])
    report = evaluate_regret(inst, Selection.of([[1]]))
    assert report.regret == 5
    assert report.witness == Selection.of([[0]])


def test_evaluate_regret_requires_feasible():
    inst = example1_instance()
    with pytest.raises(ValueError):
        evaluate_regret(inst, Selection.of([[0], [0, 1], [1, 2]]))


def test_regret_nonnegative_on_random_selections():
    inst = example1_interval_instance()
    rng = random.Random(11)
    for _ in range(25):
        chosen = [rng.sample(range(s.size), s.quota) for s in inst.sets]
        x = Selection.of(chosen)
        if not is_feasible(inst, x):
            continue
        assert evaluate_regret(inst, x).regret >= 0


def test_midpoint_scenario_rounding():
    inst = make_instance([(1, [(2, 6), (1, 100), (7, 7)])])
    assert midpoint_scenario(inst).costs == ((4, 50, 7),)


def test_sample_extreme_scenario_is_vertex_and_deterministic():
    inst = example1_interval_instance()
    a = sample_extreme_scenario(inst, random.Random(42))
    b = sample_extreme_scenario(inst, random.Random(42))
    assert a == b
    for ref in inst.item_refs():
        iv = inst.interval(ref)
        assert a.cost(ref) in (iv.lo, iv.hi)


def test_sample_extreme_scenario_degenerate_unique():
    inst = example1_instance()
    scen = sample_extreme_scenario(inst, random.Random(0))
    assert scen == midpoint_scenario(inst)


def test_sample_extreme_scenario_balance():
    inst = make_instance([(1, [(0, 1), (0, 1)])])
    rng = random.Random(2024)
    ones = sum(sample_extreme_scenario(inst, rng).costs[0][0] for _ in range(10_000))
    assert 0.48 <= ones / 10_000 <= 0.52


def test_instance_json_round_trip():
    inst = example1_interval_instance()
    again = instance_from_json(instance_to_json(inst))
    assert again == inst
    # and a second serialization is byte-identical
    assert instance_to_json(again) == instance_to_json(inst)


def test_instance_json_format_shape():
    import json

    doc = json.loads(instance_to_json(example1_instance()))
    assert set(doc) == {"sets", "forbidden"}
    assert doc["sets"][0]["p"] == 2
    assert doc["sets"][0]["items"][0] == [3, 3]
    assert sorted(doc["forbidden"]) == sorted([list(q) for q in EXAMPLE1_PAIRS])


def test_selection_json_round_trip():
    x = Selection.of([[2, 0], [1], []])
    assert selection_from_json(selection_to_json(x)) == x
    assert x.chosen == ((0, 2), (1,), ())


def test_malformed_json_raises_value_error():
    with pytest.raises(ValueError):
        instance_from_json('{"sets": [{"items": [[1, 2]]}]}')
    with pytest.raises(ValueError):
        selection_from_json('{"nope": []}')


def test_degenerate_scenario_travels_as_instance():
    inst = example1_interval_instance()
    scen = midpoint_scenario(inst)
    frozen = as_degenerate_instance(inst, scen)
    assert midpoint_scenario(frozen) == scen
    assert frozen.forbidden == inst.forbidden
    round_trip = instance_from_json(instance_to_json(frozen))
    assert round_trip == frozen


def test_greedy_agrees_with_scenario_of_frozen_instance():
    inst = make_instance([(2, [(3, 3), (1, 1), (2, 2)])])
    sol = solve_greedy(inst, midpoint_scenario(inst))
    assert sol.value == 3
    assert sol.selection == Selection.of([[1, 2]])
