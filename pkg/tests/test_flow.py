import random

import pytest

from riselect import INFEASIBLE, OPTIMAL, make_instance, midpoint_scenario, sample_extreme_scenario
from riselect.deterministic import brute_force_ris, classify, solve_bnb, solve_greedy
from riselect.flow import build_network, min_cost_max_flow, network_to_dot, solve_via_flow
from riselect.generator import GenParams, generate_instance

from util import EXAMPLE1_OPTIMUM, example1_instance


def _singleton_classes(inst):
    return tuple((ref,) for ref in inst.item_refs())


def test_build_network_example1_shape():
    inst = example1_instance()
    sc = classify(inst)
    net = build_network(inst, midpoint_scenario(inst), sc.classes)
    # 3 sources + 9 item nodes + 6 class nodes + terminal
    assert net.node_count == 19
    assert len(net.arcs) == 24
    assert net.supplies == ((0, 2), (1, 2), (2, 2))
    by_kind = {}
    for arc in net.arcs:
        key = (arc.tail < 3, net.labels[arc.head].startswith("class"), arc.head == net.terminal)
        by_kind[key] = by_kind.get(key, 0) + 1
    assert by_kind[(True, False, False)] == 9  # source -> item, carries cost
    assert by_kind[(False, True, False)] == 9  # item -> class
    assert by_kind[(False, False, True)] == 6  # class -> terminal


def test_build_network_unconstrained_singletons():
    inst = make_instance([(1, [(1, 1), (2, 2)])])
    net = build_network(inst, midpoint_scenario(inst), _singleton_classes(inst))
    # 1 source + 2 items + 2 classes + terminal
    assert net.node_count == 6
    assert len(net.arcs) == 6


def test_build_network_pair_shares_class():
    inst = make_instance([(1, [(1, 1), (2, 2)]), (1, [(3, 3)])], [(0, 0, 1, 0)])
    sc = classify(inst)
    net = build_network(inst, midpoint_scenario(inst), sc.classes)
    heads = {}
    for ref, arc_idx in net.item_arcs.items():
        item_node = net.arcs[arc_idx].head
        (class_arc,) = [a for a in net.arcs if a.tail == item_node]
        heads[(ref.set_index, ref.item_index)] = class_arc.head
    assert heads[(0, 0)] == heads[(1, 0)]
    assert heads[(0, 1)] != heads[(0, 0)]


def test_build_network_rejects_non_clique_partition():
    inst = make_instance([(1, [(1, 1), (2, 2)]), (1, [(3, 3)])], [(0, 0, 1, 0)])
    bad = (tuple(inst.item_refs()),)  # one class holding all items
    with pytest.raises(ValueError):
        build_network(inst, midpoint_scenario(inst), bad)
    with pytest.raises(ValueError):
        build_network(inst, midpoint_scenario(inst), ((next(inst.item_refs()),),))


def test_min_cost_max_flow_singleton_classes_match_greedy():
    inst = make_instance([(2, [(3, 3), (1, 1), (2, 2)]), (1, [(4, 4), (6, 6)])])
    scen = midpoint_scenario(inst)
    net = build_network(inst, scen, _singleton_classes(inst))
    res = min_cost_max_flow(net)
    assert res.flow_value == 3
    assert res.total_cost == solve_greedy(inst, scen).value


def test_min_cost_max_flow_example1_cost():
    inst = example1_instance()
    scen = midpoint_scenario(inst)
    net = build_network(inst, scen, classify(inst).classes)
    res = min_cost_max_flow(net)
    assert res.flow_value == 6
    assert res.total_cost == EXAMPLE1_OPTIMUM


def test_min_cost_max_flow_zero_supply():
    from riselect.flow import FlowNetwork, Arc

    net = FlowNetwork(
        node_count=3,
        arcs=(Arc(0, 1, 1, 5), Arc(1, 2, 1, 0)),
        supplies=((0, 0),),
        terminal=2,
        item_arcs={},
        labels=("s", "i", "t"),
    )
    res = min_cost_max_flow(net)
    assert (res.flow_value, res.total_cost) == (0, 0)


def test_flow_integrality_and_class_capacity():
    rng = random.Random(3)
    for _ in range(25):
        params = GenParams(
            m=rng.randint(2, 4),
            r=rng.randint(2, 5),
            p=rng.randint(1, 2),
            k_pairs=rng.randint(0, 6),
            mode="transitive",
            rng_seed=rng.randrange(1 << 30),
        )
        inst = generate_instance(params)
        scen = sample_extreme_scenario(inst, rng)
        sc = classify(inst)
        classes = sc.classes or _singleton_classes(inst)
        net = build_network(inst, scen, classes)
        res = min_cost_max_flow(net)
        for arc, flow in zip(net.arcs, res.arc_flows):
            assert flow in (0, 1) and 0 <= flow <= arc.capacity
        sol = solve_via_flow(inst, scen)
        if sol.status == OPTIMAL:
            class_of = {ref: k for k, cls in enumerate(classes) for ref in cls}
            used = [class_of[ref] for ref in sol.selection.items()]
            assert len(used) == len(set(used))


def test_solve_via_flow_matches_oracles():
    inst = example1_instance()
    scen = midpoint_scenario(inst)
    assert solve_via_flow(inst, scen).value == solve_bnb(inst, scen).value
    assert solve_via_flow(inst, scen).value == brute_force_ris(inst, scen).value


def test_solve_via_flow_infeasible_class_capacity():
    # both items of the only set share a class but the quota needs two
    inst = make_instance([(2, [(1, 1), (2, 2)]), (1, [(1, 1), (1, 1)])],
                         [(0, 0, 0, 1)])
    assert solve_via_flow(inst, midpoint_scenario(inst)).status == INFEASIBLE
    assert brute_force_ris(inst, midpoint_scenario(inst)).status == INFEASIBLE


def test_solve_via_flow_unconstrained_matches_greedy():
    inst = make_instance([(2, [(3, 3), (1, 1), (2, 2)])])
    scen = midpoint_scenario(inst)
    assert solve_via_flow(inst, scen).value == solve_greedy(inst, scen).value


def test_solve_via_flow_rejects_general():
    inst = make_instance(
        [(1, [(1, 1)] * 2)] * 3,
        [(0, 0, 1, 0), (1, 0, 2, 0)],
    )
    with pytest.raises(ValueError):
        solve_via_flow(inst, midpoint_scenario(inst))


def test_flow_equivalence_with_brute_force_on_clique_instances():
    rng = random.Random(99)
    for _ in range(60):
        params = GenParams(
            m=rng.randint(2, 4),
            r=rng.randint(2, 5),
            p=rng.randint(1, 2),
            k_pairs=rng.randint(0, 6),
            mode="transitive",
            rng_seed=rng.randrange(1 << 30),
        )
        inst = generate_instance(params)
        scen = sample_extreme_scenario(inst, rng)
        fl = solve_via_flow(inst, scen)
        bf = brute_force_ris(inst, scen)
        assert (fl.status, fl.value) == (bf.status, bf.value)


def test_cost_invariant_under_class_order_permutation():
    inst = example1_instance()
    scen = midpoint_scenario(inst)
    classes = list(classify(inst).classes)
    base = min_cost_max_flow(build_network(inst, scen, tuple(classes))).total_cost
    rng = random.Random(1)
    for _ in range(5):
        rng.shuffle(classes)
        permuted = min_cost_max_flow(build_network(inst, scen, tuple(classes)))
        assert permuted.total_cost == base


def test_network_to_dot_mentions_every_arc():
    inst = example1_instance()
    net = build_network(inst, midpoint_scenario(inst), classify(inst).classes)
    dot = network_to_dot(net)
    assert dot.startswith("digraph")
    assert dot.count("->") == len(net.arcs)
