"""Min-cost max-flow solver for clique-structured instances.

When every conflict component is a clique, items group into equivalence
classes with at most one selectable item each, and the selection problem
becomes a four-layer flow network: one source per set supplying its quota,
one node per item, one node per class, and a terminal. Source-to-item arcs
carry the item costs; all other arcs are free and unit-capacity.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Optional

from .deterministic import (
    CLIQUE_COMPONENTS,
    GENERAL,
    RisSolution,
    classify,
    clique_partition,
)
from .model import (
    INFEASIBLE,
    OPTIMAL,
    Instance,
    ItemRef,
    Scenario,
    Selection,
    cost_of,
    is_feasible,
)


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    capacity: int
    cost: int


@dataclass(frozen=True)
class FlowNetwork:
    node_count: int
    arcs: tuple[Arc, ...]
    supplies: tuple[tuple[int, int], ...]  # (source node, supply)
    terminal: int
    item_arcs: dict[ItemRef, int]  # item -> index of its source->item arc
    labels: tuple[str, ...]


@dataclass(frozen=True)
class FlowResult:
    flow_value: int
    total_cost: int
    arc_flows: tuple[int, ...]


def build_network(
    instance: Instance,
    scenario: Scenario,
    classes: tuple[tuple[ItemRef, ...], ...],
) -> FlowNetwork:
    """Assemble the flow network for a clique partition of the items.

    Layout: nodes 0..m-1 are per-set sources (supply = quota), then one node
    per item in flat order, then one node per class, then the terminal.
    Rejects ``classes`` that is not a clique partition of all items.
    """
    refs = list(instance.item_refs())
    covered = [ref for cls in classes for ref in cls]
    if sorted(covered) != refs or len(covered) != len(set(covered)):
        raise ValueError("classes do not partition the items of the instance")
    pair_set = set(instance.forbidden)
    for cls in classes:
        for idx in range(len(cls)):
            for jdx in range(idx + 1, len(cls)):
                a, b = sorted((cls[idx], cls[jdx]))
                if (a, b) not in pair_set:
                    raise ValueError(f"class {cls} is not a clique: {a}-{b} is not forbidden")

    m = instance.m
    item_node: dict[ItemRef, int] = {}
    labels = [f"set{i}" for i in range(m)]
    node = m
    for ref in refs:
        item_node[ref] = node
        labels.append(f"item{ref.set_index}.{ref.item_index}")
        node += 1
    class_node: dict[int, int] = {}
    for k in range(len(classes)):
        class_node[k] = node
        labels.append(f"class{k}")
        node += 1
    terminal = node
    labels.append("t")
    node += 1

    class_of: dict[ItemRef, int] = {}
    for k, cls in enumerate(classes):
        for ref in cls:
            class_of[ref] = k

    arcs: list[Arc] = []
    item_arcs: dict[ItemRef, int] = {}
    for ref in refs:
        item_arcs[ref] = len(arcs)
        arcs.append(Arc(ref.set_index, item_node[ref], 1, scenario.cost(ref)))
    for ref in refs:
        arcs.append(Arc(item_node[ref], class_node[class_of[ref]], 1, 0))
    for k in range(len(classes)):
        arcs.append(Arc(class_node[k], terminal, 1, 0))

    supplies = tuple((i, instance.sets[i].quota) for i in range(m))
    return FlowNetwork(
        node_count=node,
        arcs=tuple(arcs),
        supplies=supplies,
        terminal=terminal,
        item_arcs=item_arcs,
        labels=tuple(labels),
    )


def min_cost_max_flow(net: FlowNetwork) -> FlowResult:
    """Successive shortest augmenting paths with node potentials.

    Costs are nonnegative so the initial potentials are zero; Dijkstra on
    reduced costs stays valid afterwards. Integral capacities give integral
    flows. The multi-source network is driven from an internal super source.
    """
    n = net.node_count + 1
    super_source = net.node_count
    to: list[int] = []
    cap: list[int] = []
    cost: list[int] = []
    head: list[list[int]] = [[] for _ in range(n)]

    def add_edge(u: int, v: int, c: int, w: int) -> int:
        eid = len(to)
        to.append(v)
        cap.append(c)
        cost.append(w)
        head[u].append(eid)
        to.append(u)
        cap.append(0)
        cost.append(-w)
        head[v].append(eid + 1)
        return eid

    arc_edge = [add_edge(a.tail, a.head, a.capacity, a.cost) for a in net.arcs]
    for src, supply in net.supplies:
        add_edge(super_source, src, supply, 0)

    INF = float("inf")
    potential = [0] * n
    flow_value = 0
    total_cost = 0
    while True:
        dist = [INF] * n
        parent_edge = [-1] * n
        dist[super_source] = 0
        heap = [(0, super_source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for eid in head[u]:
                if cap[eid] <= 0:
                    continue
                v = to[eid]
                nd = d + cost[eid] + potential[u] - potential[v]
                if nd < dist[v]:
                    dist[v] = nd
                    parent_edge[v] = eid
                    heapq.heappush(heap, (nd, v))
        if dist[net.terminal] == INF:
            break
        for v in range(n):
            if dist[v] < INF:
                potential[v] += dist[v]
        bottleneck = None
        v = net.terminal
        while v != super_source:
            eid = parent_edge[v]
            bottleneck = cap[eid] if bottleneck is None else min(bottleneck, cap[eid])
            v = to[eid ^ 1]
        v = net.terminal
        while v != super_source:
            eid = parent_edge[v]
            cap[eid] -= bottleneck
            cap[eid ^ 1] += bottleneck
            total_cost += bottleneck * cost[eid]
            v = to[eid ^ 1]
        flow_value += bottleneck

    arc_flows = tuple(cap[arc_edge[i] ^ 1] for i in range(len(net.arcs)))
    return FlowResult(flow_value, total_cost, arc_flows)


def solve_via_flow(instance: Instance, scenario: Scenario) -> RisSolution:
    """Polynomial solver for clique-structured (or unconstrained) instances."""
    sc = classify(instance)
    if sc.variant == GENERAL:
        raise ValueError("flow reformulation requires clique-structured conflicts")
    classes = sc.classes
    if classes is None:  # unconstrained: every item is its own class
        classes = tuple((ref,) for ref in instance.item_refs())
    net = build_network(instance, scenario, classes)
    result = min_cost_max_flow(net)
    wanted = sum(s.quota for s in instance.sets)
    if result.flow_value < wanted:
        return RisSolution(INFEASIBLE)
    per_set: list[list[int]] = [[] for _ in range(instance.m)]
    for ref, arc_idx in net.item_arcs.items():
        if result.arc_flows[arc_idx] == 1:
            per_set[ref.set_index].append(ref.item_index)
    selection = Selection.of(per_set)
    assert is_feasible(instance, selection), "flow extraction produced an infeasible selection"
    assert cost_of(scenario, selection) == result.total_cost
    return RisSolution(OPTIMAL, selection, result.total_cost)


def network_to_dot(net: FlowNetwork) -> str:
    """DOT rendering of the network for debugging."""
    lines = ["digraph flow {", "  rankdir=LR;"]
    for node in range(net.node_count):
        lines.append(f'  n{node} [label="{net.labels[node]}"];')
    supply = dict(net.supplies)
    for node, amount in sorted(supply.items()):
        lines.append(f'  n{node} [xlabel="supply {amount}"];')
    for arc in net.arcs:
        lines.append(f'  n{arc.tail} -> n{arc.head} [label="{arc.capacity}@{arc.cost}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
