"""Hardness-construction instance builders, used as structured test factories.

Two constructions are provided: graphs map to deterministic selection
instances whose optimum tells whether an independent set of a given size
exists, and quantified 3-DNF formulas map to interval instances whose
min-max regret compares against a threshold Z iff the exists-forall question
is positive. Both come with brute-force ground-truth evaluators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, NamedTuple, Optional, Sequence

from .model import Instance, ItemRef, make_instance

X_ITEM = "x"
Y_ITEM = "y"
SPECIAL_ITEM = "special"


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    n: int
    edges: frozenset[tuple[int, int]]

    @classmethod
    def of(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        canon = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) outside vertex range")
            canon.add((min(u, v), max(u, v)))
        return cls(n, frozenset(canon))


class Literal(NamedTuple):
    """One literal of a clause: variable kind ('x' or 'y'), 0-based index, polarity."""

    kind: str
    index: int
    positive: bool


@dataclass(frozen=True)
class QuantifiedDnf:
    """DNF over existential x-variables and universal y-variables.

    Every clause is a conjunction of exactly three literals.
    """

    x_count: int
    y_count: int
    clauses: tuple[tuple[Literal, ...], ...]

    def __post_init__(self):
        for c, clause in enumerate(self.clauses):
            if len(clause) != 3:
                raise ValueError(f"clause {c} has {len(clause)} literals, expected 3")
            for lit in clause:
                if lit.kind not in ("x", "y"):
                    raise ValueError(f"clause {c}: unknown literal kind {lit.kind!r}")
                bound = self.x_count if lit.kind == "x" else self.y_count
                if not 0 <= lit.index < bound:
                    raise ValueError(f"clause {c}: literal index {lit.index} out of range")


@dataclass(frozen=True)
class ItemRole:
    """Gadget role of one item in a formula-derived instance.

    ``assignment`` lists (variable index, value) pairs, sorted by variable,
    and is empty for special items.
    """

    kind: str
    assignment: tuple[tuple[int, bool], ...] = ()


@dataclass(frozen=True)
class DnfReductionArtifacts:
    instance: Instance
    B: int
    Z: int
    item_roles: dict[ItemRef, ItemRole] = field(compare=False)


def independent_set_to_ris(g: Graph, k: int) -> tuple[Instance, int]:
    """Instance whose optimum is at most n - k iff the graph has an
    independent set of size at least k.

    One set per vertex holding a zero-cost vertex item and a unit-cost dummy,
    quota one; every edge forbids the two vertex items. All intervals are
    degenerate, so the instance is deterministic.
    """
    if not 1 <= k <= g.n:
        raise ValueError(f"k={k} outside 1..{g.n}")
    sets = [(1, [(0, 0), (1, 1)]) for _ in range(g.n)]
    pairs = [(u, 0, v, 0) for u, v in sorted(g.edges)]
    return make_instance(sets, pairs), g.n - k


def _assignments_conflict(
    a: tuple[tuple[int, bool], ...], b: tuple[tuple[int, bool], ...]
) -> bool:
    bmap = dict(b)
    return any(var in bmap and bmap[var] != val for var, val in a)


def dnf_to_iris(phi: QuantifiedDnf, B: int) -> DnfReductionArtifacts:
    """Interval instance encoding the exists-forall question about ``phi``.

    One set per clause with quota one. Each set holds an item for the
    clause's satisfying x-assignment (interval [0, B], absent when the clause
    has no x-literal), one item per y-assignment falsifying the clause
    (interval [0, B*B]), and one special item pinned at B + 1. Items of two
    sets whose partial assignments disagree on a shared variable of the same
    kind form a forbidden pair. The formula is a positive instance iff the
    min-max regret is at most Z = (m-1)*B + m - 1.
    """
    m = len(phi.clauses)
    if B <= m:
        raise ValueError(f"B={B} must exceed the clause count {m}")

    x_assigns: list[Optional[tuple[tuple[int, bool], ...]]] = []
    y_falsifying: list[list[tuple[tuple[int, bool], ...]]] = []
    for c, clause in enumerate(phi.clauses):
        xlits = {}
        ylits = {}
        for lit in clause:
            store = xlits if lit.kind == "x" else ylits
            if lit.index in store and store[lit.index] != lit.positive:
                raise ValueError(f"clause {c} contradicts itself on {lit.kind}{lit.index}")
            store[lit.index] = lit.positive
        if not ylits:
            raise ValueError(f"clause {c} has no y-literal")
        x_assigns.append(tuple(sorted(xlits.items())) if xlits else None)
        yvars = sorted(ylits)
        satisfying = tuple(ylits[v] for v in yvars)
        falsifying = []
        for values in product((False, True), repeat=len(yvars)):
            if values != satisfying:
                falsifying.append(tuple(zip(yvars, values)))
        y_falsifying.append(falsifying)

    sets = []
    roles: dict[ItemRef, ItemRole] = {}
    for c in range(m):
        items: list[tuple[int, int]] = []
        if x_assigns[c] is not None:
            roles[ItemRef(c, len(items))] = ItemRole(X_ITEM, x_assigns[c])
            items.append((0, B))
        for assign in y_falsifying[c]:
            roles[ItemRef(c, len(items))] = ItemRole(Y_ITEM, assign)
            items.append((0, B * B))
        roles[ItemRef(c, len(items))] = ItemRole(SPECIAL_ITEM)
        items.append((B + 1, B + 1))
        sets.append((1, items))

    pairs = []
    by_ref = sorted(roles.items())
    for (ref_a, role_a), (ref_b, role_b) in combinations(by_ref, 2):
        if ref_a.set_index == ref_b.set_index:
            continue
        if role_a.kind != role_b.kind or role_a.kind == SPECIAL_ITEM:
            continue
        if _assignments_conflict(role_a.assignment, role_b.assignment):
            pairs.append((ref_a.set_index, ref_a.item_index, ref_b.set_index, ref_b.item_index))

    instance = make_instance(sets, pairs)
    return DnfReductionArtifacts(
        instance=instance,
        B=B,
        Z=(m - 1) * B + m - 1,
        item_roles=roles,
    )


def check_dnf(phi: QuantifiedDnf, x_assign: Sequence[bool], y_assign: Sequence[bool]) -> bool:
    """DNF truth value: some clause has all its literals true."""
    if len(x_assign) != phi.x_count or len(y_assign) != phi.y_count:
        raise ValueError("assignment lengths do not match the variable counts")
    for clause in phi.clauses:
        ok = True
        for lit in clause:
            value = x_assign[lit.index] if lit.kind == "x" else y_assign[lit.index]
            if value != lit.positive:
                ok = False
                break
        if ok:
            return True
    return False


def exists_forall(phi: QuantifiedDnf) -> bool:
    """Brute-force exists-forall evaluation; test scale only (2^(s+t) work)."""
    for xs in product((False, True), repeat=phi.x_count):
        if all(check_dnf(phi, xs, ys) for ys in product((False, True), repeat=phi.y_count)):
            return True
    return False


# --- text formats -----------------------------------------------------------


def parse_graph(text: str) -> Graph:
    """DIMACS-like edge list: optional 'c' comments, optional 'p [edge] n [m]'
    header, edges as 'e u v' or bare 'u v' with 1-based vertices."""
    declared_n: Optional[int] = None
    edges: list[tuple[int, int]] = []
    max_vertex = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] == "p":
            numbers = [t for t in tokens[1:] if t.lstrip("-").isdigit()]
            if not numbers:
                raise ValueError(f"line {lineno}: malformed problem line {line!r}")
            declared_n = int(numbers[0])
            continue
        if tokens[0] == "e":
            tokens = tokens[1:]
        if len(tokens) != 2:
            raise ValueError(f"line {lineno}: expected an edge, got {line!r}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: non-integer vertex in {line!r}") from exc
        if u < 1 or v < 1:
            raise ValueError(f"line {lineno}: vertices are 1-based, got {line!r}")
        max_vertex = max(max_vertex, u, v)
        edges.append((u - 1, v - 1))
    n = declared_n if declared_n is not None else max_vertex
    if max_vertex > n:
        raise ValueError(f"edge references vertex {max_vertex} beyond declared count {n}")
    return Graph.of(n, edges)


def parse_literal(token: str) -> Literal:
    positive = True
    body = token
    if body.startswith(("+", "-", "!")):
        positive = body[0] == "+"
        body = body[1:]
    if len(body) < 2 or body[0] not in ("x", "y") or not body[1:].isdigit():
        raise ValueError(f"malformed literal {token!r}; expected forms like x1, -y2")
    index = int(body[1:])
    if index < 1:
        raise ValueError(f"literal {token!r}: variable indices are 1-based")
    return Literal(body[0], index - 1, positive)


def parse_dnf(text: str) -> QuantifiedDnf:
    """One clause per line, three whitespace-separated literals like
    'x1 -y1 y2'. Variable counts are inferred from the largest index used."""
    clauses: list[tuple[Literal, ...]] = []
    x_count = 0
    y_count = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("c "):
            continue
        tokens = line.split()
        if len(tokens) != 3:
            raise ValueError(f"line {lineno}: a clause needs exactly 3 literals, got {line!r}")
        lits = tuple(parse_literal(t) for t in tokens)
        for lit in lits:
            if lit.kind == "x":
                x_count = max(x_count, lit.index + 1)
            else:
                y_count = max(y_count, lit.index + 1)
        clauses.append(lits)
    if not clauses:
        raise ValueError("formula has no clauses")
    return QuantifiedDnf(x_count=x_count, y_count=y_count, clauses=tuple(clauses))
