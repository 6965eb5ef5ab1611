"""Bipartite support graphs of couplings and their component structure.

The support graph of a coupling has an edge wherever the plan carries mass.
The union over all optimal couplings' support graphs (the "union graph") is
what decides whether the dual optimizer is unique: it is unique exactly when
that graph is connected.  Given one optimal plan and one optimal dual pair,
the union graph is computable without enumerating optimizers: components of
the plan's support graph merge whenever the cross-component slack vanishes
in both directions, and within each merged component the edges are the cells
where the dual constraint is tight.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .measures import (
    CostMatrix,
    DiscreteMeasure,
    DualPair,
    InfeasibleInstanceError,
    TransportPlan,
    is_complementary,
)


class NotOptimalError(ValueError):
    """Inputs promised to be optimal fail a complementarity check."""


@dataclass(frozen=True)
class SupportGraph:
    """Bipartite graph on source atoms (left) and target atoms (right).

    ``edges`` holds 0-based (source index, target index) pairs; the label
    tuples are kept for serialization.
    """

    left: tuple
    right: tuple
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for (i, j) in self.edges:
            if not (0 <= i < len(self.left) and 0 <= j < len(self.right)):
                raise ValueError(f"edge ({i}, {j}) out of range")

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.left), len(self.right)

    def is_connected(self) -> bool:
        return len(connected_components(self).components) == 1

    def to_json(self) -> dict:
        return {
            "left": list(self.left),
            "right": list(self.right),
            "edges": sorted([self.left[i], self.right[j]] for (i, j) in self.edges),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SupportGraph":
        left = tuple(data["left"])
        right = tuple(data["right"])
        lx = {label: i for i, label in enumerate(left)}
        ly = {label: j for j, label in enumerate(right)}
        edges = frozenset((lx[a], ly[b]) for a, b in data["edges"])
        return cls(left, right, edges)


@dataclass(frozen=True)
class ComponentPartition:
    """Connected components as (source indices, target indices) pairs.

    Components are ordered by their smallest source index; indices within a
    component are sorted.  For graphs built from couplings every atom carries
    mass, hence an edge, so the parts cover both sides.
    """

    components: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __len__(self) -> int:
        return len(self.components)

    def component_of_source(self, i: int) -> int:
        for n, (xs, _) in enumerate(self.components):
            if i in xs:
                return n
        raise KeyError(f"source index {i} in no component")

    def check_balance(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
        for xs, ys in self.components:
            if mu.mass_of(xs) != nu.mass_of(ys):
                raise AssertionError(
                    "component masses differ between the marginals"
                )

    def reordered_first(self, n: int) -> "ComponentPartition":
        """Move component n to the front, keeping the others' order."""
        comps = list(self.components)
        first = comps.pop(n)
        return ComponentPartition(tuple([first] + comps))


def support_graph(gamma: TransportPlan) -> SupportGraph:
    """Edges at exactly the cells where the plan is strictly positive."""
    m, n = gamma.shape
    return SupportGraph(
        tuple(range(1, m + 1)), tuple(range(1, n + 1)), gamma.support()
    )


def _neighbors(g: SupportGraph):
    m, n = g.shape
    rows = [[] for _ in range(m)]
    cols = [[] for _ in range(n)]
    for (i, j) in g.edges:
        rows[i].append(j)
        cols[j].append(i)
    return rows, cols


def connected_components(g: SupportGraph) -> ComponentPartition:
    """Component partition of the vertex set, isolated vertices included."""
    m, n = g.shape
    rows, cols = _neighbors(g)
    seen_x = [False] * m
    seen_y = [False] * n
    comps = []
    for start in range(m):
        if seen_x[start]:
            continue
        xs, ys = [], []
        queue = deque([("x", start)])
        seen_x[start] = True
        while queue:
            side, idx = queue.popleft()
            if side == "x":
                xs.append(idx)
                for j in rows[idx]:
                    if not seen_y[j]:
                        seen_y[j] = True
                        queue.append(("y", j))
            else:
                ys.append(idx)
                for i in cols[idx]:
                    if not seen_x[i]:
                        seen_x[i] = True
                        queue.append(("x", i))
        comps.append((tuple(sorted(xs)), tuple(sorted(ys))))
    for j in range(n):
        if not seen_y[j]:
            comps.append(((), (j,)))
    # order by smallest source index; source-free components go last
    comps.sort(key=lambda comp: comp[0][0] if comp[0] else m + comp[1][0])
    return ComponentPartition(tuple(comps))


def connected_ordering(g: SupportGraph, root: tuple[str, int]) -> list[tuple[str, int]]:
    """BFS vertex ordering whose every prefix induces a connected subgraph.

    Vertices are ("x", i) / ("y", j) index pairs; the graph must be
    connected and contain the root.
    """
    side, idx = root
    m, n = g.shape
    if side not in ("x", "y") or not (0 <= idx < (m if side == "x" else n)):
        raise ValueError(f"root {root!r} not a vertex of the graph")
    rows, cols = _neighbors(g)
    order = [root]
    seen = {root}
    queue = deque([root])
    while queue:
        side, idx = queue.popleft()
        nbrs = (
            [("y", j) for j in sorted(rows[idx])]
            if side == "x"
            else [("x", i) for i in sorted(cols[idx])]
        )
        for v in nbrs:
            if v not in seen:
                seen.add(v)
                order.append(v)
                queue.append(v)
    if len(order) != m + n:
        raise InfeasibleInstanceError("graph is disconnected")
    return order


def component_dual(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    c: CostMatrix,
    component: tuple[tuple[int, ...], tuple[int, ...]],
    g: SupportGraph,
    x_anchor: int,
) -> DualPair:
    """The unique optimal potentials of the problem restricted to a component.

    Propagates phi(x) + psi(y) = c(x, y) along the component's edges from the
    anchor (phi(anchor) = 0).  The graph must restrict to a connected subgraph
    on the component whose edges all support some restricted optimal plan.
    Values for atoms outside the component are left as None.
    """
    xs, ys = component
    if x_anchor not in xs:
        raise ValueError("anchor is not a source atom of the component")
    mu.mass_of(xs)  # raises on bad indices
    xset, yset = set(xs), set(ys)
    rows, cols = _neighbors(g)
    phi = {x_anchor: Fraction(0)}
    psi: dict[int, Fraction] = {}
    queue = deque([("x", x_anchor)])
    while queue:
        side, idx = queue.popleft()
        if side == "x":
            for j in sorted(rows[idx]):
                if j in yset and j not in psi:
                    psi[j] = c[idx, j] - phi[idx]
                    queue.append(("y", j))
        else:
            for i in sorted(cols[idx]):
                if i in xset and i not in phi:
                    phi[i] = c[i, idx] - psi[idx]
                    queue.append(("x", i))
    if len(phi) != len(xs) or len(psi) != len(ys):
        raise InfeasibleInstanceError("component is not connected in the graph")
    for i in xs:
        for j in ys:
            if phi[i] + psi[j] > c[i, j]:
                raise NotOptimalError(
                    "propagated potentials are infeasible; edges do not all "
                    "support an optimal restricted plan"
                )
    m, n = c.shape
    return DualPair(
        tuple(phi.get(i) for i in range(m)),
        tuple(psi.get(j) for j in range(n)),
    )


def _merged_components(
    partition: ComponentPartition, dual: DualPair, c: CostMatrix
) -> list[list[int]]:
    """Group components of one optimal plan's support graph into the union
    graph's components.

    Two groups belong together when the minimal slack c - phi - psi over
    their cross cells vanishes in both directions (then mass can circulate
    between them in some optimal plan).  Merging is iterated to a fixed
    point since a merge can create new vanishing cross-slacks.
    """

    def min_slack(xs, ys):
        return min(c[i, j] - dual.phi[i] - dual.psi[j] for i in xs for j in ys)

    groups = [[n] for n in range(len(partition))]
    changed = True
    while changed:
        changed = False
        for a in range(len(groups)):
            for b in range(a + 1, len(groups)):
                xs_a = [i for n in groups[a] for i in partition.components[n][0]]
                ys_a = [j for n in groups[a] for j in partition.components[n][1]]
                xs_b = [i for n in groups[b] for i in partition.components[n][0]]
                ys_b = [j for n in groups[b] for j in partition.components[n][1]]
                if min_slack(xs_a, ys_b) == 0 and min_slack(xs_b, ys_a) == 0:
                    groups[a].extend(groups[b])
                    del groups[b]
                    changed = True
                    break
            if changed:
                break
    return groups


def union_graph(
    gamma: TransportPlan,
    dual: DualPair,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    c: CostMatrix,
) -> SupportGraph:
    """Union of the supports of all optimal couplings.

    Needs one optimal plan and one optimal dual pair; complementarity of the
    two is asserted (it certifies joint optimality).
    """
    c.check_shape(mu, nu)
    gamma.check_marginals(mu, nu)
    if not dual.is_feasible(c):
        raise NotOptimalError("dual pair is infeasible")
    if not is_complementary(gamma, dual, c):
        raise NotOptimalError("plan and dual pair are not complementary")

    partition = connected_components(support_graph(gamma))
    groups = _merged_components(partition, dual, c)

    edges = set()
    for group in groups:
        xs = [i for n in group for i in partition.components[n][0]]
        ys = [j for n in group for j in partition.components[n][1]]
        for i in xs:
            for j in ys:
                if dual.phi[i] + dual.psi[j] == c[i, j]:
                    edges.add((i, j))
    m, n = gamma.shape
    return SupportGraph(
        tuple(range(1, m + 1)), tuple(range(1, n + 1)), frozenset(edges)
    )
