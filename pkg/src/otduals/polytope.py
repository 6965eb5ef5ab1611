"""The set of all optimal dual potentials, represented exactly.

Given one optimal coupling, the optimal duals decompose per component of its
support graph: each component carries a unique anchored base pair, and a full
optimizer is any assembly phi = phi_n + alpha_n, psi = psi_n - alpha_n whose
translation offsets alpha satisfy interval constraints coming from the
cross-component slacks.  Adding a common constant to every alpha_n is the
global translation freedom.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .graphs import (
    ComponentPartition,
    NotOptimalError,
    SupportGraph,
    component_dual,
    connected_components,
    support_graph,
    union_graph,
)
from .measures import (
    CostMatrix,
    DiscreteMeasure,
    DualPair,
    TransportPlan,
    as_scalar,
    scalar_str,
    transport_cost,
)
from .simplex import solve_transport


class ConstraintViolationError(ValueError):
    """An offset vector violates an interval constraint; carries the pair."""

    def __init__(self, n: int, m: int, value: Fraction, lower: Fraction, upper: Fraction):
        self.pair = (n, m)
        super().__init__(
            f"alpha_{n} - alpha_{m} = {value} outside [{lower}, {upper}]"
        )


@dataclass(frozen=True)
class AlphaConstraint:
    """Interval constraint lower <= alpha_n - alpha_m <= upper (1-based n < m)."""

    n: int
    m: int
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if self.n == self.m:
            raise ValueError("constraint needs two distinct components")
        if self.lower > self.upper:
            raise ValueError(
                f"empty interval [{self.lower}, {self.upper}] for pair "
                f"({self.n}, {self.m}); inputs were not jointly optimal"
            )

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def holds(self, diff: Fraction, strict: bool = False) -> bool:
        if strict:
            return self.lower < diff < self.upper
        return self.lower <= diff <= self.upper


@dataclass(frozen=True)
class DualPolytope:
    """All dual optimizers of one instance.

    ``base_duals[n]`` is the anchored optimal pair of component n (values are
    None outside the component); ``anchors[n]`` is the source index where its
    phi vanishes.  Component 1 (index 0 here) contains the instance anchor
    x0.  ``constraints`` covers every unordered component pair.
    """

    partition: ComponentPartition
    base_duals: tuple[DualPair, ...]
    anchors: tuple[int, ...]
    constraints: tuple[AlphaConstraint, ...]

    def __len__(self) -> int:
        return len(self.partition)

    def constraint_for(self, n: int, m: int) -> AlphaConstraint:
        """The stored constraint for an unordered 1-based pair."""
        lo, hi = min(n, m), max(n, m)
        for con in self.constraints:
            if (con.n, con.m) == (lo, hi):
                return con
        raise KeyError(f"no constraint for pair ({n}, {m})")

    def to_json(self) -> dict:
        comps = []
        for (xs, ys), pair, anchor in zip(
            self.partition.components, self.base_duals, self.anchors
        ):
            comps.append(
                {
                    "x": [i + 1 for i in xs],
                    "y": [j + 1 for j in ys],
                    "anchor": anchor + 1,
                    "phi": {str(i + 1): scalar_str(pair.phi[i]) for i in xs},
                    "psi": {str(j + 1): scalar_str(pair.psi[j]) for j in ys},
                }
            )
        cons = [
            {
                "n": con.n,
                "m": con.m,
                "lower": scalar_str(con.lower),
                "upper": scalar_str(con.upper),
            }
            for con in self.constraints
        ]
        return {"components": comps, "constraints": cons}


def _base_duals_for_partition(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    c: CostMatrix,
    partition: ComponentPartition,
    g: SupportGraph,
    x0_index: int,
):
    """Anchored base pair per component; component 0 anchors at x0."""
    pairs = []
    anchors = []
    for n, comp in enumerate(partition.components):
        anchor = x0_index if n == 0 else min(comp[0])
        pairs.append(component_dual(mu, nu, c, comp, g, anchor))
        anchors.append(anchor)
    return tuple(pairs), tuple(anchors)


def _cross_slack_min(
    c: CostMatrix, base_duals, partition: ComponentPartition, n: int, m: int
) -> Fraction:
    """min over X_n x Y_m of c - phi_n - psi_m (base-dual slack)."""
    xs = partition.components[n][0]
    ys = partition.components[m][1]
    phi_n = base_duals[n].phi
    psi_m = base_duals[m].psi
    return min(c[i, j] - phi_n[i] - psi_m[j] for i in xs for j in ys)


def characterize_duals(
    gamma: TransportPlan,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    c: CostMatrix,
    x0=None,
) -> DualPolytope:
    """Exact parameterization of every optimal dual pair, given one optimal plan."""
    c.check_shape(mu, nu)
    gamma.check_marginals(mu, nu)
    if transport_cost(gamma, c) != solve_transport(mu, nu, c).value:
        raise NotOptimalError("plan does not attain the optimal cost")
    x0_index = 0 if x0 is None else mu.index_of(x0)

    partition = connected_components(support_graph(gamma))
    partition.check_balance(mu, nu)
    partition = partition.reordered_first(partition.component_of_source(x0_index))

    base_duals, anchors = _base_duals_for_partition(
        mu, nu, c, partition, support_graph(gamma), x0_index
    )
    constraints = []
    for n in range(len(partition)):
        for m in range(n + 1, len(partition)):
            upper = _cross_slack_min(c, base_duals, partition, n, m)
            lower = -_cross_slack_min(c, base_duals, partition, m, n)
            constraints.append(AlphaConstraint(n + 1, m + 1, lower, upper))
    return DualPolytope(partition, base_duals, anchors, tuple(constraints))


def assemble_dual(polytope: DualPolytope, alpha: Sequence) -> DualPair:
    """Build the dual pair with the given translation offsets.

    ``alpha`` has one entry per component; differences must satisfy every
    interval constraint (a common shift of all entries is free).
    """
    values = [as_scalar(a) for a in alpha]
    if len(values) != len(polytope):
        raise ValueError(
            f"expected {len(polytope)} offsets, got {len(values)}"
        )
    for con in polytope.constraints:
        diff = values[con.n - 1] - values[con.m - 1]
        if not con.holds(diff):
            raise ConstraintViolationError(con.n, con.m, diff, con.lower, con.upper)

    some_pair = polytope.base_duals[0]
    phi = [None] * len(some_pair.phi)
    psi = [None] * len(some_pair.psi)
    for (xs, ys), pair, a in zip(
        polytope.partition.components, polytope.base_duals, values
    ):
        for i in xs:
            phi[i] = pair.phi[i] + a
        for j in ys:
            psi[j] = pair.psi[j] - a
    return DualPair(tuple(phi), tuple(psi))


def recover_alpha(polytope: DualPolytope, dual: DualPair) -> tuple[Fraction, ...]:
    """Read off the offsets of a full dual pair against the base duals.

    Raises if the pair is not an assembly of the base duals (then it is not
    a dual optimizer of the instance the polytope came from).
    """
    alpha = []
    for (xs, ys), pair, anchor in zip(
        polytope.partition.components, polytope.base_duals, polytope.anchors
    ):
        a = dual.phi[anchor] - pair.phi[anchor]
        for i in xs:
            if dual.phi[i] != pair.phi[i] + a:
                raise NotOptimalError("pair does not restrict to the component optimum")
        for j in ys:
            if dual.psi[j] != pair.psi[j] - a:
                raise NotOptimalError("pair does not restrict to the component optimum")
        alpha.append(a)
    return tuple(alpha)


def is_dual_unique(polytope: DualPolytope) -> bool:
    """Whether the instance has a single dual optimizer (up to translation).

    Equivalent to connectivity of the union of all optimal supports: merging
    components across zero-width constraints must leave a single class.
    """
    n_comp = len(polytope)
    parent = list(range(n_comp))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for con in polytope.constraints:
        if con.width == 0:
            ra, rb = find(con.n - 1), find(con.m - 1)
            if ra != rb:
                parent[ra] = rb
    return len({find(a) for a in range(n_comp)}) == 1


def is_dual_optimizer(
    candidate: DualPair,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    c: CostMatrix,
    union_g: SupportGraph,
) -> bool:
    """Feasible and tight on every edge of the union of optimal supports."""
    c.check_shape(mu, nu)
    if not candidate.is_feasible(c):
        return False
    return all(
        candidate.phi[i] + candidate.psi[j] == c[i, j] for (i, j) in union_g.edges
    )


def strict_interior_test(polytope: DualPolytope, alpha: Sequence) -> bool:
    """True iff every interval constraint holds strictly at alpha.

    When true, the assembled pair is tight exactly on the union of optimal
    supports; at an interval endpoint some off-support cell becomes tight.
    """
    values = [as_scalar(a) for a in alpha]
    return all(
        con.holds(values[con.n - 1] - values[con.m - 1], strict=True)
        for con in polytope.constraints
    )
