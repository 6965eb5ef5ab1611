"""Exact solver for the finite transport linear program.

A transportation-specialized primal simplex over rationals: northwest-corner
start, cycle pivoting on the basis tree, Bland's rule for anti-cycling
(degenerate bases are the norm on instances with tied partial masses, which
are exactly the interesting ones here).  The final basis yields a basic
optimal plan together with complementary dual potentials at no extra cost.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .measures import (
    CostMatrix,
    DimensionMismatchError,
    DiscreteMeasure,
    DualPair,
    TransportPlan,
)


@dataclass(frozen=True)
class TransportSolution:
    """Joint output of one simplex run: basic plan, basis duals, value."""

    plan: TransportPlan
    u: tuple[Fraction, ...]
    v: tuple[Fraction, ...]
    value: Fraction
    basis: frozenset[tuple[int, int]]

    def dual_pair(self, anchor: int = 0) -> DualPair:
        """Potentials translated so the source potential vanishes at anchor."""
        a = self.u[anchor]
        return DualPair(
            tuple(ui - a for ui in self.u), tuple(vj + a for vj in self.v)
        )


def _northwest_corner(mu_w, nu_w):
    """Initial basic feasible solution; always m + n - 1 basis cells."""
    m, n = len(mu_w), len(nu_w)
    a = list(mu_w)
    b = list(nu_w)
    x = {}
    basis = []
    i = j = 0
    while True:
        basis.append((i, j))
        t = min(a[i], b[j])
        x[(i, j)] = t
        a[i] -= t
        b[j] -= t
        if i == m - 1 and j == n - 1:
            break
        # advance a single index even when both are exhausted, so the basis
        # keeps its spanning-tree (staircase) structure under degeneracy
        if a[i] == 0 and i < m - 1:
            i += 1
        else:
            j += 1
    return x, basis


def _basis_duals(c: CostMatrix, basis, m: int, n: int):
    """Solve u_i + v_j = c_ij on the basis tree, rooted at u_0 = 0."""
    rows_adj = [[] for _ in range(m)]
    cols_adj = [[] for _ in range(n)]
    for (i, j) in basis:
        rows_adj[i].append(j)
        cols_adj[j].append(i)
    u = [None] * m
    v = [None] * n
    u[0] = Fraction(0)
    stack = [("r", 0)]
    while stack:
        side, idx = stack.pop()
        if side == "r":
            for j in rows_adj[idx]:
                if v[j] is None:
                    v[j] = c[idx, j] - u[idx]
                    stack.append(("c", j))
        else:
            for i in cols_adj[idx]:
                if u[i] is None:
                    u[i] = c[i, idx] - v[idx]
                    stack.append(("r", i))
    if any(x is None for x in u) or any(x is None for x in v):
        raise AssertionError("basis does not span all rows and columns")
    return tuple(u), tuple(v)


def _basis_cycle(basis, enter):
    """The unique cycle created by adding `enter` to the basis tree.

    Returns the cells of the tree path from the entering row node to the
    entering column node; together with `enter` they form the cycle.
    """
    i0, j0 = enter
    adj = {}
    for (i, j) in basis:
        adj.setdefault(("r", i), []).append((("c", j), (i, j)))
        adj.setdefault(("c", j), []).append((("r", i), (i, j)))
    start, goal = ("r", i0), ("c", j0)
    parent = {start: None}
    queue = [start]
    while queue:
        node = queue.pop(0)
        if node == goal:
            break
        for nxt, cell in adj.get(node, []):
            if nxt not in parent:
                parent[nxt] = (node, cell)
                queue.append(nxt)
    path = []
    node = goal
    while parent[node] is not None:
        node, cell = parent[node]
        path.append(cell)
    path.reverse()
    return path


def solve_transport(
    mu: DiscreteMeasure, nu: DiscreteMeasure, c: CostMatrix
) -> TransportSolution:
    """Minimize sum c_ij gamma_ij over couplings of (mu, nu), exactly."""
    c.check_shape(mu, nu)
    m, n = c.shape
    x, basis = _northwest_corner(mu.weights, nu.weights)
    basis_set = set(basis)

    while True:
        u, v = _basis_duals(c, basis_set, m, n)
        # Bland: entering cell = first (row-major) with negative reduced cost
        enter = None
        for i in range(m):
            for j in range(n):
                if (i, j) not in basis_set and c[i, j] - u[i] - v[j] < 0:
                    enter = (i, j)
                    break
            if enter is not None:
                break
        if enter is None:
            break

        path = _basis_cycle(basis_set, enter)
        # path edges alternate signs starting with -, since the first one
        # shares the entering cell's row
        minus = path[0::2]
        plus = [enter] + path[1::2]
        theta = min(x[cell] for cell in minus)
        leave = min(cell for cell in minus if x[cell] == theta)
        for cell in plus:
            x[cell] = x.get(cell, Fraction(0)) + theta
        for cell in minus:
            x[cell] -= theta
        basis_set.remove(leave)
        basis_set.add(enter)
        del x[leave]

    u, v = _basis_duals(c, basis_set, m, n)
    rows = tuple(
        tuple(x.get((i, j), Fraction(0)) for j in range(n)) for i in range(m)
    )
    plan = TransportPlan(rows)
    plan.check_marginals(mu, nu)
    value = sum((c[i, j] * g for (i, j), g in x.items()), Fraction(0))
    return TransportSolution(plan, u, v, value, frozenset(basis_set))


def solve_primal(
    mu: DiscreteMeasure, nu: DiscreteMeasure, c: CostMatrix
) -> TransportPlan:
    """An optimal coupling that is a vertex of the transportation polytope."""
    return solve_transport(mu, nu, c).plan


def solve_dual(
    mu: DiscreteMeasure, nu: DiscreteMeasure, c: CostMatrix, x0=None
) -> DualPair:
    """An optimal dual pair, normalized so phi vanishes at atom x0."""
    anchor = 0 if x0 is None else mu.index_of(x0)
    return solve_transport(mu, nu, c).dual_pair(anchor)
