"""Entropic smoothing and its vanishing-regularization limit.

The smoothed transport problem adds eps * H(gamma) to the cost, where
H(gamma) = sum gamma (ln gamma - 1).  Its dual potentials are unique once
anchored, computable by log-domain scaling iterations, and converge as
eps -> 0 to one particular optimizer of the unsmoothed dual: the centroid.
The centroid is computed exactly here by a greedy spanning tree over the
components of the union of optimal supports, with per-edge offsets given by
half-differences of the cross-component slack minima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .graphs import (
    ComponentPartition,
    NotOptimalError,
    connected_components,
    union_graph,
)
from .measures import (
    CostMatrix,
    DiscreteMeasure,
    DualPair,
    TransportPlan,
    transport_cost,
)
from .polytope import _cross_slack_min
from .simplex import solve_transport


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted before reaching the tolerance."""


class NumericalRangeError(ArithmeticError):
    """Scaling left the representable floating-point range."""


def entropy(gamma) -> float:
    """sum gamma_ij (ln gamma_ij - 1), with 0 ln 0 = 0.

    Accepts a TransportPlan or an array of entries in [0, 1].
    """
    if isinstance(gamma, TransportPlan):
        values = [float(v) for row in gamma.entries for v in row]
    else:
        values = np.asarray(gamma, dtype=float).ravel()
    if any(v < 0 or v > 1 for v in values):
        raise ValueError("entries must lie in [0, 1]")
    return float(sum(v * (math.log(v) - 1.0) for v in values if v > 0.0))


@dataclass(frozen=True)
class EntropicSolution:
    """Converged (or best-effort) output of the scaling iteration."""

    plan: np.ndarray
    phi_eps: np.ndarray
    psi_eps: np.ndarray
    epsilon: float
    iterations: int
    residual: float
    converged: bool

    def cost(self, cost_matrix) -> float:
        c = _as_float_matrix(cost_matrix)
        return float(np.sum(c * self.plan))

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "phi": [float(v) for v in self.phi_eps],
            "psi": [float(v) for v in self.psi_eps],
            "plan": [[float(v) for v in row] for row in self.plan],
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
        }


def _as_float_vector(x) -> np.ndarray:
    if isinstance(x, DiscreteMeasure):
        return np.array([float(w) for w in x.weights])
    return np.asarray(x, dtype=float)


def _as_float_matrix(x) -> np.ndarray:
    if isinstance(x, CostMatrix):
        return np.array([[float(v) for v in row] for row in x.entries])
    return np.asarray(x, dtype=float)


def sinkhorn(
    mu,
    nu,
    c,
    epsilon: float,
    tol: float = 1e-9,
    max_iter: int = 100_000,
    x0=None,
    warm_start: tuple[np.ndarray, np.ndarray] | None = None,
    raise_on_failure: bool = True,
) -> EntropicSolution:
    """Solve the eps-smoothed transport problem by log-domain scaling.

    ``mu``/``nu``/``c`` may be the exact types or plain arrays.  Potentials
    come back normalized so phi vanishes at the anchor (first source atom by
    default; pass a label when ``mu`` is a DiscreteMeasure, else an index).
    The plan satisfies the target marginal exactly and the source marginal
    within ``tol`` in max norm on success; on iteration exhaustion the best
    iterate is returned with ``converged=False`` (or ConvergenceError when
    ``raise_on_failure``).
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    mu_arr = _as_float_vector(mu)
    nu_arr = _as_float_vector(nu)
    c_arr = _as_float_matrix(c)
    if c_arr.shape != (mu_arr.size, nu_arr.size):
        raise ValueError(f"cost is {c_arr.shape}, marginals are {(mu_arr.size, nu_arr.size)}")
    if np.any(mu_arr <= 0) or np.any(nu_arr <= 0):
        raise ValueError("marginals must be strictly positive")
    anchor = 0
    if x0 is not None:
        anchor = mu.index_of(x0) if isinstance(mu, DiscreteMeasure) else int(x0)

    if warm_start is not None:
        phi = np.array(warm_start[0], dtype=float, copy=True)
        psi = np.array(warm_start[1], dtype=float, copy=True)
    else:
        phi = np.zeros(mu_arr.size)
        psi = np.zeros(nu_arr.size)

    phi, psi, iterations, residual = _kernels.sinkhorn_core(
        c_arr, np.log(mu_arr), np.log(nu_arr), float(epsilon), float(tol),
        int(max_iter), phi, psi,
    )
    if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(psi))):
        raise NumericalRangeError(
            f"potentials left floating-point range at epsilon={epsilon}"
        )
    converged = residual <= tol
    if not converged and raise_on_failure:
        raise ConvergenceError(
            f"residual {residual:.3e} > tol {tol:.3e} after {iterations} iterations"
        )
    shift = phi[anchor]
    phi = phi - shift
    psi = psi + shift
    plan = _kernels.plan_from_potentials(c_arr, float(epsilon), phi, psi)
    return EntropicSolution(
        plan, phi, psi, float(epsilon), int(iterations), float(residual), converged
    )


@dataclass(frozen=True)
class CentroidTree:
    """Spanning tree over components selecting the limiting offsets.

    ``deltas[(n, m)]`` is the half-sum and ``l_values[(n, m)]`` the
    half-difference of the two directed cross-slack minima, for 1-based
    component pairs n < m; ``edges`` are the greedily selected tree edges.
    """

    n_components: int
    edges: tuple[tuple[int, int], ...]
    deltas: dict[tuple[int, int], Fraction]
    l_values: dict[tuple[int, int], Fraction]

    def __post_init__(self):
        if len(self.edges) != self.n_components - 1:
            raise AssertionError("not a spanning tree")

    def to_json(self) -> dict:
        return {
            "vertices": list(range(1, self.n_components + 1)),
            "edges": [list(e) for e in self.edges],
            "delta": {f"{n},{m}": str(d) for (n, m), d in sorted(self.deltas.items())},
            "L": {f"{n},{m}": str(v) for (n, m), v in sorted(self.l_values.items())},
        }


def build_centroid_tree(
    partition: ComponentPartition, base_duals: Sequence[DualPair], c: CostMatrix
) -> CentroidTree:
    """Greedy tree: repeatedly take the minimal delta among pairs not yet
    path-connected, adding all ties (lexicographic order breaks ties that
    would close a cycle)."""
    n_comp = len(partition)
    deltas: dict[tuple[int, int], Fraction] = {}
    l_values: dict[tuple[int, int], Fraction] = {}
    for n in range(n_comp):
        for m in range(n + 1, n_comp):
            fwd = _cross_slack_min(c, base_duals, partition, n, m)
            bwd = _cross_slack_min(c, base_duals, partition, m, n)
            deltas[(n + 1, m + 1)] = (fwd + bwd) / 2
            l_values[(n + 1, m + 1)] = (fwd - bwd) / 2

    parent = list(range(n_comp + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    remaining = set(deltas)
    edges = []
    while remaining:
        d = min(deltas[p] for p in remaining)
        for (n, m) in sorted(p for p in remaining if deltas[p] == d):
            rn, rm = find(n), find(m)
            if rn != rm:
                parent[rn] = rm
                edges.append((n, m))
        remaining = {p for p in remaining if find(p[0]) != find(p[1])}
    return CentroidTree(n_comp, tuple(edges), deltas, l_values)


def centroid_parts(
    gamma: TransportPlan,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    c: CostMatrix,
    x0=None,
):
    """The limit potentials together with the tree and offsets behind them.

    Returns (DualPair, CentroidTree, alpha) where alpha is the exact offset
    vector (first component 0) solved along the tree edges.
    """
    c.check_shape(mu, nu)
    gamma.check_marginals(mu, nu)
    solution = solve_transport(mu, nu, c)
    if transport_cost(gamma, c) != solution.value:
        raise NotOptimalError("plan does not attain the optimal cost")
    x0_index = 0 if x0 is None else mu.index_of(x0)
    full = solution.dual_pair(x0_index)

    # components of the union of ALL optimal supports, not just gamma's
    ug = union_graph(gamma, full, mu, nu, c)
    partition = connected_components(ug)
    partition = partition.reordered_first(partition.component_of_source(x0_index))

    # the restriction of any optimal pair to a union-graph component is that
    # component's unique optimum; re-anchor each restriction
    base_duals = []
    anchors = []
    for n, (xs, ys) in enumerate(partition.components):
        anchor = x0_index if n == 0 else min(xs)
        shift = full.phi[anchor]
        base_duals.append(
            DualPair(
                tuple(full.phi[i] - shift if i in xs else None for i in range(len(mu))),
                tuple(full.psi[j] + shift if j in ys else None for j in range(len(nu))),
            )
        )
        anchors.append(anchor)

    tree = build_centroid_tree(partition, base_duals, c)

    alpha: list[Fraction | None] = [None] * len(partition)
    alpha[0] = Fraction(0)
    pending = list(tree.edges)
    while pending:
        progressed = False
        for (n, m) in list(pending):
            ln, lm = n - 1, m - 1
            if alpha[ln] is not None and alpha[lm] is None:
                alpha[lm] = alpha[ln] - tree.l_values[(n, m)]
            elif alpha[lm] is not None and alpha[ln] is None:
                alpha[ln] = alpha[lm] + tree.l_values[(n, m)]
            else:
                continue
            pending.remove((n, m))
            progressed = True
        if pending and not progressed:
            raise AssertionError("tree does not reach every component")

    m_size, n_size = c.shape
    phi = [None] * m_size
    psi = [None] * n_size
    for (xs, ys), pair, a in zip(partition.components, base_duals, alpha):
        for i in xs:
            phi[i] = pair.phi[i] + a
        for j in ys:
            psi[j] = pair.psi[j] - a
    return DualPair(tuple(phi), tuple(psi)), tree, tuple(alpha)


def centroid(
    gamma: TransportPlan,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    c: CostMatrix,
    x0=None,
) -> DualPair:
    """The dual optimizer reached by the entropic duals as eps -> 0."""
    pair, _, _ = centroid_parts(gamma, mu, nu, c, x0)
    return pair
