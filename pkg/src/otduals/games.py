"""Continuum-agent congestion games and principal-agent equilibria.

An agent of type i choosing action j pays c_ij + k_j + f_j(nu_j) + (theta nu)_j,
where nu is the distribution of all agents' actions, k is set by a principal,
f_j are nondecreasing congestion costs and theta couples nearby actions.
Equilibria of the agents' game are the minimizers of
OT(mu, nu, c) + k.nu + E[nu] over the action simplex, with E the congestion
energy; the principal's optimal k is (minus) a subgradient of the transport
cost in nu, shifted into the admissible set.  The transport term is smoothed
entropically for computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .entropic import ConvergenceError, EntropicSolution, sinkhorn
from .measures import (
    CostMatrix,
    DiscreteMeasure,
    InfeasibleInstanceError,
    as_scalar,
)
from .simplex import solve_transport

_SIMPLEX_TOL = 1e-8


@dataclass(frozen=True)
class PowerCongestion:
    """f(x) = coefficient * x**exponent, antiderivative in closed form."""

    exponent: float
    coefficient: float = 1.0

    def __call__(self, x: float) -> float:
        return self.coefficient * x ** self.exponent

    def antiderivative(self, t: float) -> float:
        p = self.exponent
        return self.coefficient * t ** (p + 1.0) / (p + 1.0)

    def to_json(self) -> dict:
        return {"kind": "power", "exponent": self.exponent, "coefficient": self.coefficient}


@dataclass(frozen=True)
class TableCongestion:
    """Piecewise-linear f through (x, value) knots covering [0, 1]."""

    x: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.x) != len(self.values) or len(self.x) < 2:
            raise ValueError("need matching knot and value lists, length >= 2")
        if list(self.x) != sorted(self.x):
            raise ValueError("knots must be increasing")
        if not (self.x[0] <= 0.0 and self.x[-1] >= 1.0):
            raise ValueError("knots must cover [0, 1]")

    def __call__(self, x: float) -> float:
        return float(np.interp(x, self.x, self.values))

    def antiderivative(self, t: float) -> float:
        # exact integral of the linear interpolant from 0 to t
        xs = np.asarray(self.x)
        vs = np.asarray(self.values)
        grid = np.concatenate([[0.0], xs[(xs > 0.0) & (xs < t)], [t]])
        total = 0.0
        for a, b in zip(grid[:-1], grid[1:]):
            fa = float(np.interp(a, xs, vs))
            fb = float(np.interp(b, xs, vs))
            total += 0.5 * (fa + fb) * (b - a)
        return total

    def to_json(self) -> dict:
        return {"kind": "table", "x": list(self.x), "values": list(self.values)}


def toeplitz_interaction(g, n_actions: int) -> np.ndarray:
    """Symmetric interaction with theta[a, j] = g[|a - j|] (zero past the end)."""
    gv = np.asarray(g, dtype=float)
    theta = np.zeros((n_actions, n_actions))
    for a in range(n_actions):
        for j in range(n_actions):
            lag = abs(a - j)
            theta[a, j] = gv[lag] if lag < gv.size else 0.0
    return theta


@dataclass(frozen=True)
class AdmissibleSet:
    """Admissible cost vectors for the principal.

    Kinds: ``all`` (every vector), ``nonnegative``, ``box`` (bounds), and
    ``affine_slice`` (some coordinates pinned to fixed values).
    """

    kind: str
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    fixed: dict[int, float] = field(default_factory=dict)

    def contains(self, k: np.ndarray, tol: float = 1e-9) -> bool:
        k = np.asarray(k, dtype=float)
        if self.kind == "all":
            return True
        if self.kind == "nonnegative":
            return bool(np.all(k >= -tol))
        if self.kind == "box":
            return bool(np.all(k >= self.lower - tol) and np.all(k <= self.upper + tol))
        if self.kind == "affine_slice":
            return all(abs(k[j] - v) <= tol for j, v in self.fixed.items())
        raise ValueError(f"unknown admissible-set kind {self.kind!r}")

    def translate_into(self, k: np.ndarray, tol: float = 1e-9) -> float | None:
        """A constant t with k + t*1 admissible, or None if no shift works."""
        k = np.asarray(k, dtype=float)
        if self.kind == "all":
            return 0.0
        if self.kind == "nonnegative":
            return float(max(0.0, -np.min(k)))
        if self.kind == "box":
            t_lo = float(np.max(self.lower - k))
            t_hi = float(np.min(self.upper - k))
            if t_lo > t_hi + tol:
                return None
            return float(min(max(0.0, t_lo), t_hi))
        if self.kind == "affine_slice":
            shifts = [v - k[j] for j, v in self.fixed.items()]
            if not shifts:
                return 0.0
            if max(shifts) - min(shifts) > tol:
                return None
            return float(shifts[0])
        raise ValueError(f"unknown admissible-set kind {self.kind!r}")

    def to_json(self) -> dict:
        data = {"kind": self.kind}
        if self.kind == "box":
            data["lower"] = list(map(float, self.lower))
            data["upper"] = list(map(float, self.upper))
        if self.kind == "affine_slice":
            data["fixed"] = {str(j + 1): float(v) for j, v in self.fixed.items()}
        return data


@dataclass(frozen=True)
class PrincipalObjective:
    """Principal's cost G(nu, k).

    ``sum_of_squares`` is G(nu) = sum nu_j^2; ``expr`` evaluates a Python
    expression with ``nu``, ``k`` and ``np`` in scope and must declare
    whether it depends on k.
    """

    kind: str
    source: str = ""
    k_dependent: bool = False

    def __call__(self, nu: np.ndarray, k: np.ndarray | None = None) -> float:
        nu = np.asarray(nu, dtype=float)
        if self.kind == "sum_of_squares":
            return float(np.sum(nu * nu))
        if self.kind == "expr":
            scope = {"nu": nu, "k": k, "np": np, "__builtins__": {}}
            return float(eval(self.source, scope))  # noqa: S307 - configured objective
        raise ValueError(f"unknown objective kind {self.kind!r}")

    @property
    def k_independent(self) -> bool:
        return self.kind == "sum_of_squares" or not self.k_dependent

    def gradient_nu(self, nu: np.ndarray) -> np.ndarray:
        nu = np.asarray(nu, dtype=float)
        if self.kind == "sum_of_squares":
            return 2.0 * nu
        h = 1e-6
        grad = np.zeros_like(nu)
        for j in range(nu.size):
            step = np.zeros_like(nu)
            step[j] = h
            grad[j] = (self(nu + step) - self(nu - step)) / (2.0 * h)
        return grad

    def to_json(self) -> dict:
        if self.kind == "sum_of_squares":
            return {"kind": "sum_of_squares"}
        return {"kind": "expr", "source": self.source, "k_dependent": self.k_dependent}


@dataclass(frozen=True)
class GameSpec:
    """All static data of one game instance."""

    cost: CostMatrix
    congestion: tuple
    interaction: np.ndarray
    admissible_costs: AdmissibleSet
    principal_objective: PrincipalObjective

    def __post_init__(self):
        n = self.cost.shape[1]
        if len(self.congestion) != n:
            raise InfeasibleInstanceError("one congestion function per action required")
        theta = np.asarray(self.interaction, dtype=float)
        if theta.shape != (n, n):
            raise InfeasibleInstanceError("interaction matrix shape must match actions")
        if not np.array_equal(theta, theta.T):
            raise InfeasibleInstanceError("interaction matrix must be symmetric")
        grid = np.linspace(0.0, 1.0, 33)
        for f in self.congestion:
            vals = [f(x) for x in grid]
            if any(b < a - 1e-9 for a, b in zip(vals, vals[1:])):
                raise InfeasibleInstanceError("congestion functions must be nondecreasing")

    @property
    def n_types(self) -> int:
        return self.cost.shape[0]

    @property
    def n_actions(self) -> int:
        return self.cost.shape[1]

    def cost_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.cost.entries])


@dataclass(frozen=True)
class Equilibrium:
    """A strategy profile with its action distribution and cost vector."""

    plan: np.ndarray
    action_dist: np.ndarray
    costs: np.ndarray
    value: float
    kind: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        cols = self.plan.sum(axis=0)
        if np.max(np.abs(cols - self.action_dist)) > 1e-7:
            raise AssertionError("action distribution must be the plan's column sums")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "plan": [[float(v) for v in row] for row in self.plan],
            "nu": [float(v) for v in self.action_dist],
            "k": [float(v) for v in self.costs],
            "value": float(self.value),
            "diagnostics": dict(self.diagnostics),
        }


def _check_simplex(nu: np.ndarray) -> np.ndarray:
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < -_SIMPLEX_TOL) or abs(float(np.sum(nu)) - 1.0) > 1e-6:
        raise ValueError("vector is not on the probability simplex")
    return nu


def agent_cost(spec: GameSpec, nu, k) -> np.ndarray:
    """Full cost table C_ij = c_ij + k_j + f_j(nu_j) + (theta nu)_j."""
    nu = _check_simplex(nu)
    k = np.asarray(k, dtype=float)
    congestion = np.array([f(nu[j]) for j, f in enumerate(spec.congestion)])
    mean_field = spec.interaction @ nu
    return spec.cost_array() + (k + congestion + mean_field)[None, :]


def energy(spec: GameSpec, nu) -> float:
    """Congestion antiderivatives plus the quadratic interaction energy."""
    nu = _check_simplex(nu)
    total = sum(f.antiderivative(nu[j]) for j, f in enumerate(spec.congestion))
    return float(total + 0.5 * nu @ spec.interaction @ nu)


def energy_gradient(spec: GameSpec, nu) -> np.ndarray:
    """Component j is f_j(nu_j) + (theta nu)_j."""
    nu = _check_simplex(nu)
    congestion = np.array([f(nu[j]) for j, f in enumerate(spec.congestion)])
    return congestion + spec.interaction @ nu


def _mu_array(mu) -> np.ndarray:
    if isinstance(mu, DiscreteMeasure):
        return np.array([float(w) for w in mu.weights])
    return np.asarray(mu, dtype=float)


def _smoothed_transport_value(sol: EntropicSolution, c_arr: np.ndarray) -> float:
    plan = sol.plan
    return float(np.sum(c_arr * plan) + sol.epsilon * np.sum(plan * (np.log(plan) - 1.0)))


def best_response(
    spec: GameSpec,
    mu,
    k,
    epsilon: float = 1e-2,
    tol: float = 1e-6,
    max_outer: int = 20_000,
    inner_tol: float = 1e-10,
    inner_max: int = 100_000,
    full_output: bool = False,
):
    """Minimize OT_eps(mu, ., c) + k.nu + E[nu] over the action simplex.

    Entropic smoothing makes the transport term differentiable: its gradient
    is the target-side potential of the smoothed dual, so each step is a
    mirror-descent update with a warm-started scaling solve.  Requires a
    strictly convex energy for the minimizer to be unique.
    """
    mu_arr = _mu_array(mu)
    k = np.asarray(k, dtype=float)
    c_arr = spec.cost_array()
    n = spec.n_actions

    nu = np.full(n, 1.0 / n)
    warm = None
    sol = sinkhorn(mu_arr, nu, c_arr, epsilon, inner_tol, inner_max, warm_start=warm)
    value = _smoothed_transport_value(sol, c_arr) + float(k @ nu) + energy(spec, nu)

    step = 1.0
    residual = math.inf
    iterations = 0
    for iterations in range(1, max_outer + 1):
        grad = sol.psi_eps + k + energy_gradient(spec, nu)
        centered = grad - float(np.mean(grad))
        residual = float(np.max(np.abs(centered)))
        if residual <= tol:
            break
        accepted = False
        while step >= 1e-13:
            log_trial = np.log(nu) - step * grad
            log_trial -= np.max(log_trial)
            trial = np.exp(log_trial)
            trial /= trial.sum()
            trial_sol = sinkhorn(
                mu_arr, trial, c_arr, epsilon, inner_tol, inner_max,
                warm_start=(sol.phi_eps, sol.psi_eps),
            )
            trial_value = (
                _smoothed_transport_value(trial_sol, c_arr)
                + float(k @ trial)
                + energy(spec, trial)
            )
            if trial_value <= value + 1e-15:
                nu, sol, value = trial, trial_sol, trial_value
                step = min(step * 1.5, 64.0)
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    if residual > tol:
        raise ConvergenceError(
            f"best response stalled at residual {residual:.3e} > tol {tol:.3e} "
            f"after {iterations} iterations"
        )
    if full_output:
        info = {
            "iterations": iterations,
            "residual": residual,
            "epsilon": epsilon,
            "solution": sol,
            "value": value,
        }
        return nu, info
    return nu


def ot_subdifferential_element(mu, nu, c, epsilon: float, x0=None, tol: float = 1e-10,
                               max_iter: int = 100_000) -> np.ndarray:
    """A smoothed subgradient of nu -> OT(mu, nu, c): the potential psi_eps.

    Only defined for strictly positive nu (in the relative interior the
    subdifferential is nonempty; on the boundary it may be empty).
    """
    nu_arr = np.asarray(
        [float(w) for w in nu.weights] if isinstance(nu, DiscreteMeasure) else nu,
        dtype=float,
    )
    if np.any(nu_arr <= 0.0):
        raise InfeasibleInstanceError(
            "distribution lies on the simplex boundary; subgradient may not exist"
        )
    sol = sinkhorn(mu, nu_arr, c, epsilon, tol, max_iter, x0=x0)
    return sol.psi_eps


def minimize_over_simplex(
    value,
    gradient,
    n: int,
    tol: float = 1e-9,
    max_outer: int = 50_000,
    start: np.ndarray | None = None,
) -> np.ndarray:
    """Mirror descent for a smooth convex function on the simplex."""
    nu = np.full(n, 1.0 / n) if start is None else np.asarray(start, dtype=float)
    current = value(nu)
    step = 1.0
    for _ in range(max_outer):
        grad = gradient(nu)
        centered = grad - float(np.mean(grad))
        if float(np.max(np.abs(centered))) <= tol:
            break
        moved = False
        while step >= 1e-14:
            log_trial = np.log(nu) - step * grad
            log_trial -= np.max(log_trial)
            trial = np.exp(log_trial)
            trial /= trial.sum()
            trial_value = value(trial)
            if trial_value <= current + 1e-18:
                nu, current = trial, trial_value
                step = min(step * 1.5, 1e6)
                moved = True
                break
            step *= 0.5
        if not moved:
            break
    return nu


def solve_cne(
    spec: GameSpec,
    mu,
    k,
    epsilon: float = 1e-2,
    tol: float = 1e-6,
) -> Equilibrium:
    """Equilibrium of the agents' game for a fixed cost vector k."""
    k = np.asarray(k, dtype=float)
    nu, info = best_response(spec, mu, k, epsilon=epsilon, tol=tol, full_output=True)
    sol: EntropicSolution = info["solution"]
    return Equilibrium(
        plan=sol.plan,
        action_dist=sol.plan.sum(axis=0),
        costs=k,
        value=spec.principal_objective(nu, k),
        kind="cne",
        diagnostics={
            "epsilon": epsilon,
            "iterations": info["iterations"],
            "residual": info["residual"],
        },
    )


def solve_scne_k_independent(
    spec: GameSpec,
    mu,
    epsilon: float = 1e-2,
    tol: float = 1e-9,
    inner_tol: float = 1e-10,
    inner_max: int = 100_000,
) -> Equilibrium:
    """Principal-optimal equilibrium when G does not depend on k.

    The principal first drives the action distribution to the minimizer of G,
    then charges k = -psi_eps - grad E at that distribution (shifted into the
    admissible set); agents facing k have no profitable deviation.
    """
    objective = spec.principal_objective
    if not objective.k_independent:
        raise ValueError("objective depends on k; use the general search instead")
    n = spec.n_actions
    if objective.kind == "sum_of_squares":
        nu_star = np.full(n, 1.0 / n)
    else:
        nu_star = minimize_over_simplex(
            lambda v: objective(v), objective.gradient_nu, n, tol=max(tol, 1e-9)
        )
    if np.min(nu_star) <= 1e-9:
        raise InfeasibleInstanceError(
            "principal optimum lies on the simplex boundary; no interior certificate"
        )
    mu_arr = _mu_array(mu)
    c_arr = spec.cost_array()
    sol = sinkhorn(mu_arr, nu_star, c_arr, epsilon, inner_tol, inner_max)
    k_raw = -sol.psi_eps - energy_gradient(spec, nu_star)
    shift = spec.admissible_costs.translate_into(k_raw)
    if shift is None:
        raise InfeasibleInstanceError(
            "no translate of the subgradient-based cost vector is admissible"
        )
    k_star = k_raw + shift
    return Equilibrium(
        plan=sol.plan,
        action_dist=sol.plan.sum(axis=0),
        costs=k_star,
        value=objective(nu_star, k_star),
        kind="scne",
        diagnostics={
            "epsilon": epsilon,
            "iterations": sol.iterations,
            "residual": sol.residual,
            "shift": shift,
        },
    )


def _rational_simplex(values: np.ndarray) -> DiscreteMeasure:
    weights = [Fraction(repr(float(v))) for v in values]
    total = sum(weights)
    return DiscreteMeasure.from_weights([w / total for w in weights])


def check_cne(spec: GameSpec, mu, plan, k, tol: float, epsilon: float = 1e-2) -> bool:
    """Certify a strategy profile as an equilibrium for k, within tolerances.

    Checks (a) the profile's action distribution is first-order optimal for
    the smoothed variational problem and (b) the profile itself is an optimal
    coupling for that distribution (cost within tol of the exact optimum).
    """
    plan = np.asarray(plan, dtype=float)
    k = np.asarray(k, dtype=float)
    mu_arr = _mu_array(mu)
    if np.max(np.abs(plan.sum(axis=1) - mu_arr)) > tol:
        return False
    nu = plan.sum(axis=0)
    if np.any(nu <= 0.0):
        return False

    sol = sinkhorn(mu_arr, nu, spec.cost_array(), epsilon)
    grad = sol.psi_eps + k + energy_gradient(spec, nu)
    centered = grad - float(np.mean(grad))
    if float(np.max(np.abs(centered))) > tol:
        return False

    mu_exact = mu if isinstance(mu, DiscreteMeasure) else _rational_simplex(mu_arr)
    nu_exact = _rational_simplex(nu)
    optimal = float(solve_transport(mu_exact, nu_exact, spec.cost).value)
    cost_of_plan = float(np.sum(spec.cost_array() * plan))
    return cost_of_plan <= optimal + tol
