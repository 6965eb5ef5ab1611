"""JSON schemas for problem instances, game files and emitted artifacts.

Exact rationals are written as ``"p/q"`` strings so fixtures round-trip
losslessly; floating values are normalized to 12 significant digits so
output is byte-deterministic for a fixed input and seed.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .games import (
    AdmissibleSet,
    GameSpec,
    PowerCongestion,
    PrincipalObjective,
    TableCongestion,
    toeplitz_interaction,
)
from .measures import (
    CostMatrix,
    DiscreteMeasure,
    DualPair,
    InfeasibleInstanceError,
    TransportPlan,
    scalar_str,
)


class SchemaError(ValueError):
    """Input JSON does not match the expected shape."""


def _require(data: dict, key: str):
    if key not in data:
        raise SchemaError(f"missing field {key!r}")
    return data[key]


def parse_instance(data: dict) -> tuple[DiscreteMeasure, DiscreteMeasure, CostMatrix]:
    """Read {"mu": [...], "nu": [...], "cost": [[...]], labels optional}."""
    if not isinstance(data, dict):
        raise SchemaError("instance file must be a JSON object")
    try:
        mu = DiscreteMeasure.from_weights(_require(data, "mu"), data.get("labels_x"))
        nu = DiscreteMeasure.from_weights(_require(data, "nu"), data.get("labels_y"))
        cost = CostMatrix.from_rows(_require(data, "cost"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InfeasibleInstanceError):
            raise
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(str(exc)) from exc
    cost.check_shape(mu, nu)
    return mu, nu, cost


def _parse_congestion(data, n_actions: int):
    def one(entry):
        kind = _require(entry, "kind")
        if kind == "power":
            return PowerCongestion(
                float(_require(entry, "exponent")), float(entry.get("coefficient", 1.0))
            )
        if kind == "table":
            return TableCongestion(
                tuple(float(v) for v in _require(entry, "x")),
                tuple(float(v) for v in _require(entry, "values")),
            )
        if kind == "zero":
            return PowerCongestion(1.0, 0.0)
        raise SchemaError(f"unknown congestion kind {kind!r}")

    if isinstance(data, dict):
        return tuple(one(data) for _ in range(n_actions))
    if isinstance(data, list):
        if len(data) != n_actions:
            raise SchemaError("congestion list length must match actions")
        return tuple(one(entry) for entry in data)
    raise SchemaError("congestion must be an object or a list of objects")


def _parse_interaction(data, n_actions: int) -> np.ndarray:
    kind = _require(data, "kind")
    if kind == "toeplitz":
        return toeplitz_interaction([float(v) for v in _require(data, "g")], n_actions)
    if kind == "matrix":
        values = np.asarray(_require(data, "values"), dtype=float)
        return values
    if kind == "zero":
        return np.zeros((n_actions, n_actions))
    raise SchemaError(f"unknown interaction kind {kind!r}")


def _parse_admissible(data) -> AdmissibleSet:
    if data is None:
        return AdmissibleSet("all")
    kind = _require(data, "kind")
    if kind in ("all", "nonnegative"):
        return AdmissibleSet(kind)
    if kind == "box":
        return AdmissibleSet(
            "box",
            lower=np.asarray(_require(data, "lower"), dtype=float),
            upper=np.asarray(_require(data, "upper"), dtype=float),
        )
    if kind == "affine_slice":
        fixed = {
            int(j) - 1: float(v) for j, v in _require(data, "fixed").items()
        }
        return AdmissibleSet("affine_slice", fixed=fixed)
    raise SchemaError(f"unknown admissible-set kind {kind!r}")


def _parse_objective(data) -> PrincipalObjective:
    if data is None:
        return PrincipalObjective("sum_of_squares")
    kind = _require(data, "kind")
    if kind == "sum_of_squares":
        return PrincipalObjective("sum_of_squares")
    if kind == "expr":
        return PrincipalObjective(
            "expr", source=str(_require(data, "source")),
            k_dependent=bool(data.get("k_dependent", False)),
        )
    raise SchemaError(f"unknown objective kind {kind!r}")


def parse_game(data: dict) -> tuple[GameSpec, DiscreteMeasure]:
    """Read a game file into (GameSpec, type distribution)."""
    if not isinstance(data, dict):
        raise SchemaError("game file must be a JSON object")
    mu = DiscreteMeasure.from_weights(_require(data, "mu"))
    cost = CostMatrix.from_rows(_require(data, "cost"))
    if cost.shape[0] != len(mu):
        raise SchemaError("cost rows must match the type distribution")
    n_actions = cost.shape[1]
    spec = GameSpec(
        cost=cost,
        congestion=_parse_congestion(_require(data, "congestion"), n_actions),
        interaction=_parse_interaction(_require(data, "interaction"), n_actions),
        admissible_costs=_parse_admissible(data.get("K")),
        principal_objective=_parse_objective(data.get("objective")),
    )
    return spec, mu


def measure_json(measure: DiscreteMeasure) -> list[str]:
    return [scalar_str(w) for w in measure.weights]


def plan_json(plan: TransportPlan) -> list[list[str]]:
    return [[scalar_str(v) for v in row] for row in plan.entries]


def dual_json(pair: DualPair) -> dict:
    return {
        "phi": [scalar_str(v) for v in pair.phi],
        "psi": [scalar_str(v) for v in pair.psi],
    }


def _normalize(value):
    if isinstance(value, Fraction):
        return scalar_str(value)
    if isinstance(value, (np.floating, float)):
        return float(f"{float(value):.12g}")
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_normalize(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    return value


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, floats at 12 significant digits."""
    return json.dumps(_normalize(obj), sort_keys=True, indent=2) + "\n"
