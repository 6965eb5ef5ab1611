"""Exact representations of discrete measures, cost matrices, couplings and
dual potentials.

Everything in this module is rational arithmetic (`fractions.Fraction`), so
that support membership (is an entry strictly positive?) and tightness of a
dual constraint are decided exactly.  Weights given as decimal strings such
as ``"0.25"`` parse to the exact rational ``1/4``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class DimensionMismatchError(ValueError):
    """Shapes of measures / matrices do not agree."""


class InfeasibleInstanceError(ValueError):
    """Instance data violates a structural requirement (weights, marginals)."""


ScalarLike = "Fraction | int | str | float"


def as_scalar(value) -> Fraction:
    """Coerce a number-like value to an exact rational.

    Accepts Fraction, int, rational strings (``"3/20"``), decimal strings
    (``"0.25"``) and floats.  Floats go through their shortest decimal repr,
    so a JSON value ``0.25`` becomes exactly ``1/4``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("boolean is not a scalar")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    raise TypeError(f"cannot interpret {value!r} as an exact scalar")


def scalar_str(value: Fraction) -> str:
    """Render a rational as ``p/q`` (or ``p`` when the denominator is 1)."""
    return str(value)


def _as_scalar_vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(as_scalar(v) for v in values)


def _as_scalar_matrix(rows: Iterable[Iterable]) -> tuple[tuple[Fraction, ...], ...]:
    out = tuple(_as_scalar_vector(row) for row in rows)
    if out and any(len(row) != len(out[0]) for row in out):
        raise DimensionMismatchError("ragged matrix")
    return out


@dataclass(frozen=True)
class DiscreteMeasure:
    """A finitely supported probability measure.

    ``labels`` identify the atoms (defaults to 1-based integers), ``weights``
    are exact, strictly positive and sum to 1.
    """

    labels: tuple
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.weights):
            raise DimensionMismatchError("labels and weights differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise InfeasibleInstanceError("duplicate atom labels")
        if any(w <= 0 for w in self.weights):
            raise InfeasibleInstanceError("atom weights must be strictly positive")
        total = sum(self.weights)
        if total != 1:
            raise InfeasibleInstanceError(f"weights sum to {total}, expected 1")

    @classmethod
    def from_weights(cls, weights: Iterable, labels: Sequence | None = None) -> "DiscreteMeasure":
        ws = _as_scalar_vector(weights)
        if labels is None:
            labels = tuple(range(1, len(ws) + 1))
        return cls(tuple(labels), ws)

    def __len__(self) -> int:
        return len(self.weights)

    def index_of(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no atom labelled {label!r}") from None

    def mass_of(self, indices: Iterable[int]) -> Fraction:
        return sum((self.weights[i] for i in indices), Fraction(0))


@dataclass(frozen=True)
class CostMatrix:
    """Nonnegative cost table indexed by (source atom, target atom)."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not self.entries or not self.entries[0]:
            raise DimensionMismatchError("cost matrix must be non-empty")
        if any(v < 0 for row in self.entries for v in row):
            raise InfeasibleInstanceError("costs must be nonnegative")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "CostMatrix":
        return cls(_as_scalar_matrix(rows))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def check_shape(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
        if self.shape != (len(mu), len(nu)):
            raise DimensionMismatchError(
                f"cost is {self.shape}, measures are {(len(mu), len(nu))}"
            )


@dataclass(frozen=True)
class TransportPlan:
    """A coupling: entries in [0, 1] with prescribed row and column sums."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not self.entries or not self.entries[0]:
            raise DimensionMismatchError("plan must be non-empty")
        if any(v < 0 or v > 1 for row in self.entries for v in row):
            raise InfeasibleInstanceError("plan entries must lie in [0, 1]")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "TransportPlan":
        return cls(_as_scalar_matrix(rows))

    @classmethod
    def coupling(cls, rows: Iterable[Iterable], mu: DiscreteMeasure, nu: DiscreteMeasure) -> "TransportPlan":
        plan = cls.from_rows(rows)
        plan.check_marginals(mu, nu)
        return plan

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i][j]

    def row_sums(self) -> tuple[Fraction, ...]:
        return tuple(sum(row, Fraction(0)) for row in self.entries)

    def column_sums(self) -> tuple[Fraction, ...]:
        n = len(self.entries[0])
        return tuple(
            sum((row[j] for row in self.entries), Fraction(0)) for j in range(n)
        )

    def check_marginals(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
        if self.shape != (len(mu), len(nu)):
            raise DimensionMismatchError(
                f"plan is {self.shape}, measures are {(len(mu), len(nu))}"
            )
        if self.row_sums() != mu.weights:
            raise InfeasibleInstanceError("row sums do not match first marginal")
        if self.column_sums() != nu.weights:
            raise InfeasibleInstanceError("column sums do not match second marginal")

    def support(self) -> frozenset[tuple[int, int]]:
        """Index pairs carrying strictly positive mass."""
        return frozenset(
            (i, j)
            for i, row in enumerate(self.entries)
            for j, v in enumerate(row)
            if v > 0
        )


@dataclass(frozen=True)
class DualPair:
    """Potentials (phi on sources, psi on targets).

    Feasibility against a cost matrix (phi_i + psi_j <= c_ij everywhere) is
    checked by :meth:`checked` / :meth:`is_feasible`; the plain constructor
    stores values as given.
    """

    phi: tuple[Fraction, ...]
    psi: tuple[Fraction, ...]

    @classmethod
    def from_values(cls, phi: Iterable, psi: Iterable) -> "DualPair":
        return cls(_as_scalar_vector(phi), _as_scalar_vector(psi))

    @classmethod
    def checked(cls, phi: Iterable, psi: Iterable, cost: CostMatrix) -> "DualPair":
        pair = cls.from_values(phi, psi)
        if not pair.is_feasible(cost):
            raise InfeasibleInstanceError("potentials violate phi_i + psi_j <= c_ij")
        return pair

    def is_feasible(self, cost: CostMatrix) -> bool:
        m, n = cost.shape
        if (len(self.phi), len(self.psi)) != (m, n):
            raise DimensionMismatchError("potentials do not match cost shape")
        return all(
            self.phi[i] + self.psi[j] <= cost[i, j]
            for i in range(m)
            for j in range(n)
        )

    def value(self, mu: DiscreteMeasure, nu: DiscreteMeasure) -> Fraction:
        """The dual objective phi.mu + psi.nu."""
        return sum(
            (p * w for p, w in zip(self.phi, mu.weights)), Fraction(0)
        ) + sum((p * w for p, w in zip(self.psi, nu.weights)), Fraction(0))

    def translated(self, a: Fraction) -> "DualPair":
        """The equivalent pair (phi + a, psi - a)."""
        a = as_scalar(a)
        return DualPair(
            tuple(p + a for p in self.phi), tuple(p - a for p in self.psi)
        )


def transport_cost(gamma: TransportPlan, c: CostMatrix) -> Fraction:
    """Exact total cost sum_ij c_ij * gamma_ij."""
    if gamma.shape != c.shape:
        raise DimensionMismatchError(f"plan {gamma.shape} vs cost {c.shape}")
    return sum(
        (cv * gv for crow, grow in zip(c.entries, gamma.entries) for cv, gv in zip(crow, grow)),
        Fraction(0),
    )


def is_complementary(gamma: TransportPlan, dual: DualPair, c: CostMatrix) -> bool:
    """True iff phi_i + psi_j = c_ij on every cell with gamma_ij > 0."""
    if gamma.shape != c.shape:
        raise DimensionMismatchError(f"plan {gamma.shape} vs cost {c.shape}")
    return all(
        dual.phi[i] + dual.psi[j] == c[i, j] for (i, j) in gamma.support()
    )


def c_transform(k: Sequence, c: CostMatrix) -> tuple[Fraction, ...]:
    """Tightest source potential paired with target potential k.

    Returns the vector with entries min_j (c_ij - k_j); the pair (result, k)
    is always dual-feasible.
    """
    kv = _as_scalar_vector(k)
    m, n = c.shape
    if len(kv) != n:
        raise DimensionMismatchError(f"potential has {len(kv)} entries, cost has {n} columns")
    return tuple(min(c[i, j] - kv[j] for j in range(n)) for i in range(m))
