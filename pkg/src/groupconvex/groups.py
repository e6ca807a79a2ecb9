"""Computable metric Abelian groups and validated translation-invariant norms.

Three group families are instantiated: finite products of cyclic groups,
integer lattices and dyadic-rational lattices.  Elements are plain tuples of
exact scalars (residues, arbitrary-precision integers, or dyadic Fractions),
so equality is structural and every value is hashable and immutable.

A norm here is positive definite, even and subadditive but not necessarily
homogeneous; four norm families are supported so that suprema and infima of
norm ratios stay exactly computable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping, Sequence

from .errors import (
    DimensionMismatch,
    MetricGroupMismatch,
    NotDivisible,
    UnsupportedCombination,
)
from .scalars import Scalar, as_fraction, as_int, is_dyadic
from .verdicts import Verdict, proved, refuted

Vector = tuple


class Group:
    """Shared surface of the three group families.

    Elements are tuples; ``element`` canonicalizes raw coordinates and all
    operations return canonical tuples.  Every operation is a pure function,
    so values can be shared freely between concurrent executors.
    """

    kind: str = ""

    @property
    def complete(self) -> bool:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def element(self, coords: Sequence) -> Vector:
        raise NotImplementedError

    def zero(self) -> Vector:
        return self.element([0] * self.dim)

    def add(self, x: Vector, y: Vector) -> Vector:
        raise NotImplementedError

    def neg(self, x: Vector) -> Vector:
        raise NotImplementedError

    def sub(self, x: Vector, y: Vector) -> Vector:
        return self.add(x, self.neg(y))

    def nat_mul(self, n: int, x: Vector) -> Vector:
        """n-fold sum of x for n >= 1 (agrees with iterated addition)."""
        raise NotImplementedError

    def divisible_by(self, n: int) -> bool:
        """True iff multiplication by n is a bijection of the group."""
        raise NotImplementedError

    def div_apply(self, n: int, x: Vector) -> Vector:
        """The unique y with n*y = x; requires ``divisible_by(n)``."""
        raise NotImplementedError

    def _check_dim(self, coords: Sequence) -> None:
        if len(coords) != self.dim:
            raise DimensionMismatch(
                f"expected {self.dim} coordinates, got {len(coords)}"
            )


def _positive_index(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")


@dataclass(frozen=True)
class FiniteGroup(Group):
    """Product of cyclic groups Z_m1 x ... x Z_mk; elements are residue tuples."""

    moduli: tuple[int, ...]
    kind = "finite"

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(int(m) for m in self.moduli))
        if not self.moduli:
            raise ValueError("a finite group needs at least one modulus")
        if any(m < 2 for m in self.moduli):
            raise ValueError("all moduli must be >= 2")

    def __str__(self):
        return "x".join(f"Z{m}" for m in self.moduli)

    @property
    def complete(self) -> bool:
        return True

    @property
    def dim(self) -> int:
        return len(self.moduli)

    @property
    def order(self) -> int:
        return math.prod(self.moduli)

    def element(self, coords: Sequence) -> Vector:
        self._check_dim(coords)
        return tuple(as_int(c) % m for c, m in zip(coords, self.moduli))

    def elements(self) -> Iterator[Vector]:
        """All elements in lexicographic order."""
        return itertools.product(*[range(m) for m in self.moduli])

    def add(self, x, y):
        self._check_dim(x)
        self._check_dim(y)
        return tuple((a + b) % m for a, b, m in zip(x, y, self.moduli))

    def neg(self, x):
        self._check_dim(x)
        return tuple((-a) % m for a, m in zip(x, self.moduli))

    def nat_mul(self, n, x):
        _positive_index(n)
        self._check_dim(x)
        return tuple((n * a) % m for a, m in zip(x, self.moduli))

    def divisible_by(self, n):
        _positive_index(n)
        return all(math.gcd(n, m) == 1 for m in self.moduli)

    def div_apply(self, n, x):
        if not self.divisible_by(n):
            raise NotDivisible(f"{self} is not divisible by {n}")
        self._check_dim(x)
        return tuple((pow(n, -1, m) * a) % m for a, m in zip(x, self.moduli))


@dataclass(frozen=True)
class IntLattice(Group):
    """The free Abelian group Z^dim."""

    lattice_dim: int
    kind = "int"

    def __post_init__(self):
        if self.lattice_dim < 1:
            raise ValueError("dimension must be >= 1")

    def __str__(self):
        return f"Z^{self.lattice_dim}"

    @property
    def complete(self) -> bool:
        return True

    @property
    def dim(self) -> int:
        return self.lattice_dim

    def element(self, coords):
        self._check_dim(coords)
        return tuple(as_int(c) for c in coords)

    def add(self, x, y):
        self._check_dim(x)
        self._check_dim(y)
        return tuple(a + b for a, b in zip(x, y))

    def neg(self, x):
        self._check_dim(x)
        return tuple(-a for a in x)

    def nat_mul(self, n, x):
        _positive_index(n)
        self._check_dim(x)
        return tuple(n * a for a in x)

    def divisible_by(self, n):
        _positive_index(n)
        return n == 1

    def div_apply(self, n, x):
        if not self.divisible_by(n):
            raise NotDivisible(f"{self} is not divisible by {n}")
        return self.element(x)


@dataclass(frozen=True)
class DyadicLattice(Group):
    """Vectors of dyadic rationals p/2^k; uniquely divisible by powers of two.

    This group is flagged non-complete: Cauchy sequences of dyadics need not
    converge to a dyadic point.
    """

    lattice_dim: int
    kind = "dyadic"

    def __post_init__(self):
        if self.lattice_dim < 1:
            raise ValueError("dimension must be >= 1")

    def __str__(self):
        return f"dyadic^{self.lattice_dim}"

    @property
    def complete(self) -> bool:
        return False

    @property
    def dim(self) -> int:
        return self.lattice_dim

    def element(self, coords):
        self._check_dim(coords)
        out = []
        for c in coords:
            q = as_fraction(c)
            if not is_dyadic(q):
                raise ValueError(f"coordinate {q} is not a dyadic rational")
            out.append(q)
        return tuple(out)

    def add(self, x, y):
        self._check_dim(x)
        self._check_dim(y)
        return tuple(a + b for a, b in zip(x, y))

    def neg(self, x):
        self._check_dim(x)
        return tuple(-a for a in x)

    def nat_mul(self, n, x):
        _positive_index(n)
        self._check_dim(x)
        return tuple(n * a for a in x)

    def divisible_by(self, n):
        _positive_index(n)
        return n & (n - 1) == 0

    def div_apply(self, n, x):
        if not self.divisible_by(n):
            raise NotDivisible(f"{self} is not divisible by {n}")
        self._check_dim(x)
        return tuple(Fraction(a, n) for a in x)


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def _coerce_weights(weights) -> tuple[Fraction, ...]:
    out = tuple(as_fraction(w) for w in weights)
    if not out:
        raise ValueError("at least one weight is required")
    if any(w <= 0 for w in out):
        raise ValueError("weights must be positive")
    return out


@dataclass(frozen=True)
class CyclicMetric:
    """||x|| = sum_i w_i * min(x_i, m_i - x_i) on a finite group."""

    weights: tuple[Fraction, ...]
    kind = "cyclic"

    def __post_init__(self):
        object.__setattr__(self, "weights", _coerce_weights(self.weights))


@dataclass(frozen=True)
class LinfMetric:
    """||x|| = max_i w_i * |x_i|."""

    weights: tuple[Fraction, ...]
    kind = "linf"

    def __post_init__(self):
        object.__setattr__(self, "weights", _coerce_weights(self.weights))


@dataclass(frozen=True)
class L1Metric:
    """||x|| = sum_i w_i * |x_i|."""

    weights: tuple[Fraction, ...]
    kind = "l1"

    def __post_init__(self):
        object.__setattr__(self, "weights", _coerce_weights(self.weights))


@dataclass(frozen=True)
class TableMetric:
    """Explicit norm values for every element of a finite group."""

    entries: tuple[tuple[Vector, Fraction], ...]
    kind = "table"

    def __post_init__(self):
        canon = tuple(
            sorted((tuple(k), as_fraction(v)) for k, v in self.entries)
        )
        object.__setattr__(self, "entries", canon)


def table_metric(values: Mapping[Vector, Scalar]) -> TableMetric:
    return TableMetric(tuple((tuple(k), as_fraction(v)) for k, v in values.items()))


Metric = CyclicMetric | LinfMetric | L1Metric | TableMetric


@lru_cache(maxsize=None)
def _table_map(metric: TableMetric) -> dict:
    return dict(metric.entries)


def _require_weight_count(metric, group: Group) -> None:
    if len(metric.weights) != group.dim:
        raise MetricGroupMismatch(
            f"{len(metric.weights)} weights for a {group.dim}-dimensional group"
        )


def norm(group: Group, metric: Metric, x: Vector) -> Fraction:
    """Exact value of the norm of x under the given metric family."""
    group._check_dim(x)
    if isinstance(metric, CyclicMetric):
        if not isinstance(group, FiniteGroup):
            raise MetricGroupMismatch("cyclic norms require a finite group")
        _require_weight_count(metric, group)
        return sum(
            (w * min(a, m - a) for w, a, m in zip(metric.weights, x, group.moduli)),
            Fraction(0),
        )
    if isinstance(metric, LinfMetric):
        _require_weight_count(metric, group)
        return max(w * abs(Fraction(a)) for w, a in zip(metric.weights, x))
    if isinstance(metric, L1Metric):
        _require_weight_count(metric, group)
        return sum(
            (w * abs(Fraction(a)) for w, a in zip(metric.weights, x)), Fraction(0)
        )
    if isinstance(metric, TableMetric):
        if not isinstance(group, FiniteGroup):
            raise UnsupportedCombination("table norms require a finite group")
        table = _table_map(metric)
        key = tuple(x)
        if key not in table:
            raise MetricGroupMismatch(f"table does not cover element {key}")
        return table[key]
    raise MetricGroupMismatch(f"unknown metric {metric!r}")


def distance(group: Group, metric: Metric, x: Vector, y: Vector) -> Fraction:
    return norm(group, metric, group.sub(x, y))


@lru_cache(maxsize=None)
def validate_metric(group: Group, metric: Metric) -> Verdict:
    """Check positive definiteness, evenness and subadditivity.

    Finite groups are checked exhaustively over all elements and pairs;
    weighted L1/Linf norms on lattices hold by construction.  A refutation
    carries the violated axiom and the offending elements.
    """
    if isinstance(group, FiniteGroup):
        zero = group.zero()
        elems = list(group.elements())
        for x in elems:
            v = norm(group, metric, x)
            if (v == 0) != (x == zero):
                return refuted(("positive definiteness", x))
            if v < 0:
                return refuted(("positive definiteness", x))
            if norm(group, metric, group.neg(x)) != v:
                return refuted(("evenness", x))
        for x in elems:
            nx = norm(group, metric, x)
            for y in elems:
                if norm(group, metric, group.add(x, y)) > nx + norm(group, metric, y):
                    return refuted(("subadditivity", x, y))
        return proved()
    if isinstance(metric, (LinfMetric, L1Metric)):
        _require_weight_count(metric, group)
        # Positive weights make the three axioms hold identically on lattices.
        return proved()
    raise UnsupportedCombination(
        f"{metric.kind} norm is not supported on {group}"
    )


def norm_of_n(group: Group, metric: Metric, n: int) -> Fraction:
    """Operator norm of multiplication by n: sup of ||n*x|| / ||x|| over x != 0."""
    from .endo import op_norm, scaling

    _positive_index(n)
    return op_norm(scaling(group, n), metric)


def mu_of_n(group: Group, metric: Metric, n: int) -> Fraction:
    """Injectivity measure of multiplication by n: inf of ||n*x|| / ||x||."""
    from .endo import injectivity_measure, scaling

    _positive_index(n)
    return injectivity_measure(scaling(group, n), metric)
