"""Set arithmetic and convexity over the instantiated groups.

Two set representations are supported: explicit finite sets and symbolic
lattice boxes.  Mixed-kind sums are rejected rather than approximated so
that every ``Proved`` verdict is exact; sampling can only refute (with a
witness) or leave a claim unfalsified.

A set D is convex for an endomorphism T when T(x) + (I-T)(y) lands in D
for all x, y in D; the n-fold sumset [n]A and the dilation n*A give the
related notion of n-convexity ([n]A inside n*A).  Convex hulls are computed
as least fixed points of the one-step closure.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Sequence

from .endo import Endomorphism, all_endomorphisms, identity
from .endo import zero as zero_endo
from .errors import (
    EmptySet,
    GroupMismatch,
    NotEnumerable,
    NotFinite,
    UnsupportedMixedSum,
    UnsupportedRepresentation,
)
from .groups import DyadicLattice, FiniteGroup, Group, IntLattice, Metric, Vector, norm
from .verdicts import Verdict, proved, refuted, unfalsified


@dataclass(frozen=True)
class FiniteSet:
    """Explicit, deduplicated, sorted set of group elements."""

    group: Group
    elements: tuple[Vector, ...]

    def __str__(self):
        inner = ", ".join("(" + ",".join(str(c) for c in e) + ")" for e in self.elements)
        return "{" + inner + "}"

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class BoxSet:
    """All lattice points x with lo_i <= x_i <= hi_i, stored symbolically."""

    group: Group
    lo: Vector
    hi: Vector

    def __str__(self):
        return f"box[{self.lo} .. {self.hi}]"


PointSet = FiniteSet | BoxSet


def finite_set(group: Group, points: Iterable[Sequence]) -> FiniteSet:
    canon = {group.element(p) for p in points}
    return FiniteSet(group, tuple(sorted(canon)))


def box_set(group: Group, lo: Sequence, hi: Sequence) -> BoxSet:
    if not isinstance(group, (IntLattice, DyadicLattice)):
        raise UnsupportedRepresentation("box sets live on lattice groups")
    lo_v = group.element(lo)
    hi_v = group.element(hi)
    if any(a > b for a, b in zip(lo_v, hi_v)):
        raise ValueError("box requires lo <= hi coordinatewise")
    return BoxSet(group, lo_v, hi_v)


@lru_cache(maxsize=None)
def _member_set(A: FiniteSet) -> frozenset:
    return frozenset(A.elements)


def contains(A: PointSet, x: Vector) -> bool:
    """Exact membership test for both representations."""
    if isinstance(A, FiniteSet):
        return x in _member_set(A)
    return all(a <= c <= b for a, c, b in zip(A.lo, x, A.hi))


def is_empty(A: PointSet) -> bool:
    return isinstance(A, FiniteSet) and not A.elements


def closure(A: PointSet) -> PointSet:
    """Topological closure in the instantiated representations.

    Finite sets are closed in every instantiated topology and boxes are
    closed by construction, so this is the identity on both kinds.
    """
    return A


def sample(A: PointSet, rng: random.Random) -> Vector:
    """Deterministic seeded sampler of member points."""
    if isinstance(A, FiniteSet):
        if not A.elements:
            raise EmptySet("cannot sample the empty set")
        return A.elements[rng.randrange(len(A.elements))]
    coords = []
    for lo, hi in zip(A.lo, A.hi):
        if isinstance(A.group, IntLattice):
            coords.append(rng.randint(lo, hi))
        else:
            scale = 1 << rng.randint(0, 4)
            while math.ceil(lo * scale) > math.floor(hi * scale):
                scale <<= 1
            coords.append(Fraction(rng.randint(math.ceil(lo * scale), math.floor(hi * scale)), scale))
    return A.group.element(coords)


def _same_group(A: PointSet, B: PointSet) -> None:
    if A.group != B.group:
        raise GroupMismatch(f"{A.group} vs {B.group}")


def sumset(A: PointSet, B: PointSet) -> PointSet:
    """Minkowski sum; exact for finite+finite and box+box, refused for mixes."""
    _same_group(A, B)
    g = A.group
    if isinstance(A, FiniteSet) and isinstance(B, FiniteSet):
        return finite_set(g, (g.add(a, b) for a in A.elements for b in B.elements))
    if isinstance(A, BoxSet) and isinstance(B, BoxSet):
        return box_set(g, g.add(A.lo, B.lo), g.add(A.hi, B.hi))
    raise UnsupportedMixedSum("mixed finite/box sums are not representable")


def n_fold_sum(A: PointSet, n: int) -> PointSet:
    """[n]A: all sums of n members of A. The dilation n*A is always inside."""
    if n < 1:
        raise ValueError("n must be >= 1")
    result = A
    for _ in range(n - 1):
        result = sumset(result, A)
    if isinstance(A, FiniteSet):
        assert all(contains(result, x) for x in n_dilate(A, n).elements)
    return result


def n_dilate(A: PointSet, n: int) -> PointSet:
    """n*A: elementwise n-fold multiples; always a subset of [n]A."""
    if n < 1:
        raise ValueError("n must be >= 1")
    g = A.group
    if isinstance(A, FiniteSet):
        return finite_set(g, (g.nat_mul(n, x) for x in A.elements))
    if g.divisible_by(n):
        return box_set(g, g.nat_mul(n, A.lo), g.nat_mul(n, A.hi))
    raise UnsupportedRepresentation(
        f"dilation of a box by {n} is not box-representable on {g}"
    )


def member_of_sum(point: Vector, B: PointSet, C: FiniteSet) -> bool:
    """Exact membership of ``point`` in B + C for finite C."""
    g = B.group
    return any(contains(B, g.sub(point, c)) for c in C.elements)


def intersect(A: PointSet, B: PointSet) -> PointSet:
    _same_group(A, B)
    g = A.group
    if isinstance(A, BoxSet) and isinstance(B, BoxSet):
        lo = tuple(max(a, b) for a, b in zip(A.lo, B.lo))
        hi = tuple(min(a, b) for a, b in zip(A.hi, B.hi))
        if any(a > b for a, b in zip(lo, hi)):
            return finite_set(g, ())
        return box_set(g, lo, hi)
    if isinstance(A, BoxSet):
        A, B = B, A
    return finite_set(g, (x for x in A.elements if contains(B, x)))


def _box_points(A: BoxSet, cap: int = 4096) -> list[Vector]:
    if not isinstance(A.group, IntLattice):
        raise NotEnumerable("dyadic boxes contain infinitely many points")
    count = math.prod(hi - lo + 1 for lo, hi in zip(A.lo, A.hi))
    if count > cap:
        raise NotEnumerable(f"box holds {count} points, beyond the cap of {cap}")
    return [tuple(p) for p in itertools.product(*[range(lo, hi + 1) for lo, hi in zip(A.lo, A.hi)])]


def subset_of(A: PointSet, B: PointSet) -> bool:
    """Decidable inclusion test across all representation pairs."""
    _same_group(A, B)
    if isinstance(A, FiniteSet):
        return all(contains(B, x) for x in A.elements)
    if isinstance(B, BoxSet):
        return all(bl <= al and ah <= bh for al, ah, bl, bh in zip(A.lo, A.hi, B.lo, B.hi))
    if A.lo == A.hi:
        return contains(B, A.lo)
    if isinstance(A.group, IntLattice):
        return all(contains(B, x) for x in _box_points(A))
    return False  # a nondegenerate dyadic box is infinite


# ---------------------------------------------------------------------------
# Convexity tests
# ---------------------------------------------------------------------------

def is_n_convex(A: PointSet, n: int) -> Verdict:
    """Check [n]A inside n*A.

    Finite sets are checked exhaustively with witness reconstruction.  Boxes
    are proved symbolically when the group is divisible by n (the interval
    identity) and refuted with a constructed witness otherwise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    g = A.group
    if n == 1:
        return proved()
    if isinstance(A, FiniteSet):
        if not A.elements:
            return proved()
        dilation = _member_set(n_dilate(A, n))
        # provenance map: each reachable sum remembers one decomposition.
        layer = {x: (x,) for x in A.elements}
        for _ in range(n - 1):
            grown = {}
            for point, parts in layer.items():
                for x in A.elements:
                    s = g.add(point, x)
                    if s not in grown:
                        grown[s] = parts + (x,)
            layer = grown
        for point, parts in sorted(layer.items()):
            if point not in dilation:
                return refuted((parts, point))
        return proved()
    if A.lo == A.hi:
        return proved()
    if g.divisible_by(n):
        return proved()
    # construct a sum that no dilated lattice point can reach
    axis = next(i for i, (a, b) in enumerate(zip(A.lo, A.hi)) if a < b)
    width = A.hi[axis] - A.lo[axis]
    if isinstance(g, IntLattice):
        step = 1
    else:
        step = Fraction(1)
        while step > width:
            step /= 2
    bumped = list(A.lo)
    bumped[axis] = A.lo[axis] + step
    parts = (g.element(bumped),) + (A.lo,) * (n - 1)
    total = reduce(g.add, parts)
    quotient = [Fraction(c, n) for c in total]
    assert any(
        q.denominator != 1 if isinstance(g, IntLattice) else q.denominator & (q.denominator - 1)
        for q in quotient
    ), "witness construction must leave the lattice"
    return refuted((parts, total))


def _combination(T: Endomorphism, x: Vector, y: Vector) -> Vector:
    g = T.group
    return g.add(T.apply(x), g.sub(y, T.apply(y)))


def _diagonal(T: Endomorphism) -> tuple | None:
    n = T.group.dim
    for i in range(n):
        for j in range(n):
            if i != j and T.matrix[i][j] != 0:
                return None
    return tuple(T.matrix[i][i] for i in range(n))


def is_T_convex(D: PointSet, T: Endomorphism, samples: int = 64, seed: int = 0) -> Verdict:
    """Check T(x) + (I-T)(y) in D for all x, y in D.

    Exhaustive over ordered pairs on finite sets.  On boxes, diagonal
    endomorphisms admit an exact corner analysis (the combination is linear
    in each coordinate of x and y, so extremes occur at box corners, which
    are lattice points); other endomorphisms fall back to seeded sampling.
    """
    if D.group != T.group:
        raise GroupMismatch(f"{D.group} vs {T.group}")
    g = D.group
    if isinstance(D, FiniteSet):
        for x in D.elements:
            for y in D.elements:
                point = _combination(T, x, y)
                if not contains(D, point):
                    return refuted((x, y, point))
        return proved()
    diag = _diagonal(T)
    if diag is not None:
        witness_x, witness_y = list(D.lo), list(D.lo)
        violated = False
        for i, t in enumerate(diag):
            lo, hi = D.lo[i], D.hi[i]
            corners = [
                (t * a + (1 - t) * b, a, b)
                for a in (lo, hi)
                for b in (lo, hi)
            ]
            low = min(corners)
            high = max(corners)
            if low[0] < lo:
                witness_x[i], witness_y[i] = low[1], low[2]
                violated = True
            elif high[0] > hi:
                witness_x[i], witness_y[i] = high[1], high[2]
                violated = True
        if violated:
            x = g.element(witness_x)
            y = g.element(witness_y)
            return refuted((x, y, _combination(T, x, y)))
        return proved()
    rng = random.Random(seed)
    for _ in range(samples):
        x = sample(D, rng)
        y = sample(D, rng)
        point = _combination(T, x, y)
        if not contains(D, point):
            return refuted((x, y, point))
    return unfalsified(samples)


def t_convex_pointwise(D: FiniteSet, T: Endomorphism) -> Verdict:
    """Equivalent test: T maps every translate D - p into itself."""
    if not isinstance(D, FiniteSet):
        raise NotFinite("the pointwise test enumerates translates")
    g = D.group
    for p in D.elements:
        translate = frozenset(g.sub(d, p) for d in D.elements)
        for v in translate:
            if T.apply(v) not in translate:
                return refuted((p, g.add(v, p)))
    return proved()


def is_family_convex(
    D: PointSet, Ts: Sequence[Endomorphism], samples: int = 64, seed: int = 0
) -> Verdict:
    """Conjunction of per-endomorphism convexity verdicts."""
    total_samples = 0
    sampled = False
    for T in Ts:
        verdict = is_T_convex(D, T, samples=samples, seed=seed)
        if verdict.refuted:
            return refuted((T,) + verdict.witness)
        if verdict.unfalsified:
            sampled = True
            total_samples += verdict.samples
    if sampled:
        return unfalsified(total_samples)
    return proved()


def convex_hull(
    S: PointSet, Ts: Sequence[Endomorphism], max_iter: int = 1000
) -> tuple[FiniteSet, bool]:
    """Least fixed point of one-step closure under x, y -> T(x) + (I-T)(y).

    The result is extensive and monotone; when the fixed point is reached
    the ``complete`` flag is set and the hull is family-convex.  Iteration
    order is deterministic (sorted elements, family order).
    """
    if not isinstance(S, FiniteSet):
        raise NotFinite("hulls are computed from explicit finite seeds")
    for T in Ts:
        if T.group != S.group:
            raise GroupMismatch(f"{S.group} vs {T.group}")
    current = set(S.elements)
    complete = False
    for _ in range(max_iter):
        snapshot = sorted(current)
        grown = False
        for T in Ts:
            for x in snapshot:
                for y in snapshot:
                    point = _combination(T, x, y)
                    if point not in current:
                        current.add(point)
                        grown = True
        if not grown:
            complete = True
            break
    return finite_set(S.group, current), complete


@lru_cache(maxsize=None)
def family_of(D: PointSet) -> tuple[Endomorphism, ...]:
    """All endomorphisms of a finite group that make D convex.

    Always contains the zero map and the identity.
    """
    if not isinstance(D.group, FiniteGroup):
        raise NotEnumerable(f"the endomorphism ring of {D.group} is not enumerable")
    members = tuple(
        T for T in all_endomorphisms(D.group) if is_T_convex(D, T).proved
    )
    assert identity(D.group) in members and zero_endo(D.group) in members
    return members


def diameter(A: PointSet, metric: Metric) -> Fraction:
    """Largest pairwise distance; exact from interval widths on boxes."""
    g = A.group
    if isinstance(A, FiniteSet):
        if not A.elements:
            raise EmptySet("the empty set has no diameter")
        best = Fraction(0)
        for i, x in enumerate(A.elements):
            for y in A.elements[i + 1:]:
                d = norm(g, metric, g.sub(x, y))
                if d > best:
                    best = d
        return best
    return norm(g, metric, g.sub(A.hi, A.lo))


def image_set(D: FiniteSet, A: Endomorphism) -> FiniteSet:
    """Exact image of a finite set."""
    if not isinstance(D, FiniteSet):
        raise NotEnumerable("images are computed for explicit finite sets")
    if D.group != A.group:
        raise GroupMismatch(f"{D.group} vs {A.group}")
    return finite_set(D.group, (A.apply(x) for x in D.elements))


def preimage_set(D: PointSet, A: Endomorphism) -> FiniteSet:
    """Exact preimage by fiber enumeration over a finite group."""
    g = A.group
    if not isinstance(g, FiniteGroup):
        raise NotEnumerable("preimages are enumerated over finite groups")
    if D.group != g:
        raise GroupMismatch(f"{D.group} vs {g}")
    return finite_set(g, (x for x in g.elements() if contains(D, A.apply(x))))
