"""Executable verification of the package's structural results.

Each property identifier maps to one checker.  A checker first validates its
own hypotheses and raises :class:`HypothesisFailed` naming the violated one;
only then does it test the conclusion, so a hypothesis violation is never
conflated with a refutation.  Refutations of true statements signal an
implementation bug and carry a minimal witness.

``counterexample_search`` draws deterministic pseudo-random instances that
satisfy a property's hypotheses and reports the first violation, the sample
count, or ``GeneratorExhausted`` when the hypotheses are unsatisfiable (for
example, no finite group admits an n with injectivity measure above one).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Callable, Mapping

from . import convexity as cx
from . import endo as en
from .convexity import BoxSet, FiniteSet, PointSet
from .endo import Endomorphism
from .errors import (
    GeneratorExhausted,
    HypothesisFailed,
    NotEnumerable,
    SNotInvertible,
    UnsupportedRepresentation,
)
from .groups import (
    CyclicMetric,
    DyadicLattice,
    FiniteGroup,
    Group,
    IntLattice,
    LinfMetric,
    Metric,
    Vector,
    mu_of_n,
    norm_of_n,
    validate_metric,
)
from .verdicts import Verdict, proved, refuted, unfalsified


class PropertyId(Enum):
    LEMMA_MU = "LEMMA_MU"
    COR_MU = "COR_MU"
    LEMMA_NX = "LEMMA_NX"
    THM_RCT = "THM_RCT"
    LEMMA_SR = "LEMMA_SR"
    THM_NIT = "THM_NIT"
    COR_NIT = "COR_NIT"
    THM_0 = "THM_0"
    LEM_TC = "LEM_TC"
    THM_P1 = "THM_P1"
    COR_1 = "COR_1"
    THM_2 = "THM_2"
    THM_NK = "THM_NK"
    THM_NK_PLUS = "THM_NK_PLUS"
    COR_NKC1 = "COR_NKC1"
    COR_NKC2 = "COR_NKC2"
    EXA_TILDE = "EXA_TILDE"


@dataclass(frozen=True)
class Params:
    n0: int | None = None
    horizon: int = 8
    budget: int = 100
    seed: int = 0
    max_iter: int = 200


@dataclass
class Instance:
    """A concrete scenario: group, validated metric, named endos and sets."""

    group: Group
    metric: Metric
    endos: dict[str, Endomorphism] = field(default_factory=dict)
    sets: dict[str, PointSet] = field(default_factory=dict)
    params: Params = field(default_factory=Params)


# bound for the natural-number specialization of the measure inequalities
_NAT_SPAN = 20
# largest finite group enumerated subset-exhaustively
_SUBSET_CAP = 9


def _endo_universe(inst: Instance, exclude: tuple[str, ...] = ()) -> list[Endomorphism]:
    named = [T for name, T in inst.endos.items() if name not in exclude]
    if named:
        return named
    if isinstance(inst.group, FiniteGroup):
        return list(en.all_endomorphisms(inst.group))
    raise NotEnumerable(
        "lattice instances must name their endomorphisms explicitly"
    )


def _named_set(inst: Instance, name: str) -> PointSet:
    if name not in inst.sets:
        raise HypothesisFailed(f"set {name!r} is provided")
    return inst.sets[name]


def _named_endo(inst: Instance, name: str) -> Endomorphism:
    if name in inst.endos:
        return inst.endos[name]
    if name == "T" and len(inst.endos) == 1:
        return next(iter(inst.endos.values()))
    raise HypothesisFailed(f"endomorphism {name!r} is provided")


def _all_subsets(group: FiniteGroup) -> list[FiniteSet]:
    if group.order > _SUBSET_CAP:
        raise NotEnumerable(
            f"subset-exhaustive mode is capped at order {_SUBSET_CAP}"
        )
    elems = list(group.elements())
    out = []
    for r in range(len(elems) + 1):
        for combo in itertools.combinations(elems, r):
            out.append(cx.finite_set(group, combo))
    return out


def _candidate_sets(inst: Instance) -> list[tuple[str, PointSet]]:
    if inst.sets:
        return list(inst.sets.items())
    if isinstance(inst.group, FiniteGroup):
        return [(str(D), D) for D in _all_subsets(inst.group)]
    raise NotEnumerable("lattice instances must name their sets explicitly")


def _combo(T: Endomorphism, T1: Endomorphism, T2: Endomorphism) -> Endomorphism:
    ident = en.identity(T.group)
    return T.compose(T1).add(ident.sub(T).compose(T2))


def verify(prop: PropertyId, inst: Instance) -> Verdict:
    """Run the checker for ``prop`` on ``inst``; pure in its arguments."""
    validate_status = validate_metric(inst.group, inst.metric)
    if not validate_status.proved:
        raise HypothesisFailed("the metric satisfies the norm axioms")
    return _CHECKERS[prop](inst)


# ---------------------------------------------------------------------------
# Checkers: operator inequalities
# ---------------------------------------------------------------------------

def _check_lemma_mu(inst: Instance) -> Verdict:
    """Supermultiplicativity and Lipschitz bounds of the injectivity measure."""
    m = inst.metric
    universe = _endo_universe(inst)
    for T in universe:
        for S in universe:
            mu_t = en.injectivity_measure(T, m)
            mu_s = en.injectivity_measure(S, m)
            composed = T.compose(S)
            if mu_t * en.op_norm(S, m) > en.op_norm(composed, m):
                return refuted(("norm supermultiplicativity", T, S))
            if mu_t * mu_s > en.injectivity_measure(composed, m):
                return refuted(("measure supermultiplicativity", T, S))
            if abs(mu_t - mu_s) > en.operator_distance(T, S, m):
                return refuted(("Lipschitz bound", T, S))
    failure = _scalar_specialization(inst.group, m)
    if failure is not None:
        return refuted(failure)
    return proved()


@lru_cache(maxsize=None)
def _scalar_specialization(g: Group, m: Metric) -> tuple | None:
    """The measure inequalities specialized to multiplication maps."""
    for n in range(1, _NAT_SPAN + 1):
        mu_n = mu_of_n(g, m, n)
        for k in range(1, _NAT_SPAN + 1):
            if mu_n * norm_of_n(g, m, k) > norm_of_n(g, m, n * k):
                return ("scalar norm supermultiplicativity", n, k)
            if mu_n * mu_of_n(g, m, k) > mu_of_n(g, m, n * k):
                return ("scalar measure supermultiplicativity", n, k)
            if abs(mu_n - mu_of_n(g, m, k)) > abs(n - k):
                return ("scalar Lipschitz bound", n, k)
    return None


def _check_cor_mu(inst: Instance) -> Verdict:
    """Operators of positive measure form an open multiplicative semigroup."""
    m = inst.metric
    universe = _endo_universe(inst)
    for T in universe:
        mu_t = en.injectivity_measure(T, m)
        if mu_t <= 0:
            continue
        for S in universe:
            mu_s = en.injectivity_measure(S, m)
            if mu_s > 0 and en.injectivity_measure(T.compose(S), m) <= 0:
                return refuted(("semigroup closure", T, S))
            if en.operator_distance(T, S, m) < mu_t and mu_s <= 0:
                return refuted(("openness", T, S))
    return proved()


def _check_lemma_nx(inst: Instance) -> Verdict:
    """Bounded sets map to bounded sets; injective maps preserve cardinality."""
    m = inst.metric
    universe = _endo_universe(inst)
    finite_sets = [D for D in inst.sets.values() if isinstance(D, FiniteSet) and D.elements]
    if not finite_sets:
        raise HypothesisFailed("at least one nonempty finite set is provided")
    for T in universe:
        bound = en.op_norm(T, m)
        for D in finite_sets:
            image = cx.image_set(D, T)
            if cx.diameter(image, m) > bound * cx.diameter(D, m):
                return refuted(("diameter bound", T, D))
            if en.injectivity_measure(T, m) > 0 and len(image) != len(D):
                return refuted(("injective image cardinality", T, D))
    return proved()


def _check_lemma_sr(inst: Instance) -> Verdict:
    """Ordering of measure, spectral radius and norm; commuting-pair bounds."""
    m = inst.metric
    horizon = inst.params.horizon
    universe = _endo_universe(inst)
    exact = isinstance(inst.group, FiniteGroup)
    for T in universe:
        bracket = en.spectral_radius(T, m, horizon)
        if en.injectivity_measure(T, m) > bracket.upper:
            return refuted(("measure below radius", T))
        if bracket.upper > en.op_norm(T, m):
            return refuted(("radius below norm", T))
    if exact:
        for T in universe:
            rho_t = en.spectral_radius(T, m, horizon).value
            for S in universe:
                if T.compose(S) != S.compose(T):
                    continue
                rho_s = en.spectral_radius(S, m, horizon).value
                if en.spectral_radius(T.add(S), m, horizon).value > rho_t + rho_s:
                    return refuted(("subadditivity of the radius", T, S))
                rho_ts = en.spectral_radius(T.compose(S), m, horizon).value
                if en.injectivity_measure(T, m) * rho_s > rho_ts:
                    return refuted(("measure-radius supermultiplicativity", T, S))
                if rho_ts > rho_t * rho_s:
                    return refuted(("submultiplicativity of the radius", T, S))
    return proved()


# ---------------------------------------------------------------------------
# Checkers: cancellation and inversion
# ---------------------------------------------------------------------------

def _check_thm_rct(inst: Instance) -> Verdict:
    """Cancellation: from A+C inside B+C conclude A inside B."""
    params = inst.params
    if params.n0 is None:
        raise HypothesisFailed("parameter n0 is provided")
    g, m = inst.group, inst.metric
    if mu_of_n(g, m, params.n0) <= 1:
        raise HypothesisFailed(
            "mu_d(n0) > 1",
            f"mu_d({params.n0}) = {mu_of_n(g, m, params.n0)}",
        )
    A = _named_set(inst, "A")
    B = _named_set(inst, "B")
    C = _named_set(inst, "C")
    if not isinstance(A, FiniteSet) or not isinstance(C, FiniteSet):
        raise UnsupportedRepresentation("A and C must be explicit finite sets")
    if cx.is_empty(C):
        raise HypothesisFailed("C is nonempty")
    if not cx.is_n_convex(B, params.n0).proved:
        raise HypothesisFailed(f"B is n0-convex (n0={params.n0})")
    for a in A.elements:
        for c in C.elements:
            if not cx.member_of_sum(g.add(a, c), B, C):
                raise HypothesisFailed("A+C is included in B+C")
    for a in A.elements:
        if not cx.contains(B, a):
            return refuted((a,))
    return proved()


def _check_thm_nit(inst: Instance) -> Verdict:
    """I - T inverts through the geometric series when the radius is below one."""
    if not inst.endos:
        raise HypothesisFailed("an endomorphism to invert is provided")
    g, m = inst.group, inst.metric
    if not g.complete:
        raise HypothesisFailed("the group is complete")
    inverses = []
    for name, T in inst.endos.items():
        bracket = en.spectral_radius(T, m, inst.params.horizon)
        if not bracket.certified_below_one:
            raise HypothesisFailed(
                f"spectral radius of {name} is certified below one"
            )
        series = en.neumann_inverse(T, m, max_terms=inst.params.max_iter)
        factor = en.identity(g).sub(T)
        ident = en.identity(g)
        if factor.compose(series) != ident or series.compose(factor) != ident:
            return refuted((name, series))
        inverses.append(series)
    return proved(witness=tuple(inverses))


def _check_cor_nit(inst: Instance) -> Verdict:
    """S - T inverts when S does and the relative perturbation is small."""
    g, m = inst.group, inst.metric
    if not g.complete:
        raise HypothesisFailed("the group is complete")
    S = _named_endo(inst, "S")
    T = _named_endo(inst, "T")
    s_inv = en.try_inverse(S)
    if s_inv is None:
        raise HypothesisFailed("S is invertible with a representable inverse")
    certified = False
    for reduced in (T.compose(s_inv), s_inv.compose(T)):
        if en.spectral_radius(reduced, m, inst.params.horizon).certified_below_one:
            certified = True
    if not certified:
        raise HypothesisFailed(
            "one of rho(T S^-1), rho(S^-1 T) is certified below one"
        )
    try:
        result = en.shifted_inverse(S, T, m, max_terms=inst.params.max_iter)
    except SNotInvertible as err:
        raise HypothesisFailed("S is invertible with a representable inverse") from err
    difference = S.sub(T)
    ident = en.identity(g)
    if difference.compose(result) != ident or result.compose(difference) != ident:
        return refuted((result,))
    return proved(witness=(result,))


# ---------------------------------------------------------------------------
# Checkers: structure of convex sets
# ---------------------------------------------------------------------------

def _family_statuses(D: PointSet, family: list[Endomorphism], params: Params):
    return cx.is_family_convex(D, family, samples=params.budget, seed=params.seed)


def _check_thm_0(inst: Instance) -> Verdict:
    """Convex sets are closed under intersection, chain union, addition,
    and images/preimages through commuting endomorphisms."""
    params = inst.params
    family = [T for name, T in inst.endos.items() if name != "A"]
    if not family:
        raise HypothesisFailed("a nonempty family of endomorphisms is provided")
    g = inst.group

    named_mode = bool(inst.sets)
    convex_sets: list[PointSet] = []
    for name, D in _candidate_sets(inst):
        verdict = _family_statuses(D, family, params)
        if verdict.proved:
            convex_sets.append(D)
        elif named_mode:
            raise HypothesisFailed(f"set {name!r} is family-convex")

    # (i) empty set, whole space, singletons
    if not _family_statuses(cx.finite_set(g, ()), family, params).proved:
        return refuted(("empty set",))
    if isinstance(g, FiniteGroup):
        whole = cx.finite_set(g, g.elements())
        if not _family_statuses(whole, family, params).proved:
            return refuted(("whole space",))
        singleton_pool = list(g.elements())
    else:
        singleton_pool = [g.zero()]
        rng = random.Random(params.seed)
        box = cx.box_set(g, [-2] * g.dim, [2] * g.dim)
        singleton_pool += [cx.sample(box, rng) for _ in range(8)]
    for x in singleton_pool:
        if not _family_statuses(cx.finite_set(g, [x]), family, params).proved:
            return refuted(("singleton", x))

    # (ii) intersections and finite chain unions
    for D1, D2 in itertools.combinations(convex_sets, 2):
        meet = cx.intersect(D1, D2)
        if not _family_statuses(meet, family, params).proved:
            return refuted(("intersection", D1, D2))
    for D1, D2 in itertools.permutations(convex_sets, 2):
        if cx.subset_of(D1, D2):
            if isinstance(D1, FiniteSet) and isinstance(D2, FiniteSet):
                union = cx.finite_set(g, D1.elements + D2.elements)
            else:
                union = D2
            if not _family_statuses(union, family, params).proved:
                return refuted(("chain union", D1, D2))

    # (iii) algebraic addition
    for D1, D2 in itertools.combinations_with_replacement(convex_sets, 2):
        if isinstance(D1, FiniteSet) != isinstance(D2, FiniteSet):
            continue
        total = cx.sumset(D1, D2)
        if not _family_statuses(total, family, params).proved:
            return refuted(("sumset", D1, D2))

    # (iv) images and preimages through a commuting endomorphism
    if "A" in inst.endos:
        commuting = [inst.endos["A"]]
        for T in family:
            if commuting[0].compose(T) != T.compose(commuting[0]):
                raise HypothesisFailed("A commutes with every family member")
    elif isinstance(g, FiniteGroup):
        ring = en.all_endomorphisms(g) if g.order <= 16 else [
            en.scaling(g, n) for n in range(max(g.moduli))
        ]
        commuting = [
            A for A in ring if all(A.compose(T) == T.compose(A) for T in family)
        ]
    else:
        commuting = []
    for A in commuting:
        for D in convex_sets:
            if not isinstance(D, FiniteSet):
                continue
            if not _family_statuses(cx.image_set(D, A), family, params).proved:
                return refuted(("image", A, D))
            if isinstance(g, FiniteGroup):
                pre = cx.preimage_set(D, A)
                if not _family_statuses(pre, family, params).proved:
                    return refuted(("preimage", A, D))
    return proved()


def _check_lem_tc(inst: Instance) -> Verdict:
    """The pair test and the translate test for convexity agree."""
    universe = _endo_universe(inst)
    candidates = [
        D for _, D in _candidate_sets(inst) if isinstance(D, FiniteSet)
    ]
    if not candidates:
        raise HypothesisFailed("at least one finite set is provided")
    for D in candidates:
        for T in universe:
            direct = cx.is_T_convex(D, T).status
            pointwise = cx.t_convex_pointwise(D, T).status
            if direct is not pointwise:
                return refuted((D, T))
    return proved()


def _check_thm_p1(inst: Instance) -> Verdict:
    """The family of a set is convex under its own induced combinations."""
    if not isinstance(inst.group, FiniteGroup):
        raise NotEnumerable("the full endomorphism ring is needed; use a finite group")
    for name, D in _candidate_sets(inst):
        family = frozenset(cx.family_of(D))
        if en.zero(inst.group) not in family or en.identity(inst.group) not in family:
            return refuted(("zero and identity membership", D))
        for T in family:
            for T1 in family:
                for T2 in family:
                    if _combo(T, T1, T2) not in family:
                        return refuted((D, T, T1, T2))
    return proved()


def _check_cor_1(inst: Instance) -> Verdict:
    """Families are closed under composition, reflection and pair mixing."""
    if not isinstance(inst.group, FiniteGroup):
        raise NotEnumerable("the full endomorphism ring is needed; use a finite group")
    ident = en.identity(inst.group)
    for name, D in _candidate_sets(inst):
        family = frozenset(cx.family_of(D))
        for T in family:
            if ident.sub(T) not in family:
                return refuted(("reflection", D, T))
            for S in family:
                if T.compose(S) not in family:
                    return refuted(("composition", D, T, S))
                mixed = T.compose(S).add(ident.sub(T).compose(ident.sub(S)))
                if mixed not in family:
                    return refuted(("pair mixing", D, T, S))
    return proved()


def _check_thm_2(inst: Instance) -> Verdict:
    """The midpoint recursion stays inside the family and collapses to I/2."""
    g, m, params = inst.group, inst.metric, inst.params
    T = _named_endo(inst, "T")
    if not g.divisible_by(2):
        raise HypothesisFailed("the group is uniquely 2-divisible")
    ident = en.identity(g)
    reflected = T.scale(2).sub(ident)
    bracket = en.spectral_radius(reflected, m, params.horizon)
    if not bracket.certified_below_one:
        raise HypothesisFailed(
            "spectral radius of 2T - I is certified below one",
            f"bracket [{bracket.lower}, {bracket.upper}]",
        )
    half_identity = en.halve(ident)
    iterates = [en.midpoint_recursion(T, n) for n in range(1, params.horizon + 1)]
    for n, iterate in enumerate(iterates, start=1):
        if iterate != en.midpoint_closed_form(T, n):
            return refuted(("closed form mismatch", n))
    distances = [en.operator_distance(it, half_identity, m) for it in iterates]
    for earlier, later in zip(distances, distances[1:]):
        if later > earlier:
            return refuted(("distance to I/2 is nonincreasing", distances))
    if g.complete and iterates[-1] != half_identity:
        return refuted(("exact collapse to I/2", iterates[-1]))

    for name, D in inst.sets.items():
        base = cx.is_T_convex(D, T, samples=params.budget, seed=params.seed)
        if not base.proved:
            raise HypothesisFailed(f"set {name!r} is T-convex")
        if not g.complete:
            continue
        for n, iterate in enumerate(iterates, start=1):
            if not cx.is_T_convex(D, iterate).proved:
                return refuted(("iterate keeps D convex", name, n))
        if not cx.is_T_convex(D, half_identity).proved:
            return refuted(("closed convex sets are midpoint convex", name))
        if isinstance(g, FiniteGroup):
            family = frozenset(cx.family_of(D))
            for R in family:
                for S in family:
                    if en.halve(R.add(S)) not in family:
                        return refuted(("family midpoint convexity", name, R, S))
    return proved()


# ---------------------------------------------------------------------------
# Checkers: sum inclusion results
# ---------------------------------------------------------------------------

def _diag_or_raise(T: Endomorphism) -> tuple:
    diag = cx._diagonal(T)
    if diag is None:
        raise UnsupportedRepresentation(
            "box instances require diagonal endomorphisms"
        )
    return diag


def _interval_image(diag: tuple, lo: Vector, hi: Vector) -> tuple[list, list]:
    los, his = [], []
    for t, a, b in zip(diag, lo, hi):
        images = (t * a, t * b)
        los.append(min(images))
        his.append(max(images))
    return los, his


def _nk_hypotheses(inst: Instance, need_closed_conclusion: bool):
    g, m, params = inst.group, inst.metric, inst.params
    if params.n0 is None:
        raise HypothesisFailed("parameter n0 is provided")
    mu0 = mu_of_n(g, m, params.n0)
    if mu0 <= 1:
        raise HypothesisFailed("mu_d(n0) > 1", f"mu_d({params.n0}) = {mu0}")
    D = _named_set(inst, "D")
    if not inst.endos:
        raise HypothesisFailed("a family T_1..T_n is provided")
    family = list(inst.endos.values())
    if not cx.is_n_convex(D, params.n0).proved:
        raise HypothesisFailed(f"D is n0-convex (n0={params.n0})")
    for name, T in inst.endos.items():
        if not cx.is_T_convex(D, T, samples=params.budget, seed=params.seed).proved:
            raise HypothesisFailed(f"endomorphism {name!r} makes D convex")
    total = reduce(lambda a, b: a.add(b), family)
    if need_closed_conclusion:
        # closedness of the image set: compactness of D, completeness with
        # positive measure, or a closed image through a lattice automorphism.
        if isinstance(D, FiniteSet):
            pass
        elif g.complete and en.injectivity_measure(total, m) > 0:
            pass
        elif en.try_inverse(total) is not None:
            pass
        else:
            raise HypothesisFailed(
                "one of: D compact, X complete with mu(sum) > 0, sum image closed"
            )
    else:
        if not (g.complete or g.divisible_by(params.n0)):
            raise HypothesisFailed("the group is complete or n0*X is closed")
    return D, family, total


def _sum_inclusion(inst: Instance, with_closure: bool) -> Verdict:
    D, family, total = _nk_hypotheses(inst, need_closed_conclusion=not with_closure)
    g, params = inst.group, inst.params
    if isinstance(D, FiniteSet):
        images = [cx.image_set(D, T) for T in family]
        lhs = reduce(cx.sumset, images)
        rhs = cx.image_set(D, total)
        for point in lhs.elements:
            if not cx.contains(rhs, point):
                return refuted((point,))
        return proved()

    if isinstance(g, IntLattice):
        points = cx._box_points(D)
        return _sum_inclusion_finite_like(g, points, family, total)

    diags = [_diag_or_raise(T) for T in family]
    total_diag = _diag_or_raise(total)
    lhs_lo = [Fraction(0)] * g.dim
    lhs_hi = [Fraction(0)] * g.dim
    for diag in diags:
        los, his = _interval_image(diag, D.lo, D.hi)
        lhs_lo = [a + b for a, b in zip(lhs_lo, los)]
        lhs_hi = [a + b for a, b in zip(lhs_hi, his)]
    rhs_lo, rhs_hi = _interval_image(total_diag, D.lo, D.hi)

    if with_closure:
        # densities: a nonzero dyadic multiple of the dyadic lattice is dense
        # in the reals, so the closure of the image is the full interval box.
        high_violation = next(
            (i for i in range(g.dim) if lhs_hi[i] > rhs_hi[i]), None
        )
        low_violation = next(
            (i for i in range(g.dim) if lhs_lo[i] < rhs_lo[i]), None
        )
        if high_violation is None and low_violation is None:
            return proved()
        witness = _extreme_witness(g, D, family, maximize=high_violation is not None)
        return refuted(witness)

    # exact conclusion without closure: every sum point must be a lattice
    # image point.  Unit diagonals keep images box-exact; otherwise sample.
    if _units_only(g, diags) and _units_only(g, [total_diag]):
        lhs_box = None
        for diag in diags:
            los, his = _interval_image(diag, D.lo, D.hi)
            piece = cx.box_set(g, los, his)
            lhs_box = piece if lhs_box is None else cx.sumset(lhs_box, piece)
        rhs_box = cx.box_set(g, rhs_lo, rhs_hi)
        if cx.subset_of(lhs_box, rhs_box):
            return proved()
        return refuted((lhs_box, rhs_box))
    inverse = en.try_inverse(total)
    if inverse is None:
        raise UnsupportedRepresentation(
            "sampled conclusion needs an invertible endomorphism sum"
        )
    rng = random.Random(params.seed)
    for _ in range(params.budget):
        xs = [cx.sample(D, rng) for _ in family]
        point = reduce(g.add, (T.apply(x) for T, x in zip(family, xs)))
        if not cx.contains(D, inverse.apply(point)):
            return refuted((tuple(xs), point))
    return unfalsified(params.budget)


def _units_only(g: Group, diags: list[tuple]) -> bool:
    """True when every diagonal entry scales the lattice onto itself (or to 0).

    Such entries keep images of boxes box-exact: the lattice units are +-1 on
    Z^n and the powers of two (up to sign) on the dyadic lattice.
    """
    for diag in diags:
        for t in diag:
            if t == 0:
                continue
            q = Fraction(t)
            if isinstance(g, IntLattice):
                if abs(q) != 1:
                    return False
            else:
                num = abs(q.numerator)
                if num & (num - 1):
                    return False
    return True


def _extreme_witness(g, D, family, maximize: bool):
    # corner points attain the interval endpoints of the sum, so a failed
    # interval inclusion always yields an explicit violating combination.
    xs = []
    for T in family:
        diag = cx._diagonal(T)
        if maximize:
            coords = [hi if t >= 0 else lo for t, lo, hi in zip(diag, D.lo, D.hi)]
        else:
            coords = [lo if t >= 0 else hi for t, lo, hi in zip(diag, D.lo, D.hi)]
        xs.append(g.element(coords))
    point = reduce(g.add, (T.apply(x) for T, x in zip(family, xs)))
    return (tuple(xs), point)


def _sum_inclusion_finite_like(g, points, family, total) -> Verdict:
    images = [{T.apply(x) for x in points} for T in family]
    current = {g.zero()}
    for img in images:
        current = {g.add(a, b) for a in current for b in img}
    rhs = {total.apply(x) for x in points}
    for point in sorted(current):
        if point not in rhs:
            return refuted((point,))
    return proved()


def _check_thm_nk(inst: Instance) -> Verdict:
    return _sum_inclusion(inst, with_closure=True)


def _check_thm_nk_plus(inst: Instance) -> Verdict:
    return _sum_inclusion(inst, with_closure=False)


def _check_cor_nkc1(inst: Instance) -> Verdict:
    """A compact n0-convex set is n-convex for every n."""
    g, m, params = inst.group, inst.metric, inst.params
    if params.n0 is None:
        raise HypothesisFailed("parameter n0 is provided")
    mu0 = mu_of_n(g, m, params.n0)
    if mu0 <= 1:
        raise HypothesisFailed("mu_d(n0) > 1", f"mu_d({params.n0}) = {mu0}")
    D = _named_set(inst, "D")
    if not isinstance(D, FiniteSet):
        raise HypothesisFailed("D is compact (modeled as an explicit finite set)")
    if not cx.is_n_convex(D, params.n0).proved:
        raise HypothesisFailed(f"D is n0-convex (n0={params.n0})")
    for n in range(2, params.horizon + 1):
        verdict = cx.is_n_convex(D, n)
        if not verdict.proved:
            return refuted((n,) + (verdict.witness or ()))
    return proved()


def _check_cor_nkc2(inst: Instance) -> Verdict:
    """Normalized partial sums of a family stay in the family."""
    D, family, total = _nk_hypotheses(inst, need_closed_conclusion=True)
    params = inst.params
    inverse = en.try_inverse(total)
    if inverse is None:
        raise HypothesisFailed("the family sum is invertible with a bounded inverse")
    members = []
    partial = None
    for T in family[:-1]:
        partial = T if partial is None else partial.add(T)
        candidate = inverse.compose(partial)
        verdict = cx.is_T_convex(D, candidate, samples=params.budget, seed=params.seed)
        if verdict.refuted:
            return refuted((candidate,) + verdict.witness)
        if verdict.unfalsified:
            return unfalsified(verdict.samples)
        members.append(candidate)
    return proved(witness=tuple(members))


def _check_exa_tilde(inst: Instance) -> Verdict:
    """Negative control: scalar families are not closed under combinations.

    Combining multiplication by 3, 4 and 5 produces multiplication by 2,
    which lies outside the family on any group where these four scalar maps
    are distinct; the computed witness is returned.
    """
    g = inst.group
    three, four, five = (en.scaling(g, k) for k in (3, 4, 5))
    combined = _combo(three, four, five)
    expected = en.scaling(g, 2)
    if combined != expected:
        return refuted(("ring identity", combined))
    if combined in (three, four, five):
        return refuted(("family coincidence", combined))
    return proved(witness=(combined,))


_CHECKERS: Mapping[PropertyId, Callable[[Instance], Verdict]] = {
    PropertyId.LEMMA_MU: _check_lemma_mu,
    PropertyId.COR_MU: _check_cor_mu,
    PropertyId.LEMMA_NX: _check_lemma_nx,
    PropertyId.THM_RCT: _check_thm_rct,
    PropertyId.LEMMA_SR: _check_lemma_sr,
    PropertyId.THM_NIT: _check_thm_nit,
    PropertyId.COR_NIT: _check_cor_nit,
    PropertyId.THM_0: _check_thm_0,
    PropertyId.LEM_TC: _check_lem_tc,
    PropertyId.THM_P1: _check_thm_p1,
    PropertyId.COR_1: _check_cor_1,
    PropertyId.THM_2: _check_thm_2,
    PropertyId.THM_NK: _check_thm_nk,
    PropertyId.THM_NK_PLUS: _check_thm_nk_plus,
    PropertyId.COR_NKC1: _check_cor_nkc1,
    PropertyId.COR_NKC2: _check_cor_nkc2,
    PropertyId.EXA_TILDE: _check_exa_tilde,
}

assert set(_CHECKERS) == set(PropertyId), "every property maps to one checker"


# ---------------------------------------------------------------------------
# Randomized counterexample search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorConfig:
    """Shape of the instance distribution used by the search."""

    family: str = "finite"  # finite | int | dyadic
    group: Group | None = None
    metric: Metric | None = None
    moduli_range: tuple[int, int] = (4, 12)
    max_factors: int = 2
    dim_range: tuple[int, int] = (1, 3)
    entry_range: tuple[int, int] = (-3, 3)
    set_size: tuple[int, int] = (1, 4)
    exhaustive: bool = False


_NEEDS_EXPANSIVE_SCALAR = {
    PropertyId.THM_RCT,
    PropertyId.THM_NK,
    PropertyId.THM_NK_PLUS,
    PropertyId.COR_NKC1,
    PropertyId.COR_NKC2,
}

_FINITE_ONLY = {PropertyId.THM_P1, PropertyId.COR_1}


def _draw_group(gen: GeneratorConfig, rng: random.Random) -> Group:
    if gen.group is not None:
        return gen.group
    if gen.family == "finite":
        count = rng.randint(1, gen.max_factors)
        return FiniteGroup(tuple(rng.randint(*gen.moduli_range) for _ in range(count)))
    dim = rng.randint(*gen.dim_range)
    return IntLattice(dim) if gen.family == "int" else DyadicLattice(dim)


def _metric_for(gen: GeneratorConfig, group: Group) -> Metric:
    if gen.metric is not None:
        return gen.metric
    unit = tuple(Fraction(1) for _ in range(group.dim))
    if isinstance(group, FiniteGroup):
        return CyclicMetric(unit)
    return LinfMetric(unit)


def _draw_endo(group: Group, gen: GeneratorConfig, rng: random.Random) -> Endomorphism:
    n = group.dim
    if isinstance(group, FiniteGroup):
        ring = en.all_endomorphisms(group)
        return ring[rng.randrange(len(ring))]
    if isinstance(group, IntLattice):
        rows = [[rng.randint(*gen.entry_range) for _ in range(n)] for _ in range(n)]
        return en.make_endo(group, rows)
    rows = [
        [
            Fraction(rng.randint(*gen.entry_range), 1 << rng.randint(0, 2))
            for _ in range(n)
        ]
        for _ in range(n)
    ]
    return en.make_endo(group, rows)


def _unit_box_diag(group: Group, rng: random.Random) -> Endomorphism:
    choices = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))
    n = group.dim
    rows = [[choices[rng.randrange(len(choices))] if i == j else 0 for j in range(n)] for i in range(n)]
    return en.make_endo(group, rows)


def _draw_finite_set(group: Group, gen: GeneratorConfig, rng: random.Random) -> FiniteSet:
    size = rng.randint(*gen.set_size)
    points = []
    for _ in range(size):
        if isinstance(group, FiniteGroup):
            points.append([rng.randrange(m) for m in group.moduli])
        elif isinstance(group, IntLattice):
            points.append([rng.randint(-3, 3) for _ in range(group.dim)])
        else:
            points.append(
                [Fraction(rng.randint(-8, 8), 1 << rng.randint(0, 2)) for _ in range(group.dim)]
            )
    return cx.finite_set(group, points)


def _draw_box(group: Group, rng: random.Random) -> BoxSet:
    lo, hi = [], []
    for _ in range(group.dim):
        if isinstance(group, IntLattice):
            a = rng.randint(-3, 2)
            lo.append(a)
            hi.append(a + rng.randint(0, 3))
        else:
            a = Fraction(rng.randint(-8, 4), 4)
            lo.append(a)
            hi.append(a + Fraction(rng.randint(0, 8), 4))
    return cx.box_set(group, lo, hi)


def _retry(rng: random.Random, attempts: int, draw, accept):
    for _ in range(attempts):
        candidate = draw()
        if accept(candidate):
            return candidate
    raise GeneratorExhausted("could not satisfy the hypotheses within the retry budget")


def _build_instance(prop: PropertyId, gen: GeneratorConfig, rng: random.Random) -> Instance:
    group = _draw_group(gen, rng)
    metric = _metric_for(gen, group)
    params = Params(seed=rng.randrange(2 ** 30))

    if prop in _NEEDS_EXPANSIVE_SCALAR:
        if isinstance(group, FiniteGroup):
            raise GeneratorExhausted(
                "mu_d(n) <= 1 for every n on a finite group: any element of "
                "maximal norm has ||n*x|| <= ||x||, so the hypothesis "
                "mu_d(n0) > 1 is unsatisfiable"
            )
        n0 = 2 if isinstance(group, IntLattice) else 2 ** rng.randint(1, 2)
        params = Params(n0=n0, seed=rng.randrange(2 ** 30), budget=8)

    if prop is PropertyId.THM_RCT:
        if isinstance(group, DyadicLattice):
            B = _draw_box(group, rng)
        else:
            B = cx.finite_set(group, [[rng.randint(-2, 2) for _ in range(group.dim)]])
        C = _draw_finite_set(group, gen, rng)
        inner = random.Random(rng.randrange(2 ** 30))
        size = rng.randint(*gen.set_size)
        A = cx.finite_set(group, [cx.sample(B, inner) for _ in range(size)])
        return Instance(group, metric, sets={"A": A, "B": B, "C": C}, params=params)

    if prop in (PropertyId.THM_NK, PropertyId.THM_NK_PLUS, PropertyId.COR_NKC2):
        if not isinstance(group, DyadicLattice):
            raise GeneratorExhausted(
                "box instances for sum-inclusion properties use the dyadic lattice"
            )
        D = _draw_box(group, rng)
        endos = {}
        if prop is PropertyId.COR_NKC2:
            # an invertible total: the drawn diagonal and its complement sum
            # to the identity, and both keep any box convex.
            first = _unit_box_diag(group, rng)
            endos["T1"] = first
            endos["T2"] = en.identity(group).sub(first)
        else:
            for i in range(rng.randint(2, 3)):
                endos[f"T{i + 1}"] = _unit_box_diag(group, rng)
        return Instance(group, metric, endos=endos, sets={"D": D}, params=params)

    if prop is PropertyId.COR_NKC1:
        point = [Fraction(rng.randint(-8, 8), 1 << rng.randint(0, 2)) for _ in range(group.dim)]
        D = cx.finite_set(group, [point])
        return Instance(group, metric, sets={"D": D}, params=params)

    if prop is PropertyId.THM_NIT:
        if isinstance(group, DyadicLattice):
            raise GeneratorExhausted("the dyadic lattice is not complete")
        if isinstance(group, FiniteGroup):
            T = _retry(
                rng,
                200,
                lambda: _draw_endo(group, gen, rng),
                lambda T: en.spectral_radius(T, metric, 4).certified_below_one,
            )
        else:
            n = group.dim
            rows = [
                [rng.randint(*gen.entry_range) if j > i else 0 for j in range(n)]
                for i in range(n)
            ]
            T = en.make_endo(group, rows)
        return Instance(group, metric, endos={"T": T}, params=params)

    if prop is PropertyId.COR_NIT:
        if isinstance(group, DyadicLattice):
            raise GeneratorExhausted("the dyadic lattice is not complete")
        if isinstance(group, FiniteGroup):
            S = _retry(
                rng,
                200,
                lambda: _draw_endo(group, gen, rng),
                lambda S: en.try_inverse(S) is not None,
            )
            s_inv = en.try_inverse(S)
            T = _retry(
                rng,
                200,
                lambda: _draw_endo(group, gen, rng),
                lambda T: en.spectral_radius(T.compose(s_inv), metric, 4).certified_below_one
                or en.spectral_radius(s_inv.compose(T), metric, 4).certified_below_one,
            )
        else:
            S = en.identity(group)
            n = group.dim
            rows = [
                [rng.randint(*gen.entry_range) if j > i else 0 for j in range(n)]
                for i in range(n)
            ]
            T = en.make_endo(group, rows)
        return Instance(group, metric, endos={"S": S, "T": T}, params=params)

    if prop is PropertyId.THM_2:
        if gen.family == "finite" and gen.group is None:
            lo, hi = gen.moduli_range
            odd = [m for m in range(lo, hi + 1) if m % 2 == 1 and m >= 3]
            if not odd:
                raise GeneratorExhausted("no odd moduli in range; 2-divisibility fails")
            count = rng.randint(1, gen.max_factors)
            group = FiniteGroup(tuple(odd[rng.randrange(len(odd))] for _ in range(count)))
            metric = _metric_for(gen, group)
        if isinstance(group, FiniteGroup):
            if not group.divisible_by(2):
                raise GeneratorExhausted("the pinned group is not 2-divisible")
            ident = en.identity(group)
            T = _retry(
                rng,
                400,
                lambda: _draw_endo(group, gen, rng),
                lambda T: en.spectral_radius(T.scale(2).sub(ident), metric, 4).certified_below_one,
            )
            seed_set = _draw_finite_set(group, gen, rng)
            hull, _ = cx.convex_hull(seed_set, [T])
            return Instance(group, metric, endos={"T": T}, sets={"D": hull}, params=params)
        if isinstance(group, IntLattice):
            raise GeneratorExhausted("the integer lattice is not 2-divisible")
        T = _unit_box_diag(group, rng)
        diag = cx._diagonal(T)
        if any(t in (0, 1) for t in diag):
            T = en.halve(en.identity(group))
        D = _draw_box(group, rng)
        return Instance(group, metric, endos={"T": T}, sets={"D": D}, params=params)

    if prop is PropertyId.EXA_TILDE:
        return Instance(group, metric, params=params)

    if prop in _FINITE_ONLY:
        if not isinstance(group, FiniteGroup):
            raise GeneratorExhausted("the full endomorphism ring must be enumerable")
        D = _draw_finite_set(group, gen, rng)
        return Instance(group, metric, sets={"D": D}, params=params)

    # inequality suites and structural checks: draw a few endos and sets
    if prop is PropertyId.THM_0 and gen.family == "finite" and gen.group is None:
        # the checker's cost grows with the cube of the order
        group = FiniteGroup((rng.randint(4, 9),))
        metric = _metric_for(gen, group)
    endos = {f"T{i + 1}": _draw_endo(group, gen, rng) for i in range(rng.randint(1, 3))}
    sets = {}
    if prop in (PropertyId.LEMMA_NX, PropertyId.LEM_TC, PropertyId.THM_0):
        sets["D1"] = _draw_finite_set(group, gen, rng)
        if prop is PropertyId.THM_0:
            endos["A"] = en.scaling(group, rng.randint(0, 6))  # commutes with all
            family = [T for name, T in endos.items() if name != "A"]
            if isinstance(group, FiniteGroup):
                # family-convex sets are produced by closing a random seed
                hull, complete = cx.convex_hull(sets["D1"], family, max_iter=40)
                if not complete:
                    raise GeneratorExhausted("hull iteration did not close")
                sets = {"D1": hull}
            else:
                # singletons are family-convex for any endomorphisms
                rng_pts = random.Random(rng.randrange(2 ** 30))
                single = _draw_finite_set(group, gen, rng_pts).elements[:1]
                sets = {"D1": cx.finite_set(group, single)}
    return Instance(group, metric, endos=endos, sets=sets, params=params)


def _exhaustive_instances(prop: PropertyId, gen: GeneratorConfig) -> list[Instance] | None:
    """Full enumeration for pairwise operator properties on a pinned group."""
    if not gen.exhaustive or gen.group is None:
        return None
    if not isinstance(gen.group, FiniteGroup):
        return None
    if prop not in (PropertyId.LEMMA_MU, PropertyId.COR_MU, PropertyId.LEMMA_SR):
        return None
    metric = _metric_for(gen, gen.group)
    ring = en.all_endomorphisms(gen.group)
    out = []
    for T in ring:
        for S in ring:
            out.append(
                Instance(gen.group, metric, endos={"T": T, "S": S})
            )
    return out


def counterexample_search(
    prop: PropertyId, gen: GeneratorConfig, budget: int, seed: int
) -> Verdict:
    """Search for violations among hypothesis-satisfying instances.

    Deterministic for a fixed seed.  Returns the first refutation found, a
    ``Proved`` verdict when an exhaustive generator is fully enumerated, and
    ``Unfalsified`` with the sample count otherwise.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    finite_family = isinstance(gen.group, FiniteGroup) or (
        gen.group is None and gen.family == "finite"
    )
    if prop in _NEEDS_EXPANSIVE_SCALAR and finite_family:
        raise GeneratorExhausted(
            "mu_d(n) <= 1 for every n on a finite group: any element of "
            "maximal norm has ||n*x|| <= ||x||, so the hypothesis "
            "mu_d(n0) > 1 is unsatisfiable"
        )
    if prop in _FINITE_ONLY and not finite_family:
        raise GeneratorExhausted("the full endomorphism ring must be enumerable")

    exhaustive = _exhaustive_instances(prop, gen)
    if exhaustive is not None:
        ran = 0
        for inst in exhaustive:
            if ran >= budget:
                return unfalsified(ran)
            verdict = verify(prop, inst)
            ran += 1
            if verdict.refuted:
                return refuted((inst,) + verdict.witness)
        return proved()

    rng = random.Random(seed)
    checked = 0
    stalls = 0
    while checked < budget:
        inst = _build_instance(prop, gen, rng)
        try:
            verdict = verify(prop, inst)
        except HypothesisFailed:
            stalls += 1
            if stalls > 50 * budget:
                raise GeneratorExhausted(
                    "could not draw hypothesis-satisfying instances"
                )
            continue
        checked += 1
        if verdict.refuted:
            return refuted((inst,) + verdict.witness)
    return unfalsified(checked)
