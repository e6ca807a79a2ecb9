import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from groupconvex import (
    CyclicMetric,
    DyadicLattice,
    FiniteGroup,
    IntLattice,
    L1Metric,
    LinfMetric,
    all_endomorphisms,
    halve,
    identity,
    injectivity_measure,
    make_endo,
    midpoint_closed_form,
    midpoint_recursion,
    neumann_inverse,
    norm,
    op_norm,
    operator_distance,
    scaling,
    shifted_inverse,
    spectral_radius,
    try_inverse,
    zero,
)
from groupconvex.errors import (
    GroupMismatch,
    NotAHomomorphism,
    NotComplete,
    NotDivisible,
    RhoNotCertifiedBelowOne,
    SNotInvertible,
)


def window(dim, radius):
    """Integer vectors with sup-norm at most radius, zero excluded."""
    pts = [p for p in itertools.product(range(-radius, radius + 1), repeat=dim)]
    return [p for p in pts if any(p)]


def windowed_ratios(group, metric, T, points):
    out = []
    for x in points:
        x = group.element(x)
        nx = norm(group, metric, x)
        if nx == 0:
            continue
        out.append(norm(group, metric, T.apply(x)) / nx)
    return out


# -- construction ------------------------------------------------------------

def test_make_endo_scalar(z9):
    T = make_endo(z9, [[2]], check_additivity=True)
    assert T.apply((4,)) == (8,)
    assert T == scaling(z9, 2)


def test_make_endo_congruence_ok():
    g = FiniteGroup((2, 4))
    T = make_endo(g, [[0, 1], [0, 0]], check_additivity=True)  # 1*4 = 0 mod 2
    assert T.apply((0, 3)) == (1, 0)


def test_make_endo_congruence_violation():
    g = FiniteGroup((4, 2))
    with pytest.raises(NotAHomomorphism) as err:
        make_endo(g, [[0, 1], [0, 0]])  # 1*2 = 2 != 0 mod 4
    assert (err.value.row, err.value.col) == (0, 1)


def test_make_endo_shape(zplane):
    with pytest.raises(ValueError):
        make_endo(zplane, [[1, 2, 3], [4, 5, 6]])


def test_ring_counts():
    assert len(all_endomorphisms(FiniteGroup((9,)))) == 9
    assert len(all_endomorphisms(FiniteGroup((12,)))) == 12
    # one hom count per cell: gcd products
    assert len(all_endomorphisms(FiniteGroup((2, 4)))) == 2 * 2 * 2 * 4


def test_ring_enumeration_is_exactly_the_homset():
    g = FiniteGroup((2, 4))
    ring = set(all_endomorphisms(g))
    brute = set()
    for entries in itertools.product(range(4), repeat=4):
        rows = [entries[:2], entries[2:]]
        try:
            brute.add(make_endo(g, rows))
        except NotAHomomorphism:
            continue
    assert ring == brute


# -- ring operations ---------------------------------------------------------

def test_scalar_combination_identity(zline):
    p3, p4, p5 = (scaling(zline, k) for k in (3, 4, 5))
    combined = p3.compose(p4).add(identity(zline).sub(p3).compose(p5))
    assert combined == scaling(zline, 2)


def test_ring_axioms(z9):
    ident = identity(z9)
    nil = zero(z9)
    for T in all_endomorphisms(z9):
        assert ident.compose(T) == T
        assert T.compose(ident) == T
        assert T.add(nil) == T
        assert T.sub(T) == nil
    assert scaling(z9, 3).compose(scaling(z9, 3)) == nil  # 9 = 0 mod 9


def test_compose_respects_mixed_moduli():
    g = FiniteGroup((2, 4))
    ring = all_endomorphisms(g)
    for A in ring:
        for B in ring:
            composed = A.compose(B)
            for x in g.elements():
                assert composed.apply(x) == A.apply(B.apply(x))


def test_group_mismatch(z9, z12):
    with pytest.raises(GroupMismatch):
        identity(z9).compose(identity(z12))


# -- operator norm and injectivity measure -----------------------------------

def test_op_norm_examples(z9, cyclic1, zplane, linf2):
    assert op_norm(scaling(z9, 2), cyclic1) == 2
    assert op_norm(identity(z9), cyclic1) == 1
    assert op_norm(make_endo(zplane, [[1, 1], [0, 1]]), linf2) == 2


def test_injectivity_examples(z9, cyclic1, zplane, linf2, zline, linf1):
    assert injectivity_measure(scaling(z9, 2), cyclic1) == Fraction(1, 4)
    assert injectivity_measure(make_endo(zplane, [[1, 0], [0, 0]]), linf2) == 0
    assert injectivity_measure(scaling(zline, 3), linf1) == 3


def test_singular_kernel_witness(zplane, linf2):
    T = make_endo(zplane, [[1, 0], [0, 0]])
    assert T.apply((0, 1)) == (0, 0)


def test_row_sum_formula_against_window(zplane, linf2):
    T = make_endo(zplane, [[1, 1], [0, 1]])
    ratios = windowed_ratios(zplane, linf2, T, window(2, 3))
    assert max(ratios) == op_norm(T, linf2) == 2


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_formula_vs_window_unit_weights(entries):
    g = IntLattice(2)
    rows = [entries[:2], entries[2:]]
    T = make_endo(g, rows)
    pts = window(2, 3)
    for metric in (LinfMetric((Fraction(1), Fraction(1))), L1Metric((Fraction(1), Fraction(1)))):
        formula = op_norm(T, metric)
        ratios = windowed_ratios(g, metric, T, pts)
        # unit-weight norms attain the supremum at sign/unit vectors
        assert max(ratios) == formula
        mu = injectivity_measure(T, metric)
        assert min(ratios) >= mu


def test_weighted_formula_attained_in_window():
    g = IntLattice(2)
    metric = LinfMetric((Fraction(1), Fraction(1, 2)))
    T = make_endo(g, [[1, 2], [0, 3]])
    # achievers scale to (+-1, +-2), inside the window of radius 3/max-weight
    ratios = windowed_ratios(g, metric, T, window(2, 6))
    assert max(ratios) == op_norm(T, metric)


def test_mu_inverse_norm_identity(zplane, linf2):
    for rows in ([[2, 1], [1, 1]], [[1, 2], [0, 1]], [[3, 0], [0, 2]]):
        T = make_endo(zplane, rows)
        inv = try_inverse(T)
        mu = injectivity_measure(T, linf2)
        if inv is not None:
            assert mu == 1 / op_norm(inv, linf2)
        assert mu > 0  # these matrices are nonsingular


def test_weighted_l1_formula_matches_fine_grid():
    g = DyadicLattice(2)
    metric = L1Metric((Fraction(1), Fraction(1, 2)))
    cases = [
        ([[Fraction(1, 2), 1], [Fraction(-3, 4), 2]], Fraction(4), Fraction(7, 10)),
        ([[2, 0], [Fraction(1, 4), Fraction(1, 2)]], Fraction(17, 8), Fraction(1, 2)),
    ]
    grid = [Fraction(n, 8) for n in range(-16, 17)]
    for rows, expected_norm, expected_mu in cases:
        T = make_endo(g, rows)
        assert op_norm(T, metric) == expected_norm
        assert injectivity_measure(T, metric) == expected_mu
        best = Fraction(0)
        worst = None
        for x1 in grid:
            for x2 in grid:
                if x1 == 0 and x2 == 0:
                    continue
                x = g.element((x1, x2))
                ratio = norm(g, metric, T.apply(x)) / norm(g, metric, x)
                best = max(best, ratio)
                worst = ratio if worst is None else min(worst, ratio)
        # both extremes are attained on the 1/8 grid for these matrices
        assert best == expected_norm
        assert worst == expected_mu


def test_rotation_like_dyadic_bracket_is_exact():
    g = DyadicLattice(2)
    metric = LinfMetric((Fraction(1), Fraction(1)))
    rot = make_endo(g, [[0, Fraction(-1, 2)], [Fraction(1, 2), 0]])
    bracket = spectral_radius(rot, metric, horizon=4)
    assert bracket.exact and bracket.value == Fraction(1, 2)


def test_mu_windowed_oracle_dyadic():
    g = DyadicLattice(2)
    metric = LinfMetric((Fraction(1), Fraction(1)))
    T = make_endo(g, [[Fraction(1, 2), 0], [0, 2]])
    mu = injectivity_measure(T, metric)
    assert mu == Fraction(1, 2)
    grid = [Fraction(n, 4) for n in range(-8, 9)]
    best = None
    for x1 in grid:
        for x2 in grid:
            if x1 == x2 == 0:
                continue
            x = g.element((x1, x2))
            ratio = norm(g, metric, T.apply(x)) / norm(g, metric, x)
            best = ratio if best is None else min(best, ratio)
    assert best == mu  # attained at a grid point for this diagonal matrix


def test_operator_distance_is_a_metric_on_z9(z9, cyclic1):
    ring = all_endomorphisms(z9)
    for T in ring:
        assert operator_distance(T, T, cyclic1) == 0
        for S in ring:
            assert operator_distance(T, S, cyclic1) == operator_distance(S, T, cyclic1)
            for R in ring:
                assert operator_distance(T, R, cyclic1) <= operator_distance(
                    T, S, cyclic1
                ) + operator_distance(S, R, cyclic1)


def test_measure_inequalities_exhaustive_z9(z9, cyclic1):
    ring = all_endomorphisms(z9)
    for T in ring:
        for S in ring:
            mu_t = injectivity_measure(T, cyclic1)
            mu_s = injectivity_measure(S, cyclic1)
            comp = T.compose(S)
            assert mu_t * op_norm(S, cyclic1) <= op_norm(comp, cyclic1)
            assert mu_t * mu_s <= injectivity_measure(comp, cyclic1)
            assert abs(mu_t - mu_s) <= operator_distance(T, S, cyclic1)


def test_measure_inequalities_exhaustive_mixed_moduli():
    g = FiniteGroup((2, 4))
    metric = CyclicMetric((Fraction(1), Fraction(1)))
    ring = all_endomorphisms(g)
    for T in ring:
        for S in ring:
            mu_t = injectivity_measure(T, metric)
            comp = T.compose(S)
            assert mu_t * op_norm(S, metric) <= op_norm(comp, metric)
            assert mu_t * injectivity_measure(S, metric) <= injectivity_measure(comp, metric)
            assert abs(mu_t - injectivity_measure(S, metric)) <= operator_distance(T, S, metric)


dyadic_matrices = st.lists(
    st.builds(lambda n, k: Fraction(n, 1 << k), st.integers(-6, 6), st.integers(0, 2)),
    min_size=4,
    max_size=4,
)


@settings(max_examples=60, deadline=None)
@given(dyadic_matrices, dyadic_matrices)
def test_measure_inequalities_sampled_dyadic_pairs(a, b):
    g = DyadicLattice(2)
    metric = LinfMetric((Fraction(1), Fraction(1, 2)))
    T = make_endo(g, [a[:2], a[2:]])
    S = make_endo(g, [b[:2], b[2:]])
    mu_t = injectivity_measure(T, metric)
    mu_s = injectivity_measure(S, metric)
    comp = T.compose(S)
    assert mu_t * op_norm(S, metric) <= op_norm(comp, metric)
    assert mu_t * mu_s <= injectivity_measure(comp, metric)
    assert abs(mu_t - mu_s) <= operator_distance(T, S, metric)


# -- spectral radius ---------------------------------------------------------

def oracle_rho_finite(T):
    """Independent cycle detection over the finite power semigroup."""
    seen = {}
    power = T
    k = 1
    while power not in seen:
        if power.is_zero:
            return 0
        seen[power] = k
        power = power.compose(T)
        k += 1
    return 1


def test_rho_examples(z9, cyclic1, zplane, linf2, dyline, linf1):
    assert spectral_radius(scaling(z9, 3), cyclic1).value == 0
    assert spectral_radius(make_endo(zplane, [[0, 1], [0, 0]]), linf2).value == 0
    assert spectral_radius(identity(z9), cyclic1).value == 1
    assert spectral_radius(identity(zplane), linf2).value == 1
    half = make_endo(dyline, [[Fraction(1, 2)]])
    bracket = spectral_radius(half, linf1)
    assert bracket.exact and bracket.value == Fraction(1, 2)


def test_rho_dichotomy_oracle(z9, z12, cyclic1):
    for g, m in ((z9, cyclic1), (z12, CyclicMetric((Fraction(1),)))):
        for T in all_endomorphisms(g):
            bracket = spectral_radius(T, m)
            assert bracket.exact
            assert bracket.value in (0, 1)
            assert bracket.value == oracle_rho_finite(T)


def test_int_lattice_rho_below_one_iff_nilpotent():
    # derived decision procedure, verified by a windowed-norm oracle
    g = IntLattice(2)
    metric = LinfMetric((Fraction(1), Fraction(1)))
    rng = random.Random(20240817)
    for _ in range(100):
        rows = [[rng.randint(-3, 3) for _ in range(2)] for _ in range(2)]
        T = make_endo(g, rows)
        nilpotent = T.power(2).is_zero
        bracket = spectral_radius(T, metric, horizon=6)
        if nilpotent:
            assert bracket.exact and bracket.value == 0
        else:
            assert bracket.lower >= 1
            power = T
            for _ in range(12):
                assert op_norm(power, metric) >= 1
                power = power.compose(T)


def test_rho_bracket_ordering_random_dyadic():
    g = DyadicLattice(2)
    metric = LinfMetric((Fraction(1), Fraction(1)))
    rng = random.Random(7)
    for _ in range(50):
        rows = [
            [Fraction(rng.randint(-4, 4), 1 << rng.randint(0, 2)) for _ in range(2)]
            for _ in range(2)
        ]
        T = make_endo(g, rows)
        bracket = spectral_radius(T, metric, horizon=6)
        assert injectivity_measure(T, metric) <= bracket.upper
        assert bracket.upper <= op_norm(T, metric)
        assert bracket.lower <= bracket.upper


def test_weighted_norm_never_certifies_nonnilpotent_below_one():
    # power norms dominate rho^m, so a small first-power weighted norm can
    # never certify a non-nilpotent integer matrix below radius one
    g = IntLattice(2)
    heavy = LinfMetric((Fraction(1), Fraction(4)))
    swap = make_endo(g, [[0, 1], [1, 0]])  # swap: T^2 = I
    bracket = spectral_radius(swap, heavy, horizon=8)
    assert bracket.exact and bracket.value == 1
    assert not bracket.certified_below_one
    nil = make_endo(g, [[0, 1], [0, 0]])
    assert op_norm(nil, heavy) == Fraction(1, 4)  # small norm, genuinely nilpotent
    assert spectral_radius(nil, heavy, horizon=8).value == 0


def test_rho_upper_shrinks_with_horizon(dyline, linf1):
    T = make_endo(dyline, [[Fraction(3, 4)]])
    wide = spectral_radius(T, linf1, horizon=1)
    tight = spectral_radius(T, linf1, horizon=6)
    assert tight.upper <= wide.upper


# -- inversion ---------------------------------------------------------------

def test_neumann_z9(z9, cyclic1):
    inverse = neumann_inverse(scaling(z9, 3), cyclic1)
    assert inverse == scaling(z9, 4)
    check = identity(z9).sub(scaling(z9, 3)).compose(inverse)
    assert check == identity(z9)  # 7*4 = 28 = 1 mod 9


def test_neumann_nilpotent_lattice(zplane, linf2):
    T = make_endo(zplane, [[0, 1], [0, 0]])
    assert neumann_inverse(T, linf2) == identity(zplane).add(T)


def test_neumann_zero_and_identity(z9, cyclic1):
    assert neumann_inverse(zero(z9), cyclic1) == identity(z9)
    with pytest.raises(RhoNotCertifiedBelowOne):
        neumann_inverse(identity(z9), cyclic1)


def test_neumann_requires_completeness(dyline, linf1):
    T = make_endo(dyline, [[Fraction(1, 2)]])
    with pytest.raises(NotComplete):
        neumann_inverse(T, linf1)


def test_shifted_inverse_examples(z9, cyclic1, zplane, linf2):
    assert shifted_inverse(identity(z9), scaling(z9, 3), cyclic1) == scaling(z9, 4)
    T = make_endo(zplane, [[0, 1], [0, 0]])
    assert shifted_inverse(identity(zplane), T, linf2) == identity(zplane).add(T)
    # S = pi2 (inverse pi5), T = pi6: S^-1 T = pi3, rho = 0
    result = shifted_inverse(scaling(z9, 2), scaling(z9, 6), cyclic1)
    assert result == scaling(z9, 2)
    diff = scaling(z9, 2).sub(scaling(z9, 6))
    assert diff.compose(result) == identity(z9)


def test_shifted_inverse_requires_invertible_s(z9, cyclic1):
    with pytest.raises(SNotInvertible):
        shifted_inverse(scaling(z9, 3), zero(z9), cyclic1)


def test_try_inverse(z9, zplane, dyline):
    assert try_inverse(scaling(z9, 2)) == scaling(z9, 5)
    assert try_inverse(scaling(z9, 3)) is None
    assert try_inverse(make_endo(zplane, [[1, 1], [0, 1]])) == make_endo(
        zplane, [[1, -1], [0, 1]]
    )
    assert try_inverse(make_endo(zplane, [[2, 0], [0, 1]])) is None  # 1/2 not integral
    assert try_inverse(make_endo(dyline, [[2]])) == make_endo(dyline, [[Fraction(1, 2)]])
    assert try_inverse(make_endo(dyline, [[3]])) is None  # 1/3 not dyadic


def test_neumann_random_nilpotent_3x3():
    g = IntLattice(3)
    metric = LinfMetric((Fraction(1),) * 3)
    rng = random.Random(99)
    ident = identity(g)
    for _ in range(25):
        rows = [[0, rng.randint(-3, 3), rng.randint(-3, 3)],
                [0, 0, rng.randint(-3, 3)],
                [0, 0, 0]]
        T = make_endo(g, rows)
        series = neumann_inverse(T, metric)
        factor = ident.sub(T)
        assert factor.compose(series) == ident
        assert series.compose(factor) == ident


# -- midpoint recursion ------------------------------------------------------

def test_midpoint_recursion_z9(z9):
    T = scaling(z9, 2)
    assert midpoint_recursion(T, 1) == T
    assert midpoint_recursion(T, 2) == scaling(z9, 5)  # half of the identity
    assert halve(identity(z9)) == scaling(z9, 5)


def test_midpoint_closed_form_matches(z9, dyline):
    T = scaling(z9, 2)
    for n in range(1, 9):
        assert midpoint_closed_form(T, n) == midpoint_recursion(T, n)
    q = make_endo(dyline, [[Fraction(1, 4)]])
    for n in range(1, 9):
        assert midpoint_closed_form(q, n) == midpoint_recursion(q, n)


def test_midpoint_recursion_fixed_point(dyline, z9):
    half = make_endo(dyline, [[Fraction(1, 2)]])
    for n in range(1, 6):
        assert midpoint_recursion(half, n) == half
    assert midpoint_recursion(identity(z9), 2) == identity(z9)


def test_midpoint_closed_form_needs_divisibility(zline):
    with pytest.raises(NotDivisible):
        midpoint_closed_form(scaling(zline, 1), 2)


def test_closed_form_equals_recursion_in_product_group():
    g = FiniteGroup((3, 5))
    for T in all_endomorphisms(g):
        for n in range(1, 6):
            assert midpoint_closed_form(T, n) == midpoint_recursion(T, n)
