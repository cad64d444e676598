import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fatlie.exactlin import RatMatrix, RatPoly, char_poly, rank
from fatlie.liealg import StepTwoAlgebra, UnsupportedSignature, is_htype_standard_metric
from fatlie.normform import (
    I,
    Block,
    ComplexParam,
    MoebiusMap,
    NeedsNumeric,
    NormalFormSpec,
    NotFatError,
    SpecParseError,
    build_A,
    build_algebra,
    build_hat,
    build_Z,
    canonical_form,
    delta_invariant,
    extract_invariants,
    format_spec,
    is_htype_spec,
    is_isomorphic,
    m_matrix,
    moebius_apply,
    orientation,
    parse_spec,
    phi_matrix,
    psi_matrix,
)
from oracles import (
    GRID_CS,
    brute_force_isomorphic,
    hyperboloid,
    minkowski,
    moebius,
    random_sl2,
    random_spec,
    spec_grid,
    triple_orientation,
)

spec = NormalFormSpec.of
GRID = spec_grid(3)


# -- types and parsing -----------------------------------------------------


def test_upper_half_plane_enforced():
    with pytest.raises(ValueError):
        ComplexParam(1, 0)
    with pytest.raises(ValueError):
        Block(I, 0)
    with pytest.raises(ValueError):
        NormalFormSpec(())


def test_canonical_block_order():
    sp = spec([(1, 2), (0, 1), (0, 2)], [1, 2, 1])
    assert [(b.r, b.c.re, b.c.im) for b in sp.blocks] == [(1, 0, 2), (1, 1, 2), (2, 0, 1)]
    assert sp.s == 4 and sp.n == 16 and sp.length == 3


def test_parse_and_format_round_trip():
    sp = parse_spec("(0+1*I, 1/2+3/2*I);(1,2)")
    assert sp == spec([(0, 1), (Fraction(1, 2), Fraction(3, 2))], [1, 2])
    assert format_spec(sp) == "(0+1*I,1/2+3/2*I);(1,2)"
    assert parse_spec(format_spec(sp)) == sp


@pytest.mark.parametrize(
    "text,column",
    [
        ("(i);(1)", 2),
        ("(0+1*I);(0)", 10),
        ("(0+1*I,0+2*I);(1)", 16),
        ("(0-1*I);(1)", 2),
        ("0+1*I;1", 1),
        ("(0+1*I);(1", 1),
    ],
)
def test_parse_errors_carry_column(text, column):
    with pytest.raises(SpecParseError) as err:
        parse_spec(text)
    assert err.value.column == column


# -- builders --------------------------------------------------------------


def test_build_Z():
    assert build_Z(I) == RatMatrix.from_rows([[0, 1], [-1, 0]])
    assert build_Z((1, 2)) == RatMatrix.from_rows([[1, 2], [-2, 1]])
    with pytest.raises(ValueError):
        build_Z((1, 0))


def test_build_A():
    assert build_A(I, 1) == build_Z(I)
    Z, E = build_Z(I), RatMatrix.identity(2)
    assert build_A(I, 2) == RatMatrix.block([[Z, None], [E, Z]])


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_build_A_nilpotent_part_rank(r):
    semisimple = RatMatrix.block_diag([build_Z(I)] * r)
    assert rank(build_A(I, r) - semisimple) == 2 * (r - 1)


def test_build_algebra_examples():
    a = build_algebra(spec([I], [1]))
    assert (a.n, a.m, a.dim) == (4, 2, 6)
    assert is_htype_standard_metric(a)[0]
    b = build_algebra(spec([I], [2]))
    assert b.n == 8 and not is_htype_standard_metric(b)[0]
    c = build_algebra(spec([I, (0, 2)], [1, 1]))
    assert c.n == 8
    assert a.C[0] == phi_matrix(1)


def test_m_matrix_examples():
    sp = spec([I], [1])
    Z = build_Z(I)
    assert m_matrix(sp) == RatMatrix.block([[-Z.T, None], [None, -Z]])
    t = RatPoly.x()
    assert char_poly(m_matrix(sp)) == (t * t + 1) ** 2


@pytest.mark.parametrize("sp", GRID[:40], ids=str)
def test_m_matrix_intertwines_forms(sp):
    M = m_matrix(sp)
    assert M.T @ phi_matrix(sp.s) == psi_matrix(sp)


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=4), min_size=8, max_size=8),
       st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=4), min_size=8, max_size=8))
@settings(max_examples=30, deadline=None)
def test_m_matrix_identity_on_vectors(u, v):
    sp = spec([(1, 2)], [2])
    M, P, S = m_matrix(sp), phi_matrix(2), psi_matrix(sp)
    Mu = M.apply(u)
    lhs = sum((a * b for a, b in zip(Mu, P.apply(v))), Fraction(0))
    rhs = sum((a * b for a, b in zip(u, S.apply(v))), Fraction(0))
    assert lhs == rhs


def test_build_hat():
    assert build_hat(spec([I], [2])) == spec([I, I], [1, 1])
    hat = build_hat(spec([(1, 1), (0, 2)], [1, 3]))
    assert hat == spec([I] * 4, [1] * 4)
    assert build_hat(hat) == hat
    assert is_htype_spec(hat)


def test_is_htype_spec_examples():
    assert is_htype_spec(spec([I, I], [1, 1]))
    assert not is_htype_spec(spec([I], [2]))
    assert not is_htype_spec(spec([I, (0, 2)], [1, 1]))


# -- extraction ------------------------------------------------------------


def test_extract_examples():
    for sp in (spec([(1, 1)], [1]), spec([I], [2])):
        assert extract_invariants(build_algebra(sp)) == sp


@pytest.mark.parametrize("sp", GRID, ids=str)
def test_extract_round_trip(sp):
    assert extract_invariants(build_algebra(sp)) == sp


@pytest.mark.parametrize("seed", range(6))
def test_extract_invariant_under_basis_change(seed):
    rng = random.Random(seed)
    sp = [spec([I, (0, 2)], [1, 1]), spec([(1, 1), (1, 2)], [2, 1]), spec([(Fraction(1, 2), Fraction(1, 2))], [3])][seed % 3]
    alg = build_algebra(sp)
    while True:
        g = RatMatrix(alg.n, alg.n, (rng.randint(-2, 2) for _ in range(alg.n * alg.n)))
        if rank(g) == alg.n:
            break
    assert extract_invariants(alg.transported(g)) == sp


def test_extract_preconditions():
    J = [[0, 1], [-1, 0]]
    with pytest.raises(UnsupportedSignature):
        extract_invariants(StepTwoAlgebra.from_lists([J]))
    with pytest.raises(NotFatError):
        extract_invariants(StepTwoAlgebra.from_lists([J, J]))


def test_irrational_parameters_need_numeric_fallback():
    # A has eigenvalues +-sqrt(2) i, so c = sqrt(2) i is not rational
    A = RatMatrix.from_rows([[0, 2], [-1, 0]])
    C2 = RatMatrix.block([[None, A], [-A.T, None]])
    alg = StepTwoAlgebra(4, 2, (phi_matrix(1), C2))
    with pytest.raises(NeedsNumeric) as err:
        extract_invariants(alg)
    assert err.value.poly.degree == 4
    approx = extract_invariants(alg, numeric_fallback=True)
    assert approx.approximate
    (c,) = approx.cs
    assert approx.rs == (1,)
    assert abs(float(c.im) - 2 ** 0.5) < 1e-8 and c.re == 0


def test_numeric_fallback_sees_jordan_blocks():
    # conjugating a built algebra by a block with irrational eigenvalues
    A = RatMatrix.block([[RatMatrix.from_rows([[0, 2], [-1, 0]]), None], [RatMatrix.identity(2), RatMatrix.from_rows([[0, 2], [-1, 0]])]])
    C2 = RatMatrix.block([[None, A], [-A.T, None]])
    alg = StepTwoAlgebra(8, 2, (phi_matrix(2), C2))
    approx = extract_invariants(alg, numeric_fallback=True)
    assert approx.rs == (2,) and approx.approximate


# -- Moebius action and delta ----------------------------------------------


def test_moebius_examples():
    one = spec([I], [1])
    assert moebius_apply(MoebiusMap(1, 1, 0, 1), one).cs == (ComplexParam(1, 1),)
    assert moebius_apply(MoebiusMap(2, 0, 0, Fraction(1, 2)), one).cs == (ComplexParam(0, 4),)
    assert moebius_apply(MoebiusMap(0, -1, 1, 0), one).cs == (I,)
    with pytest.raises(ValueError):
        MoebiusMap(1, 1, 1, 1)


def test_moebius_matches_independent_formula():
    rng = random.Random(3)
    for _ in range(50):
        g = random_sl2(rng)
        z = (Fraction(rng.randint(-5, 5), 3), Fraction(rng.randint(1, 5), 2))
        w = MoebiusMap(*g)(z)
        assert (w.re, w.im) == moebius(g, z)


def test_delta_examples():
    assert delta_invariant(I, I) == 0
    assert delta_invariant(I, (0, 2)) == Fraction(1, 2)
    g = MoebiusMap(1, 1, 0, 1)
    assert delta_invariant(g(I), g((0, 2))) == Fraction(1, 2)


@pytest.mark.parametrize("seed", range(20))
def test_delta_invariance_and_cosh(seed):
    rng = random.Random(seed)
    g = MoebiusMap(*random_sl2(rng))
    z = (Fraction(rng.randint(-4, 4), 3), Fraction(rng.randint(1, 4), 3))
    w = (Fraction(rng.randint(-4, 4), 2), Fraction(rng.randint(1, 4), 5))
    d = delta_invariant(z, w)
    assert d == delta_invariant(g(z), g(w))
    # delta = 2 (cosh d - 1), with cosh d from the hyperboloid model
    assert d == 2 * (minkowski(hyperboloid(z), hyperboloid(w)) - 1)
    assert d >= 0 and (d == 0) == (z == w)


@pytest.mark.parametrize("seed", range(20))
def test_orientation_matches_hyperboloid(seed):
    rng = random.Random(100 + seed)
    pts = [(Fraction(rng.randint(-4, 4), 2), Fraction(rng.randint(1, 4), 2)) for _ in range(3)]
    assert orientation(*pts) == triple_orientation(*pts)
    g = MoebiusMap(*random_sl2(rng))
    assert orientation(*(g(p) for p in pts)) == orientation(*pts)
    reflected = [(-x, y) for x, y in pts]
    assert orientation(*reflected) == -orientation(*pts)


def test_orientation_zero_on_geodesic():
    assert orientation(I, (0, 2), (0, 5)) == 0
    # unit circle is a geodesic
    assert orientation(I, (Fraction(3, 5), Fraction(4, 5)), (Fraction(-5, 13), Fraction(12, 13))) == 0


# -- isomorphism -----------------------------------------------------------


def test_isomorphism_examples():
    assert is_isomorphic(spec([I], [1]), spec([(1, 1)], [1])).isomorphic
    rep = is_isomorphic(spec([I], [1]), spec([I], [2]))
    assert not rep.isomorphic and rep.reason
    rep = is_isomorphic(spec([I, (0, 2)], [1, 1]), spec([(1, 1), (1, 2)], [1, 1]))
    assert rep.isomorphic and rep.permutation == (0, 1)
    assert not is_isomorphic(spec([I], [2]), spec([I, I], [1, 1])).isomorphic


def test_reflection_only_reported():
    a = spec([I, (1, 1), (0, 3)], [1, 1, 1])
    b = spec([I, (-1, 1), (0, 3)], [1, 1, 1])
    rep = is_isomorphic(a, b)
    assert not rep.isomorphic and rep.reflection_only
    assert brute_force_isomorphic(a, b) is False


def test_geodesic_configurations_need_no_orientation():
    a = spec([I, (0, 2), (0, 4)], [1, 1, 1])
    g = MoebiusMap(0, -1, 1, 0)
    b = moebius_apply(g, a)
    assert is_isomorphic(a, b).isomorphic


@pytest.mark.parametrize("seed", range(40))
def test_isomorphic_to_moebius_image(seed):
    rng = random.Random(seed)
    a = random_spec(rng)
    g = MoebiusMap(*random_sl2(rng))
    b = moebius_apply(g, a)
    rep = is_isomorphic(a, b)
    assert rep.isomorphic
    perm = rep.permutation
    for i, j in enumerate(perm):
        assert a.rs[i] == b.rs[j]
        for k in range(a.length):
            assert delta_invariant(a.cs[i], a.cs[k]) == delta_invariant(b.cs[j], b.cs[perm[k]])


@pytest.mark.parametrize("seed", range(60))
def test_isomorphism_agrees_with_brute_force(seed):
    rng = random.Random(1000 + seed)
    a = random_spec(rng, bound=2)
    b = random_spec(rng, bound=2)
    if rng.random() < 0.5:
        b = moebius_apply(MoebiusMap(*random_sl2(rng)), a)
    assert is_isomorphic(a, b).isomorphic == brute_force_isomorphic(a, b)


# -- canonical form --------------------------------------------------------


def test_canonical_examples():
    assert canonical_form(spec([(1, 1)], [3])).spec == spec([I], [3])
    assert canonical_form(spec([(0, 2), (0, 2)], [2, 1])).spec == spec([I, I], [1, 2])
    cf = canonical_form(spec([I, (0, 4)], [1, 1]))
    assert cf.spec == spec([I, (0, 4)], [1, 1])
    assert str(cf) == "(0+1*I,0+4*I);(1,1)"


def test_canonical_second_point_on_axis_above_i():
    # image of (i, 2i) under z -> (z + 1) / (z + 2)
    cf = canonical_form(spec([(Fraction(3, 5), Fraction(1, 5)), (Fraction(3, 4), Fraction(1, 4))], [1, 1]))
    assert cf.positional
    assert cf.spec == spec([I, (0, 2)], [1, 1])


def test_non_positional_fallback_is_invariant():
    a = spec([I, (1, 1), (0, 3)], [1, 1, 1])
    cf = canonical_form(a)
    if cf.positional:
        pytest.skip("all positions rational")
    assert str(cf).startswith("nonpositional ")
    b = moebius_apply(MoebiusMap(2, 1, 1, 1), a)
    assert canonical_form(b) == cf


@pytest.mark.parametrize("sp", GRID, ids=str)
def test_canonical_idempotent_and_invariant(sp):
    cf = canonical_form(sp)
    if not cf.positional:
        return
    assert canonical_form(cf.spec).spec == cf.spec
    assert is_isomorphic(sp, cf.spec).isomorphic
    g = MoebiusMap(1, -2, 1, -1)
    assert canonical_form(moebius_apply(g, sp)).spec == cf.spec


@pytest.mark.parametrize("sp", GRID, ids=str)
def test_htype_consistency_after_canonicalization(sp):
    cf = canonical_form(sp)
    if cf.positional:
        assert is_htype_spec(sp) == is_htype_standard_metric(build_algebra(cf.spec))[0]
    else:
        assert not is_htype_spec(sp)


@pytest.mark.parametrize("c", GRID_CS)
def test_grid_points_stay_in_upper_half_plane(c):
    g = MoebiusMap(0, -1, 1, 0)
    assert g(c).im > 0
