import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fatlie.exactlin import DimensionError, RatPoly, det
from fatlie.liealg import (
    FatStatus,
    SchemaError,
    StepTwoAlgebra,
    UnsupportedSignature,
    bracket,
    from_json,
    is_fat,
    is_htype_standard_metric,
    pencil_value,
    pfaffian,
    pfaffian_pencil,
    t_matrix,
    to_json,
    validate,
)
from fatlie.normform import NormalFormSpec, build_algebra, psi_matrix
from oracles import heisenberg, m2_grid_small

J = [[0, 1], [-1, 0]]
Z2 = [[0, 0], [0, 0]]

rats = st.fractions(min_value=-4, max_value=4, max_denominator=5)


def n_i1():
    return build_algebra(NormalFormSpec.of([(0, 1)], [1]))


@st.composite
def skew_algebras(draw, n=4, m=2):
    mats = []
    for _ in range(m):
        M = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                x = draw(st.integers(-2, 2))
                M[i][j], M[j][i] = Fraction(x), Fraction(-x)
        mats.append(M)
    return StepTwoAlgebra.from_lists(mats)


# -- validation ------------------------------------------------------------


def test_validate_clean_on_complex_heisenberg():
    assert validate(n_i1()) == []


def test_validate_flags_symmetric_entry():
    alg = StepTwoAlgebra.from_lists([[[0, 1], [1, 0]]])
    (v,) = validate(alg)
    assert v.kind == "skew" and not v.warning


def test_validate_warns_on_duplicate_matrices():
    alg = StepTwoAlgebra.from_lists([J, J])
    (v,) = validate(alg)
    assert v.kind == "dependent" and v.warning


# -- bracket and T_z -------------------------------------------------------


def test_bracket_examples():
    h = heisenberg()
    assert bracket(h, [1, 0], [0, 1]) == (1,)
    assert bracket(h, [3, 5], [3, 5]) == (0,)
    # C_1 = [[0, -I], [I, 0]] with [u, v]_k = u^T C_k v
    assert bracket(n_i1(), [0, 0, 1, 0], [1, 0, 0, 0]) == (1, 0)
    assert bracket(n_i1(), [1, 0, 0, 0], [0, 0, 1, 0]) == (-1, 0)


def test_bracket_length_mismatch():
    with pytest.raises(DimensionError):
        bracket(heisenberg(), [1, 0, 0], [0, 1])


@given(skew_algebras(), st.lists(rats, min_size=4, max_size=4), st.lists(rats, min_size=4, max_size=4))
@settings(max_examples=40, deadline=None)
def test_bracket_antisymmetric_and_adjoint(alg, u, v):
    assert bracket(alg, u, v) == tuple(-x for x in bracket(alg, v, u))
    z = (Fraction(2, 3), Fraction(-1, 7))
    Tu = t_matrix(alg, z).apply(u)
    lhs = sum((a * b for a, b in zip(Tu, v)), Fraction(0))
    rhs = sum((a * b for a, b in zip(z, bracket(alg, u, v))), Fraction(0))
    assert lhs == rhs


def test_t_matrix_examples():
    alg = n_i1()
    assert t_matrix(alg, [0, 0]).is_zero()
    assert t_matrix(alg, [1, 0]) == -alg.C[0]
    spec = NormalFormSpec.of([(0, 1)], [1])
    assert t_matrix(alg, [0, 1]) == -psi_matrix(spec)
    assert t_matrix(alg, [3, 4]).is_skew()


def test_t_matrix_length_mismatch():
    with pytest.raises(DimensionError):
        t_matrix(n_i1(), [1])


@given(skew_algebras(), rats, rats, st.tuples(rats, rats), st.tuples(rats, rats))
@settings(max_examples=40, deadline=None)
def test_t_matrix_linear(alg, a, b, z, w):
    combo = [a * x + b * y for x, y in zip(z, w)]
    assert t_matrix(alg, combo) == t_matrix(alg, z).scale(a) + t_matrix(alg, w).scale(b)


# -- pencil ----------------------------------------------------------------


def test_pencil_of_complex_heisenberg():
    t = RatPoly.x()
    assert pfaffian_pencil(n_i1()) == (t * t + 1) ** 2


def test_pencil_with_vanishing_second_matrix():
    alg = StepTwoAlgebra.from_lists([J, Z2])
    t = RatPoly.x()
    assert pfaffian_pencil(alg) == t ** 2 * det(alg.T(0))


def test_pencil_with_equal_matrices():
    t = RatPoly.x()
    assert pfaffian_pencil(StepTwoAlgebra.from_lists([J, J])) == (t + 1) ** 2


def test_pencil_needs_two_center_dimensions():
    with pytest.raises(UnsupportedSignature):
        pfaffian_pencil(heisenberg())


@given(skew_algebras(), rats, rats)
@settings(max_examples=40, deadline=None)
def test_pencil_homogenizes_to_pfaffian(alg, z1, z2):
    q = pfaffian_pencil(alg)
    assert q.degree <= alg.n
    assert pencil_value(q, alg.n, (z1, z2)) == pfaffian(alg, (z1, z2))


# -- fatness ---------------------------------------------------------------


def test_complex_heisenberg_is_fat():
    assert is_fat(n_i1()).status is FatStatus.FAT


def test_vanishing_second_matrix_witness():
    rep = is_fat(StepTwoAlgebra.from_lists([J, Z2]))
    assert rep.status is FatStatus.NOT_FAT
    assert rep.witness == (0, 1) and not rep.approximate
    assert rep.summary() == "notfat witness=(0,1)"


def test_equal_matrices_witness():
    rep = is_fat(StepTwoAlgebra.from_lists([J, J]))
    assert rep.status is FatStatus.NOT_FAT
    assert rep.witness == (1, -1)


def test_heisenberg_m1():
    assert is_fat(heisenberg()).is_fat
    assert not is_fat(StepTwoAlgebra.from_lists([Z2])).is_fat


def test_odd_dimension_never_fat():
    alg = StepTwoAlgebra.from_lists([[[0, 1, 0], [-1, 0, 0], [0, 0, 0]]])
    rep = is_fat(alg)
    assert rep.status is FatStatus.NOT_FAT
    assert det(t_matrix(alg, rep.witness)) == 0


def test_irrational_singular_direction_is_approximate():
    # det(t T1 + T2) = (t^2 - 2)^2: singular only on the lines t = +-sqrt 2
    C1 = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
    C2 = [[0, 0, 0, 2], [0, 0, 1, 0], [0, -1, 0, 0], [-2, 0, 0, 0]]
    alg = StepTwoAlgebra.from_lists([C1, C2])
    rep = is_fat(alg)
    assert rep.status is FatStatus.NOT_FAT
    assert rep.approximate
    z1, z2 = (float(x) for x in rep.witness)
    assert abs(abs(z1 / z2) - 2 ** 0.5) < 1e-12


@given(skew_algebras())
@settings(max_examples=40, deadline=None)
def test_fatness_agrees_with_sampling(alg):
    rep = is_fat(alg)
    rng = random.Random(1)
    for _ in range(100):
        z = (Fraction(rng.randint(-50, 50), rng.randint(1, 20)), Fraction(rng.randint(-50, 50), rng.randint(1, 20)))
        if any(z) and rep.status is FatStatus.FAT:
            assert pfaffian(alg, z) != 0
    if rep.status is FatStatus.NOT_FAT and not rep.approximate:
        assert pfaffian(alg, rep.witness) == 0
        assert any(rep.witness)


@pytest.mark.parametrize("spec", m2_grid_small(), ids=str)
def test_normal_forms_are_fat(spec):
    assert is_fat(build_algebra(spec)).is_fat


def test_m3_not_fat_found_exactly():
    # C_k = diag(a_k J, b_k J): det T_z = (a.z)^2 (b.z)^2 vanishes on two planes,
    # none containing a coordinate axis
    a, b = (1, 2, 3), (3, -1, 1)
    C = [[[0, x, 0, 0], [-x, 0, 0, 0], [0, 0, 0, y], [0, 0, -y, 0]] for x, y in zip(a, b)]
    alg = StepTwoAlgebra.from_lists(C)
    rep = is_fat(alg, samples=16, seed=0)
    assert rep.status is FatStatus.NOT_FAT and not rep.approximate
    assert pfaffian(alg, rep.witness) == 0
    assert rep.witness == (2, -1, 0)


def test_m3_quaternionic_is_inconclusive_and_seeded():
    # left multiplication by i, j, k on the quaternions: H-type with m = 3
    Li = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
    Lj = [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]]
    Lk = [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]
    alg = StepTwoAlgebra.from_lists([Li, Lj, Lk])
    assert is_htype_standard_metric(alg) == (True, None)
    rep = is_fat(alg, samples=32, seed=7)
    assert rep.status is FatStatus.INCONCLUSIVE
    assert rep.samples == 32
    assert rep.summary() == "inconclusive (32 samples)"
    assert is_fat(alg, samples=32, seed=7) == rep


# -- H-type ----------------------------------------------------------------


def test_htype_examples():
    assert is_htype_standard_metric(build_algebra(NormalFormSpec.of([(0, 1), (0, 1)], [1, 1]))) == (True, None)
    ok, bad = is_htype_standard_metric(build_algebra(NormalFormSpec.of([(0, 1)], [2])))
    assert not ok and bad is not None
    assert is_htype_standard_metric(heisenberg()) == (True, None)


@given(skew_algebras())
@settings(max_examples=40, deadline=None)
def test_htype_implies_fat(alg):
    if is_htype_standard_metric(alg)[0]:
        assert is_fat(alg).is_fat


# -- JSON ------------------------------------------------------------------


def test_json_round_trip_is_byte_identical():
    alg = build_algebra(NormalFormSpec.of([(Fraction(1, 2), Fraction(3, 2))], [2]))
    text = to_json(alg)
    assert from_json(text) == alg
    assert to_json(from_json(text)) == text


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        '{"n": 2, "m": 1}',
        '{"n": 2, "m": 2, "C": [[["0","1"],["-1","0"]]]}',
        '{"n": 2, "m": 1, "C": [[["0","1"],["1","0"]]]}',
        '{"n": 2, "m": 1, "C": [[["0","1/0"],["-1","0"]]]}',
        '{"n": 2, "m": 1, "C": [[["0",0.5],["-1","0"]]]}',
        '{"n": 3, "m": 1, "C": [[["0","1"],["-1","0"]]]}',
    ],
)
def test_json_schema_errors(text):
    with pytest.raises(SchemaError):
        from_json(text)
