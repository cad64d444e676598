"""Graded derivations and automorphism dimensions.

A graded derivation is a pair (X, Y), X acting on v and Y on z, with

    T_k X + X^T T_k = sum_j Y[k][j] T_j      for every k.

g0 is the slice Y = 0, g is the traceless part, and the dilation (I, 2I)
spans the rest.  The orthogonal variants k0, k restrict to skew X and Y.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactlin import ZERO, LinearSystem, RatMatrix, rank
from .liealg import (
    FatStatus,
    StepTwoAlgebra,
    bracket,
    is_fat,
    is_htype_standard_metric,
    t_matrix,
)
from .normform import (
    NormalFormSpec,
    build_algebra,
    build_hat,
)


@dataclass(frozen=True)
class GradedDerivation:
    X: RatMatrix
    Y: RatMatrix
    label: str = field(default="", compare=False)


@dataclass(frozen=True)
class DerivationSpace:
    basis: tuple[GradedDerivation, ...]
    dim_der_graded: int
    dim_g0: int
    dim_g_quotient: int


@dataclass(frozen=True)
class DimensionReport:
    dim_g0: int
    dim_g_quotient: int
    dim_k0: int
    dim_k_quotient: int
    dim_der_graded: int
    dim_aut: int
    htype: bool
    fat: str

    def to_dict(self) -> dict:
        return asdict(self)


def _is_derivation(alg: StepTwoAlgebra, X: RatMatrix, Y: RatMatrix) -> bool:
    Ts = [alg.T(k) for k in range(alg.m)]
    for k, Tk in enumerate(Ts):
        rhs = RatMatrix.zeros(alg.n)
        for j, Tj in enumerate(Ts):
            if Y[k, j]:
                rhs = rhs + Tj.scale(Y[k, j])
        if Tk @ X + X.T @ Tk != rhs:
            return False
    return True


def _graded_system(alg: StepTwoAlgebra, with_y: bool = True, skew: bool = False, y_fixed: RatMatrix | None = None) -> LinearSystem:
    """Equations on the unknowns X (n*n, row-major) followed by Y (m*m).

    ``y_fixed`` moves a prescribed Y to the right-hand side; ``with_y=False``
    forces Y = 0.  ``skew`` adds X + X^T = 0 and Y + Y^T = 0.
    """
    n, m = alg.n, alg.m
    nx = n * n
    nvars = nx + (m * m if with_y and y_fixed is None else 0)
    sys_ = LinearSystem(nvars)
    Ts = [alg.T(k) for k in range(m)]
    for k, Tk in enumerate(Ts):
        # (T_k X + X^T T_k)[p][q] = sum_a Tk[p][a] X[a][q] + sum_a X[a][p] Tk[a][q]
        for p in range(n):
            for q in range(p + 1, n):
                eq: dict[int, Fraction] = {}
                for a in range(n):
                    t = Tk[p, a]
                    if t:
                        idx = a * n + q
                        eq[idx] = eq.get(idx, ZERO) + t
                    t = Tk[a, q]
                    if t:
                        idx = a * n + p
                        eq[idx] = eq.get(idx, ZERO) + t
                rhs = ZERO
                if y_fixed is not None:
                    rhs = sum((y_fixed[k, j] * Ts[j][p, q] for j in range(m)), ZERO)
                elif with_y:
                    for j in range(m):
                        t = Ts[j][p, q]
                        if t:
                            eq[nx + k * m + j] = eq.get(nx + k * m + j, ZERO) - t
                sys_.add(eq, rhs)
    if skew:
        for p in range(n):
            for q in range(p, n):
                sys_.add({p * n + q: 1, q * n + p: 1} if p != q else {p * n + p: 1})
        if with_y and y_fixed is None:
            for p in range(m):
                for q in range(p, m):
                    sys_.add({nx + p * m + q: 1, nx + q * m + p: 1} if p != q else {nx + p * m + p: 1})
    return sys_


def _unpack(alg: StepTwoAlgebra, v: Sequence[Fraction]) -> tuple[RatMatrix, RatMatrix]:
    n, m = alg.n, alg.m
    X = RatMatrix(n, n, v[: n * n])
    Y = RatMatrix(m, m, v[n * n:]) if len(v) > n * n else RatMatrix.zeros(m)
    return X, Y


def graded_derivations(alg: StepTwoAlgebra) -> DerivationSpace:
    full = _graded_system(alg)
    basis = tuple(GradedDerivation(*_unpack(alg, v)) for v in full.kernel())
    g0 = dim_g0(alg)
    dim_der = len(basis)
    return DerivationSpace(basis, dim_der, g0, dim_der - 1 - g0)


def g0_basis(alg: StepTwoAlgebra) -> list[RatMatrix]:
    """Kernel of T_k X + X^T T_k = 0 for all k, in echelon-parametrized order."""
    sys_ = _graded_system(alg, with_y=False)
    return [RatMatrix(alg.n, alg.n, v) for v in sys_.kernel()]


def dim_g0(alg: StepTwoAlgebra) -> int:
    sys_ = _graded_system(alg, with_y=False)
    return sys_.nvars - sys_.rank


def full_derivation_dim(alg: StepTwoAlgebra) -> int:
    """dim Der(n) from the derivation identity on every basis pair of v + z.

    Independent of the graded solver: all (n+m)^2 entries of D are unknowns
    and the bracket is read from the full structure-constant tensor.
    """
    N = alg.dim
    n = alg.n
    # S[a][b] = {c: coefficient of e_c in [e_a, e_b]}
    S: list[list[dict[int, Fraction]]] = [[{} for _ in range(N)] for _ in range(N)]
    for a in range(n):
        for b in range(n):
            for k, Ck in enumerate(alg.C):
                if Ck[a, b]:
                    S[a][b][n + k] = Ck[a, b]
    sys_ = LinearSystem(N * N)

    def var(row: int, col: int) -> int:  # D[row][col]
        return row * N + col

    for a in range(N):
        for b in range(a + 1, N):
            # D[e_a, e_b] - [D e_a, e_b] - [e_a, D e_b] = 0, component c
            eqs: dict[int, dict[int, Fraction]] = {}
            for d, s in S[a][b].items():
                for c in range(N):
                    e = eqs.setdefault(c, {})
                    e[var(c, d)] = e.get(var(c, d), ZERO) + s
            for d in range(N):
                for c, s in S[d][b].items():
                    e = eqs.setdefault(c, {})
                    e[var(d, a)] = e.get(var(d, a), ZERO) - s
                for c, s in S[a][d].items():
                    e = eqs.setdefault(c, {})
                    e[var(d, b)] = e.get(var(d, b), ZERO) - s
            for e in eqs.values():
                sys_.add(e)
    return sys_.nvars - sys_.rank


def orthogonal_derivations(alg: StepTwoAlgebra) -> tuple[int, int]:
    """(dim k0, dim k/k0) for the standard metrics on v and z."""
    k0 = _graded_system(alg, with_y=False, skew=True)
    k = _graded_system(alg, skew=True)
    dim_k0 = k0.nvars - k0.rank
    return dim_k0, (k.nvars - k.rank) - dim_k0


def analyze(alg: StepTwoAlgebra, samples: int = 256, seed: int = 0) -> DimensionReport:
    """All dimensions; dim_aut comes from the full derivation kernel and must match
    n*m + 1 + dim(g/g0) + dim g0."""
    space = graded_derivations(alg)
    dim_k0, dim_kq = orthogonal_derivations(alg)
    dim_aut = full_derivation_dim(alg)
    expected = alg.n * alg.m + 1 + space.dim_g_quotient + space.dim_g0
    fat = is_fat(alg, samples=samples, seed=seed)
    if fat.status is FatStatus.FAT and dim_aut != expected:
        raise ArithmeticError(f"full derivation dimension {dim_aut} != n*m + dim Der_graded = {expected}")
    return DimensionReport(
        dim_g0=space.dim_g0,
        dim_g_quotient=space.dim_g_quotient,
        dim_k0=dim_k0,
        dim_k_quotient=dim_kq,
        dim_der_graded=space.dim_der_graded,
        dim_aut=dim_aut,
        htype=is_htype_standard_metric(alg)[0],
        fat=fat.status.value,
    )


# ---------------------------------------------------------------------------
# explicit g0 basis for a single block n_(i, r)
# ---------------------------------------------------------------------------

_ONE = RatMatrix.identity(2)
_I = RatMatrix.from_rows([[0, -1], [1, 0]])
_X = RatMatrix.from_rows([[0, 1], [1, 0]])
_Y = RatMatrix.from_rows([[-1, 0], [0, 1]])


def _from_blocks(r: int, entries: dict[tuple[int, int], RatMatrix]) -> RatMatrix:
    """4r x 4r matrix from 2x2 blocks indexed on a 2r x 2r grid."""
    rows = [[entries.get((i, j)) for j in range(2 * r)] for i in range(2 * r)]
    z = RatMatrix.zeros(2)
    return RatMatrix.block([[b if b is not None else z for b in row] for row in rows])


def single_block_g0_basis(r: int) -> list[GradedDerivation]:
    """The 6r matrices A_k, A'_k, B_k, B'_k, C_k, C'_k spanning g0(n_(i, r)).

    A is upper-triangular Toeplitz over <1, i> (value on superdiagonal k-1),
    placed as diag(A, -A^T).  B and C are Hankel over <x, y>: B lives on and
    above the main antidiagonal, C on and below it.  For both, index k means
    the (k-1)-th antidiagonal away from the main one, so index 1 spans the
    semisimple part and indices k > 1 the solvable radical.
    """
    if r < 1:
        raise ValueError("r must be positive")
    out = []
    zero_y = RatMatrix.zeros(2)
    for k in range(1, r + 1):
        for unit, name in ((_ONE, "A"), (_I, "A'")):
            ent = {}
            for p in range(r - k + 1):
                ent[(p, p + k - 1)] = unit
                ent[(r + p + k - 1, r + p)] = -unit.T
            out.append(GradedDerivation(_from_blocks(r, ent), zero_y, f"{name}{k}"))
        for unit, name in ((_X, "B"), (_Y, "B'")):
            # B[p][q] nonzero on p + q = r - k (0-based)
            ent = {(p, r + (r - k - p)): unit for p in range(r - k + 1)}
            out.append(GradedDerivation(_from_blocks(r, ent), zero_y, f"{name}{k}"))
        for unit, name in ((_X, "C"), (_Y, "C'")):
            # C[p][q] = c_{p+q+2-r} for p+q >= r-1 (0-based)
            s = r - 2 + k
            ent = {(r + p, s - p): unit for p in range(r) if 0 <= s - p < r}
            out.append(GradedDerivation(_from_blocks(r, ent), zero_y, f"{name}{k}"))
    return out


# name fixed by the public API
theorem33_basis = single_block_g0_basis


def span_rank(mats: Sequence[RatMatrix]) -> int:
    """Rank of the span of matrices, viewed as flattened vectors."""
    if not mats:
        return 0
    return rank(RatMatrix(len(mats), len(mats[0].entries), (x for M in mats for x in M.entries)))


# ---------------------------------------------------------------------------
# witnesses and checks
# ---------------------------------------------------------------------------


class NotHTypeError(ValueError):
    pass


class NonUnitVectorError(ValueError):
    pass


def reflection(z: Sequence[Fraction]) -> RatMatrix:
    """r_z = I - 2 z z^T, the reflection through z-perp for a unit z."""
    m = len(z)
    return RatMatrix(m, m, ((1 if i == j else 0) - 2 * z[i] * z[j] for i in range(m) for j in range(m)))


def verify_reflection_automorphism(alg: StepTwoAlgebra, z: Sequence) -> bool:
    """Check [J_z u, J_z v] = -r_z([u, v]) on all basis pairs."""
    z = [Fraction(x) for x in z]
    if sum(x * x for x in z) != 1:
        raise NonUnitVectorError(f"z = {tuple(map(str, z))} is not a unit vector")
    ok, bad = is_htype_standard_metric(alg)
    if not ok:
        raise NotHTypeError(f"CAR fails at (i, j) = {bad}")
    J = t_matrix(alg, z)
    mr = -reflection(z)
    n = alg.n
    cols = [J.col(j) for j in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            e_a = [Fraction(int(i == a)) for i in range(n)]
            e_b = [Fraction(int(i == b)) for i in range(n)]
            if bracket(alg, cols[a], cols[b]) != mr.apply(bracket(alg, e_a, e_b)):
                return False
    return True


def rotation_generator(c) -> RatMatrix:
    """Y acting on z that, together with some X, gives a derivation of n_(c, r).

    For c = i this is [[0, 1], [-1, 0]]; for c = a + bi it is that matrix
    conjugated by the center basis change e1' = e1 - a e2, e2' = b e2 that
    carries the pencil of n_(i, r) to the pencil of n_(c, r).
    """
    a, b = c.re, c.im
    return RatMatrix.from_rows([[a / b, 1 / b], [-(a * a + b * b) / b, -a / b]])


def so2_witness(spec: NormalFormSpec) -> GradedDerivation | None:
    """A derivation outside g0 when all c's agree; None otherwise."""
    alg = build_algebra(spec)
    if len(set(spec.cs)) != 1:
        q = graded_derivations(alg).dim_g_quotient
        if q:
            raise ArithmeticError(f"distinct parameters but dim(g/g0) = {q}")
        return None
    Y = rotation_generator(spec.cs[0])
    v = _graded_system(alg, y_fixed=Y).particular_solution()
    if v is None:
        raise ArithmeticError(f"no X solves the inhomogeneous system for {spec}")
    X = RatMatrix(alg.n, alg.n, v)
    return GradedDerivation(X, Y, "so2")


@dataclass(frozen=True)
class HatInclusion:
    """Truthy iff the inclusion holds; unpacks as ``(ok, dim_aut, dim_aut_hat)``."""

    ok: bool
    dim_aut: int
    dim_aut_hat: int

    def __bool__(self) -> bool:
        return self.ok

    def __iter__(self):
        return iter((self.ok, self.dim_aut, self.dim_aut_hat))


def hat_inclusion_check(spec: NormalFormSpec) -> HatInclusion:
    """G0(n) inside G0(n-hat) at the Lie algebra level, plus dim Aut(n) <= dim Aut(n-hat)."""
    alg = build_algebra(spec)
    hat = build_algebra(build_hat(spec))
    hat_T = [hat.T(k) for k in range(2)]
    contained = all(
        (Tk @ X + X.T @ Tk).is_zero() for X in g0_basis(alg) for Tk in hat_T
    )
    aut, aut_hat = full_derivation_dim(alg), full_derivation_dim(hat)
    return HatInclusion(contained and aut <= aut_hat, aut, aut_hat)


def commutator(A: RatMatrix, B: RatMatrix) -> RatMatrix:
    return A @ B - B @ A


def is_g0_element(alg: StepTwoAlgebra, X: RatMatrix) -> bool:
    return _is_derivation(alg, X, RatMatrix.zeros(alg.m))
