"""Normal forms n_(c,r) of fat algebras with two-dimensional center.

A spec is a list of blocks ``(c, r)`` with ``c`` in the upper half-plane
and ``r >= 1``.  Two specs give isomorphic algebras when the block sizes
agree up to permutation and the parameters differ by one Moebius map.
Orientation-preserving maps are handled exactly through the invariant

    delta(c, c') = |c - c'|^2 / (Im c * Im c'),

which is a monotone function of hyperbolic distance, together with the
sign of ``Im CR(c1, c2; c3, conj(c1))`` for one non-degenerate triple.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .exactlin import (
    ONE,
    ZERO,
    RatMatrix,
    RatPoly,
    as_rational,
    char_poly,
    format_rational,
    inverse,
    rank,
    square_free,
)
from .liealg import FatStatus, StepTwoAlgebra, UnsupportedSignature, is_fat


class NotFatError(ValueError):
    pass


class NeedsNumeric(ArithmeticError):
    """The pencil operator does not split into rational quadratics."""

    def __init__(self, message: str, poly: RatPoly):
        super().__init__(message)
        self.poly = poly


class SpecParseError(ValueError):
    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.column = column


# ---------------------------------------------------------------------------
# Q(i) arithmetic
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class ComplexParam:
    """A point ``re + im*i`` of the upper half-plane with rational coordinates."""

    re: Fraction
    im: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re", as_rational(self.re))
        object.__setattr__(self, "im", as_rational(self.im))
        if self.im <= 0:
            raise ValueError(f"parameter {self} is not in the upper half-plane")

    def __str__(self) -> str:
        return f"{format_rational(self.re)}+{format_rational(self.im)}*I"


I = ComplexParam(0, 1)

# plain (re, im) pairs for intermediate values that may leave the half-plane
_QI = tuple[Fraction, Fraction]


def _qi(c) -> _QI:
    if isinstance(c, ComplexParam):
        return (c.re, c.im)
    return (as_rational(c[0]), as_rational(c[1]))


def _sub(a: _QI, b: _QI) -> _QI:
    return (a[0] - b[0], a[1] - b[1])


def _mul(a: _QI, b: _QI) -> _QI:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _div(a: _QI, b: _QI) -> _QI:
    n = b[0] ** 2 + b[1] ** 2
    if not n:
        raise ZeroDivisionError("division by zero in Q(i)")
    return ((a[0] * b[0] + a[1] * b[1]) / n, (a[1] * b[0] - a[0] * b[1]) / n)


def _conj(a: _QI) -> _QI:
    return (a[0], -a[1])


def _abs2(a: _QI) -> Fraction:
    return a[0] ** 2 + a[1] ** 2


# ---------------------------------------------------------------------------
# specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    c: ComplexParam
    r: int

    def __post_init__(self):
        if not isinstance(self.r, int) or isinstance(self.r, bool) or self.r < 1:
            raise ValueError(f"block size must be a positive integer, got {self.r!r}")

    @property
    def key(self) -> tuple:
        return (self.r, self.c.re, self.c.im)


@dataclass(frozen=True)
class NormalFormSpec:
    """Blocks stored in canonical order: ascending ``(r, Re c, Im c)``."""

    blocks: tuple[Block, ...]
    approximate: bool = field(default=False, compare=False)

    def __post_init__(self):
        blocks = tuple(sorted(self.blocks, key=lambda b: b.key))
        if not blocks:
            raise ValueError("a spec needs at least one block")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def of(cls, cs: Sequence, rs: Sequence[int]) -> "NormalFormSpec":
        if len(cs) != len(rs):
            raise ValueError("c and r lists differ in length")
        return cls(tuple(Block(_param(c), r) for c, r in zip(cs, rs)))

    @property
    def cs(self) -> tuple[ComplexParam, ...]:
        return tuple(b.c for b in self.blocks)

    @property
    def rs(self) -> tuple[int, ...]:
        return tuple(b.r for b in self.blocks)

    @property
    def length(self) -> int:
        return len(self.blocks)

    @property
    def s(self) -> int:
        return sum(self.rs)

    @property
    def n(self) -> int:
        return 4 * self.s

    def __str__(self) -> str:
        return format_spec(self)


def _param(c) -> ComplexParam:
    if isinstance(c, ComplexParam):
        return c
    if isinstance(c, str):
        return parse_complex(c)
    if isinstance(c, complex):
        raise TypeError("use exact (re, im) pairs, not Python complex numbers")
    re_, im_ = c
    return ComplexParam(re_, im_)


_RAT = r"[+-]?\d+(?:/\d+)?"
_COMPLEX_RE = re.compile(rf"\s*({_RAT})\s*([+-])\s*(\d+(?:/\d+)?)\s*\*\s*I\s*$")


def parse_complex(text: str, column: int = 1) -> ComplexParam:
    m = _COMPLEX_RE.match(text)
    if not m:
        raise SpecParseError(f"expected re+im*I, got {text.strip()!r}", column)
    re_ = Fraction(m.group(1))
    im = Fraction(m.group(3))
    if m.group(2) == "-":
        im = -im
    if im <= 0:
        raise SpecParseError(f"imaginary part of {text.strip()!r} must be positive", column)
    return ComplexParam(re_, im)


def parse_spec(text: str) -> NormalFormSpec:
    """Parse ``(c1,...,cl);(r1,...,rl)`` with each c written ``re+im*I``."""
    m = re.fullmatch(r"\s*\(([^()]*)\)\s*;\s*\(([^()]*)\)\s*", text)
    if not m:
        raise SpecParseError("expected '(c1,...,cl);(r1,...,rl)'", 1)
    cs = []
    col = m.start(1) + 1
    for item in m.group(1).split(","):
        cs.append(parse_complex(item, col))
        col += len(item) + 1
    rs = []
    col = m.start(2) + 1
    for item in m.group(2).split(","):
        s = item.strip()
        if not s.isdigit() or int(s) < 1:
            raise SpecParseError(f"block size {s!r} must be a positive integer", col)
        rs.append(int(s))
        col += len(item) + 1
    if len(cs) != len(rs):
        raise SpecParseError(f"{len(cs)} parameters but {len(rs)} block sizes", m.start(2) + 1)
    return NormalFormSpec.of(cs, rs)


def format_spec(spec: NormalFormSpec) -> str:
    return "(" + ",".join(str(c) for c in spec.cs) + ");(" + ",".join(str(r) for r in spec.rs) + ")"


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def build_Z(c) -> RatMatrix:
    c = _param(c)
    return RatMatrix.from_rows([[c.re, c.im], [-c.im, c.re]])


def build_A(c, r: int) -> RatMatrix:
    """Z(c) r times on the diagonal, I_2 on the block subdiagonal."""
    Z = build_Z(c)
    eye = RatMatrix.identity(2)
    return RatMatrix.block([[Z if i == j else eye if i == j + 1 else None for j in range(r)] for i in range(r)]) if r > 1 else Z


def build_A_spec(spec: NormalFormSpec) -> RatMatrix:
    return RatMatrix.block_diag([build_A(b.c, b.r) for b in spec.blocks])


def phi_matrix(s: int) -> RatMatrix:
    eye = RatMatrix.identity(2 * s)
    return RatMatrix.block([[None, -eye], [eye, None]])


def psi_matrix(spec: NormalFormSpec) -> RatMatrix:
    A = build_A_spec(spec)
    return RatMatrix.block([[None, A], [-A.T, None]])


def build_algebra(spec: NormalFormSpec) -> StepTwoAlgebra:
    """n_(c,r): v = R^{4s}, z = R^2 with C_1 = [phi], C_2 = [psi]."""
    return StepTwoAlgebra(spec.n, 2, (phi_matrix(spec.s), psi_matrix(spec)))


def m_matrix(spec: NormalFormSpec) -> RatMatrix:
    """The operator M with phi(Mu, v) = psi(u, v): diag(-A^T, -A)."""
    A = build_A_spec(spec)
    return RatMatrix.block([[-A.T, None], [None, -A]])


def build_hat(spec: NormalFormSpec) -> NormalFormSpec:
    """Semisimplification: s blocks of size 1, all at i."""
    return NormalFormSpec.of([I] * spec.s, [1] * spec.s)


def is_htype_spec(spec: NormalFormSpec) -> bool:
    return len(set(spec.cs)) == 1 and all(r == 1 for r in spec.rs)


# ---------------------------------------------------------------------------
# invariant extraction
# ---------------------------------------------------------------------------


def pencil_operator(alg: StepTwoAlgebra) -> RatMatrix:
    """W = T_{e1}^{-1} T_{e2}."""
    return inverse(alg.T(0)) @ alg.T(1)


def _rational_from_mpf(x, max_den: int = 10**30) -> Fraction:
    sign, man, exp, _ = x._mpf_
    value = Fraction(int(man)) * Fraction(2) ** int(exp)
    return (-value if sign else value).limit_denominator(max_den)


def _numeric_roots(p: RatPoly, dps: int = 80):
    import mpmath

    with mpmath.workdps(dps):
        coeffs = [mpmath.mpf(a.numerator) / a.denominator for a in reversed(p.coeffs)]
        return mpmath.polyroots(coeffs, maxsteps=500, extraprec=4 * dps)


def split_quadratics(p: RatPoly) -> list[tuple[RatPoly, int]]:
    """Factor ``p`` as a product of powers of monic irreducible rational quadratics.

    Candidate factors come from high-precision numerical roots of the
    square-free part; each candidate is then confirmed by exact division.
    Returns ``(factor, multiplicity)`` pairs, or raises NeedsNumeric.
    """
    sf = square_free(p)
    if sf.degree % 2:
        raise NeedsNumeric("odd-degree square-free part has a real root", p)
    factors: list[RatPoly] = []
    rest = sf
    for root in _numeric_roots(sf):
        if root.imag <= 0:
            continue
        s = _rational_from_mpf(2 * root.real)
        nrm = _rational_from_mpf(root.real**2 + root.imag**2)
        q = RatPoly([nrm, -s, 1])
        if s * s >= 4 * nrm:
            raise NeedsNumeric(f"candidate factor {q} is not irreducible", p)
        quot, rem = divmod(rest, q)
        if not rem.is_zero():
            raise NeedsNumeric(f"{q} does not divide the characteristic polynomial", p)
        factors.append(q)
        rest = quot
    if rest.degree != 0:
        raise NeedsNumeric("characteristic polynomial has real or irrational-pair roots", p)
    out = []
    for q in factors:
        mult, rem_p = 0, p
        while True:
            quot, rem = divmod(rem_p, q)
            if not rem.is_zero():
                break
            mult, rem_p = mult + 1, quot
        out.append((q, mult))
    return out


def extract_invariants(alg: StepTwoAlgebra, numeric_fallback: bool = False, tolerance: float = 1e-9) -> NormalFormSpec:
    """Recover (c, r) from raw structure matrices of a fat algebra with m = 2.

    The pencil operator W is similar to M = diag(-A^T, -A), so each block
    (c, r) contributes the root pair -c, -conj(c) to W with two Jordan
    chains of length r each.  For a factor ``t^2 - 2 alpha t + (alpha^2 + beta^2)``
    this gives ``c = -alpha + |beta| i`` and

        #{blocks with r >= k} = (rank F^{k-1} - rank F^k) / 4,   F = f(W).
    """
    if alg.m != 2:
        raise UnsupportedSignature(f"normal forms need m = 2, got m = {alg.m}")
    if is_fat(alg).status is not FatStatus.FAT:
        raise NotFatError("algebra is not fat")
    W = pencil_operator(alg)
    p = char_poly(W)
    try:
        return _extract_exact(W, p)
    except NeedsNumeric:
        if not numeric_fallback:
            raise
        return _extract_numeric(W, p, tolerance)


def _extract_exact(W: RatMatrix, p: RatPoly) -> NormalFormSpec:
    factors = split_quadratics(p)
    blocks = []
    n = W.nrows
    for f, mult in factors:
        alpha = -f.coeffs[1] / 2
        beta2 = f.coeffs[0] - alpha**2
        beta = _rational_sqrt(beta2)
        if beta is None:
            raise NeedsNumeric(f"imaginary part of a root of {f} is irrational", p)
        c = ComplexParam(-alpha, beta)
        F = f.eval_matrix(W)
        ranks = [n]
        Fk = RatMatrix.identity(n)
        for _ in range(mult):
            Fk = Fk @ F
            ranks.append(rank(Fk))
        at_least = []
        for k in range(1, mult + 1):
            d = ranks[k - 1] - ranks[k]
            if d % 4:
                raise ValueError(f"rank drop {d} for factor {f} is not a multiple of 4")
            at_least.append(d // 4)
        at_least.append(0)
        for k in range(1, mult + 1):
            blocks += [Block(c, k)] * (at_least[k - 1] - at_least[k])
    return NormalFormSpec(tuple(blocks))


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    a, b = math.isqrt(x.numerator), math.isqrt(x.denominator)
    if a * a == x.numerator and b * b == x.denominator:
        return Fraction(a, b)
    return None


def _extract_numeric(W: RatMatrix, p: RatPoly, tolerance: float) -> NormalFormSpec:
    """Floating-point fallback: root clustering plus numerical rank sequences."""
    import numpy as np

    Wf = np.array([[float(x) for x in row] for row in W.rows()])
    n = Wf.shape[0]
    roots = [complex(r) for r in _numeric_roots(square_free(p)) if r.imag > tolerance]
    blocks = []
    for lam in roots:
        F = Wf @ Wf - 2 * lam.real * Wf + abs(lam) ** 2 * np.eye(n)
        ranks = [n]
        Fk = np.eye(n)
        for _ in range(n // 4):
            Fk = Fk @ F
            ranks.append(int(np.linalg.matrix_rank(Fk, tol=tolerance * max(1.0, np.abs(Fk).max()))))
            if ranks[-1] == ranks[-2]:
                break
        at_least = [(ranks[k - 1] - ranks[k]) // 4 for k in range(1, len(ranks))] + [0]
        c = ComplexParam(Fraction(-lam.real).limit_denominator(10**9), Fraction(lam.imag).limit_denominator(10**9))
        for k in range(1, len(at_least)):
            blocks += [Block(c, k)] * max(at_least[k - 1] - at_least[k], 0)
    return NormalFormSpec(tuple(blocks), approximate=True)


# ---------------------------------------------------------------------------
# Moebius action and invariants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MoebiusMap:
    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, as_rational(getattr(self, name)))
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError("Moebius map needs ad - bc = 1")

    @classmethod
    def from_rows(cls, rows) -> "MoebiusMap":
        (a, b), (c, d) = rows
        return cls(a, b, c, d)

    def __call__(self, z) -> ComplexParam:
        return ComplexParam(*_apply_gl(self.a, self.b, self.c, self.d, _qi(z)))


def _apply_gl(a, b, c, d, z: _QI) -> _QI:
    return _div((a * z[0] + b, a * z[1]), (c * z[0] + d, c * z[1]))


def moebius_apply(g: MoebiusMap, spec: NormalFormSpec) -> NormalFormSpec:
    return NormalFormSpec(tuple(Block(g(b.c), b.r) for b in spec.blocks))


def delta_invariant(c1, c2) -> Fraction:
    """|c1 - c2|^2 / (Im c1 Im c2); equals 2 (cosh d - 1) for hyperbolic distance d."""
    c1, c2 = _param(c1), _param(c2)
    return _abs2(_sub(_qi(c1), _qi(c2))) / (c1.im * c2.im)


def orientation(z1, z2, z3) -> int:
    """Sign of Im CR(z1, z2; z3, conj z1); zero iff the points lie on one geodesic.

    Invariant under orientation-preserving maps, negated by reflections.
    """
    a, b, c = _qi(z1), _qi(z2), _qi(z3)
    if a == b or b == c or a == c:
        return 0
    abar = _conj(a)
    cr = _div(_mul(_sub(a, c), _sub(b, abar)), _mul(_sub(a, abar), _sub(b, c)))
    return (cr[1] > 0) - (cr[1] < 0)


def delta_matrix(spec: NormalFormSpec) -> list[list[Fraction]]:
    cs = spec.cs
    return [[delta_invariant(x, y) for y in cs] for x in cs]


def _row_keys(spec: NormalFormSpec, D) -> list[tuple]:
    rs = spec.rs
    return [(rs[i], tuple(sorted(zip(rs, D[i])))) for i in range(spec.length)]


@dataclass(frozen=True)
class IsoReport:
    isomorphic: bool
    permutation: tuple[int, ...] | None = None
    reflection_only: bool = False
    reason: str = ""


def _first_nondegenerate_triple(cs) -> tuple[int, int, int] | None:
    for i, j, k in itertools.combinations(range(len(cs)), 3):
        if orientation(cs[i], cs[j], cs[k]):
            return (i, j, k)
    return None


def is_isomorphic(a: NormalFormSpec, b: NormalFormSpec) -> IsoReport:
    """Decide isomorphism under block permutation and PSL(2, R).

    ``permutation[i] = j`` matches block i of ``a`` with block j of ``b``.
    When the configurations only match through an orientation-reversing
    map, the report is negative with ``reflection_only`` set.
    """
    if a.length != b.length:
        return IsoReport(False, reason=f"block counts differ ({a.length} vs {b.length})")
    if sorted(a.rs) != sorted(b.rs):
        return IsoReport(False, reason="block size multisets differ")
    Da, Db = delta_matrix(a), delta_matrix(b)
    ka, kb = _row_keys(a, Da), _row_keys(b, Db)
    if sorted(ka) != sorted(kb):
        return IsoReport(False, reason="delta-row multisets differ")
    triple = _first_nondegenerate_triple(a.cs)
    ell = a.length
    perm = [-1] * ell
    used = [False] * ell
    reflected = False

    def search(i: int):
        nonlocal reflected
        if i == ell:
            if triple is None:
                return tuple(perm)
            x, y, z = triple
            if orientation(a.cs[x], a.cs[y], a.cs[z]) == orientation(b.cs[perm[x]], b.cs[perm[y]], b.cs[perm[z]]):
                return tuple(perm)
            reflected = True
            return None
        for j in range(ell):
            if used[j] or ka[i] != kb[j]:
                continue
            if any(Da[i][k] != Db[j][perm[k]] for k in range(i)):
                continue
            perm[i], used[j] = j, True
            found = search(i + 1)
            if found is not None:
                return found
            perm[i], used[j] = -1, False
        return None

    found = search(0)
    if found is not None:
        return IsoReport(True, permutation=found)
    if reflected:
        return IsoReport(False, reflection_only=True, reason="configurations differ by an orientation-reversing map only")
    return IsoReport(False, reason="no block matching preserves all delta invariants")


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalForm:
    """Canonical representative, or only the invariant certificate when the
    normalizing map would need irrational entries (``spec`` is None then)."""

    spec: NormalFormSpec | None
    certificate: tuple

    @property
    def positional(self) -> bool:
        return self.spec is not None

    def __str__(self) -> str:
        if self.spec is not None:
            return format_spec(self.spec)
        return "nonpositional " + _format_certificate(self.certificate)


def _format_certificate(cert) -> str:
    parts = []
    for r, row in cert:
        parts.append(f"r={r}:[" + " ".join(f"({rk},{format_rational(d)})" for rk, d in row) + "]")
    return "{" + ";".join(parts) + "}"


def canonical_form(spec: NormalFormSpec) -> CanonicalForm:
    """Send the block with the smallest (r, delta-row) key to i and the
    nearest such distinct block onto the imaginary axis above i.

    Ties are broken by trying every tied choice and keeping the smallest
    resulting spec, so specs related by an orientation-preserving map and
    a block permutation get the same output.
    """
    D = delta_matrix(spec)
    keys = _row_keys(spec, D)
    cert = tuple(sorted(keys))
    kmin = min(keys)
    results = []
    for p in (j for j in range(spec.length) if keys[j] == kmin):
        cp = spec.cs[p]
        # z -> (z - Re c_p) / Im c_p, determinant Im c_p > 0
        pts = [_apply_gl(ONE, -cp.re, ZERO, cp.im, _qi(c)) for c in spec.cs]
        others = [k for k in range(spec.length) if D[p][k]]
        if not others:
            results.append(_spec_from_points(spec, pts))
            continue
        qmin = min((spec.rs[k], D[p][k], keys[k]) for k in others)
        for q in (k for k in others if (spec.rs[k], D[p][k], keys[k]) == qmin):
            delta = D[p][q]
            root = _rational_sqrt(delta * (delta + 4))
            if root is None:
                return CanonicalForm(None, cert)
            h = (delta + 2 + root) / 2
            x, y = _rotation_to_axis(pts[q], h)
            moved = [_apply_gl(x, y, -y, x, z) for z in pts]
            results.append(_spec_from_points(spec, moved))
    best = min(results, key=lambda s: [b.key for b in s.blocks])
    return CanonicalForm(best, cert)


def _rotation_to_axis(z: _QI, h: Fraction) -> tuple[Fraction, Fraction]:
    """(x, y) with z -> (x z + y) / (-y z + x) sending z to h*i; fixes i."""
    w = (ZERO, h)
    alpha = _sub(z, w)
    beta = (ONE - w[1] * z[1], w[1] * z[0])  # 1 + w z
    if beta == (ZERO, ZERO):
        return ZERO, ONE
    ratio = _div(alpha, beta)
    assert ratio[1] == 0
    return ONE, -ratio[0]


def _spec_from_points(spec: NormalFormSpec, pts: Iterable[_QI]) -> NormalFormSpec:
    return NormalFormSpec(tuple(Block(ComplexParam(*z), r) for z, r in zip(pts, spec.rs)))
