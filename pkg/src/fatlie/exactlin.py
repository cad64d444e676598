"""Exact rational matrices, polynomials and linear solving.

Scalars are :class:`fractions.Fraction`.  Nothing in this module touches
floating point.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are refused; they would smuggle rounding into exact results.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"refusing inexact scalar {x!r}")
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def format_rational(x: Fraction) -> str:
    """``p/q``, or ``p`` when the denominator is 1."""
    return str(Fraction(x))


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


class RatMatrix:
    """Immutable dense matrix of Fractions, stored row-major."""

    __slots__ = ("nrows", "ncols", "entries", "_hash")

    def __init__(self, nrows: int, ncols: int, entries: Iterable):
        entries = tuple(as_rational(e) for e in entries)
        if len(entries) != nrows * ncols:
            raise DimensionError(
                f"{nrows}x{ncols} matrix needs {nrows * ncols} entries, got {len(entries)}"
            )
        self.nrows = nrows
        self.ncols = ncols
        self.entries = entries
        self._hash = None

    # construction -------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RatMatrix":
        rows = [list(r) for r in rows]
        nrows = len(rows)
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise DimensionError("ragged rows")
        return cls(nrows, ncols, (e for r in rows for e in r))

    @classmethod
    def zeros(cls, nrows: int, ncols: int | None = None) -> "RatMatrix":
        ncols = nrows if ncols is None else ncols
        return cls(nrows, ncols, [ZERO] * (nrows * ncols))

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls(n, n, (ONE if i == j else ZERO for i in range(n) for j in range(n)))

    @classmethod
    def diag(cls, values: Sequence) -> "RatMatrix":
        n = len(values)
        return cls(n, n, (values[i] if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def column(cls, values: Sequence) -> "RatMatrix":
        return cls(len(values), 1, values)

    @classmethod
    def block(cls, blocks: Sequence[Sequence["RatMatrix | None"]]) -> "RatMatrix":
        """Assemble a block matrix; ``None`` entries are zero blocks.

        Every block row must contain at least one matrix to fix its height,
        and likewise every block column.
        """
        heights = []
        for brow in blocks:
            hs = {b.nrows for b in brow if b is not None}
            if len(hs) != 1:
                raise DimensionError("inconsistent block heights")
            heights.append(hs.pop())
        widths = []
        for j in range(len(blocks[0])):
            ws = {brow[j].ncols for brow in blocks if brow[j] is not None}
            if len(ws) != 1:
                raise DimensionError("inconsistent block widths")
            widths.append(ws.pop())
        rows: list[list[Fraction]] = []
        for brow, h in zip(blocks, heights):
            for i in range(h):
                row: list[Fraction] = []
                for b, w in zip(brow, widths):
                    row.extend(b.row(i) if b is not None else [ZERO] * w)
                rows.append(row)
        return cls(len(rows), sum(widths), (e for r in rows for e in r))

    @classmethod
    def block_diag(cls, mats: Sequence["RatMatrix"]) -> "RatMatrix":
        k = len(mats)
        return cls.block([[mats[i] if i == j else None for j in range(k)] for i in range(k)]) if k > 1 else mats[0]

    # access -------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(ij)
        return self.entries[i * self.ncols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.ncols:(i + 1) * self.ncols]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return self.entries[j::self.ncols]

    def rows(self) -> list[tuple[Fraction, ...]]:
        return [self.row(i) for i in range(self.nrows)]

    def tolist(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.nrows)]

    def __iter__(self) -> Iterator[tuple[Fraction, ...]]:
        return iter(self.rows())

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "RatMatrix":
        return RatMatrix(r1 - r0, c1 - c0, (self[i, j] for i in range(r0, r1) for j in range(c0, c1)))

    # arithmetic ---------------------------------------------------------

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix(self.ncols, self.nrows, (self[i, j] for j in range(self.ncols) for i in range(self.nrows)))

    def transpose(self) -> "RatMatrix":
        return self.T

    def _check_same(self, other: "RatMatrix") -> None:
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix(self.nrows, self.ncols, (a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same(other)
        return RatMatrix(self.nrows, self.ncols, (a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "RatMatrix":
        return RatMatrix(self.nrows, self.ncols, (-a for a in self.entries))

    def scale(self, k) -> "RatMatrix":
        k = as_rational(k)
        return RatMatrix(self.nrows, self.ncols, (k * a for a in self.entries))

    def __rmul__(self, k) -> "RatMatrix":
        return self.scale(k)

    def __mul__(self, k) -> "RatMatrix":
        if isinstance(k, RatMatrix):
            return NotImplemented
        return self.scale(k)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = [other.col(j) for j in range(other.ncols)]
        out = []
        for i in range(self.nrows):
            r = self.row(i)
            nz = [(k, a) for k, a in enumerate(r) if a]
            for c in cols:
                out.append(sum((a * c[k] for k, a in nz), ZERO))
        return RatMatrix(self.nrows, other.ncols, out)

    def __pow__(self, k: int) -> "RatMatrix":
        if not self.is_square or k < 0:
            raise DimensionError("power needs a square matrix and k >= 0")
        result = RatMatrix.identity(self.nrows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def trace(self) -> Fraction:
        if not self.is_square:
            raise DimensionError("trace of a non-square matrix")
        return sum((self[i, i] for i in range(self.nrows)), ZERO)

    def is_zero(self) -> bool:
        return not any(self.entries)

    def is_skew(self) -> bool:
        return self.is_square and (self + self.T).is_zero()

    def apply(self, v: Sequence) -> tuple[Fraction, ...]:
        """Matrix times a plain vector."""
        if len(v) != self.ncols:
            raise DimensionError(f"vector of length {len(v)} for {self.shape} matrix")
        v = [as_rational(x) for x in v]
        return tuple(sum((a * x for a, x in zip(self.row(i), v) if a), ZERO) for i in range(self.nrows))

    def flatten(self) -> tuple[Fraction, ...]:
        return self.entries

    # comparison ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nrows, self.ncols, self.entries))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(format_rational(x) for x in self.row(i)) for i in range(self.nrows))
        return f"RatMatrix[{body}]"


# ---------------------------------------------------------------------------
# sparse incremental row reduction
# ---------------------------------------------------------------------------


class LinearSystem:
    """Incrementally row-reduced linear system over Q.

    Equations are sparse ``{column: coefficient}`` maps with an optional
    right-hand side.  The stored rows are kept in reduced row-echelon form
    with leftmost pivots, so the result is independent of the order in which
    equations arrive.
    """

    def __init__(self, nvars: int):
        self.nvars = nvars
        self._rhs = nvars  # augmented column index
        self._pivots: dict[int, dict[int, Fraction]] = {}
        self.consistent = True

    def add(self, coeffs: Mapping[int, object], rhs=0) -> None:
        row = {int(k): as_rational(v) for k, v in coeffs.items() if v}
        rhs = as_rational(rhs)
        if rhs:
            row[self._rhs] = rhs
        for p in [c for c in row if c in self._pivots]:
            f = row.get(p)
            if not f:
                continue
            for c, a in self._pivots[p].items():
                v = row.get(c, ZERO) - f * a
                if v:
                    row[c] = v
                else:
                    row.pop(c, None)
        cols = [c for c in row if c != self._rhs]
        if not cols:
            if row:
                self.consistent = False
            return
        q = min(cols)
        inv = 1 / row[q]
        row = {c: a * inv for c, a in row.items()}
        for prow in self._pivots.values():
            f = prow.get(q)
            if f:
                for c, a in row.items():
                    v = prow.get(c, ZERO) - f * a
                    if v:
                        prow[c] = v
                    else:
                        prow.pop(c, None)
        self._pivots[q] = row

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def pivot_columns(self) -> list[int]:
        return sorted(self._pivots)

    def free_columns(self) -> list[int]:
        return [c for c in range(self.nvars) if c not in self._pivots]

    def kernel(self) -> list[tuple[Fraction, ...]]:
        """Basis of the homogeneous solution space.

        One vector per free column, in increasing column order, with that
        free variable set to 1 and the other free variables set to 0.
        """
        basis = []
        for f in self.free_columns():
            v = [ZERO] * self.nvars
            v[f] = ONE
            for p, prow in self._pivots.items():
                a = prow.get(f)
                if a:
                    v[p] = -a
            basis.append(tuple(v))
        return basis

    def particular_solution(self) -> tuple[Fraction, ...] | None:
        """A solution with all free variables zero, or None if inconsistent."""
        if not self.consistent:
            return None
        v = [ZERO] * self.nvars
        for p, prow in self._pivots.items():
            v[p] = prow.get(self._rhs, ZERO)
        return tuple(v)


def _system_from_matrix(A: RatMatrix, b: Sequence | None = None) -> LinearSystem:
    sys_ = LinearSystem(A.ncols)
    for i in range(A.nrows):
        sys_.add({j: a for j, a in enumerate(A.row(i)) if a}, 0 if b is None else b[i])
    return sys_


def kernel(A: RatMatrix) -> list[RatMatrix]:
    """Column vectors spanning the null space of ``A``, in RREF-parametrized form."""
    return [RatMatrix.column(v) for v in _system_from_matrix(A).kernel()]


def rank(A: RatMatrix) -> int:
    return _system_from_matrix(A).rank


def solve(A: RatMatrix, b: Sequence) -> tuple[Fraction, ...] | None:
    """One solution of ``A x = b`` (free variables zero), or None."""
    if len(b) != A.nrows:
        raise DimensionError("right-hand side length mismatch")
    return _system_from_matrix(A, b).particular_solution()


def inverse(A: RatMatrix) -> RatMatrix:
    if not A.is_square:
        raise DimensionError("inverse of a non-square matrix")
    n = A.nrows
    cols = []
    for j in range(n):
        e = [ONE if i == j else ZERO for i in range(n)]
        x = solve(A, e)
        if x is None:
            raise ZeroDivisionError("matrix is singular")
        cols.append(x)
    return RatMatrix(n, n, (cols[j][i] for i in range(n) for j in range(n)))


def det(A: RatMatrix) -> Fraction:
    """Determinant by fraction-free (Bareiss) elimination.

    Each row is first scaled to integers; the scale factors are divided
    out at the end.
    """
    if not A.is_square:
        raise DimensionError(f"determinant of a {A.nrows}x{A.ncols} matrix")
    n = A.nrows
    if n == 0:
        return ONE
    scale = 1
    M: list[list[int]] = []
    for i in range(n):
        r = A.row(i)
        d = math.lcm(*(x.denominator for x in r))
        scale *= d
        M.append([x.numerator * (d // x.denominator) for x in r])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return ZERO
        pk = M[k][k]
        for i in range(k + 1, n):
            rik = M[i][k]
            Mi, Mk = M[i], M[k]
            for j in range(k + 1, n):
                Mi[j] = (Mi[j] * pk - rik * Mk[j]) // prev
        prev = pk
    return Fraction(sign * M[n - 1][n - 1], scale)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


class RatPoly:
    """Univariate polynomial over Q with ascending coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [as_rational(x) for x in coeffs]
        while c and not c[-1]:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def x(cls) -> "RatPoly":
        return cls([0, 1])

    @classmethod
    def constant(cls, a) -> "RatPoly":
        return cls([a])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else ZERO

    def monic(self) -> "RatPoly":
        if self.is_zero():
            return self
        lc = self.leading
        return RatPoly(a / lc for a in self.coeffs)

    def __call__(self, x):
        acc = ZERO
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def eval_matrix(self, A: RatMatrix) -> RatMatrix:
        """Horner evaluation with a square matrix argument."""
        n = A.nrows
        acc = RatMatrix.zeros(n)
        eye = RatMatrix.identity(n)
        for a in reversed(self.coeffs):
            acc = acc @ A + eye.scale(a)
        return acc

    def derivative(self) -> "RatPoly":
        return RatPoly(k * a for k, a in enumerate(self.coeffs) if k)

    def __add__(self, other) -> "RatPoly":
        other = _poly(other)
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return RatPoly((a[i] if i < len(a) else ZERO) + (b[i] if i < len(b) else ZERO) for i in range(n))

    __radd__ = __add__

    def __neg__(self) -> "RatPoly":
        return RatPoly(-a for a in self.coeffs)

    def __sub__(self, other) -> "RatPoly":
        return self + (-_poly(other))

    def __rsub__(self, other) -> "RatPoly":
        return _poly(other) - self

    def __mul__(self, other) -> "RatPoly":
        other = _poly(other)
        if self.is_zero() or other.is_zero():
            return RatPoly()
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RatPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "RatPoly":
        out = RatPoly([1])
        for _ in range(k):
            out = out * self
        return out

    def __divmod__(self, other: "RatPoly") -> tuple["RatPoly", "RatPoly"]:
        other = _poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lc = other.leading
        quot = [ZERO] * max(len(rem) - dq, 0)
        for k in range(len(rem) - 1, dq - 1, -1):
            f = rem[k] / lc
            if f:
                quot[k - dq] = f
                for j, b in enumerate(other.coeffs):
                    rem[k - dq + j] -= f * b
        return RatPoly(quot), RatPoly(rem[:dq] if dq > 0 else [])

    def __floordiv__(self, other) -> "RatPoly":
        return divmod(self, other)[0]

    def __mod__(self, other) -> "RatPoly":
        return divmod(self, other)[1]

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RatPoly([other])
        if not isinstance(other, RatPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"RatPoly({self})"

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            a = self.coeffs[k]
            if not a:
                continue
            mag = abs(a)
            if k == 0:
                body = format_rational(mag)
            else:
                body = ("" if mag == 1 else format_rational(mag) + "*") + ("t" if k == 1 else f"t^{k}")
            terms.append(("-" if a < 0 else "+", body))
        head_sign, head = terms[0]
        s = ("-" if head_sign == "-" else "") + head
        for sign, body in terms[1:]:
            s += f" {sign} {body}"
        return s

    def primitive_integer(self) -> list[int]:
        """Integer coefficients of the same polynomial up to a positive scalar."""
        if self.is_zero():
            return []
        d = math.lcm(*(a.denominator for a in self.coeffs))
        ints = [int(a * d) for a in self.coeffs]
        g = math.gcd(*ints)
        return [x // g for x in ints]


def _poly(x) -> RatPoly:
    return x if isinstance(x, RatPoly) else RatPoly([x])


def poly_gcd(a: RatPoly, b: RatPoly) -> RatPoly:
    """Monic gcd (zero if both are zero)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def square_free(p: RatPoly) -> RatPoly:
    """Monic product of the distinct irreducible factors of ``p``."""
    if p.is_zero():
        raise ValueError("square-free part of the zero polynomial")
    if p.degree == 0:
        return RatPoly([1])
    g = poly_gcd(p, p.derivative())
    return (p // g).monic()


def char_poly(A: RatMatrix) -> RatPoly:
    """det(tI - A) by the Faddeev-LeVerrier recursion."""
    if not A.is_square:
        raise DimensionError("characteristic polynomial of a non-square matrix")
    n = A.nrows
    coeffs = [ZERO] * (n + 1)
    coeffs[n] = ONE
    eye = RatMatrix.identity(n)
    Mk = RatMatrix.zeros(n)
    for k in range(1, n + 1):
        Mk = A @ Mk + eye.scale(coeffs[n - k + 1])
        coeffs[n - k] = -(A @ Mk).trace() / k
    return RatPoly(coeffs)


# ---------------------------------------------------------------------------
# Sturm sequences
# ---------------------------------------------------------------------------


def sturm_sequence(p: RatPoly) -> list[RatPoly]:
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        seq.append(-(seq[-2] % seq[-1]))
    return seq[:-1]


def _variations(signs: Iterable[int]) -> int:
    nz = [s for s in signs if s]
    return sum(1 for a, b in zip(nz, nz[1:]) if a != b)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _variations_at(seq: Sequence[RatPoly], x) -> int:
    return _variations(_sign(q(x)) for q in seq)


def _variations_at_infinity(seq: Sequence[RatPoly], positive: bool) -> int:
    signs = []
    for q in seq:
        s = _sign(q.leading)
        if not positive and q.degree % 2:
            s = -s
        signs.append(s)
    return _variations(signs)


def real_root_count(p: RatPoly) -> int:
    """Number of distinct real roots of a nonzero polynomial."""
    if p.is_zero():
        raise ValueError("real_root_count of the zero polynomial")
    seq = sturm_sequence(square_free(p))
    return _variations_at_infinity(seq, False) - _variations_at_infinity(seq, True)


def root_bound(p: RatPoly) -> Fraction:
    """Cauchy bound: every real root lies strictly inside (-B, B)."""
    lc = abs(p.leading)
    return 1 + max((abs(a) / lc for a in p.coeffs[:-1]), default=ZERO)


def isolate_real_roots(p: RatPoly) -> list[tuple[Fraction, Fraction]]:
    """Disjoint half-open intervals ``(lo, hi]``, one per distinct real root, ascending."""
    q = square_free(p)
    if q.degree <= 0:
        return []
    seq = sturm_sequence(q)
    B = root_bound(q)
    out = []
    stack = [(-B, B, _variations_at(seq, -B), _variations_at(seq, B))]
    while stack:
        lo, hi, vlo, vhi = stack.pop()
        k = vlo - vhi
        if k == 0:
            continue
        if k == 1:
            out.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        vmid = _variations_at(seq, mid)
        stack.append((mid, hi, vmid, vhi))
        stack.append((lo, mid, vlo, vmid))
    return sorted(out)


def refine_root(p: RatPoly, lo: Fraction, hi: Fraction, width: Fraction) -> tuple[Fraction, Fraction]:
    """Shrink an isolating interval ``(lo, hi]`` of ``p`` below ``width``.

    Returns ``(x, x)`` when a bisection point hits the root exactly.
    """
    q = square_free(p)
    seq = sturm_sequence(q)
    vlo, vhi = _variations_at(seq, lo), _variations_at(seq, hi)
    if vlo - vhi != 1:
        raise ValueError("interval does not isolate a single root")
    if q(hi) == 0:
        return hi, hi
    while hi - lo >= width:
        mid = (lo + hi) / 2
        if q(mid) == 0:
            return mid, mid
        vmid = _variations_at(seq, mid)
        if vlo - vmid == 1:
            hi, vhi = mid, vmid
        else:
            lo, vlo = mid, vmid
    return lo, hi


def real_roots(p: RatPoly, max_denominator: int = 2**64) -> list[tuple[Fraction, bool]]:
    """Distinct real roots as ``(value, exact)`` pairs.

    A root is returned exactly when it is rational.  Otherwise ``value`` is
    a rational within ``1/max_denominator**2`` of it and ``exact`` is False.
    """
    q = square_free(p)
    ints = q.primitive_integer()
    lead = abs(ints[-1]) if ints else 1
    out = []
    for lo, hi in isolate_real_roots(q):
        # two distinct fractions with denominators <= lead differ by >= 1/lead^2
        a, b = refine_root(q, lo, hi, Fraction(1, 2 * lead * lead))
        if a == b:
            out.append((a, True))
            continue
        cand = ((a + b) / 2).limit_denominator(lead)
        if a < cand <= b and q(cand) == 0:
            out.append((cand, True))
            continue
        a, b = refine_root(q, a, b, Fraction(1, max_denominator) ** 2)
        out.append((((a + b) / 2).limit_denominator(max_denominator), a == b))
    return out
