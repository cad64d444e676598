"""2-step nilpotent algebras n = v + z given by skew structure matrices.

Conventions: ``[u, v]_k = u^T C_k v`` and ``T_z = sum_k z_k C_k^T``, so that
``(T_z u)^T v = z^T [u, v]``.  Inner products on v and z are the standard
ones of the chosen basis.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .exactlin import (
    ZERO,
    DimensionError,
    LinearSystem,
    RatMatrix,
    RatPoly,
    as_rational,
    det,
    format_rational,
    real_roots,
)


class UnsupportedSignature(ValueError):
    """Operation only defined for a particular center dimension."""


class SchemaError(ValueError):
    """Malformed algebra file."""


@dataclass(frozen=True)
class StepTwoAlgebra:
    n: int
    m: int
    C: tuple[RatMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "C", tuple(self.C))

    @classmethod
    def from_lists(cls, mats: Sequence[Sequence[Sequence]]) -> "StepTwoAlgebra":
        C = tuple(RatMatrix.from_rows(M) for M in mats)
        if not C:
            raise ValueError("need at least one structure matrix")
        return cls(C[0].nrows, len(C), C)

    @property
    def dim(self) -> int:
        return self.n + self.m

    def T(self, k: int) -> RatMatrix:
        """``T_{e_k}`` (0-based k)."""
        return self.C[k].T

    def transported(self, g: RatMatrix) -> "StepTwoAlgebra":
        """The bracket ``[u, v]' = [g u, g v]``, isomorphic to this one for invertible g."""
        return StepTwoAlgebra(self.n, self.m, tuple(g.T @ Ck @ g for Ck in self.C))


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    warning: bool = False


def validate(alg: StepTwoAlgebra) -> list[Violation]:
    out: list[Violation] = []
    if alg.n < 1 or alg.m < 1:
        out.append(Violation("size", f"need n, m >= 1, got n={alg.n}, m={alg.m}"))
    if len(alg.C) != alg.m:
        out.append(Violation("count", f"m={alg.m} but {len(alg.C)} structure matrices"))
    for k, Ck in enumerate(alg.C):
        if Ck.shape != (alg.n, alg.n):
            out.append(Violation("shape", f"C{k + 1} has shape {Ck.shape}, expected {(alg.n, alg.n)}"))
            continue
        for i in range(alg.n):
            for j in range(i, alg.n):
                if Ck[i, j] != -Ck[j, i]:
                    out.append(Violation("skew", f"C{k + 1}[{i + 1},{j + 1}] = {Ck[i, j]} but C{k + 1}[{j + 1},{i + 1}] = {Ck[j, i]}"))
    if out:
        return out
    sys_ = LinearSystem(alg.m)
    for i in range(alg.n):
        for j in range(i + 1, alg.n):
            sys_.add({k: Ck[i, j] for k, Ck in enumerate(alg.C)})
    if sys_.rank < alg.m:
        out.append(Violation("dependent", "structure matrices are linearly dependent; the center is larger than z", warning=True))
    return out


def _vec(v: Sequence, size: int, what: str) -> list[Fraction]:
    if len(v) != size:
        raise DimensionError(f"{what} has length {len(v)}, expected {size}")
    return [as_rational(x) for x in v]


def bracket(alg: StepTwoAlgebra, u: Sequence, v: Sequence) -> tuple[Fraction, ...]:
    u = _vec(u, alg.n, "u")
    v = _vec(v, alg.n, "v")
    return tuple(sum((a * b for a, b in zip(u, Ck.apply(v))), ZERO) for Ck in alg.C)


def t_matrix(alg: StepTwoAlgebra, z: Sequence) -> RatMatrix:
    z = _vec(z, alg.m, "z")
    acc = RatMatrix.zeros(alg.n)
    for zk, Ck in zip(z, alg.C):
        if zk:
            acc = acc + Ck.T.scale(zk)
    return acc


def pfaffian(alg: StepTwoAlgebra, z: Sequence) -> Fraction:
    """det(T_z) -- the homogeneous degree-n polynomial, not its square root."""
    return det(t_matrix(alg, z))


def pfaffian_pencil(alg: StepTwoAlgebra) -> RatPoly:
    """``q(t) = det(t T_{e1} + T_{e2})`` for m = 2, by interpolation at t = 0..n."""
    if alg.m != 2:
        raise UnsupportedSignature(f"pencil needs m = 2, got m = {alg.m}")
    T1, T2 = alg.T(0), alg.T(1)
    xs = list(range(alg.n + 1))
    ys = [det(T1.scale(x) + T2) for x in xs]
    return _interpolate(xs, ys)


def _interpolate(xs: Sequence[int], ys: Sequence[Fraction]) -> RatPoly:
    t = RatPoly.x()
    out = RatPoly()
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        if not yi:
            continue
        basis = RatPoly([1])
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j != i:
                basis = basis * (t - xj)
                denom *= xi - xj
        out = out + basis * (yi / denom)
    return out


def pencil_value(q: RatPoly, n: int, z: Sequence) -> Fraction:
    """P(z1, z2) = z2^n q(z1/z2), homogenized so z2 = 0 is allowed."""
    z1, z2 = (as_rational(x) for x in z)
    return sum((a * z1**k * z2 ** (n - k) for k, a in enumerate(q.coeffs)), ZERO)


class FatStatus(enum.Enum):
    FAT = "fat"
    NOT_FAT = "notfat"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FatnessReport:
    status: FatStatus
    witness: tuple[Fraction, ...] | None = None
    approximate: bool = False
    samples: int = 0

    @property
    def is_fat(self) -> bool:
        return self.status is FatStatus.FAT

    def summary(self) -> str:
        if self.status is FatStatus.FAT:
            return "fat"
        if self.status is FatStatus.INCONCLUSIVE:
            return f"inconclusive ({self.samples} samples)"
        w = "(" + ",".join(format_rational(x) for x in self.witness) + ")"
        return f"notfat witness={w}" + (" approximate" if self.approximate else "")


def _normalize_direction(z: Sequence[Fraction]) -> tuple[Fraction, ...]:
    for x in z:
        if x:
            return tuple(-y for y in z) if x < 0 else tuple(z)
    return tuple(z)


def _pencil_witness(q: RatPoly, z_lead: Sequence[Fraction], z_tail: Sequence[Fraction]):
    """Real root of ``det(t T_a + T_b)`` as a direction ``t a + b``; exact roots preferred."""
    roots = real_roots(q)
    if not roots:
        return None
    exact = [r for r in roots if r[1]]
    t, is_exact = (exact or roots)[0]
    z = [t * a + b for a, b in zip(z_lead, z_tail)]
    return _normalize_direction(z), not is_exact


def is_fat(alg: StepTwoAlgebra, samples: int = 256, seed: int = 0) -> FatnessReport:
    """Decide whether every T_z with z != 0 is invertible.

    m = 1 and m = 2 are decided exactly.  For m >= 3 random integer
    directions are tested, together with the exact pencil test on the
    plane spanned by consecutive samples; failing to find a singular
    direction yields INCONCLUSIVE.
    """
    if alg.n % 2:
        e1 = tuple(Fraction(int(k == 0)) for k in range(alg.m))
        return FatnessReport(FatStatus.NOT_FAT, e1)
    if alg.m == 1:
        if det(alg.C[0]):
            return FatnessReport(FatStatus.FAT)
        return FatnessReport(FatStatus.NOT_FAT, (Fraction(1),))
    if alg.m == 2:
        if not det(alg.T(0)):
            return FatnessReport(FatStatus.NOT_FAT, (Fraction(1), Fraction(0)))
        found = _pencil_witness(pfaffian_pencil(alg), (1, 0), (0, 1))
        if found is None:
            return FatnessReport(FatStatus.FAT)
        z, approx = found
        return FatnessReport(FatStatus.NOT_FAT, z, approximate=approx)

    rng = random.Random(seed)
    basis = [tuple(Fraction(int(i == k)) for i in range(alg.m)) for k in range(alg.m)]
    directions = list(basis)
    while len(directions) < samples:
        z = tuple(Fraction(rng.randint(-9, 9)) for _ in range(alg.m))
        if any(z):
            directions.append(z)
    directions = directions[:max(samples, 1)]
    approx_hit = None
    prev = None
    for z in directions:
        if not det(t_matrix(alg, z)):
            return FatnessReport(FatStatus.NOT_FAT, _normalize_direction(z), samples=len(directions))
        if prev is not None:
            plane = StepTwoAlgebra(alg.n, 2, (t_matrix(alg, prev).T, t_matrix(alg, z).T))
            found = _pencil_witness(pfaffian_pencil(plane), prev, z)
            if found is not None:
                w, approx = found
                if not approx:
                    return FatnessReport(FatStatus.NOT_FAT, w, samples=len(directions))
                approx_hit = approx_hit or w
        prev = z
    if approx_hit is not None:
        return FatnessReport(FatStatus.NOT_FAT, approx_hit, approximate=True, samples=len(directions))
    return FatnessReport(FatStatus.INCONCLUSIVE, samples=len(directions))


def is_htype_standard_metric(alg: StepTwoAlgebra) -> tuple[bool, tuple[int, int] | None]:
    """Check T_i T_j + T_j T_i = -2 delta_ij I; returns ``(ok, (i, j) or None)`` (1-based)."""
    Ts = [alg.T(k) for k in range(alg.m)]
    eye = RatMatrix.identity(alg.n)
    for i in range(alg.m):
        for j in range(i, alg.m):
            lhs = Ts[i] @ Ts[j] + Ts[j] @ Ts[i]
            rhs = eye.scale(-2) if i == j else RatMatrix.zeros(alg.n)
            if lhs != rhs:
                return False, (i + 1, j + 1)
    return True, None


# ---------------------------------------------------------------------------
# JSON format
# ---------------------------------------------------------------------------


def to_json(alg: StepTwoAlgebra) -> str:
    """Byte-deterministic serialization, one matrix row per line."""
    lines = ["{", f'  "n": {alg.n},', f'  "m": {alg.m},', '  "C": [']
    for k, Ck in enumerate(alg.C):
        lines.append("    [")
        for i in range(Ck.nrows):
            row = json.dumps([format_rational(x) for x in Ck.row(i)])
            lines.append(f"      {row}" + ("," if i < Ck.nrows - 1 else ""))
        lines.append("    ]" + ("," if k < len(alg.C) - 1 else ""))
    lines += ["  ]", "}"]
    return "\n".join(lines) + "\n"


def from_json(text: str) -> StepTwoAlgebra:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict) or not {"n", "m", "C"} <= data.keys():
        raise SchemaError('expected an object with keys "n", "m", "C"')
    n, m, C = data["n"], data["m"], data["C"]
    if not (isinstance(n, int) and isinstance(m, int)) or not isinstance(C, list):
        raise SchemaError('"n" and "m" must be integers and "C" a list')
    if len(C) != m:
        raise SchemaError(f'"m" is {m} but "C" holds {len(C)} matrices')
    mats = []
    for k, M in enumerate(C):
        if not isinstance(M, list) or len(M) != n or any(not isinstance(r, list) or len(r) != n for r in M):
            raise SchemaError(f"C[{k}] is not an {n}x{n} matrix")
        try:
            mats.append(RatMatrix.from_rows([[_parse_entry(x) for x in r] for r in M]))
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise SchemaError(f"C[{k}]: {exc}") from exc
    alg = StepTwoAlgebra(n, m, tuple(mats))
    errors = [v for v in validate(alg) if not v.warning]
    if errors:
        raise SchemaError("; ".join(v.detail for v in errors))
    return alg


def _parse_entry(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    raise ValueError(f"entry {x!r} must be a rational string")


def load(path: str | Path) -> StepTwoAlgebra:
    return from_json(Path(path).read_text())


def dump(alg: StepTwoAlgebra, path: str | Path) -> None:
    Path(path).write_text(to_json(alg))
