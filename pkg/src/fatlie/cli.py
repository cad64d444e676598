"""``fatlie`` command line.

Exit codes: 0 success or affirmative verdict, 2 usage or parse error,
3 negative verdict, 4 inconclusive.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import dersolve, liealg, normform
from .exactlin import format_rational
from .liealg import FatStatus, SchemaError, StepTwoAlgebra
from .normform import NeedsNumeric, NormalFormSpec, SpecParseError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NEGATIVE = 3
EXIT_INCONCLUSIVE = 4

DEFAULT_GRID = "0+1*I,1+1*I,0+2*I,1+2*I"


class UsageError(Exception):
    pass


def _read_algebra(path: str) -> StepTwoAlgebra:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return liealg.from_json(text)
    except SchemaError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _parse_spec(text: str) -> NormalFormSpec:
    try:
        return normform.parse_spec(text)
    except SpecParseError as exc:
        raise UsageError(f"line 1, {exc}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _spec_or_algebra(arg: str, tolerance: float | None) -> NormalFormSpec:
    """A spec string, or a JSON algebra file whose invariants are extracted."""
    if Path(arg).is_file():
        alg = _read_algebra(arg)
        try:
            return normform.extract_invariants(alg, numeric_fallback=tolerance is not None, tolerance=tolerance or 1e-9)
        except (normform.NotFatError, liealg.UnsupportedSignature, NeedsNumeric) as exc:
            raise UsageError(f"{arg}: {exc}") from exc
    return _parse_spec(arg)


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_build(args) -> int:
    spec = _parse_spec(args.spec)
    text = liealg.to_json(normform.build_algebra(spec))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    alg = _read_algebra(args.algebra)
    violations = liealg.validate(alg)
    report = liealg.is_fat(alg, samples=args.samples, seed=args.seed)
    htype, bad = liealg.is_htype_standard_metric(alg)
    first = report.summary()
    if report.is_fat:
        first += f", htype={'true' if htype else 'false'}"
    lines = [first]
    if not htype:
        lines.append(f"CAR fails at (i,j)={bad}")
    lines += [f"warning: {v.detail}" for v in violations]
    payload = {
        "fat": report.status.value,
        "witness": None if report.witness is None else [format_rational(x) for x in report.witness],
        "approximate": report.approximate,
        "samples": report.samples,
        "htype": htype,
        "warnings": [v.detail for v in violations],
    }
    _emit(args, payload, lines)
    return {FatStatus.FAT: EXIT_OK, FatStatus.NOT_FAT: EXIT_NEGATIVE, FatStatus.INCONCLUSIVE: EXIT_INCONCLUSIVE}[report.status]


def cmd_dims(args) -> int:
    alg = _read_algebra(args.algebra)
    report = dersolve.analyze(alg, samples=args.samples, seed=args.seed)
    if report.fat != FatStatus.FAT.value:
        print(f"warning: algebra is {report.fat}; dimensions computed anyway", file=sys.stderr)
    d = report.to_dict()
    _emit(args, d, [f"{k}={str(v).lower() if isinstance(v, bool) else v}" for k, v in d.items()])
    return EXIT_OK


def cmd_iso(args) -> int:
    a = _spec_or_algebra(args.spec_a, args.tolerance)
    b = _spec_or_algebra(args.spec_b, args.tolerance)
    rep = normform.is_isomorphic(a, b)
    lines = ["isomorphic" if rep.isomorphic else "non-isomorphic"]
    if rep.isomorphic:
        lines.append("permutation: " + " ".join(f"{i + 1}->{j + 1}" for i, j in enumerate(rep.permutation)))
    else:
        lines.append(f"reason: {rep.reason}")
    if rep.reflection_only:
        lines.append("note: the specs differ by an orientation-reversing Moebius map")
    if a.approximate or b.approximate:
        lines.append("note: invariants were extracted numerically")
    payload = {
        "isomorphic": rep.isomorphic,
        "permutation": None if rep.permutation is None else list(rep.permutation),
        "reflection_only": rep.reflection_only,
        "reason": rep.reason,
        "a": str(a),
        "b": str(b),
    }
    _emit(args, payload, lines)
    return EXIT_OK if rep.isomorphic else EXIT_NEGATIVE


def cmd_canon(args) -> int:
    spec = _spec_or_algebra(args.spec, args.tolerance)
    cf = normform.canonical_form(spec)
    payload = {"positional": cf.positional, "canonical": str(cf) if cf.positional else None,
               "certificate": normform._format_certificate(cf.certificate)}
    _emit(args, payload, [str(cf)])
    return EXIT_OK


def _partitions(s: int, largest: int | None = None):
    largest = s if largest is None else largest
    if s == 0:
        yield ()
        return
    for k in range(min(s, largest), 0, -1):
        for rest in _partitions(s - k, k):
            yield (k,) + rest


def sweep_specs(s: int, grid) -> list[NormalFormSpec]:
    """Every spec with block sizes summing to s and parameters from grid,
    one per multiset of blocks."""
    seen = {}
    for rs in _partitions(s):
        for cs in itertools.product(grid, repeat=len(rs)):
            spec = NormalFormSpec.of(list(cs), list(rs))
            seen.setdefault(spec.blocks, spec)
    return [seen[k] for k in sorted(seen, key=lambda blocks: [b.key for b in blocks])]


def _sweep_row(spec: NormalFormSpec) -> tuple[NormalFormSpec, dersolve.DimensionReport]:
    return spec, dersolve.analyze(normform.build_algebra(spec))


def cmd_sweep(args) -> int:
    if not 1 <= args.s <= 4:
        raise UsageError("--s must be between 1 and 4")
    grid = [normform.parse_complex(c) for c in args.cgrid.split(",")]
    specs = sweep_specs(args.s, grid)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_row, specs))
    else:
        rows = [_sweep_row(sp) for sp in specs]
    rows.sort(key=lambda row: -row[1].dim_aut)  # stable: canonical order within ties
    header = ["spec", "dim_g0", "dim_g_quotient", "dim_k0", "dim_k_quotient", "dim_aut", "htype"]
    if args.json:
        payload = []
        for sp, rep in rows:
            row = {k: v for k, v in rep.to_dict().items() if k in header[1:-1]}
            payload.append({"spec": str(sp), **row, "htype": normform.is_htype_spec(sp)})
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print("\t".join(header))
    for sp, rep in rows:
        mark = "H" if normform.is_htype_spec(sp) else "-"
        print("\t".join([str(sp), str(rep.dim_g0), str(rep.dim_g_quotient), str(rep.dim_k0),
                         str(rep.dim_k_quotient), str(rep.dim_aut), mark]))
    return EXIT_OK


def magma_export(alg: StepTwoAlgebra) -> str:
    """Structure-constant Lie algebra over Q, both orderings of each nonzero bracket."""
    n = alg.n
    lines = [f"// 2-step nilpotent Lie algebra: dim v = {n}, dim z = {alg.m}"]
    tuples = []
    for i in range(n):
        for j in range(i + 1, n):
            terms = [(n + k + 1, Ck[i, j]) for k, Ck in enumerate(alg.C) if Ck[i, j]]
            if not terms:
                continue
            rhs = " + ".join(_term(c, f"e{k}") for k, c in terms).replace("+ -", "- ")
            lines.append(f"// [e{i + 1},e{j + 1}] = {rhs}")
            for k, c in terms:
                tuples.append(f"<{i + 1},{j + 1},{k},{format_rational(c)}>")
                tuples.append(f"<{j + 1},{i + 1},{k},{format_rational(-c)}>")
    lines.append("F := Rationals();")
    lines.append("T := [")
    lines += [f"  {t}," for t in tuples[:-1]] + ([f"  {tuples[-1]}"] if tuples else [])
    lines.append("];")
    lines.append(f'L := LieAlgebra<F, {alg.dim} | T : Rep := "Sparse">;')
    return "\n".join(lines) + "\n"


def _term(c, name: str) -> str:
    if c == 1:
        return name
    if c == -1:
        return "-" + name
    return f"{format_rational(c)}*{name}"


def cmd_export(args) -> int:
    alg = _read_algebra(args.algebra)
    sys.stdout.write(magma_export(alg) if args.format == "magma" else liealg.to_json(alg))
    return EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fatlie", description="Exact analysis of fat 2-step nilpotent Lie algebras.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, sampling=False):
        sp.add_argument("--json", action="store_true", help="machine-readable report")
        if sampling:
            sp.add_argument("--samples", type=int, default=256, help="random directions for m >= 3 (default 256)")
            sp.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")

    sp = sub.add_parser("build", help="write the JSON algebra of a normal-form spec")
    sp.add_argument("spec")
    sp.add_argument("out", nargs="?", help="output path (default stdout)")
    sp.add_argument("-o", "--out", dest="out_opt")
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("check", help="fatness and H-type verdict")
    sp.add_argument("algebra")
    common(sp, sampling=True)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("dims", help="automorphism dimension report")
    sp.add_argument("algebra")
    common(sp, sampling=True)
    sp.set_defaults(func=cmd_dims)

    for name, func, nargs in (("iso", cmd_iso, ("spec_a", "spec_b")), ("canon", cmd_canon, ("spec",))):
        sp = sub.add_parser(name, help="isomorphism test" if name == "iso" else "canonical representative")
        for a in nargs:
            sp.add_argument(a, help="spec string or JSON algebra file")
        sp.add_argument("--tolerance", type=float, default=None,
                        help="allow floating-point invariant extraction with this tolerance")
        common(sp)
        sp.set_defaults(func=func)

    sp = sub.add_parser("sweep", help="dimension table over normal forms")
    sp.add_argument("--s", type=int, required=True, help="sum of block sizes (1..4)")
    sp.add_argument("--cgrid", default=DEFAULT_GRID, help=f"comma-separated parameters (default {DEFAULT_GRID})")
    sp.add_argument("--jobs", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("export", help="export an algebra file")
    sp.add_argument("algebra")
    sp.add_argument("--format", choices=("magma", "json"), default="magma")
    sp.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "build":
        args.out = args.out or args.out_opt
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fatlie: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpecParseError as exc:
        print(f"fatlie: error: line 1, {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
