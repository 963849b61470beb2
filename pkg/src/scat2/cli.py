"""Command line interface.

Exit codes: 0 success, 1 falsification or inconsistency, 2 usage or I/O
error (including a requested range the tables cannot cover).
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import cache
from .conjectures import ALL_IDS, FALSIFIED, INCONCLUSIVE, RangeSpec, Workbench, check
from .engine import InconsistencyError, compute_csd, diagram_from_table, verify_consistency
from .fit import fit_tau
from .ring import format_rational, to_text
from .store import TableStore

log = logging.getLogger("scat2")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_DECIMAL = re.compile(r"^[0-9]+$")


class UsageError(Exception):
    pass


def _stamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _decimal(text: str) -> int:
    if not _DECIMAL.match(text):
        raise argparse.ArgumentTypeError(f"expected a decimal integer, got {text!r}")
    return int(text)


def _positive(text: str) -> int:
    n = _decimal(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def _grid(text: str) -> tuple[int, int, int, int]:
    m = re.match(r"^([0-9]+):([0-9]+),([0-9]+):([0-9]+)$", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected bmin:bmax,cmin:cmax, got {text!r}")
    bmin, bmax, cmin, cmax = map(int, m.groups())
    if not (1 <= bmin <= bmax and 1 <= cmin <= cmax):
        raise argparse.ArgumentTypeError(f"empty or nonpositive grid {text!r}")
    return bmin, bmax, cmin, cmax


def _conjecture(text: str) -> tuple[int, ...]:
    if text == "all":
        return ALL_IDS
    n = _decimal(text)
    if n not in ALL_IDS:
        raise argparse.ArgumentTypeError(f"conjecture must be 'all' or 1..18, got {text}")
    return (n,)


def _write(path: str | None, data: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(data)
    else:
        cache.atomic_write(path, data.encode("utf-8"))


def _read_table(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return cache.decode_table(data)
    except cache.CacheFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _table_source(args):
    if args.input:
        return _read_table(args.input)
    if args.b is None or args.c is None:
        raise UsageError("need --in, or --b and --c")
    return compute_csd(args.b, args.c, args.degree)


def format_grid(table, imax: int, jmax: int) -> str:
    """Rows from j = jmax down to 0, columns i = 0..imax, as in a printed table."""
    if imax + jmax > 2 * table.D:
        raise UsageError(f"grid {imax}x{jmax} exceeds table degree {table.D}")
    cells = {}
    for j in range(jmax + 1):
        for i in range(imax + 1):
            cells[i, j] = format_rational(table[i, j]) if i + j <= table.D else "."
    width = max(len(v) for v in cells.values())
    rows = [" ".join(cells[i, j].rjust(width) for i in range(imax + 1)) for j in range(jmax, -1, -1)]
    return "\n".join(rows) + "\n"


# -- subcommands ---------------------------------------------------------

def cmd_compute(args) -> int:
    table = compute_csd(args.b, args.c, args.degree)
    _write(args.out, cache.encode_table(table, _stamp()).decode("utf-8"))
    if args.out:
        print(f"wrote {len(table.values)} nonzero entries through degree {args.degree} to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_table(args) -> int:
    table = _table_source(args)
    imax = args.imax if args.imax is not None else min(table.D, 7)
    jmax = args.jmax if args.jmax is not None else min(table.D, 7)
    _write(args.out, format_grid(table, imax, jmax))
    return EXIT_OK


def cmd_fit(args) -> int:
    if (args.i is None) != (args.j is None):
        raise UsageError("--i and --j go together")
    if args.i is not None:
        pairs = [(args.i, args.j)]
    else:
        pairs = [(i, j) for i in range(1, (args.imax or 3) + 1) for j in range(1, (args.jmax or 3) + 1)]
    store = TableStore(args.cache_dir, jobs=args.jobs)
    kw = {"holdout": args.holdout}
    if args.grid:
        kw["rectangle"] = args.grid
    polys, failed = {}, []
    floor = max(max(p) for p in pairs)
    for i, j in pairs:
        res = fit_tau(i, j, store, degree=max(i + j for i, j in pairs),
                      **(kw if args.grid else dict(kw, prime_floor=floor)))
        if res.validated:
            polys[(i, j)] = res.poly
            print(f"tau {i} {j} poly: {to_text(res.poly)}")
        else:
            failed.append((i, j))
            print(f"tau({i},{j}): fit not validated: {res.notes}", file=sys.stderr)
    if args.out:
        cache.atomic_write(args.out, cache.encode_polys(polys, _stamp()))
    return EXIT_FAIL if failed else EXIT_OK


def _ranges(args) -> RangeSpec:
    return RangeSpec(
        imax=args.imax, jmax=args.jmax, bmax=args.bmax, cmax=args.cmax,
        kmax=args.kmax, degree=args.degree, summax=args.summax,
    )


def _run_checks(args):
    ranges = _ranges(args)
    wb = Workbench(TableStore(args.cache_dir, jobs=args.jobs), degree=ranges.degree)
    return [check(n, wb, ranges) for n in args.conjecture]


def _verdict(reports) -> int:
    if any(r.status == FALSIFIED for r in reports):
        return EXIT_FAIL
    if any(r.status == INCONCLUSIVE for r in reports):
        return EXIT_USAGE
    return EXIT_OK


def cmd_verify(args) -> int:
    reports = _run_checks(args)
    lines = [r.to_line() for r in reports]
    for r in reports:
        log.info("conjecture %d: %s", r.id, r.notes)
        if r.status == FALSIFIED:
            print(f"conjecture {r.id} FALSIFIED: {r.witnesses[0]}", file=sys.stderr)
        elif r.status == INCONCLUSIVE:
            print(f"conjecture {r.id} inconclusive: {r.witnesses[0] if r.witnesses else r.notes}", file=sys.stderr)
    _write(args.out, "\n".join(lines) + "\n")
    return _verdict(reports)


def cmd_consistency(args) -> int:
    table = _table_source(args)
    reports = verify_consistency(diagram_from_table(table))
    dirty = 0
    for rep in reports:
        if rep.is_clean():
            print(f"degree {rep.degree}: clean")
        else:
            dirty += 1
            terms = sorted(set(rep.eps1) | set(rep.eps2))
            shown = ", ".join(
                f"({p},{q}): {format_rational(rep.eps1.get((p, q), 0))}/{format_rational(rep.eps2.get((p, q), 0))}"
                for p, q in terms[:6]
            )
            print(f"degree {rep.degree}: defect eps1/eps2 {shown}")
    return EXIT_FAIL if dirty else EXIT_OK


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_export(args) -> int:
    if args.input:
        try:
            header, body = cache.decode(Path(args.input).read_bytes())
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
        except cache.CacheFormatError as exc:
            raise UsageError(f"{args.input}: {exc}") from None
        out = {"kind": header.kind, "b": header.b, "c": header.c, "degree": header.D}
        if header.kind == "numeric":
            out["tau"] = [[i, j, format_rational(v)] for i, j, v in body.entries()]
        else:
            out["tau"] = [[i, j, to_text(p)] for (i, j), p in sorted(body.items(), key=lambda kv: (sum(kv[0]), kv[0][0]))]
        _write(args.out, _json(out))
        return EXIT_OK
    reports = _run_checks(args)
    _write(args.out, _json([
        {"id": r.id, "status": r.status, "range": r.range, "witnesses": r.witnesses, "notes": r.notes}
        for r in reports
    ]))
    return _verdict(reports)


# -- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scat2", description="Rank-2 cluster scattering diagram coefficients.", allow_abbrev=False)
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, allow_abbrev=False)

    def common(sp, *, degree=14):
        sp.add_argument("--degree", type=_positive, default=degree, help=f"total degree cutoff (default {degree})")
        sp.add_argument("--jobs", type=_positive, default=1, help="parallel engine workers")
        sp.add_argument("--cache-dir", default=None, help="directory for per-(b,c) table caches")

    def ranges(sp):
        sp.add_argument("--conjecture", type=_conjecture, default=ALL_IDS, help="all or 1..18 (default all)")
        for flag in ("--imax", "--jmax"):
            sp.add_argument(flag, type=_positive, default=None)
        sp.add_argument("--bmax", type=_positive, default=6)
        sp.add_argument("--cmax", type=_positive, default=6)
        sp.add_argument("--kmax", type=_positive, default=4)
        sp.add_argument("--summax", type=_positive, default=10, help="bound on i+j for conjectures 11 and 12")

    sp = add("compute", "run the engine for one (b, c)")
    sp.add_argument("--b", type=_positive, required=True)
    sp.add_argument("--c", type=_positive, required=True)
    sp.add_argument("--out", default=None)
    common(sp)
    sp.set_defaults(func=cmd_compute)

    sp = add("table", "print a coefficient grid with the origin at the bottom left")
    sp.add_argument("--in", dest="input", default=None)
    sp.add_argument("--b", type=_positive, default=None)
    sp.add_argument("--c", type=_positive, default=None)
    sp.add_argument("--imax", type=_decimal, default=None)
    sp.add_argument("--jmax", type=_decimal, default=None)
    sp.add_argument("--out", default=None)
    common(sp)
    sp.set_defaults(func=cmd_table)

    sp = add("fit", "reconstruct tau(i, j) as a polynomial in b, c, g")
    sp.add_argument("--i", type=_positive, default=None)
    sp.add_argument("--j", type=_positive, default=None)
    sp.add_argument("--imax", type=_positive, default=None)
    sp.add_argument("--jmax", type=_positive, default=None)
    sp.add_argument("--grid", type=_grid, default=None, help="rectangular sample block bmin:bmax,cmin:cmax")
    sp.add_argument("--holdout", type=_positive, default=10, help="number of validation pairs (default 10)")
    sp.add_argument("--out", default=None, help="write a symbolic cache")
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = add("verify", "check conjectures over finite ranges")
    ranges(sp)
    sp.add_argument("--out", default=None, help="write report records")
    common(sp, degree=20)
    sp.set_defaults(func=cmd_verify)

    sp = add("consistency", "defect report for a table")
    sp.add_argument("--in", dest="input", default=None)
    sp.add_argument("--b", type=_positive, default=None)
    sp.add_argument("--c", type=_positive, default=None)
    common(sp)
    sp.set_defaults(func=cmd_consistency)

    sp = add("export", "JSON form of a cache (--in) or of conjecture reports")
    sp.add_argument("--in", dest="input", default=None)
    sp.add_argument("--out", default=None)
    ranges(sp)
    common(sp, degree=20)
    sp.set_defaults(func=cmd_export)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"scat2 {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"scat2 {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InconsistencyError as exc:
        print(f"scat2 {args.command}: inconsistent diagram: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())
