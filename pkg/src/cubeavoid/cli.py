"""``cubeavoid``: generate, solve, verify and inspect Latin cube avoidance instances.

Exit codes: 0 success, 1 bad arguments / I/O / parse error, 2 solver
failure, 3 verification failure.  ``CUBEAVOID_SEED`` supplies the seed when
``--seed`` is not given.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings

from .cube_core import CubeError, apply_isotopy, conflicts, is_latin
from .cubefile import CubeFile, CubeFileError, read_cube_file, write_cube_file
from .isotopy_search import PRESETS, Params, parse_exact
from .oracle import MODELS, InstanceSpec, generate_instance
from .starting_cube import is_starting_cube, starting_latin_cube
from .structure_index import PropertyReport, check_properties, starting_catalog, verify_properties

EXIT_OK, EXIT_IO, EXIT_SOLVE, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # usage errors share the I/O exit code so that 2 always means "solver failed"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CUBEAVOID_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CubeFileError(f"CUBEAVOID_SEED must be an integer, got {env!r}") from None


def _emit(cf: CubeFile, out, canonical: bool) -> None:
    if out in (None, "-"):
        sys.stdout.write(cf.dumps(canonical))
    else:
        write_cube_file(out, cf, canonical)


def _cell(text: str) -> tuple:
    try:
        cell = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected i,j,k, got {text!r}") from None
    if len(cell) != 3:
        raise argparse.ArgumentTypeError(f"expected i,j,k, got {text!r}")
    return cell


def _info(msg: str, to_stderr: bool) -> None:
    print(msg, file=sys.stderr if to_stderr else sys.stdout)


# -- gen ------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.n % 2:
        warnings.warn(f"n={args.n} is odd; the solver only handles even orders", stacklevel=1)
    spec = InstanceSpec(args.n, args.m, args.model, _seed(args), args.fill)
    A = generate_instance(spec)
    _emit(CubeFile("forbidden", A), args.output, args.canonical)
    _info(f"n={A.n} m={A.m} model={spec.model} filled_cells={A.filled_cells()} entries={int(A.mask.sum())}",
          args.output in (None, "-"))
    return EXIT_OK


# -- solve ----------------------------------------------------------------------


def _params(args) -> Params:
    p = PRESETS[args.preset]
    if args.params_json:
        try:
            with open(args.params_json) as fh:
                p = p.replace(**json.load(fh))
        except OSError as exc:
            raise CubeFileError(f"cannot read {args.params_json}: {exc.strerror}") from None
    over = {k: getattr(args, k) for k in ("alpha", "gamma", "kappa", "epsilon", "theta") if getattr(args, k) is not None}
    return p.replace(**over) if over else p


def cmd_solve(args) -> int:
    from .swap_engine import SolveFailed, solve

    A = read_cube_file(args.input, "forbidden").cube
    if A.n % 2:
        raise CubeFileError(f"order {A.n} is odd; only even orders are supported")
    params = _params(args)
    try:
        res = solve(A, params, _seed(args), restarts=args.restarts, max_attempts=args.max_attempts,
                    jobs=args.jobs, best_effort=not args.strict)
    except SolveFailed as exc:
        print(json.dumps(exc.report, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_SOLVE
    _emit(CubeFile("latin", res.cube, res.isotopy), args.output, args.canonical)
    _info(f"restart={res.restart} attempt={res.attempt} conditions_met={res.conditions_met} "
          f"conflicts_after_isotopy={res.stats.total} plan_size={len(res.plan)}",
          args.output in (None, "-"))
    return EXIT_OK


# -- verify ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    L = read_cube_file(args.latin, "latin").cube
    A = read_cube_file(args.forbidden, "forbidden").cube
    if L.n != A.n:
        raise CubeFileError(f"orders differ: latin {L.n}, forbidden {A.n}")
    latin = is_latin(L)
    bad = sorted(conflicts(L, A))
    print(f"latin: {'yes' if latin else 'no (not Latin)'}")
    print(f"conflicts: {len(bad)}")
    for c in bad[:10]:
        print(f"  conflict at {tuple(c)}: symbol {L[c]}")
    return EXIT_OK if latin and not bad else EXIT_VERIFY


# -- inspect ----------------------------------------------------------------------


def _context(cf: CubeFile):
    """Catalog for the cube, carried through its isotopy record if any."""
    L = cf.cube
    if L.n % 2:
        raise CubeFileError("structures are only defined for even orders")
    t = L.n // 2
    base = starting_catalog(t)
    if cf.isotopy is not None:
        image = apply_isotopy(starting_latin_cube(t), cf.isotopy)
        return base.carry(cf.isotopy), image
    if not is_starting_cube(L):
        raise CubeFileError("not a starting cube and no isotopy record: structures are undefined")
    return base, L


def cmd_inspect(args) -> int:
    cf = read_cube_file(args.latin, "latin")
    L = cf.cube
    cat, image = _context(cf)
    out: dict = {"n": L.n}
    if image != L:
        out["cells_changed_since_isotopy"] = int((image.array != L.array).sum())
    what = args.what
    if what in ("subcubes", "transversal", "half-transversal", "blocks") and args.cell is None:
        raise CubeFileError(f"--what {what} needs --cell i,j,k")
    if args.cell is not None and not all(1 <= x <= L.n for x in args.cell):
        raise CubeFileError(f"cell {args.cell} outside 1..{L.n}")

    if what == "subcubes":
        out["cell"] = list(args.cell)
        out["subcubes"] = [
            {"rows": [sc.i1, sc.i2], "columns": [sc.j1, sc.j2], "files": [sc.k1, sc.k2],
             "symbols": list(sc.symbols(L)), "is_subcube": sc.is_subcube_of(L)}
            for sc in cat.subcubes_at(args.cell)
        ]
    elif what == "half-transversal":
        out["cell"] = list(args.cell)
        out["members"] = sorted(list(c) for c in cat.half_transversal_members(args.cell))
    elif what == "transversal":
        tid = int(cat.labels["transversal"][cat.flat(args.cell)])
        cells = sorted(cat.transversal_cells(tid))
        out.update({"cell": list(args.cell), "id": tid, "cells": [list(c) for c in cells],
                    "symbols": sorted(L[c] for c in cells)})
    elif what == "blocks":
        out["cell"] = list(args.cell)
        out["memberships"] = cat.memberships(args.cell)
    elif what == "catalog-counts":
        out["counts"] = cat.counts()
    elif what == "properties":
        t = L.n // 2
        if cf.isotopy is None:
            report = verify_properties(t, sample=args.sample)
            out["report"] = report.to_dict()
            ok = report.passed
        else:
            # structures belong to the isotopic image, not to the swapped solution
            report = PropertyReport(t, "carried", check_properties(image, cat))
            out["checked"] = "isotopic image of the starting cube"
            out["report"] = report.to_dict()
            ok = report.passed
        print(json.dumps(out, sort_keys=True, indent=None if args.canonical else 1))
        return EXIT_OK if ok else EXIT_VERIFY
    print(json.dumps(out, sort_keys=True, indent=None if args.canonical else 1))
    return EXIT_OK


def cmd_start(args) -> int:
    """Write the starting cube of order n."""
    if args.n % 2 or args.n < 2:
        raise CubeFileError("n must be even and at least 2")
    _emit(CubeFile("latin", starting_latin_cube(args.n // 2)), args.output, args.canonical)
    return EXIT_OK


# -- wiring ------------------------------------------------------------------------------


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cubeavoid", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def out_opts(sp):
        sp.add_argument("-o", "--output", help="output path (default stdout)")
        sp.add_argument("--canonical", action="store_true", help="byte-stable compact JSON")

    g = sub.add_parser("gen", help="generate a random (m,m,m,m)-cube")
    g.add_argument("-n", type=_positive, required=True)
    g.add_argument("-m", type=int, required=True)
    g.add_argument("--model", choices=MODELS, default="uniform")
    g.add_argument("--fill", type=float, help="fraction of cells given a forbidden set (uniform model)")
    g.add_argument("--seed", type=int)
    out_opts(g)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="find a Latin cube avoiding a forbidden cube")
    s.add_argument("input")
    s.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    s.add_argument("--params-json", help="JSON object overriding preset values")
    for name in ("alpha", "gamma", "kappa", "epsilon", "theta"):
        s.add_argument(f"--{name}", type=parse_exact, help="exact value, e.g. 1/4 or 6*2^-27")
    s.add_argument("--seed", type=int)
    s.add_argument("--restarts", type=_positive, default=10)
    s.add_argument("--max-attempts", type=_positive, default=100)
    s.add_argument("--jobs", type=_positive, default=1, help="parallel restarts")
    s.add_argument("--strict", action="store_true",
                   help="only build plans on isotopies meeting every sparsity condition")
    out_opts(s)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a Latin cube against a forbidden cube")
    v.add_argument("latin")
    v.add_argument("forbidden")
    v.set_defaults(func=cmd_verify)

    i = sub.add_parser("inspect", help="show structures of a starting cube or a solved cube")
    i.add_argument("latin")
    i.add_argument("--cell", type=_cell)
    i.add_argument("--what", default="blocks",
                   choices=("subcubes", "transversal", "half-transversal", "blocks", "catalog-counts", "properties"))
    i.add_argument("--sample", type=_positive, help="randomized property check with this many cells")
    i.add_argument("--canonical", action="store_true")
    i.set_defaults(func=cmd_inspect)

    st = sub.add_parser("start", help="write the starting cube of order n")
    st.add_argument("-n", type=_positive, required=True)
    out_opts(st)
    st.set_defaults(func=cmd_start)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CubeFileError, CubeError, ValueError) as exc:
        print(f"cubeavoid: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
