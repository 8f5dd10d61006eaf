"""Command-line front end.

Exit codes::

    0   success
    2   the point / scheme is not a solution (residual above tolerance)
    3   numerical failure (SVD, border or bordered-solve failure)
    4   unreadable or malformed input file
    64  usage error (bad flags, unknown fixture, malformed shape)

stdout carries data, stderr carries progress and diagnostics.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import fixtures
from .brent import BrentShape, brent_system, natural_algorithm, orbit_lower_bound, residual, underdetermined_bound
from .deflation import DeflationConfig, deflation_sequence
from .errors import DeflationError, InputError, NotASolutionError, NumericalError, ParseError
from .polysys import parse_system
from .solutions_io import (
    BatchReport,
    ReportRecord,
    batch_run,
    parse_solution,
    record_from_report,
    report_to_csv,
    report_to_json,
    write_solution,
)

EXIT_OK = 0
EXIT_NOT_A_SOLUTION = 2
EXIT_NUMERICAL = 3
EXIT_INPUT = 4
EXIT_USAGE = 64

log = logging.getLogger("brent_deflation")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(value) -> int:
    try:
        seed = int(value, 0) if isinstance(value, str) else int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid seed {value!r}") from exc
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return seed


def _positive_float(value) -> float:
    v = float(value)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg_int(value) -> int:
    v = int(value)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--steps", type=_nonneg_int, default=3, help="deflation steps (default 3)")
    common.add_argument("--seed", type=_seed, default=None,
                        help="border RNG seed (default: $DEFLATE_SEED, else 0)")
    common.add_argument("--rank-tol", type=_positive_float, default=DeflationConfig.rank_rel_tol,
                        help="relative rank tolerance (default %(default)g)")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="brent-deflation", description="Deflation sequences for polynomial systems and Brent equations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ex = sub.add_parser("examples", parents=[common], help="run a built-in fixture")
    ex.add_argument("name", nargs="?", help="cusp | whitney | strassen | natural:MxNxP")
    ex.add_argument("--system", type=Path, help="text file, one polynomial per line in x1..xn")
    ex.add_argument("--point", action="append", default=[],
                    help="comma separated coordinates (complex allowed, e.g. 1+2j); repeatable")

    gn = sub.add_parser("gen-natural", help="write the natural algorithm N(m,n,p) as a solution file")
    gn.add_argument("shape", help="MxNxP")
    gn.add_argument("--out", type=Path, default=None)

    ve = sub.add_parser("verify", help="print the residual of a solution file")
    ve.add_argument("solution", help="solution file or builtin:strassen / builtin:natural:MxNxP")
    ve.add_argument("--tol", type=_positive_float, default=DeflationConfig.solution_tol)
    ve.add_argument("--format", choices=("json", "text"), default="text")

    de = sub.add_parser("deflate", parents=[common], help="deflation sequence of one solution file")
    de.add_argument("solution", help="solution file or builtin:strassen / builtin:natural:MxNxP")

    bo = sub.add_parser("bound", help="orbit and dimension-count lower bounds for a shape")
    bo.add_argument("shape", help="MxNxP:R")
    bo.add_argument("--format", choices=("json", "text"), default="text")

    ba = sub.add_parser("batch", parents=[common], help="deflate every *.json solution in a directory")
    ba.add_argument("directory", type=Path)
    ba.add_argument("--shared-borders", action="store_true",
                    help="use the same border seed for every file")
    ba.add_argument("--workers", type=_nonneg_int, default=None, help="worker processes (default: CPU count)")
    return p


def _config(args) -> DeflationConfig:
    seed = args.seed
    if seed is None:
        env = os.environ.get("DEFLATE_SEED")
        try:
            seed = _seed(env) if env else 0
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"DEFLATE_SEED: {exc}") from exc
    return DeflationConfig(max_steps=args.steps, rng_seed=seed, rank_rel_tol=args.rank_tol)


def _progress(label):
    def report(level, rr):
        print(f"[{label}] level {level}: {rr.shape[0]}x{rr.shape[1]} nullity {rr.nullity} "
              f"(gap ratio {rr.gap_ratio:.2e})", file=sys.stderr, flush=True)
    return report


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([complex(tok.strip().replace("i", "j")) for tok in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"malformed point {text!r}") from exc


def _fmt_seq(seq) -> str:
    return "(" + ", ".join(str(v) for v in seq) + ")"


def render_text(records: list[ReportRecord], histogram: dict | None = None) -> str:
    lines = []
    for r in records:
        parts = [f"{r.label}: {r.status}"]
        if r.sequence:
            parts.append(f"sequence {_fmt_seq(r.sequence)}")
        if r.shape:
            parts.append(f"shape {r.shape}")
        if r.orbit_lower_bound is not None:
            parts.append(f"orbit bound {r.orbit_lower_bound} (finite stabilizer assumed)")
        if r.gap is not None:
            parts.append(f"gap {r.gap}")
        if r.residual is not None:
            parts.append(f"residual {r.residual:.3g}")
        if any(r.borderline):
            parts.append("BORDERLINE rank cut at levels " + ",".join(str(i) for i, b in enumerate(r.borderline) if b))
        if r.seed is not None:
            parts.append(f"seed {r.seed}")
        if r.error:
            parts.append(f"error: {r.error}")
        lines.append("  ".join(parts))
    if histogram:
        for key, counts in histogram.items():
            body = ", ".join(f"{v}: {c}" for v, c in counts.items()) or "-"
            lines.append(f"{key} = n_{int(key[1:]) - 1} - n_{key[1:]}: {body}")
    return "\n".join(lines) + "\n"


def _emit(args, records, histogram=None, config=None):
    if args.format == "json":
        text = report_to_json(BatchReport(records, histogram or {}, config or {}))
    elif args.format == "csv":
        text = report_to_csv(records)
    else:
        text = render_text(records, histogram)
    if getattr(args, "out", None):
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_scheme(ref: str):
    if ref.startswith("builtin:"):
        try:
            return fixtures.builtin_scheme(ref[len("builtin:"):])
        except (KeyError, ValueError, InputError) as exc:
            raise UsageError(f"unknown builtin {ref!r}; use builtin:strassen or builtin:natural:MxNxP") from exc
    return parse_solution(ref, with_metadata=True)


def _run_scheme(label, scheme, cfg, source=None) -> ReportRecord:
    report = deflation_sequence(brent_system(scheme.shape), scheme.flatten(), cfg, progress=_progress(label))
    if not report.complete:
        raise NumericalError(report.error or "deflation incomplete")
    return record_from_report(label, report, scheme.shape, residual(scheme), source)


def _run_poly(label, system, point, cfg) -> ReportRecord:
    report = deflation_sequence(system, point, cfg, progress=_progress(label))
    if not report.complete:
        raise NumericalError(report.error or "deflation incomplete")
    return record_from_report(label, report)


def _point_label(name, pt) -> str:
    coords = ", ".join(f"{c.real:g}" if complex(c).imag == 0 else f"{complex(c):g}" for c in pt)
    return f"{name} at ({coords})"


def cmd_examples(args) -> int:
    cfg = _config(args)
    name = args.name
    records = []
    if args.system is not None:
        try:
            system = parse_system(args.system.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ParseError(f"{args.system}: {exc.strerror or exc}") from exc
        if not args.point:
            raise UsageError("--system needs at least one --point")
        for text in args.point:
            pt = _parse_point(text)
            records.append(_run_poly(_point_label(args.system.stem, pt), system, pt, cfg))
    elif name == "cusp":
        for pt in fixtures.CUSP_POINTS:
            records.append(_run_poly(_point_label("cusp", pt), fixtures.cusp(), pt, cfg))
    elif name == "whitney":
        for pt in fixtures.WHITNEY_POINTS:
            records.append(_run_poly(_point_label("whitney", pt), fixtures.whitney(), pt, cfg))
    elif name == "strassen" or (name or "").startswith("natural:"):
        try:
            scheme, meta = fixtures.builtin_scheme(name)
        except (ValueError, InputError) as exc:
            raise UsageError(f"malformed fixture {name!r}: expected natural:MxNxP") from exc
        records.append(_run_scheme(meta["label"], scheme, cfg))
    else:
        raise UsageError(f"unknown fixture {name!r}; choose from cusp, whitney, strassen, natural:MxNxP "
                         "or pass --system FILE --point ...")
    _emit(args, records)
    return EXIT_OK


def cmd_gen_natural(args) -> int:
    try:
        m, n, p = fixtures.parse_natural(args.shape)
    except (ValueError, InputError) as exc:
        raise UsageError(f"malformed shape {args.shape!r}; expected MxNxP") from exc
    scheme = natural_algorithm(m, n, p)
    meta = {"label": f"N({m},{n},{p})", "source": "natural algorithm"}
    out = args.out or Path(f"natural_{m}x{n}x{p}.json")
    write_solution(out, scheme, meta)
    print(out)
    return EXIT_OK


def cmd_verify(args) -> int:
    scheme, meta = _load_scheme(args.solution)
    res = residual(scheme)
    ok = res <= args.tol
    if args.format == "json":
        print(json.dumps({"label": meta.get("label", args.solution), "shape": str(scheme.shape),
                          "residual": res, "tolerance": args.tol, "is_solution": ok}))
    else:
        print(f"{meta.get('label', args.solution)}: shape {scheme.shape}  residual {res:.3e}  "
              f"{'OK' if ok else 'NOT A SOLUTION'} (tol {args.tol:g})")
    return EXIT_OK if ok else EXIT_NOT_A_SOLUTION


def cmd_deflate(args) -> int:
    cfg = _config(args)
    scheme, meta = _load_scheme(args.solution)
    label = meta.get("label") or Path(args.solution).stem
    res = residual(scheme)
    if not res <= cfg.solution_tol:
        raise NotASolutionError(f"{label}: residual {res:.3e} exceeds {cfg.solution_tol:g}", residual=res)
    source = None if args.solution.startswith("builtin:") else args.solution
    _emit(args, [_run_scheme(label, scheme, cfg, source)], config=asdict(cfg))
    return EXIT_OK


def cmd_bound(args) -> int:
    try:
        shape = BrentShape.parse(args.shape)
    except InputError as exc:
        raise UsageError(str(exc)) from exc
    doc = {
        "shape": str(shape),
        "orbit_lower_bound": orbit_lower_bound(shape),
        "underdetermined_bound": underdetermined_bound(shape),
        "n_vars": shape.n_vars,
        "n_eqs": shape.n_eqs,
        "orbit_bound_assumes_finite_stabilizer": True,
    }
    if args.format == "json":
        print(json.dumps(doc))
    else:
        print(f"shape {shape}: {shape.n_vars} variables, {shape.n_eqs} equations")
        print(f"orbit lower bound m^2+n^2+p^2+2r-3 = {doc['orbit_lower_bound']} (valid if the stabilizer is finite)")
        print(f"underdetermined bound max(vars - eqs, 0) = {doc['underdetermined_bound']}")
    return EXIT_OK


def cmd_batch(args) -> int:
    cfg = _config(args)
    report = batch_run(args.directory, cfg, shared_borders=args.shared_borders, workers=args.workers)
    _emit(args, report.records, report.histogram, report.config)
    return EXIT_OK


COMMANDS = {
    "examples": cmd_examples,
    "gen-natural": cmd_gen_natural,
    "verify": cmd_verify,
    "deflate": cmd_deflate,
    "bound": cmd_bound,
    "batch": cmd_batch,
}


def _fail(args, code: int, exc: Exception) -> int:
    if getattr(args, "format", None) == "json":
        doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        if getattr(exc, "residual", None) is not None:
            doc["residual"] = exc.residual
        print(json.dumps(doc))
    print(f"error: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _fail(args, EXIT_USAGE, exc)
    except NotASolutionError as exc:
        return _fail(args, EXIT_NOT_A_SOLUTION, exc)
    except ParseError as exc:
        return _fail(args, EXIT_INPUT, exc)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        return _fail(args, EXIT_NUMERICAL, exc)
    except DeflationError as exc:
        return _fail(args, EXIT_INPUT, exc)


if __name__ == "__main__":
    sys.exit(main())
