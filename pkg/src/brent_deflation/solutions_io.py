"""Solution files, report files and batch processing of solution directories.

Solution file (JSON, ``schema_version`` 1)::

    {
      "schema_version": 1,
      "field": "complex",
      "shape": {"m": 2, "n": 2, "p": 2, "r": 7},
      "alpha": [ r matrices m x n ],
      "beta":  [ r matrices n x p ],
      "gamma": [ r matrices p x m ],
      "metadata": {"label": "...", "source": "..."}
    }

A scalar is a JSON number (real) or a ``[re, im]`` pair.  The writer emits
the canonical form: integral reals as integers, other reals with the shortest
repr that round-trips a double, complex values as pairs.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .brent import BilinearScheme, BrentShape, brent_system, orbit_lower_bound, residual, underdetermined_bound
from .deflation import DeflationConfig, DeflationReport, deflation_sequence
from .errors import DeflationError, NotASolutionError, ParseError, SchemaError

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SCHEMA_DIR = Path(__file__).with_name("schemas")

__all__ = [
    "SCHEMA_VERSION",
    "ReportRecord",
    "BatchReport",
    "parse_solution",
    "loads_solution",
    "dumps_solution",
    "write_solution",
    "record_from_report",
    "batch_run",
    "report_to_json",
    "report_to_csv",
    "read_report_csv",
    "load_schema",
]


# -- scalars ----------------------------------------------------------------

def _real_token(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {v!r} cannot be serialized")
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(float(v))


def _scalar_token(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return _real_token(z.real)
    return f"[{_real_token(z.real)}, {_real_token(z.imag)}]"


def _parse_scalar(v, where: str) -> complex:
    if isinstance(v, bool):
        raise SchemaError(f"{where}: booleans are not scalars")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        return complex(v[0], v[1])
    raise SchemaError(f"{where}: expected a number or a [re, im] pair, got {v!r}")


# -- solution files ---------------------------------------------------------

def _parse_factor(doc: dict, name: str, expected: tuple[int, int, int]) -> np.ndarray:
    if name not in doc:
        raise SchemaError(f"missing factor {name!r}")
    data = doc[name]
    r, rows, cols = expected
    if not isinstance(data, list) or len(data) != r:
        got = len(data) if isinstance(data, list) else type(data).__name__
        raise SchemaError(f"factor {name}: expected {r} matrices, got {got}")
    out = np.empty(expected, dtype=complex)
    for t, mat in enumerate(data):
        if not isinstance(mat, list) or len(mat) != rows:
            raise SchemaError(f"factor {name}[{t}]: expected {rows} rows")
        for i, row in enumerate(mat):
            if not isinstance(row, list) or len(row) != cols:
                got = len(row) if isinstance(row, list) else type(row).__name__
                raise SchemaError(f"factor {name}[{t}][{i}]: expected {cols} entries, got {got}")
            for j, v in enumerate(row):
                out[t, i, j] = _parse_scalar(v, f"factor {name}[{t}][{i}][{j}]")
    return out


def _shape_from(doc: dict) -> BrentShape:
    raw = doc.get("shape")
    if isinstance(raw, str):
        return BrentShape.parse(raw)
    if not isinstance(raw, dict):
        raise SchemaError("field 'shape' must be an object with m, n, p, r")
    try:
        return BrentShape(*(raw[k] for k in ("m", "n", "p", "r")))
    except KeyError as exc:
        raise SchemaError(f"shape is missing {exc.args[0]!r}") from exc
    except DeflationError as exc:
        raise SchemaError(f"shape: {exc}") from exc


def loads_solution(text: str, source: str = "<string>") -> tuple[BilinearScheme, dict]:
    """Parse solution JSON; returns ``(scheme, metadata)``.  The residual is not checked."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{source}: top level must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{source}: unsupported schema_version {version!r}")
    if doc.get("field", "complex") != "complex":
        raise SchemaError(f"{source}: field must be 'complex', got {doc.get('field')!r}")
    try:
        shape = _shape_from(doc)
        factors = {name: _parse_factor(doc, name, dims) for name, dims in shape.factor_shapes.items()}
    except SchemaError as exc:
        raise SchemaError(f"{source}: {exc}") from exc
    meta = doc.get("metadata") or {}
    if not isinstance(meta, dict):
        raise SchemaError(f"{source}: metadata must be an object")
    return BilinearScheme(shape, **factors), meta


def parse_solution(path, with_metadata: bool = False):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    scheme, meta = loads_solution(text, str(path))
    return (scheme, meta) if with_metadata else scheme


def dumps_solution(scheme: BilinearScheme, metadata: dict | None = None) -> str:
    s = scheme.shape
    lines = [
        "{",
        f'  "schema_version": {SCHEMA_VERSION},',
        '  "field": "complex",',
        f'  "shape": {{"m": {s.m}, "n": {s.n}, "p": {s.p}, "r": {s.r}}},',
    ]
    for name in ("alpha", "beta", "gamma"):
        arr = getattr(scheme, name)
        mats = []
        for mat in arr:
            rows = ", ".join("[" + ", ".join(_scalar_token(z) for z in row) + "]" for row in mat)
            mats.append(f"    [{rows}]")
        lines.append(f'  "{name}": [\n' + ",\n".join(mats) + "\n  ],")
    meta = json.dumps(metadata or {}, sort_keys=True, ensure_ascii=False)
    lines.append(f'  "metadata": {meta}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_solution(path, scheme: BilinearScheme, metadata: dict | None = None) -> Path:
    path = Path(path)
    path.write_text(dumps_solution(scheme, metadata), encoding="utf-8")
    return path


def load_schema(name: str) -> dict:
    """Load a shipped JSON schema (``solution`` or ``report``)."""
    return json.loads((SCHEMA_DIR / f"{name}.schema.json").read_text(encoding="utf-8"))


# -- reports ----------------------------------------------------------------

@dataclass
class ReportRecord:
    label: str
    shape: str | None
    status: str
    sequence: list[int] = field(default_factory=list)
    orbit_lower_bound: int | None = None
    underdetermined_bound: int | None = None
    gap: int | None = None
    residual: float | None = None
    borderline: list[bool] = field(default_factory=list)
    seed: int | None = None
    timings: list[float] = field(default_factory=list)
    error: str | None = None
    source: str | None = None


FIELDS = [f for f in ReportRecord.__dataclass_fields__]
_LIST_FIELDS = {"sequence": int, "borderline": bool, "timings": float}
_INT_FIELDS = {"orbit_lower_bound", "underdetermined_bound", "gap", "seed"}


def record_from_report(label: str, report: DeflationReport, shape: BrentShape | None = None,
                       residual_value: float | None = None, source: str | None = None) -> ReportRecord:
    rec = ReportRecord(
        label=label,
        shape=str(shape) if shape else None,
        status="ok" if report.complete else "incomplete",
        sequence=[int(v) for v in report.sequence],
        residual=float(report.point_residual if residual_value is None else residual_value),
        borderline=[bool(b) for b in report.borderline],
        seed=int(report.seed),
        timings=[float(t) for t in report.wall_times],
        error=report.error,
        source=source,
    )
    if shape is not None:
        rec.orbit_lower_bound = orbit_lower_bound(shape)
        rec.underdetermined_bound = underdetermined_bound(shape)
        if rec.sequence:
            rec.gap = rec.sequence[-1] - rec.orbit_lower_bound
    return rec


@dataclass
class BatchReport:
    records: list[ReportRecord] = field(default_factory=list)
    histogram: dict[str, dict[str, int]] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)

    def sequences(self) -> dict[str, list[int]]:
        return {r.label: r.sequence for r in self.records}


def drop_histogram(records: list[ReportRecord], steps: int = 3) -> dict[str, dict[str, int]]:
    """Counts of ``d_k = n_{k-1} - n_k`` per value; negative values are monotonicity errors."""
    hist: dict[str, dict[str, int]] = {}
    for k in range(1, steps + 1):
        counts: dict[int, int] = {}
        for rec in records:
            if len(rec.sequence) > k:
                dk = rec.sequence[k - 1] - rec.sequence[k]
                counts[dk] = counts.get(dk, 0) + 1
        hist[f"d{k}"] = {str(v): counts[v] for v in sorted(counts)}
    return hist


def _process_file(args) -> ReportRecord:
    path, label, cfg = args
    try:
        scheme = parse_solution(path)
    except DeflationError as exc:
        return ReportRecord(label=label, shape=None, status="parse_error", error=str(exc),
                            seed=int(cfg.rng_seed), source=str(path))
    res = residual(scheme)
    try:
        report = deflation_sequence(brent_system(scheme.shape), scheme.flatten(), cfg)
    except NotASolutionError as exc:
        return ReportRecord(label=label, shape=str(scheme.shape), status="not_a_solution",
                            residual=res, error=str(exc), seed=int(cfg.rng_seed), source=str(path),
                            orbit_lower_bound=orbit_lower_bound(scheme.shape),
                            underdetermined_bound=underdetermined_bound(scheme.shape))
    except Exception as exc:  # a batch never aborts on one file
        log.exception("deflation failed for %s", path)
        return ReportRecord(label=label, shape=str(scheme.shape), status="error", residual=res,
                            error=f"{type(exc).__name__}: {exc}", seed=int(cfg.rng_seed), source=str(path))
    return record_from_report(label, report, scheme.shape, res, str(path))


def _label_for(path: Path) -> str:
    try:
        meta = json.loads(path.read_text(encoding="utf-8")).get("metadata") or {}
        label = meta.get("label")
    except (OSError, ValueError, AttributeError):
        label = None
    return str(label) if label else path.stem


def derive_seeds(base: int, count: int) -> list[int]:
    """Independent 64-bit seeds for ``count`` runs, stable in ``base``."""
    children = np.random.SeedSequence(int(base)).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def batch_run(directory, cfg: DeflationConfig | None = None, *, shared_borders: bool = False,
              workers: int | None = None, pattern: str = "*.json") -> BatchReport:
    """Deflate every solution file in ``directory``.

    Each file gets its own border seed derived from ``cfg.rng_seed`` unless
    ``shared_borders`` is set.  Records are sorted by label.
    """
    cfg = cfg or DeflationConfig()
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError(f"{directory}: not a directory")
    files = sorted(directory.glob(pattern))
    labelled = sorted(((_label_for(p), p) for p in files), key=lambda lp: (lp[0], lp[1].name))
    seeds = [cfg.rng_seed] * len(labelled) if shared_borders else derive_seeds(cfg.rng_seed, len(labelled))
    jobs = [(p, label, _with_seed(cfg, s)) for (label, p), s in zip(labelled, seeds)]
    workers = workers or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            records = list(pool.map(_process_file, jobs))
    else:
        records = [_process_file(j) for j in jobs]
    config = asdict(cfg) | {"shared_borders": shared_borders}
    return BatchReport(records, drop_histogram(records, cfg.max_steps), config)


def _with_seed(cfg: DeflationConfig, seed: int) -> DeflationConfig:
    return DeflationConfig(**(asdict(cfg) | {"rng_seed": int(seed)}))


def report_to_json(report: BatchReport | list[ReportRecord]) -> str:
    if isinstance(report, BatchReport):
        doc = {
            "schema_version": SCHEMA_VERSION,
            "records": [asdict(r) for r in report.records],
            "histogram": report.histogram,
            "config": report.config,
        }
    else:
        doc = {"schema_version": SCHEMA_VERSION, "records": [asdict(r) for r in report], "histogram": {}, "config": {}}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _csv_cell(name: str, value) -> str:
    if value is None:
        return ""
    if name in _LIST_FIELDS:
        return ";".join(("true" if v else "false") if isinstance(v, bool) else repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_to_csv(report: BatchReport | list[ReportRecord]) -> str:
    records = report.records if isinstance(report, BatchReport) else report
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIELDS)
    for rec in records:
        writer.writerow([_csv_cell(name, getattr(rec, name)) for name in FIELDS])
    return buf.getvalue()


def _csv_value(name: str, cell: str):
    if name in _LIST_FIELDS:
        if cell == "":
            return []
        conv = _LIST_FIELDS[name]
        if conv is bool:
            return [c == "true" for c in cell.split(";")]
        return [conv(c) for c in cell.split(";")]
    if cell == "":
        return None
    if name in _INT_FIELDS:
        return int(cell)
    if name == "residual":
        return float(cell)
    return cell


def read_report_csv(text: str) -> list[dict]:
    """Inverse of :func:`report_to_csv`, returning plain dicts like the JSON records."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        return []
    header = rows[0]
    if header != FIELDS:
        raise SchemaError(f"unexpected CSV header {header}")
    return [{name: _csv_value(name, cell) for name, cell in zip(header, row)} for row in rows[1:]]
