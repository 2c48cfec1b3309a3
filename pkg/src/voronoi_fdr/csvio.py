"""CSV readers and writers for p-vectors, reports, tessellations and studies.

Floats are written with ``repr`` so every table round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .errors import DuplicateId, EmptyInput, OutOfDomain, ParseError
from .geometry import PVector, Tessellation
from .periodicity import TimeCourse
from .pipeline import CombinedRecord

log = logging.getLogger(__name__)

RECORD_COLUMNS = ("id", "rank", "area", "T", "Z", "fdr", "leftFDR", "reject")
STUDY_COLUMNS = ("scheme", "method", "rho", "muA", "fdr", "fdr_se", "power", "power_se", "reps")
MISSING = "NA"


def fmt(x) -> str:
    if x is None:
        return MISSING
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return MISSING
    return repr(x)


def _open_text(path) -> TextIO:
    try:
        return open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def _data_lines(fh: TextIO):
    """Yield (line number, text) of non-comment, non-blank lines."""
    for lineno, line in enumerate(fh, start=1):
        if line.strip() and not line.lstrip().startswith("#"):
            yield lineno, line


def read_pvectors(path, dims: int = 2) -> list[PVector]:
    """Read ``id,p1,p2[,p3]``; errors name the offending line."""
    expected = ["id"] + [f"p{k}" for k in range(1, dims + 1)]
    with _open_text(path) as fh:
        lines = list(_data_lines(fh))
    if not lines:
        raise EmptyInput(f"{path}: no header")
    header_line, header = lines[0]
    cols = [c.strip() for c in next(csv.reader([header]))]
    if cols != expected:
        raise ParseError(f"{path}, line {header_line}: expected header {','.join(expected)}, got {','.join(cols)}")
    out: list[PVector] = []
    seen: dict[str, int] = {}
    for lineno, text in lines[1:]:
        row = [c.strip() for c in next(csv.reader([text]))]
        if len(row) != len(expected):
            raise ParseError(f"{path}, line {lineno}: expected {len(expected)} fields, got {len(row)}")
        gid = row[0]
        if not gid:
            raise ParseError(f"{path}, line {lineno}: empty id")
        try:
            coords = tuple(float(v) for v in row[1:])
        except ValueError:
            raise ParseError(f"{path}, line {lineno}: non-numeric p-value in {text.strip()!r}") from None
        if not all(0.0 <= c <= 1.0 for c in coords):
            raise OutOfDomain(f"{path}, line {lineno}: p-value outside [0, 1] in {text.strip()!r}")
        if gid in seen:
            raise DuplicateId(f"{path}, line {lineno}: id {gid!r} already used on line {seen[gid]}")
        seen[gid] = lineno
        out.append(PVector(gid, coords))
    if not out:
        raise EmptyInput(f"{path}: header only, no p-vectors")
    return out


def write_pvectors(pvectors: Iterable[PVector], fh: TextIO) -> None:
    pvectors = list(pvectors)
    dims = pvectors[0].dims
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["id"] + [f"p{k}" for k in range(1, dims + 1)])
    for p in pvectors:
        w.writerow([p.id] + [fmt(c) for c in p.coords])


def record_header(dims: int) -> list[str]:
    return ["id"] + [f"p{k}" for k in range(1, dims + 1)] + list(RECORD_COLUMNS[1:])


def write_records(records: Iterable[CombinedRecord], fh: TextIO, header: dict | None = None) -> None:
    """Per-hypothesis table, preceded by ``# key: value`` header lines."""
    records = list(records)
    dims = len(records[0].coords) if records else 2
    for key, value in (header or {}).items():
        fh.write(f"# {key}: {value}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(record_header(dims))
    for r in records:
        w.writerow([r.id] + [fmt(c) for c in r.coords]
                   + [fmt(r.rank), fmt(r.area), fmt(r.T), fmt(r.Z),
                      fmt(r.fdr), fmt(r.left_fdr), fmt(r.reject)])


def _opt_float(s: str):
    return None if s == MISSING else float(s)


def read_records(path) -> tuple[dict, list[CombinedRecord]]:
    header: dict[str, str] = {}
    with _open_text(path) as fh:
        text = fh.read()
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    if not body:
        raise EmptyInput(f"{path}: no table")
    reader = csv.DictReader(io.StringIO("\n".join(body)))
    dims = sum(1 for c in reader.fieldnames if c.startswith("p") and c[1:].isdigit())
    records = []
    try:
        for row in reader:
            reject = row["reject"]
            records.append(CombinedRecord(
                id=row["id"],
                coords=tuple(float(row[f"p{k}"]) for k in range(1, dims + 1)),
                rank=int(row["rank"]),
                area=float(row["area"]),
                T=float(row["T"]),
                Z=float(row["Z"]),
                fdr=_opt_float(row["fdr"]),
                left_fdr=_opt_float(row["leftFDR"]),
                reject=None if reject == MISSING else reject == "1",
            ))
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: malformed report table ({exc})") from None
    return header, records


def write_tessellation(t: Tessellation, ids, fh: TextIO) -> None:
    """One row per cell: id, area, vertex count and ``x y;x y;...`` polygon."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["id", "p1", "p2", "area", "n_vertices", "polygon"])
    for i, gid in enumerate(ids):
        poly = t.polygon(i)
        w.writerow([gid, fmt(t.points[i, 0]), fmt(t.points[i, 1]), fmt(t.areas[i]), len(poly),
                    ";".join(f"{fmt(x)} {fmt(y)}" for x, y in poly)])


def read_time_courses(path, spacing: float | None = None) -> tuple[list[TimeCourse], list[str]]:
    """Read ``id,t1,...,tn``; rows with missing cells are dropped.

    Returns the complete series and the ids that were skipped.
    """
    with _open_text(path) as fh:
        lines = list(_data_lines(fh))
    if not lines:
        raise EmptyInput(f"{path}: no header")
    header = next(csv.reader([lines[0][1]]))
    n = len(header) - 1
    series, skipped = [], []
    seen: set[str] = set()
    for lineno, text in lines[1:]:
        row = [c.strip() for c in next(csv.reader([text]))]
        if len(row) != n + 1:
            raise ParseError(f"{path}, line {lineno}: expected {n + 1} fields, got {len(row)}")
        gid = row[0]
        if gid in seen:
            raise DuplicateId(f"{path}, line {lineno}: duplicate id {gid!r}")
        seen.add(gid)
        if any(c in ("", "NA", "NaN", "nan") for c in row[1:]):
            skipped.append(gid)
            continue
        try:
            values = np.array([float(c) for c in row[1:]])
        except ValueError:
            raise ParseError(f"{path}, line {lineno}: non-numeric measurement") from None
        series.append(TimeCourse(gid, values, spacing))
    if skipped:
        log.warning("skipped %d series with missing measurements", len(skipped))
    if not series:
        raise EmptyInput(f"{path}: no complete series")
    return series, skipped


def write_gtest(rows: Iterable[tuple[str, float, float]], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["id", "g", "pvalue"])
    for gid, g, p in rows:
        w.writerow([gid, fmt(g), fmt(p)])


def write_study(rows, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(STUDY_COLUMNS)
    for r in rows:
        w.writerow([r.scheme, r.method, fmt(r.rho), fmt(r.mu_a), fmt(r.fdr), fmt(r.fdr_se),
                    fmt(r.power), fmt(r.power_se), fmt(r.reps)])
