"""Versioned CSV / JSON-lines output and the matching readers.

CSV files start with a comment line ``# schema=persistwalk/1 key=value ...``
followed by a header row.  JSON output holds one object per line, each with a
``schema`` field.  Plot data files are gnuplot-friendly: ``#`` comments and
whitespace-separated columns.
"""
from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

SCHEMA = "persistwalk/1"

PathLike = Union[str, Path]


class SchemaError(ValueError):
    pass


def _plain(v):
    """JSON/CSV friendly scalar."""
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return v


def to_json_line(record: dict) -> str:
    rec = {"schema": SCHEMA}
    rec.update(_plain(record))
    return json.dumps(rec, sort_keys=False, separators=(", ", ": "))


def write_json(records: Iterable[dict], out: Union[PathLike, TextIO], append: bool = False) -> None:
    lines = [to_json_line(r) for r in records]
    if hasattr(out, "write"):
        for line in lines:
            out.write(line + "\n")
        return
    with open(out, "a" if append else "w") as fh:
        for line in lines:
            fh.write(line + "\n")


def read_json(path: PathLike) -> List[dict]:
    out = []
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("schema") != SCHEMA:
                raise SchemaError(f"{path}:{n}: unsupported schema {rec.get('schema')!r}")
            out.append(rec)
    return out


def write_csv(header: Sequence[str], rows: Iterable[Sequence], out: Union[PathLike, TextIO],
              meta: Optional[dict] = None) -> None:
    def emit(fh):
        tags = " ".join(f"{k}={_plain(v)}" for k, v in (meta or {}).items())
        fh.write(f"# schema={SCHEMA}" + (f" {tags}" if tags else "") + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if x is None else _plain(x) for x in r])

    if hasattr(out, "write"):
        emit(out)
    else:
        with open(out, "w", newline="") as fh:
            emit(fh)


def _convert(cell: str):
    if cell == "":
        return None
    for conv in (int, float):
        try:
            return conv(cell)
        except ValueError:
            pass
    if "/" in cell:
        try:
            return Fraction(cell)
        except (ValueError, ZeroDivisionError):
            pass
    if cell in ("True", "False"):
        return cell == "True"
    return cell


def read_csv(path: PathLike) -> Tuple[dict, List[str], List[list]]:
    """(meta, header, rows) with numbers and ``n/d`` rationals converted."""
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("#"):
            raise SchemaError(f"{path}: missing schema line")
        tags = dict(tok.split("=", 1) for tok in first.lstrip("# ").split() if "=" in tok)
        if tags.get("schema") != SCHEMA:
            raise SchemaError(f"{path}: unsupported schema {tags.get('schema')!r}")
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[_convert(c) for c in r] for r in reader if r]
    tags.pop("schema")
    return tags, header, rows


def write_plot_data(path: PathLike, x: Sequence, y: Sequence, comment: str = "") -> None:
    with open(path, "w") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        for a, b in zip(x, y):
            fh.write(f"{float(a):.17g} {float(b):.17g}\n")


def read_plot_data(path: PathLike) -> np.ndarray:
    return np.loadtxt(path, comments="#", ndmin=2)
