"""Self-describing output records and their CSV / JSON-lines / table renderings."""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Sequence

import numpy as np

from ..exact import INDICATOR_FIELDS, PerformanceIndicators
from ..model import ModelParams

INPUT_FIELDS = ("lambda", "mu", "servers", "abandon", "eps", "tau")


def input_echo(params: ModelParams) -> dict:
    return {
        "lambda": params.lam,
        "mu": params.mu,
        "servers": params.s,
        "abandon": str(params.abandon),
        "eps": params.cbc.eps,
        "tau": params.cbc.tau,
    }


def indicator_record(params: ModelParams, method: str, ind: PerformanceIndicators,
                     regime: str | None = None, half_widths: dict | None = None) -> dict:
    rec = input_echo(params)
    rec["method"] = method
    rec.update(ind.as_dict())
    rec["regime"] = regime
    for name, hw in (half_widths or {}).items():
        rec[f"ci_{name}"] = hw
    return rec


def _columns(records: Sequence[dict], preferred: Sequence[str] | None) -> list[str]:
    cols = list(preferred or [])
    for rec in records:
        for key in rec:
            if key not in cols:
                cols.append(key)
    return cols


def _finite(v):
    return v is not None and not (isinstance(v, float) and not math.isfinite(v))


def _text(v, digits: int | None) -> str:
    if isinstance(v, np.generic):
        v = v.item()
    if not _finite(v):
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        # shortest round-trip form for machine output, fixed digits for tables
        return repr(v) if digits is None else format(v, f".{digits}g")
    return str(v)


def _json_value(v):
    if isinstance(v, np.generic):
        v = v.item()
    return v if _finite(v) else None


def render(records: Iterable[dict], fmt: str = "csv", notes: Sequence[str] = (),
           columns: Sequence[str] | None = None) -> str:
    """Render records; ``notes`` become ``#`` comment lines in CSV and a table."""
    records = list(records)
    cols = _columns(records, columns)
    out = io.StringIO()
    if fmt == "json":
        for rec in records:
            out.write(json.dumps({k: _json_value(rec.get(k)) for k in cols}) + "\n")
        return out.getvalue()
    for note in notes:
        out.write(f"# {note}\n")
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        if cols:
            writer.writerow(cols)
        for rec in records:
            writer.writerow([_text(rec.get(k), None) for k in cols])
        return out.getvalue()
    if fmt == "table":
        cells = [cols] + [[_text(rec.get(k), 6) for k in cols] for rec in records]
        widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
        for row in cells:
            out.write("  ".join(v.rjust(w) for v, w in zip(row, widths)).rstrip() + "\n")
        return out.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


INDICATOR_COLUMNS = list(INPUT_FIELDS) + ["method"] + list(INDICATOR_FIELDS) + ["regime"]
