"""Serialization helpers shared by reports and the CLI."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import numpy as np

from ..codes import format_digits

SCHEMA = "prodexp/1"


def fraction_str(value) -> str | None:
    """Rationals always serialize as ``"num/den"``, integers included."""
    if value is None:
        return None
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def word_str(x, q: int) -> str:
    """``n_1 x ... x n_m:`` followed by the flattened symbols."""
    x = np.asarray(x)
    return "x".join(str(s) for s in x.shape) + ":" + format_digits(x.reshape(-1), q)


def _default(obj):
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(doc: dict) -> str:
    return json.dumps({"schema": SCHEMA, **doc}, sort_keys=True, indent=2, default=_default) + "\n"


def _flatten(prefix: str, value, out: dict):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else k, value[k], out)
    elif isinstance(value, (list, tuple)) and not any(isinstance(v, (dict, list)) for v in value):
        out[prefix] = " ".join(str(_scalar(v)) for v in value)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out[prefix] = _scalar(value)


def _scalar(v):
    if isinstance(v, Fraction):
        return fraction_str(v)
    if isinstance(v, np.generic):
        return v.item()
    return "" if v is None else v


def to_csv(rows: list[dict]) -> str:
    """One CSV row per record, with nested keys joined by dots."""
    flat = []
    for r in rows:
        out: dict = {}
        _flatten("", r, out)
        flat.append(out)
    header = sorted({k for r in flat for k in r})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    writer.writerows(flat)
    return buf.getvalue()
