"""Number formatting and CSV helpers for result files."""

from __future__ import annotations

import csv
import io
import math
from fractions import Fraction


def fmt_number(x) -> str:
    """Shortest exact text for a number.

    Floats use their shortest round-trip repr (``16.0`` prints as ``16``);
    a fraction prints as a float when it is exactly one, else as ``a/b``.
    """
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        f = float(x)
        if math.isfinite(f) and Fraction(f) == x:
            return fmt_number(f)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, complex):
        sign = "-" if math.copysign(1.0, x.imag) < 0 else "+"
        return f"{fmt_number(x.real)}{sign}{fmt_number(abs(x.imag))}i"
    if x is None:
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    text = repr(x)
    if text.endswith(".0"):
        text = text[:-2]
    if text == "-0":
        text = "0"
    return text


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt_number(v) for v in row])
    return buf.getvalue()


def jsonable(x):
    """Convert results to JSON-safe values (exact numbers become strings)."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return x if math.isfinite(x) else fmt_number(x)
    return fmt_number(x)
