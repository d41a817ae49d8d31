"""CSV dumps with a schema header and exact float round-trip."""

import csv
import math
import numbers
from pathlib import Path

__all__ = ["write_csv", "read_csv", "fmt"]


def fmt(value):
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    if isinstance(value, numbers.Integral):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    return repr(v)


def write_csv(path, columns, rows):
    """Write ``rows`` under a header line naming ``columns``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} fields, schema has {len(columns)}")
            w.writerow([fmt(v) for v in row])
    return path


def _parse(cell):
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError:
        return cell


def read_csv(path):
    """Return ``(columns, rows)``; numeric cells come back as floats."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        columns = next(r)
        rows = [[_parse(c) for c in row] for row in r]
    return columns, rows
