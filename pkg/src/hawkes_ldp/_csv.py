import csv
import math
import sys
from contextlib import contextmanager


def fmt(value):
    """Shortest text for a CSV cell that reads back to the same value."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        text = float.__repr__(value)
        return text[:-2] if text.endswith(".0") else text
    return str(value)


@contextmanager
def _open(target):
    if target is None or target == "-":
        yield sys.stdout
    elif hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="", encoding="utf-8") as fh:
            yield fh


def write_csv(target, header, rows):
    """Write a headered CSV with LF line endings to a path, a file object, or stdout."""
    with _open(target) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
