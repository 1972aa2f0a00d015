"""CSV and manifest writers.

CSV follows RFC 4180 (CRLF line ends, header row, '.' decimal).  Floats
are written with ``repr`` so reruns are byte-identical.
"""

import csv
import hashlib
import io
import json
import os

import numpy as np

LONG_HEADER = ("axis1", "axis2", "value", "uncertainty")

MANIFEST_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["version", "experiment", "config", "constants_hash", "wall_time_s", "seed", "files"],
    "properties": {
        "version": {"type": "string"},
        "experiment": {"type": "string"},
        "config": {"type": "object"},
        "constants_hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "wall_time_s": {"type": "number", "minimum": 0},
        "seed": {"type": "integer"},
        "axes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "unit", "size"],
                "properties": {"name": {"type": "string"}, "unit": {"type": "string"},
                               "size": {"type": "integer", "minimum": 1}},
            },
        },
        "files": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["path", "sha256", "rows"],
                "properties": {"path": {"type": "string"}, "sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
                               "rows": {"type": "integer", "minimum": 0}, "columns": {"type": "array"}},
            },
        },
        "results": {"type": "object"},
    },
    "additionalProperties": False,
}


def format_cell(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def csv_text(rows, header=LONG_HEADER):
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_cell(x) for x in row])
    return buf.getvalue()


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class OutputWriter:
    """Collects output files in memory and writes them all at the end.

    Keeping writes in one place means a failed run leaves no half-written
    result set behind.
    """

    def __init__(self, directory):
        self.directory = directory
        self._files = []

    def add_csv(self, name, rows, header=LONG_HEADER):
        rows = list(rows)
        self._files.append((name, csv_text(rows, header), len(rows), list(header)))

    def add_json(self, name, obj):
        self._files.append((name, json.dumps(obj, indent=2, sort_keys=True) + "\n", 1, None))

    def flush(self):
        os.makedirs(self.directory, exist_ok=True)
        entries = []
        for name, text, n_rows, cols in self._files:
            path = os.path.join(self.directory, name)
            with open(path, "w", newline="", encoding="utf-8") as fh:
                fh.write(text)
            entry = {"path": name, "sha256": sha256_file(path), "rows": n_rows}
            if cols:
                entry["columns"] = cols
            entries.append(entry)
        return entries


def write_manifest(directory, manifest, name="manifest.json"):
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, allow_nan=False, default=str)
        fh.write("\n")
    return path


def read_xy_csv(path, x=None, y=None):
    """Two numeric columns as float arrays.

    With a header row, ``x`` and ``y`` select columns by name (default: the
    first two).  Headerless files use the first two columns.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: empty file")
    try:
        [float(c) for c in rows[0][:2]]
        header = None
    except ValueError:
        header, rows = rows[0], rows[1:]
    ix, iy = 0, 1
    if x is not None or y is not None:
        if header is None:
            raise ValueError(f"{path}: column names given but the file has no header")
        try:
            ix = header.index(x) if x is not None else 0
            iy = header.index(y) if y is not None else 1
        except ValueError:
            raise ValueError(f"{path}: columns {x!r}/{y!r} not in header {header}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.array([[float(r[ix]), float(r[iy])] for r in rows])
    return data[:, 0], data[:, 1]
