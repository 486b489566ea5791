"""File formats: matrix CSV dumps, counts CSV and fixed-precision JSON reports.

Matrix CSV
    Header ``block,row,<label_1>,...,<label_d>`` followed by ``d`` rows with
    ``block=real`` and ``d`` rows with ``block=imag``; the ``row`` column
    repeats the basis label. Values are written with ``repr`` so that reading
    a file back reproduces the matrix exactly.

Counts CSV
    Header ``setting_label,count,exposure``; one row per measurement
    setting. Labels are strings over {H,V,D,A,R,L}, one token per qubit.

Report JSON
    UTF-8, two-space indentation, keys in insertion order, every float
    rounded to 12 significant digits, non-finite floats as ``null``, and a
    trailing newline.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .tomography import CountRecord, setting_from_label


def basis_labels(n_qubits: int, alphabet: str = "HV") -> list[str]:
    import itertools

    return ["".join(t) for t in itertools.product(alphabet, repeat=n_qubits)]


def write_matrix_csv(path, matrix, labels: Sequence[str] | None = None) -> Path:
    m = np.asarray(matrix, dtype=complex)
    d = m.shape[0]
    if labels is None:
        labels = basis_labels(int(round(math.log2(d))))
    labels = list(labels)
    if len(labels) != d or m.shape != (d, d):
        raise ValueError("labels must match a square matrix")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["block", "row", *labels])
        for block, part in (("real", m.real), ("imag", m.imag)):
            for lab, row in zip(labels, part):
                w.writerow([block, lab, *(repr(float(x)) for x in row)])
    return path


def read_matrix_csv(path) -> tuple[np.ndarray, list[str]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    if header[:2] != ["block", "row"]:
        raise ValueError(f"{path}: not a matrix CSV (header {header[:2]})")
    labels = header[2:]
    d = len(labels)
    re = np.zeros((d, d))
    im = np.zeros((d, d))
    seen = {"real": 0, "imag": 0}
    for row in rows[1:]:
        if not row:
            continue
        block = row[0]
        target = re if block == "real" else im if block == "imag" else None
        if target is None:
            raise ValueError(f"{path}: unknown block {block!r}")
        target[seen[block]] = [float(x) for x in row[2:]]
        seen[block] += 1
    if seen["real"] != d or seen["imag"] != d:
        raise ValueError(f"{path}: expected {d} rows per block")
    return re + 1j * im, labels


def write_counts_csv(path, records: Sequence[CountRecord]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["setting_label", "count", "exposure"])
        for r in records:
            w.writerow([r.setting.label, _num(r.count), _num(r.exposure)])
    return path


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def read_counts_csv(path) -> list[CountRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"setting_label", "count", "exposure"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [
            CountRecord(setting_from_label(row["setting_label"].strip()), float(row["count"]), float(row["exposure"]))
            for row in reader
        ]


def _round(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)) and not isinstance(obj, np.integer):
        return obj
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round(v) for v in obj]
    if isinstance(obj, complex):
        return [_round(obj.real), _round(obj.imag)]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_report(report) -> str:
    return json.dumps(_round(report), indent=2, ensure_ascii=False) + "\n"


def write_report(path, report) -> Path:
    path = Path(path)
    path.write_text(dumps_report(report), encoding="utf-8")
    return path
