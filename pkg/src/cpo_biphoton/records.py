"""CSV/JSON emission with embedded parameter echo."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SIG_DIGITS = 9


def fmt(x) -> str:
    return format(float(x), f".{SIG_DIGITS}g")


def run_id(echo_lines) -> str:
    return hashlib.sha256("\n".join(echo_lines).encode()).hexdigest()[:12]


def jsonable(obj):
    """Round floats to 9 significant digits; map non-finite values to strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(fmt(x))
    if isinstance(obj, complex):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    if hasattr(obj, "value"):  # enums
        return obj.value
    return obj


@dataclass
class CurveRecord:
    name: str
    echo: list
    columns: dict  # column name -> 1-D array, all the same length
    provenance: dict = field(default_factory=dict)

    @property
    def run_id(self) -> str:
        return run_id(self.echo)

    def write_csv(self, path) -> Path:
        path = Path(path)
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) != 1:
            raise ValueError(f"columns of {self.name} have unequal lengths {sorted(lengths)}")
        lines = [f"#@ record = {self.name}", f"#@ run_id = {self.run_id}"]
        lines += [f"# {line}" for line in self.echo]
        lines.append("#@ provenance = " + json.dumps(jsonable(self.provenance), sort_keys=True))
        names = list(self.columns)
        lines.append(",".join(names))
        data = [np.asarray(self.columns[n], dtype=float) for n in names]
        for row in zip(*data):
            lines.append(",".join(fmt(v) for v in row))
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        return path


def write_json(path, name: str, echo: list, payload: dict) -> Path:
    from .config import parse_text

    doc = {
        "record": name,
        "run_id": run_id(echo),
        "echo": parse_text("\n".join(echo)),
        **payload,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(jsonable(doc), indent=2) + "\n")
    return path


def read_csv(path) -> dict:
    """Columns of an emitted CSV as float arrays."""
    rows = [line for line in Path(path).read_text().splitlines() if not line.startswith("#")]
    header = rows[0].split(",")
    data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]], dtype=float)
    return {name: data[:, i] for i, name in enumerate(header)}
