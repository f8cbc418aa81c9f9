"""Gate files, JSON-lines run records and distribution outputs."""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterator

import numpy as np

from . import __version__
from .errors import GateFileInvalid, NotUnitary, ShapeUnknown
from .gates import SQRT_BRANCH, UnitaryGate, builtin, infer_shape
from .sampling import GENERATOR
from .states import BipartiteShape

__all__ = [
    "gate_to_dict",
    "dump_gate",
    "write_gate",
    "read_gate",
    "resolve_gate",
    "RunRecord",
    "amplitudes_dict",
    "append_record",
    "read_records",
    "DistributionReport",
    "write_histogram_csv",
]


def _g17(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("cannot serialize non-finite value")
    return f"{x:.17g}"


def _num(x: float):
    return float(x) if math.isfinite(x) else str(x)


def gate_to_dict(gate: UnitaryGate) -> dict:
    m, n = gate.shape if gate.shape is not None else (gate.dim, 1)
    return {
        "label": gate.label,
        "m": int(m),
        "n": int(n),
        "matrix": [[[z.real, z.imag] for z in row] for row in gate.matrix],
    }


def dump_gate(gate: UnitaryGate) -> str:
    """Gate file text; matrix entries are written with 17 significant digits."""
    d = gate_to_dict(gate)
    rows = ",".join(
        "[" + ",".join(f"[{_g17(re)},{_g17(im)}]" for re, im in row) + "]" for row in d["matrix"]
    )
    head = json.dumps({"label": d["label"], "m": d["m"], "n": d["n"]}, separators=(",", ":"))
    return head[:-1] + ',"matrix":[' + rows + "]}\n"


def write_gate(gate: UnitaryGate, path) -> None:
    Path(path).write_text(dump_gate(gate), encoding="utf-8")


def read_gate(path) -> UnitaryGate:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        label, m, n = str(obj["label"]), int(obj["m"]), int(obj["n"])
        rows = obj["matrix"]
        mat = np.array([[complex(float(re), float(im)) for re, im in row] for row in rows])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise GateFileInvalid(f"{path}: {exc}") from exc
    if mat.ndim != 2 or mat.shape != (m * n, m * n):
        raise GateFileInvalid(f"{path}: matrix shape {mat.shape} does not match m*n = {m * n}")
    shape = BipartiteShape(m, n) if m >= 2 and n >= 2 else None
    prov = {"expression": label, "sqrt_branch": None, "source": f"file:{os.fspath(path)}"}
    try:
        return UnitaryGate(mat, label, shape, prov)
    except NotUnitary:
        raise
    except ValueError as exc:
        raise GateFileInvalid(f"{path}: {exc}") from exc


def resolve_gate(spec: str, shape=None) -> UnitaryGate:
    """A builtin name or a path to a gate file, optionally reshaped."""
    gate = read_gate(spec) if os.path.exists(spec) else builtin(spec)
    if shape is not None or gate.shape is None:
        new_shape = infer_shape(gate.dim, shape)
        if new_shape is None:
            raise ShapeUnknown(f"{gate.label}: no default bipartite shape for dimension {gate.dim}")
        gate = gate.with_shape(new_shape)
    return gate


def _utc_now() -> str:
    return datetime.now(timezone.utc).replace(microsecond=0).isoformat().replace("+00:00", "Z")


@dataclass
class RunRecord:
    command: str
    gate_label: str
    shape: tuple[int, int]
    seed: int
    restarts: int
    evals_used: int
    verdict: str
    best_residual: float | None = None
    best_entanglement: float | None = None
    counterexample: dict | None = None  # {"re": [...], "im": [...]} of the flattened input
    column: int | None = None
    sqrt_branch: str | None = SQRT_BRANCH
    log_base: float = math.e
    config: dict = field(default_factory=dict)
    restart_log: list = field(default_factory=list)
    tool_version: str = __version__
    generator: str = GENERATOR
    timestamp: str = field(default_factory=_utc_now)

    def to_json(self) -> str:
        obj = {k: _encode(v) for k, v in self.__dict__.items()}
        return json.dumps(obj, separators=(",", ":"))

    @classmethod
    def from_dict(cls, obj: dict) -> "RunRecord":
        obj = dict(obj)
        obj["shape"] = tuple(obj["shape"])
        return cls(**obj)


def _encode(v: Any):
    if isinstance(v, float):
        return _num(v)
    if isinstance(v, (list, tuple)):
        return [_encode(x) for x in v]
    if isinstance(v, dict):
        return {k: _encode(x) for k, x in v.items()}
    if isinstance(v, np.generic):
        return _encode(v.item())
    return v


def amplitudes_dict(amps) -> dict:
    amps = np.asarray(amps, dtype=complex)
    return {"re": [float(x) for x in amps.real], "im": [float(x) for x in amps.imag]}


def append_record(path, record) -> None:
    """Append one JSON object per line and flush it to disk."""
    line = record.to_json() if hasattr(record, "to_json") else json.dumps(_encode(record), separators=(",", ":"))
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(line + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def read_records(path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


@dataclass
class DistributionReport:
    gate_label: str
    shape: tuple[int, int]
    sample_count: int
    log_base: float
    seed: int
    mean: float
    std_dev: float
    min: float
    max: float
    bin_edges: list[float]
    counts: list[int]

    @classmethod
    def from_samples(cls, values, *, gate_label, shape, log_base, seed, bins=60) -> "DistributionReport":
        values = np.asarray(values, dtype=float)
        top = math.log(min(shape)) / math.log(log_base)
        edges = np.linspace(0.0, top, bins + 1)
        # clip rounding overshoot of maximally entangled outputs into the last bin
        counts, _ = np.histogram(np.clip(values, 0.0, top), bins=edges)
        return cls(
            gate_label=gate_label,
            shape=tuple(shape),
            sample_count=int(values.size),
            log_base=float(log_base),
            seed=int(seed),
            mean=float(values.mean()),
            std_dev=float(values.std(ddof=1)) if values.size > 1 else 0.0,
            min=float(values.min()),
            max=float(values.max()),
            bin_edges=[float(e) for e in edges],
            counts=[int(c) for c in counts],
        )

    def summary(self) -> dict:
        keys = ("gate_label", "shape", "sample_count", "log_base", "seed", "mean", "std_dev", "min", "max")
        return {k: _encode(getattr(self, k)) for k in keys} | {"bins": len(self.counts)}

    def to_json(self) -> str:
        return json.dumps(self.summary(), separators=(",", ":"))


def write_histogram_csv(report: DistributionReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, c in zip(report.bin_edges[:-1], report.bin_edges[1:], report.counts):
            w.writerow([f"{lo:.17g}", f"{hi:.17g}", c])
