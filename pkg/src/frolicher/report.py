"""Analysis report assembly, deterministic serialization, CSV emission."""
from __future__ import annotations

import io
import json
from dataclasses import asdict, dataclass, field, is_dataclass
from math import inf

import numpy as np

from .adiabatic import DecayClassification, EigenSweep

SCHEMA_VERSION = 1


def to_jsonable(obj):
    """Recursively convert report pieces to plain JSON-serialisable data."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {_key(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if v == inf:
            return "inf"
        if v == -inf:
            return "-inf"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [[float(np.real(x)), float(np.imag(x))] for x in obj.ravel()]
        return [float(x) for x in obj.ravel()]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _key(k):
    if isinstance(k, tuple):
        return ",".join(str(x) for x in k)
    if isinstance(k, (int, np.integer)):
        return str(int(k))
    return str(k)


@dataclass
class AnalysisReport:
    payload: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(to_jsonable(self.payload), sort_keys=True, indent=1) + "\n"

    @property
    def all_passed(self) -> bool:
        return bool(self.payload.get("verdict_summary", {}).get("all_asserted_pass", False))

    @property
    def failures(self) -> list[str]:
        return list(self.payload.get("verdict_summary", {}).get("failures", []))


def eigenvalues_csv(sw: EigenSweep) -> str:
    """Columns (k, i, h, lambda), one row per branch sample."""
    buf = io.StringIO()
    buf.write("k,i,h,lambda\n")
    n = sw.n
    for k in range(2 * n + 1):
        for j, h in enumerate(sw.h_values):
            vals = sw.spectra[(j, k)]
            for i, lam in enumerate(vals, start=1):
                buf.write(f"{k},{i},{h!r},{float(lam)!r}\n")
    return buf.getvalue()


def classification_csv(cls: DecayClassification) -> str:
    """Columns (k, i, slope, class); kernel branches carry class inf."""
    buf = io.StringIO()
    buf.write("k,i,slope,class\n")
    for b in cls.branches:
        slope = "" if b.slope is None else repr(float(b.slope))
        label = "inf" if b.decay_class == inf else str(int(b.decay_class))
        buf.write(f"{b.k},{b.index + 1},{slope},{label}\n")
    return buf.getvalue()


def verdicts_csv(rows) -> str:
    """Columns (r, k, dimEr, count, pass) from the headline verdict table."""
    buf = io.StringIO()
    buf.write("r,k,dimEr,count,pass\n")
    for row in rows:
        buf.write(f"{row.r},{row.k},{row.page_dim},{row.eigen_count},{str(row.passed).lower()}\n")
    return buf.getvalue()
