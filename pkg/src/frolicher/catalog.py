"""Built-in invariant models and the manifold/metric input schema."""
from __future__ import annotations

import json
import os
from fractions import Fraction

import numpy as np

from . import exactlin as xl
from .errors import CatalogError, SchemaError
from .metric import HermitianMetric
from .model import InvariantComplexStructure


def _q(re=0, im=0) -> xl.QQi:
    return xl.QQi(Fraction(re), Fraction(im))


def _entry(name, n, partial, dbar, summary):
    return {
        "name": name,
        "n": n,
        "partial": partial,
        "dbar": dbar,
        "summary": summary,
    }


_CATALOG = {
    "torus1": _entry("torus1", 1, {}, {}, "complex torus, n=1, all structure constants zero"),
    "torus2": _entry("torus2", 2, {}, {}, "complex torus, n=2, all structure constants zero"),
    "torus3": _entry("torus3", 3, {}, {}, "complex torus, n=3, all structure constants zero"),
    "iwasawa": _entry(
        "iwasawa", 3,
        {(3, 1, 2): _q(-1)},
        {},
        "Iwasawa threefold: del e3 = -e1^e2",
    ),
    "kodaira_thurston": _entry(
        "kodaira_thurston", 2,
        {},
        {(2, 1, 1): _q(1)},
        "Kodaira-Thurston surface: dbar e2 = e1^conj(e1)",
    ),
    "heisenberg5": _entry(
        "heisenberg5", 3,
        {},
        {(3, 1, 1): _q(1), (3, 2, 2): _q(1)},
        "Heisenberg H5 x S1 threefold: dbar e3 = e1^conj(e1) + e2^conj(e2)",
    ),
    "calabi_eckmann": _entry(
        "calabi_eckmann", 3,
        {(1, 1, 3): _q(0, Fraction(-1, 2)), (2, 2, 3): _q(Fraction(-1, 2))},
        {(1, 1, 3): _q(0, Fraction(-1, 2)), (2, 2, 3): _q(Fraction(1, 2)),
         (3, 1, 1): _q(0, Fraction(1, 2)), (3, 2, 2): _q(Fraction(-1, 2))},
        "Calabi-Eckmann structure on S3 x S3 (su(2) + su(2) coframe)",
    ),
}


def catalog_names() -> list[str]:
    return sorted(_CATALOG)


def catalog_listing() -> list[dict]:
    return [{"name": e["name"], "n": e["n"], "summary": e["summary"]}
            for _, e in sorted(_CATALOG.items())]


def load_manifold(source) -> tuple[InvariantComplexStructure, HermitianMetric]:
    """Resolve a catalog name, a JSON file path, or an inline schema dict."""
    if isinstance(source, str):
        if source in _CATALOG:
            e = _CATALOG[source]
            structure = InvariantComplexStructure(
                n=e["n"], partial_coeffs=dict(e["partial"]),
                dbar_coeffs=dict(e["dbar"]), name=e["name"])
            return structure, HermitianMetric.identity(e["n"])
        if os.path.exists(source):
            with open(source) as fh:
                data = json.load(fh)
            return parse_manifold(data)
        raise CatalogError(
            f"unknown manifold {source!r}; known names: {', '.join(catalog_names())}")
    if isinstance(source, dict):
        return parse_manifold(source)
    raise SchemaError(f"unsupported manifold source of type {type(source).__name__}")


def parse_manifold(data: dict) -> tuple[InvariantComplexStructure, HermitianMetric]:
    name = data.get("name", "unnamed")
    if not isinstance(name, str):
        raise SchemaError("name: expected a string")
    n = data.get("n")
    if not isinstance(n, int):
        raise SchemaError("n: expected an integer")
    partial = _parse_coeff_list(data.get("partial", []), "partial")
    dbar = _parse_coeff_list(data.get("dbar", []), "dbar")
    exact = all(isinstance(v, xl.QQi) for v in (*partial.values(), *dbar.values()))
    if not exact:
        partial = {k: complex(v) if isinstance(v, xl.QQi) else v for k, v in partial.items()}
        dbar = {k: complex(v) if isinstance(v, xl.QQi) else v for k, v in dbar.items()}
    structure = InvariantComplexStructure(n=n, partial_coeffs=partial, dbar_coeffs=dbar, name=name)
    metric = parse_metric(data["metric"], n, "metric") if data.get("metric") is not None \
        else HermitianMetric.identity(n)
    return structure, metric


def _parse_coeff_list(items, field):
    if not isinstance(items, list):
        raise SchemaError(f"{field}: expected a list")
    out = {}
    for pos, item in enumerate(items):
        path = f"{field}[{pos}]"
        if not isinstance(item, dict):
            raise SchemaError(f"{path}: expected an object")
        try:
            i, j, k = int(item["i"]), int(item["j"]), int(item["k"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: indices i, j, k are required integers ({exc})") from None
        value = _parse_number_pair(item.get("re", 0), item.get("im", 0), path)
        key = (i, j, k)
        if key in out:
            raise SchemaError(f"{path}: duplicate coefficient for ({i},{j},{k})")
        out[key] = value
    return out


def _parse_number_pair(re, im, path):
    """Ints and 'p/q' strings stay exact; float literals force the float path."""
    exact = True
    parts = []
    for label, v in (("re", re), ("im", im)):
        if isinstance(v, bool) or not isinstance(v, (int, float, str)):
            raise SchemaError(f"{path}.{label}: expected a number or fraction string")
        if isinstance(v, float):
            exact = False
            parts.append(v)
        elif isinstance(v, str):
            try:
                parts.append(Fraction(v))
            except ValueError:
                raise SchemaError(f"{path}.{label}: invalid fraction string {v!r}") from None
        else:
            parts.append(Fraction(v))
    if exact:
        return xl.QQi(parts[0], parts[1])
    return complex(float(parts[0]), float(parts[1]))


def parse_metric(data, n: int, field: str = "metric") -> HermitianMetric:
    """n x n Hermitian matrix as [[[re, im], ...], ...]; fraction strings allowed."""
    if not (isinstance(data, list) and len(data) == n):
        raise SchemaError(f"{field}: expected {n} rows")
    g = np.zeros((n, n), dtype=complex)
    exact_rows = []
    exact = True
    for i, row in enumerate(data):
        if not (isinstance(row, list) and len(row) == n):
            raise SchemaError(f"{field}[{i}]: expected {n} entries")
        exact_row = []
        for j, cell in enumerate(row):
            if not (isinstance(cell, list) and len(cell) == 2):
                raise SchemaError(f"{field}[{i}][{j}]: expected a [re, im] pair")
            value = _parse_number_pair(cell[0], cell[1], f"{field}[{i}][{j}]")
            if isinstance(value, xl.QQi):
                exact_row.append(value)
                g[i, j] = complex(value)
            else:
                exact = False
                g[i, j] = value
        exact_rows.append(exact_row)
    return HermitianMetric(g, exact_g=exact_rows if exact else None)


def load_metric_file(path: str, n: int) -> HermitianMetric:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "metric" in data:
        data = data["metric"]
    return parse_metric(data, n)
