"""File formats: network JSON, snapshot/vector CSV, matrix CSV, reports.

All numbers are written with 12 significant digits and no locale, so equal
inputs give byte-identical output files.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .errors import NetworkError
from .fitting import SnapshotSet
from .netgraph import UrbanNetwork

__all__ = [
    "fmt",
    "load_network",
    "network_from_dict",
    "load_snapshots",
    "load_vector",
    "load_matrix",
    "csv_text",
    "json_text",
    "report_tables",
    "report_dict",
]


def fmt(v) -> str:
    v = float(v)
    if not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return f"{v + 0.0:.12g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(fmt(v)) if math.isfinite(v) else None
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def network_from_dict(data: dict) -> UrbanNetwork:
    if not isinstance(data, dict) or "nodes" not in data or "edges" not in data:
        raise NetworkError("network JSON needs 'nodes' and 'edges'")
    ids, labels = [], []
    for k, node in enumerate(data["nodes"]):
        if isinstance(node, str):
            node = {"id": node}
        if not isinstance(node, dict) or "id" not in node:
            raise NetworkError(f"node entry {k} has no 'id'")
        ids.append(str(node["id"]))
        labels.append(str(node.get("label", node["id"])))
    edges = []
    for e in data["edges"]:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise NetworkError(f"edge {e!r} must be a pair of node ids")
        edges.append((str(e[0]), str(e[1])))
    lengths = None
    raw = data.get("lengths")
    if raw:
        known = {f"{a}-{b}" for a, b in edges} | {f"{b}-{a}" for a, b in edges}
        extra = sorted(set(raw) - known)
        if extra:
            raise NetworkError(f"'lengths' names unknown edge(s): {', '.join(extra)}")
        lengths = []
        for a, b in edges:
            for key in (f"{a}-{b}", f"{b}-{a}"):
                if key in raw:
                    lengths.append(float(raw[key]))
                    break
            else:
                raise NetworkError(f"edge {a}-{b} has no entry in 'lengths'")
    return UrbanNetwork.from_ids(ids, edges, lengths, labels)


def load_network(path) -> UrbanNetwork:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"{path}: invalid JSON ({exc})") from None
    return network_from_dict(data)


def _read_table(path, ids):
    """Read a CSV whose header lists node ids; return rows in ``ids`` order."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if ids is not None:
        unknown = [h for h in header if h not in ids]
        if unknown:
            raise ValueError(f"{path}: unknown node id(s) in header: {', '.join(unknown)}")
        missing = [i for i in ids if i not in header]
        if missing:
            raise ValueError(f"{path}: missing column(s) for node(s): {', '.join(missing)}")
        order = [header.index(i) for i in ids]
    else:
        order = list(range(len(header)))
    data = []
    for k, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise ValueError(f"{path}: line {k} has {len(r)} fields, header has {len(header)}")
        vals = []
        for j in order:
            try:
                vals.append(float(r[j]))
            except ValueError:
                raise ValueError(f"{path}: line {k} column {header[j]} has non-numeric value {r[j].strip()!r}") from None
        bad = [header[j] for j, v in zip(order, vals) if not (math.isfinite(v) and v >= 0)]
        if bad:
            raise ValueError(f"{path}: line {k} has negative or non-finite values at {', '.join(bad)}")
        data.append(vals)
    if not data:
        raise ValueError(f"{path}: no data rows")
    return np.array(data)


def load_snapshots(path, ids, forced_path=None) -> SnapshotSet:
    x = _read_table(path, ids)
    f = None
    if forced_path is not None:
        f = _read_table(forced_path, ids)
        if f.shape != x.shape:
            raise ValueError(
                f"{forced_path}: {f.shape[0]} rows but {path} has {x.shape[0]} snapshots"
            )
    return SnapshotSet(x, f, tuple(ids))


def load_vector(path, ids) -> np.ndarray:
    """Per-node vector from JSON (``{id: value}`` or list) or one-row CSV."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
        if isinstance(data, dict):
            unknown = [k for k in data if k not in ids]
            if unknown:
                raise ValueError(f"{path}: unknown node id(s): {', '.join(unknown)}")
            missing = [i for i in ids if i not in data]
            if missing:
                raise ValueError(f"{path}: missing value(s) for node(s): {', '.join(missing)}")
            return np.array([float(data[i]) for i in ids])
        vec = np.asarray(data, dtype=float)
        if vec.shape != (len(ids),):
            raise ValueError(f"{path}: expected {len(ids)} values, found {vec.size}")
        return vec
    table = _read_table(path, ids)
    if table.shape[0] != 1:
        raise ValueError(f"{path}: expected exactly one data row, found {table.shape[0]}")
    return table[0]


def load_matrix(path) -> np.ndarray:
    """Square numeric matrix from a header-less CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    try:
        m = np.array([[float(c) for c in r] for r in rows])
    except ValueError:
        raise ValueError(f"{path}: matrix CSV must be purely numeric") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{path}: matrix must be square, got {m.shape}")
    return m


def report_tables(report, ids):
    """CSV texts ``(derivatives, elasticities)`` of a sensitivity report."""
    header = ["node"] + report.headers
    deriv = csv_text(header, [[i] + list(map(float, row)) for i, row in zip(ids, report.derivatives)])
    elas = csv_text(header, [[i] + list(map(float, row)) for i, row in zip(ids, report.elasticities)])
    return deriv, elas


def report_dict(report, ids) -> dict:
    return {
        "model": report.model_kind,
        "N": report.N,
        "nodes": list(ids),
        "base_x": report.base_x,
        "parameters": [
            {"name": p.label, "kind": p.kind, "index": p.index + 1, "value": p.value,
             f"{report.rate_kind}_prime": r}
            for p, r in zip(report.params, report.rates)
        ],
        "derivatives": report.derivatives,
        "elasticities": report.elasticities,
        "diagnostics": report.diagnostics,
    }
