"""File formats: graph JSON, filter JSON, signal CSV and sweep CSV.

Floats are written with 17 significant digits, which round-trips every
IEEE double exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, DuplicateEdge, InputError, MalformedRow
from .filters import FilterSpec
from .graph import Graph
from .stability import CSV_FIELDS, StabilityRecord


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps_graph(g: Graph, meta: dict | None = None) -> str:
    edges = ",\n    ".join(f"[{i}, {j}, {fmt(w)}]" for i, j, w in g.edges())
    parts = [f'  "n": {g.n}', f'  "edges": [\n    {edges}\n  ]' if edges else '  "edges": []']
    if g.coords is not None:
        pts = ",\n    ".join(f"[{fmt(x)}, {fmt(y)}]" for x, y in g.coords)
        parts.append(f'  "coords": [\n    {pts}\n  ]')
    if meta:
        parts.append(f'  "meta": {json.dumps(meta, sort_keys=True)}')
    return "{\n" + ",\n".join(parts) + "\n}\n"


def graph_from_json(obj) -> Graph:
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise InputError("graph JSON needs 'n' and 'edges'")
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InputError(f"'n' must be a positive integer, got {n!r}")
    w = np.zeros((n, n))
    seen = set()
    for k, edge in enumerate(obj["edges"]):
        try:
            i, j, wt = edge
            i, j, wt = int(i), int(j), float(wt)
        except (TypeError, ValueError) as exc:
            raise InputError(f"edge {k} must be [i, j, w]") from exc
        if not 0 <= i < j < n:
            raise DimensionMismatch(f"edge {k}: need 0 <= i < j < n, got ({i}, {j})")
        if not wt > 0 or not np.isfinite(wt):
            raise InputError(f"edge {k}: weight must be positive and finite, got {wt}")
        if (i, j) in seen:
            raise DuplicateEdge(f"edge ({i}, {j}) listed twice")
        seen.add((i, j))
        w[i, j] = w[j, i] = wt
    coords = obj.get("coords")
    return Graph(w, None if coords is None else np.asarray(coords, dtype=float))


def save_graph(g: Graph, path, meta: dict | None = None) -> None:
    Path(path).write_text(dumps_graph(g, meta))


def load_graph(path) -> Graph:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return graph_from_json(obj)


def load_filter(path) -> FilterSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return FilterSpec.from_json(obj)


def save_filter(spec: FilterSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_json(), indent=2) + "\n")


def load_signals(path, n: int | None = None) -> np.ndarray:
    """Rows of comma-separated decimals, one signal per row.

    An empty file yields an empty ``(0, n)`` array. Blank lines are skipped.
    """
    rows = []
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            expected = n if n is not None else (len(rows[0]) if rows else len(row))
            if len(row) != expected:
                raise MalformedRow(line_no, f"expected {expected} values, got {len(row)}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise MalformedRow(line_no, str(exc)) from exc
    if not rows:
        return np.empty((0, n or 0))
    return np.array(rows, dtype=float)


def write_signals(path, signals: np.ndarray) -> None:
    signals = np.atleast_2d(signals)
    with open(path, "w", newline="") as fh:
        for row in signals:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_sweep_csv(path, records: list[StabilityRecord]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CSV_FIELDS) + "\n")
        for r in records:
            cells = []
            for name in CSV_FIELDS:
                v = getattr(r, name)
                cells.append(str(v) if isinstance(v, int) else fmt(v))
            fh.write(",".join(cells) + "\n")


def read_sweep_csv(path) -> list[StabilityRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise InputError(f"{path}: unexpected sweep header {reader.fieldnames}")
        out = []
        for row in reader:
            kw = {k: float(v) for k, v in row.items()}
            kw["trial"] = int(row["trial"])
            kw["trial_seed"] = int(row["trial_seed"])
            out.append(StabilityRecord(**kw))
    return out
