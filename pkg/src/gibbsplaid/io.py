"""File formats: expression/distance CSV, edge lists, trace JSONL, summaries.

All JSON output is emitted with sorted keys so identical runs produce
byte-identical files; writes go through a temp-file-then-rename step.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import ExpressionMatrix
from .engine import SamplerTrace, TraceRecord
from .graph import RelationalGraph, TemperatureGrid, avg_nn_bandwidth, build_knn_graph
from .selection import Bicluster


def _delimiter_for(path: Path, sample: str) -> str:
    if path.suffix.lower() in (".tsv", ".tab"):
        return "\t"
    return "\t" if ("\t" in sample and "," not in sample) else ","


def _read_table(path) -> tuple[list[str], list[str], np.ndarray]:
    path = Path(path)
    with open(path, newline="") as fh:
        sample = fh.readline()
        fh.seek(0)
        reader = csv.reader(fh, delimiter=_delimiter_for(path, sample))
        rows = [row for row in reader if row]
    if len(rows) < 2 or len(rows[0]) < 2:
        raise ValueError(f"{path}: expected a header row/column and at least one cell")
    col_ids = [c.strip() for c in rows[0][1:]]
    row_ids = []
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(col_ids) + 1:
            raise ValueError(f"{path}:{lineno}: expected {len(col_ids) + 1} fields, got {len(row)}")
        row_ids.append(row[0].strip())
        vals = []
        for cell in row[1:]:
            cell = cell.strip()
            if cell == "" or cell.upper() in ("NA", "NAN"):
                raise ValueError(f"{path}:{lineno}: missing value")
            try:
                vals.append(float(cell))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric cell {cell!r}") from None
        data.append(vals)
    return row_ids, col_ids, np.asarray(data, dtype=float)


def load_expression_csv(path) -> ExpressionMatrix:
    """Load an expression matrix: header row of column ids, first column row ids."""
    row_ids, col_ids, values = _read_table(path)
    return ExpressionMatrix(values, tuple(row_ids), tuple(col_ids))


def write_expression_csv(path, y: ExpressionMatrix) -> None:
    lines = ["," + ",".join(y.col_ids)]
    for i, rid in enumerate(y.row_ids):
        lines.append(rid + "," + ",".join(repr(v) for v in y.values[i].tolist()))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def load_distance_csv(path) -> tuple[list[str], np.ndarray]:
    """Load a dense square distance matrix with matching row/column ids."""
    row_ids, col_ids, values = _read_table(path)
    if row_ids != col_ids:
        raise ValueError(f"{path}: distance matrix row and column ids differ")
    return row_ids, values


def write_distance_csv(path, ids, D: np.ndarray) -> None:
    ids = list(ids)
    lines = ["," + ",".join(ids)]
    for i, rid in enumerate(ids):
        lines.append(rid + "," + ",".join(repr(v) for v in np.asarray(D)[i].tolist()))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def load_edge_list(path) -> list[tuple[int, int, float]]:
    """Load a 3-column (i, i', d) edge list of 0-based node indices."""
    path = Path(path)
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 fields")
            try:
                i, j, d = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed edge") from None
            out.append((i, j, d))
    if not out:
        raise ValueError(f"{path}: empty edge list")
    return out


def graph_from_edge_list(pairs, n: int, r: int | None = None) -> RelationalGraph:
    """Relational graph from sparse precomputed distances.

    With ``r`` given, the listed pairs are the eligible neighbor candidates
    and an r-nearest-neighbor graph is built among them; without ``r`` every
    listed pair becomes an edge.
    """
    D = np.zeros((n, n))
    mask = np.zeros((n, n), dtype=bool)
    for i, j, d in pairs:
        if not (0 <= i < n and 0 <= j < n) or i == j:
            raise ValueError(f"bad edge ({i}, {j}) for n={n}")
        if d < 0 or not np.isfinite(d):
            raise ValueError(f"bad distance on edge ({i}, {j})")
        D[i, j] = D[j, i] = d
        mask[i, j] = mask[j, i] = True
    if r is not None:
        return build_knn_graph(D, r, mask=mask)
    sigma = avg_nn_bandwidth(D, mask=mask)
    ei, ej = np.nonzero(np.triu(mask, k=1))
    return RelationalGraph(n, ei.astype(np.intp), ej.astype(np.intp), D[ei, ej], sigma)


# ---------------------------------------------------------------------------
# JSON helpers
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def dump_json(path, payload) -> None:
    text = json.dumps(_jsonable(payload), sort_keys=True, indent=1)
    _atomic_write_text(path, text + "\n")


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Trace persistence
# ---------------------------------------------------------------------------

def _record_payload(rec: TraceRecord) -> dict:
    return {
        "iter": rec.iteration,
        "loglik": rec.loglik,
        "logpost": rec.logpost,
        "mu0": rec.mu0,
        "mu": rec.mu.tolist(),
        "sigma2": rec.sigma2,
        "a": rec.raw_gene_effects.tolist(),
        "b": rec.raw_cond_effects.tolist(),
        "rho": rec.rho.tolist(),
        "kappa": rec.kappa.tolist(),
        "t_rho": rec.t_rho_idx,
        "t_kappa": rec.t_kappa_idx,
    }


def write_trace_jsonl(path, trace: SamplerTrace) -> None:
    lines = [json.dumps(_record_payload(r), sort_keys=True) for r in trace.records]
    _atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_trace_jsonl(path, grid_rho: TemperatureGrid | None = None,
                     grid_kappa: TemperatureGrid | None = None) -> SamplerTrace:
    """Rehydrate a trace from JSON lines (adaptive-state fields left empty)."""
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            records.append(TraceRecord(
                iteration=int(d["iter"]), loglik=float(d["loglik"]),
                logpost=float(d["logpost"]), mu0=float(d["mu0"]),
                mu=np.asarray(d["mu"], dtype=float), sigma2=float(d["sigma2"]),
                raw_gene_effects=np.asarray(d["a"], dtype=float),
                raw_cond_effects=np.asarray(d["b"], dtype=float),
                rho=np.asarray(d["rho"], dtype=np.int8),
                kappa=np.asarray(d["kappa"], dtype=np.int8),
                t_rho_idx=int(d["t_rho"]), t_kappa_idx=int(d["t_kappa"])))
    if not records:
        raise ValueError(f"{path}: empty trace")
    grid_rho = grid_rho or TemperatureGrid(np.array([1.0]))
    grid_kappa = grid_kappa or TemperatureGrid(np.array([1.0]))
    shape = (grid_rho.size, grid_kappa.size)
    zeros_f = np.zeros(shape)
    zeros_i = np.zeros(shape, dtype=np.int64)
    rho_freq = np.mean([r.rho for r in records], axis=0)
    kappa_freq = np.mean([r.kappa for r in records], axis=0)
    return SamplerTrace(records, grid_rho, grid_kappa, zeros_f, zeros_i.copy(),
                        zeros_i.copy(), zeros_i.copy(), rho_freq, kappa_freq,
                        len(records))


def write_memberships_csv(path, ids, probs: np.ndarray) -> None:
    probs = np.asarray(probs, dtype=float)
    K = probs.shape[1]
    lines = ["id," + ",".join(f"k{k + 1}" for k in range(K))]
    for i, rid in enumerate(ids):
        lines.append(str(rid) + "," + ",".join(repr(v) for v in probs[i].tolist()))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def biclusters_payload(bics) -> dict:
    return {"biclusters": [{"rows": sorted(b.rows), "cols": sorted(b.cols)} for b in bics]}


def biclusters_from_payload(payload) -> list[Bicluster]:
    items = payload["biclusters"] if isinstance(payload, dict) else payload
    return [Bicluster(frozenset(b["rows"]), frozenset(b["cols"])) for b in items]
