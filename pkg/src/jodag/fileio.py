"""On-disk formats: data CSVs, edge lists, manifests, trace files, configs.

All numeric CSV output uses full-precision scientific notation and the
locale-independent ``csv`` module, so a rerun with the same inputs is
byte-identical.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
import numpy as np

from .dag import Dag
from .ordering import Ordering
from .sampler import ChainTrace
from .scoring import Dataset

__all__ = [
    "write_dataset_csv",
    "read_dataset_csv",
    "write_edge_list",
    "read_edge_list",
    "write_adjacency_csv",
    "write_matrix_csv",
    "write_manifest",
    "read_manifest",
    "write_trace",
    "read_trace",
    "load_config",
]

FLOAT_FMT = "%.17e"


def _fmt(x: float) -> str:
    return FLOAT_FMT % float(x)


def write_dataset_csv(path: Path, data: np.ndarray) -> None:
    """Observation matrix with header ``x1,...,xp``."""
    data = np.asarray(data)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j}" for j in range(1, data.shape[1] + 1)])
        for row in data:
            writer.writerow([_fmt(v) for v in row])


def read_dataset_csv(path: Path) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or not header[0].startswith("x"):
            raise ValueError(f"{path}: expected an x1..xp header row")
        rows = [[float(v) for v in row] for row in reader if row]
    return Dataset(np.asarray(rows), name=Path(path).stem)


def write_edge_list(path: Path, g: Dag) -> None:
    Path(path).write_text("\n".join(g.to_lines()) + "\n")


def read_edge_list(path: Path) -> Dag:
    return Dag.from_lines(Path(path).read_text().splitlines())


def write_adjacency_csv(path: Path, g: Dag) -> None:
    """0/1 adjacency matrix rows, for interop with matrix-based tools."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in g.adjacency():
            writer.writerow([int(v) for v in row])


def write_matrix_csv(path: Path, matrix: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in np.asarray(matrix):
            writer.writerow([_fmt(v) for v in row])


def write_manifest(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_manifest(path: Path) -> dict:
    return json.loads(Path(path).read_text())


def write_trace(prefix: Path, trace: ChainTrace) -> list[Path]:
    """Write one chain: a trace CSV plus one selected-graph CSV per dataset.

    The trace CSV has columns ``iter,log_post,accepted,ordering`` where
    ``accepted`` flags whether that iteration's proposal was accepted and
    orderings use the comma-separated label serialization.  Sidecar files
    list the selected edges of each recorded iteration as ``iter,i,j`` rows,
    and the full every-iteration log-posterior trajectory (iteration 0 being
    the initial state) is written separately for trajectory plots.
    """
    prefix = Path(prefix)
    burn = trace.config.resolved_burn_in()
    thin = trace.config.thin
    iters = [burn + 1 + t * thin for t in range(len(trace))]

    paths = [prefix.with_suffix(".csv")]
    with open(paths[0], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "log_post", "accepted", "ordering"])
        for it, logp, sigma in zip(iters, trace.log_posts, trace.orderings):
            writer.writerow([it, _fmt(logp), int(trace.accepts[it - 1]), sigma.to_string()])

    trajectory_path = prefix.parent / f"{prefix.name}_trajectory.csv"
    paths.append(trajectory_path)
    with open(trajectory_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "log_post"])
        for it, logp in enumerate(trace.trajectory):
            writer.writerow([it, _fmt(logp)])

    if trace.map_edges is not None and trace.map_edges:
        n_datasets = len(trace.map_edges[0])
        for k in range(n_datasets):
            path = prefix.parent / f"{prefix.name}_map_k{k + 1}.csv"
            paths.append(path)
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["iter", "i", "j"])
                for it, sample in zip(iters, trace.map_edges):
                    for i, j in sorted(sample[k]):
                        writer.writerow([it, i, j])
    return paths


def read_trace(prefix: Path, n_datasets: int) -> dict:
    """Read back a written chain as plain arrays and edge sets.

    Returns a dict with ``iters``, ``log_posts``, ``orderings`` and
    ``map_edges`` (list over samples of tuples over datasets).
    """
    prefix = Path(prefix)
    iters: list[int] = []
    log_posts: list[float] = []
    orderings: list[Ordering] = []
    with open(prefix.with_suffix(".csv"), newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            if not row:
                continue
            iters.append(int(row[0]))
            log_posts.append(float(row[1]))
            orderings.append(Ordering.from_string(row[3]))

    edges_by_iter: list[dict[int, set]] = [dict() for _ in range(n_datasets)]
    for k in range(n_datasets):
        path = prefix.parent / f"{prefix.name}_map_k{k + 1}.csv"
        per_iter: dict[int, set] = {it: set() for it in iters}
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                if not row:
                    continue
                per_iter[int(row[0])].add((int(row[1]), int(row[2])))
        edges_by_iter[k] = per_iter

    map_edges = [
        tuple(frozenset(edges_by_iter[k][it]) for k in range(n_datasets))
        for it in iters
    ]
    return {
        "iters": iters,
        "log_posts": np.asarray(log_posts),
        "orderings": orderings,
        "map_edges": map_edges,
    }


def load_config(path: Path) -> dict:
    """Parse a TOML configuration file, falling back to JSON."""
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix.lower() == ".json":
        return json.loads(raw.decode())
    try:
        import tomllib as toml  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as toml
    try:
        return toml.loads(raw.decode())
    except toml.TOMLDecodeError:
        try:
            return json.loads(raw.decode())
        except json.JSONDecodeError:
            raise ValueError(f"{path}: neither valid TOML nor valid JSON")
