"""On-disk dataset formats and loaders.

A dataset is an edge-list TSV (``src<TAB>dst[<TAB>weight]``, weight
defaults to 1, node ids are arbitrary strings indexed in first-seen
order) plus a labels CSV (``node,label``; nodes absent from the file are
unobserved). Labels are continuous reals or binary in {-1, 1}.
"""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .graphs import WeightedDigraph, read_edge_list
from .kriging import PartitionedData

CONTINUOUS = "continuous"
BINARY = "binary"


@dataclass(frozen=True, eq=False)
class LabeledGraphData:
    """Graph plus a partial response vector with its observed mask."""

    graph: WeightedDigraph
    node_ids: list[str]
    y: np.ndarray
    observed: np.ndarray
    kind: str

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def r(self) -> int:
        return int(self.observed.sum())

    def partitioned(self) -> PartitionedData:
        idx = np.flatnonzero(self.observed)
        return PartitionedData(idx, self.y[idx])


def parse_labels(lines, node_index: dict[str, int], kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse ``node,label`` rows against an id map. A single optional
    header row ``node,label`` is skipped."""
    n = len(node_index)
    y = np.zeros(n)
    observed = np.zeros(n, dtype=bool)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if lineno == 1 and line.lower() == "node,label":
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataFormatError(f"labels line {lineno}: expected 'node,label', got {line!r}")
        node, value = parts[0].strip(), parts[1].strip()
        if node not in node_index:
            raise DataFormatError(
                f"labels line {lineno}: node {node!r} does not appear in the edge list "
                "(isolated nodes are not allowed)"
            )
        try:
            label = float(value)
        except ValueError:
            raise DataFormatError(f"labels line {lineno}: bad label {value!r}") from None
        if kind == BINARY and label not in (-1.0, 1.0):
            raise DataFormatError(
                f"labels line {lineno}: binary labels must be -1 or 1, got {value}"
            )
        i = node_index[node]
        if observed[i]:
            raise DataFormatError(f"labels line {lineno}: node {node!r} labeled twice")
        y[i] = label
        observed[i] = True
    if not observed.any():
        raise DataFormatError("labels file contains no labels")
    return y, observed


def load_dataset(graph_path: str | Path, labels_path: str | Path,
                 kind: str = CONTINUOUS) -> LabeledGraphData:
    """Read a graph TSV and labels CSV into a labeled dataset."""
    if kind not in (CONTINUOUS, BINARY):
        raise ValueError(f"label kind must be {CONTINUOUS!r} or {BINARY!r}")
    graph_path, labels_path = Path(graph_path), Path(labels_path)
    try:
        with graph_path.open() as fh:
            g, ids = read_edge_list(fh)
    except ValueError as exc:
        raise DataFormatError(f"{graph_path}: {exc}") from None
    node_index = {name: i for i, name in enumerate(ids)}
    try:
        with labels_path.open() as fh:
            y, observed = parse_labels(fh, node_index, kind)
    except DataFormatError as exc:
        raise DataFormatError(f"{labels_path}: {exc}") from None
    return LabeledGraphData(graph=g, node_ids=ids, y=y, observed=observed, kind=kind)
