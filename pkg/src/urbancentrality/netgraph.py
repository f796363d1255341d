"""Urban networks and their matrices of relationships.

Nodes are indexed in declaration order; every matrix and vector produced
by the package follows that order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .errors import DisconnectedNetworkError, NetworkError

__all__ = [
    "UrbanNetwork",
    "DistanceMatrix",
    "RelationshipMatrix",
    "as_array",
    "build_adjacency",
    "shortest_path_distances",
    "build_harmonic",
    "build_gravity",
    "build_matrix",
    "apply_weights",
    "scale",
    "is_irreducible",
]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class UrbanNetwork:
    """Undirected connected graph of spaces (streets, rooms, intersections).

    Parameters
    ----------
    nodes : sequence of (id, label)
    edges : sequence of (i, j) index pairs, unordered
    edge_lengths : optional sequence of positive floats aligned with ``edges``
    """

    nodes: tuple
    edges: tuple
    edge_lengths: tuple | None = None

    def __post_init__(self):
        nodes = tuple((str(i), str(lbl)) for i, lbl in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        n = len(nodes)
        if n < 2:
            raise NetworkError("a network needs at least two nodes")
        seen = {}
        for k, (nid, _) in enumerate(nodes):
            if nid in seen:
                raise NetworkError(f"duplicate node id {nid!r}")
            seen[nid] = k

        edges = []
        pairs = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            for v in (i, j):
                if not 0 <= v < n:
                    raise NetworkError(f"edge {tuple(e)} refers to unknown node index {v}")
            if i == j:
                raise NetworkError(f"self-loop at node {nodes[i][0]!r}")
            key = (min(i, j), max(i, j))
            if key in pairs:
                raise NetworkError(
                    f"duplicate edge {nodes[key[0]][0]}-{nodes[key[1]][0]}"
                )
            pairs.add(key)
            edges.append((i, j))
        object.__setattr__(self, "edges", tuple(edges))

        if self.edge_lengths is not None:
            lengths = tuple(float(v) for v in self.edge_lengths)
            if len(lengths) != len(edges):
                raise NetworkError(
                    f"{len(lengths)} edge lengths given for {len(edges)} edges"
                )
            for (i, j), d in zip(edges, lengths):
                if not (np.isfinite(d) and d > 0):
                    raise NetworkError(
                        f"edge {nodes[i][0]}-{nodes[j][0]} has non-positive length {d}"
                    )
            object.__setattr__(self, "edge_lengths", lengths)

        ncomp, labels = connected_components(self._csr(), directed=False)
        if ncomp > 1:
            comps = [[nodes[k][0] for k in range(n) if labels[k] == c] for c in range(ncomp)]
            raise DisconnectedNetworkError(comps)

    @classmethod
    def from_ids(cls, ids: Sequence[str], edges: Sequence[tuple[str, str]],
                 lengths: Sequence[float] | None = None,
                 labels: Sequence[str] | None = None) -> "UrbanNetwork":
        """Build a network from node ids and id-pair edges."""
        ids = [str(i) for i in ids]
        labels = ids if labels is None else labels
        index = {nid: k for k, nid in enumerate(ids)}
        idx_edges = []
        for a, b in edges:
            for v in (a, b):
                if v not in index:
                    raise NetworkError(f"edge {a}-{b} refers to unknown node {v!r}")
            idx_edges.append((index[a], index[b]))
        return cls(tuple(zip(ids, labels)), tuple(idx_edges), lengths)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def ids(self) -> list[str]:
        return [nid for nid, _ in self.nodes]

    @property
    def labels(self) -> list[str]:
        return [lbl for _, lbl in self.nodes]

    def index(self, node_id: str) -> int:
        for k, (nid, _) in enumerate(self.nodes):
            if nid == node_id:
                return k
        raise NetworkError(f"unknown node {node_id!r}")

    def _csr(self, lengths=None):
        n = self.n
        if not self.edges:
            return csr_matrix((n, n))
        i, j = np.array(self.edges).T
        data = np.ones(len(i)) if lengths is None else np.asarray(lengths, dtype=float)
        return csr_matrix(
            (np.concatenate([data, data]), (np.concatenate([i, j]), np.concatenate([j, i]))),
            shape=(n, n),
        )


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric hollow matrix of positive pairwise distances.

    ``mode`` is one of ``"hop"``, ``"metric"`` or ``"user"``.
    """

    entries: np.ndarray
    mode: str = "user"

    def __post_init__(self):
        d = _frozen(self.entries)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if not np.allclose(d, d.T, rtol=1e-12, atol=0):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diag(d) != 0):
            raise ValueError("distance matrix must have a zero diagonal")
        off = d[~np.eye(d.shape[0], dtype=bool)]
        if not np.all(np.isfinite(off) & (off > 0)):
            raise ValueError("off-diagonal distances must be finite and positive")
        object.__setattr__(self, "entries", d)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True)
class RelationshipMatrix:
    """Nonnegative square matrix with a record of how it was built.

    ``kind`` is ``adjacency``, ``harmonic``, ``gravity``, ``weighted`` or
    ``scaled``; ``provenance`` holds the weights or scale factor involved.
    """

    entries: np.ndarray
    kind: str = "user"
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"relationship matrix must be square, got shape {m.shape}")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("relationship matrix must be finite and nonnegative")
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def symmetric(self) -> bool:
        return bool(np.array_equal(self.entries, self.entries.T))

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def as_array(M) -> np.ndarray:
    """Return the float ndarray behind a matrix-like argument."""
    if isinstance(M, (RelationshipMatrix, DistanceMatrix)):
        return M.entries
    return np.asarray(M, dtype=np.float64)


def build_adjacency(net: UrbanNetwork) -> RelationshipMatrix:
    A = net._csr().toarray()
    return RelationshipMatrix(A, "adjacency")


def shortest_path_distances(net: UrbanNetwork, metric: bool = False) -> DistanceMatrix:
    """All-pairs shortest path lengths.

    With ``metric=False`` every edge counts 1 (hop count); otherwise the
    network's ``edge_lengths`` are used and must be present.
    """
    if metric:
        if net.edge_lengths is None:
            raise NetworkError("metric distances requested but the network has no edge lengths")
        D = shortest_path(net._csr(net.edge_lengths), method="D", directed=False)
        mode = "metric"
    else:
        D = shortest_path(net._csr(), method="D", directed=False, unweighted=True)
        mode = "hop"
    # exact symmetry; Dijkstra can differ in the last bit between directions
    D = np.minimum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return DistanceMatrix(D, mode)


def _reciprocal_power(D: DistanceMatrix, p: int) -> np.ndarray:
    d = as_array(D)
    out = np.zeros_like(d)
    off = ~np.eye(d.shape[0], dtype=bool)
    out[off] = 1.0 / d[off] ** p
    return out


def build_harmonic(D: DistanceMatrix) -> RelationshipMatrix:
    """``E[i, j] = 1 / d_ij`` off the diagonal."""
    return RelationshipMatrix(_reciprocal_power(D, 1), "harmonic")


def build_gravity(D: DistanceMatrix) -> RelationshipMatrix:
    """``E[i, j] = 1 / d_ij**2`` off the diagonal."""
    return RelationshipMatrix(_reciprocal_power(D, 2), "gravity")


def build_matrix(net: UrbanNetwork, kind: str = "adjacency", metric: bool = False) -> RelationshipMatrix:
    """Structural factor ``B`` of the requested kind for ``net``."""
    if kind == "adjacency":
        return build_adjacency(net)
    if kind == "harmonic":
        return build_harmonic(shortest_path_distances(net, metric))
    if kind == "gravity":
        return build_gravity(shortest_path_distances(net, metric))
    raise ValueError(f"unknown matrix kind {kind!r}")


def apply_weights(B, w) -> RelationshipMatrix:
    """Right-multiply by ``diag(w)``: column ``j`` is scaled by ``w[j]``."""
    b = as_array(B)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (b.shape[1],):
        raise ValueError(f"weight vector has shape {w.shape}, expected ({b.shape[1]},)")
    if np.any(~(w > 0)):
        bad = [int(k) for k in np.flatnonzero(~(w > 0))]
        raise ValueError(f"weights must be positive; offending indices {bad}")
    return RelationshipMatrix(b * w[None, :], "weighted", {"base": getattr(B, "kind", "user"), "w": w.copy()})


def scale(M, c: float) -> RelationshipMatrix:
    if not c > 0:
        raise ValueError(f"scale factor must be positive, got {c}")
    return RelationshipMatrix(as_array(M) * c, "scaled", {"factor": float(c), "base": getattr(M, "kind", "user")})


def is_irreducible(M) -> bool:
    """True iff the directed support graph of ``M`` is strongly connected.

    A 1x1 matrix counts as irreducible only when its entry is positive.
    """
    m = as_array(M)
    if m.shape[0] == 1:
        return bool(m[0, 0] > 0)
    ncomp, _ = connected_components(csr_matrix(m != 0), directed=True, connection="strong")
    return ncomp == 1
