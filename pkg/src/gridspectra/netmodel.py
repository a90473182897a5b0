"""Radial network graph, incidence-matrix algebra and path-weight identities.

The network is an undirected tree (or forest of feeders sharing the
substation) with positive line resistances/reactances.  Node 0 is always
the substation and acts as the voltage reference; reduced matrices drop
its row/column.  The inverse of a reduced weighted Laplacian built with
1/r (or 1/x) edge weights encodes, entrywise, the summed resistance
(reactance) of the lines shared by the two nodes' paths to the
substation, which is what most downstream covariance algebra relies on.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NetworkStructureError(ValueError):
    """Raised when an edge list does not describe a radial network."""


@dataclass(frozen=True)
class Edge:
    """Distribution line between buses ``a`` and ``b`` (p.u. impedance)."""

    a: int
    b: int
    r: float
    x: float

    @property
    def z(self) -> complex:
        return complex(self.r, self.x)


@dataclass(frozen=True)
class NetworkGraph:
    """Rooted radial network: node 0 is the substation/reference.

    ``parent[a]`` / ``parent_edge[a]`` give the upstream bus and the index
    of the connecting line for every non-reference bus; ``tree_id[a]``
    identifies the feeder (subtree hanging off node 0) a bus belongs to.
    ``labels`` preserves the original bus names after dense relabeling.
    """

    edges: tuple[Edge, ...]
    n_nodes: int
    labels: tuple[str, ...]
    parent: tuple[int, ...] = field(repr=False)
    parent_edge: tuple[int, ...] = field(repr=False)
    tree_id: tuple[int, ...] = field(repr=False)

    @property
    def n(self) -> int:
        """Number of non-reference buses (reduced-matrix dimension)."""
        return self.n_nodes - 1

    @property
    def resistances(self) -> np.ndarray:
        return np.array([e.r for e in self.edges])

    @property
    def reactances(self) -> np.ndarray:
        return np.array([e.x for e in self.edges])

    @property
    def impedances(self) -> np.ndarray:
        return np.array([e.z for e in self.edges])

    @staticmethod
    def from_edges(
        edges: list[tuple[int, int, float, float]],
        labels: list[str] | None = None,
    ) -> "NetworkGraph":
        """Validate and build a radial network from ``(a, b, r, x)`` tuples.

        Node ids must already be dense integers 0..N.  Raises
        NetworkStructureError for self-loops, duplicates, cycles,
        disconnected buses or a missing reference node, and ValueError for
        nonpositive resistance or negative reactance.
        """
        edge_objs = []
        seen = set()
        max_node = 0
        for a, b, r, x in edges:
            a, b = int(a), int(b)
            if a == b:
                raise NetworkStructureError(f"self-loop at node {a}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise NetworkStructureError(f"duplicate edge ({a}, {b})")
            seen.add(key)
            if a < 0 or b < 0:
                raise NetworkStructureError(f"negative node id in edge ({a}, {b})")
            if r <= 0:
                raise ValueError(f"edge ({a}, {b}): resistance must be > 0, got {r}")
            if x < 0:
                raise ValueError(f"edge ({a}, {b}): reactance must be >= 0, got {x}")
            edge_objs.append(Edge(a, b, float(r), float(x)))
            max_node = max(max_node, a, b)

        n_nodes = max_node + 1 if edge_objs else 1
        if labels is None:
            labels = [str(i) for i in range(n_nodes)]
        if len(labels) != n_nodes:
            raise ValueError(f"expected {n_nodes} labels, got {len(labels)}")

        # Radiality: every non-reference node reachable from node 0 and
        # edge count equal to non-reference node count.
        adjacency: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n_nodes)}
        for idx, e in enumerate(edge_objs):
            adjacency[e.a].append((e.b, idx))
            adjacency[e.b].append((e.a, idx))

        parent = [-1] * n_nodes
        parent_edge = [-1] * n_nodes
        tree_id = [-1] * n_nodes
        visited = [False] * n_nodes
        visited[0] = True
        stack: list[int] = []
        for feeder, (child, eidx) in enumerate(adjacency[0]):
            parent[child] = 0
            parent_edge[child] = eidx
            tree_id[child] = feeder
            visited[child] = True
            stack.append(child)
            while stack:
                node = stack.pop()
                for nbr, nbr_eidx in adjacency[node]:
                    if nbr_eidx == parent_edge[node]:
                        continue
                    if visited[nbr]:
                        raise NetworkStructureError(
                            f"cycle detected involving node {nbr}"
                        )
                    parent[nbr] = node
                    parent_edge[nbr] = nbr_eidx
                    tree_id[nbr] = tree_id[node]
                    visited[nbr] = True
                    stack.append(nbr)

        for node in range(n_nodes):
            if not visited[node]:
                raise NetworkStructureError(
                    f"node {node} has no path to the reference node 0"
                )
        if len(edge_objs) != n_nodes - 1:
            raise NetworkStructureError(
                f"{len(edge_objs)} edges for {n_nodes} nodes: not radial"
            )

        return NetworkGraph(
            edges=tuple(edge_objs),
            n_nodes=n_nodes,
            labels=tuple(labels),
            parent=tuple(parent),
            parent_edge=tuple(parent_edge),
            tree_id=tuple(tree_id),
        )

    def validate_node(self, a: int) -> None:
        if not 0 <= a < self.n_nodes:
            raise KeyError(f"unknown node id {a}")


@dataclass(frozen=True)
class IncidenceMatrix:
    """Edge-to-node incidence matrix, full and reference-reduced forms.

    Each full row carries +1 at the lower-id endpoint and -1 at the
    higher-id endpoint of its edge; the reduced form drops the reference
    column and is square and invertible on a connected tree.
    """

    full: np.ndarray
    reduced: np.ndarray


@dataclass(frozen=True)
class WeightedLaplacian:
    """Reduced weighted Laplacian M^T diag(w) M and its pre-reduction form."""

    matrix: np.ndarray
    full: np.ndarray
    kind: str


def build_incidence(graph: NetworkGraph) -> IncidenceMatrix:
    """Assemble the incidence matrix, one row per edge in input order."""
    m = len(graph.edges)
    full = np.zeros((m, graph.n_nodes))
    for i, e in enumerate(graph.edges):
        lo, hi = min(e.a, e.b), max(e.a, e.b)
        full[i, lo] = 1.0
        full[i, hi] = -1.0
    reduced = full[:, 1:].copy()
    return IncidenceMatrix(full=full, reduced=reduced)


_KINDS = ("1/r", "1/x", "g", "beta")


def weighted_laplacian(
    incidence: IncidenceMatrix, weights: np.ndarray, kind: str
) -> WeightedLaplacian:
    """Form M^T diag(weights) M for positive per-edge weights.

    ``kind`` documents the weight semantics: "1/r", "1/x", "g" or "beta".
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown weight kind {kind!r}; expected one of {_KINDS}")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (incidence.full.shape[0],):
        raise ValueError(
            f"expected {incidence.full.shape[0]} weights, got {weights.shape}"
        )
    if np.any(weights <= 0):
        raise ValueError("all Laplacian weights must be > 0")
    reduced = incidence.reduced.T @ (weights[:, None] * incidence.reduced)
    full = incidence.full.T @ (weights[:, None] * incidence.full)
    return WeightedLaplacian(matrix=reduced, full=full, kind=kind)


def reduced_laplacian(graph: NetworkGraph, kind: str) -> np.ndarray:
    """Reduced weighted Laplacian for one of the standard edge weightings.

    "1/r" and "1/x" use inverse resistance/reactance weights (the pair
    whose inverses carry the common-path sums); "g" and "beta" use line
    conductance r/(r^2+x^2) and susceptance x/(r^2+x^2).
    """
    r = graph.resistances
    x = graph.reactances
    if kind == "1/r":
        weights = 1.0 / r
    elif kind == "1/x":
        if np.any(x <= 0):
            raise ValueError("reactance-weighted Laplacian needs x > 0 on every edge")
        weights = 1.0 / x
    elif kind == "g":
        weights = r / (r**2 + x**2)
    elif kind == "beta":
        weights = x / (r**2 + x**2)
    else:
        raise ValueError(f"unknown Laplacian kind {kind!r}")
    if len(graph.edges) == 0:
        return np.zeros((0, 0))
    return weighted_laplacian(build_incidence(graph), weights, kind).matrix


def path_to_reference(graph: NetworkGraph, a: int) -> list[Edge]:
    """Unique edge sequence from node ``a`` down to the reference node.

    Returns the empty list for the reference node itself.
    """
    graph.validate_node(a)
    path = []
    node = a
    while node != 0:
        path.append(graph.edges[graph.parent_edge[node]])
        node = graph.parent[node]
    return path


def common_path_weight(graph: NetworkGraph, a: int, b: int, kind: str = "resistance") -> float:
    """Summed resistance (or reactance) of the lines shared by the two
    nodes' paths to the reference.

    Zero when the nodes sit on different feeders or either is the
    reference: disjoint paths share no lines.
    """
    graph.validate_node(a)
    graph.validate_node(b)
    if kind not in ("resistance", "reactance"):
        raise ValueError(f"kind must be 'resistance' or 'reactance', got {kind!r}")
    if a == 0 or b == 0:
        return 0.0
    if graph.tree_id[a] != graph.tree_id[b]:
        return 0.0
    path_a = {(min(e.a, e.b), max(e.a, e.b)) for e in path_to_reference(graph, a)}
    total = 0.0
    for e in path_to_reference(graph, b):
        if (min(e.a, e.b), max(e.a, e.b)) in path_a:
            total += e.r if kind == "resistance" else e.x
    return total


def common_path_matrix(graph: NetworkGraph, kind: str = "resistance") -> np.ndarray:
    """N x N matrix of pairwise common-path weights over non-reference nodes."""
    n = graph.n
    weights = graph.resistances if kind == "resistance" else graph.reactances
    if kind not in ("resistance", "reactance"):
        raise ValueError(f"kind must be 'resistance' or 'reactance', got {kind!r}")
    # Depth-first accumulation: the common path of a and b is the path from
    # the reference down to their deepest shared ancestor, so the matrix is
    # W[a, b] = cum[lca(a, b)] with cum the root-to-node weight sum.
    cum = np.zeros(graph.n_nodes)
    order = sorted(range(1, graph.n_nodes), key=lambda v: len(path_to_reference(graph, v)))
    for node in order:
        cum[node] = cum[graph.parent[node]] + weights[graph.parent_edge[node]]
    out = np.zeros((n, n))
    for a in range(1, graph.n_nodes):
        for b in range(a, graph.n_nodes):
            if graph.tree_id[a] != graph.tree_id[b]:
                continue
            anc = _lowest_common_ancestor(graph, a, b)
            out[a - 1, b - 1] = out[b - 1, a - 1] = cum[anc]
    return out


def _lowest_common_ancestor(graph: NetworkGraph, a: int, b: int) -> int:
    seen = set()
    node = a
    while node != -1:
        seen.add(node)
        node = graph.parent[node]
    node = b
    while node not in seen:
        node = graph.parent[node]
    return node


def nodal_admittance(graph: NetworkGraph) -> np.ndarray:
    """Reduced complex nodal admittance matrix from edge admittances 1/z."""
    z = graph.impedances
    if np.any(z == 0):
        raise ValueError("zero impedance edge")
    if len(graph.edges) == 0:
        return np.zeros((0, 0), dtype=complex)
    inc = build_incidence(graph)
    m = inc.reduced.astype(complex)
    return m.T @ ((1.0 / z)[:, None] * m)


# ---------------------------------------------------------------------------
# Synthetic network builders
# ---------------------------------------------------------------------------


def chain_network(n_nodes: int, r: float | np.ndarray = 0.01, x: float | np.ndarray = 0.02) -> NetworkGraph:
    """Radial chain 0-1-...-(n_nodes-1) with per-edge impedances."""
    if n_nodes < 1:
        raise ValueError("chain needs at least the reference node")
    r_arr = np.broadcast_to(np.asarray(r, dtype=float), (n_nodes - 1,))
    x_arr = np.broadcast_to(np.asarray(x, dtype=float), (n_nodes - 1,))
    edges = [(i, i + 1, float(r_arr[i]), float(x_arr[i])) for i in range(n_nodes - 1)]
    return NetworkGraph.from_edges(edges)


def star_network(n_nodes: int, r: float | np.ndarray = 0.01, x: float | np.ndarray = 0.02) -> NetworkGraph:
    """All non-reference buses attached directly to the substation."""
    if n_nodes < 1:
        raise ValueError("star needs at least the reference node")
    r_arr = np.broadcast_to(np.asarray(r, dtype=float), (n_nodes - 1,))
    x_arr = np.broadcast_to(np.asarray(x, dtype=float), (n_nodes - 1,))
    edges = [(0, i + 1, float(r_arr[i]), float(x_arr[i])) for i in range(n_nodes - 1)]
    return NetworkGraph.from_edges(edges)


def random_tree_network(
    n_nodes: int,
    rng: np.random.Generator,
    r_range: tuple[float, float] = (0.005, 0.05),
    x_range: tuple[float, float] = (0.01, 0.1),
) -> NetworkGraph:
    """Random radial network grown by uniform attachment to existing buses."""
    if n_nodes < 1:
        raise ValueError("network needs at least the reference node")
    edges = []
    for node in range(1, n_nodes):
        parent = int(rng.integers(0, node))
        r = float(rng.uniform(*r_range))
        x = float(rng.uniform(*x_range))
        edges.append((parent, node, r, x))
    return NetworkGraph.from_edges(edges)
