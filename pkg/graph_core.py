"""Graph construction and the classical matrices: degree, Laplacian and the consensus matrix."""
import logging

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from config import CONSENSUS_STEP_FACTOR, MAX_GRAPH_ATTEMPTS
from models import (
    ConsensusMatrix,
    DegreeMatrix,
    DisconnectedGraphError,
    Graph,
    IrreducibilityError,
)

logger = logging.getLogger(__name__)


def is_connected(adjacency):
    """True when the undirected graph has a single connected component."""
    n_components, _ = connected_components(np.asarray(adjacency) > 0, directed=False)
    return n_components == 1


def build_knn_graph(coords, k, seed=None):
    """Binary k-NN graph with union symmetrization.

    Ties in Euclidean distance go to the lower node index (stable sort).
    Raises DisconnectedGraphError so the caller can draw fresh coordinates.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise ValueError(f"Expected an (n, 2) array of coordinates, got shape {coords.shape}.")
    if not np.all(np.isfinite(coords)):
        raise ValueError("Coordinates must be finite.")
    n_nodes = coords.shape[0]
    if not 1 <= k < n_nodes:
        raise ValueError(f"k must satisfy 1 <= k < n_nodes, got k={k} with n_nodes={n_nodes}.")

    distances = cdist(coords, coords)
    # Self-distance is zero; push it past every neighbour so it is never selected
    np.fill_diagonal(distances, np.inf)
    order = np.argsort(distances, axis=1, kind="stable")[:, :k]

    adjacency = np.zeros((n_nodes, n_nodes))
    rows = np.repeat(np.arange(n_nodes), k)
    adjacency[rows, order.ravel()] = 1.0
    adjacency = np.maximum(adjacency, adjacency.T)

    if not is_connected(adjacency):
        raise DisconnectedGraphError()
    return Graph(n_nodes=n_nodes, coords=coords, adjacency=adjacency, k=k, seed=seed)


def sample_knn_graph(n_nodes, k, rng, seed=None, max_attempts=MAX_GRAPH_ATTEMPTS):
    """Scatter sensors uniformly in the unit square and build a connected k-NN graph."""
    for attempt in range(1, max_attempts + 1):
        coords = rng.uniform(0.0, 1.0, size=(n_nodes, 2))
        try:
            return build_knn_graph(coords, k, seed=seed)
        except DisconnectedGraphError:
            logger.warning(f"Disconnected {k}-NN draw on {n_nodes} nodes (attempt {attempt}), resampling")
    raise DisconnectedGraphError(
        f"disconnected graph: no connected {k}-NN graph on {n_nodes} nodes after {max_attempts} draws"
    )


def degree_matrix(g):
    return DegreeMatrix(diag=g.adjacency.sum(axis=1))


def laplacian(g):
    """L = D - A."""
    return degree_matrix(g).as_matrix() - g.adjacency


def consensus_matrix(g):
    """Z = I - eps*L with eps = 1 / (1.25 * max degree)."""
    if not is_connected(g.adjacency):
        raise IrreducibilityError()
    max_degree = g.max_degree
    if max_degree <= 0:
        raise IrreducibilityError("irreducibility violated: graph has no edges")
    epsilon = 1.0 / (CONSENSUS_STEP_FACTOR * max_degree)
    entries = np.eye(g.n_nodes) - epsilon * laplacian(g)
    return ConsensusMatrix(entries=entries, epsilon=epsilon)


# --- Edge-list serialization ---

def write_edge_list(g, path):
    """Header `n_nodes k seed`, then `i j weight` per edge (i < j), then `coord i x y`."""
    k = "-" if g.k is None else g.k
    seed = "-" if g.seed is None else g.seed
    lines = [f"{g.n_nodes} {k} {seed}"]
    rows, cols = np.nonzero(np.triu(g.adjacency, 1))
    for i, j in zip(rows, cols):
        lines.append(f"{i} {j} {float(g.adjacency[i, j])!r}")
    for i, (x, y) in enumerate(g.coords):
        lines.append(f"coord {i} {float(x)!r} {float(y)!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_edge_list(path):
    """Inverse of write_edge_list."""
    with open(path) as fh:
        lines = [line.split() for line in fh if line.strip()]
    if not lines or len(lines[0]) != 3:
        raise ValueError(f"Malformed edge-list header in {path}")
    n_nodes = int(lines[0][0])
    k = None if lines[0][1] == "-" else int(lines[0][1])
    seed = None if lines[0][2] == "-" else int(lines[0][2])

    adjacency = np.zeros((n_nodes, n_nodes))
    coords = np.zeros((n_nodes, 2))
    for parts in lines[1:]:
        if parts[0] == "coord":
            coords[int(parts[1])] = (float(parts[2]), float(parts[3]))
        else:
            i, j, weight = int(parts[0]), int(parts[1]), float(parts[2])
            adjacency[i, j] = adjacency[j, i] = weight
    return Graph(n_nodes=n_nodes, coords=coords, adjacency=adjacency, k=k, seed=seed)
