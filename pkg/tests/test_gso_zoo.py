from collections import deque

import numpy as np
import pytest

from diffusion import extended_adjacency
from graph_core import consensus_matrix, laplacian
from gso_zoo import basis_factory, baseline_spec, build_gso, shortest_path_gso, structure_grid
from models import GsoSpec, UnknownGsoKindError


def _hops_by_bfs(adjacency):
    n_nodes = adjacency.shape[0]
    hops = np.full((n_nodes, n_nodes), np.inf)
    for source in range(n_nodes):
        hops[source, source] = 0
        queue = deque([source])
        while queue:
            node = queue.popleft()
            for other in np.flatnonzero(adjacency[node]):
                if hops[source, other] == np.inf:
                    hops[source, other] = hops[source, node] + 1
                    queue.append(other)
    return hops


def test_shortest_path_matches_bfs_oracle(small_graphs):
    for g in small_graphs:
        hops = _hops_by_bfs(g.adjacency)
        for max_hops in (1, 2, 3):
            expected = np.where((hops >= 1) & (hops <= max_hops), 1.0 / np.maximum(hops, 1), 0.0)
            np.testing.assert_allclose(shortest_path_gso(g, max_hops), expected, rtol=0, atol=1e-12)


def test_one_hop_is_adjacency(random_graphs):
    for g in random_graphs[:20]:
        np.testing.assert_array_equal(shortest_path_gso(g, 1), g.adjacency)


def test_path_two_hops(path_graph):
    gso = shortest_path_gso(path_graph, 2)
    assert gso[0, 2] == 0.5 and gso[0, 3] == 0.0 and gso[0, 1] == 1.0


def test_half_laplacian_uem_matches_extended_laplacian(random_graphs):
    for g in random_graphs[:20]:
        b = consensus_matrix(g)
        for t in (1, 2):
            ext = extended_adjacency(b, t, 0.4)
            df = build_gso(g, baseline_spec("df1" if t == 1 else "df2", rho=0.4), consensus=b, extended=ext)
            uem = build_gso(g, baseline_spec("uem", rho=0.4, m=0.5, n=1.0, t=t), consensus=b, extended=ext)
            np.testing.assert_array_equal(2 * uem, df)


def test_half_laplacian_basis_is_bit_identical(random_graphs):
    """Halving a matrix halves its eigenvalues exactly and keeps the eigenvectors."""
    g = random_graphs[5]
    df_basis = basis_factory(g, "df2")({"rho": 0.7})
    uem_basis = basis_factory(g, "uem")({"rho": 0.7, "m": 0.5, "n": 1.0, "t": 2})
    np.testing.assert_array_equal(uem_basis.eigenvectors, df_basis.eigenvectors)
    np.testing.assert_array_equal(2 * uem_basis.eigenvalues, df_basis.eigenvalues)


def test_classical_kinds(path_graph):
    np.testing.assert_array_equal(build_gso(path_graph, baseline_spec("gft")), laplacian(path_graph))
    np.testing.assert_array_equal(
        build_gso(path_graph, baseline_spec("mrk")), consensus_matrix(path_graph).entries
    )
    assert baseline_spec("sp3") == GsoSpec(kind="shortest_path", max_hops=3)


def test_unknown_kind():
    with pytest.raises(UnknownGsoKindError):
        baseline_spec("wavelet")
    with pytest.raises(UnknownGsoKindError):
        structure_grid("wavelet", (0.4,))


def test_build_rejects_unknown_kind_before_building(path_graph):
    with pytest.raises(UnknownGsoKindError, match="wavelet"):
        build_gso(path_graph, GsoSpec(kind="wavelet"))


def test_structure_grid_sizes():
    rhos = tuple(i / 10 for i in range(1, 11))
    grid = tuple(i / 10 for i in range(11))
    assert structure_grid("gft", rhos) == [{}]
    assert len(structure_grid("df1", rhos)) == 10
    uem = structure_grid("uem", rhos, grid, grid, (1, 2))
    assert len(uem) == 10 * 11 * 11 * 2
    assert uem[0] == {"rho": 0.1, "m": 0.0, "n": 0.0, "t": 1}
    assert uem[1] == {"rho": 0.1, "m": 0.0, "n": 0.0, "t": 2}


def test_basis_factory_labels_its_source(path_graph):
    basis = basis_factory(path_graph, "sp2")({})
    assert basis.source == "sp2"
    basis = basis_factory(path_graph, "df1")({"rho": 0.4})
    assert basis.source == "df1(rho=0.4)"
