import unittest

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from config import FIG1_SETTINGS, M_GRID, N_GRID
from datagen import make_rng
from diffusion import extended_adjacency
from graph_core import consensus_matrix, sample_knn_graph
from models import UemParameterError, UemParams
from uem import (
    build_uem,
    eigencurves,
    m_increment_matrix,
    min_eigenvalue,
    psd_condition_holds,
    uem_lattice,
    weyl_gap_matrix,
)


def _extended(g, t, rho):
    return extended_adjacency(consensus_matrix(g), t, rho)


class TestUemDegeneracies(unittest.TestCase):
    """The lattice corners reproduce the classical extended matrices."""

    def setUp(self):
        rng = make_rng(101)
        self.extended = [
            extended_adjacency(consensus_matrix(sample_knn_graph(n, 3, rng)), t, rho)
            for n in (8, 15, 25) for t in (1, 2) for rho in (0.3, 0.4)
        ]

    def test_adjacency_corner(self):
        for ext in self.extended:
            np.testing.assert_allclose(build_uem(ext, 0.0, 0.0).entries, ext.a_bar, rtol=0, atol=1e-12)

    def test_laplacian_corner(self):
        for ext in self.extended:
            np.testing.assert_allclose(2 * build_uem(ext, 0.5, 1.0).entries, ext.l_bar, rtol=0, atol=1e-12)

    def test_degree_edge(self):
        for ext in self.extended:
            for n in N_GRID:
                np.testing.assert_allclose(build_uem(ext, 1.0, n).entries, ext.d_bar, rtol=0, atol=1e-12)

    def test_params_are_recorded(self):
        ext = self.extended[0]
        uem = build_uem(ext, 0.3, 0.7)
        self.assertEqual(uem.params, UemParams(m=0.3, n=0.7, t=ext.t, rho=ext.rho))

    def test_out_of_range_parameters(self):
        ext = self.extended[0]
        for m, n in ((1.1, 0.5), (-0.1, 0.5), (0.5, 1.5)):
            with self.assertRaises(UemParameterError):
                build_uem(ext, m, n)


class TestPsdCondition(unittest.TestCase):

    def test_condition_examples(self):
        self.assertTrue(psd_condition_holds(0.5, 1.0))
        self.assertTrue(psd_condition_holds(0.0, 0.5))
        self.assertTrue(psd_condition_holds(1.0, 0.0))
        self.assertFalse(psd_condition_holds(0.0, 0.0))
        self.assertFalse(psd_condition_holds(0.2, 1.0))

    def test_condition_implies_psd_over_graph_population(self):
        rng = make_rng(2024)
        checked = 0
        for _ in range(100):
            n_nodes = int(rng.integers(5, 31))
            k = int(rng.choice([3, 6])) if n_nodes > 7 else 3
            b = consensus_matrix(sample_knn_graph(n_nodes, k, rng))
            for t in (1, 2):
                for rho in (0.3, 0.4):
                    ext = extended_adjacency(b, t, rho)
                    lam_max = np.abs(np.linalg.eigvalsh(ext.d_bar)).max()
                    for m, n in uem_lattice():
                        if psd_condition_holds(m, n):
                            lowest = min_eigenvalue(build_uem(ext, m, n).entries)
                            self.assertGreaterEqual(lowest, -1e-8 * (1 + lam_max))
                            checked += 1
        self.assertGreater(checked, 0)


class TestMonotonicityInM(unittest.TestCase):

    def setUp(self):
        self.graph = sample_knn_graph(FIG1_SETTINGS["n_nodes"], FIG1_SETTINGS["k"], make_rng(0))

    def test_eigenvalue_curves_are_nondecreasing(self):
        for t in (1, 2):
            ext = _extended(self.graph, t, FIG1_SETTINGS["rho"])
            curves = eigencurves(ext, FIG1_SETTINGS["n"], M_GRID)
            self.assertEqual(curves.shape, (len(M_GRID), self.graph.n_nodes))
            self.assertGreaterEqual(np.diff(curves, axis=0).min(), -1e-9)

    def test_weyl_gap_is_psd(self):
        ext = _extended(self.graph, 1, 0.4)
        for n in N_GRID:
            self.assertGreaterEqual(min_eigenvalue(weyl_gap_matrix(ext, n)), -1e-10)

    def test_m_increment_is_exact_slope(self):
        ext = _extended(self.graph, 2, 0.4)
        for n in N_GRID:
            for m, m_next in zip(M_GRID[:-1], M_GRID[1:]):
                step = build_uem(ext, m_next, n).entries - build_uem(ext, m, n).entries
                np.testing.assert_allclose(step, (m_next - m) * m_increment_matrix(ext, n), rtol=0, atol=1e-12)
            np.testing.assert_allclose(m_increment_matrix(ext, n), weyl_gap_matrix(ext, 1.0 - n), rtol=0, atol=1e-12)


def test_monotonicity_over_graph_population(random_graphs):
    for g in random_graphs:
        b = consensus_matrix(g)
        for t in (1, 2):
            for rho in (0.3, 0.4):
                ext = extended_adjacency(b, t, rho)
                for n in N_GRID:
                    curves = eigencurves(ext, n, M_GRID)
                    assert np.diff(curves, axis=0).min() >= -1e-9, (g.n_nodes, t, rho, n)


def test_uem_lattice_order():
    lattice = uem_lattice((0.0, 1.0), (0.2, 0.4))
    assert lattice == [(0.0, 0.2), (0.0, 0.4), (1.0, 0.2), (1.0, 0.4)]
    assert len(uem_lattice()) == 121


@pytest.fixture(scope='module')
def fixed_extended(random_graphs):
    return _extended(random_graphs[3], 2, 0.3)


@settings(max_examples=60, deadline=None)
@given(m=st.floats(0.0, 1.0), n=st.floats(0.0, 1.0))
def test_uem_is_symmetric_for_any_parameters(fixed_extended, m, n):
    entries = build_uem(fixed_extended, m, n).entries
    np.testing.assert_allclose(entries, entries.T, atol=1e-12)
    if psd_condition_holds(m, n):
        assert min_eigenvalue(entries) >= -1e-8 * (1 + np.abs(entries).sum(axis=1).max())
