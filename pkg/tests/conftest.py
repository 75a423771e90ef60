import os
import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from datagen import make_rng, write_station_csv
from graph_core import sample_knn_graph
from models import Graph, StationSeries

# --- Common Fixtures for Graphs ---

@pytest.fixture(scope='session') # Scope to session as graphs are read-only
def path_graph():
    """Four sensors on a line, joined 0-1-2-3."""
    adjacency = np.zeros((4, 4))
    for i in range(3):
        adjacency[i, i + 1] = adjacency[i + 1, i] = 1.0
    coords = np.column_stack([np.arange(4.0), np.zeros(4)])
    return Graph(n_nodes=4, coords=coords, adjacency=adjacency)


@pytest.fixture(scope='session')
def triangle_graph():
    adjacency = np.ones((3, 3)) - np.eye(3)
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]])
    return Graph(n_nodes=3, coords=coords, adjacency=adjacency)


@pytest.fixture(scope='session')
def random_graphs():
    """100 connected k-NN graphs, n in [5, 30], k in {3, 6} (k = 3 when n is too small for 6)."""
    rng = make_rng(20240611)
    graphs = []
    for _ in range(100):
        n_nodes = int(rng.integers(5, 31))
        k = int(rng.choice([3, 6]))
        if k >= n_nodes - 1:
            k = 3
        graphs.append(sample_knn_graph(n_nodes, k, rng))
    return graphs


@pytest.fixture(scope='session')
def small_graphs():
    """Graphs with at most 8 nodes, for brute-force oracles."""
    rng = make_rng(7)
    graphs = []
    for n_nodes in range(3, 9):
        for k in (2, 3):
            if k < n_nodes:
                graphs.append(sample_knn_graph(n_nodes, k, rng))
    return graphs


# --- Station data ---

def _synthetic_station_series(n_dates=400, seed=3):
    """Ten stations on a 2x5 grid inside the default bounding box plus one far north."""
    rng = make_rng(seed)
    lats = [35.0, 38.0]
    lons = [-115.0, -112.0, -109.0, -106.0, -103.0]
    coords = [(lat, lon) for lat in lats for lon in lons] + [(60.0, -150.0)]
    ids = tuple(f"ST{i:02d}" for i in range(len(coords)))
    days = np.arange(n_dates)
    seasonal = 55.0 + 20.0 * np.sin(2 * np.pi * days / 365.0)
    offsets = rng.uniform(-5.0, 5.0, size=len(coords))
    samples = seasonal[:, None] + offsets[None, :] + rng.normal(0.0, 2.0, size=(n_dates, len(coords)))
    samples[[10, 50, 51], 4] = np.nan
    dates = tuple(f"D{d:04d}" for d in days)
    return StationSeries(station_ids=ids, coords=np.array(coords), dates=dates, samples=samples, unit="F")


@pytest.fixture(scope='session')
def station_csv(tmp_path_factory):
    """Fahrenheit station CSV: 11 stations, 400 dates, 3 incomplete rows."""
    path = tmp_path_factory.mktemp("stations") / "stations.csv"
    write_station_csv(_synthetic_station_series(), path, unit="F")
    return path
