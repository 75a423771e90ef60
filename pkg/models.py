"""Domain types shared by every module, plus the package's exception classes."""
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

import numpy as np


# --- Exceptions ---

class DisconnectedGraphError(ValueError):
    """Raised when a k-NN draw does not produce a connected graph."""

    def __init__(self, message="disconnected graph"):
        super().__init__(message)


class IrreducibilityError(ValueError):
    def __init__(self, message="irreducibility violated"):
        super().__init__(message)


class UemParameterError(ValueError):
    pass


class NonSymmetricGsoError(ValueError):
    def __init__(self, message="non-symmetric GSO"):
        super().__init__(message)


class SignalLengthError(ValueError):
    pass


class UnknownGsoKindError(ValueError):
    pass


class DetectorError(ValueError):
    pass


class StationFormatError(ValueError):
    pass


class ConfigError(ValueError):
    pass


def _frozen_array(values, dtype=float):
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


# --- graph_core ---

@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph on sensors with 2-D positions.

    `k` and `seed` are construction metadata, carried into the edge-list header.
    """
    n_nodes: int
    coords: np.ndarray
    adjacency: np.ndarray
    k: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        coords = _frozen_array(self.coords)
        adjacency = _frozen_array(self.adjacency)
        if self.n_nodes < 1:
            raise ValueError("Graph needs at least one node.")
        if coords.shape != (self.n_nodes, 2):
            raise ValueError(f"Expected coords of shape ({self.n_nodes}, 2), got {coords.shape}.")
        if adjacency.shape != (self.n_nodes, self.n_nodes):
            raise ValueError(f"Expected a {self.n_nodes}x{self.n_nodes} adjacency, got {adjacency.shape}.")
        if not np.array_equal(adjacency, adjacency.T):
            raise ValueError("Adjacency must be symmetric.")
        if np.any(np.diag(adjacency) != 0):
            raise ValueError("Adjacency must have a zero diagonal (no self-loops).")
        if np.any(adjacency < 0):
            raise ValueError("Adjacency entries must be nonnegative.")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "adjacency", adjacency)

    @property
    def degrees(self):
        return self.adjacency.sum(axis=1)

    @property
    def max_degree(self):
        return float(self.degrees.max())


@dataclass(frozen=True, eq=False)
class DegreeMatrix:
    diag: np.ndarray

    def as_matrix(self):
        return np.diag(self.diag)


@dataclass(frozen=True, eq=False)
class ConsensusMatrix:
    """Symmetric doubly stochastic matrix Z = I - eps*L."""
    entries: np.ndarray
    epsilon: float

    @property
    def n_nodes(self):
        return self.entries.shape[0]


# --- diffusion ---

@dataclass(frozen=True, eq=False)
class DiffusionDistances:
    t: int
    d2: np.ndarray


@dataclass(frozen=True, eq=False)
class ExtendedMatrices:
    t: int
    rho: float
    a_bar: np.ndarray
    d_bar: np.ndarray
    l_bar: np.ndarray

    @property
    def n_nodes(self):
        return self.a_bar.shape[0]


# --- uem ---

@dataclass(frozen=True)
class UemParams:
    m: float
    n: float
    t: int
    rho: float

    def __post_init__(self):
        if not (0.0 <= self.m <= 1.0) or not (0.0 <= self.n <= 1.0):
            raise UemParameterError(f"invalid UEM parameter: m={self.m}, n={self.n} (both must lie in [0, 1])")
        if self.t < 1:
            raise UemParameterError(f"invalid UEM parameter: diffusion scale t={self.t} must be >= 1")
        if self.rho <= 0:
            raise UemParameterError(f"invalid UEM parameter: rho={self.rho} must be positive")


@dataclass(frozen=True, eq=False)
class UemMatrix:
    params: UemParams
    entries: np.ndarray


# --- spectral ---

@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Ascending eigenvalues with orthonormal eigenvectors (column l pairs with eigenvalue l)."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    source: str = ""

    @property
    def n_nodes(self):
        return self.eigenvalues.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    values: np.ndarray

    def __len__(self):
        return self.values.shape[0]


# --- gso_zoo ---

@dataclass(frozen=True)
class GsoSpec:
    kind: str
    t: Optional[int] = None
    rho: Optional[float] = None
    max_hops: Optional[int] = None
    m: Optional[float] = None
    n: Optional[float] = None


# --- detector ---

class Label(IntEnum):
    HEALTHY = 0
    ANOMALOUS = 1


@dataclass(frozen=True, eq=False)
class DetectorModel:
    basis: SpectralBasis
    lambda_cut: float
    beta: float
    tau: float


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Signals as rows of an (n_samples, n_nodes) array with 0/1 labels."""
    signals: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        signals = _frozen_array(self.signals)
        labels = _frozen_array(self.labels, dtype=int)
        if signals.ndim != 2:
            raise ValueError("Signals must be a 2-D array (one signal per row).")
        if signals.shape[0] != labels.shape[0]:
            raise ValueError(f"{signals.shape[0]} signals but {labels.shape[0]} labels.")
        object.__setattr__(self, "signals", signals)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.labels.shape[0]

    @property
    def healthy(self):
        return self.signals[self.labels == Label.HEALTHY]

    @property
    def anomalous(self):
        return self.signals[self.labels == Label.ANOMALOUS]

    def subset(self, index):
        return LabeledDataset(self.signals[index], self.labels[index])


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn


# --- datagen ---

@dataclass(frozen=True)
class WaveSignalState:
    theta_x: float = 0.0
    theta_y: float = 0.0


@dataclass(frozen=True)
class AnomalySpec:
    b_max: float
    noise_variance: float
    max_anomalous_sensors: int

    def __post_init__(self):
        if self.b_max < 1:
            raise ValueError(f"b_max must be >= 1, got {self.b_max}")
        if self.noise_variance <= 0:
            raise ValueError(f"noise_variance must be positive, got {self.noise_variance}")
        if self.max_anomalous_sensors < 1:
            raise ValueError(f"max_anomalous_sensors must be >= 1, got {self.max_anomalous_sensors}")


@dataclass(frozen=True, eq=False)
class StationSeries:
    """Station time series; samples has one row per date and one column per station."""
    station_ids: tuple
    coords: np.ndarray
    dates: tuple
    samples: np.ndarray
    unit: str = "C"

    @property
    def n_stations(self):
        return len(self.station_ids)


# --- experiments ---

@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_nodes: int
    k: int
    runs: int
    seed: int
    output_dir: str
    gso_kinds: tuple
    lambda_cut_quantiles: tuple
    betas: tuple
    rhos: tuple
    ms: tuple
    ns: tuple
    ts: tuple
    folds: int = 5
    train_healthy: int = 0
    train_anomalous: int = 0
    test_healthy: int = 0
    test_anomalous: int = 0
    low: float = -15.0
    high: float = 15.0
    anomaly: Optional[AnomalySpec] = None
    station_csv: Optional[str] = None
    bbox: Optional[tuple] = None
    n_samples: int = 0
    sampling: str = "random"
    fig1_rho: float = 0.4
    fig1_n: float = 1.0
    export_grid: bool = False
    workers: int = 1
