"""Diffusion distances over the consensus matrix and the scale-dependent extended matrices."""
import logging

import numpy as np
from scipy.spatial.distance import cdist

from models import DiffusionDistances, ExtendedMatrices

logger = logging.getLogger(__name__)


def transition_power(b, t):
    """B^t by repeated multiplication (B^0 = I)."""
    if t < 0:
        raise ValueError(f"Diffusion scale must be nonnegative, got t={t}")
    entries = b.entries
    result = np.eye(entries.shape[0])
    for _ in range(t):
        result = result @ entries
    return result


def diffusion_distances(b, t):
    """Squared diffusion distances D_t^2(i, j) = N * sum_n (B^t[i, n] - B^t[j, n])^2."""
    power = transition_power(b, t)
    n_nodes = power.shape[0]
    d2 = n_nodes * cdist(power, power, metric="sqeuclidean")
    np.fill_diagonal(d2, 0.0)
    return DiffusionDistances(t=t, d2=d2)


def extended_adjacency(b, t, rho):
    """Extended adjacency A(t) = B + exp(-D_t^2 / (rho N)) off the diagonal, with D(t) and L(t)."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if t < 1:
        raise ValueError(f"Extended matrices need t >= 1, got t={t}")
    n_nodes = b.n_nodes
    d2 = diffusion_distances(b, t).d2
    a_bar = b.entries + np.exp(-d2 / (rho * n_nodes))
    np.fill_diagonal(a_bar, 0.0)
    d_bar = np.diag(a_bar.sum(axis=1))
    l_bar = d_bar - a_bar
    logger.debug(f"Extended matrices built for t={t}, rho={rho} on {n_nodes} nodes")
    return ExtendedMatrices(t=t, rho=rho, a_bar=a_bar, d_bar=d_bar, l_bar=l_bar)
