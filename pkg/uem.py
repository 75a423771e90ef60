"""The unified extended matrix family and the predicates behind its PSD and monotonicity properties.

    P(m, n; t) = m * D(t) + (2n - 1)(m - 1) * A(t),    m, n in [0, 1]

Degenerate members: P(0, 0) = A(t), 2 P(0.5, 1) = L(t), P(1, n) = D(t).
"""
import itertools
import logging

import numpy as np

from config import M_GRID, N_GRID
from models import UemMatrix, UemParameterError, UemParams

logger = logging.getLogger(__name__)


def _check_unit_interval(**values):
    for name, value in values.items():
        if not 0.0 <= value <= 1.0:
            raise UemParameterError(f"invalid UEM parameter: {name}={value} is outside [0, 1]")


def build_uem(ext, m, n):
    """P(m, n) = m D + (2n - 1)(m - 1) A over the extended matrices."""
    _check_unit_interval(m=m, n=n)
    params = UemParams(m=m, n=n, t=ext.t, rho=ext.rho)
    entries = m * ext.d_bar + (2 * n - 1) * (m - 1) * ext.a_bar
    return UemMatrix(params=params, entries=entries)


def psd_condition_holds(m, n):
    """Sufficient PSD condition (2m-1)/(2(m-1)) <= n <= 1/(2(1-m)).

    At m = 1 both denominators vanish; P(1, n) = D(t) is PSD, so the condition holds.
    """
    _check_unit_interval(m=m, n=n)
    if m == 1.0:
        return True
    lower = (2 * m - 1) / (2 * (m - 1))
    upper = 1 / (2 * (1 - m))
    return lower <= n <= upper


def weyl_gap_matrix(ext, n):
    """M(t) = D(t) - (2n - 1) A(t); PSD for every n in [0, 1]."""
    _check_unit_interval(n=n)
    return ext.d_bar - (2 * n - 1) * ext.a_bar


def m_increment_matrix(ext, n):
    """D(t) + (2n - 1) A(t), so that P(m', n) - P(m, n) = (m' - m) times this matrix.

    Equals weyl_gap_matrix(ext, 1 - n).
    """
    _check_unit_interval(n=n)
    return ext.d_bar + (2 * n - 1) * ext.a_bar


def uem_lattice(ms=M_GRID, ns=N_GRID):
    """(m, n) pairs in lattice order, m outer."""
    return list(itertools.product(ms, ns))


def eigencurves(ext, n, ms=M_GRID):
    """Sorted eigenvalues of P(m, n; t) for every m, one row per m."""
    curves = np.empty((len(ms), ext.n_nodes))
    for row, m in enumerate(ms):
        curves[row] = np.linalg.eigvalsh(build_uem(ext, m, n).entries)
    return curves


def min_eigenvalue(matrix):
    return float(np.linalg.eigvalsh(matrix)[0])
