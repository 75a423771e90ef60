"""Symmetric eigendecomposition, the graph Fourier transform and spectral high-pass filtering."""
import logging

import numpy as np
import pandas as pd

from config import SYMMETRY_TOL
from models import NonSymmetricGsoError, SignalLengthError, SpectralBasis, SpectralCoefficients

logger = logging.getLogger(__name__)


def decompose(gso, source=""):
    """Orthonormal eigenbasis of a symmetric GSO, eigenvalues ascending.

    Each eigenvector's sign is fixed so its largest-magnitude entry is positive
    (lowest index on ties), which makes spectra reproducible across platforms.
    """
    gso = np.asarray(gso, dtype=float)
    if gso.ndim != 2 or gso.shape[0] != gso.shape[1]:
        raise NonSymmetricGsoError(f"non-symmetric GSO: expected a square matrix, got shape {gso.shape}")
    if np.max(np.abs(gso - gso.T), initial=0.0) > SYMMETRY_TOL:
        raise NonSymmetricGsoError()

    eigenvalues, eigenvectors = np.linalg.eigh(gso)
    pivots = np.argmax(np.abs(eigenvectors), axis=0)
    signs = np.where(eigenvectors[pivots, np.arange(eigenvectors.shape[1])] < 0, -1.0, 1.0)
    eigenvectors = eigenvectors * signs
    return SpectralBasis(eigenvalues=eigenvalues, eigenvectors=eigenvectors, source=source)


def _check_length(basis, length):
    if length != basis.n_nodes:
        raise SignalLengthError(f"Signal has {length} entries but the basis spans {basis.n_nodes} nodes.")


def gft(basis, x):
    """x_hat = U^T x."""
    x = np.asarray(x, dtype=float)
    _check_length(basis, x.shape[0])
    return SpectralCoefficients(values=basis.eigenvectors.T @ x)


def gft_batch(basis, signals):
    """GFT of every row of an (n_signals, n_nodes) array."""
    signals = np.asarray(signals, dtype=float)
    _check_length(basis, signals.shape[1])
    return signals @ basis.eigenvectors


def igft(basis, coeffs):
    """x = U x_hat."""
    _check_length(basis, len(coeffs))
    return basis.eigenvectors @ coeffs.values


def highpass_filter(basis, coeffs, lambda_cut):
    """Keep coefficients whose eigenvalue is strictly above lambda_cut."""
    _check_length(basis, len(coeffs))
    kept = np.where(basis.eigenvalues > lambda_cut, coeffs.values, 0.0)
    return SpectralCoefficients(values=kept)


def relative_cut(basis, quantile):
    """Absolute cut at a relative position of the eigenvalue range [min, max]."""
    low, high = basis.eigenvalues[0], basis.eigenvalues[-1]
    return low + quantile * (high - low)


def spectrum_frame(basis, coeffs):
    """Two-column (eigenvalue, coefficient) table for spectrum plots."""
    _check_length(basis, len(coeffs))
    return pd.DataFrame({"eigenvalue": basis.eigenvalues, "coefficient": coeffs.values})
