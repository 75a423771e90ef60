import numpy as np
import pytest

from datagen import make_rng
from diffusion import extended_adjacency
from graph_core import consensus_matrix, laplacian
from models import NonSymmetricGsoError, SignalLengthError, SpectralBasis, SpectralCoefficients
from spectral import decompose, gft, gft_batch, highpass_filter, igft, relative_cut, spectrum_frame
from uem import build_uem, psd_condition_holds


def test_two_node_laplacian():
    basis = decompose(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    np.testing.assert_allclose(basis.eigenvalues, [0.0, 2.0], atol=1e-12)
    coeffs = gft(basis, np.array([1.0, 1.0]))
    np.testing.assert_allclose(np.abs(coeffs.values), [np.sqrt(2.0), 0.0], atol=1e-12)


def test_round_trip_and_parseval(random_graphs):
    rng = make_rng(99)
    for g in random_graphs:
        basis = decompose(laplacian(g))
        x = rng.normal(size=g.n_nodes)
        coeffs = gft(basis, x)
        assert np.max(np.abs(igft(basis, coeffs) - x)) <= 1e-8
        assert np.linalg.norm(coeffs.values) == pytest.approx(np.linalg.norm(x), abs=1e-8)


def test_basis_is_orthonormal_and_ascending(random_graphs):
    for g in random_graphs[:25]:
        basis = decompose(laplacian(g))
        assert np.all(np.diff(basis.eigenvalues) >= 0)
        np.testing.assert_allclose(basis.eigenvectors.T @ basis.eigenvectors, np.eye(g.n_nodes), atol=1e-10)


def test_sign_convention(random_graphs):
    basis = decompose(laplacian(random_graphs[1]))
    vectors = basis.eigenvectors
    pivots = np.argmax(np.abs(vectors), axis=0)
    assert np.all(vectors[pivots, np.arange(vectors.shape[1])] > 0)


def test_gft_batch_matches_single(random_graphs):
    g = random_graphs[2]
    basis = decompose(laplacian(g))
    signals = make_rng(4).uniform(size=(5, g.n_nodes))
    batch = gft_batch(basis, signals)
    for row, x in zip(batch, signals):
        np.testing.assert_allclose(row, gft(basis, x).values, atol=1e-12)


def test_rejects_non_symmetric():
    with pytest.raises(NonSymmetricGsoError, match="non-symmetric GSO"):
        decompose(np.array([[0.0, 1.0], [0.5, 0.0]]))
    with pytest.raises(NonSymmetricGsoError):
        decompose(np.zeros((2, 3)))


def test_rejects_wrong_signal_length(path_graph):
    basis = decompose(laplacian(path_graph))
    with pytest.raises(SignalLengthError):
        gft(basis, np.ones(3))


def test_highpass_cut_is_strict():
    basis = SpectralBasis(eigenvalues=np.array([0.0, 1.0, 2.0]), eigenvectors=np.eye(3))
    filtered = highpass_filter(basis, SpectralCoefficients(np.array([3.0, 4.0, 5.0])), 1.0)
    np.testing.assert_array_equal(filtered.values, [0.0, 0.0, 5.0])


def test_relative_cut_spans_the_spectrum():
    basis = SpectralBasis(eigenvalues=np.array([-1.0, 0.0, 3.0]), eigenvectors=np.eye(3))
    assert relative_cut(basis, 0.0) == -1.0
    assert relative_cut(basis, 1.0) == 3.0
    assert relative_cut(basis, 0.5) == 1.0


def test_spectrum_frame_columns(path_graph):
    basis = decompose(laplacian(path_graph))
    frame = spectrum_frame(basis, gft(basis, np.arange(4.0)))
    assert list(frame.columns) == ["eigenvalue", "coefficient"]
    assert len(frame) == 4


@pytest.fixture(scope='module')
def uem_gsos(random_graphs):
    """One UEM matrix per random graph with (m, n, t, rho) drawn at random."""
    rng = make_rng(404)
    gsos = []
    for g in random_graphs:
        m, n = (float(v) for v in np.round(rng.uniform(0.0, 1.0, size=2), 1))
        t = int(rng.integers(1, 3))
        rho = float(rng.choice([0.3, 0.4, 0.7]))
        ext = extended_adjacency(consensus_matrix(g), t, rho)
        gsos.append((build_uem(ext, m, n).entries, psd_condition_holds(m, n)))
        gsos.append((ext.l_bar, True))
    return gsos


def test_eigenpairs_have_small_residuals(uem_gsos):
    for gso, _ in uem_gsos:
        basis = decompose(gso)
        residuals = np.linalg.norm(gso @ basis.eigenvectors - basis.eigenvectors * basis.eigenvalues, axis=0)
        assert np.all(residuals <= 1e-8 * (1 + np.abs(basis.eigenvalues)))


def test_basis_reconstructs_the_gso(uem_gsos):
    for gso, _ in uem_gsos:
        basis = decompose(gso)
        rebuilt = basis.eigenvectors @ np.diag(basis.eigenvalues) @ basis.eigenvectors.T
        np.testing.assert_allclose(rebuilt, gso, rtol=0, atol=1e-8 * (1 + np.abs(gso).max()))
        np.testing.assert_allclose(basis.eigenvectors.T @ basis.eigenvectors, np.eye(gso.shape[0]), atol=1e-10)


def test_psd_gsos_have_no_negative_eigenvalues(uem_gsos):
    checked = 0
    for gso, psd in uem_gsos:
        if psd:
            eigenvalues = decompose(gso).eigenvalues
            assert eigenvalues.min() >= -1e-8 * (1 + eigenvalues.max())
            checked += 1
    assert checked >= 100


def test_identity_gives_the_canonical_basis():
    basis = decompose(np.eye(5))
    np.testing.assert_allclose(basis.eigenvalues, np.ones(5), atol=1e-12)
    np.testing.assert_allclose(basis.eigenvectors, np.eye(5), atol=1e-12)
