import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from channel_mixer.errors import NonHermitianInput
from channel_mixer.qmath import hermitian_eigen, kron, pseudo_inverse, rank_at, trace_norm

from oracles import bell_projector, charpoly_eigenvalues

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def random_hermitian(rng, n=4):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def test_identity_eigenvalues():
    np.testing.assert_allclose(hermitian_eigen(np.eye(4)).eigenvalues, [1, 1, 1, 1])


def test_diagonal_eigenvalues_sorted():
    lam = hermitian_eigen(np.diag([0.5, -0.25, 0, 0.75])).eigenvalues
    np.testing.assert_allclose(lam, [-0.25, 0, 0.5, 0.75])


def test_bell_projector_against_charpoly():
    w = bell_projector()
    expected = charpoly_eigenvalues(w)
    np.testing.assert_allclose(expected, [0, 0, 0, 1], atol=1e-12)
    np.testing.assert_allclose(hermitian_eigen(w).eigenvalues, expected, atol=1e-12)


def test_random_hermitian_matches_charpoly():
    rng = np.random.default_rng(3)
    for _ in range(5):
        m = random_hermitian(rng)
        np.testing.assert_allclose(hermitian_eigen(m, vectors=False).eigenvalues,
                                   charpoly_eigenvalues(m), atol=1e-9)


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitianInput):
        hermitian_eigen(np.array([[0, 1], [0, 0]]))


def test_small_asymmetry_tolerated():
    m = np.diag([1.0, 2.0]).astype(complex)
    m[0, 1] = 1e-12
    assert hermitian_eigen(m).eigenvalues.shape == (2,)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (2, 4, 4), elements=finite))
def test_eigen_reconstruction_and_trace(parts):
    a = parts[0] + 1j * parts[1]
    m = a + a.conj().T
    lam, vec = hermitian_eigen(m)
    np.testing.assert_allclose(lam.sum(), np.trace(m).real, atol=1e-10 * max(1, np.abs(m).max()))
    np.testing.assert_allclose((vec * lam) @ vec.conj().T, m, atol=1e-9 * max(1, np.abs(m).max()))
    np.testing.assert_allclose(vec.conj().T @ vec, np.eye(4), atol=1e-10)


def test_pinv_identity():
    np.testing.assert_allclose(pseudo_inverse(np.eye(4)), np.eye(4))


def test_pinv_drops_zero_direction():
    np.testing.assert_allclose(pseudo_inverse(np.diag([2.0, 0.0]), 1e-12), np.diag([0.5, 0.0]))


def test_pinv_replica_transfer_at_quarter_pi():
    from channel_mixer.channels import NM_X2
    from channel_mixer.divisibility import transfer_of_family
    from channel_mixer.qmath import singular_values
    f = transfer_of_family(NM_X2, np.pi / 4)
    assert singular_values(f).min() < 1e-12
    p = pseudo_inverse(f)
    assert np.all(np.isfinite(p))
    assert rank_at(f, 1e-10) == 2
    # Moore-Penrose conditions
    np.testing.assert_allclose(f @ p @ f, f, atol=1e-12)
    np.testing.assert_allclose(p @ f @ p, p, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (2, 4, 4), elements=finite))
def test_pinv_penrose_conditions(parts):
    m = parts[0] + 1j * parts[1]
    p = pseudo_inverse(m, 1e-10)
    scale = max(1.0, np.abs(m).max())
    np.testing.assert_allclose(m @ p @ m, m, atol=1e-7 * scale ** 2)
    np.testing.assert_allclose((m @ p).conj().T, m @ p, atol=1e-7 * scale)


def test_trace_norm_examples():
    assert trace_norm(np.eye(4)) == pytest.approx(4)
    assert trace_norm(bell_projector()) == pytest.approx(1)


def test_trace_norm_intermediate_choi_mixed_mm():
    from channel_mixer.channels import MIXED_MM
    from channel_mixer.divisibility import choi_from_transfer, intermediate_transfer, transfer_of_family
    im = intermediate_transfer(transfer_of_family(MIXED_MM, 1.0), transfer_of_family(MIXED_MM, 0.5))
    w = choi_from_transfer(im.transfer)
    # min eigenvalue is negative here, so the trace norm exceeds the trace
    lam = charpoly_eigenvalues(w)
    assert trace_norm(w) == pytest.approx(np.abs(lam).sum(), abs=1e-9)
    assert np.trace(w).real == pytest.approx(1, abs=1e-9)


def test_kron_examples():
    np.testing.assert_array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    g2 = np.array([[0, 1], [0, 0]])
    g3 = np.array([[0, 0], [1, 0]])
    # |0><1| x |1><0| = |01><10|
    k = kron(g2, g3)
    assert k[1, 2] == 1 and np.count_nonzero(k) == 1
    sx = np.array([[0, 1], [1, 0]])
    sy = np.array([[0, -1j], [1j, 0]])
    np.testing.assert_array_equal(kron(sx, sy), np.fliplr(np.diag([-1j, 1j, -1j, 1j])))
