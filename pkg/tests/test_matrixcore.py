import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ggmlearn import matrixcore as mc
from ggmlearn.errors import NotPD, NotSymmetric, SingularBlock


def test_cholesky_examples():
    assert np.allclose(mc.cholesky(np.eye(3)), np.eye(3))
    lower = mc.cholesky([[4.0, 2.0], [2.0, 5.0]])
    assert np.allclose(lower, [[2.0, 0.0], [1.0, 2.0]])
    with pytest.raises(NotPD):
        mc.cholesky([[1.0, 2.0], [2.0, 1.0]])


def test_asymmetric_input_rejected():
    with pytest.raises(NotSymmetric):
        mc.cholesky([[1.0, 0.5], [0.4, 1.0]])


def test_solve_spd_examples():
    assert np.allclose(mc.solve_spd(np.eye(2), [3.0, 4.0]), [3.0, 4.0])
    assert np.allclose(mc.solve_spd([[2.0, -1.0], [-1.0, 2.0]], [1.0, 0.0]), [2 / 3, 1 / 3])
    with pytest.raises(NotPD):
        mc.solve_spd([[1.0, 2.0], [2.0, 1.0]], [1.0, 1.0])


def test_pseudo_inverse_examples():
    assert np.allclose(mc.pseudo_inverse(np.eye(2)), np.eye(2))
    lap = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert np.allclose(mc.pseudo_inverse(lap), lap / 4)
    assert np.allclose(mc.pseudo_inverse(np.zeros((2, 2))), 0.0)


def test_spectral_radius_examples():
    lam, v = mc.spectral_radius_nonneg(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert lam == pytest.approx(1.0)
    assert np.allclose(v, [2**-0.5, 2**-0.5])
    lam, v = mc.spectral_radius_nonneg(np.zeros((3, 3)))
    assert lam == 0.0 and np.all(v >= 0) and np.linalg.norm(v) == pytest.approx(1.0)


def test_spectral_radius_r039_perron_vector():
    r = 0.39
    a_bar = np.abs(np.array([[0, -r, r, r], [-r, 0, r, 0], [r, r, 0, r], [r, 0, r, 0]]))
    _, v = mc.spectral_radius_nonneg(a_bar)
    assert np.allclose(v / np.linalg.norm(v), [0.557, 0.435, 0.557, 0.435], atol=1e-3)


def test_schur_complement_examples():
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    assert np.allclose(mc.schur_complement(a, [0]), [[1.5]])
    assert np.allclose(mc.schur_complement(a, [0, 1]), a)
    blocks = np.block([[a, np.zeros((2, 2))], [np.zeros((2, 2)), 3 * a]])
    assert np.allclose(mc.schur_complement(blocks, [2, 3]), 3 * a)
    with pytest.raises(SingularBlock):
        mc.schur_complement(np.array([[1.0, 0.0], [0.0, 0.0]]), [0])


def _spd(seed: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((n, n))
    return b @ b.T + 0.1 * np.eye(n)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 20))
def test_cholesky_round_trip(seed, n):
    a = _spd(seed, n)
    lower = mc.cholesky(a)
    assert np.linalg.norm(lower @ lower.T - a) <= 1e-9 * np.linalg.norm(a)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 10), st.integers(1, 9))
def test_pseudo_inverse_moore_penrose(seed, n, rank):
    rank = min(rank, n - 1)
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((n, rank))
    a = b @ b.T
    p = mc.pseudo_inverse(a, 1e-10)
    tol = 1e-8 * max(1.0, np.linalg.norm(a) * np.linalg.norm(p))
    assert np.linalg.norm(a @ p @ a - a) <= tol * np.linalg.norm(a)
    assert np.linalg.norm(p @ a @ p - p) <= tol * max(np.linalg.norm(p), 1.0)
    assert np.linalg.norm((a @ p).T - a @ p) <= tol
    assert np.linalg.norm((p @ a).T - p @ a) <= tol


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 12), st.data())
def test_schur_complement_of_spd_is_spd(seed, n, data):
    a = _spd(seed, n)
    keep = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    assert np.linalg.eigvalsh(mc.schur_complement(a, keep))[0] > -1e-10
