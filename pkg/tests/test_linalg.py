import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entweb.linalg import (
    LinalgError,
    cubic_roots_real,
    hermitian_eig,
    psd_sqrt,
    singular_values,
)


def random_hermitian(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + g.conj().T) / 2


@pytest.mark.parametrize(
    "m, expected",
    [
        (np.eye(2), [1, 1]),
        (np.array([[0, 1], [1, 0]]), [1, -1]),
        (np.diag([3.0, 1, 0, 0]), [3, 1, 0, 0]),
    ],
)
def test_hermitian_eig_examples(m, expected):
    assert np.allclose(hermitian_eig(m).eigenvalues, expected, atol=1e-14)


def test_hermitian_eig_reconstructs_random(rng):
    for n in (2, 3, 4, 8):
        for _ in range(20):
            m = random_hermitian(rng, n)
            dec = hermitian_eig(m)
            v = dec.eigenvectors
            assert np.max(np.abs(dec.reconstruct() - m)) < 1e-10
            assert np.max(np.abs(v.conj().T @ v - np.eye(n))) < 1e-12
            assert np.all(np.diff(dec.eigenvalues) <= 0)
            assert np.allclose(dec.eigenvalues, np.linalg.eigvalsh(m)[::-1], atol=1e-10)


def test_hermitian_eig_rejects_bad_input():
    with pytest.raises(LinalgError):
        hermitian_eig(np.ones((2, 3)))
    with pytest.raises(LinalgError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize(
    "m, root",
    [
        (np.eye(3), np.eye(3)),
        (np.diag([4.0, 9.0]), np.diag([2.0, 3.0])),
        (np.full((2, 2), 0.5), np.full((2, 2), 0.5)),
    ],
)
def test_psd_sqrt_examples(m, root):
    assert np.allclose(psd_sqrt(m), root, atol=1e-12)


def test_psd_sqrt_squares_back(rng):
    for n in (2, 4, 6):
        for rank in range(1, n + 1):
            g = rng.normal(size=(rank, n)) + 1j * rng.normal(size=(rank, n))
            m = g.conj().T @ g
            r = psd_sqrt(m)
            assert np.max(np.abs(r @ r - m)) < 1e-9
            assert np.max(np.abs(r - r.conj().T)) < 1e-14


def test_psd_sqrt_clips_and_rejects():
    assert np.allclose(psd_sqrt(np.diag([1.0, -1e-12])), np.diag([1.0, 0.0]))
    with pytest.raises(LinalgError):
        psd_sqrt(np.diag([1.0, -1e-6]))


def test_singular_values_match_numpy(rng):
    for shape in ((3, 3), (4, 4), (5, 3)):
        for _ in range(20):
            m = rng.normal(size=shape) + 1j * rng.normal(size=shape)
            assert np.allclose(singular_values(m), np.linalg.svd(m, compute_uv=False), atol=1e-12)


def test_singular_values_rank_deficient_keeps_zero_small(rng):
    g = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    sv = singular_values(g @ g.conj().T)
    assert sv[2] < 1e-14 and sv[3] < 1e-14


@pytest.mark.parametrize(
    "coeffs, roots",
    [
        ((-6.0, 11.0, -6.0), (3, 2, 1)),
        ((0.0, 0.0, 0.0), (0, 0, 0)),
        ((-8.0, 16.0, 0.0), (4, 4, 0)),
    ],
)
def test_cubic_examples(coeffs, roots):
    got = cubic_roots_real(*coeffs)
    assert np.allclose(got, roots, atol=1e-7)
    assert not any(np.isnan(got))


def _coeffs(rs):
    r1, r2, r3 = rs
    return -(r1 + r2 + r3), r1 * r2 + r1 * r3 + r2 * r3, -r1 * r2 * r3


def test_cubic_recovers_random_reals(rng):
    for _ in range(2000):
        rs = rng.uniform(-50, 50, 3)
        got = cubic_roots_real(*_coeffs(rs))
        assert np.allclose(got, np.sort(rs)[::-1], atol=1e-9, rtol=0)


# magnitudes whose cubes underflow would give coefficients that no longer encode the roots
_root = st.one_of(st.just(0.0), st.floats(-50, 50, allow_nan=False).filter(lambda x: abs(x) >= 1e-50))


@settings(max_examples=300, deadline=None)
@given(st.lists(_root, min_size=3, max_size=3))
def test_cubic_residual_small_including_ties(rs):
    c2, c1, c0 = _coeffs(rs)
    got = cubic_roots_real(c2, c1, c0)
    assert not any(np.isnan(got))
    assert list(got) == sorted(got, reverse=True)
    scale = max(1.0, max(abs(r) for r in rs))
    for t in got:
        assert abs(t**3 + c2 * t**2 + c1 * t + c0) < 1e-12 * scale**3


def test_cubic_rejects_complex_roots():
    with pytest.raises(LinalgError):
        cubic_roots_real(0.0, 1.0, 0.0)  # t^3 + t
