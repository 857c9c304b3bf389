import itertools
import math

import numpy as np
import pytest
from oracles import partial_trace_loops

from entweb import qstate as qs
from entweb.symmetric_family import build_rho, params_from_moments


def ket(bits):
    return qs.basis_state(bits).amplitudes


def proj(v):
    return np.outer(v, v.conj())


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


# --- states ---------------------------------------------------------------


def test_pure_state_requires_normalization():
    with pytest.raises(ValueError):
        qs.PureState(2, np.array([1, 1, 0, 0], dtype=complex))


def test_density_rejects_negative_eigenvalue():
    with pytest.raises(qs.NotPositiveError):
        qs.DensityOperator(1, np.diag([1.5, -0.5]).astype(complex))


@pytest.mark.parametrize(
    "n, k, expected",
    [
        (2, 1, (ket("01") + ket("10")) / math.sqrt(2)),
        (3, 0, ket("111")),
        (3, 1, (ket("011") + ket("101") + ket("110")) / math.sqrt(3)),
    ],
)
def test_dicke_examples(n, k, expected):
    assert np.allclose(qs.dicke_state(n, k).amplitudes, expected, atol=1e-15)


def test_dicke_rejects_out_of_range():
    with pytest.raises(ValueError):
        qs.dicke_state(3, 4)
    with pytest.raises(ValueError):
        qs.dicke_state(3, -1)


# --- partial trace --------------------------------------------------------


def test_partial_trace_examples():
    assert np.allclose(qs.partial_trace_pair(qs.basis_state("000"), 1, 2).matrix, proj(ket("00")))
    ghz = qs.partial_trace_pair(qs.ghz_state(3), 1, 2).matrix
    assert np.allclose(ghz, np.diag([0.5, 0, 0, 0.5]))
    psi = (ket("01") + ket("10")) / math.sqrt(2)
    w = qs.partial_trace_pair(qs.dicke_state(3, 1), 1, 2).matrix
    assert np.allclose(w, proj(ket("11")) / 3 + 2 * proj(psi) / 3, atol=1e-15)


def test_partial_trace_rejects_bad_pairs():
    s = qs.w_state(3)
    for i, j in ((1, 1), (2, 1), (0, 2), (1, 4)):
        with pytest.raises(ValueError):
            qs.partial_trace_pair(s, i, j)


def test_partial_trace_matches_loop_oracle(rng):
    for n in (3, 4):
        rho = qs.random_ginibre_density(n, rng)
        for i, j in itertools.combinations(range(1, n + 1), 2):
            got = qs.partial_trace_pair(rho, i, j).matrix
            assert np.max(np.abs(got - partial_trace_loops(rho.matrix, n, i, j))) < 1e-13
            assert abs(np.trace(got) - 1) < 1e-12
            assert np.max(np.abs(got - got.conj().T)) < 1e-12


def test_pure_and_density_paths_agree(rng):
    psi = qs.random_symmetric_pure(4, rng)
    a = qs.partial_trace_pair(psi, 2, 4).matrix
    b = qs.partial_trace_pair(psi.to_density(), 2, 4).matrix
    assert np.max(np.abs(a - b)) < 1e-14


# --- uniformity and twirl -------------------------------------------------


def test_is_pair_marginal_uniform_examples():
    assert qs.is_pair_marginal_uniform(qs.dicke_state(4, 1))
    assert qs.is_pair_marginal_uniform(qs.ghz_state(4))
    assert not qs.is_pair_marginal_uniform(qs.tensor(qs.basis_state("0"), qs.dicke_state(3, 1)))


def test_twirl_two_qubit_example():
    rho = qs.DensityOperator(2, proj(ket("01")))
    out = qs.permutation_twirl(rho).matrix
    assert np.allclose(out, (proj(ket("01")) + proj(ket("10"))) / 2)


def test_twirl_fixed_point():
    rho = qs.dicke_state(4, 2).to_density()
    assert np.max(np.abs(qs.permutation_twirl(rho).matrix - rho.matrix)) < 1e-14


def test_twirl_output_is_permutation_invariant(rng):
    for n in (3, 4):
        rho = qs.permutation_twirl(qs.random_ginibre_density(n, rng))
        assert qs.is_pair_marginal_uniform(rho)
        for a, b in itertools.combinations(range(n), 2):
            perm = list(range(n))
            perm[a], perm[b] = perm[b], perm[a]
            swapped = qs.permute_qubits(rho.matrix, n, tuple(perm))
            assert np.max(np.abs(swapped - rho.matrix)) < 1e-12
        marg = qs.pair_marginals(rho)
        ref = marg[(1, 2)]
        assert max(np.max(np.abs(m - ref)) for m in marg.values()) < 1e-10


def test_twirl_size_guard():
    with pytest.raises(ValueError):
        qs.permutation_twirl(qs.basis_state("0" * 9).to_density())


def test_twirl_is_deterministic(rng):
    rho = qs.random_ginibre_density(3, rng)
    assert np.array_equal(qs.permutation_twirl(rho).matrix, qs.permutation_twirl(rho).matrix)


# --- moments --------------------------------------------------------------


def test_moments_stretched_state():
    m = qs.collective_moments(qs.basis_state("11"))
    assert np.allclose(m.mean, [0, 0, 1])
    assert np.isclose(m.corr[2, 2], 1)
    assert np.isclose(m.total_spin_sq, 2)


@pytest.mark.parametrize("n", range(3, 11))
def test_moments_of_w_state(n):
    m = qs.collective_moments(qs.w_state(n))
    assert np.allclose(m.mean, [0, 0, n / 2 - 1], atol=1e-12)
    assert np.allclose(np.diag(m.corr), [(3 * n - 2) / 4, (3 * n - 2) / 4, (n / 2 - 1) ** 2], atol=1e-12)
    assert np.max(np.abs(m.corr - np.diag(np.diag(m.corr)))) < 1e-12


def test_moments_of_plus_product():
    plus = np.array([1, 1]) / math.sqrt(2)
    m = qs.collective_moments(qs.product_state(plus, 4))
    assert np.allclose(m.mean, [2, 0, 0], atol=1e-14)


def test_moments_invariants(rng):
    for n in (2, 3, 5):
        m = qs.collective_moments(qs.random_ginibre_density(n, rng))
        d = np.diag(m.corr)
        assert np.all(d >= -1e-12) and np.all(d <= n * n / 4 + 1e-12)
        assert np.allclose(m.corr, m.corr.T)
        assert m.total_spin_sq <= (n / 2) * (n / 2 + 1) + 1e-9


# --- principal axes -------------------------------------------------------


def test_principal_axes_diagonal_input_is_identity():
    m = qs.CollectiveMoments(3, np.zeros(3), np.diag([0.5, 1.0, 2.0]))
    rot, out = qs.principal_axes(m)
    assert np.allclose(rot, np.eye(3))
    assert np.allclose(out.corr, m.corr)


def test_principal_axes_xy_coupling():
    theta = 0.3
    c, s = math.cos(theta), math.sin(theta)
    rz = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    corr = rz @ np.diag([0.2, 0.9, 2.0]) @ rz.T
    rot, out = qs.principal_axes(qs.CollectiveMoments(3, np.zeros(3), corr))
    assert abs(corr[0, 1]) > 0.1
    assert np.allclose(np.diag(out.corr), [0.2, 0.9, 2.0])
    assert np.allclose(rot[2], [0, 0, 1]) or np.allclose(rot[2], [0, 0, -1])
    full = rot @ corr @ rot.T
    assert np.max(np.abs(full - np.diag(np.diag(full)))) < 1e-10


def test_principal_axes_of_w4_only_relabels():
    # S_z^2 = 1 < S_x^2 = S_y^2 = 5/2, so z becomes the smallest axis
    rot, out = qs.principal_axes(qs.collective_moments(qs.w_state(4)))
    assert np.allclose(np.abs(rot), np.round(np.abs(rot)))
    assert np.allclose(np.diag(out.corr), [1.0, 2.5, 2.5])


def test_principal_axes_random(rng):
    for n in (3, 4, 5):
        for _ in range(10):
            m = qs.collective_moments(qs.random_ginibre_density(n, rng))
            rot, out = qs.principal_axes(m)
            assert np.max(np.abs(rot @ rot.T - np.eye(3))) < 1e-12
            assert abs(np.linalg.det(rot) - 1) < 1e-12
            full = rot @ m.corr @ rot.T
            assert np.max(np.abs(full - np.diag(np.diag(full)))) < 1e-10
            d = np.diag(out.corr)
            assert d[2] >= d[1] >= d[0]


# --- rotations ------------------------------------------------------------


def test_identity_rotation_keeps_state(rng):
    s = qs.random_symmetric_pure(3, rng)
    assert np.allclose(qs.apply_spin_rotation(s, np.eye(3)).amplitudes, s.amplitudes)


def test_pi_about_z_flips_sx():
    plus = np.array([1, 1]) / math.sqrt(2)
    s = qs.product_state(plus, 2)
    rz = np.diag([-1.0, -1.0, 1.0])
    m = qs.collective_moments(qs.apply_spin_rotation(s, rz))
    assert np.allclose(m.mean, [-1, 0, 0], atol=1e-14)


def test_rotation_covariance_of_moments(rng):
    for n in (2, 3, 4):
        for state in (qs.random_symmetric_pure(n, rng), qs.random_ginibre_density(n, rng)):
            r = random_rotation(rng)
            before = qs.rotate_moments(qs.collective_moments(state), r)
            after = qs.collective_moments(qs.apply_spin_rotation(state, r))
            assert np.max(np.abs(after.mean - before.mean)) < 1e-9
            assert np.max(np.abs(after.corr - before.corr)) < 1e-9


def test_rotation_rejects_non_orthogonal():
    with pytest.raises(ValueError):
        qs.apply_spin_rotation(qs.w_state(3), np.diag([1.0, 2.0, 1.0]))


# --- marginal consistency -------------------------------------------------


def test_family_matrix_matches_marginal(rng):
    for n in (3, 4, 5):
        states = [
            qs.w_state(n),
            qs.ghz_state(n),
            qs.random_symmetric_pure(n, rng),
            qs.permutation_twirl(qs.random_ginibre_density(n, rng)),
        ]
        for state in states:
            rot, moments = qs.principal_axes(qs.collective_moments(state))
            rotated = qs.apply_spin_rotation(state, rot)
            params, point, signs = params_from_moments(moments)
            built = build_rho(params, point, signs).matrix
            marg = qs.partial_trace_pair(rotated, 1, 2).matrix
            assert np.max(np.abs(built - marg)) < 1e-9


# --- rings ----------------------------------------------------------------


def _orbit_coeffs(n, member):
    orbits = qs.necklace_orbits(n)
    c = np.zeros(len(orbits))
    c[[k for k, o in enumerate(orbits) if member in o][0]] = 1
    return c


def test_ring_examples():
    s = qs.ring_translation_state(2, _orbit_coeffs(4, 0b0101))
    assert np.allclose(s.amplitudes, (ket("0101") + ket("1010")) / math.sqrt(2))
    s = qs.ring_translation_state(2, _orbit_coeffs(4, 0))
    assert np.allclose(s.amplitudes, ket("0000"))


def test_ring_is_shift_invariant(rng):
    for half_n in (2, 3, 4):
        k = len(qs.necklace_orbits(2 * half_n))
        s = qs.ring_translation_state(half_n, rng.normal(size=k) + 1j * rng.normal(size=k))
        assert np.max(np.abs(qs.shift_state(s).amplitudes - s.amplitudes)) < 1e-12


def test_necklace_orbits_partition():
    for n in (4, 6, 8):
        orbits = qs.necklace_orbits(n)
        members = sorted(b for o in orbits for b in o)
        assert members == list(range(2**n))


def test_ring_errors():
    with pytest.raises(ValueError):
        qs.ring_translation_state(7, np.ones(1))
    with pytest.raises(ValueError):
        qs.ring_translation_state(2, np.ones(3))
