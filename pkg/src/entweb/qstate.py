"""N-qubit states, pair marginals, collective-spin moments and symmetrization.

Conventions used throughout the package:

* amplitudes are indexed in the computational basis with qubit 1 as the
  most significant bit;
* ``|1>`` is spin up (``s_z = +1/2``) and ``|0>`` is spin down, so the
  W state ``dicke_state(n, 1)`` is the ``S_z = n/2 - 1`` eigenstate;
* spin operators are ``s = sigma / 2`` with the right-handed
  ``[s_x, s_y] = i s_z``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .linalg import hermitian_eig

MAX_QUBITS = 12
MAX_TWIRL_QUBITS = 8
NORM_TOL = 1e-12
PSD_TOL = 1e-10
DEGENERATE_AXES_TOL = 1e-9


class NotPositiveError(ValueError):
    """A density matrix has an eigenvalue below ``-PSD_TOL``."""


@dataclass(frozen=True)
class PureState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        if amps.size != 2**self.n_qubits:
            raise ValueError(f"expected {2**self.n_qubits} amplitudes, got {amps.size}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    def to_density(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(self.n_qubits, np.outer(a, a.conj()))


@dataclass(frozen=True)
class DensityOperator:
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = 2**self.n_qubits
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        if m.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {m.shape}")
        _check_density(m)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class PairDensity:
    """Two-qubit density matrix in the basis |00>, |01>, |10>, |11>."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"pair density must be 4x4, got {m.shape}")
        _check_density(m)
        object.__setattr__(self, "matrix", m)


State = Union[PureState, DensityOperator]


def _check_density(m: np.ndarray) -> None:
    if np.max(np.abs(m - m.conj().T)) > NORM_TOL:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(m)
    if abs(tr - 1.0) > NORM_TOL:
        raise ValueError(f"density matrix trace is {tr!r}, expected 1")
    # full spectra of the largest operators are not worth the cost
    if m.shape[0] <= 1024:
        w = np.linalg.eigvalsh(m) if m.shape[0] > 4 else hermitian_eig(m).eigenvalues
        if w.min() < -PSD_TOL:
            raise NotPositiveError(f"density matrix has eigenvalue {w.min():.3e} < 0")


@dataclass(frozen=True)
class CollectiveMoments:
    """First and symmetrized second moments of the total spin."""

    n: int
    mean: np.ndarray  # <S_x>, <S_y>, <S_z>
    corr: np.ndarray  # <S_mu S_nu + S_nu S_mu>/2

    @property
    def total_spin_sq(self) -> float:
        return float(np.trace(self.corr))


# --------------------------------------------------------------------------
# constructions


def basis_state(bits: str) -> PureState:
    """Product basis state from a bit string such as ``"0110"``."""
    n = len(bits)
    amps = np.zeros(2**n, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return PureState(n, amps)


def dicke_state(n: int, n_zeros: int) -> PureState:
    """Equal-weight superposition of all strings with ``n_zeros`` zeros."""
    if not 0 <= n_zeros <= n:
        raise ValueError(f"n_zeros must be in 0..{n}, got {n_zeros}")
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n must be in 1..{MAX_QUBITS}, got {n}")
    weights = _popcounts(n)
    amps = np.where(weights == n - n_zeros, 1.0, 0.0).astype(complex)
    amps /= math.sqrt(math.comb(n, n_zeros))
    return PureState(n, amps)


def w_state(n: int) -> PureState:
    return dicke_state(n, 1)


def ghz_state(n: int) -> PureState:
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return PureState(n, amps)


def product_state(single: np.ndarray, n: int) -> PureState:
    """``single`` (a normalized 2-vector) on every qubit."""
    v = np.asarray(single, dtype=complex)
    amps = np.ones(1, dtype=complex)
    for _ in range(n):
        amps = np.kron(amps, v)
    return PureState(n, amps)


def tensor(a: PureState, b: PureState) -> PureState:
    return PureState(a.n_qubits + b.n_qubits, np.kron(a.amplitudes, b.amplitudes))


@lru_cache(maxsize=None)
def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return np.array([bin(i).count("1") for i in idx])


# --------------------------------------------------------------------------
# marginals


def _n_of(state: State) -> int:
    return state.n_qubits


def partial_trace_pair(state: State, i: int, j: int) -> PairDensity:
    """Reduced state of qubits ``i < j`` (1-based)."""
    n = _n_of(state)
    if not (1 <= i < j <= n):
        raise ValueError(f"need 1 <= i < j <= {n}, got ({i}, {j})")
    rest = [k for k in range(n) if k not in (i - 1, j - 1)]
    if isinstance(state, PureState):
        t = state.amplitudes.reshape([2] * n).transpose([i - 1, j - 1] + rest).reshape(4, -1)
        m = t @ t.conj().T
    else:
        t = state.matrix.reshape([2] * (2 * n))
        axes = [i - 1, j - 1] + rest + [n + i - 1, n + j - 1] + [n + k for k in rest]
        r = 2 ** (n - 2)
        t = t.transpose(axes).reshape(4, r, 4, r)
        m = np.einsum("arbr->ab", t)
    return PairDensity(0.5 * (m + m.conj().T))


def pair_marginals(state: State) -> dict[tuple[int, int], np.ndarray]:
    n = _n_of(state)
    return {
        (i, j): partial_trace_pair(state, i, j).matrix
        for i in range(1, n + 1)
        for j in range(i + 1, n + 1)
    }


def is_pair_marginal_uniform(state: State, tol: float = 1e-10) -> bool:
    marg = pair_marginals(state)
    ref = marg[(1, 2)]
    return all(np.max(np.abs(m - ref)) <= tol for m in marg.values())


# --------------------------------------------------------------------------
# collective spin


def _apply_total_spin(axis: int, arr: np.ndarray, n: int) -> np.ndarray:
    """Apply S_x, S_y or S_z (axis 0, 1, 2) along the first axis of ``arr``."""
    idx = np.arange(2**n)
    if axis == 2:
        sz = _popcounts(n) - n / 2.0
        return sz.reshape((-1,) + (1,) * (arr.ndim - 1)) * arr
    out = np.zeros_like(arr, dtype=complex)
    for q in range(n):
        mask = 1 << (n - 1 - q)
        flipped = arr[idx ^ mask]
        if axis == 0:
            out += 0.5 * flipped
        else:
            # s_y|1> = (i/2)|0>, s_y|0> = -(i/2)|1>
            sign = np.where(idx & mask, -0.5j, 0.5j)
            out += sign.reshape((-1,) + (1,) * (arr.ndim - 1)) * flipped
    return out


def collective_moments(state: State) -> CollectiveMoments:
    n = _n_of(state)
    mean = np.zeros(3)
    corr = np.zeros((3, 3))
    if isinstance(state, PureState):
        psi = state.amplitudes
        s_psi = [_apply_total_spin(a, psi, n) for a in range(3)]
        for a in range(3):
            mean[a] = np.vdot(psi, s_psi[a]).real
            for b in range(3):
                corr[a, b] = np.vdot(s_psi[a], s_psi[b]).real
    else:
        rho = state.matrix
        s_rho = [_apply_total_spin(a, rho, n) for a in range(3)]
        for a in range(3):
            mean[a] = np.trace(s_rho[a]).real
            for b in range(3):
                corr[a, b] = np.trace(_apply_total_spin(a, s_rho[b], n)).real
    corr = 0.5 * (corr + corr.T)
    return CollectiveMoments(n, mean, corr)


def rotate_moments(moments: CollectiveMoments, rotation: np.ndarray) -> CollectiveMoments:
    r = np.asarray(rotation, dtype=float)
    return CollectiveMoments(moments.n, r @ moments.mean, r @ moments.corr @ r.T)


def principal_axes(moments: CollectiveMoments) -> tuple[np.ndarray, CollectiveMoments]:
    """Rotation to the principal frame of the spin correlation tensor.

    Rows of the returned rotation are the new axes expressed in the old
    frame, ordered so that ``S_z^2 >= S_y^2 >= S_x^2``. Within a degenerate
    eigenspace the basis closest to the identity is chosen.
    """
    dec = hermitian_eig(moments.corr.astype(complex))
    w = dec.eigenvalues[::-1]  # ascending: new x, y, z
    q = np.real_if_close(dec.eigenvectors[:, ::-1])
    q = np.asarray(q.real, dtype=float)
    scale = max(1.0, float(np.max(np.abs(w))))
    groups: list[list[int]] = []
    for k in range(3):
        if groups and abs(w[k] - w[groups[-1][-1]]) <= DEGENERATE_AXES_TOL * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    for g in groups:
        if len(g) == 1:
            continue
        # orthogonal Procrustes onto the matching identity columns
        sub = q[:, g]
        u, _, vt = np.linalg.svd(np.eye(3)[:, g].T @ sub)
        q[:, g] = sub @ (vt.T @ u.T)
    if np.linalg.det(q) < 0:
        k = int(np.argmin(np.diag(q)))
        q[:, k] = -q[:, k]
    rotation = q.T
    rotated = rotate_moments(moments, rotation)
    corr = rotated.corr.copy()
    corr[~np.eye(3, dtype=bool)] = 0.0
    return rotation, CollectiveMoments(moments.n, rotated.mean, corr)


def _spin_ops() -> list[np.ndarray]:
    sx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    sy = np.array([[0, 0.5j], [-0.5j, 0]], dtype=complex)
    sz = np.diag([-0.5, 0.5]).astype(complex)
    return [sx, sy, sz]


def su2_from_rotation(rotation: np.ndarray) -> np.ndarray:
    """Single-qubit U with ``U^dag s_mu U = sum_nu R[mu, nu] s_nu``."""
    r = np.asarray(rotation, dtype=float)
    if r.shape != (3, 3) or np.max(np.abs(r @ r.T - np.eye(3))) > 1e-9:
        raise ValueError("rotation must be a 3x3 orthogonal matrix")
    if np.linalg.det(r) < 0:
        raise ValueError("determinant -1: reflections are not realizable by a unitary")
    s = _spin_ops()
    rows = []
    for mu in range(3):
        t = sum(r[mu, nu] * s[nu] for nu in range(3))
        # s_mu U - U t = 0, vectorized row-major
        rows.append(np.kron(s[mu], np.eye(2)) - np.kron(np.eye(2), t.T))
    _, _, vh = np.linalg.svd(np.vstack(rows))
    u = vh[-1].conj().reshape(2, 2)
    u /= np.sqrt(np.linalg.det(u))
    return u


def apply_spin_rotation(state: State, rotation: np.ndarray) -> State:
    """Apply the global rotation ``U^{(x)n}`` that maps moments by ``rotation``."""
    u = su2_from_rotation(rotation)
    n = _n_of(state)
    if isinstance(state, PureState):
        t = state.amplitudes.reshape([2] * n)
        for q in range(n):
            t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
        amps = t.reshape(-1)
        return PureState(n, amps / np.linalg.norm(amps))
    t = state.matrix.reshape([2] * (2 * n))
    for q in range(n):
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
        t = np.moveaxis(np.tensordot(u.conj(), t, axes=([1], [n + q])), 0, n + q)
    m = t.reshape(2**n, 2**n)
    return DensityOperator(n, 0.5 * (m + m.conj().T))


# --------------------------------------------------------------------------
# symmetrization


def permute_qubits(rho: np.ndarray, n: int, perm: tuple[int, ...]) -> np.ndarray:
    t = rho.reshape([2] * (2 * n))
    return t.transpose(list(perm) + [n + p for p in perm]).reshape(2**n, 2**n)


def permutation_twirl(rho: DensityOperator) -> DensityOperator:
    """Average of ``rho`` over all qubit permutations (lexicographic order)."""
    n = rho.n_qubits
    if n > MAX_TWIRL_QUBITS:
        raise ValueError(f"twirl over {n}! permutations refused (limit {MAX_TWIRL_QUBITS} qubits)")
    acc = np.zeros_like(rho.matrix)
    for perm in itertools.permutations(range(n)):
        acc += permute_qubits(rho.matrix, n, perm)
    acc /= math.factorial(n)
    return DensityOperator(n, 0.5 * (acc + acc.conj().T))


# --------------------------------------------------------------------------
# rings


def cyclic_shift(bits: int, n: int) -> int:
    """Move every qubit one site along the ring (rotate the bit string)."""
    return ((bits >> 1) | ((bits & 1) << (n - 1))) & ((1 << n) - 1)


@lru_cache(maxsize=None)
def necklace_orbits(n: int) -> tuple[tuple[int, ...], ...]:
    """Orbits of n-bit strings under cyclic shift, ordered by smallest member."""
    seen: set[int] = set()
    orbits = []
    for b in range(2**n):
        if b in seen:
            continue
        orb = {b}
        c = b
        for _ in range(n - 1):
            c = cyclic_shift(c, n)
            orb.add(c)
        seen |= orb
        orbits.append(tuple(sorted(orb)))
    return tuple(orbits)


def ring_translation_state(half_n: int, coeffs) -> PureState:
    n = 2 * half_n
    if n > MAX_QUBITS:
        raise ValueError(f"ring of {n} qubits exceeds the {MAX_QUBITS}-qubit limit")
    orbits = necklace_orbits(n)
    c = np.asarray(coeffs, dtype=complex).reshape(-1)
    if c.size != len(orbits):
        raise ValueError(f"expected {len(orbits)} orbit coefficients, got {c.size}")
    amps = np.zeros(2**n, dtype=complex)
    for ck, orb in zip(c, orbits):
        amps[list(orb)] += ck / math.sqrt(len(orb))
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ValueError("all orbit coefficients are zero")
    return PureState(n, amps / norm)


def shift_state(state: PureState) -> PureState:
    n = state.n_qubits
    idx = np.arange(2**n)
    shifted = np.array([cyclic_shift(int(b), n) for b in idx])
    amps = np.zeros_like(state.amplitudes)
    amps[shifted] = state.amplitudes
    return PureState(n, amps)


# --------------------------------------------------------------------------
# random states


def random_ginibre_density(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    d = 2**n
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityOperator(n, 0.5 * (m + m.conj().T))


def random_symmetric_pure(n: int, rng: np.random.Generator) -> PureState:
    """Random pure state in the permutation-symmetric subspace."""
    c = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    c /= np.linalg.norm(c)
    amps = sum(ck * dicke_state(n, k).amplitudes for k, ck in enumerate(c))
    return PureState(n, amps / np.linalg.norm(amps))
