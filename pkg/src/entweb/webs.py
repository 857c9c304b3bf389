"""Entangled webs and loops.

A web entangles every pair of N qubits; the W state does this with the
largest possible pairwise concurrence, 2/N. A loop of 2n qubits entangles
nearest neighbours on a ring; translation-invariant pure states reach
``(2 + 2^(n-2)) / (2 + 2^n)`` for the neighbour concurrence, tending to 1/4.
The ring state itself is found here by numerical search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import qstate as qs
from .concurrence import concurrence, wootters_concurrence
from .parallel import pmap

RING_LIMIT = Fraction(1, 4)
MAX_RING_QUBITS = 10
RING_TARGET_SLACK = 1e-3
DEFAULT_RESTARTS = 64
DEFAULT_STEPS = 500


@dataclass(frozen=True)
class WebReport:
    kind: str  # "w_state" or "ring"
    size: int  # N for webs, half_n for rings
    concurrence: float
    reference_value: float
    pipeline: str
    reached: bool | None = None
    details: dict = field(default_factory=dict)

    @property
    def deviation(self) -> float:
        return abs(self.concurrence - self.reference_value)


def w_state_concurrence(n: int) -> WebReport:
    if not 2 <= n <= qs.MAX_QUBITS:
        raise ValueError(f"N must be in 2..{qs.MAX_QUBITS}, got {n}")
    rho = qs.partial_trace_pair(qs.w_state(n), 1, 2)
    res = wootters_concurrence(rho)
    return WebReport(
        kind="w_state",
        size=n,
        concurrence=res.value,
        reference_value=2 / n,
        pipeline="dicke_state(N,1) -> partial trace (1,2) -> Wootters",
        details={"sqrt_eigs": res.sqrt_eigs},
    )


def ring_formula(half_n: int) -> Fraction:
    """Neighbour concurrence ``(2 + 2^(n-2)) / (2 + 2^n)`` of the 2n-qubit loop."""
    if half_n < 2:
        raise ValueError(f"half_n must be at least 2, got {half_n}")
    return Fraction(2 + 2 ** (half_n - 2), 2 + 2**half_n)


# --------------------------------------------------------------------------
# search


class _RingObjective:
    """Neighbour concurrence as a function of orbit coefficients."""

    def __init__(self, half_n: int, complex_coeffs: bool):
        self.n = 2 * half_n
        orbits = qs.necklace_orbits(self.n)
        basis = np.zeros((2**self.n, len(orbits)))
        for k, orb in enumerate(orbits):
            basis[list(orb), k] = 1 / np.sqrt(len(orb))
        self.basis = basis
        self.n_orbits = len(orbits)
        self.complex = complex_coeffs
        self.dim = 2 * self.n_orbits if complex_coeffs else self.n_orbits

    def coeffs(self, v: np.ndarray) -> np.ndarray:
        if self.complex:
            return v[: self.n_orbits] + 1j * v[self.n_orbits :]
        return v.astype(complex)

    def amplitudes(self, v: np.ndarray) -> np.ndarray | None:
        amps = self.basis @ self.coeffs(v)
        norm = np.linalg.norm(amps)
        if norm < 1e-12:
            return None
        return amps / norm

    def __call__(self, v: np.ndarray) -> float:
        amps = self.amplitudes(v)
        if amps is None:
            return -1.0
        t = amps.reshape(4, -1)
        return concurrence(t @ t.conj().T)


def _ascent(task) -> tuple[float, np.ndarray]:
    half_n, seed, restart, steps, complex_coeffs = task
    f = _RingObjective(half_n, complex_coeffs)
    rng = np.random.default_rng([seed, restart, int(complex_coeffs)])
    v = rng.normal(size=f.dim)
    v /= np.linalg.norm(v)
    val = f(v)
    delta = 0.5
    stale = 0
    for step in range(steps):
        k = step % f.dim
        best_trial, best_val = None, val
        for sgn in (1.0, -1.0):
            trial = v.copy()
            trial[k] += sgn * delta
            tv = f(trial)
            if tv > best_val:
                best_trial, best_val = trial, tv
        if best_trial is not None:
            v = best_trial / np.linalg.norm(best_trial)
            val = best_val
            stale = 0
        else:
            stale += 1
            if stale >= f.dim:
                delta /= 2
                stale = 0
                if delta < 1e-10:
                    break
    return val, v


def nearest_neighbour_concurrences(state: qs.PureState) -> np.ndarray:
    n = state.n_qubits
    pairs = [(i, i + 1) for i in range(1, n)] + [(1, n)]
    return np.array([concurrence(qs.partial_trace_pair(state, i, j)) for i, j in pairs])


def _search(half_n, seed, restarts, steps, complex_coeffs, workers):
    tasks = [(half_n, seed, r, steps, complex_coeffs) for r in range(restarts)]
    results = pmap(_ascent, tasks, workers, chunksize=1)
    # best value; ties go to the lowest restart index
    i_best = max(range(len(results)), key=lambda i: (results[i][0], -i))
    return i_best, results[i_best]


def ring_search(
    half_n: int,
    seed: int = 0,
    iterations: int = DEFAULT_STEPS,
    restarts: int = DEFAULT_RESTARTS,
    workers: int | None = None,
) -> WebReport:
    """Search translation-invariant 2n-qubit pure states for the best neighbour concurrence.

    Coordinate ascent with step halving over real necklace-orbit
    coefficients, from seeded random restarts; complex coefficients are
    tried only if the real search misses ``ring_formula(half_n)``.
    """
    if half_n < 2:
        raise ValueError(f"half_n must be at least 2, got {half_n}")
    if 2 * half_n > MAX_RING_QUBITS:
        raise ValueError(f"ring of {2 * half_n} qubits exceeds the {MAX_RING_QUBITS}-qubit search limit")
    target = float(ring_formula(half_n))
    i_best, (val, v) = _search(half_n, seed, restarts, iterations, False, workers)
    ansatz = "real"
    if val < target - RING_TARGET_SLACK:
        j, (cval, cv) = _search(half_n, seed, restarts, iterations, True, workers)
        if cval > val:
            i_best, val, v, ansatz = j, cval, cv, "complex"
    f = _RingObjective(half_n, ansatz == "complex")
    state = qs.ring_translation_state(half_n, f.coeffs(v))
    shifted = qs.shift_state(state)
    nn = nearest_neighbour_concurrences(state)
    return WebReport(
        kind="ring",
        size=half_n,
        concurrence=float(nn[0]),
        reference_value=target,
        pipeline=f"necklace-orbit ansatz ({ansatz}) -> coordinate ascent -> partial trace -> Wootters",
        reached=bool(nn[0] >= target - RING_TARGET_SLACK),
        details={
            "restart": i_best,
            "shift_error": float(np.max(np.abs(shifted.amplitudes - state.amplitudes))),
            "nn_spread": float(nn.max() - nn.min()),
            "coefficients": f.coeffs(v) / np.linalg.norm(f.coeffs(v)),
            "state": state,
        },
    )
