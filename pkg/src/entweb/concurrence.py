"""Wootters concurrence of a two-qubit density matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import TOL_CLIP, psd_sqrt, singular_values
from .qstate import PairDensity

_SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SPIN_FLIP = np.kron(_SIGMA_Y, _SIGMA_Y)


@dataclass(frozen=True)
class ConcurrenceResult:
    value: float
    sqrt_eigs: tuple[float, float, float, float]  # descending


def _matrix(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, PairDensity) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"expected a 4x4 two-qubit matrix, got {m.shape}")
    return m


def spin_flip(rho) -> np.ndarray:
    """Time reversal: ``(sigma_y x sigma_y) rho* (sigma_y x sigma_y)``."""
    m = _matrix(rho)
    return SPIN_FLIP @ m.conj() @ SPIN_FLIP


def wootters_concurrence(rho, tol_clip: float = TOL_CLIP) -> ConcurrenceResult:
    """Concurrence from the spectrum of the Hermitian form ``sqrt(rho) rho~ sqrt(rho)``.

    That spectrum equals the spectrum of ``rho rho~``. It is taken in
    factored form: with ``K = sqrt(rho) sqrt(rho~)`` we have
    ``K K^dag = sqrt(rho) rho~ sqrt(rho)``, so the ``l_i`` are the singular
    values of ``K``, which keeps near-zero ``l_i`` accurate. Raises
    ``LinalgError`` if ``rho`` is not PSD within ``tol_clip``.
    """
    m = _matrix(rho)
    root = psd_sqrt(m, tol_clip)
    k = root @ (SPIN_FLIP @ root.conj() @ SPIN_FLIP)
    ls = tuple(float(x) for x in singular_values(k))
    value = max(ls[0] - ls[1] - ls[2] - ls[3], 0.0)
    return ConcurrenceResult(value, ls)


def concurrence(rho) -> float:
    return wootters_concurrence(rho).value
