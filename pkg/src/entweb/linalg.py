"""Small dense linear algebra used by the concurrence and family code.

The eigen-solver is a cyclic Jacobi iteration for complex Hermitian
matrices. It is written against plain Python complex numbers because the
matrices it sees in practice are 3x3 and 4x4, where numpy's per-call
overhead dominates. Inputs and outputs are numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TOL_CLIP = 1e-10
CUBIC_DISC_CLAMP = -1e-12
_MAX_SWEEPS = 64


class LinalgError(ValueError):
    """Raised when an input violates the numeric precondition of a routine."""


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # orthonormal columns, same order

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise LinalgError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def _jacobi(a: list[list[complex]], n: int) -> tuple[list[float], list[list[complex]]]:
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    scale = sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n))
    if scale == 0.0:
        return [0.0] * n, v
    thresh = (1e-17 ** 2) * scale
    for _ in range(_MAX_SWEEPS):
        off = sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(i + 1, n))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                app, aqq = a[p][p].real, a[q][q].real
                # phase to make the pivot real, then a real Givens rotation
                ph = apq / mag
                theta = 0.5 * math.atan2(2.0 * mag, aqq - app)
                c, s = math.cos(theta), math.sin(theta)
                jpp, jpq = c, s
                jqp, jqq = -s * ph.conjugate(), c * ph.conjugate()
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = akp * jpp + akq * jqp
                    a[k][q] = akp * jpq + akq * jqq
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = jpp * apk + jqp.conjugate() * aqk
                    a[q][k] = jpq * apk + jqq.conjugate() * aqk
                a[p][q] = a[q][p] = 0j
                a[p][p] = complex(a[p][p].real, 0.0)
                a[q][q] = complex(a[q][q].real, 0.0)
                for k in range(n):
                    vkp, vkq = v[k][p], v[k][q]
                    v[k][p] = vkp * jpp + vkq * jqp
                    v[k][q] = vkp * jpq + vkq * jqq
    else:
        raise LinalgError("Jacobi iteration did not converge")
    return [a[i][i].real for i in range(n)], v


def hermitian_eig(m, tol: float = 1e-12) -> EigenDecomposition:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    ``tol`` is the absolute Hermiticity tolerance on the input; the
    reconstruction residual is checked against ``10 * tol`` scaled by the
    largest entry of ``m``.
    """
    a = _as_square(m)
    n = a.shape[0]
    if np.max(np.abs(a - a.conj().T)) > tol:
        raise LinalgError("matrix is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)
    w, v = _jacobi(a.tolist(), n)
    order = sorted(range(n), key=lambda i: -w[i])
    vals = np.array([w[i] for i in order])
    vecs = np.array(v, dtype=complex)[:, order]
    dec = EigenDecomposition(vals, vecs)
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(dec.reconstruct() - a)) >= 10 * tol * scale:
        raise LinalgError("eigen-decomposition failed its reconstruction check")
    return dec


def hermitian_eigvals(m, tol: float = 1e-12) -> np.ndarray:
    return hermitian_eig(m, tol).eigenvalues


def singular_values(m) -> np.ndarray:
    """Singular values (descending) by one-sided Jacobi column rotations.

    Small singular values come out with absolute error near machine epsilon
    times the norm, which squaring-and-rooting an eigenvalue cannot offer.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.size == 0:
        raise LinalgError(f"expected a non-empty matrix, got shape {a.shape}")
    cols = [list(c) for c in a.T.tolist()]
    n = len(cols)
    floor = 1e-32 * sum(abs(x) ** 2 for c in cols for x in c)
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                kp, kq = cols[p], cols[q]
                alpha = sum(x.real * x.real + x.imag * x.imag for x in kp)
                beta = sum(x.real * x.real + x.imag * x.imag for x in kq)
                g = sum(x.conjugate() * y for x, y in zip(kp, kq))
                mag = abs(g)
                if mag <= 1e-15 * math.sqrt(alpha * beta) or mag <= floor:
                    continue
                rotated = True
                phc = (g / mag).conjugate()
                theta = 0.5 * math.atan2(2.0 * mag, beta - alpha)
                c, s = math.cos(theta), math.sin(theta)
                cols[p] = [c * x - s * phc * y for x, y in zip(kp, kq)]
                cols[q] = [s * x + c * phc * y for x, y in zip(kp, kq)]
        if not rotated:
            break
    else:
        raise LinalgError("one-sided Jacobi did not converge")
    sv = sorted((math.sqrt(sum(abs(x) ** 2 for x in c)) for c in cols), reverse=True)
    return np.array(sv)


def psd_sqrt(m, tol_clip: float = TOL_CLIP) -> np.ndarray:
    """Principal square root of a positive-semidefinite Hermitian matrix.

    Eigenvalues in ``[-tol_clip, 0)`` are rounding noise and are set to zero;
    anything more negative means the input is not PSD.
    """
    dec = hermitian_eig(m)
    w = dec.eigenvalues
    if w.min() < -tol_clip:
        raise LinalgError(f"matrix is not positive semidefinite (eigenvalue {w.min():.3e})")
    root = np.sqrt(np.clip(w, 0.0, None))
    v = dec.eigenvectors
    r = (v * root) @ v.conj().T
    return 0.5 * (r + r.conj().T)


def cubic_roots_real(c2: float, c1: float, c0: float) -> tuple[float, float, float]:
    """Roots of ``t**3 + c2*t**2 + c1*t + c0`` assuming all three are real.

    Trigonometric (Viete) solution with the discriminant clamped at
    ``CUBIC_DISC_CLAMP`` relative to the coefficient scale. Roots are
    Newton-polished where the derivative allows it and returned descending.
    """
    scale = max(abs(c2), math.sqrt(abs(c1)), abs(c0) ** (1.0 / 3.0))
    if scale == 0.0:
        return (0.0, 0.0, 0.0)
    # work on the monic cubic in s = t / scale
    b2, b1, b0 = c2 / scale, c1 / scale / scale, c0 / scale / scale / scale
    p = b1 - b2 * b2 / 3.0
    q = 2.0 * b2**3 / 27.0 - b2 * b1 / 3.0 + b0
    disc = -(4.0 * p**3 + 27.0 * q * q)
    if disc < CUBIC_DISC_CLAMP:
        raise LinalgError(f"cubic has complex roots (scaled discriminant {disc:.3e})")
    shift = -b2 / 3.0
    if p >= 0.0:
        # p == 0 up to rounding: a triple root
        roots = [shift] * 3
    else:
        m = math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, -q / (2.0 * m**3)))
        th = math.acos(arg) / 3.0
        roots = [2.0 * m * math.cos(th - 2.0 * math.pi * k / 3.0) + shift for k in range(3)]
    polished = []
    for s in roots:
        for _ in range(3):
            f = ((s + b2) * s + b1) * s + b0
            df = (3.0 * s + 2.0 * b2) * s + b1
            if abs(df) < 1e-8:
                break
            step = f / df
            s_new = s - step
            f_new = ((s_new + b2) * s_new + b1) * s_new + b0
            if abs(f_new) >= abs(f):
                break
            s = s_new
        polished.append(s * scale)
    polished.sort(reverse=True)
    return (polished[0], polished[1], polished[2])
