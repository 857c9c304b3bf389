"""Pair marginals of permutation-symmetric N-qubit states.

With the spin axes along the principal axes of the total-spin correlation
tensor, the two-qubit marginal is fixed by N, the weights ``A_x, A_y, A_z,
A_0`` and the mean spin. In the (normalized) basis

    e1 = (|uu> - |dd>)/sqrt2,  e2 = (|uu> + |dd>)/sqrt2,
    e3 = (|ud> + |du>)/sqrt2,  e4 = (|ud> - |du>)/sqrt2

it reads ``rho = M_block (+) A_0`` divided by N, where the triplet block is

    [[A_x,    <S_z>,  -i<S_y>],
     [<S_z>,  A_y,     <S_x> ],
     [i<S_y>, <S_x>,   A_z   ]].

Everything spectral depends on the mean spin only through the squares
``(X, Y, Z) = (<S_x>^2, <S_y>^2, <S_z>^2)``; the signs are carried on the
side for rebuilding the matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .concurrence import wootters_concurrence
from .linalg import LinalgError, cubic_roots_real, hermitian_eig, psd_sqrt, singular_values
from .qstate import CollectiveMoments, PairDensity

PARAM_TOL = 1e-9
SUM_TOL = 1e-10
TOL_KAPPA = 1e-10
TIE_TOL = 1e-9
AXES = "xyz"

_S2 = 1 / math.sqrt(2)
# columns: e1..e4 in the computational basis |00>,|01>,|10>,|11> (|1> = up)
FAMILY_BASIS = np.array(
    [
        [-_S2, _S2, 0, 0],
        [0, 0, _S2, -_S2],
        [0, 0, _S2, _S2],
        [_S2, _S2, 0, 0],
    ],
    dtype=complex,
)
_FLIP = np.diag([1.0, -1.0, 1.0])


class GradientUndefined(ValueError):
    """kappa vanishes at the point; the gradient formula does not apply."""


@dataclass(frozen=True)
class FamilyParams:
    n: int
    a: np.ndarray  # A_x, A_y, A_z
    a0: float
    b: np.ndarray = field(init=False)
    s2: np.ndarray = field(init=False)  # S_x^2, S_y^2, S_z^2

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(3)
        if self.n < 2:
            raise ValueError(f"N must be >= 2, got {self.n}")
        if a.min() < -PARAM_TOL or self.a0 < -PARAM_TOL:
            raise ValueError(f"negative weights A={a}, A0={self.a0}")
        if abs(a.sum() + self.a0 - self.n) > SUM_TOL * max(1, self.n):
            raise ValueError(f"A_x + A_y + A_z + A_0 = {a.sum() + self.a0!r} != N = {self.n}")
        n = self.n
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "b", a.sum() - 2 * a)
        object.__setattr__(self, "s2", (n * n - 2 * (n - 1) * (a + self.a0)) / 4.0)

    @classmethod
    def from_weights(cls, n: int, ax: float, ay: float, az: float, a0: float | None = None):
        """Build from ``A_x, A_y, A_z``; ``A_0`` defaults to the sum-rule remainder."""
        if a0 is None:
            a0 = n - ax - ay - az
        return cls(n, np.array([ax, ay, az]), a0)

    @property
    def total_spin_sq(self) -> float:
        return float(self.s2.sum())

    @property
    def gamma_m(self) -> float:
        return self.n / (self.n - 1) - self.a0

    @property
    def physical(self) -> bool:
        """All S_mu^2 non-negative (the weights describe real moments)."""
        return bool(self.s2.min() >= -PARAM_TOL)

    def is_canonical(self, tol: float = TIE_TOL) -> bool:
        sx, sy, sz = self.s2
        return sz >= sy - tol and sy >= sx - tol

    def weights(self) -> tuple[float, float, float, float]:
        return (*map(float, self.a), self.a0)


@dataclass(frozen=True)
class RegionPoint:
    X: float
    Y: float
    Z: float

    def __post_init__(self):
        for name in "XYZ":
            v = float(getattr(self, name))
            if v < -PARAM_TOL:
                raise ValueError(f"{name} = {v} is negative")
            object.__setattr__(self, name, max(v, 0.0) + 0.0)

    @classmethod
    def of(cls, xyz) -> "RegionPoint":
        x, y, z = (float(v) for v in xyz)
        return cls(x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z])


ORIGIN = RegionPoint(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SpectralData:
    lambdas: np.ndarray  # descending
    beta: float
    gamma: float

    @classmethod
    def of(cls, lams) -> "SpectralData":
        l1, l2, l3 = sorted((abs(float(v)) for v in lams), reverse=True)
        return cls(np.array([l1, l2, l3]), l1 + l2 + l3, l1 - l2 - l3)

    @property
    def kappa(self) -> float:
        l1, l2, l3 = self.lambdas
        return 2 * (l1 - l2) * (l1 - l3) * (l2 + l3)


def _xyz(point) -> np.ndarray:
    if isinstance(point, RegionPoint):
        return point.as_array()
    return np.asarray(point, dtype=float).reshape(3)


# --------------------------------------------------------------------------
# parameters from moments


def params_from_moments(moments: CollectiveMoments, tol: float = 1e-10):
    """``(FamilyParams, RegionPoint, signs)`` from principal-frame moments."""
    n = moments.n
    corr = moments.corr
    scale = max(1.0, float(np.max(np.abs(corr))))
    if np.max(np.abs(corr - np.diag(np.diag(corr)))) > tol * scale:
        raise ValueError("correlation matrix is not diagonal; apply principal_axes first")
    if n < 2:
        raise ValueError("need at least two qubits")
    s2 = np.diag(corr)
    a0 = (n * (n + 2) - 4 * s2.sum()) / (4 * (n - 1))
    a = (n * n - 4 * s2) / (2 * (n - 1)) - a0
    if a.min() < -PARAM_TOL or a0 < -PARAM_TOL:
        raise ValueError(f"inconsistent moments: A={a}, A0={a0}")
    params = FamilyParams(n, a, a0)
    mean = moments.mean
    signs = tuple(1.0 if m >= 0 else -1.0 for m in mean)
    return params, RegionPoint.of(mean**2), signs


def canonical_permutation(params: FamilyParams) -> list[int]:
    """Axis order that makes ``S_z^2 >= S_y^2 >= S_x^2`` (stable for ties)."""
    return sorted(range(3), key=lambda k: (params.s2[k], k))


def canonicalize(params: FamilyParams, point=ORIGIN, signs=(1.0, 1.0, 1.0)):
    perm = canonical_permutation(params)
    xyz = _xyz(point)
    new = FamilyParams(params.n, params.a[perm], params.a0)
    return new, RegionPoint.of(xyz[perm]), tuple(signs[k] for k in perm)


# --------------------------------------------------------------------------
# the matrix


def triplet_block(params: FamilyParams, point, signs=(1.0, 1.0, 1.0)) -> np.ndarray:
    """Triplet block of ``N * rho`` in the e1, e2, e3 basis."""
    ax, ay, az = params.a
    x, y, z = (s * math.sqrt(v) for s, v in zip(signs, _xyz(point)))
    return np.array(
        [[ax, z, -1j * y], [z, ay, x], [1j * y, x, az]],
        dtype=complex,
    )


def flipped_block(block: np.ndarray) -> np.ndarray:
    """Time reversal of the triplet block: the mean spin changes sign."""
    return _FLIP @ block.conj() @ _FLIP


def build_rho(params: FamilyParams, point, signs=(1.0, 1.0, 1.0), tol: float = 1e-10) -> PairDensity:
    m = np.zeros((4, 4), dtype=complex)
    m[:3, :3] = triplet_block(params, point, signs)
    m[3, 3] = params.a0
    m /= params.n
    w = hermitian_eig(m).eigenvalues
    if w.min() < -tol:
        raise ValueError(f"point is outside the physical region (eigenvalue {w.min():.3e})")
    rho = FAMILY_BASIS @ m @ FAMILY_BASIS.conj().T
    return PairDensity(0.5 * (rho + rho.conj().T))


# --------------------------------------------------------------------------
# region functions


def f_A(params: FamilyParams, point) -> float:
    ax, ay, az = params.a
    X, Y, Z = _xyz(point)
    return float(ax * ay * az - ax * X - ay * Y - az * Z)


def f_S(params: FamilyParams, point) -> float:
    total = 1.0
    for v, s2 in zip(_xyz(point), params.s2):
        if s2 > 0:
            total -= v / s2
        elif v > 0:
            return -math.inf
    return float(total)


def f_0(params: FamilyParams, point) -> float:
    return float(np.sum(params.a**2) - 2 * np.sum(_xyz(point)))


def f_B(params: FamilyParams, point) -> float:
    bx, by, bz = params.b
    X, Y, Z = _xyz(point)
    return float(-bx * by * bz * (bx + by + bz) + 4 * (by * bz * X + bx * bz * Y + bx * by * Z))


def in_region_V(params: FamilyParams, point, tol: float = 1e-12) -> bool:
    xyz = _xyz(point)
    return bool(xyz.min() >= -tol and f_A(params, xyz) >= -tol and f_S(params, xyz) >= -tol)


def in_region_W(params: FamilyParams, point, tol: float = 1e-12) -> bool:
    return f_A(params, point) >= -tol and f_B(params, point) >= -tol


# --------------------------------------------------------------------------
# spectrum


def _lambdas_matrix(params: FamilyParams, point) -> np.ndarray:
    block = triplet_block(params, point)
    root = psd_sqrt(block)
    return singular_values(root @ (_FLIP @ root.conj() @ _FLIP))


def _lambdas_cubic(params: FamilyParams, point) -> np.ndarray:
    e1 = f_0(params, point)
    fa = f_A(params, point)
    e2 = (e1 * e1 - f_B(params, point)) / 4.0
    e3 = fa * fa
    t1, t2, t3 = cubic_roots_real(-e1, e2, -e3)
    scale = max(1.0, e1)
    if t3 < -1e-9 * scale:
        raise ValueError(f"negative squared root {t3:.3e}: point is infeasible")
    if t1 > 0 and t2 > 0:
        # the smallest root from the product of roots is far better conditioned
        t3 = e3 / (t1 * t2)
    return np.sqrt(np.clip([t1, t2, t3], 0.0, None))


def lambdas(params: FamilyParams, point, route: str = "matrix") -> SpectralData:
    """Square roots ``lambda_i`` of the triplet-block eigenvalues of ``N^2 rho rho~``.

    ``route="matrix"`` takes singular values of ``sqrt(M) sqrt(M~)`` for the
    triplet block ``M``; ``route="cubic"`` solves for ``lambda_i^2`` as the
    roots of ``t^3 - f0 t^2 + (f0^2 - fB)/4 t - fA^2``.
    """
    if f_A(params, point) < -1e-9 * max(1.0, float(np.prod(params.a))):
        raise ValueError("point violates f_A >= 0; the marginal is not PSD")
    if route == "matrix":
        try:
            lams = _lambdas_matrix(params, point)
        except LinalgError as exc:
            raise ValueError(str(exc)) from exc
    elif route == "cubic":
        lams = _lambdas_cubic(params, point)
    else:
        raise ValueError(f"unknown route {route!r}")
    return SpectralData.of(lams)


def closed_form_concurrence(params: FamilyParams, point, route: str = "matrix") -> float:
    sd = lambdas(params, point, route)
    n = params.n
    return max((sd.gamma - params.a0) / n, (params.a0 - sd.beta) / n, 0.0)


def family_concurrence(params: FamilyParams, point, signs=(1.0, 1.0, 1.0)) -> float:
    """Wootters concurrence of the rebuilt 4x4 marginal (independent route)."""
    return wootters_concurrence(build_rho(params, point, signs)).value


# --------------------------------------------------------------------------
# gradient and directions


def grad_gamma(params: FamilyParams, point, tol_kappa: float = TOL_KAPPA, route: str = "matrix") -> np.ndarray:
    sd = lambdas(params, point, route)
    kappa = sd.kappa
    if kappa <= tol_kappa:
        raise GradientUndefined(f"kappa = {kappa:.3e} <= {tol_kappa:.1e}")
    g = sd.gamma
    bx, by, bz = params.b
    return np.array([(g + by) * (g + bz), (g + bz) * (g + bx), (g + bx) * (g + by)]) / kappa


DIRECTIONS = ("qyx", "qzx", "qyz", "pxy", "pyz", "pxz")


def direction_vector(params: FamilyParams, name: str) -> np.ndarray:
    ax, ay, az = params.a
    sx, sy, sz = params.s2
    vectors = {
        "qyx": (ay * az, -az * ax, 0.0),
        "qzx": (ay * az, 0.0, -ax * ay),
        "qyz": (0.0, -az * ax, ax * ay),
        "pxy": (-sx, sy, 0.0),
        "pyz": (0.0, -sy, sz),
        "pxz": (-sx, 0.0, sz),
    }
    if name not in vectors:
        raise ValueError(f"unknown direction {name!r}; expected one of {DIRECTIONS}")
    return np.array(vectors[name])


def directional_derivative(
    params: FamilyParams, point, direction: str, tol_kappa: float = TOL_KAPPA, plane_tol: float = 1e-8
) -> float:
    """Closed-form derivative of gamma along a q- (on pi_A) or p-direction (on pi_S)."""
    if direction.startswith("q"):
        off = abs(f_A(params, point)) / max(1.0, float(np.prod(params.a)))
        if off > plane_tol:
            raise ValueError("q-directions are tangent to f_A = 0; point is off that plane")
    else:
        if abs(f_S(params, point)) > plane_tol:
            raise ValueError("p-directions are tangent to f_S = 0; point is off that plane")
    sd = lambdas(params, point)
    kappa = sd.kappa
    if kappa <= tol_kappa:
        raise GradientUndefined(f"kappa = {kappa:.3e} <= {tol_kappa:.1e}")
    g = sd.gamma
    ax, ay, az = params.a
    bx, by, bz = params.b
    sx, sy, sz = params.s2
    gm = params.gamma_m
    if direction == "qyx":
        num = az * (bz**2 - g * g) * (ax - ay)
    elif direction == "qzx":
        num = ay * (by**2 - g * g) * (ax - az)
    elif direction == "qyz":
        num = ax * (g * g - bx**2) * (ay - az)
    elif direction == "pxy":
        num = (g + bz) * (g - gm) * (sy - sx)
    elif direction == "pxz":
        num = (g + by) * (g - gm) * (sz - sx)
    elif direction == "pyz":
        num = (g + bx) * (g - gm) * (sz - sy)
    else:
        raise ValueError(f"unknown direction {direction!r}; expected one of {DIRECTIONS}")
    return num / kappa


# --------------------------------------------------------------------------
# axes and geometry


def axis_roots(params: FamilyParams, axis: str, mean_value: float) -> tuple[float, float, float]:
    """lambda_i for a point on one coordinate axis, from the axis closed form.

    For the z axis: ``{A_z, [sqrt((A_x+A_y)^2 - 4<S_z>^2) +- (A_x - A_y)]/2}``;
    x and y follow by cyclic exchange.
    """
    k = AXES.index(axis)
    a_on = params.a[k]
    a1, a2 = params.a[(k + 1) % 3], params.a[(k + 2) % 3]
    disc = (a1 + a2) ** 2 - 4 * mean_value**2
    if disc < -1e-12 * max(1.0, (a1 + a2) ** 2):
        raise ValueError("negative discriminant: the point lies beyond f_A = 0")
    r = math.sqrt(max(disc, 0.0))
    return (float(a_on), (r + (a1 - a2)) / 2, (r - (a1 - a2)) / 2)


def axis_point(axis: str, value: float) -> RegionPoint:
    xyz = [0.0, 0.0, 0.0]
    xyz["XYZ".index(axis.upper())] = value
    return RegionPoint.of(xyz)


def gamma_on_axis(params: FamilyParams, axis: str, squared_mean: float) -> float:
    return SpectralData.of(axis_roots(params, axis, math.sqrt(max(squared_mean, 0.0)))).gamma


def gamma_p_sz(params: FamilyParams) -> float:
    """gamma at (0, 0, S_z^2) in the form ``A_z - sqrt((A_z+A_0)(A_z+A_0-2))``."""
    u = params.a[2] + params.a0
    return float(params.a[2] - math.sqrt(max(u * (u - 2), 0.0)))


def p1_point(params: FamilyParams) -> RegionPoint | None:
    """Intersection of f_A = 0 and f_S = 0 in the plane Y = 0, if it lies in X, Z >= 0.

    Parametrized along the edge ``P_AZ -> P_AX`` of pi_A as
    ``(t A_y A_z, 0, (1 - t) A_x A_y)`` with ``t = d1 / (d1 + d2)``,
    ``d1 = 1 - A_x A_y / S_z^2`` and ``d2 = A_y A_z / S_x^2 - 1``. When both
    are positive (the usual situation) nothing cancels, which matters
    where pi_A and pi_S are nearly parallel.
    """
    ax, ay, az = params.a
    sx, _, sz = params.s2
    if sz <= 0:
        return None
    d1 = (sz - ax * ay) / sz
    if sx <= 0:
        t = 0.0
    else:
        d2 = (ay * az - sx) / sx
        den = d1 + d2
        if abs(den) < 1e-300:
            return None
        t = d1 / den
    if t < -1e-12 or t > 1 + 1e-12:
        return None
    t = min(max(t, 0.0), 1.0)
    return RegionPoint(t * ay * az, 0.0, (1 - t) * ax * ay)


def p1_quadratic_roots(params: FamilyParams, point) -> tuple[float, float]:
    """Roots of ``t^2 - 2 f0 t + fB = 0`` (ascending); at P_1 the smaller is gamma^2."""
    F0 = f_0(params, point)
    FB = f_B(params, point)
    r = math.sqrt(max(F0 * F0 - FB, 0.0))
    big = F0 + r
    small = FB / big if big > 0 else F0 - r
    return (small, big)


def t_beta(params: FamilyParams) -> float:
    """Closed form of the second quadratic root at P_1."""
    ax, _, az = params.a
    by = params.b[1]
    n = params.n
    a0 = params.a0
    return 4 * ax * az / ((by - params.gamma_m) * (n - 1)) + a0 * (a0 - 2)


def t_beta_expanded(params: FamilyParams) -> float:
    bx, by, bz = params.b
    n = params.n
    a0 = params.a0
    den = by - params.gamma_m
    return (
        (2 - a0) ** 2
        + 2 * a0 * (by + a0 - 2) / den
        - (2 * (by + a0 - 2) * (by + n) + (bz - by) * (by - bx)) / ((n - 1) * den)
    )


@dataclass(frozen=True)
class RegionGeometry:
    vertices: dict  # name -> RegionPoint (axis intercepts; None if off the positive axis)
    gammas: dict  # name -> gamma where it is defined
    in_w: dict  # name -> vertex lies in W
    p0: RegionPoint | None
    p1: RegionPoint | None
    gamma_m: float


def _intercept(value: float) -> float | None:
    return value if value >= 0 and math.isfinite(value) else None


def region_geometry(params: FamilyParams, tol: float = TIE_TOL) -> RegionGeometry:
    ax, ay, az = params.a
    bx, by, bz = params.b
    bsum = bx + by + bz
    vertices: dict = {
        "P_AX": axis_point("x", ay * az),
        "P_AY": axis_point("y", ax * az),
        "P_AZ": axis_point("z", ax * ay),
        "P_SX": axis_point("x", max(params.s2[0], 0.0)),
        "P_SY": axis_point("y", max(params.s2[1], 0.0)),
        "P_SZ": axis_point("z", max(params.s2[2], 0.0)),
    }
    for axis, bk in zip("XYZ", (bx, by, bz)):
        v = _intercept(bk * bsum / 4.0)
        vertices[f"P_B{axis}"] = None if v is None else axis_point(axis, v)
    gammas: dict = {}
    in_w: dict = {}
    for name, pt in vertices.items():
        if pt is None:
            gammas[name] = None
            in_w[name] = False
            continue
        in_w[name] = in_region_W(params, pt, tol=1e-10 * max(1.0, float(np.prod(params.a))))
        axis = "xyz"[int(np.argmax(pt.as_array())) if pt.as_array().max() > 0 else 0]
        try:
            gammas[name] = gamma_on_axis(params, axis, float(pt.as_array().max()))
        except ValueError:
            gammas[name] = None
    strict = ax - ay > tol and ay - az > tol and az > tol
    p0 = None
    if strict:
        p0 = RegionPoint(az**2 * (ax - ay) / (ax - az), 0.0, ax**2 * (ay - az) / (ax - az))
    return RegionGeometry(vertices, gammas, in_w, p0, p1_point(params), params.gamma_m)


# --------------------------------------------------------------------------
# sampling helpers


def bounding_box(params: FamilyParams) -> np.ndarray:
    """Per-axis extent of V: the smaller of the two plane intercepts."""
    ax, ay, az = params.a
    s2 = np.maximum(params.s2, 0.0)
    return np.array([min(ay * az, s2[0]), min(ax * az, s2[1]), min(ax * ay, s2[2])])


def random_params(n: int, rng: np.random.Generator, canonical: bool = True) -> FamilyParams:
    """Weights drawn uniformly from the physical part of the A-simplex."""
    while True:
        w = rng.dirichlet(np.ones(4)) * n
        a = w[:3]
        a0 = n - a.sum()
        s2 = (n * n - 2 * (n - 1) * (a + a0)) / 4.0
        if s2.min() > 0:
            p = FamilyParams(n, a, a0)
            return canonicalize(p)[0] if canonical else p


def random_point_in_v(params: FamilyParams, rng: np.random.Generator, max_tries: int = 100000) -> RegionPoint:
    box = bounding_box(params)
    for _ in range(max_tries):
        xyz = rng.uniform(0, 1, 3) * box
        if in_region_V(params, xyz, tol=0.0):
            return RegionPoint.of(xyz)
    raise RuntimeError("could not sample a point in V")
