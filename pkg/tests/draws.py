"""Seeded samples of the symmetric family shared by unit and acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from entweb import symmetric_family as sf

DRAW_NS = (3, 4, 6, 8, 10)


@dataclass(frozen=True)
class Draw:
    params: sf.FamilyParams
    point: sf.RegionPoint
    signs: tuple[float, float, float]


def _on_boundary(params, xyz):
    """Push an interior point out along its ray until f_A or f_S reaches zero."""
    ax, ay, az = params.a
    fa_slope = ax * xyz[0] + ay * xyz[1] + az * xyz[2]
    s2 = np.maximum(params.s2, 1e-300)
    fs_slope = float(np.sum(xyz / s2))
    limits = []
    if fa_slope > 0:
        limits.append(ax * ay * az / fa_slope)
    if fs_slope > 0:
        limits.append(1.0 / fs_slope)
    t = min(limits) if limits else 1.0
    return np.maximum(xyz * t * (1 - 1e-14), 0.0)


def feasible_draws(count: int = 1000, seed: int = 7, ns=DRAW_NS) -> list[Draw]:
    """Points of V for random weights; every fifth point sits on the boundary of V."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(ns[k % len(ns)])
        params = sf.random_params(n, rng, canonical=bool(k % 2))
        xyz = sf.random_point_in_v(params, rng).as_array()
        if k % 5 == 0:
            xyz = _on_boundary(params, xyz)
        signs = tuple(float(s) for s in rng.choice([-1.0, 1.0], 3))
        out.append(Draw(params, sf.RegionPoint.of(xyz), signs))
    return out
