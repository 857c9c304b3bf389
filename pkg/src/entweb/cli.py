"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 numeric-validity error (for example a non-PSD density matrix).
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field

import numpy as np

from . import qstate as qs
from .concurrence import wootters_concurrence
from .formats import FormatError, read_state
from .linalg import LinalgError
from .optimizer import global_max, random_state_bound_check
from .symmetric_family import (
    FamilyParams,
    GradientUndefined,
    RegionPoint,
    bounding_box,
    f_A,
    f_S,
    grad_gamma,
    in_region_V,
    lambdas,
    params_from_moments,
    region_geometry,
)
from .webs import ring_formula, ring_search, w_state_concurrence

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def fmt(x) -> str:
    """Reals with 12 significant digits; everything else as str."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return "0" if v == 0 else f"{v:.12g}"
    return str(x)


def parse_n_range(text: str) -> list[int]:
    """``5``, ``3..8``, ``3-8`` or a comma list of those."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            for sep in ("..", "-"):
                if sep in part:
                    lo, hi = part.split(sep, 1)
                    lo_i, hi_i = int(lo), int(hi)
                    if hi_i < lo_i:
                        raise UsageError(f"empty range {part!r}")
                    out.extend(range(lo_i, hi_i + 1))
                    break
            else:
                out.append(int(part))
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"cannot parse N range {text!r}") from None
    return out


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    def comment(self) -> str:
        items = " ".join(f"{k}={fmt(v)}" for k, v in sorted(self.options.items()))
        return f"# entweb {self.command} {items}".rstrip()


class Table:
    def __init__(self, config: RunConfig, columns: list[str], delimiter: str):
        self.config = config
        self.columns = columns
        self.buf = io.StringIO()
        self.buf.write(config.comment() + "\n")
        self.writer = csv.writer(self.buf, delimiter=delimiter, lineterminator="\n")
        self.writer.writerow(columns)

    def row(self, **values) -> None:
        self.writer.writerow([fmt(values.get(c)) for c in self.columns])

    def emit(self, out_path: str | None) -> None:
        text = self.buf.getvalue()
        if out_path:
            with open(out_path, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _delimiter(args) -> str:
    return "\t" if args.format == "tsv" else ","


# --------------------------------------------------------------------------
# commands


def cmd_concurrence(args) -> int:
    state = read_state(args.file)
    n = state.n_qubits
    if n < 2:
        raise UsageError("need at least two qubits")
    i, j = args.pair
    if not (1 <= i <= n and 1 <= j <= n and i != j):
        raise UsageError(f"pair ({i}, {j}) is not two distinct qubits in 1..{n}")
    i, j = min(i, j), max(i, j)
    res = wootters_concurrence(qs.partial_trace_pair(state, i, j))
    print(f"C = {fmt(res.value)}")
    print("l = " + " ".join(fmt(x) for x in res.sqrt_eigs))
    if n >= 2 and qs.is_pair_marginal_uniform(state):
        _, moments = qs.principal_axes(qs.collective_moments(state))
        params, point, signs = params_from_moments(moments)
        ax, ay, az, a0 = params.weights()
        print("marginal-uniform: yes")
        print(f"A = {fmt(ax)} {fmt(ay)} {fmt(az)}  A0 = {fmt(a0)}")
        print(f"S2 = {' '.join(fmt(x) for x in params.s2)}")
        print(f"XYZ = {fmt(point.X)} {fmt(point.Y)} {fmt(point.Z)}")
    else:
        print("marginal-uniform: no")
    return EXIT_OK


def cmd_verify_bound(args) -> int:
    ns = parse_n_range(args.n)
    if any(not 3 <= n <= 64 for n in ns):
        raise UsageError("verify-bound needs 3 <= N <= 64")
    tol = args.tol if args.tol is not None else 1e-6
    cfg = RunConfig(
        "verify-bound",
        {"n": args.n, "grid_depth": args.grid_depth, "refine_iters": args.refine_iters,
         "resolution": args.resolution, "seed": args.seed, "tol": tol},
    )
    cols = ["N", "c_max", "two_over_N", "gap", "A_x", "A_y", "A_z", "A_0", "X", "Y", "Z",
            "case", "raw_case", "flat", "oracle_agrees", "optimal_state_error"]
    table = Table(cfg, cols, _delimiter(args))
    ok = True
    for n in ns:
        r = global_max(n, args.grid_depth, args.refine_iters, args.seed, args.resolution)
        gap = r.c_max - 2 / n
        ax, ay, az, a0 = r.argmax_params.weights()
        agrees = r.certificate["oracle_agrees"]
        table.row(N=n, c_max=r.c_max, two_over_N=2 / n, gap=gap, A_x=ax, A_y=ay, A_z=az, A_0=a0,
                  X=r.argmax_point.X, Y=r.argmax_point.Y, Z=r.argmax_point.Z, case=r.case.value,
                  raw_case=r.raw_case.value, flat=r.flat, oracle_agrees=agrees,
                  optimal_state_error=r.certificate["optimal_state_error"])
        ok &= abs(gap) <= tol and agrees is not False
    table.emit(args.out)
    return EXIT_OK if ok else EXIT_FAIL


def _triangle(intercepts, m: int):
    """Barycentric point grid on the triangle spanned by three axis intercepts."""
    a, b, c = intercepts
    for i in range(m + 1):
        for j in range(m + 1 - i):
            k = m - i - j
            yield np.array([a * i, b * j, c * k]) / m


def cmd_region(args) -> int:
    n = args.n_single
    ax, ay, az = args.weights
    params = FamilyParams.from_weights(n, ax, ay, az, args.a0)
    if not params.physical:
        raise UsageError(f"weights give negative S^2: {params.s2}")
    m = args.resolution
    cfg = RunConfig("region", {"n": n, "weights": " ".join(fmt(x) for x in params.weights()),
                               "resolution": m, "seed": args.seed})
    cols = ["kind", "name", "X", "Y", "Z", "gamma", "f_A", "f_S", "in_W", "dX", "dY", "dZ"]
    table = Table(cfg, cols, _delimiter(args))
    geo = region_geometry(params)

    def gamma_at(pt):
        try:
            return lambdas(params, pt).gamma
        except ValueError:
            return None

    for name, pt in geo.vertices.items():
        if pt is None:
            table.row(kind="vertex", name=name)
            continue
        table.row(kind="vertex", name=name, X=pt.X, Y=pt.Y, Z=pt.Z, gamma=geo.gammas[name],
                  f_A=f_A(params, pt), f_S=f_S(params, pt), in_W=geo.in_w[name])
    for name, pt in (("P_0", geo.p0), ("P_1", geo.p1)):
        if pt is None:
            table.row(kind="vertex", name=name)
        else:
            table.row(kind="vertex", name=name, X=pt.X, Y=pt.Y, Z=pt.Z, gamma=gamma_at(pt),
                      f_A=f_A(params, pt), f_S=f_S(params, pt))
    table.row(kind="scalar", name="gamma_m", gamma=geo.gamma_m)

    planes = {
        "pi_A": [geo.vertices[k] for k in ("P_AX", "P_AY", "P_AZ")],
        "pi_S": [geo.vertices[k] for k in ("P_SX", "P_SY", "P_SZ")],
        "pi_B": [geo.vertices[k] for k in ("P_BX", "P_BY", "P_BZ")],
    }
    for name, verts in planes.items():
        if any(v is None for v in verts):
            continue
        intercepts = [verts[0].X, verts[1].Y, verts[2].Z]
        for xyz in _triangle(intercepts, m):
            pt = RegionPoint.of(xyz)
            g = gamma_at(pt) if name != "pi_B" and in_region_V(params, pt, 1e-12) else None
            table.row(kind="plane", name=name, X=pt.X, Y=pt.Y, Z=pt.Z, gamma=g,
                      f_A=f_A(params, pt), f_S=f_S(params, pt))
    box = bounding_box(params)
    k = max(2, m // 2)
    for idx in np.ndindex(k, k, k):
        xyz = (np.array(idx) + 0.5) / k * box
        if not in_region_V(params, xyz, 0.0) or f_A(params, xyz) <= 0:
            continue
        try:
            g = grad_gamma(params, xyz)
        except (GradientUndefined, ValueError):
            continue
        table.row(kind="arrow", name="grad_gamma", X=xyz[0], Y=xyz[1], Z=xyz[2],
                  gamma=lambdas(params, xyz).gamma, f_A=f_A(params, xyz), f_S=f_S(params, xyz),
                  dX=g[0], dY=g[1], dZ=g[2])
    table.emit(args.out)
    return EXIT_OK


def cmd_web(args) -> int:
    if args.kind == "w":
        if args.n is None:
            raise UsageError("web w needs --n")
        n = int(args.n)
        if not 2 <= n <= qs.MAX_QUBITS:
            raise UsageError(f"web w needs 2 <= N <= {qs.MAX_QUBITS}")
        tol = args.tol if args.tol is not None else 1e-10
        r = w_state_concurrence(n)
        print(f"web w N = {n}")
        print(f"concurrence = {fmt(r.concurrence)}")
        print(f"reference = {fmt(r.reference_value)}")
        print(f"deviation = {fmt(r.deviation)}")
        print(f"pipeline: {r.pipeline}")
        return EXIT_OK if r.deviation <= tol else EXIT_FAIL
    half_n = args.half_n
    if half_n is None:
        raise UsageError("web ring needs --half-n")
    if half_n < 2:
        raise UsageError("--half-n must be at least 2")
    ref = ring_formula(half_n)
    print(f"web ring half_n = {half_n} ({2 * half_n} qubits)")
    print(f"formula = {ref} = {fmt(float(ref))}")
    if args.formula_only:
        return EXIT_OK
    if 2 * half_n > 10:
        raise UsageError("ring search is limited to 10 qubits")
    r = ring_search(half_n, seed=args.seed, iterations=args.iterations, restarts=args.restarts)
    print(f"search = {fmt(r.concurrence)} (seed {args.seed}, restart {r.details['restart']})")
    print(f"reached = {fmt(r.reached)}")
    print(f"shift_error = {fmt(r.details['shift_error'])}")
    print(f"neighbour_spread = {fmt(r.details['nn_spread'])}")
    print(f"pipeline: {r.pipeline}")
    return EXIT_OK if r.reached else EXIT_FAIL


def cmd_random_check(args) -> int:
    n = args.n_single
    if not 2 <= n <= qs.MAX_TWIRL_QUBITS:
        raise UsageError(f"random-check needs 2 <= N <= {qs.MAX_TWIRL_QUBITS}")
    if args.samples < 0:
        raise UsageError("--samples must be non-negative")
    mode = "symmetric" if args.symmetric_only else args.mode
    tol = args.tol if args.tol is not None else 1e-9
    cfg = RunConfig("random-check", {"n": n, "samples": args.samples, "seed": args.seed,
                                     "mode": mode, "bins": args.bins, "tol": tol})
    cols = ["row", "bin_lo", "bin_hi", "count", "max_abs_A0", "max_C", "bound"]
    table = Table(cfg, cols, _delimiter(args))
    res = random_state_bound_check(n, args.samples, args.seed, mode)
    bound = 2 / n
    if args.samples:
        edges = np.linspace(0.0, bound, args.bins + 1)
        for lo, hi in zip(edges[:-1], edges[1:]):
            last = hi == edges[-1]
            sel = (res.values >= lo) & ((res.values <= hi) if last else (res.values < hi))
            a0 = float(np.max(np.abs(res.a0_values[sel]))) if sel.any() else None
            table.row(row="bin", bin_lo=lo, bin_hi=hi, count=int(sel.sum()), max_abs_A0=a0)
        over = res.values > bound
        if over.any():
            table.row(row="over", bin_lo=bound, count=int(over.sum()),
                      max_abs_A0=float(np.max(np.abs(res.a0_values[over]))))
        table.row(row="max", max_C=res.max_c, bound=bound,
                  max_abs_A0=float(np.max(np.abs(res.a0_values))))
    table.emit(args.out)
    return EXIT_OK if res.max_c <= bound + tol else EXIT_FAIL


# --------------------------------------------------------------------------


def _add_output(p):
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.add_argument("--format", choices=("csv", "tsv"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="entweb", description="Pairwise entanglement of symmetric qubit states.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("concurrence", help="concurrence of one qubit pair of a QSV/QDM state")
    p.add_argument("file")
    p.add_argument("--pair", nargs=2, type=int, default=(1, 2), metavar=("I", "J"))
    p.set_defaults(func=cmd_concurrence)

    p = sub.add_parser("verify-bound", help="maximize concurrence over the family and compare with 2/N")
    p.add_argument("--n", required=True, help="N, or a range like 3..8")
    p.add_argument("--grid-depth", type=int, default=24)
    p.add_argument("--refine-iters", type=int, default=400)
    p.add_argument("--resolution", type=int, default=100, help="lattice size of the oracle check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float)
    _add_output(p)
    p.set_defaults(func=cmd_verify_bound)

    p = sub.add_parser("region", help="export the region geometry, gamma field and gradient arrows")
    p.add_argument("--n", dest="n_single", type=int, required=True)
    p.add_argument("--weights", nargs=3, type=float, required=True, metavar=("AX", "AY", "AZ"))
    p.add_argument("--a0", type=float, help="singlet weight (default: N minus the others)")
    p.add_argument("--resolution", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("web", help="W-state web or entangled loop")
    p.add_argument("kind", choices=("w", "ring"))
    p.add_argument("--n")
    p.add_argument("--half-n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=500)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--formula-only", action="store_true")
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_web)

    p = sub.add_parser("random-check", help="Monte-Carlo search for a violation of 2/N")
    p.add_argument("--n", dest="n_single", type=int, required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("twirled", "symmetric", "both"), default="both")
    p.add_argument("--symmetric-only", action="store_true", help="same as --mode symmetric")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--tol", type=float)
    _add_output(p)
    p.set_defaults(func=cmd_random_check)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LinalgError, qs.NotPositiveError) as exc:
        print(f"entweb: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, FormatError, OSError, ValueError) as exc:
        print(f"entweb: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
