"""Command-line entry points.

Exit status: 0 on success, 1 on usage errors, 2 on numeric failure
(divergence, lifting-margin violation, unreadable field data).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .fields import LiftedField, VortexError, lifting
from .grid import make_grid
from .io import FieldFormatError, csv_text, read_field, write_csv, write_field, write_report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit with status 1
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float(name: str):
    def parse(text: str) -> float:
        try:
            return float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"--{name} expects a number, got {text!r}") from None

    return parse


def _int(name: str):
    def parse(text: str) -> int:
        try:
            return int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"--{name} expects an integer, got {text!r}") from None

    return parse


def _vector(name: str):
    def parse(text: str) -> tuple[float, ...]:
        try:
            return tuple(float(t) for t in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"--{name} expects comma-separated numbers, got {text!r}") from None

    return parse


def _emit(text: str, out: str | None) -> None:
    if out:
        from .io import atomic_write_text

        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _grid(n, length):
    try:
        return make_grid(2, n, length)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Subcommands


def cmd_curve1d(args) -> int:
    from .soliton1d import ep_curve, quadrature

    if args.steps < 1 or not 0 < args.cmin <= args.cmax < 1:
        raise UsageError("need 0 < cmin <= cmax < 1 and steps >= 1")
    cs = np.linspace(args.cmin, args.cmax, args.steps) if args.steps > 1 else np.array([args.cmin])
    table = ep_curve(cs)
    header = ["c", "p", "E", "E_pred", "quad_E", "quad_p", "err_E", "err_p", "dE_dp"]
    rows = []
    for i, c in enumerate(cs):
        q = quadrature(float(c))
        rows.append(
            [
                c,
                table.momentum[i],
                table.energy[i],
                table.energy_from_momentum[i],
                q.energy,
                q.momentum,
                q.energy - table.energy[i],
                q.momentum - table.momentum[i],
                table.local_slope[i],
            ]
        )
    _emit(csv_text(header, rows), args.out)
    return EXIT_OK


def cmd_profile1d(args) -> int:
    from .soliton1d import phase, profile

    if args.n < 2 or args.xmax <= 0:
        raise UsageError("need n >= 2 and xmax > 0")
    if not 0 < args.c < 1:
        raise UsageError("profile1d needs 0 < c < 1")
    x = np.linspace(-args.xmax, args.xmax, args.n)
    u1, u2, u3 = profile(args.c, x)
    th = phase(args.c, x)
    _emit(csv_text(["x", "u1", "u2", "u3", "theta"], zip(x, u1, u2, u3, th)), args.out)
    return EXIT_OK


def cmd_kernel_norm(args) -> int:
    from .kernels import LC_NORM_BOUND, lc_norm_43

    if not 0 < args.c <= 1:
        raise UsageError("kernel-norm needs 0 < c <= 1")
    v = lc_norm_43(args.c)
    ok = v <= LC_NORM_BOUND
    print(f"{v:.17g} {'PASS' if ok else 'FAIL'} (bound {LC_NORM_BOUND:g})")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_symbol(args) -> int:
    from .kernels import KernelSymbol, eval_symbol

    try:
        sym = KernelSymbol(args.kind, args.c, args.j, args.k, len(args.xi))
        print(f"{eval_symbol(sym, args.xi):.17g}")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return EXIT_OK


def cmd_kernel_farfield(args) -> int:
    from .kernels import farfield_comparison, kernel_physical

    grid = _grid(args.n, args.length)
    try:
        K = kernel_physical(args.kind, args.c, grid, args.j, args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.R > 0.4 * args.length / 2:
        raise UsageError("--R must lie within 40% of the half-box")
    dirs, measured, predicted = farfield_comparison(K, args.R, args.ndir)
    scale = np.max(np.abs(predicted))
    rows = []
    for d, m, p in zip(dirs, measured, predicted):
        rel = abs(m - p) / abs(p) if p != 0 else float("inf")
        rows.append([float(np.arctan2(d[1], d[0])), d[0], d[1], m, p, rel, abs(m - p) / scale])
    header = ["angle", "sigma1", "sigma2", "measured", "predicted", "rel_err", "err_over_max"]
    _emit(csv_text(header, rows), args.out)
    return EXIT_OK


def _solve_params(args):
    from .solver2d import SolveParams

    if not 0 < args.damping <= 1:
        raise UsageError("--damping must lie in (0, 1]")
    return SolveParams(
        damping=args.damping,
        tol=args.tol,
        max_iter=args.max_iter,
        stabilize=args.stabilize,
        warmup=args.warmup,
    )


def _initial(args, grid) -> LiftedField:
    from .solver2d import initial_guess, rescale_seed

    if args.init.startswith("file:"):
        f = read_field(args.init[5:])
        if f.grid != grid:
            raise UsageError("seed field grid differs from the requested grid")
        lf = lifting(f)
        return lf if f.c == args.c else rescale_seed(lf, args.c)
    if args.init not in ("bump", "lump"):
        raise UsageError("--init must be bump, lump or file:PATH")
    try:
        return initial_guess(args.c, grid, args.init, args.amp)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _log_rows(res):
    taus = (float("nan"),) + tuple(res.damping_history)
    return [[i, r, t] for i, (r, t) in enumerate(zip(res.residual_history, taus))]


def cmd_solve2d(args) -> int:
    from .solver2d import solve

    if not 0 < args.c < 1:
        raise UsageError("solve2d needs 0 < c < 1")
    grid = _grid((args.nx, args.ny), (args.lx, args.ly))
    params = _solve_params(args)
    init = _initial(args, grid)
    res = solve(args.c, grid, init, params)
    write_field(res.field, args.out)
    log = args.log or str(Path(args.out).with_suffix(".log.csv"))
    write_csv(log, ["step", "residual", "damping"], _log_rows(res))
    print(
        f"converged={res.converged} residual={res.residual:.6g} iterations={res.iterations} status={res.status}"
    )
    return EXIT_NUMERIC if res.status.startswith(("diverged", "margin")) else EXIT_OK


def cmd_continuation(args) -> int:
    from .solver2d import branch_table, continuation, speed_grid

    cs = speed_grid(args.cstart, args.cend, args.steps)
    if np.any(cs <= 0) or np.any(cs >= 1):
        raise UsageError("speeds must lie in (0, 1)")
    grid = _grid((args.nx, args.ny), (args.lx, args.ly))
    params = _solve_params(args)
    args.c = float(cs[0])
    init = _initial(args, grid)
    results = continuation(cs, grid, init, params)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for i, r in enumerate(results):
        write_field(r.field, outdir / f"step_{i:03d}.llfw")
    rows = [[b.c, b.energy, b.momentum, b.residual, b.converged] for b in branch_table(results)]
    write_csv(outdir / "branch.csv", ["c", "E", "p", "residual", "converged"], rows)
    last = results[-1]
    print(f"steps={len(results)} last_c={last.lifted.c:.6g} converged={last.converged} status={last.status}")
    return EXIT_NUMERIC if last.status.startswith(("diverged", "margin")) else EXIT_OK


def cmd_diagnose(args) -> int:
    from .diagnostics import diagnose

    t0 = time.perf_counter()
    f = read_field(args.input)
    rep = diagnose(f)
    payload = rep.to_dict()
    payload["metadata"] = {
        "c": f.c,
        "grid": {"n": list(f.grid.n), "length": list(f.grid.length)},
        "tool_version": __version__,
        "wall_time_s": time.perf_counter() - t0,
    }
    if args.out:
        write_report(args.out, payload)
    else:
        from .io import report_json

        sys.stdout.write(report_json(payload))
    return EXIT_OK


def farfield_rows(f, ndir: int = 16) -> list[list]:
    from .farfield import alpha_beta, compare_farfield, decay_fit, default_radii

    co = alpha_beta(f)
    rows: list[list] = [
        ["coefficient", "alpha", "", "", co.alpha, ""],
        ["coefficient", "beta2", "", "", co.beta[0], ""],
        ["coefficient", "lambda_phase", "", "", float(np.angle(co.lambda_inf)), ""],
    ]
    for q in ("u3", "grad_theta", "grad_u3"):
        try:
            fit = decay_fit(f, q)
            rows.append(["decay", q, "", "", fit.exponent, fit.expected])
            rows.append(["decay_misfit", q, "", "", fit.misfit, int(fit.power_law)])
        except (ValueError, VortexError) as exc:
            rows.append(["decay", q, "", "", "nan", str(exc).split(":")[0]])
    radii = default_radii(f.grid)
    samples, z_pred, u3_pred = compare_farfield(f, radii, ndir, co)
    ang = np.arctan2(samples.directions[:, 1], samples.directions[:, 0])
    for i, R in enumerate(radii):
        for a, mz, pz, m3, p3 in zip(ang, samples.planar[i], z_pred, samples.u3[i], u3_pred):
            rows.append(["u3", "R2_u3", R, a, m3, p3])
            rows.append(["planar", "R_z", R, a, mz, pz])
    return rows


def cmd_farfield(args) -> int:
    f = read_field(args.input)
    rows = farfield_rows(f, args.ndir)
    header = ["kind", "name", "R", "angle", "measured", "predicted"]
    _emit(csv_text(header, rows), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nx", type=_int("nx"), default=256)
    p.add_argument("--ny", type=_int("ny"), default=256)
    p.add_argument("--lx", type=_float("lx"), default=80.0)
    p.add_argument("--ly", type=_float("ly"), default=80.0)
    p.add_argument("--damping", type=_float("damping"), default=0.3)
    p.add_argument("--tol", type=_float("tol"), default=1e-6)
    p.add_argument("--max-iter", type=_int("max-iter"), default=2000)
    p.add_argument("--warmup", type=_int("warmup"), default=60)
    p.add_argument("--stabilize", type=_float("stabilize"), default=1.5)
    p.add_argument("--init", default="bump", help="bump, lump or file:PATH")
    p.add_argument("--amp", type=_float("amp"), default=0.3)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lltw", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("curve1d", help="1D energy-momentum table")
    p.add_argument("--cmin", type=_float("cmin"), default=0.05)
    p.add_argument("--cmax", type=_float("cmax"), default=0.95)
    p.add_argument("--steps", type=_int("steps"), default=50)
    p.add_argument("--out")
    p.set_defaults(func=cmd_curve1d)

    p = sub.add_parser("profile1d", help="sampled 1D profile and phase")
    p.add_argument("--c", type=_float("c"), required=True)
    p.add_argument("--xmax", type=_float("xmax"), default=20.0)
    p.add_argument("--n", type=_int("n"), default=401)
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile1d)

    p = sub.add_parser("kernel-norm", help="L^{4/3} norm of L_c against the bound 11")
    p.add_argument("--c", type=_float("c"), required=True)
    p.set_defaults(func=cmd_kernel_norm)

    p = sub.add_parser("symbol", help="evaluate a Fourier symbol")
    p.add_argument("--kind", required=True, choices=["Lc", "Lcj", "Tcjk", "Rjk"])
    p.add_argument("--c", type=_float("c"), default=0.0)
    p.add_argument("--xi", type=_vector("xi"), required=True)
    p.add_argument("--j", type=_int("j"), default=1)
    p.add_argument("--k", type=_int("k"), default=1)
    p.set_defaults(func=cmd_symbol)

    p = sub.add_parser("kernel-farfield", help="scaled kernel against its far-field limit")
    p.add_argument("--kind", required=True, choices=["Lc", "Lcj", "Tcjk", "Rjk"])
    p.add_argument("--c", type=_float("c"), default=0.5)
    p.add_argument("--R", type=_float("R"), default=20.0)
    p.add_argument("--ndir", type=_int("ndir"), default=16)
    p.add_argument("--n", type=_int("n"), default=1024)
    p.add_argument("--length", type=_float("length"), default=200.0)
    p.add_argument("--j", type=_int("j"), default=1)
    p.add_argument("--k", type=_int("k"), default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel_farfield)

    p = sub.add_parser("solve2d", help="solve for a 2D traveling wave")
    p.add_argument("--c", type=_float("c"), required=True)
    _solver_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--log")
    p.set_defaults(func=cmd_solve2d)

    p = sub.add_parser("continuation", help="follow a branch in the speed")
    p.add_argument("--cstart", type=_float("cstart"), required=True)
    p.add_argument("--cend", type=_float("cend"), required=True)
    p.add_argument("--steps", type=_int("steps"), default=5)
    _solver_flags(p)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_continuation)

    p = sub.add_parser("diagnose", help="diagnostics report for a field file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("farfield", help="far-field coefficients, decay fits and comparisons")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.add_argument("--ndir", type=_int("ndir"), default=16)
    p.set_defaults(func=cmd_farfield)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lltw {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FieldFormatError, VortexError, NumericFailure, FloatingPointError) as exc:
        print(f"lltw {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"lltw {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
