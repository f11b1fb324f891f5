"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected and repeated in the pytest terminal summary.  Run
``pytest tests/test_acceptance.py -v`` to see them.
"""

import math
import struct
import time

import numpy as np
import pytest

from lltw.diagnostics import (
    energy,
    identity_report,
    inequality_report,
    lp_norm,
    momentum_lifted,
    pohozaev_report,
    polar_bound_excess,
)
from lltw.farfield import alpha_beta, compare_farfield, decay_fit, default_radii, theta_route_check
from lltw.fields import lifting
from lltw.grid import make_grid
from lltw.io import FieldFormatError, csv_text, decode_field, encode_field, read_field, write_csv, write_field
from lltw.kernels import farfield_comparison, farfield_sum_check, kernel_physical, lc_norm_43
from lltw.soliton1d import (
    as_field,
    energy_closed,
    ep_curve,
    momentum_closed,
    quadrature,
    residual_1d,
)
from lltw.solver2d import (
    SolveParams,
    initial_guess,
    iterate_once,
    residual,
    solve,
    trivial_lifted,
)

from .oracles import i1_closed, i3_closed
from .test_fields import smooth_lifted

SUMMARY: list[str] = []


def report(n, passed: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if passed else 'FAIL'} | {detail}"
    SUMMARY.append(line)
    print(line)


class TestCriterion1Curve:
    def test_energy_momentum_curve(self):
        t0 = time.perf_counter()
        cs = np.linspace(0.05, 0.95, 50)
        table = ep_curve(cs)
        quads = [quadrature(float(c)) for c in cs]
        err_E = max(abs(q.energy - energy_closed(c)) for q, c in zip(quads, cs))
        err_p = max(abs(q.momentum - momentum_closed(c)) for q, c in zip(quads, cs))
        err_sin = float(np.max(np.abs(table.energy - 2 * np.sin(table.momentum / 2))))
        err_slope = float(np.max(np.abs(table.local_slope - cs)))
        dt = time.perf_counter() - t0
        ok = max(err_E, err_p, err_sin) <= 1e-8 and err_slope <= 1e-4 and dt < 10
        report(
            1,
            ok,
            f"max|dE|={err_E:.2e} max|dp|={err_p:.2e} max|E-2sin(p/2)|={err_sin:.2e} "
            f"max|dE/dp-c|={err_slope:.2e} time={dt:.2f}s",
        )
        assert ok


class TestCriterion2Residual:
    def test_closed_form_residual(self):
        t0 = time.perf_counter()
        worst_ode = worst_fi = 0.0
        for c in np.linspace(0.05, 0.95, 10):
            k = math.sqrt(1 - c * c)
            r = residual_1d(float(c), make_grid(1, 4096, 60 / k))
            worst_ode = max(worst_ode, r.max_ode)
            worst_fi = max(worst_fi, r.first_integral, r.u3_integral)
        dt = time.perf_counter() - t0
        ok = worst_ode <= 1e-7 and worst_fi <= 1e-10 and dt < 30
        report(2, ok, f"max ODE residual={worst_ode:.2e} max first-integral defect={worst_fi:.2e} time={dt:.2f}s")
        assert ok


class TestCriterion3KernelNorm:
    def test_norm_certification(self):
        t0 = time.perf_counter()
        closed = (3 * math.gamma(1 / 6) * math.gamma(0.5) / math.gamma(2 / 3)) ** 0.75
        v1 = lc_norm_43(1.0)
        rel = abs(v1 - closed) / closed
        values = [lc_norm_43(c) for c in np.round(np.arange(0.1, 1.01, 0.1), 10)]
        dt = time.perf_counter() - t0
        ok = rel <= 1e-3 and max(values) <= 11 and dt < 5
        report(3, ok, f"norm(c=1)={v1:.12f} closed={closed:.12f} rel={rel:.1e} max over c={max(values):.4f} time={dt:.2f}s")
        assert ok


class TestCriterion4FarFieldAlgebra:
    def test_routes_and_sums(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(2024)
        worst_route = worst_sum = 0.0
        for _ in range(100):
            c = rng.uniform(0.01, 0.99)
            t = rng.uniform(0, 2 * np.pi)
            sigma = (math.cos(t), math.sin(t))
            al, be, g1 = rng.uniform(-5, 5, size=3)
            worst_route = max(worst_route, theta_route_check(c, sigma, al, be, g1).worst)
            rl, rt = farfield_sum_check(c, sigma)
            worst_sum = max(worst_sum, rl, max(rt))
        dt = time.perf_counter() - t0
        ok = worst_route <= 1e-10 and worst_sum <= 1e-10 and dt < 1
        report(4, ok, f"route residual={worst_route:.2e} sum residual={worst_sum:.2e} time={dt:.2f}s")
        assert ok


class TestCriterion5KernelFarField:
    def test_lc_far_field(self):
        t0 = time.perf_counter()
        K = kernel_physical("Lc", 0.5, make_grid(2, 1024, 200.0))
        dirs, meas, pred = farfield_comparison(K, 20.0, 16)
        scale = np.max(np.abs(pred))
        over_max = float(np.max(np.abs(meas - pred)) / scale)
        pointwise = np.abs(meas - pred) / np.abs(pred)
        dt = time.perf_counter() - t0
        # the limit changes sign near 45 degrees, so errors are measured against its maximum
        ok = over_max <= 0.05 and dt < 60
        report(
            5,
            ok,
            f"max err/max|K_inf|={over_max:.3%} pointwise rel: on-axis={pointwise[0]:.3%} "
            f"median={np.median(pointwise):.3%} worst={np.max(pointwise):.1%} time={dt:.2f}s",
        )
        assert ok


class TestCriterion6Identities:
    def test_identity_suite(self):
        t0 = time.perf_counter()
        worst = 0.0
        for c in np.linspace(0.3, 0.95, 10):
            k = math.sqrt(1 - c * c)
            rep = identity_report(lifting(as_field(float(c), make_grid(1, 4096, 60 / k))))
            i1, i3 = i1_closed(c), i3_closed(c)
            worst = max(
                worst,
                abs(rep["I1"].lhs - i1),
                abs(rep["I1"].rhs - i1),
                abs(rep["I3"].lhs - i3),
                abs(rep["I3"].rhs - i3),
            )
        dt = time.perf_counter() - t0
        ok = worst <= 1e-7 and dt < 10
        report(6, ok, f"max deviation from closed forms={worst:.2e} time={dt:.2f}s")
        assert ok


@pytest.fixture(scope="module")
def run_2d():
    t0 = time.perf_counter()
    g = make_grid(2, 256, 80.0)
    params = SolveParams(damping=0.6, tol=1e-6, max_iter=1500, warmup=60)
    res = solve(0.8, g, initial_guess(0.8, g, "bump", 0.3), params)
    return res, time.perf_counter() - t0


class TestCriterion7Solver:
    def test_solver_properties(self, run_2d):
        res, dt = run_2d
        g = make_grid(2, 32, 20.0)
        triv = trivial_lifted(0.8, g)
        triv_ok = all(np.all(iterate_once(triv, t).u3 == 0) for t in (0.3, 1.0))
        triv_solve = solve(0.8, g, triv)
        refed = solve(0.8, res.lifted.grid, res.lifted, SolveParams(tol=res.residual * (1 + 1e-9)))
        idem = triv_ok and triv_solve.converged and triv_solve.iterations == 0 and refed.iterations <= 1
        h = np.array(res.residual_history)
        monotone = bool(np.all(np.diff(h) <= 0))

        details = [f"(a) idempotent={idem}", f"(b) nonincreasing={monotone} steps={len(h)}"]
        f, lf = res.field, res.lifted
        poh = pohozaev_report(f, lf)
        if res.converged:
            E = energy(f)
            slack = 1e-3 * (E + 1)
            ineq = inequality_report(lf)
            names = ["u3_L4_by_delta_energy", "energy_by_u3_L4", "phase_defect_by_u3_L4", "grad_rho_by_u3_L4"]
            gaps_ok = all(ineq[n].applicable and ineq[n].gap >= -slack for n in names)
            fit = decay_fit(f, "u3")
            radii = default_radii(f.grid)
            samples, _, pu3 = compare_farfield(f, radii, 16)
            far = float(np.max(np.abs(samples.u3 - pu3[None, :])) / np.max(np.abs(pu3)))
            cond = poh.poh2 <= 1e-2 and poh.poh3 <= 1e-2 and gaps_ok and abs(fit.exponent + 2) <= 0.4 and far <= 0.15
            details.append(
                f"(c) converged: poh2={poh.poh2:.2e} poh3={poh.poh3:.2e} gaps_ok={gaps_ok} "
                f"exponent={fit.exponent:.3f} far-field err={far:.1%}"
            )
        else:
            cond = True
            details.append(
                f"(c) not converged (reported, non-failing): residual={res.residual:.3e} "
                f"status='{res.status}' iterations={res.iterations} max|u3|={lf.delta:.4f} "
                f"E={energy(f):.4f} p={momentum_lifted(lf):.4f} poh2={poh.poh2:.2e} poh3={poh.poh3:.2e}"
            )
        ok = idem and monotone and cond and dt < 600
        report(7, ok, " ".join(details) + f" time={dt:.1f}s")
        assert ok


class TestCriterion8Invariance:
    def test_invariance_and_polar_bound(self, run_2d):
        f = run_2d[0].field
        lf = lifting(f)
        base = (energy(f), momentum_lifted(lf), lp_norm(f.u3, f.grid, 2), lp_norm(f.u3, f.grid, 4), lf.delta)
        worst = 0.0
        variants = [f.rotated(a) for a in (0.3, 1.7, -2.9)] + [f.shifted(s) for s in ((1, 0), (17, -5), (128, 128))]
        for v in variants:
            lv = lifting(v)
            vals = (energy(v), momentum_lifted(lv), lp_norm(v.u3, v.grid, 2), lp_norm(v.u3, v.grid, 4), lv.delta)
            worst = max(worst, max(abs(a - b) for a, b in zip(vals, base)))
        excess = max(polar_bound_excess(smooth_lifted(seed, amp=0.05 + 0.85 * (seed % 17) / 16)) for seed in range(100))
        ok = worst <= 1e-12 and excess <= 1e-12
        report(8, ok, f"max invariance defect={worst:.2e} max polar-bound excess over 100 fields={excess:.2e}")
        assert ok


class TestCriterion9IO:
    def test_io(self, run_2d, tmp_path):
        f = run_2d[0].field
        p = tmp_path / "sol.llfw"
        write_field(f, p)
        back = read_field(p)
        bits = all(a.tobytes() == b.tobytes() for a, b in zip(f.components, back.components))
        data = p.read_bytes()
        detected = 0
        corruptions = [
            lambda d: b"LLFX" + d[4:],
            lambda d: d[:4] + struct.pack("<I", 7) + d[8:],
            lambda d: d[:8] + struct.pack("<I", 3) + d[12:],
            lambda d: d[:28] + struct.pack("<d", float("nan")) + d[36:],
            lambda d: d[:-1],
        ]
        for corrupt in corruptions:
            try:
                decode_field(corrupt(data))
            except FieldFormatError:
                detected += 1
        rows = [[c, energy_closed(c), momentum_closed(c)] for c in np.linspace(0.05, 0.95, 19)]
        write_csv(tmp_path / "a.csv", ["c", "E", "p"], rows)
        write_csv(tmp_path / "b.csv", ["c", "E", "p"], rows)
        same = (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        same = same and csv_text(["c"], rows) == csv_text(["c"], rows)
        ok = bits and detected == len(corruptions) and same and encode_field(back) == data
        report(9, ok, f"bit-identical={bits} corruptions detected={detected}/{len(corruptions)} csv identical={same}")
        assert ok
