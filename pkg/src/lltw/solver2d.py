"""Fixed-point solver for two-dimensional traveling waves.

The unknowns are the lifted pair ``(u3, theta)``.  Given the sources

    G = u1 grad u2 - u2 grad u1 - grad theta     (= -u3^2 grad theta)
    F = 2 e(u) u3 + c G1

one sweep computes the Fourier-multiplier images

    u3*         = [ |xi|^2 F - c xi1 xi_j G_j ] / D_c
    d_j theta*  = c xi1 xi_j F / D_c - c^2 T_jk G_k - R_jk G_k

with ``D_c = |xi|^4 + |xi|^2 - c^2 xi1^2``, rebuilds ``theta*`` as a
least-squares antigradient and blends the result with the current iterate.
The mean of ``u3*`` is fixed by the mean of the third component equation,
``<u3> = <F> + c <d1 theta>``, which the multiplier form leaves undetermined.

The map is cubic near the trivial field, so undamped iteration is drawn to
zero.  ``solve`` optionally rescales each candidate by the Petviashvili
factor ``(<u3, u3> / <u3, u3*>)^gamma`` to remove that instability.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Sequence

import numpy as np

from .fields import (
    DEFAULT_MARGIN,
    Field,
    LiftedField,
    VortexError,
    _ramp,
    energy_density,
    field_gradient,
    field_laplacian,
    lifting,
    trivial_field,
)
from .grid import Grid, antigradient, integrate
from .kernels import KernelSymbol, denom
from .soliton1d import TWIST_1D, inverse_width, profile

DEFAULT_DAMPING = 0.3


class DivergenceError(RuntimeError):
    """Nonfinite values appeared during an iteration."""


@dataclass
class SourceTerms:
    F: np.ndarray
    G: list[np.ndarray]
    e: np.ndarray


def compute_FG(lf: LiftedField) -> SourceTerms:
    lf.check_margin()
    f = lf.to_field(renormalize=False)
    du = field_gradient(f)
    e = energy_density(f, du)
    dtheta = lf.theta_gradient()
    G = [f.u1 * du[1][j] - f.u2 * du[0][j] - dtheta[j] for j in range(lf.grid.dim)]
    F = 2.0 * e * f.u3 + lf.c * G[0]
    return SourceTerms(F, G, e)


@dataclass(frozen=True)
class _Multipliers:
    """Lattice symbols for one (grid, c) pair, zero mode excluded."""

    u3_F: np.ndarray
    u3_G: list[np.ndarray]
    th_F: list[np.ndarray]
    th_G: list[list[np.ndarray]]


_CACHE: dict[tuple, _Multipliers] = {}


def _multipliers(grid: Grid, c: float) -> _Multipliers:
    key = (grid.n, grid.length, float(c))
    if key in _CACHE:
        return _CACHE[key]
    xi = grid.frequency_mesh()
    k2 = sum(x**2 for x in xi)
    zero = (0,) * grid.dim
    safe_k2 = np.where(k2 > 0, k2, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        D = denom(c, xi)
        D = np.where(k2 > 0, D, 1.0)
    nyq = grid.nyquist_mask()

    def clean(m):
        m = np.array(m, dtype=float)
        m[zero] = 0.0
        m[nyq] = 0.0
        return m

    N = grid.dim
    u3_F = clean(k2 / D)
    u3_G = [clean(-c * xi[0] * xi[j] / D) for j in range(N)]
    th_F = [clean(c * xi[0] * xi[j] / D) for j in range(N)]
    th_G = [
        [
            clean(-(c**2) * xi[0] ** 2 * xi[j] * xi[k] / (safe_k2 * D) - xi[j] * xi[k] / safe_k2)
            for k in range(N)
        ]
        for j in range(N)
    ]
    m = _Multipliers(u3_F, u3_G, th_F, th_G)
    if len(_CACHE) > 16:
        _CACHE.clear()
    _CACHE[key] = m
    return m


def fixed_point_image(lf: LiftedField, src: SourceTerms | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``(u3*, theta*)`` for the current iterate; ``theta*`` keeps the iterate's twist."""
    if not 0 < lf.c < 1:
        raise ValueError(f"iteration requires 0 < c < 1, got c={lf.c}")
    if src is None:
        src = compute_FG(lf)
    grid = lf.grid
    m = _multipliers(grid, lf.c)
    Fh = np.fft.fftn(src.F)
    Gh = [np.fft.fftn(g) for g in src.G]
    u3h = m.u3_F * Fh + sum(mj * gj for mj, gj in zip(m.u3_G, Gh))
    zero = (0,) * grid.dim
    mean_d1 = lf.twist[0] / grid.length[0]
    u3h[zero] = Fh[zero] + lf.c * mean_d1 * grid.size
    u3 = np.fft.ifftn(u3h).real
    grads = []
    for j in range(grid.dim):
        gh = m.th_F[j] * Fh + sum(m.th_G[j][k] * Gh[k] for k in range(grid.dim))
        grads.append(np.fft.ifftn(gh).real)
    theta = antigradient(grads, grid) + _ramp(grid, lf.twist)
    return u3, theta


def iterate_once(lf: LiftedField, damping: float = DEFAULT_DAMPING) -> LiftedField:
    """One damped sweep ``(1 - tau) current + tau image``; clips into the lifting margin."""
    if not 0 < damping <= 1:
        raise ValueError(f"damping must lie in (0, 1], got {damping}")
    u3s, ths = fixed_point_image(lf)
    return _blend(lf, u3s, ths, damping)


def _blend(lf: LiftedField, u3s: np.ndarray, ths: np.ndarray, tau: float) -> LiftedField:
    u3 = (1 - tau) * lf.u3 + tau * u3s
    theta = (1 - tau) * lf.theta + tau * ths
    if not (np.all(np.isfinite(u3)) and np.all(np.isfinite(theta))):
        raise DivergenceError("nonfinite values in the iterate")
    bound = 1.0 - lf.margin
    clipped = bool(np.max(np.abs(u3)) > bound)
    if clipped:
        u3 = np.clip(u3, -bound, bound)
    return replace(lf, u3=u3, theta=theta, clipped=clipped)


# ---------------------------------------------------------------------------
# Residual of the component equations


def pde_residual_fields(f: Field) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    du = field_gradient(f)
    lap = field_laplacian(f)
    e2 = 2.0 * energy_density(f, du)
    c = f.c
    u1, u2, u3 = f.components
    r1 = -lap[0] - e2 * u1 - c * (u2 * du[2][0] - u3 * du[1][0])
    r2 = -lap[1] - e2 * u2 - c * (u3 * du[0][0] - u1 * du[2][0])
    r3 = -lap[2] - e2 * u3 + u3 - c * (u1 * du[1][0] - u2 * du[0][0])
    return r1, r2, r3


def residual(f: Field) -> float:
    """Grid ``L^2`` norm of the three component residuals over ``E + 1``."""
    r = pde_residual_fields(f)
    norm = np.sqrt(integrate(sum(x**2 for x in r), f.grid))
    E = integrate(energy_density(f), f.grid)
    return float(norm / (E + 1.0))


# ---------------------------------------------------------------------------
# Seeds


def extend_1d(c: float, grid: Grid) -> Field:
    """The one-dimensional profile along the first axis, constant along the second."""
    if grid.dim != 2:
        raise ValueError("extend_1d expects a 2D grid")
    x1 = grid.mesh()[0]
    u1, u2, u3 = profile(c, x1)
    return Field(grid, c, u1, u2, u3, (TWIST_1D if c < 1 else 0.0, 0.0))


def _phase_from_u3(c: float, grid: Grid, u3: np.ndarray) -> np.ndarray:
    """Mean-zero ``theta`` with ``Lap theta = c d1 u3``."""
    xi = grid.frequency_mesh()
    k2 = sum(x**2 for x in xi)
    rhs = 1j * c * xi[0] * np.fft.fftn(u3)
    with np.errstate(divide="ignore", invalid="ignore"):
        th = np.where(k2 > 0, -rhs / np.where(k2 > 0, k2, 1.0), 0.0)
    th[grid.nyquist_mask()] = 0.0
    return np.fft.ifftn(th).real


def initial_guess(
    c: float,
    grid: Grid,
    kind: Literal["bump", "lump"] = "bump",
    amplitude: float = 0.3,
    margin: float = DEFAULT_MARGIN,
) -> LiftedField:
    if not 0 < c < 1:
        raise ValueError(f"initial_guess requires 0 < c < 1, got c={c}")
    if not 0 < amplitude <= 0.5:
        raise ValueError(f"amplitude must lie in (0, 0.5], got {amplitude}")
    if grid.dim != 2:
        raise ValueError("initial_guess expects a 2D grid")
    k = inverse_width(c)
    x1, x2 = grid.mesh()
    if kind == "bump":
        shape = 1.0 / (np.cosh(k * x1) * np.cosh(k * x2))
    elif kind == "lump":
        # rational profile with the same scales and algebraic tails
        s = (k * x1) ** 2 + (k * x2) ** 2
        shape = (1.0 - (k * x1) ** 2 + (k * x2) ** 2) / (1.0 + s) ** 2
    else:
        raise ValueError(f"unknown initial guess kind {kind!r}")
    u3 = amplitude * (1 - c * c) * shape
    theta = _phase_from_u3(c, grid, u3)
    return LiftedField(grid, c, u3, theta, (0.0, 0.0), margin)


def trivial_lifted(c: float, grid: Grid, margin: float = DEFAULT_MARGIN) -> LiftedField:
    z = np.zeros(grid.shape)
    return LiftedField(grid, c, z, z.copy(), None, margin)


# ---------------------------------------------------------------------------
# Driver


@dataclass
class SolveParams:
    damping: float = DEFAULT_DAMPING
    tol: float = 1e-6
    max_iter: int = 2000
    renorm: bool = True
    # exponent of the amplitude-stabilizing factor; 0 disables it
    stabilize: float = 1.5
    min_damping: float = 1e-4
    restore: float = 1.2
    # give up when the best residual has not improved for this many sweeps
    stall: int = 400
    # smallest admissible max|u3|, to keep away from the trivial attractor
    min_amplitude: float = 1e-3
    # sweeps taken without rejection before the residual history starts;
    # seeds far from a solution must climb before the residual can fall
    warmup: int = 60


@dataclass(frozen=True)
class SolveResult:
    field: Field
    lifted: LiftedField
    converged: bool
    residual_history: tuple[float, ...]
    iterations: int
    status: str = "ok"
    damping_history: tuple[float, ...] = field(default=(), compare=False)

    @property
    def residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else float("nan")


def _stabilizer(lf: LiftedField, u3s: np.ndarray, gamma: float) -> float:
    if gamma == 0:
        return 1.0
    num = float(np.sum(lf.u3 * lf.u3))
    den = float(np.sum(lf.u3 * u3s))
    if num <= 0 or den <= 0:
        return 1.0
    return (num / den) ** gamma


def solve(
    c: float,
    grid: Grid,
    init: LiftedField,
    params: SolveParams | None = None,
    callback: Callable[[int, float, float], None] | None = None,
) -> SolveResult:
    """Damped iteration with step rejection.

    A step whose residual exceeds the last accepted one is rejected and the
    damping halved; accepted steps grow the damping by ``restore`` up to its
    initial value.  The returned field is the best accepted iterate, so the
    residual history is nonincreasing.
    """
    p = params or SolveParams()
    if not 0 < p.damping <= 1:
        raise ValueError(f"damping must lie in (0, 1], got {p.damping}")
    if not 0 < c < 1:
        raise ValueError(f"solve requires 0 < c < 1, got c={c}")
    lf = replace(init, c=c) if init.c != c else init
    if lf.grid != grid:
        raise ValueError("initial field lives on a different grid")

    def measure(x: LiftedField) -> float:
        f = x.to_field(renormalize=p.renorm)
        return residual(f)

    status = "ok"
    try:
        for _ in range(p.warmup):
            if measure(lf) <= p.tol:
                break
            u3s, ths = fixed_point_image(lf)
            s = _stabilizer(lf, u3s, p.stabilize)
            lf = _blend(lf, s * u3s, _scaled_phase(lf, ths, s), p.damping)
    except (DivergenceError, VortexError) as exc:
        status = f"diverged during warmup: {exc}"
    best = lf
    r_best = measure(lf)
    history = [r_best]
    taus: list[float] = []
    tau = p.damping
    it = 0
    since_improve = 0
    if r_best <= p.tol:
        return _result(best, history, True, 0, "ok", taus, p)
    if status != "ok":
        return _result(best, history, False, 0, status, taus, p)
    while it < p.max_iter:
        it += 1
        try:
            u3s, ths = fixed_point_image(best)
            s = _stabilizer(best, u3s, p.stabilize)
            cand = _blend(best, s * u3s, _scaled_phase(best, ths, s), tau)
            r = measure(cand)
            if not np.isfinite(r):
                raise DivergenceError("nonfinite residual")
        except DivergenceError as exc:
            status = f"diverged: {exc}"
            break
        except VortexError as exc:
            status = f"margin: {exc}"
            break
        if r < r_best and cand.delta >= p.min_amplitude:
            best, r_best = cand, r
            history.append(r)
            taus.append(tau)
            tau = min(p.damping, tau * p.restore)
            since_improve = 0
            if callback:
                callback(it, r, tau)
            if r <= p.tol:
                return _result(best, history, True, it, "ok", taus, p)
        else:
            tau *= 0.5
            since_improve += 1
            if tau < p.min_damping:
                status = "stalled: damping below minimum"
                break
            if since_improve >= p.stall:
                status = "stalled: no improvement"
                break
    else:
        status = "max_iter reached"
    return _result(best, history, False, it, status, taus, p)


def _scaled_phase(lf: LiftedField, ths: np.ndarray, s: float) -> np.ndarray:
    # the phase image is linear in the sources, so it scales with the same factor
    ramp = _ramp(lf.grid, lf.twist)
    return ramp + s * (ths - ramp)


def _result(best, history, converged, it, status, taus, p) -> SolveResult:
    return SolveResult(
        best.to_field(renormalize=p.renorm), best, converged, tuple(history), it, status, tuple(taus)
    )


# ---------------------------------------------------------------------------
# Continuation in the speed


def rescale_seed(lf: LiftedField, c_new: float) -> LiftedField:
    """Stretch a field to the decay scale ``1/sqrt(1 - c^2)`` of a new speed.

    The amplitude of ``u3`` is scaled by ``(1 - c_new^2)/(1 - c_old^2)``, but
    never past the lifting margin, and the lengths by ``k_old / k_new``.  The
    phase is resampled bilinearly from the old one.
    """
    from .grid import sample_at

    c_old = lf.c
    k_old, k_new = inverse_width(c_old), inverse_width(c_new)
    ratio = k_new / k_old
    pts = np.stack([m * ratio for m in lf.grid.mesh()], axis=-1)
    amp = (1 - c_new**2) / (1 - c_old**2)
    # near-vortex fields cannot grow; keep the seed inside the lifting margin
    if lf.delta > 0:
        amp = min(amp, max(1.0, (1.0 - 2.0 * lf.margin) / lf.delta))
    u3 = amp * sample_at(lf.u3, lf.grid, pts)
    per = sample_at(lf.periodic_phase(), lf.grid, pts)
    theta = per * amp / ratio + _ramp(lf.grid, lf.twist)
    return replace(lf, c=c_new, u3=u3, theta=theta, clipped=False)


@dataclass(frozen=True)
class BranchRow:
    c: float
    energy: float
    momentum: float
    residual: float
    converged: bool


def continuation(
    c_values: Sequence[float],
    grid: Grid,
    init: LiftedField,
    params: SolveParams | None = None,
) -> list[SolveResult]:
    """Solve at each speed in turn, seeding with the previous result rescaled.

    Stops after the first speed that does not converge (that result is
    still returned).
    """
    cs = [float(c) for c in c_values]
    if not cs:
        raise ValueError("continuation needs at least one speed")
    for c in cs:
        if not 0 < c < 1:
            raise ValueError(f"speeds must lie in (0, 1), got {c}")
    out: list[SolveResult] = []
    seed = init if init.c == cs[0] else rescale_seed(init, cs[0])
    for c in cs:
        if out:
            seed = rescale_seed(out[-1].lifted, c)
        res = solve(c, grid, seed, params)
        out.append(res)
        if not res.converged:
            break
    return out


def branch_table(results: Sequence[SolveResult]) -> list[BranchRow]:
    from .diagnostics import energy, momentum_lifted

    return [
        BranchRow(r.lifted.c, energy(r.field), momentum_lifted(r.lifted), r.residual, r.converged)
        for r in results
    ]


def speed_grid(c_start: float, c_end: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if steps == 1:
        return np.array([c_start])
    return np.linspace(c_start, c_end, steps)


__all__ = [
    "DivergenceError",
    "SourceTerms",
    "SolveParams",
    "SolveResult",
    "BranchRow",
    "compute_FG",
    "fixed_point_image",
    "iterate_once",
    "residual",
    "pde_residual_fields",
    "extend_1d",
    "initial_guess",
    "trivial_lifted",
    "solve",
    "continuation",
    "rescale_seed",
    "branch_table",
    "speed_grid",
    "lifting",
    "trivial_field",
    "KernelSymbol",
]
