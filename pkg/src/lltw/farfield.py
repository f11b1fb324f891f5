"""Algebraic far field of two-dimensional traveling waves.

Far from the core ``|x|^{N-1} (z - lam) -> i lam z_inf(sigma)`` and
``|x|^N u3 -> u3_inf(sigma)``, with

    z_inf(sigma)  = (alpha sigma1 + beta2 sigma2) / q^{N/2}
    u3_inf(sigma) = alpha c (1/q^{N/2} - N sigma1^2 / q^{(N+2)/2}) - beta2 N c sigma1 sigma2 / q^{(N+2)/2}
    q             = 1 - c^2 + c^2 sigma1^2

and the coefficients are fixed by the integrals of ``e(u) u3`` and ``G``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fields import Field, LiftedField, lifting
from .grid import Grid, circle_max, integrate, loglog_slope, sample_at, spectral_gradient
from .kernels import FarFieldLimit, farfield_limit

DIM = 2
#: Fraction of the half-box inside which periodic images are negligible.
RELIABLE_FRACTION = 0.4


def _pref(N: int = DIM) -> float:
    return math.gamma(N / 2) / (2 * math.pi ** (N / 2))


@dataclass(frozen=True)
class FarFieldCoefficients:
    alpha: float
    beta: tuple[float, ...]
    lambda_inf: complex = 1.0 + 0.0j
    # source integrals the coefficients were built from
    int_e_u3: float = 0.0
    int_G: tuple[float, ...] = (0.0, 0.0)
    int_F: float = 0.0

    def __post_init__(self) -> None:
        if abs(abs(self.lambda_inf) - 1.0) > 1e-12:
            raise ValueError("lambda_inf must have modulus one")


def coefficients_from_integrals(c: float, int_e_u3: float, int_G: Sequence[float], lam: complex = 1.0) -> FarFieldCoefficients:
    """``alpha`` and ``beta_j`` from the source integrals (linear in them)."""
    _check_speed(c)
    N = len(int_G)
    a = 1 - c * c
    pref = _pref(N)
    alpha = pref * a ** ((N - 3) / 2) * (2 * c * int_e_u3 - a * int_G[0])
    beta = tuple(-pref * a ** ((N - 1) / 2) * g for g in int_G[1:])
    int_F = 2 * int_e_u3 + c * int_G[0]
    return FarFieldCoefficients(alpha, beta, complex(lam), int_e_u3, tuple(int_G), int_F)


def integrals_from_coefficients(c: float, alpha: float, beta: Sequence[float], int_G1: float = 0.0) -> tuple[float, tuple[float, ...]]:
    """Inverse of :func:`coefficients_from_integrals` for a chosen ``int G1``."""
    _check_speed(c)
    N = 1 + len(beta)
    a = 1 - c * c
    pref = _pref(N)
    int_e_u3 = (alpha / (pref * a ** ((N - 3) / 2)) + a * int_G1) / (2 * c)
    int_G = (int_G1,) + tuple(-b / (pref * a ** ((N - 1) / 2)) for b in beta)
    return int_e_u3, int_G


def _check_speed(c: float) -> None:
    if not 0 < c < 1:
        raise ValueError(f"far-field formulas require 0 < c < 1, got c={c}")


def _check_sigma(sigma) -> np.ndarray:
    s = np.asarray(sigma, dtype=float)
    if abs(np.linalg.norm(s) - 1.0) > 1e-12:
        raise ValueError("sigma must be a unit vector")
    return s


def reliable_radius(grid: Grid) -> float:
    return RELIABLE_FRACTION * min(grid.length) / 2


def _mean_phase(z: np.ndarray) -> complex:
    m = np.mean(z / np.abs(z))
    return complex(m / abs(m))


def alpha_beta(f: Field, lf: LiftedField | None = None) -> FarFieldCoefficients:
    """Coefficients of a 2D field; ``lambda_inf`` is the circular mean phase on the outermost reliable annulus."""
    from .solver2d import compute_FG

    _check_speed(f.c)
    if f.grid.dim != DIM:
        raise ValueError("alpha_beta expects a 2D field")
    if lf is None:
        lf = lifting(f)
    src = compute_FG(lf)
    int_e_u3 = integrate(src.e * lf.u3, f.grid)
    int_G = tuple(integrate(g, f.grid) for g in src.G)
    R = reliable_radius(f.grid)
    r = f.grid.radius()
    h = max(f.grid.spacing)
    ring = np.abs(r - R) < max(h, 0.025 * R)
    lam = _mean_phase(f.planar[ring])
    return coefficients_from_integrals(f.c, int_e_u3, int_G, lam)


def _q(c: float, s1: float) -> float:
    return 1 - c * c + c * c * s1 * s1


def predicted_farfield(co: FarFieldCoefficients, c: float, sigma: Sequence[float]) -> tuple[float, float]:
    """``(z_inf(sigma), u3_inf(sigma))``."""
    _check_speed(c)
    s = _check_sigma(sigma)
    N = s.size
    q = _q(c, s[0])
    z = (co.alpha * s[0] + sum(b * sj for b, sj in zip(co.beta, s[1:]))) / q ** (N / 2)
    u3 = co.alpha * c * (1 / q ** (N / 2) - N * s[0] ** 2 / q ** ((N + 2) / 2)) - sum(
        b * N * c * s[0] * sj / q ** ((N + 2) / 2) for b, sj in zip(co.beta, s[1:])
    )
    return float(z), float(u3)


def directions(ndir: int) -> np.ndarray:
    t = 2 * np.pi * np.arange(ndir) / ndir
    return np.stack([np.cos(t), np.sin(t)], axis=-1)


@dataclass
class FarFieldSamples:
    radii: np.ndarray
    directions: np.ndarray
    planar: np.ndarray  # shape (len(radii), ndir): R (z - lam)/(i lam), real part
    u3: np.ndarray  # R^2 u3


def measure_farfield(
    f: Field, radii: Sequence[float], dirs: np.ndarray | int = 16, lam: complex | None = None
) -> FarFieldSamples:
    if f.grid.dim != DIM:
        raise ValueError("measure_farfield expects a 2D field")
    radii = np.asarray(radii, dtype=float)
    limit = reliable_radius(f.grid)
    if np.any(radii <= 0) or np.any(radii > limit * (1 + 1e-12)):
        raise ValueError(f"radii must lie in (0, {limit:.6g}], the reliable region of this box")
    if isinstance(dirs, (int, np.integer)):
        dirs = directions(int(dirs))
    dirs = np.asarray(dirs, dtype=float)
    if lam is None:
        lam = 1.0
    pts = radii[:, None, None] * dirs[None, :, :]
    zr = sample_at(f.u1, f.grid, pts) + 1j * sample_at(f.u2, f.grid, pts)
    u3 = sample_at(f.u3, f.grid, pts)
    planar = (radii[:, None] ** (DIM - 1) * (zr - lam) / (1j * lam)).real
    return FarFieldSamples(radii, dirs, planar, radii[:, None] ** DIM * u3)


def compare_farfield(f: Field, radii: Sequence[float], ndir: int = 16, co: FarFieldCoefficients | None = None):
    """Measured and predicted ``R^2 u3`` and planar profiles on the given radii."""
    if co is None:
        co = alpha_beta(f)
    samples = measure_farfield(f, radii, ndir, co.lambda_inf)
    pred = np.array([predicted_farfield(co, f.c, s) for s in samples.directions])
    return samples, pred[:, 0], pred[:, 1]


# ---------------------------------------------------------------------------
# Decay fits

QUANTITIES = ("u3", "grad_theta", "grad_u3")
EXPECTED_EXPONENT = {"u3": -DIM, "grad_theta": -DIM, "grad_u3": -(DIM + 1)}


@dataclass
class DecayFit:
    quantity: str
    exponent: float
    misfit: float
    radii: np.ndarray
    amplitudes: np.ndarray
    local_slopes: np.ndarray = field(default_factory=lambda: np.empty(0))
    power_law: bool = True

    @property
    def expected(self) -> float | None:
        return EXPECTED_EXPONENT.get(self.quantity)


def default_radii(grid: Grid, count: int = 8, lo: float = 0.15, hi: float = RELIABLE_FRACTION) -> np.ndarray:
    half = min(grid.length) / 2
    return np.geomspace(lo * half, hi * half, count)


def quantity_values(f: Field, quantity: str) -> np.ndarray:
    if quantity == "u3":
        return f.u3
    if quantity == "grad_u3":
        return np.sqrt(sum(spectral_gradient(f.u3, f.grid, a) ** 2 for a in range(f.grid.dim)))
    if quantity == "grad_theta":
        lf = lifting(f)
        return np.sqrt(sum(g**2 for g in lf.theta_gradient()))
    raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")


def fit_decay(
    values: np.ndarray,
    grid: Grid,
    quantity: str = "u3",
    radii: Sequence[float] | None = None,
    decay_threshold: float = 1e-3,
    steepening_limit: float = 0.5,
) -> DecayFit:
    """Log-log slope of the circle maxima of ``|values|`` against ``R``.

    The fit requires the signal at the outermost radius to be below
    ``decay_threshold`` times its peak.  A fit whose successive local
    slopes steepen by more than ``steepening_limit`` is flagged as not a
    power law.
    """
    radii = default_radii(grid) if radii is None else np.asarray(radii, dtype=float)
    if radii.size < 3 or np.any(np.diff(radii) <= 0):
        raise ValueError("need at least three strictly increasing radii")
    if radii[-1] > reliable_radius(grid) * (1 + 1e-12):
        raise ValueError("fit radii leave the reliable region of the box")
    peak = float(np.max(np.abs(values)))
    if not peak > 0:
        raise ValueError("insufficient decay range: the field carries no signal")
    amps = circle_max(values, grid, radii)
    if np.any(amps <= 0):
        raise ValueError("insufficient decay range: zero signal on a fit annulus")
    if amps[-1] > decay_threshold * peak:
        raise ValueError(
            f"insufficient decay range: outermost annulus holds {amps[-1] / peak:.3g} of the peak "
            f"(threshold {decay_threshold:g})"
        )
    slope, misfit = loglog_slope(radii, amps)
    local = np.diff(np.log(amps)) / np.diff(np.log(radii))
    steepening = float(local[0] - local[-1]) if local.size > 1 else 0.0
    power_law = steepening <= steepening_limit
    return DecayFit(quantity, slope, misfit, radii, amps, local, power_law)


def decay_fit(f: Field, quantity: str = "u3", radii: Sequence[float] | None = None, decay_threshold: float = 1e-3) -> DecayFit:
    return fit_decay(quantity_values(f, quantity), f.grid, quantity, radii, decay_threshold)


# ---------------------------------------------------------------------------
# Consistency of the two routes to the limits


def theta_route(c: float, sigma: Sequence[float], int_F: float, int_G: Sequence[float]) -> float:
    """``theta_inf(sigma) = -(1/(N-1)) sum_j sigma_j theta^j_inf(sigma)`` from the kernel limits."""
    s = _check_sigma(sigma)
    N = s.size
    total = 0.0
    for j in range(1, N + 1):
        th = c * farfield_limit(FarFieldLimit("Lcj", c, j, 1, N), s) * int_F
        for k in range(1, N + 1):
            T = farfield_limit(FarFieldLimit("Tcjk", c, j, k, N), s)
            Rjk = farfield_limit(FarFieldLimit("Rjk", c, j, k, N), s)
            th -= (c * c * T + Rjk) * int_G[k - 1]
        total += s[j - 1] * th
    return -total / (N - 1)


def u3_route(c: float, sigma: Sequence[float], int_F: float, int_G: Sequence[float]) -> float:
    """``L_inf int F - c sum_j L_j,inf int G_j``."""
    s = _check_sigma(sigma)
    N = s.size
    val = farfield_limit(FarFieldLimit("Lc", c, 1, 1, N), s) * int_F
    for j in range(1, N + 1):
        val -= c * farfield_limit(FarFieldLimit("Lcj", c, j, 1, N), s) * int_G[j - 1]
    return val


@dataclass
class RouteCheck:
    planar: float
    u3: float

    @property
    def worst(self) -> float:
        return max(self.planar, self.u3)


def theta_route_check(
    c: float, sigma: Sequence[float], alpha: float, beta: Sequence[float] | float, int_G1: float = 0.0
) -> RouteCheck:
    """Absolute differences between the closed forms and the kernel-limit routes.

    Source integrals consistent with ``(alpha, beta)`` are reconstructed for
    the chosen ``int G1`` (the coefficients do not determine it).
    """
    _check_speed(c)
    beta = (beta,) if np.isscalar(beta) else tuple(beta)
    e_u3, int_G = integrals_from_coefficients(c, alpha, beta, int_G1)
    co = coefficients_from_integrals(c, e_u3, int_G)
    z, u3 = predicted_farfield(co, c, sigma)
    return RouteCheck(abs(z - theta_route(c, sigma, co.int_F, int_G)), abs(u3 - u3_route(c, sigma, co.int_F, int_G)))


def u3_circle_mean(co: FarFieldCoefficients, c: float, n: int = 4096) -> float:
    """Trapezoid mean of ``u3_inf`` over the unit circle."""
    d = directions(n)
    return float(np.mean([predicted_farfield(co, c, s)[1] for s in d]))


def u3_circle_mean_closed(alpha: float, c: float) -> float:
    """Closed form of the circle mean of ``u3_inf``.

    The ``beta`` term is odd in ``sigma2`` and averages out.  With
    ``a = 1 - c^2`` and ``q = a + c^2 cos^2 t``,
    ``(1/2pi) int dt / q = (a (a + c^2))^{-1/2} = a^{-1/2}`` and, differentiating
    in ``c^2``, ``(1/2pi) int cos^2 t / q^2 dt = a^{-1/2} (a + c^2)^{-3/2} / 2``.
    """
    a = 1 - c * c
    m0 = 1 / math.sqrt(a * (a + c * c))
    m2 = 0.5 / (math.sqrt(a) * (a + c * c) ** 1.5)
    return alpha * c * (m0 - 2 * m2)
