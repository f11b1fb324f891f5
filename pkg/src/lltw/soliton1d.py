"""Closed-form one-dimensional traveling waves.

For ``0 <= c < 1`` the nontrivial finite-energy solutions are, up to
translation, rotation about ``e3`` and the reflection ``(u1, u2, -u3)(-x)``,

    u1 = c sech(k x),  u2 = tanh(k x),  u3 = k sech(k x),   k = sqrt(1 - c^2),

with phase ``theta = arctan(sinh(k x)/c)``, energy ``2k`` and momentum
``2 arctan(k/c)``.  The canonical representative has its peak at ``x = 0``,
``u3 > 0`` and ``theta(0) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import Grid, integrate, make_grid, twisted_gradient

#: Box length factor: profiles are sampled on [-L/2, L/2) with L >= MIN_BOX / k.
MIN_BOX = 40.0


def inverse_width(c: float) -> float:
    return float(np.sqrt(1.0 - c * c))


def _require_profile_speed(c: float) -> None:
    if not 0 <= c < 1:
        raise ValueError(f"nontrivial 1D profiles exist only for 0 <= c < 1, got c={c}")


def _require_open_speed(c: float, what: str) -> None:
    if not 0 < c < 1:
        raise ValueError(f"{what} requires 0 < c < 1, got c={c}")


def _sech(y: np.ndarray) -> np.ndarray:
    t = np.exp(-np.abs(y))
    return 2.0 * t / (1.0 + t * t)


def profile(c: float, x: np.ndarray | float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(u1, u2, u3)`` of the canonical profile at ``x``."""
    _require_profile_speed(c)
    k = inverse_width(c)
    x = np.asarray(x, dtype=float)
    sech = _sech(k * x)
    return c * sech, np.tanh(k * x), k * sech


def profile_derivative(c: float, x: np.ndarray | float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(u1', u2', u3')`` of the canonical profile, differentiated by hand."""
    _require_profile_speed(c)
    k = inverse_width(c)
    x = np.asarray(x, dtype=float)
    sech = _sech(k * x)
    tanh = np.tanh(k * x)
    return -c * k * sech * tanh, k * sech**2, -k * k * sech * tanh


def phase(c: float, x: np.ndarray | float) -> np.ndarray:
    _require_open_speed(c, "phase")
    k = inverse_width(c)
    return np.arctan(np.sinh(k * np.asarray(x, dtype=float)) / c)


def energy_closed(c: float) -> float:
    if not 0 <= c <= 1:
        raise ValueError(f"energy_closed requires 0 <= c <= 1, got c={c}")
    return 2.0 * inverse_width(c)


def momentum_closed(c: float) -> float:
    _require_open_speed(c, "momentum_closed")
    return 2.0 * float(np.arctan(inverse_width(c) / c))


@dataclass(frozen=True)
class Profile1D:
    """Evaluator bundle for one speed."""

    c: float

    def __post_init__(self) -> None:
        _require_profile_speed(self.c)

    @property
    def k(self) -> float:
        return inverse_width(self.c)

    def __call__(self, x):
        return profile(self.c, x)

    def theta(self, x):
        return phase(self.c, x)

    @property
    def energy(self) -> float:
        return energy_closed(self.c)

    @property
    def momentum(self) -> float:
        return momentum_closed(self.c)


# ---------------------------------------------------------------------------
# Energy-momentum curve


@dataclass
class CurveTable:
    c: np.ndarray
    energy: np.ndarray
    momentum: np.ndarray
    energy_from_momentum: np.ndarray
    # centered differences between adjacent rows, reported at interior rows
    slope_momentum: np.ndarray
    slope: np.ndarray
    slope_speed: np.ndarray
    # per-row centered difference with speed step ``dc``
    local_slope: np.ndarray


def ep_curve(c_values: Sequence[float], dc: float = 1e-3) -> CurveTable:
    """Energy, momentum and ``2 sin(p/2)`` per speed plus ``dE/dp`` estimates.

    ``slope`` holds ``(E[i+1] - E[i-1]) / (p[i+1] - p[i-1])`` for interior
    rows; ``local_slope`` holds the same quotient taken at ``c +- dc`` for
    every row (the step shrinks near the ends of ``(0, 1)``).
    """
    cs = np.asarray(list(c_values), dtype=float)
    if cs.size == 0:
        raise ValueError("ep_curve needs at least one speed")
    for c in cs:
        _require_open_speed(c, "ep_curve")
    E = np.array([energy_closed(c) for c in cs])
    p = np.array([momentum_closed(c) for c in cs])
    pred = 2.0 * np.sin(p / 2.0)
    local = np.array([slope_at(c, dc) for c in cs])
    if cs.size >= 3:
        slope = (E[2:] - E[:-2]) / (p[2:] - p[:-2])
        return CurveTable(cs, E, p, pred, p[1:-1], slope, cs[1:-1], local)
    empty = np.empty(0)
    return CurveTable(cs, E, p, pred, empty, empty, empty, local)


def slope_at(c: float, dc: float = 1e-3) -> float:
    """Centered ``dE/dp`` at speed ``c`` from the two neighbours ``c +- dc``."""
    _require_open_speed(c, "slope_at")
    h = min(dc, c / 2, (1 - c) / 2)
    lo, hi = c - h, c + h
    return (energy_closed(hi) - energy_closed(lo)) / (momentum_closed(hi) - momentum_closed(lo))


# ---------------------------------------------------------------------------
# Sampling and residuals


@dataclass
class Sampled1D:
    """Profile sampled on a 1D grid with spectral (twisted) derivatives.

    ``u2 = tanh`` is not periodic, but ``u1 + i u2`` is periodic up to the
    factor ``e^{i pi}``; derivatives of ``u1``/``u2`` use that twist.
    """

    c: float
    grid: Grid
    u: tuple[np.ndarray, np.ndarray, np.ndarray]
    du: tuple[np.ndarray, np.ndarray, np.ndarray]
    d2u: tuple[np.ndarray, np.ndarray, np.ndarray]

    @property
    def energy_density(self) -> np.ndarray:
        return 0.5 * (sum(d**2 for d in self.du) + self.u[2] ** 2)


TWIST_1D = np.pi


def _twisted_derivatives(u1, u2, u3, grid: Grid, twist: float):
    z = u1 + 1j * u2
    dz = twisted_gradient(z, grid, 0, twist)
    d2z = twisted_gradient(dz, grid, 0, twist)
    dz3 = twisted_gradient(u3.astype(complex), grid, 0, 0.0).real
    d2z3 = twisted_gradient(dz3.astype(complex), grid, 0, 0.0).real
    return (dz.real, dz.imag, dz3), (d2z.real, d2z.imag, d2z3)


def sample(c: float, grid: Grid) -> Sampled1D:
    if grid.dim != 1:
        raise ValueError("sample expects a 1D grid")
    u = profile(c, grid.coords[0])
    twist = TWIST_1D if c < 1 else 0.0
    du, d2u = _twisted_derivatives(*u, grid, twist)
    return Sampled1D(c, grid, u, du, d2u)


def _check_box(c: float, grid: Grid) -> None:
    k = inverse_width(c)
    if k > 0 and grid.length[0] * k < MIN_BOX - 1e-9:
        raise ValueError(
            f"grid length {grid.length[0]} is below {MIN_BOX}/k = {MIN_BOX / k:.3g}; "
            "the profile has not decayed at the box edge"
        )


@dataclass
class Residual1D:
    v1: float
    v2: float
    v3: float
    first_integral: float  # max | |u'|^2 - u3^2 |
    u3_integral: float  # max | (u3')^2 - u3^2 (k^2 - u3^2) |

    @property
    def max_ode(self) -> float:
        return max(self.v1, self.v2, self.v3)


def ode_residuals(u, du, d2u, c: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise residuals of the three component ODEs."""
    u1, u2, u3 = u
    d1, d2, d3 = du
    e2 = sum(d**2 for d in du) + u3**2  # 2 e(u)
    r1 = -d2u[0] - e2 * u1 - c * (u2 * d3 - u3 * d2)
    r2 = -d2u[1] - e2 * u2 - c * (u3 * d1 - u1 * d3)
    r3 = -d2u[2] - e2 * u3 + u3 - c * (u1 * d2 - u2 * d1)
    return r1, r2, r3


def residual_1d(c: float, grid: Grid) -> Residual1D:
    """Max-norm residuals of the sampled closed form under spectral differentiation."""
    _require_profile_speed(c)
    _check_box(c, grid)
    s = sample(c, grid)
    r1, r2, r3 = ode_residuals(s.u, s.du, s.d2u, c)
    k2 = 1 - c * c
    fi = sum(d**2 for d in s.du) - s.u[2] ** 2
    fi3 = s.du[2] ** 2 - s.u[2] ** 2 * (k2 - s.u[2] ** 2)
    return Residual1D(
        float(np.max(np.abs(r1))),
        float(np.max(np.abs(r2))),
        float(np.max(np.abs(r3))),
        float(np.max(np.abs(fi))),
        float(np.max(np.abs(fi3))),
    )


def constant_residual(grid: Grid, angle: float = 0.0, c: float = 0.5) -> float:
    """Residual of the trivial solution ``(cos a, sin a, 0)``: exactly zero."""
    shape = grid.shape
    u = (np.full(shape, np.cos(angle)), np.full(shape, np.sin(angle)), np.zeros(shape))
    zero = tuple(np.zeros(shape) for _ in range(3))
    return float(max(np.max(np.abs(r)) for r in ode_residuals(u, zero, zero, c)))


@dataclass
class Quadrature1D:
    energy: float
    momentum: float
    u3_squared: float
    u3_fourth: float
    dx1_squared: float  # int |u'|^2
    density_identity: float  # max | e(u) - u3^2 | with spectral derivatives
    density_identity_exact: float  # same with hand derivatives


def quadrature(c: float, grid: Grid | None = None) -> Quadrature1D:
    """Grid quadratures of the conserved quantities of the sampled profile."""
    _require_open_speed(c, "quadrature")
    if grid is None:
        grid = default_grid(c)
    _check_box(c, grid)
    s = sample(c, grid)
    u3 = s.u[2]
    # theta' from the lifting: Im(conj(z) z')/|z|^2
    z = s.u[0] + 1j * s.u[1]
    dz = s.du[0] + 1j * s.du[1]
    dtheta = np.imag(np.conj(z) * dz) / np.abs(z) ** 2
    e = s.energy_density
    du = profile_derivative(c, grid.coords[0])
    e_exact = 0.5 * (sum(d**2 for d in du) + u3**2)
    return Quadrature1D(
        energy=integrate(e, grid),
        momentum=integrate(u3 * dtheta, grid),
        u3_squared=integrate(u3**2, grid),
        u3_fourth=integrate(u3**4, grid),
        dx1_squared=integrate(sum(d**2 for d in s.du), grid),
        density_identity=float(np.max(np.abs(e - u3**2))),
        density_identity_exact=float(np.max(np.abs(e_exact - u3**2))),
    )


def default_grid(c: float, n: int = 2048, box_factor: float = MIN_BOX) -> Grid:
    """Box ``box_factor / k`` with at least ``n`` points, refined for small ``c``.

    For small ``c`` the phase gradient concentrates on a core of width
    ``asinh(c)/k``; the point count is raised (to a power of two) until the
    spacing is below a fifth of that width so quadratures stay at roundoff.
    """
    k = inverse_width(c)
    length = box_factor / k
    if c > 0:
        core = np.arcsinh(c) / k
        need = length / (0.2 * core)
        n = max(n, 1 << int(np.ceil(np.log2(need))))
    return make_grid(1, n, length)


def as_field(c: float, grid: Grid):
    """The canonical profile as a :class:`lltw.fields.Field` on a 1D grid."""
    from .fields import Field

    if grid.dim != 1:
        raise ValueError("as_field expects a 1D grid")
    u1, u2, u3 = profile(c, grid.coords[0])
    return Field(grid, c, u1, u2, u3, (TWIST_1D,))
