"""Fourier symbols of the convolution reformulation and their far-field limits.

Four symbol families appear when the traveling-wave system is solved for
``u3`` and ``grad theta`` in Fourier space:

* ``Lc``   ``|xi|^2 / D_c``
* ``Lcj``  ``xi_1 xi_j / D_c``
* ``Tcjk`` ``xi_1^2 xi_j xi_k / (|xi|^2 D_c)``
* ``Rjk``  ``xi_j xi_k / |xi|^2``

with ``D_c(xi) = |xi|^4 + |xi|^2 - c^2 xi_1^2``.  Axis indices are 1-based,
matching the usual ``x_1`` (propagation) / ``x_2`` (transverse) naming.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate as _quad

from .grid import Grid, circle_max, loglog_slope, sample_at

KINDS = ("Lc", "Lcj", "Tcjk", "Rjk")

#: Published bound on the L^{4/3}(R^2) norm of L_c, valid for c in (0, 1].
LC_NORM_BOUND = 11.0


def _check_speed(c: float) -> None:
    if c > 1:
        raise ValueError(f"symbol is not elliptic for c > 1 (got c={c})")


def denom(c: float, xi: Sequence[np.ndarray] | np.ndarray) -> np.ndarray:
    """``D_c(xi) = |xi|^4 + |xi|^2 - c^2 xi_1^2``."""
    _check_speed(c)
    xi = [np.asarray(x, dtype=float) for x in xi]
    k2 = sum(x**2 for x in xi)
    return k2**2 + k2 - c**2 * xi[0] ** 2


@dataclass(frozen=True)
class KernelSymbol:
    """One member of the symbol families; ``j``/``k`` are 1-based axes."""

    kind: str
    c: float = 0.0
    j: int = 1
    k: int = 1
    dim: int = 2

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        for idx in (self.j, self.k):
            if not 1 <= idx <= self.dim:
                raise ValueError(f"axis index {idx} outside 1..{self.dim}")
        if self.kind != "Rjk":
            _check_speed(self.c)

    def __call__(self, *xi: np.ndarray) -> np.ndarray:
        """Evaluate on frequency arrays; ``xi = 0`` yields nan/inf."""
        xi = [np.asarray(x, dtype=float) for x in xi]
        k2 = sum(x**2 for x in xi)
        xj, xk = xi[self.j - 1], xi[self.k - 1]
        if self.kind == "Rjk":
            return xj * xk / k2
        D = denom(self.c, xi)
        if self.kind == "Lc":
            return k2 / D
        if self.kind == "Lcj":
            return xi[0] * xj / D
        return xi[0] ** 2 * xj * xk / (k2 * D)

    def lattice(self, grid: Grid) -> np.ndarray:
        """Symbol sampled on the grid's frequency lattice, zero mode set to 0."""
        if grid.dim != self.dim:
            raise ValueError(f"symbol is {self.dim}D but grid is {grid.dim}D")
        xi = grid.frequency_mesh()
        nonzero = sum(x**2 for x in xi) > 0
        safe = [np.where(nonzero, x, 1.0) for x in xi]
        return np.where(nonzero, self(*safe), 0.0)


def eval_symbol(symbol: KernelSymbol, xi: Sequence[float]) -> float:
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (symbol.dim,):
        raise ValueError(f"expected a {symbol.dim}-vector, got shape {xi.shape}")
    if not np.any(xi):
        raise ValueError("symbols are undefined at xi = 0")
    return float(symbol(*xi))


# ---------------------------------------------------------------------------
# L^{4/3} norm of L_c in two dimensions


def lc_norm_43(c: float, epsabs: float = 1e-13, epsrel: float = 1e-12) -> float:
    """``||L_c||_{L^{4/3}(R^2)}`` by polar quadrature.

    With ``L_c = 1/(r^2 + 1 - c^2 cos^2 t)`` the radial integral is exact,
    ``int_0^inf r dr / (r^2 + a)^{4/3} = (3/2) a^{-1/3}``, leaving

        ||L_c||^{4/3} = 6 int_0^{pi/2} (1 - c^2 cos^2 t)^{-1/3} dt.

    The angular integrand has an ``t^{-2/3}`` endpoint singularity at
    ``c = 1``; the substitution ``t = (pi/2) v^3`` removes it.
    """
    if not 0 < c <= 1:
        raise ValueError(f"lc_norm_43 requires 0 < c <= 1, got {c}")
    a = math.pi / 2
    c2 = c * c

    def integrand(v: float) -> float:
        if v == 0.0:
            # limit of 3 a v^2 / (sin^2 t + (1-c^2) cos^2 t)^{1/3}
            return 3 * a ** (1 / 3) if c2 == 1.0 else 0.0
        t = a * v**3
        base = math.sin(t) ** 2 + (1 - c2) * math.cos(t) ** 2
        return 3 * a * v * v / base ** (1 / 3)

    angular, _ = _quad.quad(integrand, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=200)
    return (6 * angular) ** 0.75


def lc_norm_43_c1_closed_form() -> float:
    """``(3 Gamma(1/6) Gamma(1/2) / Gamma(2/3))^{3/4}``, the value at ``c = 1``."""
    return (3 * math.gamma(1 / 6) * math.gamma(1 / 2) / math.gamma(2 / 3)) ** 0.75


# ---------------------------------------------------------------------------
# Far-field limits  lim R^N K(R sigma)


def _delta(a: int, b: int) -> int:
    return 1 if a == b else 0


def _pref(N: int) -> float:
    return math.gamma(N / 2) / (2 * math.pi ** (N / 2))


def _check_sigma(sigma: Sequence[float]) -> np.ndarray:
    s = np.asarray(sigma, dtype=float)
    if abs(np.linalg.norm(s) - 1) > 1e-12:
        raise ValueError("sigma must be a unit vector")
    return s


def _check_open_speed(c: float) -> None:
    if not 0 < c < 1:
        raise ValueError(f"far-field limits need 0 < c < 1, got {c}")


@dataclass(frozen=True)
class FarFieldLimit:
    """Closed-form limit ``sigma -> lim R^N K(R sigma)`` of one kernel."""

    kind: str
    c: float = 0.0
    j: int = 1
    k: int = 1
    dim: int = 2

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind != "Rjk":
            _check_open_speed(self.c)

    def __call__(self, sigma: Sequence[float]) -> float:
        return farfield_limit(self, sigma)


def farfield_limit(limit: FarFieldLimit, sigma: Sequence[float]) -> float:
    s = _check_sigma(sigma)
    N, c, j, k = limit.dim, limit.c, limit.j, limit.k
    if s.shape != (N,):
        raise ValueError(f"sigma must have {N} components")
    pref = _pref(N)
    if limit.kind == "Rjk":
        return pref * (_delta(j, k) - N * s[j - 1] * s[k - 1])
    a = 1 - c * c
    q = a + c * c * s[0] ** 2
    if limit.kind == "Lc":
        return pref * a ** ((N - 3) / 2) * c * c / q ** (N / 2) * (1 - N * s[0] ** 2 / q)
    if limit.kind == "Lcj":
        d1 = _delta(j, 1)
        return (
            pref
            * a ** ((N - 1) / 2)
            / q ** (N / 2)
            * (d1 * a ** (-(d1 + 1) / 2) - N * a ** (-d1) * s[0] * s[j - 1] / q)
        )
    dj, dk = _delta(j, 1), _delta(k, 1)
    inner = a ** (N / 2) * (
        _delta(j, k) * a ** (-(dj + dk + 1) / 2) / q ** (N / 2)
        - N * a ** (-dj - dk + 0.5) * s[j - 1] * s[k - 1] / q ** ((N + 2) / 2)
    )
    return pref / (c * c) * (inner - _delta(j, k) + N * s[j - 1] * s[k - 1])


def sum_sigma_lcj(c: float, sigma: Sequence[float]) -> float:
    """Closed form of ``sum_j sigma_j L_{c,j,inf}(sigma)``."""
    s = _check_sigma(sigma)
    N = s.size
    q = 1 - c * c + c * c * s[0] ** 2
    return -_pref(N) * (N - 1) * (1 - c * c) ** ((N - 3) / 2) * s[0] / q ** (N / 2)


def sum_sigma_tcjk(c: float, sigma: Sequence[float], k: int) -> float:
    """Closed form of ``sum_j sigma_j T_{c,j,k,inf}(sigma)``."""
    s = _check_sigma(sigma)
    N = s.size
    q = 1 - c * c + c * c * s[0] ** 2
    expo = N / 2 - 0.5 - _delta(k, 1)
    return -_pref(N) * (N - 1) * s[k - 1] / (c * c) * ((1 - c * c) ** expo / q ** (N / 2) - 1)


def farfield_sum_check(c: float, sigma: Sequence[float]) -> tuple[float, list[float]]:
    """Residuals of the two sigma-contracted sums against their closed forms.

    Returns ``(|sum_j s_j L_j - closed|, [|sum_j s_j T_jk - closed| for each k])``.
    """
    _check_open_speed(c)
    s = _check_sigma(sigma)
    N = s.size
    lhs_l = sum(s[j - 1] * farfield_limit(FarFieldLimit("Lcj", c, j, 1, N), s) for j in range(1, N + 1))
    res_l = abs(lhs_l - sum_sigma_lcj(c, s))
    res_t = []
    for k in range(1, N + 1):
        lhs_t = sum(s[j - 1] * farfield_limit(FarFieldLimit("Tcjk", c, j, k, N), s) for j in range(1, N + 1))
        res_t.append(abs(lhs_t - sum_sigma_tcjk(c, s, k)))
    return res_l, res_t


# ---------------------------------------------------------------------------
# Physical-space kernels


def _fundamental_hessian(a: int, b: int, x1: np.ndarray, x2: np.ndarray, aniso: float) -> np.ndarray:
    """Inverse transform of ``xi_a xi_b / (aniso xi_1^2 + xi_2^2)`` away from the origin.

    Equals ``d_a d_b`` of ``log(x_1^2/aniso + x_2^2) / (4 pi sqrt(aniso))``.
    """
    q = x1**2 / aniso + x2**2
    if (a, b) == (1, 1):
        h = 1 / (aniso * q) - 2 * x1**2 / (aniso**2 * q**2)
    elif (a, b) == (2, 2):
        h = 1 / q - 2 * x2**2 / q**2
    else:
        h = -2 * x1 * x2 / (aniso * q**2)
    return h / (2 * np.pi * np.sqrt(aniso))


def _homogeneous_symbol(sym: KernelSymbol, xi1: np.ndarray, xi2: np.ndarray) -> np.ndarray:
    """Symbol with ``|xi|^4`` dropped from ``D_c``: its degree-0 part at ``xi -> 0``."""
    xi = (xi1, xi2)
    k2 = xi1**2 + xi2**2
    Q = k2 - sym.c**2 * xi1**2
    xj, xk = xi[sym.j - 1], xi[sym.k - 1]
    if sym.kind == "Lc":
        return k2 / Q
    if sym.kind == "Lcj":
        return xi1 * xj / Q
    if sym.kind == "Tcjk":
        return xi1**2 * xj * xk / (k2 * Q)
    return xj * xk / k2


def _homogeneous_kernel(sym: KernelSymbol, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    a = 1 - sym.c**2
    lo, hi = sorted((sym.j, sym.k))
    if sym.kind == "Lc":
        return sym.c**2 * _fundamental_hessian(1, 1, x1, x2, a)
    if sym.kind == "Lcj":
        return _fundamental_hessian(*sorted((1, sym.j)), x1, x2, a)
    if sym.kind == "Tcjk":
        # xi_1^2/(|xi|^2 Q) = (1/Q - 1/|xi|^2)/c^2
        return (_fundamental_hessian(lo, hi, x1, x2, a) - _fundamental_hessian(lo, hi, x1, x2, 1.0)) / sym.c**2
    return _fundamental_hessian(lo, hi, x1, x2, 1.0)


def _smoothing_filter(grid: Grid) -> np.ndarray:
    xi = grid.frequency_mesh()
    kmax = min(np.pi / h for h in grid.spacing)
    return np.exp(-36.0 * (np.sqrt(sum(x**2 for x in xi)) / kmax) ** 8)


@dataclass
class PhysicalKernel:
    """Kernel sampled in physical space with its radial decay fit."""

    symbol: KernelSymbol
    grid: Grid
    values: np.ndarray
    fit_radii: np.ndarray
    decay_rate: float
    fit_misfit: float
    method: str

    @property
    def in_decay_window(self) -> bool:
        # (N-2, N] with fit slack
        N = self.grid.dim
        return N - 2 + 0.5 <= self.decay_rate <= N + 0.3

    def scaled(self, R: float, directions: np.ndarray) -> np.ndarray:
        """``R^N K(R sigma)`` for each row of ``directions``."""
        pts = R * np.asarray(directions, dtype=float)
        return R**self.grid.dim * sample_at(self.values, self.grid, pts)


def default_fit_radii(grid: Grid, count: int = 8, lo: float = 0.15, hi: float = 0.4) -> np.ndarray:
    half = min(grid.length) / 2
    return np.geomspace(lo * half, hi * half, count)


def kernel_physical(
    kind: str,
    c: float,
    grid: Grid,
    j: int = 1,
    k: int = 1,
    fit_radii: Sequence[float] | None = None,
    method: str = "subtracted",
) -> PhysicalKernel:
    """Physical-space kernel on the grid nodes plus a log-log decay fit.

    ``method="periodic"`` is the bare inverse DFT of the lattice symbol (zero
    mode 0), i.e. the kernel of the periodic box, whose tails carry an
    ``O((R/L)^2)`` periodization error.  ``method="subtracted"`` (default)
    approximates the whole-plane kernel: the degree-0 part of the symbol at
    ``xi = 0`` is transformed exactly (Hessian of the anisotropic logarithmic
    fundamental solution) and only the remainder, which vanishes at the
    origin, goes through a filtered DFT.
    """
    if grid.dim != 2:
        raise ValueError("kernel_physical works on 2D grids")
    if kind != "Rjk" and not 0 < c < 1:
        raise ValueError(f"kernel_physical needs 0 < c < 1, got {c}")
    if method not in ("subtracted", "periodic"):
        raise ValueError(f"unknown method {method!r}")
    sym = KernelSymbol(kind, c, j, k, 2)
    radii = default_fit_radii(grid) if fit_radii is None else np.asarray(fit_radii, dtype=float)
    h = max(grid.spacing)
    if np.any(radii <= 4 * h) or np.any(radii > 0.4 * min(grid.length) / 2 + 1e-9):
        raise ValueError("grid too coarse or box too small for the requested fit radii")

    m = sym.lattice(grid)
    if method == "subtracted":
        xi1, xi2 = grid.frequency_mesh()
        nonzero = (xi1**2 + xi2**2) > 0
        s1, s2 = np.where(nonzero, xi1, 1.0), np.where(nonzero, xi2, 1.0)
        m = np.where(nonzero, m - _homogeneous_symbol(sym, s1, s2), 0.0) * _smoothing_filter(grid)
    m[grid.nyquist_mask()] = 0.0
    # ifft(m)/cell_volume samples (2 pi)^-2 int m e^{i x.xi}; fftshift moves x = 0 to index n/2
    values = np.fft.fftshift(np.fft.ifftn(m).real) / grid.cell_volume
    if method == "subtracted":
        x1, x2 = grid.mesh()
        r = np.hypot(x1, x2)
        with np.errstate(divide="ignore", invalid="ignore"):
            values += np.where(r > 0, _homogeneous_kernel(sym, x1, x2), 0.0)

    amps = circle_max(values, grid, radii)
    if np.any(amps <= 0):
        raise ValueError("kernel vanishes on a fit annulus")
    slope, misfit = loglog_slope(radii, amps)
    return PhysicalKernel(sym, grid, values, radii, -slope, misfit, method)


def farfield_comparison(
    kernel: PhysicalKernel, R: float, ndir: int = 16
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Directions, measured ``R^N K(R sigma)`` and closed-form limits."""
    ang = 2 * np.pi * np.arange(ndir) / ndir
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    s = kernel.symbol
    lim = FarFieldLimit(s.kind, s.c, s.j, s.k, 2)
    predicted = np.array([farfield_limit(lim, d) for d in dirs])
    return dirs, kernel.scaled(R, dirs), predicted
