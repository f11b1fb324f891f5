"""Uniform periodic grids and Fourier-space operations.

Arrays live on a :class:`Grid` with ``ij`` indexing, so ``values[i1, i2]``
is the sample at ``(x1[i1], x2[i2])``.  Flattening with ``order="F"`` gives
the on-disk layout (first axis fastest).

Continuous Fourier convention: ``f(x) = (2 pi)^-N  int  f_hat(xi) e^{i x.xi} d xi``,
so a multiplier ``m`` acts as ``ifft(m * fft(f))`` on samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence, Union

import numpy as np

MIN_POINTS = 8

SymbolLike = Union[float, np.ndarray, Callable[..., np.ndarray], Any]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic sampling lattice on ``[-L/2, L/2)`` per axis."""

    n: tuple[int, ...]
    length: tuple[float, ...]
    spacing: tuple[float, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "spacing", tuple(L / m for L, m in zip(self.length, self.n)))

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.length))

    @property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Node coordinates per axis, starting at ``-L/2``."""
        return tuple(-L / 2 + h * np.arange(m) for L, h, m in zip(self.length, self.spacing, self.n))

    @property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Per-axis angular frequencies ``2 pi k / L`` in DFT ordering."""
        return tuple(2 * np.pi * np.fft.fftfreq(m, d=h) for m, h in zip(self.n, self.spacing))

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.coords, indexing="ij"))

    def frequency_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.wavenumbers, indexing="ij"))

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(x**2 for x in self.mesh()))

    def nyquist_mask(self) -> np.ndarray:
        """Boolean mask selecting Fourier modes that touch a Nyquist index."""
        mask = np.zeros(self.shape, dtype=bool)
        for axis, m in enumerate(self.n):
            idx = [slice(None)] * self.dim
            idx[axis] = m // 2
            mask[tuple(idx)] = True
        return mask


def make_grid(dim: int, n: int | Sequence[int], length: float | Sequence[float]) -> Grid:
    """Build a ``dim``-dimensional grid; scalars for ``n``/``length`` are broadcast."""
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    ns = (n,) * dim if np.isscalar(n) else tuple(n)
    Ls = (length,) * dim if np.isscalar(length) else tuple(length)
    if len(ns) != dim or len(Ls) != dim:
        raise ValueError("n and length must have one entry per axis")
    for m in ns:
        if int(m) != m or m < MIN_POINTS or m % 2:
            raise ValueError(f"points per axis must be an even integer >= {MIN_POINTS}, got {m}")
    for L in Ls:
        if not np.isfinite(L) or L <= 0:
            raise ValueError(f"length must be positive, got {L}")
    return Grid(tuple(int(m) for m in ns), tuple(float(L) for L in Ls))


def _check_axis(grid: Grid, axis: int) -> None:
    if not 0 <= axis < grid.dim:
        raise IndexError(f"axis {axis} out of range for a {grid.dim}D grid")


def spectral_gradient(values: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    """Derivative along ``axis`` by multiplication with ``i xi`` (Nyquist zeroed)."""
    _check_axis(grid, axis)
    if np.iscomplexobj(values):
        raise TypeError("spectral_gradient expects real samples")
    k = grid.wavenumbers[axis].copy()
    k[grid.n[axis] // 2] = 0.0
    shape = [1] * grid.dim
    shape[axis] = -1
    hat = np.fft.fft(values, axis=axis)
    return np.fft.ifft(1j * k.reshape(shape) * hat, axis=axis).real


def gradient(values: np.ndarray, grid: Grid) -> list[np.ndarray]:
    return [spectral_gradient(values, grid, a) for a in range(grid.dim)]


def twisted_gradient(z: np.ndarray, grid: Grid, axis: int, twist: float = 0.0) -> np.ndarray:
    """Derivative of a complex field with ``z(x + L e_axis) = e^{i twist} z(x)``.

    The field is untwisted into a periodic one, differentiated spectrally,
    and twisted back.  ``twist = 0`` is the ordinary periodic derivative.
    """
    _check_axis(grid, axis)
    x = grid.mesh()[axis] + grid.length[axis] / 2
    rate = twist / grid.length[axis]
    phase = np.exp(1j * rate * x)
    w = z * np.conj(phase)
    dw = spectral_gradient(w.real, grid, axis) + 1j * spectral_gradient(w.imag, grid, axis)
    return phase * (dw + 1j * rate * w)


def integrate(values: np.ndarray, grid: Grid) -> float:
    """Rectangle-rule integral over the periodic box."""
    return float(np.sum(values) * grid.cell_volume)


def symbol_on_lattice(symbol: SymbolLike, grid: Grid) -> np.ndarray:
    """Sample a multiplier on the lattice with the zero mode set to 0.

    ``symbol`` may be a scalar, a lattice-shaped array, a callable taking the
    frequency mesh (one array per axis), or an object with a ``lattice(grid)``
    method such as :class:`lltw.kernels.KernelSymbol`.
    """
    if hasattr(symbol, "lattice"):
        m = np.array(symbol.lattice(grid))
    elif callable(symbol):
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.array(np.broadcast_to(symbol(*grid.frequency_mesh()), grid.shape))
    else:
        m = np.array(np.broadcast_to(np.asarray(symbol), grid.shape))
    m[(0,) * grid.dim] = 0.0
    return m


def apply_multiplier(values: np.ndarray, grid: Grid, symbol: SymbolLike) -> np.ndarray:
    """Inverse transform of ``symbol(xi) * fft(values)``; zero mode of the product is 0.

    Real input comes back real whenever the imaginary residue is at roundoff
    level (always the case for real symbols even in ``xi``).
    """
    m = symbol_on_lattice(symbol, grid)
    out = np.fft.ifftn(m * np.fft.fftn(values))
    if not np.iscomplexobj(values):
        scale = np.max(np.abs(out), initial=0.0)
        if np.max(np.abs(out.imag), initial=0.0) <= 1e-12 * max(scale, 1.0):
            return out.real
    return out


def antigradient(components: Sequence[np.ndarray], grid: Grid) -> np.ndarray:
    """Mean-zero least-squares potential ``phi`` with ``grad phi ~ components``."""
    xi = grid.frequency_mesh()
    k2 = sum(x**2 for x in xi)
    div_hat = sum(-1j * x * np.fft.fftn(g) for x, g in zip(xi, components))
    with np.errstate(divide="ignore", invalid="ignore"):
        phi_hat = np.where(k2 > 0, div_hat / np.where(k2 > 0, k2, 1.0), 0.0)
    phi_hat[grid.nyquist_mask()] = 0.0
    return np.fft.ifftn(phi_hat).real


def sample_at(values: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Periodic bilinear (or linear, in 1D) interpolation at physical ``points``.

    ``points`` has shape ``(..., dim)``.
    """
    from scipy.ndimage import map_coordinates

    pts = np.asarray(points, dtype=float)
    idx = [
        (pts[..., a] + grid.length[a] / 2) / grid.spacing[a] for a in range(grid.dim)
    ]
    flat = [i.ravel() for i in idx]
    out = map_coordinates(values, flat, order=1, mode="grid-wrap")
    return out.reshape(pts.shape[:-1])


def annulus_max(values: np.ndarray, grid: Grid, radii: Sequence[float], width: float | None = None) -> np.ndarray:
    """Max of ``|values|`` over thin annuli ``|r - R| < width/2`` centred at the origin."""
    r = grid.radius()
    h = max(grid.spacing)
    out = []
    for R in radii:
        w = width if width is not None else max(2 * h, 0.05 * R)
        sel = np.abs(r - R) < w / 2
        if not sel.any():
            raise ValueError(f"annulus at R={R} contains no grid nodes")
        out.append(float(np.max(np.abs(values[sel]))))
    return np.asarray(out)


def circle_max(values: np.ndarray, grid: Grid, radii: Sequence[float]) -> np.ndarray:
    """Max of ``|values|`` interpolated on circles, about two samples per grid step."""
    h = min(grid.spacing)
    out = []
    for R in radii:
        m = max(64, int(np.ceil(4 * np.pi * R / h)))
        t = 2 * np.pi * np.arange(m) / m
        pts = np.stack([R * np.cos(t), R * np.sin(t)], axis=-1)
        out.append(float(np.max(np.abs(sample_at(values, grid, pts)))))
    return np.asarray(out)


def loglog_slope(radii: Sequence[float], amplitudes: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of ``log amplitude`` against ``log R`` and its RMS misfit."""
    x = np.log(np.asarray(radii, dtype=float))
    y = np.log(np.asarray(amplitudes, dtype=float))
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    misfit = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return float(coef[0]), misfit
