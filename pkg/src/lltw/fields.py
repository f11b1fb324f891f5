"""Unit vector fields, their polar lifting, and spectral derivatives.

A :class:`Field` stores ``u = (u1, u2, u3)`` on a periodic grid.  The planar
part ``z = u1 + i u2`` may be periodic only up to a constant phase per axis,
``z(x + L_a e_a) = e^{i twist_a} z(x)``; this covers one-dimensional kinks
whose planar part turns by ``pi`` across the box.  Fully periodic fields
have ``twist = 0``.

A :class:`LiftedField` stores ``(u3, theta)`` with ``z = sqrt(1 - u3^2) e^{i theta}``.
The phase is ``theta = ramp + periodic part``, with a linear ramp of total
rise ``twist_a`` along each axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Grid, spectral_gradient, twisted_gradient

DEFAULT_MARGIN = 1e-3


class VortexError(ValueError):
    """Raised when a field cannot be lifted (|u3| reaches 1 or the phase winds)."""


def _twist_tuple(grid: Grid, twist) -> tuple[float, ...]:
    if twist is None:
        return (0.0,) * grid.dim
    t = tuple(float(a) for a in np.broadcast_to(np.asarray(twist, dtype=float), (grid.dim,)))
    return t


@dataclass
class Field:
    grid: Grid
    c: float
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    twist: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        self.twist = _twist_tuple(self.grid, self.twist)
        for name in ("u1", "u2", "u3"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != self.grid.shape:
                raise ValueError(f"{name} has shape {a.shape}, expected {self.grid.shape}")
            setattr(self, name, a)

    @property
    def components(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.u1, self.u2, self.u3

    @property
    def planar(self) -> np.ndarray:
        return self.u1 + 1j * self.u2

    def norm_defect(self) -> float:
        return float(np.max(np.abs(self.u1**2 + self.u2**2 + self.u3**2 - 1.0)))

    def renormalized(self) -> "Field":
        r = np.sqrt(self.u1**2 + self.u2**2 + self.u3**2)
        return replace(self, u1=self.u1 / r, u2=self.u2 / r, u3=self.u3 / r)

    def rotated(self, angle: float) -> "Field":
        """Rotation by ``angle`` about the third axis."""
        z = np.exp(1j * angle) * self.planar
        return replace(self, u1=z.real.copy(), u2=z.imag.copy())

    def shifted(self, shift: tuple[int, ...]) -> "Field":
        """Translation by whole grid steps (only meaningful for untwisted fields)."""
        axes = tuple(range(self.grid.dim))
        return replace(
            self,
            u1=np.roll(self.u1, shift, axis=axes),
            u2=np.roll(self.u2, shift, axis=axes),
            u3=np.roll(self.u3, shift, axis=axes),
        )

    def reflected(self) -> "Field":
        """``(u1, u2, -u3)(-x)``; node ``i`` maps to ``(n - i) mod n``."""
        sel = np.ix_(*[(m - np.arange(m)) % m for m in self.grid.n])
        z = self.planar[sel]
        # node 0 takes the value at x = L/2, the twisted image of node 0
        for axis, t in enumerate(self.twist):
            if t:
                idx = [slice(None)] * self.grid.dim
                idx[axis] = 0
                z[tuple(idx)] *= np.exp(1j * t)
        return replace(
            self,
            u1=z.real.copy(),
            u2=z.imag.copy(),
            u3=-self.u3[sel].copy(),
            twist=tuple(-t for t in self.twist),
        )


def trivial_field(grid: Grid, c: float, angle: float = 0.0) -> Field:
    shape = grid.shape
    return Field(grid, c, np.full(shape, np.cos(angle)), np.full(shape, np.sin(angle)), np.zeros(shape))


def field_gradient(f: Field) -> list[list[np.ndarray]]:
    """``du[comp][axis]`` with twisted derivatives for the planar part."""
    out: list[list[np.ndarray]] = [[], [], []]
    z = f.planar
    for axis in range(f.grid.dim):
        dz = twisted_gradient(z, f.grid, axis, f.twist[axis])
        out[0].append(dz.real)
        out[1].append(dz.imag)
        out[2].append(spectral_gradient(f.u3, f.grid, axis))
    return out


def field_laplacian(f: Field) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    z = f.planar
    lz = np.zeros_like(z)
    l3 = np.zeros(f.grid.shape)
    for axis in range(f.grid.dim):
        t = f.twist[axis]
        lz = lz + twisted_gradient(twisted_gradient(z, f.grid, axis, t), f.grid, axis, t)
        l3 = l3 + spectral_gradient(spectral_gradient(f.u3, f.grid, axis), f.grid, axis)
    return lz.real, lz.imag, l3


def energy_density(f: Field, du: list[list[np.ndarray]] | None = None) -> np.ndarray:
    """``e(u) = (|grad u|^2 + u3^2) / 2``."""
    if du is None:
        du = field_gradient(f)
    return 0.5 * (sum(d**2 for comp in du for d in comp) + f.u3**2)


# ---------------------------------------------------------------------------
# Lifting


def _ramp(grid: Grid, twist: tuple[float, ...]) -> np.ndarray:
    mesh = grid.mesh()
    out = np.zeros(grid.shape)
    for axis, t in enumerate(twist):
        if t:
            out = out + t * (mesh[axis] + grid.length[axis] / 2) / grid.length[axis]
    return out


@dataclass
class LiftedField:
    grid: Grid
    c: float
    u3: np.ndarray
    theta: np.ndarray
    twist: tuple[float, ...] | None = None
    margin: float = DEFAULT_MARGIN
    clipped: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        self.twist = _twist_tuple(self.grid, self.twist)
        self.u3 = np.asarray(self.u3, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        if self.u3.shape != self.grid.shape or self.theta.shape != self.grid.shape:
            raise ValueError("u3 and theta must match the grid shape")

    @property
    def rho(self) -> np.ndarray:
        return np.sqrt(np.clip(1.0 - self.u3**2, 0.0, None))

    @property
    def delta(self) -> float:
        return float(np.max(np.abs(self.u3), initial=0.0))

    def check_margin(self) -> None:
        if self.delta > 1.0 - self.margin:
            raise VortexError(
                f"vortex present: max|u3| = {self.delta:.6g} exceeds 1 - margin = {1 - self.margin:.6g}"
            )

    def periodic_phase(self) -> np.ndarray:
        return self.theta - _ramp(self.grid, self.twist)

    def theta_gradient(self) -> list[np.ndarray]:
        per = self.periodic_phase()
        return [
            spectral_gradient(per, self.grid, a) + self.twist[a] / self.grid.length[a]
            for a in range(self.grid.dim)
        ]

    def to_field(self, renormalize: bool = True) -> Field:
        rho = self.rho
        f = Field(self.grid, self.c, rho * np.cos(self.theta), rho * np.sin(self.theta), self.u3.copy(), self.twist)
        return f.renormalized() if renormalize else f

    def with_phase_shift(self, shift: float) -> "LiftedField":
        return replace(self, theta=self.theta + shift)


def _wrap(a: np.ndarray) -> np.ndarray:
    return (a + np.pi) % (2 * np.pi) - np.pi


def plaquette_winding(phase: np.ndarray) -> np.ndarray:
    """Winding number (in units of ``2 pi``) of a wrapped phase around each interior plaquette."""
    if phase.ndim == 1:
        return np.zeros(0)
    a = phase[:-1, :-1]
    b = phase[1:, :-1]
    cc = phase[1:, 1:]
    d = phase[:-1, 1:]
    total = _wrap(b - a) + _wrap(cc - b) + _wrap(d - cc) + _wrap(a - d)
    return np.rint(total / (2 * np.pi))


def lifting(f: Field, margin: float = DEFAULT_MARGIN) -> LiftedField:
    """Polar lifting ``u1 + i u2 = sqrt(1 - u3^2) e^{i theta}``.

    The phase is unwrapped by nearest-branch continuation along the first
    line of the second axis and then along the first axis from that line.
    Every interior plaquette must have zero winding.  The total phase rise
    across each axis (the boundary jump folded into ``(-pi, pi]``) becomes the
    lifted twist, so ``theta`` minus its ramp is periodic.
    """
    if not 0 <= margin < 1:
        raise ValueError(f"margin must lie in [0, 1), got {margin}")
    delta = float(np.max(np.abs(f.u3), initial=0.0))
    if delta > 1.0 - margin:
        raise VortexError(f"vortex present: max|u3| = {delta:.6g} exceeds 1 - margin = {1 - margin:.6g}")
    raw = np.angle(f.planar)
    if f.grid.dim == 2:
        wind = plaquette_winding(raw)
        if np.any(wind != 0):
            i, j = np.argwhere(wind != 0)[0]
            raise VortexError(f"vortex present: nonzero phase winding at plaquette ({i}, {j})")
        theta = raw.copy()
        theta[0, :] = np.unwrap(raw[0, :])
        theta = np.unwrap(theta, axis=0)
    else:
        theta = np.unwrap(raw)
    twist = []
    for axis in range(f.grid.dim):
        first = np.take(theta, 0, axis=axis)
        last = np.take(theta, -1, axis=axis)
        # interior rise plus the wrapped step to the image of the first node
        rise = last - first + _wrap(first - last + f.twist[axis])
        if np.ptp(rise) > 1e-6:
            raise VortexError(f"vortex present: phase rise across axis {axis} varies between lines")
        twist.append(float(rise.flat[0]))
    return LiftedField(f.grid, f.c, f.u3.copy(), theta, tuple(twist), margin)
