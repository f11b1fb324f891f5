"""Conserved quantities, integral identities and a priori inequality gaps.

Everything here is a grid quadrature of spectral derivatives.  The
identities and inequalities are theorems about exact solutions; on a
discrete field they hold up to the field's PDE residual, which is why the
report carries a tolerance that scales with that residual.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .fields import (
    DEFAULT_MARGIN,
    Field,
    LiftedField,
    energy_density,
    field_gradient,
    lifting,
)
from .grid import integrate, spectral_gradient

#: Largest ``max|u3|`` for which the small-amplitude inequalities are stated.
VORTEXLESS_BOUND = 0.5


def energy(f: Field) -> float:
    return integrate(energy_density(f), f.grid)


def momentum_lifted(lf: LiftedField) -> float:
    """``int u3 d1 theta``."""
    return integrate(lf.u3 * lf.theta_gradient()[0], lf.grid)


def momentum_density(f: Field) -> float:
    """``-int x2 u . (d1 u x d2 u)`` over the box (2D only)."""
    if f.grid.dim != 2:
        raise ValueError("momentum_density is defined for 2D fields")
    du = field_gradient(f)
    d1 = np.stack([du[i][0] for i in range(3)])
    d2 = np.stack([du[i][1] for i in range(3)])
    u = np.stack(f.components)
    w = np.einsum("i...,i...->...", u, np.cross(d1, d2, axis=0))
    x2 = f.grid.mesh()[1]
    return -integrate(x2 * w, f.grid)


def lp_norm(values: np.ndarray, grid, p: float) -> float:
    return integrate(np.abs(values) ** p, grid) ** (1.0 / p)


@dataclass
class Pohozaev:
    poh2: float
    poh3: float | None
    energy: float
    dx1_squared: float
    u3_squared: float
    c_momentum: float | None


def pohozaev_report(f: Field, lf: LiftedField | None = None) -> Pohozaev:
    """``|E - int |d1 u|^2|`` and ``|int u3^2 - c p|``, each over ``E + 1``.

    The second identity holds for two-dimensional solutions only and is
    ``None`` for other dimensions.
    """
    du = field_gradient(f)
    E = integrate(energy_density(f, du), f.grid)
    d1sq = integrate(sum(du[i][0] ** 2 for i in range(3)), f.grid)
    u3sq = integrate(f.u3**2, f.grid)
    poh2 = abs(E - d1sq) / (E + 1.0)
    if f.grid.dim != 2:
        return Pohozaev(poh2, None, E, d1sq, u3sq, None)
    if lf is None:
        lf = lifting(f)
    cp = f.c * momentum_lifted(lf)
    return Pohozaev(poh2, abs(u3sq - cp) / (E + 1.0), E, d1sq, u3sq, cp)


@dataclass
class IdentitySides:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def _lifted_pieces(lf: LiftedField):
    f = lf.to_field(renormalize=False)
    du = field_gradient(f)
    e = energy_density(f, du)
    rho = lf.rho
    grad_rho = [spectral_gradient(rho, lf.grid, a) for a in range(lf.grid.dim)]
    grad_u3 = du[2]
    grad_th = lf.theta_gradient()
    return f, e, rho, grad_rho, grad_u3, grad_th


def identity_report(lf: LiftedField) -> dict[str, IdentitySides]:
    """Both sides of the four integral identities of the polar system."""
    g = lf.grid
    c = lf.c
    f, e, rho, grad_rho, grad_u3, grad_th = _lifted_pieces(lf)
    u3 = lf.u3
    th2 = sum(t**2 for t in grad_th)
    r2 = sum(t**2 for t in grad_rho)
    d1 = grad_th[0]
    I = lambda a: integrate(a, g)  # noqa: E731
    return {
        "I1": IdentitySides(I(rho**2 * th2), c * I(u3 * d1)),
        "I2": IdentitySides(I(r2) + I(rho**2 * th2), 2 * I(e * rho**2) - c * I(u3 * rho**2 * d1)),
        "I2b": IdentitySides(
            2 * I(rho * r2) + 2 * I(e * u3**2 * rho),
            I(rho * u3**2 * th2) + c * I(rho * u3**3 * d1),
        ),
        "I3": IdentitySides(
            I(sum(t**2 for t in grad_u3)) + I(u3**2),
            2 * I(e * u3**2) + c * I(rho**2 * u3 * d1),
        ),
    }


@dataclass
class Inequality:
    lhs: float
    rhs: float
    applicable: bool
    note: str = ""

    @property
    def gap(self) -> float:
        return self.rhs - self.lhs

    def passed(self, slack: float = 0.0) -> bool | None:
        return self.gap >= -slack if self.applicable else None


def polar_bound_excess(lf: LiftedField) -> float:
    """``max( |u3 d1 theta| - e(u)/sqrt(1 - delta^2) )`` over the nodes (``<= 0`` when it holds)."""
    f, e, *_ , grad_th = _lifted_pieces(lf)
    delta = lf.delta
    bound = e / np.sqrt(1.0 - delta**2)
    return float(np.max(np.abs(lf.u3 * grad_th[0]) - bound))


def inequality_report(lf: LiftedField) -> dict[str, Inequality]:
    """Gaps ``rhs - lhs`` of the small-amplitude estimates.

    The integral estimates are stated for ``max|u3| <= 1/2`` and
    ``0 < c <= 1``; outside that range they are reported as inapplicable.
    The energy bound by ``3 ||u3||_2^2`` belongs to dimensions three and up
    and is always inapplicable here.  The pointwise polar bound holds for
    any lifted field and is always evaluated.
    """
    g = lf.grid
    c = lf.c
    f, e, rho, grad_rho, grad_u3, grad_th = _lifted_pieces(lf)
    delta = lf.delta
    E = integrate(e, g)
    u3_4 = lp_norm(lf.u3, g, 4)
    u3_2 = lp_norm(lf.u3, g, 2)
    ok = g.dim == 2 and delta <= VORTEXLESS_BOUND and 0 < c <= 1
    note = "" if ok else "requires a 2D field with max|u3| <= 1/2 and 0 < c <= 1"
    phi = grad_th[0] - c * lf.u3
    dth2 = grad_th[1] if g.dim == 2 else np.zeros(g.shape)
    out = {
        "u3_L4_by_delta_energy": Inequality(u3_4, 54 * delta * E, ok, note),
        "energy_by_u3_L4": Inequality(E, 10 * u3_4**4, ok, note),
        "phase_defect_by_u3_L4": Inequality(integrate(phi**2 + dth2**2, g), 2.25 * u3_4**4, ok, note),
        "grad_rho_by_u3_L4": Inequality(integrate(sum(t**2 for t in grad_rho), g), 6 * u3_4**4, ok, note),
        "energy_by_u3_L2": Inequality(E, 3 * u3_2**2, False, "stated for dimension three and higher"),
    }
    excess = polar_bound_excess(lf) if delta < 1 else float("inf")
    out["pointwise_polar"] = Inequality(excess, 0.0, True, "max over nodes of |u3 d1 theta| - e/sqrt(1-delta^2)")
    return out


@dataclass
class DiagnosticsReport:
    c: float
    energy: float
    momentum_lifted: float
    momentum_density: float | None
    u3_Linf: float
    u3_L2: float
    u3_L4: float
    pohozaev: dict[str, float | None]
    identities: dict[str, dict[str, float]]
    inequalities: dict[str, dict[str, Any]]
    residual_pde: float
    tolerance: float
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def identities_within_tolerance(self) -> bool:
        return all(v["residual"] <= self.tolerance for v in self.identities.values())


def report_tolerance(residual_pde: float) -> float:
    return max(1e-8, 50.0 * residual_pde)


def diagnose(f: Field, margin: float = DEFAULT_MARGIN, residual_pde: float | None = None) -> DiagnosticsReport:
    """Full report for a field; the PDE residual is computed unless supplied."""
    from .solver2d import residual

    lf = lifting(f, margin)
    if residual_pde is None:
        residual_pde = residual(f)
    E = energy(f)
    slack = 1e-3 * (E + 1.0)
    poh = pohozaev_report(f, lf)
    ids = identity_report(lf)
    ineq = inequality_report(lf)
    return DiagnosticsReport(
        c=f.c,
        energy=E,
        momentum_lifted=momentum_lifted(lf),
        momentum_density=momentum_density(f) if f.grid.dim == 2 else None,
        u3_Linf=lf.delta,
        u3_L2=lp_norm(f.u3, f.grid, 2),
        u3_L4=lp_norm(f.u3, f.grid, 4),
        pohozaev={"poh2": poh.poh2, "poh3": poh.poh3},
        identities={k: {"lhs": v.lhs, "rhs": v.rhs, "residual": v.residual} for k, v in ids.items()},
        inequalities={
            k: {
                "lhs": v.lhs,
                "rhs": v.rhs,
                "gap": v.gap,
                "applicable": v.applicable,
                "passed": v.passed(0.0 if k == "pointwise_polar" else slack),
                "note": v.note,
            }
            for k, v in ineq.items()
        },
        residual_pde=residual_pde,
        tolerance=report_tolerance(residual_pde),
    )
