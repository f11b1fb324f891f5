"""Independent reference computations used to derive frozen test values.

Each oracle avoids the code path it checks: quadratures use scipy directly
on the defining integrals rather than the package's reductions.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate


def lc_norm_43_polar(c: float) -> float:
    """``||L_c||_{4/3}`` by nested quadrature of ``(r^2 + 1 - c^2 cos^2 t)^{-4/3} r``."""

    def radial(t: float) -> float:
        a = 1 - c * c * math.cos(t) ** 2
        return integrate.quad(lambda r: r * (r * r + a) ** (-4 / 3), 0, np.inf, epsabs=1e-13, epsrel=1e-12)[0]

    v = integrate.quad(radial, 0, 2 * np.pi, epsabs=1e-12, epsrel=1e-11, limit=200, points=[np.pi / 2, np.pi, 1.5 * np.pi])[0]
    return v**0.75


def sech_power_integral(k: float, p: int) -> float:
    """``int_R (k sech(k x))^p dx`` by adaptive quadrature."""
    return 2 * integrate.quad(lambda x: (k / math.cosh(min(k * x, 700.0))) ** p, 0, np.inf, epsabs=1e-14, epsrel=1e-13)[0]


def momentum_integral(c: float) -> float:
    """``int u3 theta'`` with ``theta' = c u3 / (1 - u3^2)``, by quadrature."""
    k = math.sqrt(1 - c * c)

    def f(x):
        if k * x > 700:
            return 0.0
        u3 = k / math.cosh(k * x)
        return c * u3 * u3 / (1 - u3 * u3)

    return 2 * integrate.quad(f, 0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


def circle_mean(fn, n: int = 20000) -> float:
    t = 2 * np.pi * (np.arange(n) + 0.5) / n
    return float(np.mean([fn((math.cos(a), math.sin(a))) for a in t]))


def i1_closed(c: float) -> float:
    """``c^2 int u3^2 / (1 - u3^2)`` for the 1D profile, by quadrature."""
    k = math.sqrt(1 - c * c)

    def f(x):
        if k * x > 700:
            return 0.0
        u3 = k / math.cosh(k * x)
        return u3 * u3 / (1 - u3 * u3)

    return c * c * 2 * integrate.quad(f, 0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


def i3_closed(c: float) -> float:
    """Both sides of the u3 identity on the 1D profile, from the closed-form integrals."""
    k2 = 1 - c * c
    return (2 - c * c) * 2 * math.sqrt(k2) - 4 / 3 * k2**1.5
