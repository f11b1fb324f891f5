"""Traveling waves of the easy-plane Landau-Lifshitz equation.

Closed-form one-dimensional solitons, the Fourier multipliers of the
convolution form of the traveling-wave system, a damped fixed-point solver
for two-dimensional waves, and the diagnostics used to validate them.
"""

__version__ = "0.1.0"
