"""Special Green formula and adjoint system for Laplace(u) = f, d^2u/dnu^2 = g.

For u, v smooth on the closed disk and w, h smooth on the circle,

    (Lu, v) + (Lu, w)_c + (d2u, h)_c
        = (u, Lv) + (u, dv + w'')_c + (Du, -iv - iw)_c + (D^2 u, -w - h)_c

with L the Laplacian, d = d/dnu = -d/drho, D = i d, ' = d/dphi and (.,.)_c the
L2 inner product on the circle.  ``green_residual`` evaluates both sides by
tensor Gauss-Legendre x trapezoid quadrature.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bvp import AccuracyWarning, AdjointTriple
from .disk import DiskField
from .spectra import CircleSpectrum

__all__ = [
    "GreenCheckInput",
    "green_sides",
    "green_residual",
    "adjoint_system_residual",
    "green_pairing_check",
]


@dataclass(frozen=True, eq=False)
class GreenCheckInput:
    u: DiskField
    v: DiskField
    w: CircleSpectrum
    h: CircleSpectrum
    radial_points: int = 128
    angular_points: int = 128

    @property
    def truncation(self) -> int:
        return max(self.u.K, self.v.K, self.w.K, self.h.K)


def _boundary_values(u: DiskField, phi: np.ndarray, order: int) -> np.ndarray:
    """d^j u/drho^j at rho = 1 on the angle grid, shape (order+1, len(phi))."""
    E = np.exp(1j * np.outer(u.modes, phi))
    return u.boundary_derivatives(order).T @ E


def green_sides(inp: GreenCheckInput) -> tuple:
    """(left side, right side) of the Green formula under the requested quadrature."""
    nr, nphi = inp.radial_points, inp.angular_points
    if min(nr, nphi) < 2 * inp.truncation:
        warnings.warn(
            f"quadrature {nr}x{nphi} is below twice the truncation {inp.truncation}",
            AccuracyWarning,
        )
    x, wx = leggauss(nr)
    rho = 0.5 * (1 + x)
    wr = 0.5 * wx * rho
    phi = 2 * np.pi * np.arange(nphi) / nphi
    wphi = 2 * np.pi / nphi

    def disk_ip(a, b):
        return complex(np.sum(wr[:, None] * a * np.conj(b)) * wphi)

    def circ_ip(a, b):
        return complex(np.sum(a * np.conj(b)) * wphi)

    u, v, w, h = inp.u, inp.v, inp.w, inp.h
    lu, lv = u.laplacian(), v.laplacian()
    U = u.evaluate(rho, phi)
    V = v.evaluate(rho, phi)
    LU = lu.evaluate(rho, phi)
    LV = lv.evaluate(rho, phi)

    ub = _boundary_values(u, phi, 2)
    vb = _boundary_values(v, phi, 1)
    lub = _boundary_values(lu, phi, 0)[0]
    u0, du, d2u = ub[0], -ub[1], ub[2]
    v0, dv = vb[0], -vb[1]
    W = w.evaluate(phi)
    Wpp = w.derivative(2).evaluate(phi)
    H = h.evaluate(phi)
    Du = 1j * du
    D2u = -d2u

    lhs = disk_ip(LU, V) + circ_ip(lub, W) + circ_ip(d2u, H)
    rhs = (
        disk_ip(U, LV)
        + circ_ip(u0, dv + Wpp)
        + circ_ip(Du, -1j * v0 - 1j * W)
        + circ_ip(D2u, -W - H)
    )
    return lhs, rhs


def green_residual(inp: GreenCheckInput) -> float:
    """|LHS - RHS| / (1 + |LHS|)."""
    lhs, rhs = green_sides(inp)
    return abs(lhs - rhs) / (1.0 + abs(lhs))


def _circle_norm(s: CircleSpectrum) -> float:
    return math.sqrt(max(s.inner(s).real, 0.0))


def adjoint_system_residual(triple: AdjointTriple) -> dict:
    """L2 norms of the four homogeneous adjoint equations, evaluated spectrally."""
    v, w, h = triple.v, triple.w, triple.h
    K = max(v.K, w.K, h.K)
    v0 = v.trace().resize(K)
    dv = v.normal_derivative_trace(1).resize(K)
    w, h = w.resize(K), h.resize(K)
    th1 = dv + w.derivative(2)
    th2 = (v0 + w).scale(-1j)
    th3 = (w + h).scale(-1.0)
    return {
        "interior": v.laplacian().l2_norm(),
        "boundary": [_circle_norm(th1), _circle_norm(th2), _circle_norm(th3)],
    }


def green_pairing_check(u: DiskField, triple: AdjointTriple) -> float:
    """|(Lu, v) + (Lu, w)_c + (d2u, h)_c|; vanishes when the triple solves the adjoint problem."""
    lu = u.laplacian()
    val = lu.inner(triple.v) + lu.trace().inner(triple.w) + u.normal_derivative_trace(2).inner(triple.h)
    return abs(val)
