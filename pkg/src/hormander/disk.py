"""Fields on the closed unit disk, stored mode by mode.

A field is u(rho, phi) = sum_k u_k(rho) exp(i k phi).  Every angular mode of a
smooth field has the form u_k(rho) = rho^|k| * v_k(rho^2) with v_k smooth on
[0, 1]; ``DiskField`` keeps v_k as a Chebyshev series of degree R-1 in
x = rho^2 (mapped to y = 2x - 1).  The radial profile values on the nodes
rho_j = sqrt(x_j), with x_j the Chebyshev-Gauss-Radau points that include
x = 1 and exclude x = 0, are the interchange format.

In this representation the Laplacian, the Wirtinger derivatives and the
boundary derivatives act exactly on polynomials:

    Laplacian:  v -> 4 (x v'' + (|k|+1) v')
    d/dzbar:    mode k >= 0: v -> v'          mode k < 0: v -> |k| v + x v'
    d/dz:       mode k <= 0: v -> v'          mode k > 0: v -> k v + x v'
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iproduct

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial.legendre import leggauss

from .errors import PreconditionError
from .spectra import CircleSpectrum

__all__ = [
    "DiskField",
    "radial_nodes",
    "falling_factorial",
    "random_field",
]


@lru_cache(maxsize=None)
def _nodes(R: int):
    if R < 2:
        raise PreconditionError("radial grid needs at least 2 nodes")
    j = np.arange(R)[::-1]
    y = np.cos(2 * np.pi * j / (2 * R - 1))
    x = 0.5 * (1 + y)
    V = C.chebvander(y, R - 1)
    Vinv = np.linalg.inv(V)
    for a in (y, x, V, Vinv):
        a.setflags(write=False)
    return y, x, V, Vinv


def radial_nodes(R: int) -> np.ndarray:
    """Radial grid rho_j in (0, 1], ascending, last node rho = 1."""
    return np.sqrt(_nodes(R)[1])


def falling_factorial(n: int, m: int) -> int:
    out = 1
    for i in range(m):
        out *= n - i
    return out


def _cheb_dx(c: np.ndarray) -> np.ndarray:
    """d/dx of Chebyshev series in y = 2x-1, along the last axis, same length."""
    R = c.shape[-1]
    if R == 1:
        return np.zeros_like(c)
    d = 2.0 * C.chebder(c, axis=-1)
    return np.concatenate([d, np.zeros(c.shape[:-1] + (1,), dtype=d.dtype)], axis=-1)


def _cheb_mulx(c: np.ndarray) -> np.ndarray:
    """Multiply by x = (1+y)/2; the top coefficient must be zero to stay exact."""
    out = 0.5 * c.astype(complex if np.iscomplexobj(c) else float, copy=True)
    R = c.shape[-1]
    # y*T_0 = T_1 ; y*T_j = (T_{j+1} + T_{j-1})/2
    yc = np.zeros(c.shape[:-1] + (R + 1,), dtype=out.dtype)
    yc[..., 1] += c[..., 0]
    if R > 1:
        yc[..., 2:] += 0.5 * c[..., 1:]
        yc[..., : R - 1] += 0.5 * c[..., 1:]
    return out + 0.5 * yc[..., :R]


def _cheb_T(c: np.ndarray, n) -> np.ndarray:
    """x v'' + (n+1) v' for each row; ``n`` broadcasts over leading axes."""
    d1 = _cheb_dx(c)
    d2 = _cheb_dx(d1)
    n = np.asarray(n, dtype=float)[..., None]
    return _cheb_mulx(d2) + (n + 1.0) * d1


@lru_cache(maxsize=None)
def _gram(n: int, R: int) -> np.ndarray:
    """G[i, j] = pi * int_0^1 x^n T_i T_j dx, so (u, w)_disk = sum c_u G conj(c_w)."""
    q = (n + 2 * R) // 2 + 2
    yq, wq = leggauss(q)
    xq = 0.5 * (1 + yq)
    B = C.chebvander(yq, R - 1)
    G = np.pi * (B.T * (0.5 * wq * xq**n)) @ B
    G.setflags(write=False)
    return G


@lru_cache(maxsize=None)
def _moment(n: int, R: int) -> np.ndarray:
    """row r with r @ c = int_0^1 x^n v(x) dx."""
    q = (n + R) // 2 + 2
    yq, wq = leggauss(q)
    xq = 0.5 * (1 + yq)
    row = (0.5 * wq * xq**n) @ C.chebvander(yq, R - 1)
    row.setflags(write=False)
    return row


@lru_cache(maxsize=None)
def _boundary_rows(n: int, R: int, order: int) -> np.ndarray:
    """Rows B[j] with B[j] @ c = d^j/drho^j [rho^n v(rho^2)] at rho = 1, j <= order."""
    # x-derivatives of each basis polynomial at x = 1
    dv = np.zeros((order + 1, R))
    cur = np.eye(R)
    for l in range(order + 1):
        dv[l] = C.chebval(1.0, cur)
        cur = 2.0 * C.chebder(cur, axis=0) if cur.shape[0] > 1 else np.zeros((1, R))
    # h(rho) = v(rho^2): h^(i)(1) = sum_p i!/(p!(i-2p)!) 2^(i-2p) v^(i-p)(1)
    dh = np.zeros((order + 1, R))
    for i in range(order + 1):
        for p in range(i // 2 + 1):
            coef = math.factorial(i) / (math.factorial(p) * math.factorial(i - 2 * p)) * 2.0 ** (i - 2 * p)
            dh[i] += coef * dv[i - p]
    out = np.zeros((order + 1, R))
    for j in range(order + 1):
        for i in range(j + 1):
            out[j] += math.comb(j, i) * falling_factorial(n, j - i) * dh[i]
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DiskField:
    """Band-limited field on the disk; ``coeffs[k + K]`` is the series of v_k."""

    K: int
    R: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (2 * self.K + 1, self.R):
            raise PreconditionError(f"coefficient array must have shape {(2 * self.K + 1, self.R)}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, K: int, R: int) -> "DiskField":
        return cls(K, R, np.zeros((2 * K + 1, R), dtype=complex))

    @classmethod
    def from_profiles(cls, K: int, R: int, profiles) -> "DiskField":
        """From radial values u_k(rho_j) on ``radial_nodes(R)``; row k + K per mode."""
        P = np.asarray(profiles, dtype=complex)
        if P.shape != (2 * K + 1, R):
            raise PreconditionError(f"profiles must have shape {(2 * K + 1, R)}")
        rho = radial_nodes(R)
        n = np.abs(np.arange(-K, K + 1))[:, None]
        v = P / rho[None, :] ** n
        return cls(K, R, v @ _nodes(R)[3].T)

    @classmethod
    def from_mode(cls, K: int, R: int, k: int, reduced) -> "DiskField":
        """Single mode rho^|k| v(rho^2) e^{ik phi}, v given by Chebyshev coefficients."""
        c = np.zeros((2 * K + 1, R), dtype=complex)
        r = np.asarray(reduced, dtype=complex)
        c[k + K, : len(r)] = r
        return cls(K, R, c)

    @classmethod
    def monomial(cls, K: int, R: int, k: int, power: int, scale: complex = 1.0) -> "DiskField":
        """scale * rho^power * e^{ik phi}; power - |k| must be even and >= 0."""
        n = abs(k)
        d = power - n
        if d < 0 or d % 2:
            raise PreconditionError("rho^power e^{ik phi} is not a smooth mode")
        # x^(d/2) with x = (1 + y)/2
        x_pow = C.chebpow(np.array([0.5, 0.5]), d // 2) if d else np.array([1.0])
        return cls.from_mode(K, R, k, scale * x_pow)

    # access -------------------------------------------------------------
    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def mode(self, k: int) -> np.ndarray:
        return self.coeffs[k + self.K]

    @property
    def profiles(self) -> np.ndarray:
        rho = radial_nodes(self.R)
        n = np.abs(self.modes)[:, None]
        return (self.coeffs @ _nodes(self.R)[2].T) * rho[None, :] ** n

    def radial_values(self, rho) -> np.ndarray:
        """u_k(rho) for all modes at the given radii, shape (2K+1, len(rho))."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        vals = C.chebval(2 * rho**2 - 1, self.coeffs.T)
        vals = np.atleast_2d(vals)
        n = np.abs(self.modes)[:, None]
        return vals * rho[None, :] ** n

    def evaluate(self, rho, phi) -> np.ndarray:
        """Values on the tensor grid rho x phi, shape (len(rho), len(phi))."""
        phi = np.atleast_1d(np.asarray(phi, dtype=float))
        E = np.exp(1j * np.outer(self.modes, phi))
        return self.radial_values(rho).T @ E

    def resize(self, K: int = None, R: int = None) -> "DiskField":
        K = self.K if K is None else K
        R = self.R if R is None else R
        out = np.zeros((2 * K + 1, R), dtype=complex)
        m = min(K, self.K)
        r = min(R, self.R)
        out[K - m : K + m + 1, :r] = self.coeffs[self.K - m : self.K + m + 1, :r]
        return DiskField(K, R, out)

    # algebra ------------------------------------------------------------
    def _aligned(self, other: "DiskField"):
        K = max(self.K, other.K)
        R = max(self.R, other.R)
        return self.resize(K, R), other.resize(K, R)

    def __add__(self, other: "DiskField") -> "DiskField":
        a, b = self._aligned(other)
        return DiskField(a.K, a.R, a.coeffs + b.coeffs)

    def __sub__(self, other: "DiskField") -> "DiskField":
        a, b = self._aligned(other)
        return DiskField(a.K, a.R, a.coeffs - b.coeffs)

    def scale(self, c: complex) -> "DiskField":
        return DiskField(self.K, self.R, c * self.coeffs)

    def __neg__(self):
        return self.scale(-1.0)

    # differential operators --------------------------------------------
    def laplacian(self) -> "DiskField":
        n = np.abs(self.modes)
        return DiskField(self.K, self.R, 4.0 * _cheb_T(self.coeffs, n))

    def _shifted(self, values: np.ndarray, shift: int) -> "DiskField":
        # output grows by one mode on each side so nothing is truncated
        K = self.K + 1
        out = np.zeros((2 * K + 1, self.R), dtype=complex)
        out[1 + shift : 1 + shift + 2 * self.K + 1] = values
        return DiskField(K, self.R, out)

    def dzbar(self) -> "DiskField":
        """d/dzbar = (d/dx + i d/dy)/2; shifts mode k to k+1."""
        k = self.modes[:, None]
        d1 = _cheb_dx(self.coeffs)
        other = np.abs(k) * self.coeffs + _cheb_mulx(d1)
        return self._shifted(np.where(k >= 0, d1, other), +1)

    def dz(self) -> "DiskField":
        """d/dz = (d/dx - i d/dy)/2; shifts mode k to k-1."""
        k = self.modes[:, None]
        d1 = _cheb_dx(self.coeffs)
        other = np.abs(k) * self.coeffs + _cheb_mulx(d1)
        return self._shifted(np.where(k <= 0, d1, other), -1)

    def dx(self) -> "DiskField":
        return self.dz() + self.dzbar()

    def dy(self) -> "DiskField":
        return (self.dz() - self.dzbar()).scale(1j)

    def boundary_derivatives(self, order: int) -> np.ndarray:
        """d^j u_k / drho^j at rho = 1 for j = 0..order, shape (2K+1, order+1)."""
        out = np.empty((2 * self.K + 1, order + 1), dtype=complex)
        for i, k in enumerate(self.modes):
            out[i] = _boundary_rows(abs(int(k)), self.R, order) @ self.coeffs[i]
        return out

    def normal_derivative_trace(self, order: int) -> CircleSpectrum:
        """(d/dnu)^order u on the circle with the inner normal, d/dnu = -d/drho."""
        vals = self.boundary_derivatives(order)[:, order]
        return CircleSpectrum(self.K, (-1) ** order * vals)

    def trace(self) -> CircleSpectrum:
        return self.normal_derivative_trace(0)

    # inner products and norms -----------------------------------------
    def inner(self, other: "DiskField") -> complex:
        """L2(disk) inner product, linear in the first argument."""
        a, b = self._aligned(other)
        total = 0j
        for i, k in enumerate(a.modes):
            ca, cb = a.coeffs[i], b.coeffs[i]
            if not (ca.any() and cb.any()):
                continue
            total += ca @ _gram(abs(int(k)), a.R) @ np.conj(cb)
        return complex(total)

    def l2_norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))

    def sobolev_norm(self, s: int) -> float:
        """(sum over |mu| <= s of ||D^mu u||^2_{L2(disk)})^(1/2) for integer s >= 0."""
        if int(s) != s or s < 0:
            raise PreconditionError("interior Sobolev norms are implemented for integer orders only")
        return math.sqrt(sum(_derivative_energy(self, r) for r in range(int(s) + 1)))

    def kernel_projection(self, m: int) -> "DiskField":
        """L2-orthogonal projection onto span{rho^|k| e^{ik phi} : |k| <= m-1}."""
        c = np.zeros_like(self.coeffs)
        for k in range(-(m - 1), m):
            if abs(k) > self.K:
                continue
            G = _gram(abs(k), self.R)
            row = self.coeffs[k + self.K]
            c[k + self.K, 0] = (row @ G[:, 0]) / G[0, 0]
        return DiskField(self.K, self.R, c)

    def orthogonalize(self, m: int) -> "DiskField":
        """Component orthogonal to the kernel (the projector onto the complement)."""
        return self - self.kernel_projection(m)

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        P = self.profiles
        modes = []
        for i, k in enumerate(self.modes):
            if not self.coeffs[i].any():
                continue
            modes.append({"k": int(k), "radial": [[float(z.real), float(z.imag)] for z in P[i]]})
        return {"K": self.K, "R": self.R, "rho": radial_nodes(self.R).tolist(), "modes": modes}

    @classmethod
    def from_dict(cls, data: dict, K: int = None, R: int = None) -> "DiskField":
        K = int(data.get("K", K) if K is None else K)
        entries = data.get("modes", [])
        if R is None:
            R = int(data.get("R") or (len(entries[0]["radial"]) if entries else 2))
        P = np.zeros((2 * K + 1, R), dtype=complex)
        for e in entries:
            k = int(e["k"])
            if abs(k) > K:
                raise PreconditionError(f"mode {k} exceeds truncation K={K}")
            vals = [complex(*z) if isinstance(z, (list, tuple)) else complex(z) for z in e["radial"]]
            if len(vals) != R:
                raise PreconditionError(f"mode {k} has {len(vals)} radial values, expected {R}")
            P[k + K] += vals
        return cls.from_profiles(K, R, P)


def _derivative_energy(u: DiskField, order: int) -> float:
    """sum over multi-indices (a, b), a + b = order, of ||dx^a dy^b u||^2."""
    if order == 0:
        return u.inner(u).real
    # W[p, q] = dz^p dzbar^q u, all padded to a common truncation
    Kmax = u.K + order
    W = {}
    base = u.resize(Kmax)
    for p in range(order + 1):
        cur = base
        for _ in range(p):
            cur = cur.dz().resize(Kmax)
        for q in range(order - p + 1):
            if p + q == order:
                W[(p, q)] = cur
            if q < order - p:
                cur = cur.dzbar().resize(Kmax)
    total = 0.0
    for a in range(order + 1):
        b = order - a
        # dx^a dy^b = (dz + dzbar)^a (i dz - i dzbar)^b
        coef: dict = {}
        for sel in iproduct((0, 1), repeat=order):
            p = sum(1 for j, s in enumerate(sel) if s == 0)
            c = 1.0 + 0j
            for j, s in enumerate(sel):
                if j >= a:
                    c *= 1j if s == 0 else -1j
            coef[p] = coef.get(p, 0) + c
        acc = np.zeros((2 * Kmax + 1, u.R), dtype=complex)
        for p, c in coef.items():
            if c != 0:
                acc = acc + c * W[(p, order - p)].coeffs
        f = DiskField(Kmax, u.R, acc)
        total += f.inner(f).real
    return total


def random_field(
    K: int,
    R: int,
    seed: int,
    trial: int = 0,
    degree: int = 6,
    decay: float = 3.0,
    real: bool = False,
) -> DiskField:
    """Seeded band-limited field with coefficients ~ N_C(0, 1) * <k>^-decay.

    Each mode draws from its own stream keyed by (seed, trial, k), so the
    low modes of a field do not change when K grows.
    """
    if degree >= R:
        raise PreconditionError("radial degree must be below R")
    c = np.zeros((2 * K + 1, R), dtype=complex)
    for k in range(-K, K + 1):
        key = 2 * abs(k) + (1 if k < 0 else 0)
        rng = np.random.default_rng([seed, trial, key])
        z = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        c[k + K, : degree + 1] = z / math.sqrt(2) * (1 + k * k) ** (-decay / 2)
    if real:
        mirrored = np.conj(c[::-1])
        c = 0.5 * (c + mirrored)
    return DiskField(K, R, c)
