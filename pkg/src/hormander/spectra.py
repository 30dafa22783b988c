"""Finite Fourier spectra on the circle and on small periodic lattices.

Convention: for h on the circle, h_k = (1/2pi) * int_0^{2pi} h(phi) exp(-i k phi) dphi,
so that ||h||^2_{L2} = 2pi * sum_k |h_k|^2.  On an n-dimensional lattice the
same convention gives the factor (2pi)**n.  Hormander norms weight each
coefficient by alpha(<xi>) with <xi> = (1 + |xi|^2)**(1/2).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import PreconditionError
from .weights import Power, RoWeight

__all__ = [
    "CircleSpectrum",
    "LatticeSpectrum",
    "smoothed_modulus",
    "hnorm",
    "weighted_norm",
    "analyze_circle",
    "synthesize_circle",
    "embedding_ratio",
    "EmbeddingRatio",
    "derivative_multiplier_bound",
]


@dataclass(frozen=True, eq=False)
class CircleSpectrum:
    """Coefficients h_k for k = -K..K, stored at index k + K."""

    K: int
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if self.K < 0 or c.shape != (2 * self.K + 1,):
            raise PreconditionError(f"expected {2 * self.K + 1} coefficients for K={self.K}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def zeros(cls, K: int) -> "CircleSpectrum":
        return cls(K, np.zeros(2 * K + 1, dtype=complex))

    @classmethod
    def from_modes(cls, K: int, modes: dict) -> "CircleSpectrum":
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, v in modes.items():
            if abs(k) > K:
                raise PreconditionError(f"mode {k} exceeds truncation K={K}")
            c[k + K] += v
        return cls(K, c)

    @property
    def n(self) -> int:
        return 1

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.K:
            return 0j
        return complex(self.coefficients[k + self.K])

    def frequencies(self) -> np.ndarray:
        return self.modes[:, None].astype(float)

    def flat(self) -> np.ndarray:
        return self.coefficients

    def resize(self, K: int) -> "CircleSpectrum":
        out = np.zeros(2 * K + 1, dtype=complex)
        m = min(K, self.K)
        out[K - m : K + m + 1] = self.coefficients[self.K - m : self.K + m + 1]
        return CircleSpectrum(K, out)

    def __add__(self, other: "CircleSpectrum") -> "CircleSpectrum":
        K = max(self.K, other.K)
        return CircleSpectrum(K, self.resize(K).coefficients + other.resize(K).coefficients)

    def __sub__(self, other: "CircleSpectrum") -> "CircleSpectrum":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "CircleSpectrum":
        return CircleSpectrum(self.K, c * self.coefficients)

    def derivative(self, order: int = 1) -> "CircleSpectrum":
        return CircleSpectrum(self.K, (1j * self.modes) ** order * self.coefficients)

    def inner(self, other: "CircleSpectrum") -> complex:
        """L2(circle) inner product, linear in the first argument."""
        K = max(self.K, other.K)
        a = self.resize(K).coefficients
        b = other.resize(K).coefficients
        return complex(2 * math.pi * np.sum(a * np.conj(b)))

    def is_real(self, tol: float = 1e-12) -> bool:
        c = self.coefficients
        return bool(np.allclose(c[::-1], np.conj(c), atol=tol * max(1.0, np.abs(c).max())))

    def evaluate(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        return np.exp(1j * np.multiply.outer(phi, self.modes)) @ self.coefficients

    def to_rows(self) -> list:
        return [[int(k), float(c.real), float(c.imag)] for k, c in zip(self.modes, self.coefficients)]

    def to_dict(self) -> dict:
        return {"K": self.K, "coeffs": self.to_rows()}

    @classmethod
    def from_rows(cls, rows, K: int = None) -> "CircleSpectrum":
        rows = [(int(k), float(re), float(im)) for k, re, im in rows]
        if K is None:
            K = max((abs(k) for k, _, _ in rows), default=0)
        modes = {}
        for k, re, im in rows:
            modes[k] = modes.get(k, 0j) + complex(re, im)
        return cls.from_modes(K, modes)

    @classmethod
    def from_dict(cls, data: dict) -> "CircleSpectrum":
        return cls.from_rows(data.get("coeffs", []), data.get("K"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "re", "im"])
        w.writerows(self.to_rows())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, K: int = None) -> "CircleSpectrum":
        reader = csv.reader(io.StringIO(text))
        rows = [r for r in reader if r]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        return cls.from_rows(rows, K)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


@dataclass(frozen=True, eq=False)
class LatticeSpectrum:
    """Coefficients on the integer lattice {|xi_i| <= K} in dimension n (1 or 2)."""

    n: int
    K: int
    coefficients: np.ndarray

    def __post_init__(self):
        if self.n not in (1, 2):
            raise PreconditionError("lattice dimension must be 1 or 2")
        c = np.asarray(self.coefficients, dtype=complex)
        if c.shape != (2 * self.K + 1,) * self.n:
            raise PreconditionError(f"expected shape {(2 * self.K + 1,) * self.n}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def frequencies(self) -> np.ndarray:
        axis = np.arange(-self.K, self.K + 1)
        grids = np.meshgrid(*([axis] * self.n), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(float)

    def flat(self) -> np.ndarray:
        return self.coefficients.ravel()

    def to_dict(self) -> dict:
        f = self.frequencies().astype(int)
        c = self.flat()
        return {
            "n": self.n,
            "K": self.K,
            "coeffs": [[*map(int, xi), float(v.real), float(v.imag)] for xi, v in zip(f, c)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeSpectrum":
        n, K = int(data["n"]), int(data["K"])
        c = np.zeros((2 * K + 1,) * n, dtype=complex)
        for row in data.get("coeffs", []):
            xi, re, im = row[:n], row[n], row[n + 1]
            c[tuple(int(x) + K for x in xi)] += complex(re, im)
        return cls(n, K, c)


Spectrum = Union[CircleSpectrum, LatticeSpectrum]


def smoothed_modulus(xi) -> float:
    """(1 + |xi|^2)**(1/2) for an integer (or real) frequency vector."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    return float(math.sqrt(1.0 + float(np.dot(xi, xi))))


def _brackets(w: Spectrum) -> np.ndarray:
    f = w.frequencies()
    return np.sqrt(1.0 + np.sum(f * f, axis=1))


def weighted_norm(w: Spectrum, weight) -> float:
    """(2pi)^(n/2) * ||weight(<xi>) * w_xi||_2 for a vectorized weight callable."""
    vals = np.asarray(weight(_brackets(w)), dtype=float) * np.abs(w.flat())
    return float((2 * math.pi) ** (w.n / 2) * np.linalg.norm(vals))


def hnorm(w: Spectrum, alpha: RoWeight) -> float:
    """Hormander norm of a finite spectrum; alpha = 1 gives the L2 norm."""
    return weighted_norm(w, alpha)


def analyze_circle(samples, K: int = None) -> CircleSpectrum:
    """Coefficients h_k, |k| <= K, from N >= 2K+1 equispaced samples h(2 pi j / N)."""
    samples = np.asarray(samples, dtype=complex)
    N = samples.shape[0]
    if K is None:
        K = (N - 1) // 2
    if N < 2 * K + 1:
        raise PreconditionError(f"{N} samples alias modes up to K={K}; need at least {2 * K + 1}")
    F = np.fft.fft(samples) / N
    k = np.arange(-K, K + 1)
    return CircleSpectrum(K, F[k % N])


def synthesize_circle(h: CircleSpectrum, N: int = None) -> np.ndarray:
    """Samples at phi_j = 2 pi j / N; inverse of ``analyze_circle``."""
    if N is None:
        N = 2 * h.K + 1
    if N < 2 * h.K + 1:
        raise PreconditionError("too few samples for the spectrum")
    F = np.zeros(N, dtype=complex)
    F[h.modes % N] = h.coefficients
    return np.fft.ifft(F) * N


@dataclass(frozen=True)
class EmbeddingRatio:
    sup_ratio: float
    argsup: float
    vanishing_trend: bool

    def to_dict(self):
        return {"sup_ratio": self.sup_ratio, "argsup": self.argsup, "vanishing_trend": self.vanishing_trend}


def embedding_ratio(alpha: RoWeight, eta: RoWeight, K: int, n: int = 1, samples: int = 2000) -> EmbeddingRatio:
    """Sup of alpha/eta over the frequency range of a K-truncation.

    The ratio is bounded near infinity iff H^eta embeds into H^alpha, and
    tends to zero iff the embedding is compact; the trend flag compares the
    ratio at the top of the range with its value one decade lower.
    """
    top = smoothed_modulus([K] * n)
    t = np.unique(np.concatenate([np.geomspace(1.0, top, samples), [top / 10.0] if top >= 10 else []]))
    ratio = np.exp(alpha.log_value(t) - eta.log_value(t))
    i = int(np.argmax(ratio))
    trend = False
    if top >= 10:
        r_top = float(ratio[-1])
        r_prev = float(np.exp(alpha.log_value(np.array(top / 10.0)) - eta.log_value(np.array(top / 10.0))))
        trend = r_top < 0.5 * r_prev
    return EmbeddingRatio(float(ratio[i]), float(t[i]), bool(trend))


def derivative_multiplier_bound(l: int, alpha: RoWeight, K: int) -> float:
    """Operator norm of d^l/dphi^l from H^alpha to H^(alpha * t^-l) on |k| <= K."""
    if l < 0:
        raise PreconditionError("derivative order must be nonnegative")
    k = np.arange(-K, K + 1, dtype=float)
    br = np.sqrt(1.0 + k * k)
    source = alpha(br)
    target = (alpha * Power(-l))(br) * np.abs(k) ** l
    return float(np.max(target / source))
