"""Interpolation with a function parameter between Sobolev endpoints.

For the pair [H^(s0), H^(s1)] in the Fourier realization the generating
operator is the multiplier <xi>^(s1 - s0), so the interpolation space with
parameter psi carries the weight <xi>^s0 * psi(<xi>^(s1 - s0)).  With

    psi(t) = t^(-s0/(s1-s0)) * alpha(t^(1/(s1-s0)))   for t >= 1,
    psi(t) = alpha(1)                                 for 0 < t < 1,

that weight is alpha itself, which is what ``interp_norm`` evaluates and the
checks below compare against ``hnorm``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError, UnsupportedError
from .spectra import Spectrum, _brackets, hnorm, weighted_norm
from .weights import IndexPair, RoWeight, estimate_indices, weight_from_dict

__all__ = [
    "InterpolationSetup",
    "build_psi",
    "interp_norm",
    "check_direct_sum",
    "check_pseudoconcavity",
    "PseudoconcavityCheck",
]


@dataclass(frozen=True)
class InterpolationSetup:
    s0: float
    s1: float
    alpha: RoWeight
    indices: IndexPair

    def psi(self, t):
        """Interpolation parameter on (0, inf)."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise PreconditionError("psi is defined on (0, inf)")
        return np.exp(self.log_psi(t))

    def log_psi(self, t):
        t = np.asarray(t, dtype=float)
        gap = self.s1 - self.s0
        big = np.maximum(t, 1.0)
        val = -self.s0 / gap * np.log(big) + self.alpha.log_value(big ** (1.0 / gap))
        return np.where(t >= 1.0, val, float(self.alpha.log_value(np.asarray(1.0))))

    def composite_weight(self, t):
        """<xi>^s0 * psi(<xi>^(s1-s0)), evaluated at t = <xi> >= 1."""
        t = np.asarray(t, dtype=float)
        return np.exp(self.s0 * np.log(t) + self.log_psi(t ** (self.s1 - self.s0)))

    def same_parameter(self, other: "InterpolationSetup") -> bool:
        return (self.s0, self.s1, self.alpha) == (other.s0, other.s1, other.alpha)

    def to_dict(self) -> dict:
        return {"s0": self.s0, "s1": self.s1, "alpha": self.alpha.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "InterpolationSetup":
        return build_psi(weight_from_dict(data["alpha"]), float(data["s0"]), float(data["s1"]))


def build_psi(alpha: RoWeight, s0: float, s1: float) -> InterpolationSetup:
    if not s0 < s1:
        raise PreconditionError("need s0 < s1")
    try:
        idx = alpha.analytic_indices()
    except UnsupportedError:
        idx = estimate_indices(alpha, 1e8)
    if not s0 < idx.sigma0:
        raise PreconditionError(f"lower index sigma0={idx.sigma0:g} must exceed s0={s0:g}")
    if not idx.sigma1 < s1:
        raise PreconditionError(f"upper index sigma1={idx.sigma1:g} must be below s1={s1:g}")
    return InterpolationSetup(float(s0), float(s1), alpha, idx)


def interp_norm(w: Spectrum, setup: InterpolationSetup) -> float:
    return weighted_norm(w, setup.composite_weight)


def _weighted_coefficients(w: Spectrum, setup: InterpolationSetup) -> np.ndarray:
    scale = (2 * math.pi) ** (w.n / 2)
    return scale * setup.composite_weight(_brackets(w)) * w.flat()


def check_direct_sum(setups: Sequence[InterpolationSetup], spectra: Sequence[Spectrum]) -> float:
    """Absolute gap between the component-wise and the concatenated direct-sum norm."""
    if len(setups) != len(spectra) or not setups:
        raise PreconditionError("need one setup per spectrum")
    first = setups[0]
    if not all(first.same_parameter(s) for s in setups[1:]):
        raise PreconditionError("all components must share the same interpolation parameter")
    componentwise = math.sqrt(sum(interp_norm(w, s) ** 2 for w, s in zip(spectra, setups)))
    stacked = np.concatenate([_weighted_coefficients(w, s) for w, s in zip(spectra, setups)])
    return abs(componentwise - float(np.linalg.norm(stacked)))


@dataclass(frozen=True)
class PseudoconcavityCheck:
    ok_on_sample: bool
    worst_violation: float
    slack: float

    def to_dict(self):
        return {"ok_on_sample": self.ok_on_sample, "worst_violation": self.worst_violation, "slack": self.slack}


def check_pseudoconcavity(
    setup: InterpolationSetup, t_max: float = 1e8, grid: int = 2000, slack: float = 1.0
) -> PseudoconcavityCheck:
    """Sampled quasi-concavity of psi on [1, t_max].

    psi is equivalent to a positive concave function near infinity iff, up to
    a constant factor, psi is nondecreasing and psi(t)/t is nonincreasing.  In
    the variable u = ln t these become lower bounds on increments of
    g(u) = ln psi(e^u) and of u - g(u); the reported violation is the largest
    sampled drop of either, compared with ``slack`` (the log of the allowed
    constant).  Evidence only, never a proof.
    """
    u = np.linspace(0.0, math.log(t_max), grid)
    g = setup.log_psi(np.exp(u))
    h = u - g
    drop_g = float(np.max(np.maximum.accumulate(g) - g))
    drop_h = float(np.max(np.maximum.accumulate(h) - h))
    worst = max(drop_g, drop_h, 0.0)
    return PseudoconcavityCheck(worst <= slack, worst, slack)
