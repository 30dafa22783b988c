"""RO-varying weight functions on [1, inf) and their index calculus.

A weight alpha is RO-varying when alpha(lam*t)/alpha(t) stays between two
positive constants for lam in a compact subset of [1, inf).  Every such weight
admits power-law bounds

    c0 * lam**s0 <= alpha(lam*t) / alpha(t) <= c1 * lam**s1,   t, lam >= 1,

and the best exponents are the lower and upper Matuszewska indices.  This
module evaluates the implemented kinds of weights, returns closed-form indices
where they are known, estimates indices from samples, and decides the
integral criteria that govern continuity of derivatives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericError, PreconditionError, UnsupportedError

__all__ = [
    "RoWeight",
    "Power",
    "PowerLog",
    "Oscillating",
    "PiecewiseTable",
    "Product",
    "IndexPair",
    "RoCheck",
    "ConvergenceVerdict",
    "ClassicalVerdict",
    "eval_weight",
    "analytic_indices",
    "estimate_indices",
    "check_ro_membership",
    "embed_criterion",
    "classical_solution_criterion",
    "weight_from_dict",
    "default_switch_point",
]

DEFAULT_LAMBDA_GRID = (2.0, 4.0, 8.0, 16.0)


@dataclass(frozen=True)
class IndexPair:
    sigma0: float
    sigma1: float
    certified: bool = True
    uncertainty: float = 0.0

    def __post_init__(self):
        if not self.sigma0 <= self.sigma1 + 1e-12:
            raise NumericError(f"lower index {self.sigma0} exceeds upper index {self.sigma1}")
        if self.uncertainty < 0:
            raise PreconditionError("uncertainty must be nonnegative")

    def contains(self, sigma0: float, sigma1: float, tol: float = 0.0) -> bool:
        slack = tol + self.uncertainty
        return abs(self.sigma0 - sigma0) <= slack and abs(self.sigma1 - sigma1) <= slack

    def to_dict(self) -> dict:
        return {
            "sigma0": self.sigma0,
            "sigma1": self.sigma1,
            "certified": self.certified,
            "uncertainty": self.uncertainty,
        }


def default_switch_point(depth: int) -> float:
    """Smallest t at which every iterated logarithm up to ``depth`` is >= 1.

    The values are e, e**e and e**(e**e); deeper nests do not fit in a double.
    """
    if depth < 0:
        raise PreconditionError("depth must be nonnegative")
    t = math.e
    for _ in range(depth - 1):
        t = math.exp(t)
        if math.isinf(t):
            raise UnsupportedError(
                f"no representable default switch point for {depth} iterated logs; pass t_switch"
            )
    return t


def _as_array(t):
    arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 1.0):
        raise DomainError("weights are defined for t >= 1 only")
    return arr


class RoWeight:
    """Base class.  Subclasses implement ``log_value`` on arrays with t >= 1."""

    kind: str = ""

    def log_value(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        arr = _as_array(t)
        out = np.exp(self.log_value(arr))
        return float(out) if out.ndim == 0 else out

    def log(self, t):
        arr = _as_array(t)
        out = self.log_value(arr)
        return float(out) if out.ndim == 0 else out

    def analytic_indices(self) -> IndexPair:
        raise UnsupportedError(f"no closed-form indices for kind {self.kind!r}")

    def reciprocal(self) -> "RoWeight":
        raise UnsupportedError(f"reciprocal not available for kind {self.kind!r}")

    def special_points(self) -> np.ndarray:
        """Points where the weight switches branch; samplers add them to grids."""
        return np.empty(0)

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __mul__(self, other: "RoWeight") -> "Product":
        if not isinstance(other, RoWeight):
            return NotImplemented
        return Product(self, other)

    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class Power(RoWeight):
    s: float
    kind = "power"

    def log_value(self, t):
        return self.s * np.log(t)

    def __call__(self, t):
        arr = _as_array(t)
        out = arr ** self.s
        return float(out) if out.ndim == 0 else out

    def analytic_indices(self):
        return IndexPair(self.s, self.s)

    def reciprocal(self):
        return Power(-self.s)

    def to_dict(self):
        return {"kind": self.kind, "s": self.s}

    def label(self):
        return f"power(s={self.s:g})"


@dataclass(frozen=True)
class PowerLog(RoWeight):
    """t**s * (ln t)**r1 * (ln ln t)**r2 * ..., constant below ``t_switch``."""

    s: float
    r: tuple = ()
    t_switch: Optional[float] = None
    kind = "powerlog"

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(float(x) for x in self.r))
        if self.t_switch is None:
            object.__setattr__(self, "t_switch", default_switch_point(max(len(self.r), 1)))
        logs = _iterated_logs(np.asarray(float(self.t_switch)), len(self.r))
        if self.t_switch < 1 or any(float(v) <= 0 for v in logs):
            raise PreconditionError(
                f"t_switch={self.t_switch} leaves an iterated logarithm nonpositive"
            )

    def log_value(self, t):
        tt = np.maximum(t, self.t_switch)
        out = self.s * np.log(tt)
        for rk, lk in zip(self.r, _iterated_logs(tt, len(self.r))):
            out = out + rk * np.log(lk)
        return out

    def analytic_indices(self):
        return IndexPair(self.s, self.s)

    def reciprocal(self):
        return PowerLog(-self.s, tuple(-x for x in self.r), self.t_switch)

    def special_points(self):
        return np.array([self.t_switch])

    def to_dict(self):
        return {"kind": self.kind, "s": self.s, "r": list(self.r), "t_switch": self.t_switch}

    def label(self):
        rs = ",".join(f"{x:g}" for x in self.r)
        return f"powerlog(s={self.s:g},r=[{rs}])"


def _iterated_logs(t: np.ndarray, depth: int) -> list:
    out = []
    cur = np.asarray(t, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        for _ in range(depth):
            cur = np.log(cur)
            out.append(cur)
    return out


@dataclass(frozen=True)
class Oscillating(RoWeight):
    """t**(theta + delta*sin((ln ln t)**r)) for t > e and t**theta on [1, e]."""

    theta: float
    delta: float
    r: float = 1.0
    kind = "oscillating"

    def __post_init__(self):
        if not self.delta > 0:
            raise PreconditionError("delta must be positive")
        if not 0 < self.r <= 1:
            raise PreconditionError("r must lie in (0, 1]")

    def log_value(self, t):
        L = np.log(t)
        with np.errstate(invalid="ignore", divide="ignore"):
            phase = np.where(L > 1.0, np.log(np.maximum(L, 1.0)) ** self.r, 0.0)
        expo = np.where(L > 1.0, self.theta + self.delta * np.sin(phase), self.theta)
        return expo * L

    def analytic_indices(self):
        # log alpha = L*(theta + delta*sin((ln L)**r)); its slope in L is
        # theta + delta*(sin(x) + r*x**(r-1)*cos(x)) with x = (ln L)**r.  For
        # r < 1 the cosine term dies out; for r = 1 the slope sweeps
        # theta +- sqrt(2)*delta on ever longer L-intervals.
        amp = math.sqrt(2.0) * self.delta if self.r == 1 else self.delta
        return IndexPair(self.theta - amp, self.theta + amp)

    def special_points(self):
        return np.array([math.e])

    def to_dict(self):
        return {"kind": self.kind, "theta": self.theta, "delta": self.delta, "r": self.r}

    def label(self):
        return f"oscillating(theta={self.theta:g},delta={self.delta:g},r={self.r:g})"


@dataclass(frozen=True)
class PiecewiseTable(RoWeight):
    """Log-log linear interpolation of samples (t_i, alpha_i).

    Repeated abscissae encode jumps; the table is right-continuous there.
    Below the first knot the first value is held; beyond the last knot the
    table continues as a power with ``tail_exponent`` (0 when undeclared, in
    which case no index is certified).
    """

    t: tuple
    alpha: tuple
    tail_exponent: Optional[float] = None
    kind = "table"

    def __post_init__(self):
        t = tuple(float(x) for x in self.t)
        a = tuple(float(x) for x in self.alpha)
        if len(t) != len(a) or len(t) == 0:
            raise PreconditionError("table needs matching, nonempty t and alpha")
        if any(x < 1 for x in t) or any(np.diff(t) < 0):
            raise PreconditionError("table abscissae must be sorted and >= 1")
        if any(not v > 0 for v in a):
            raise PreconditionError("table values must be positive")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "alpha", a)

    def log_value(self, t):
        T = np.log(np.asarray(self.t))
        A = np.log(np.asarray(self.alpha))
        x = np.log(t)
        idx = np.searchsorted(T, x, side="right") - 1
        out = np.empty_like(x, dtype=float)
        below = idx < 0
        above = idx >= len(T) - 1
        mid = ~(below | above)
        out[below] = A[0]
        tail = 0.0 if self.tail_exponent is None else self.tail_exponent
        out[above] = A[-1] + tail * (x[above] - T[-1])
        i = idx[mid]
        w = (x[mid] - T[i]) / (T[i + 1] - T[i])
        out[mid] = A[i] + w * (A[i + 1] - A[i])
        return out

    def analytic_indices(self):
        if self.tail_exponent is None:
            raise UnsupportedError("table without a declared tail exponent has no certified indices")
        return IndexPair(self.tail_exponent, self.tail_exponent)

    def reciprocal(self):
        tail = None if self.tail_exponent is None else -self.tail_exponent
        return PiecewiseTable(self.t, tuple(1.0 / v for v in self.alpha), tail)

    def special_points(self):
        return np.unique(np.asarray(self.t))

    def to_dict(self):
        return {
            "kind": self.kind,
            "t": list(self.t),
            "alpha": list(self.alpha),
            "tail_exponent": self.tail_exponent,
        }


@dataclass(frozen=True)
class Product(RoWeight):
    left: RoWeight
    right: RoWeight
    kind = "product"

    def log_value(self, t):
        return self.left.log_value(t) + self.right.log_value(t)

    def analytic_indices(self):
        # Indices are only sub/superadditive; report the enclosing interval.
        a = self.left.analytic_indices()
        b = self.right.analytic_indices()
        return IndexPair(a.sigma0 + b.sigma0, a.sigma1 + b.sigma1, certified=False)

    def reciprocal(self):
        return Product(self.left.reciprocal(), self.right.reciprocal())

    def special_points(self):
        return np.union1d(self.left.special_points(), self.right.special_points())

    def to_dict(self):
        return {"kind": self.kind, "factors": [self.left.to_dict(), self.right.to_dict()]}

    def label(self):
        return f"{self.left.label()}*{self.right.label()}"


def weight_from_dict(data: dict) -> RoWeight:
    kind = str(data.get("kind", "")).lower()
    try:
        if kind == "power":
            return Power(float(data["s"]))
        if kind == "powerlog":
            return PowerLog(float(data["s"]), tuple(data.get("r", ())), data.get("t_switch"))
        if kind == "oscillating":
            return Oscillating(float(data["theta"]), float(data["delta"]), float(data.get("r", 1.0)))
        if kind in ("table", "piecewisetable"):
            return PiecewiseTable(tuple(data["t"]), tuple(data["alpha"]), data.get("tail_exponent"))
        if kind == "product":
            left, right = data["factors"]
            return Product(weight_from_dict(left), weight_from_dict(right))
    except KeyError as exc:
        raise PreconditionError(f"weight of kind {kind!r} is missing field {exc}") from None
    raise PreconditionError(f"unknown weight kind {kind!r}")


def eval_weight(alpha: RoWeight, t):
    """Return alpha(t); raises DomainError for t < 1."""
    return alpha(t)


def analytic_indices(alpha: RoWeight) -> IndexPair:
    return alpha.analytic_indices()


def _geometric_grid(lo: float, hi: float, size: int, extra=()) -> np.ndarray:
    grid = np.geomspace(lo, hi, max(size, 2))
    extra = np.asarray(extra, dtype=float)
    extra = extra[(extra >= lo) & (extra <= hi)]
    return np.unique(np.concatenate([grid, extra]))


def estimate_indices(
    alpha: RoWeight,
    t_max: float,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    t_grid_size: int = 4000,
    t_min: float = 1.0,
) -> IndexPair:
    """Sampled Matuszewska indices.

    For each lam the extreme values of log(alpha(lam t)/alpha(t))/log(lam)
    over a geometric t-grid on [t_min, t_max/lam] are taken; sigma1 is the largest
    per-lam upper value and sigma0 the smallest per-lam lower value.  The
    uncertainty is half the spread of the per-lam values.
    """
    lams = [float(x) for x in lambda_grid]
    if not lams:
        raise PreconditionError("lambda_grid must be nonempty")
    if any(lam <= 1 for lam in lams):
        raise PreconditionError("every lambda must exceed 1")
    if t_min < 1:
        raise DomainError("t_min must be >= 1")
    if t_max < 1e3:
        raise PreconditionError("t_max must be at least 1e3")
    if t_grid_size < 2:
        raise PreconditionError("t_grid_size must be at least 2")
    uppers, lowers = [], []
    for lam in lams:
        hi = t_max / lam
        if hi < t_min:
            raise PreconditionError(f"lambda={lam} exceeds t_max")
        sp = alpha.special_points()
        t = _geometric_grid(t_min, hi, t_grid_size, np.concatenate([sp, sp / lam]))
        with np.errstate(all="ignore"):
            lr = alpha.log_value(lam * t) - alpha.log_value(t)
        if not np.all(np.isfinite(lr)):
            raise NumericError("weight ratio evaluated to a non-finite value")
        uppers.append(float(lr.max()) / math.log(lam))
        lowers.append(float(lr.min()) / math.log(lam))
    spread = max(max(uppers) - min(uppers), max(lowers) - min(lowers))
    return IndexPair(min(lowers), max(uppers), certified=False, uncertainty=0.5 * spread)


@dataclass(frozen=True)
class RoCheck:
    ok: bool
    c_witness: float
    worst_point: tuple

    def to_dict(self):
        return {"ok": self.ok, "c_witness": self.c_witness, "worst_point": list(self.worst_point)}


def check_ro_membership(alpha: RoWeight, b: float, t_max: float = 1e6, grid: int = 400) -> RoCheck:
    """Sampled evidence for the two-sided RO bound on [1, t_max] x [1, b].

    ``c_witness`` is the smallest c with c**-1 <= ratio <= c on the samples.
    This never proves membership; large witnesses are reported, not rejected.
    """
    if not b > 1:
        raise PreconditionError("b must exceed 1")
    if grid < 2:
        raise PreconditionError("grid must be at least 2")
    sp = alpha.special_points()
    t = _geometric_grid(1.0, t_max, grid, np.concatenate([sp, sp / b]))
    lam = np.linspace(1.0, b, min(grid, 129))
    with np.errstate(all="ignore"):
        lr = alpha.log_value(np.outer(t, lam)) - alpha.log_value(t)[:, None]
    if not np.all(np.isfinite(lr)):
        raise NumericError("weight ratio evaluated to a non-finite value")
    i, j = np.unravel_index(np.argmax(np.abs(lr)), lr.shape)
    c = float(math.exp(abs(lr[i, j])))
    return RoCheck(ok=math.isfinite(c), c_witness=c, worst_point=(float(t[i]), float(lam[j])))


@dataclass(frozen=True)
class ConvergenceVerdict:
    status: str
    partial_integral: float
    tail_bound_used: str

    def to_dict(self):
        return {
            "status": self.status,
            "partial_integral": self.partial_integral,
            "tail_bound_used": self.tail_bound_used,
        }


def _power_log_form(phi: RoWeight):
    """(s, [r1, r2, ...]) when the tail of phi is exactly t**s * prod(log_k t)**r_k."""
    if isinstance(phi, Power):
        return phi.s, []
    if isinstance(phi, PowerLog):
        return phi.s, list(phi.r)
    if isinstance(phi, PiecewiseTable) and phi.tail_exponent is not None:
        return phi.tail_exponent, []
    if isinstance(phi, Product):
        a = _power_log_form(phi.left)
        b = _power_log_form(phi.right)
        if a is None or b is None:
            return None
        n = max(len(a[1]), len(b[1]))
        ra = a[1] + [0.0] * (n - len(a[1]))
        rb = b[1] + [0.0] * (n - len(b[1]))
        return a[0] + b[0], [x + y for x, y in zip(ra, rb)]
    return None


def _tail_integral(phi: RoWeight, power: float, t_cut: float, limit: int) -> float:
    # integral of t**power / phi(t)**2 over [1, t_cut], in the variable u = ln t
    def integrand(u):
        return math.exp((power + 1.0) * u - 2.0 * float(phi.log_value(np.asarray(math.exp(u)))))

    pts = [math.log(p) for p in phi.special_points() if 1 < p < t_cut]
    val, _ = integrate.quad(integrand, 0.0, math.log(t_cut), limit=limit, points=pts or None)
    return float(val)


def _integral_verdict(phi: RoWeight, power: float, t_cut: float, limit: int) -> ConvergenceVerdict:
    if t_cut < 10:
        raise PreconditionError("t_cut must be at least 10")
    partial = _tail_integral(phi, power, t_cut, limit)
    # t**power * phi**-2 is majorized by t**(power - 2*sigma0 + eps)
    threshold = (power + 1.0) / 2.0
    try:
        idx = phi.analytic_indices()
    except UnsupportedError:
        idx = None
    if idx is not None:
        if idx.sigma0 > threshold:
            return ConvergenceVerdict("converges", partial, f"lower index {idx.sigma0:g} > {threshold:g}")
        if idx.sigma1 < threshold:
            return ConvergenceVerdict("diverges", partial, f"upper index {idx.sigma1:g} < {threshold:g}")
    form = _power_log_form(phi)
    if form is None:
        return ConvergenceVerdict("inconclusive", partial, "indices straddle the threshold; no closed form")
    s, r = form
    if not math.isclose(s, threshold, rel_tol=0.0, abs_tol=1e-12):
        status = "converges" if s > threshold else "diverges"
        return ConvergenceVerdict(status, partial, f"power-log tail exponent {s:g} vs {threshold:g}")
    # Bertrand series: integrand 1/(t * prod(log_k t)**(2 r_k))
    for k, rk in enumerate(r, start=1):
        a = 2.0 * rk
        if math.isclose(a, 1.0, abs_tol=1e-12):
            continue
        status = "converges" if a > 1 else "diverges"
        return ConvergenceVerdict(status, partial, f"log-tail: exponent {a:g} of iterated log {k}")
    return ConvergenceVerdict("diverges", partial, "log-tail: integrand ~ 1/(t ln t ...) at the borderline")


def embed_criterion(
    phi: RoWeight, p: int, n: int, t_cut: float = 1e4, quadrature_points: int = 200
) -> ConvergenceVerdict:
    """Decide finiteness of the integral of t**(2p+n-1) / phi(t)**2 over [1, inf).

    The truncated integral is computed by adaptive quadrature but never used
    to decide convergence.  The tail is settled by index bounds first, then by
    the exact power-log form, and is otherwise reported inconclusive.
    """
    if p < 0 or n < 1:
        raise PreconditionError("need p >= 0 and n >= 1")
    return _integral_verdict(phi, 2 * p + n - 1, t_cut, quadrature_points)


@dataclass(frozen=True)
class ClassicalVerdict:
    interior_ok: ConvergenceVerdict
    boundary_ok: ConvergenceVerdict
    precondition_ok: bool
    lower_indices: tuple = field(default=())

    @property
    def classical(self) -> bool:
        return (
            self.precondition_ok
            and self.interior_ok.status == "converges"
            and self.boundary_ok.status == "converges"
        )

    def to_dict(self):
        return {
            "interior_ok": self.interior_ok.to_dict(),
            "boundary_ok": self.boundary_ok.to_dict(),
            "precondition_ok": self.precondition_ok,
            "lower_indices": list(self.lower_indices),
            "classical": self.classical,
        }


def _lower_index(phi: RoWeight) -> float:
    try:
        return phi.analytic_indices().sigma0
    except UnsupportedError:
        return estimate_indices(phi, 1e8).sigma0


def classical_solution_criterion(phi1: RoWeight, phi2: RoWeight, n: int, q: int, m: int) -> ClassicalVerdict:
    """Sufficient conditions for a generalized solution to be classical.

    ``interior_ok`` tests continuity of derivatives of order 2q in the
    interior (weight phi1), ``boundary_ok`` of order m up to the boundary
    (weight phi2).  A violated lower-index requirement is reported through
    ``precondition_ok`` rather than raised.
    """
    if n < 1 or q < 1 or m < 2 * q:
        raise PreconditionError("need n >= 1, q >= 1 and m >= 2q")
    lows = (_lower_index(phi1), _lower_index(phi2))
    pre = all(s > m + 0.5 for s in lows)
    interior = embed_criterion(phi1, 2 * q, n)
    boundary = embed_criterion(phi2, m, n)
    return ClassicalVerdict(interior, boundary, pre, lows)
