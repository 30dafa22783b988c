"""Model elliptic problem on the unit disk with one high-order boundary condition.

    Laplace(u) = f  in the disk,      (d/dnu)^m u = g  on the circle,   m >= 2,

with nu the inner normal, so (d/dnu)^m = (-1)^m (d/drho)^m.  Mode by mode the
regular solutions of the radial equation are a particular solution plus
c * rho^|k|, and the boundary condition fixes c unless the falling factorial
d(k, m) = |k| (|k|-1) ... (|k|-m+1) vanishes.  The 2m-1 modes |k| <= m-1 carry
both the kernel (rho^|k| e^{ik phi}) and one solvability condition each.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .disk import DiskField, _boundary_rows, _cheb_T, _moment, falling_factorial, random_field
from .errors import NumericError, PreconditionError, UnsupportedError
from .spectra import CircleSpectrum, hnorm
from .weights import Power, PowerLog, RoWeight, weight_from_dict

__all__ = [
    "DiskBvpProblem",
    "SolveReport",
    "AdjointTriple",
    "ModeSolution",
    "AccuracyWarning",
    "kernel_basis",
    "adjoint_kernel_basis",
    "solve_mode",
    "apply_operator",
    "solvability_residuals",
    "solve",
    "fredholm_report",
    "mode_rank_analysis",
    "apriori_probe",
    "apriori_ratio",
    "regularity_probe",
    "boundary_data",
]


class AccuracyWarning(UserWarning):
    pass


def _degenerate(k: int, m: int) -> bool:
    return falling_factorial(abs(k), m) == 0


@dataclass(frozen=True, eq=False)
class DiskBvpProblem:
    m: int
    f: DiskField
    g: CircleSpectrum

    def __post_init__(self):
        if self.m < 2:
            raise PreconditionError("boundary order m must be at least 2")
        if self.f.K != self.g.K:
            raise PreconditionError(f"truncations differ: f has K={self.f.K}, g has K={self.g.K}")

    @classmethod
    def from_dict(cls, data: dict) -> "DiskBvpProblem":
        K = int(data["K"])
        R = int(data.get("R", 16))
        f = DiskField.from_dict(data.get("f", {}), K=K, R=R)
        g = CircleSpectrum.from_rows(data.get("g", {}).get("coeffs", []), K=K)
        return cls(int(data["m"]), f, g)


@dataclass(frozen=True, eq=False)
class AdjointTriple:
    """(v, w, h) for the adjoint of Laplace(u) = f, d^2u/dnu^2 = g."""

    v: DiskField
    w: CircleSpectrum
    h: CircleSpectrum
    k: int = 0


def kernel_basis(m: int, K: int, R: int = 8) -> list:
    """rho^|k| e^{ik phi}, |k| <= m-1: harmonic, and (d/dnu)^m kills them on the circle."""
    if m < 2:
        raise PreconditionError("boundary order m must be at least 2")
    if K < m - 1:
        raise PreconditionError(f"truncation K={K} is below m-1={m - 1}")
    return [DiskField.from_mode(K, R, k, [1.0]) for k in range(-(m - 1), m)]


def adjoint_kernel_basis(K: int, R: int = 8) -> list:
    """Solutions of the homogeneous adjoint problem for m = 2.

    v = rho^|k| e^{ik phi}, w = -e^{ik phi}, h = e^{ik phi} for |k| <= 1; the
    first boundary equation reduces to (k^2 - |k|) e^{ik phi} = 0.
    """
    if K < 1:
        raise PreconditionError("need K >= 1")
    out = []
    for k in (-1, 0, 1):
        v = DiskField.from_mode(K, R, k, [1.0])
        w = CircleSpectrum.from_modes(K, {k: -1.0})
        h = CircleSpectrum.from_modes(K, {k: 1.0})
        out.append(AdjointTriple(v, w, h, k))
    return out


@dataclass(frozen=True)
class ModeSolution:
    k: int
    coeffs: np.ndarray
    solvable: bool
    constraint_value: complex
    tau_residual: float

    def profile(self, R: int) -> np.ndarray:
        return DiskField.from_mode(abs(self.k), R, self.k, self.coeffs).profiles[self.k + abs(self.k)]


@lru_cache(maxsize=None)
def _mode_matrix(n: int, m: int, R: int, degenerate_row: bool) -> np.ndarray:
    """Square system for the reduced coefficients of one mode.

    Rows 0..R-2 match Chebyshev coefficients of 4(x v'' + (n+1) v') with the
    data; the last row is the boundary condition or, when it degenerates, the
    orthogonality to rho^n that selects the kernel-free solution.
    """
    A = np.zeros((R, R))
    A[: R - 1] = 4.0 * _cheb_T(np.eye(R), np.full(R, n))[:, : R - 1].T
    if degenerate_row:
        A[R - 1] = _moment(n, R)
    else:
        A[R - 1] = (-1) ** m * _boundary_rows(n, R, m)[m]
    scale = np.abs(A).max(axis=1, keepdims=True)
    scale[scale == 0] = 1.0
    out = A / scale
    out.setflags(write=False)
    return out, scale.ravel()


def _solve_reduced(k: int, F: np.ndarray, g: complex, m: int, tol: float) -> ModeSolution:
    n = abs(k)
    R = F.shape[0]
    degenerate = _degenerate(k, m)
    A, scale = _mode_matrix(n, m, R, degenerate)
    rhs = np.empty(R, dtype=complex)
    rhs[: R - 1] = F[: R - 1]
    rhs[R - 1] = 0.0 if degenerate else g
    c = np.linalg.solve(A, rhs / scale)
    if not np.all(np.isfinite(c)):
        raise NumericError(f"radial solve failed for mode {k}")
    tau = float(abs(F[R - 1]))
    if degenerate:
        bc = (-1) ** m * (_boundary_rows(n, R, m)[m] @ c)
        cv = complex(g - bc)
        scale_ref = max(1.0, abs(g), float(np.abs(F).max()))
        return ModeSolution(k, c, abs(cv) <= tol * scale_ref, cv, tau)
    return ModeSolution(k, c, True, 0j, tau)


def solve_mode(k: int, f_k, g_k: complex, m: int, tol: float = 1e-10, R: int = None) -> dict:
    """Solve the radial problem of mode k with profile f_k on ``radial_nodes(len(f_k))``.

    Returns the regular solution profile u_k (orthogonal to rho^|k| when the
    boundary condition degenerates), whether the data are solvable, and the
    constraint value g_k - (-1)^m u_p^(m)(1) for degenerate modes.
    """
    f_k = np.asarray(f_k, dtype=complex)
    R = f_k.shape[0] if R is None else R
    K = abs(k)
    P = np.zeros((2 * K + 1, R), dtype=complex)
    P[k + K] = f_k
    F = DiskField.from_profiles(K, R, P).mode(k)
    sol = _solve_reduced(k, F, g_k, m, tol)
    u = DiskField.from_mode(K, R, k, sol.coeffs)
    return {
        "u_k": u.profiles[k + K],
        "solvable": sol.solvable,
        "constraint_value": sol.constraint_value,
        "tau_residual": sol.tau_residual,
    }


def boundary_data(u: DiskField, m: int) -> CircleSpectrum:
    return u.normal_derivative_trace(m)


def apply_operator(u: DiskField, m: int):
    """(Laplace u, (d/dnu)^m u on the circle)."""
    return u.laplacian(), boundary_data(u, m)


def _paper_residuals(f: DiskField, g: CircleSpectrum, K: int) -> list:
    out = []
    for t in adjoint_kernel_basis(max(K, 1), f.R):
        val = f.inner(t.v) + f.trace().inner(t.w) + g.inner(t.h)
        out.append(complex(val))
    return out


def solvability_residuals(f: DiskField, g: CircleSpectrum, m: int) -> list:
    """Values of the range functionals on the data (f, g).

    For m = 2 these are (f, v)_disk + (f, w)_circle + (g, h)_circle over the
    adjoint basis (k = -1, 0, 1).  For m > 2 they are the constraint values of
    the degenerate modes k = -(m-1)..(m-1).
    """
    if f.K != g.K:
        raise PreconditionError("truncations of f and g differ")
    if m == 2:
        return _paper_residuals(f, g, f.K)
    vals = []
    for k in range(-(m - 1), m):
        if abs(k) > f.K:
            vals.append(-0j if abs(k) > g.K else complex(g[k]))
            continue
        sol = _solve_reduced(k, f.mode(k), g[k], m, 0.0)
        vals.append(sol.constraint_value)
    return vals


@dataclass(frozen=True, eq=False)
class SolveReport:
    solution: DiskField
    kernel_dim: int
    cokernel_dim: int
    index: int
    solvability_residuals: list
    operator_residual: float
    norms: dict
    projected_g: CircleSpectrum
    tau_residual: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.index != self.kernel_dim - self.cokernel_dim:
            raise NumericError("index must equal kernel_dim - cokernel_dim")
        if len(self.solvability_residuals) != self.cokernel_dim:
            raise NumericError("one solvability residual per cokernel functional expected")

    def to_dict(self) -> dict:
        return {
            "kernel_dim": self.kernel_dim,
            "cokernel_dim": self.cokernel_dim,
            "index": self.index,
            "solvability_residuals": [[z.real, z.imag] for z in self.solvability_residuals],
            "operator_residual": self.operator_residual,
            "tau_residual": self.tau_residual,
            "norms": self.norms,
            "projected_g": self.projected_g.to_dict(),
            "solution": self.solution.to_dict(),
            "meta": self.meta,
        }


def _norm_label(spec) -> str:
    if isinstance(spec, str):
        return spec
    if spec.get("type") == "trace":
        w = spec.get("weight", {"kind": "power", "s": 0})
        return f"trace{spec.get('order', 0)}:{weight_from_dict(w).label()}"
    return f"H{spec.get('s')}"


def _evaluate_norm(u: DiskField, spec, m: int) -> float:
    if isinstance(spec, str):
        s = spec.strip().upper()
        if s == "L2":
            return u.l2_norm()
        if s.startswith("H"):
            order = float(s[1:])
            if order != int(order):
                raise UnsupportedError("interior Sobolev norms need an integer order")
            return u.sobolev_norm(int(order))
        raise PreconditionError(f"unknown norm {spec!r}")
    kind = spec.get("type", "interior")
    if kind == "interior":
        s = spec.get("s", 0)
        if float(s) != int(s):
            raise UnsupportedError("interior Sobolev norms need an integer order")
        return u.sobolev_norm(int(s))
    if kind == "trace":
        w = weight_from_dict(spec.get("weight", {"kind": "power", "s": 0}))
        return hnorm(u.normal_derivative_trace(int(spec.get("order", 0))), w)
    raise PreconditionError(f"unknown norm type {kind!r}")


def solve(problem: DiskBvpProblem, requested_norms=(), threads: int = 1, tol: float = 1e-10) -> SolveReport:
    """Solve on the range after projecting the data, returning the solution orthogonal to the kernel.

    Data outside the range are projected along span{(0, e^{ik phi}) : |k| <= m-1},
    i.e. g_k is replaced by g_k minus its constraint value; the projected data
    are part of the report.
    """
    f, g, m = problem.f, problem.g, problem.m
    modes = list(range(-f.K, f.K + 1))

    def work(k):
        return _solve_reduced(k, f.mode(k), g[k], m, tol)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            sols = list(ex.map(work, modes))
    else:
        sols = [work(k) for k in modes]

    coeffs = np.stack([s.coeffs for s in sols])
    u = DiskField(f.K, f.R, coeffs)
    proj = g.coefficients.copy()
    for s in sols:
        if _degenerate(s.k, m):
            proj[s.k + f.K] -= s.constraint_value
    g_proj = CircleSpectrum(g.K, proj)

    residuals = solvability_residuals(f, g, m)
    lap, bnd = apply_operator(u, m)
    ref = max(f.l2_norm() + math.sqrt(2 * math.pi) * float(np.linalg.norm(g.coefficients)), 1e-300)
    op_res = ((lap - f).l2_norm() + (bnd - g_proj).inner(bnd - g_proj).real ** 0.5) / ref
    tau = max(s.tau_residual for s in sols)
    if tau > 1e-10 * max(1.0, float(np.abs(f.coeffs).max())):
        warnings.warn(f"f is not resolved by R={f.R} radial terms (tau residual {tau:.2e})", AccuracyWarning)

    kdim = sum(1 for k in modes if _degenerate(k, m))
    norms = {_norm_label(spec): _evaluate_norm(u, spec, m) for spec in requested_norms}
    return SolveReport(
        solution=u,
        kernel_dim=kdim,
        cokernel_dim=kdim,
        index=0,
        solvability_residuals=residuals,
        operator_residual=float(op_res),
        norms=norms,
        projected_g=g_proj,
        tau_residual=tau,
        meta={"m": m, "K": f.K, "R": f.R, "threads": threads},
    )


def mode_rank_analysis(m: int, K: int, R: int = 8, rtol: float = 1e-10) -> dict:
    """Kernel and cokernel dimensions of the discretized operator, mode by mode.

    Each mode maps R reduced coefficients to R-1 interior coefficients plus the
    boundary value; nullity and corank come from singular values, independently
    of the falling-factorial count.
    """
    nullity = 0
    corank = 0
    for k in range(-K, K + 1):
        A, _ = _mode_matrix(abs(k), m, R, False)
        sv = np.linalg.svd(A, compute_uv=False)
        rank = int(np.sum(sv > rtol * sv[0]))
        nullity += A.shape[1] - rank
        corank += A.shape[0] - rank
    return {"kernel_dim": nullity, "cokernel_dim": corank}


def fredholm_report(m: int, K: int, R: int = 8) -> dict:
    if m < 2:
        raise PreconditionError("boundary order m must be at least 2")
    kernel = kernel_basis(m, K, R)
    cokernel = sum(1 for k in range(-K, K + 1) if _degenerate(k, m))
    if m == 2 and cokernel != len(adjoint_kernel_basis(K, R)):
        raise NumericError("cokernel count disagrees with the adjoint basis")
    return {"kernel_dim": len(kernel), "cokernel_dim": cokernel, "index": len(kernel) - cokernel}


def _check_integer_order(x: float, what: str) -> int:
    if abs(x - round(x)) > 1e-12 or round(x) < 0:
        raise UnsupportedError(f"{what} order {x:g} is not a nonnegative integer")
    return int(round(x))


def apriori_ratio(u: DiskField, s: float, lam: float, m: int) -> float:
    """||u||_s / (||Laplace u||_{s-2} + ||(d/dnu)^m u||_{s-m-1/2, circle} + ||u||_{s-lam})."""
    s_i = _check_integer_order(s, "solution")
    low = _check_integer_order(s - lam, "lower")
    data = _check_integer_order(s - 2, "data")
    num = u.sobolev_norm(s_i)
    den = (
        u.laplacian().sobolev_norm(data)
        + hnorm(boundary_data(u, m), Power(s - m - 0.5))
        + u.sobolev_norm(low)
    )
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return num / den


def apriori_probe(
    trials: int,
    s: float,
    lam: float,
    seed: int,
    m: int = 2,
    K: int = 32,
    R: int = 10,
    degree: int = 6,
    decay: float = 3.0,
) -> dict:
    """Max over seeded random fields of the global a priori ratio.

    The estimate asserts this ratio is bounded; a finite maximum that is
    stable under K-refinement is the observable consequence.
    """
    if trials < 1:
        raise PreconditionError("need at least one trial")
    if not s > m + 0.5:
        raise PreconditionError(f"need s > m + 1/2 = {m + 0.5}")
    if not lam > 0:
        raise PreconditionError("lambda must be positive")
    per = []
    for t in range(trials):
        u = random_field(K, R, seed, t, degree=degree, decay=decay)
        per.append(apriori_ratio(u, s, lam, m))
    return {
        "max_ratio": max(per),
        "per_trial": per,
        "meta": {"trials": trials, "s": s, "lambda": lam, "seed": seed, "m": m, "K": K, "R": R,
                 "degree": degree, "decay": decay},
    }


DEFAULT_TRACE_LADDER = (5.0, 6.0, 7.0, 7.5, 8.0, 9.0)


def regularity_probe(
    decay_exponent: float,
    m: int = 2,
    K: int = 64,
    log_exponent: float = 0.0,
    ladder=DEFAULT_TRACE_LADDER,
    orders=None,
    R: int = 4,
    weights=None,
) -> dict:
    """Boundary-trace norms of the solution for g_k = 1/(<k>^a (ln <k>)^r), f = 0.

    Keys of the table are "j=<order>|<weight label>" for the trace of
    (d/dnu)^j u measured in H^alpha(circle).
    """
    k = np.arange(-K, K + 1)
    br = np.sqrt(1.0 + k * k)
    if log_exponent:
        decay_w = PowerLog(decay_exponent, (log_exponent,))
    else:
        decay_w = Power(decay_exponent)
    g = CircleSpectrum(K, 1.0 / decay_w(br))
    report = solve(DiskBvpProblem(m, DiskField.zeros(K, R), g))
    u = report.solution
    if weights is None:
        weights = [Power(t) for t in ladder]
    orders = range(m + 1) if orders is None else orders
    table = {}
    for j in orders:
        tr = u.normal_derivative_trace(j)
        for w in weights:
            table[f"j={j}|{w.label()}"] = hnorm(tr, w)
    return {
        "trace_norm_table": table,
        "predicted_threshold": {f"j={j}": decay_exponent - 0.5 + m - j for j in orders},
        "meta": {"K": K, "m": m, "decay_exponent": decay_exponent, "log_exponent": log_exponent},
    }
