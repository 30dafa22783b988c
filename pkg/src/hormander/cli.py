"""Command-line interface: ``hormander <group> <command> [flags]``.

Reports are JSON (sorted keys, with a ``version`` field) or CSV with one
``key,value`` row per flattened entry.  Defaults may be overridden by a JSON
file named in the HORMANDER_CONFIG environment variable; explicit flags win.

Exit codes: 0 success, 2 precondition failure, 3 numeric failure, 64 usage.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bvp import (
    DiskBvpProblem,
    adjoint_kernel_basis,
    apply_operator,
    apriori_probe,
    fredholm_report,
    kernel_basis,
    regularity_probe,
    solve,
)
from .disk import random_field
from .errors import NumericError, PreconditionError, UnsupportedError
from .green import GreenCheckInput, adjoint_system_residual, green_pairing_check, green_residual
from .interpolation import build_psi, check_direct_sum, check_pseudoconcavity, interp_norm
from .spectra import (
    CircleSpectrum,
    LatticeSpectrum,
    analyze_circle,
    derivative_multiplier_bound,
    embedding_ratio,
    hnorm,
    smoothed_modulus,
)
from .weights import (
    Oscillating,
    Power,
    PowerLog,
    analytic_indices,
    check_ro_membership,
    classical_solution_criterion,
    embed_criterion,
    estimate_indices,
    eval_weight,
    weight_from_dict,
)

EXIT_OK, EXIT_PRECONDITION, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 64
CONFIG_ENV = "HORMANDER_CONFIG"

# library operation -> the single command that reaches it
COMMAND_TABLE = {
    "eval_weight": "ro check",
    "check_ro_membership": "ro check",
    "analytic_indices": "ro index",
    "estimate_indices": "ro index",
    "embed_criterion": "ro embed",
    "classical_solution_criterion": "ro classical",
    "smoothed_modulus": "norm",
    "hnorm": "norm",
    "analyze_circle": "norm",
    "embedding_ratio": "norm",
    "derivative_multiplier_bound": "norm",
    "build_psi": "interp psi",
    "check_pseudoconcavity": "interp psi",
    "interp_norm": "interp verify",
    "check_direct_sum": "interp verify",
    "solve": "bvp solve",
    "solve_mode": "bvp solve",
    "apply_operator": "bvp solve",
    "solvability_residuals": "bvp solve",
    "fredholm_report": "bvp fredholm",
    "kernel_basis": "bvp fredholm",
    "adjoint_kernel_basis": "bvp fredholm",
    "apriori_probe": "bvp apriori",
    "regularity_probe": "bvp regularity",
    "green_residual": "green verify",
    "adjoint_system_residual": "green verify",
    "green_pairing_check": "green verify",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------- helpers


def _load_json_arg(value: str):
    """Inline JSON or a path to a JSON file."""
    p = Path(value)
    if not value.lstrip().startswith(("{", "[")) and p.exists():
        value = p.read_text()
    try:
        return json.loads(value)
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"invalid JSON: {exc}") from None


def _weight_from_args(ns, prefix: str = ""):
    raw = getattr(ns, prefix + "weight", None)
    if raw:
        return weight_from_dict(_load_json_arg(raw))
    kind = ns.kind
    if kind is None:
        raise PreconditionError("give a weight with --kind or --weight")
    if kind == "power":
        return Power(_need(ns.s, "--s"))
    if kind == "powerlog":
        return PowerLog(_need(ns.s, "--s"), tuple(ns.r or ()), ns.t_switch)
    if kind == "oscillating":
        r = ns.r[0] if ns.r else 1.0
        return Oscillating(_need(ns.theta, "--theta"), _need(ns.delta, "--delta"), r)
    raise PreconditionError(f"weight kind {kind!r} needs --weight JSON")


def _need(value, flag):
    if value is None:
        raise PreconditionError(f"missing {flag}")
    return value


def _rng(seed: int):
    return np.random.default_rng(seed)


def _random_spectrum(rng, K: int, decay: float = 2.0) -> CircleSpectrum:
    k = np.arange(-K, K + 1)
    c = rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)
    return CircleSpectrum(K, c * (1.0 + k * k) ** (-decay / 2))


def _read_spectrum(path: str):
    text = Path(path).read_text()
    if path.endswith(".csv"):
        return CircleSpectrum.from_csv(text)
    data = _load_json_arg(text)
    if "samples" in data:
        samples = np.array([complex(*s) if isinstance(s, list) else complex(s) for s in data["samples"]])
        return analyze_circle(samples, data.get("K"))
    if "n" in data and int(data["n"]) != 1:
        return LatticeSpectrum.from_dict(data)
    return CircleSpectrum.from_dict(data)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    return obj


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def render(report: dict, fmt: str) -> str:
    report = _jsonable(dict(report, version=__version__))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in _flatten(report):
            w.writerow([k, json.dumps(v) if isinstance(v, bool) else v])
        return buf.getvalue()
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------- commands


def cmd_ro_index(ns):
    alpha = _weight_from_args(ns)
    est = estimate_indices(alpha, ns.tmax, ns.lambdas, ns.grid)
    out = {"weight": alpha.to_dict(), "estimated": est.to_dict(),
           "meta": {"t_max": ns.tmax, "lambda_grid": ns.lambdas, "t_grid_size": ns.grid}}
    try:
        out["analytic"] = analytic_indices(alpha).to_dict()
    except UnsupportedError:
        out["analytic"] = None
    return out


def cmd_ro_check(ns):
    alpha = _weight_from_args(ns)
    chk = check_ro_membership(alpha, ns.b, ns.tmax, ns.grid)
    out = {"weight": alpha.to_dict(), "membership": chk.to_dict(),
           "meta": {"b": ns.b, "t_max": ns.tmax, "grid": ns.grid}}
    if ns.t:
        out["values"] = [[t, float(eval_weight(alpha, t))] for t in ns.t]
    return out


def cmd_ro_embed(ns):
    phi = _weight_from_args(ns)
    v = embed_criterion(phi, ns.p, ns.n, ns.t_cut, ns.quadrature_points)
    return dict(v.to_dict(), meta={"p": ns.p, "n": ns.n, "t_cut": ns.t_cut})


def cmd_ro_classical(ns):
    phi1 = weight_from_dict(_load_json_arg(ns.phi1))
    phi2 = weight_from_dict(_load_json_arg(ns.phi2))
    v = classical_solution_criterion(phi1, phi2, ns.n, ns.q, ns.m)
    return dict(v.to_dict(), meta={"n": ns.n, "q": ns.q, "m": ns.m})


def cmd_norm(ns):
    alpha = _weight_from_args(ns)
    if ns.input:
        w = _read_spectrum(ns.input)
    else:
        w = _random_spectrum(_rng(ns.seed), ns.K)
    out = {"hnorm": hnorm(w, alpha), "weight": alpha.to_dict(),
           "meta": {"K": w.K, "n": w.n, "seed": None if ns.input else ns.seed,
                    "max_bracket": smoothed_modulus([w.K] * w.n)}}
    if ns.eta:
        eta = weight_from_dict(_load_json_arg(ns.eta))
        out["embedding_ratio"] = embedding_ratio(alpha, eta, w.K, w.n).to_dict()
    if ns.derivative is not None:
        out["derivative_multiplier_bound"] = derivative_multiplier_bound(ns.derivative, alpha, w.K)
    return out


def _setup_from_args(ns):
    return build_psi(_weight_from_args(ns), ns.s0, ns.s1)


def cmd_interp_psi(ns):
    setup = _setup_from_args(ns)
    pc = check_pseudoconcavity(setup, ns.tmax, ns.grid)
    t = np.geomspace(1e-2, ns.tmax, ns.samples)
    return {"setup": setup.to_dict(), "indices": setup.indices.to_dict(),
            "pseudoconcavity": pc.to_dict(),
            "psi_table": [[float(a), float(b)] for a, b in zip(t, setup.psi(t))],
            "meta": {"t_max": ns.tmax, "grid": ns.grid}}


def cmd_interp_verify(ns):
    setup = _setup_from_args(ns)
    rng = _rng(ns.seed)
    worst = 0.0
    for _ in range(ns.trials):
        w = _random_spectrum(rng, ns.K)
        ref = hnorm(w, setup.alpha)
        worst = max(worst, abs(interp_norm(w, setup) - ref) / max(ref, 1e-300))
    trip = [_random_spectrum(rng, ns.K) for _ in range(3)]
    total = math.sqrt(sum(interp_norm(w, setup) ** 2 for w in trip))
    ds = check_direct_sum([setup] * 3, trip) / max(total, 1e-300)
    return {"max_relative_gap": worst, "direct_sum_relative_residual": ds, "setup": setup.to_dict(),
            "meta": {"trials": ns.trials, "K": ns.K, "seed": ns.seed}}


def cmd_bvp_solve(ns):
    if not ns.input:
        raise PreconditionError("bvp solve needs --input with a problem JSON")
    problem = DiskBvpProblem.from_dict(_load_json_arg(ns.input))
    norms = [_load_json_arg(n) if n.lstrip().startswith("{") else n for n in (ns.norm or [])]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rep = solve(problem, norms, threads=ns.threads, tol=ns.tol)
    lap, bnd = apply_operator(rep.solution, problem.m)
    out = rep.to_dict()
    out["warnings"] = sorted({str(c.message) for c in caught})
    out["check"] = {"laplacian_l2": lap.l2_norm(), "boundary_modes": bnd.K}
    out["meta"]["tol"] = ns.tol
    out["meta"].pop("threads", None)
    return out


def cmd_bvp_fredholm(ns):
    K = ns.K if ns.K is not None else max(ns.m - 1, 1)
    rep = fredholm_report(ns.m, K, ns.R)
    if ns.verbose:
        rep["kernel_basis_modes"] = [int(np.nonzero(np.abs(f.coeffs).sum(axis=1))[0][0]) - K
                                     for f in kernel_basis(ns.m, K, ns.R)]
        if ns.m == 2:
            rep["adjoint_basis_modes"] = [t.k for t in adjoint_kernel_basis(K, ns.R)]
        rep["meta"] = {"m": ns.m, "K": K, "R": ns.R}
    return rep


def cmd_bvp_apriori(ns):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return apriori_probe(ns.trials, ns.s, ns.lam, ns.seed, ns.m, ns.K, ns.R, decay=ns.decay)


def cmd_bvp_regularity(ns):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return regularity_probe(ns.decay, ns.m, ns.K, log_exponent=ns.log_exponent,
                                ladder=tuple(ns.ladder))


def cmd_green_verify(ns):
    K, R = ns.K, ns.R
    rng = _rng(ns.seed)
    u = random_field(K, R, ns.seed, 0, decay=1.0)
    v = random_field(K, R, ns.seed, 1, decay=1.0)
    w = _random_spectrum(rng, K, 1.0)
    h = _random_spectrum(rng, K, 1.0)
    res = {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for q in (ns.quadrature, 2 * ns.quadrature):
            res[str(q)] = green_residual(GreenCheckInput(u, v, w, h, q, q))
    triples = adjoint_kernel_basis(K, R)
    adj = [adjoint_system_residual(t) for t in triples]
    pair = [green_pairing_check(u, t) for t in triples]
    return {"green_residual": res, "adjoint_residuals": adj, "pairing": pair,
            "warnings": sorted({str(c.message) for c in caught}),
            "meta": {"K": K, "R": R, "seed": ns.seed, "quadrature": ns.quadrature}}


# ---------------------------------------------------------------- parser


def _weight_flags(p):
    p.add_argument("--kind", choices=["power", "powerlog", "oscillating"])
    p.add_argument("--s", type=float)
    p.add_argument("--r", type=float, nargs="+", help="log exponents (powerlog) or r (oscillating)")
    p.add_argument("--theta", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--t-switch", dest="t_switch", type=float)
    p.add_argument("--weight", help="weight as JSON text or path")


def _common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hormander", description="Hormander-space numerics on the unit disk")
    parser.add_argument("--version", action="version", version=__version__)
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def sub(group_parsers, name, func, help_text):
        p = group_parsers.add_parser(name, help=help_text)
        _common(p)
        p.set_defaults(func=func)
        return p

    ro = groups.add_parser("ro", help="RO-varying weights").add_subparsers(dest="cmd", required=True)
    p = sub(ro, "index", cmd_ro_index, "Matuszewska indices")
    _weight_flags(p)
    p.add_argument("--tmax", type=float, default=1e8)
    p.add_argument("--lambdas", type=float, nargs="+", default=[2.0, 4.0, 8.0, 16.0])
    p.add_argument("--grid", type=int, default=4000)
    p = sub(ro, "check", cmd_ro_check, "sampled RO membership")
    _weight_flags(p)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--tmax", type=float, default=1e6)
    p.add_argument("--grid", type=int, default=400)
    p.add_argument("--t", type=float, nargs="*", help="also report alpha at these points")
    p = sub(ro, "embed", cmd_ro_embed, "integral embedding criterion")
    _weight_flags(p)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--t-cut", dest="t_cut", type=float, default=1e4)
    p.add_argument("--quadrature-points", dest="quadrature_points", type=int, default=200)
    p = sub(ro, "classical", cmd_ro_classical, "classical-solution criterion")
    p.add_argument("--phi1", required=True)
    p.add_argument("--phi2", required=True)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--m", type=int, default=2)

    p = groups.add_parser("norm", help="Hormander norm of a spectrum")
    _common(p)
    _weight_flags(p)
    p.set_defaults(func=cmd_norm)
    p.add_argument("--input", help="spectrum JSON/CSV, or JSON with 'samples'")
    p.add_argument("--K", type=int, default=16, help="truncation of the seeded random spectrum")
    p.add_argument("--eta", help="second weight (JSON) for the embedding ratio")
    p.add_argument("--derivative", type=int, help="order l for the derivative multiplier bound")

    it = groups.add_parser("interp", help="interpolation parameter").add_subparsers(dest="cmd", required=True)
    for name, func in (("psi", cmd_interp_psi), ("verify", cmd_interp_verify)):
        p = sub(it, name, func, f"interp {name}")
        _weight_flags(p)
        p.add_argument("--s0", type=float, required=True)
        p.add_argument("--s1", type=float, required=True)
    it.choices["psi"].add_argument("--tmax", type=float, default=1e8)
    it.choices["psi"].add_argument("--grid", type=int, default=2000)
    it.choices["psi"].add_argument("--samples", type=int, default=9)
    it.choices["verify"].add_argument("--trials", type=int, default=100)
    it.choices["verify"].add_argument("--K", type=int, default=32)

    bvp = groups.add_parser("bvp", help="disk boundary problem").add_subparsers(dest="cmd", required=True)
    p = sub(bvp, "solve", cmd_bvp_solve, "solve a problem given as JSON")
    p.add_argument("--input")
    p.add_argument("--norm", action="append", help="'L2', 'H<s>' or a JSON norm spec; repeatable")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-10)
    p = sub(bvp, "fredholm", cmd_bvp_fredholm, "kernel, cokernel and index")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--K", type=int)
    p.add_argument("--R", type=int, default=8)
    p.add_argument("--verbose", action="store_true")
    p = sub(bvp, "apriori", cmd_bvp_apriori, "a priori estimate probe")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--s", type=float, default=3.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--K", type=int, default=32)
    p.add_argument("--R", type=int, default=10)
    p.add_argument("--decay", type=float, default=3.0)
    p = sub(bvp, "regularity", cmd_bvp_regularity, "boundary-trace regularity probe")
    p.add_argument("--decay", type=float, default=6.0)
    p.add_argument("--log-exponent", dest="log_exponent", type=float, default=0.0)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--K", type=int, default=64)
    p.add_argument("--ladder", type=float, nargs="+", default=[5.0, 6.0, 7.0, 7.5, 8.0, 9.0])

    gr = groups.add_parser("green", help="Green formula").add_subparsers(dest="cmd", required=True)
    p = sub(gr, "verify", cmd_green_verify, "Green formula and adjoint checks")
    p.add_argument("--K", type=int, default=16)
    p.add_argument("--R", type=int, default=12)
    p.add_argument("--quadrature", type=int, default=128)
    return parser


def _config_overrides(ns_probe) -> dict:
    path = os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"cannot read config {path}: {exc}") from None
    sections = [cfg.get("defaults", {}), cfg.get(ns_probe.group, {})]
    if getattr(ns_probe, "cmd", None):
        sections.append(cfg.get(f"{ns_probe.group} {ns_probe.cmd}", {}))
    merged = {}
    for s in sections:
        merged.update({k: v for k, v in s.items() if not isinstance(v, dict)})
    return merged


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        argv = list(sys.argv[1:] if argv is None else argv)
        ns = parser.parse_args(argv)
        overrides = _config_overrides(ns)
        if overrides:
            explicit = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
            for k, v in overrides.items():
                if k not in explicit and hasattr(ns, k):
                    setattr(ns, k, v)
        report = ns.func(ns)
        text = render(report, ns.format)
        if ns.output:
            Path(ns.output).write_text(text)
        else:
            stdout.write(text)
        return EXIT_OK
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PreconditionError, ValueError, OSError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
