"""Experiment runner: one subcommand per standard experiment.

Each subcommand writes a CSV (header row, 17 significant digits, LF line
endings) and prints a summary block with the fitted slope or verdict.  With
``--check`` the summary verdict becomes an exit code, so a CI run of all six
subcommands doubles as the acceptance gate.

Exit codes: 0 success, 2 validation error, 3 divergence, 4 failed check.
"""

from __future__ import annotations

import argparse
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dynamics, measure
from .errors import DivergenceError, DomainError, InputError
from .estimator import Coordinate, sigma_closed_form, sigma_empirical
from .integrate import StepperConfig, run
from .objective import Quadratic, grad, random_quadratic

EXPERIMENT_NAMES = ("ode-order", "ode-trajectory", "ou-weak-order",
                    "optimizer-weak-order", "sigma-check", "stability")

_ODE_METHODS = {"euler": dynamics.EULER, "symplectic-euler": dynamics.SYMPLECTIC_EULER}
_SDE_METHODS = {"euler-maruyama": "euler_maruyama",
                "implicit-euler": "implicit_euler_affine"}

# Acceptance windows for the fitted slopes, keyed by (experiment aspect).
SLOPE_FIRST_ORDER = (0.9, 1.1)
SLOPE_SECOND_ORDER = (1.8, 2.2)
SLOPE_THIRD_ORDER = (2.7, 3.3)


@dataclass
class ExperimentSpec:
    """A named experiment with a flat parameter map and an output path."""

    name: str
    params: dict = field(default_factory=dict)
    out: Path | None = None
    seed: int = 0
    workers: int = 1
    check: bool = False


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def read_error_curve(path: Path) -> measure.ErrorCurve:
    """Re-read an order-experiment CSV into an error curve."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    data = np.atleast_1d(data)
    return measure.ErrorCurve(data["h"], data["error"], data["stderr"])


def parse_matrix(spec: str) -> np.ndarray:
    """``diag:a,b,...`` or ``full:a11,a12;a21,a22`` (rows split by ';')."""
    kind, sep, body = spec.partition(":")
    if not sep:
        raise InputError(f"matrix spec {spec!r} needs a 'diag:' or 'full:' prefix")
    try:
        if kind == "diag":
            return np.diag([float(v) for v in body.split(",")])
        if kind == "full":
            rows = [[float(v) for v in r.split(",")] for r in body.split(";")]
            return np.array(rows, dtype=float)
    except ValueError as exc:
        raise InputError(f"bad matrix spec {spec!r}: {exc}") from exc
    raise InputError(f"unknown matrix kind {kind!r} (expected diag or full)")


def parse_vector(spec: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in spec.split(",")], dtype=float)
    except ValueError as exc:
        raise InputError(f"bad vector {spec!r}: {exc}") from exc


def parse_grid(spec: str) -> np.ndarray:
    grid = parse_vector(spec)
    if grid.size < 1 or np.any(grid <= 0.0):
        raise InputError(f"stepsize grid {spec!r} must be positive")
    if np.any(np.diff(grid) >= 0.0):
        raise InputError(f"stepsize grid {spec!r} must be strictly decreasing")
    return grid


def parse_phi(spec: str):
    """``x1`` -> first mean component, ``x1sq``/``x1x2`` -> second moments."""
    m = re.fullmatch(r"x(\d+)sq", spec)
    if m:
        i = int(m.group(1)) - 1
        return ("xx", i, i)
    m = re.fullmatch(r"x(\d+)x(\d+)", spec)
    if m:
        return ("xx", int(m.group(1)) - 1, int(m.group(2)) - 1)
    m = re.fullmatch(r"x(\d+)", spec)
    if m:
        return ("x", int(m.group(1)) - 1)
    raise InputError(f"bad test function {spec!r} (expected e.g. x1, x1sq, x1x2)")


def _in_window(value: float, window: tuple[float, float]) -> bool:
    return window[0] <= value <= window[1]


# --- experiment handlers -----------------------------------------------------
# Each returns (header, rows, summary: list[(key, value)], check_ok or None).

def _exp_ode_order(spec: ExperimentSpec):
    p = spec.params
    method = _ODE_METHODS[p.get("method", "euler")]
    reference = p.get("reference", "exact")
    T = float(p.get("T", 15.0))
    x0 = np.array([float(p.get("p0", 1.0)), float(p.get("q0", 0.0))])
    h_grid = p.get("h_grid")
    if h_grid is None:
        h_grid = 0.03 * 0.5 ** np.arange(5)
    curve = measure.harmonic_error_curve(method, reference, h_grid, T, x0)
    fit = measure.fit_order(curve)
    window = SLOPE_FIRST_ORDER if reference == "exact" else SLOPE_SECOND_ORDER
    ok = _in_window(fit.slope, window)
    header = ["h", "error", "stderr"]
    rows = [[h, e, s] for h, e, s in zip(curve.hs, curve.errors, curve.stderrs)]
    summary = [("method", p.get("method", "euler")), ("reference", reference),
               ("T", T), ("points", len(rows)), ("slope", fit.slope),
               ("r_squared", fit.r_squared),
               ("window", f"[{window[0]}, {window[1]}]")]
    return header, rows, summary, ok


def _exp_ode_trajectory(spec: ExperimentSpec):
    p = spec.params
    h = float(p.get("h", 0.0375))
    T = float(p.get("T", 15.0))
    x0 = np.array([float(p.get("p0", 1.0)), float(p.get("q0", 0.0))])
    n = measure.steps_for(T, h)
    base = dynamics.harmonic()
    trajs = {
        "exact": np.array([base.exact(x0, k * h) for k in range(n + 1)]),
        "euler": run(base, StepperConfig(dynamics.EULER, h, n), x0).states,
        "symplectic-euler": run(
            base, StepperConfig(dynamics.SYMPLECTIC_EULER, h, n), x0).states,
    }
    header = ["t", "series", "dim0", "dim1"]
    rows = []
    for name, states in trajs.items():
        for k in range(n + 1):
            rows.append([k * h, name, states[k, 0], states[k, 1]])

    h0 = dynamics.hamiltonian(x0)
    euler_h = dynamics.hamiltonian(trajs["euler"][-1])
    growth = (1.0 + h * h) ** n * h0
    euler_ok = abs(euler_h - growth) <= 1e-10 * growth
    ham_mod = np.array([dynamics.modified_hamiltonian(s, h)
                        for s in trajs["symplectic-euler"]])
    ham0 = dynamics.modified_hamiltonian(x0, h)
    sympl_ok = bool(np.max(np.abs(ham_mod - ham0)) <= 1e-12 * abs(ham0))
    summary = [("h", h), ("T", T), ("steps", n),
               ("euler_final_radius", float(np.linalg.norm(trajs["euler"][-1]))),
               ("euler_energy_ratio", euler_h / h0),
               ("euler_energy_law_ok", euler_ok),
               ("symplectic_invariant_drift",
                float(np.max(np.abs(ham_mod - ham0)) / abs(ham0))),
               ("symplectic_invariant_ok", sympl_ok)]
    return header, rows, summary, bool(euler_ok and sympl_ok)


def _exp_ou_weak_order(spec: ExperimentSpec):
    p = spec.params
    method = _SDE_METHODS[p.get("method", "euler-maruyama")]
    reference = p.get("reference", "exact")
    gamma = float(p.get("gamma", 1.0))
    sigma = float(p.get("sigma", 0.1))
    x0 = float(p.get("x0", 10.0))
    T = float(p.get("T", 1.0))
    h_grid = p.get("h_grid")
    if h_grid is None:
        h_grid = np.array([0.04, 0.02, 0.01, 0.005])
    curve = measure.ou_weak_error_curve(method, reference, h_grid, T, x0,
                                        gamma, sigma, phi="x2")
    fit = measure.fit_order(curve)
    window = SLOPE_FIRST_ORDER if reference == "exact" else SLOPE_SECOND_ORDER
    ok = _in_window(fit.slope, window)
    header = ["h", "error", "stderr"]
    rows = [[h, e, s] for h, e, s in zip(curve.hs, curve.errors, curve.stderrs)]
    summary = [("method", p.get("method", "euler-maruyama")),
               ("reference", reference), ("gamma", gamma), ("sigma", sigma),
               ("x0", x0), ("T", T), ("phi", "x1sq"), ("slope", fit.slope),
               ("r_squared", fit.r_squared),
               ("window", f"[{window[0]}, {window[1]}]")]
    return header, rows, summary, ok


def _exp_optimizer_weak_order(spec: ExperimentSpec):
    p = spec.params
    A = p.get("matrix")
    A = parse_matrix(A) if isinstance(A, str) else (
        np.diag([1.0, 2.0]) if A is None else np.asarray(A, dtype=float))
    quad = Quadratic(A)
    x0 = p.get("x0")
    x0 = parse_vector(x0) if isinstance(x0, str) else (
        np.ones(quad.dimension) if x0 is None else np.asarray(x0, dtype=float))
    T = float(p.get("T", 1.0))
    mode = p.get("mode", "global")
    phi_name = p.get("phi", "x1sq")
    phi = parse_phi(phi_name) if isinstance(phi_name, str) else phi_name
    h_grid = p.get("h_grid")
    if h_grid is None:
        h_grid = np.array([0.04, 0.02, 0.01, 0.005])
    curves = measure.optimizer_weak_error_curves(quad, h_grid, T, x0, [phi],
                                                 mode=mode)
    curve = curves[phi]
    fit = measure.fit_order(curve)
    window = SLOPE_SECOND_ORDER if mode == "global" else SLOPE_THIRD_ORDER
    ok = _in_window(fit.slope, window)
    header = ["h", "error", "stderr"]
    rows = [[h, e, s] for h, e, s in zip(curve.hs, curve.errors, curve.stderrs)]
    summary = [("mode", mode), ("phi", phi_name), ("T", T),
               ("x0", ",".join(_fmt(v) for v in x0)),
               ("slope", fit.slope), ("r_squared", fit.r_squared),
               ("window", f"[{window[0]}, {window[1]}]")]
    return header, rows, summary, ok


def _exp_sigma_check(spec: ExperimentSpec):
    p = spec.params
    d = int(p.get("d", 4))
    trials = int(p.get("trials", 20))
    if d < 1:
        raise InputError(f"d={d} must be >= 1")
    if trials < 1:
        raise InputError(f"trials={trials} must be >= 1")
    rng = np.random.default_rng(spec.seed)
    header = ["trial", "d", "max_abs_diff", "trace_abs_diff"]
    rows = []
    worst_diff = 0.0
    worst_trace = 0.0
    for trial in range(trials):
        quad = random_quadratic(d, rng)
        x = rng.standard_normal(d)
        closed = sigma_closed_form(quad, x)
        enumerated = sigma_empirical(Coordinate(1), quad, x)
        diff = float(np.max(np.abs(closed - enumerated)))
        g = grad(quad, x)
        trace_gap = abs(float(np.trace(closed)) - (d - 1) * float(g @ g))
        rows.append([trial, d, diff, trace_gap])
        worst_diff = max(worst_diff, diff)
        worst_trace = max(worst_trace, trace_gap)
    ok = worst_diff < 1e-12 and worst_trace < 1e-10
    summary = [("d", d), ("trials", trials),
               ("max_abs_diff", worst_diff), ("trace_abs_diff", worst_trace),
               ("diff_tolerance", 1e-12), ("trace_tolerance", 1e-10)]
    return header, rows, summary, ok


def _exp_stability(spec: ExperimentSpec):
    p = spec.params
    A = p.get("matrix")
    A = parse_matrix(A) if isinstance(A, str) else (
        np.diag([1.0, 2.0]) if A is None else np.asarray(A, dtype=float))
    b = p.get("b")
    b = parse_vector(b) if isinstance(b, str) else b
    quad = Quadratic(A, b)
    x0 = p.get("x0")
    x0 = parse_vector(x0) if isinstance(x0, str) else (
        np.array([3.0, -2.0]) if x0 is None else np.asarray(x0, dtype=float))
    h = float(p.get("h", 0.1))
    T = float(p.get("T", 3.0))
    paths = int(p.get("paths", 10_000))
    delta = float(p.get("delta", h / 100.0))
    grid = int(p.get("grid", 30))
    report = measure.stability_experiment(
        quad, h, x0, T, paths, delta, spec.seed,
        grid_points=grid, workers=spec.workers)
    header = ["t", "msq", "stderr", "bound"]
    rows = [[t, m, s, bnd] for t, m, s, bnd in
            zip(report.times, report.msq, report.stderr, report.bound)]
    if report.applicable:
        verdict = "PASS" if report.passed else "FAIL"
        ok = report.passed
    else:
        verdict = "NO-CLAIM (h exceeds h_max; bound not guaranteed)"
        ok = True  # correctly reported as outside the guaranteed regime
    summary = [("alpha", report.alpha), ("h", h), ("h_max", report.h_max),
               ("applicable", report.applicable),
               ("initial_msq", report.initial_msq),
               ("paths", paths), ("inner_step", delta),
               ("fitted_rate", report.fitted_rate),
               ("required_rate", report.alpha - 0.1 * abs(report.alpha)),
               ("bound_ok", report.bound_ok), ("rate_ok", report.rate_ok),
               ("verdict", verdict)]
    return header, rows, summary, ok


_HANDLERS = {
    "ode-order": _exp_ode_order,
    "ode-trajectory": _exp_ode_trajectory,
    "ou-weak-order": _exp_ou_weak_order,
    "optimizer-weak-order": _exp_optimizer_weak_order,
    "sigma-check": _exp_sigma_check,
    "stability": _exp_stability,
}

_ALLOWED_KEYS = {
    "ode-order": {"method", "reference", "T", "p0", "q0", "h_grid"},
    "ode-trajectory": {"h", "T", "p0", "q0"},
    "ou-weak-order": {"method", "reference", "gamma", "sigma", "x0", "T", "h_grid"},
    "optimizer-weak-order": {"matrix", "x0", "T", "mode", "phi", "h_grid"},
    "sigma-check": {"d", "trials"},
    "stability": {"matrix", "b", "x0", "h", "T", "paths", "delta", "grid"},
}


def run_experiment(spec: ExperimentSpec) -> int:
    """Execute one named experiment; write its CSV and print the summary."""
    if spec.name not in _HANDLERS:
        raise InputError(f"unknown experiment {spec.name!r}")
    unknown = set(spec.params) - _ALLOWED_KEYS[spec.name]
    if unknown:
        raise InputError(f"unknown parameters for {spec.name}: {sorted(unknown)}")
    if spec.workers < 1:
        raise InputError(f"workers={spec.workers} must be >= 1")
    if spec.seed < 0:
        raise InputError(f"seed={spec.seed} must be >= 0")
    out = spec.out if spec.out is not None else Path("out") / f"{spec.name}.csv"

    start = time.perf_counter()
    header, rows, summary, check_ok = _HANDLERS[spec.name](spec)
    write_csv(Path(out), header, rows)
    elapsed = time.perf_counter() - start

    print(f"experiment: {spec.name}")
    for key, value in summary:
        print(f"  {key}: {_fmt(value)}")
    print(f"  seed: {spec.seed}")
    print(f"  csv: {out}")
    print(f"  wall_time_s: {elapsed:.3f}")
    if spec.check:
        verdict = "PASS" if check_ok else "FAIL"
        print(f"  check: {verdict}")
        return 0 if check_ok else 4
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modeq",
        description="Modified-equation experiments for stochastic optimizers.")
    sub = parser.add_subparsers(dest="experiment", required=True)

    def common(sp):
        sp.add_argument("--out", type=Path, default=None,
                        help="output CSV path (default ./out/<name>.csv)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--check", action="store_true",
                        help="exit 4 unless the acceptance window holds")

    sp = sub.add_parser("ode-order", help="oscillator global-error order fit")
    sp.add_argument("--method", choices=sorted(_ODE_METHODS), default="euler")
    sp.add_argument("--reference", choices=["exact", "modified"], default="exact")
    sp.add_argument("--T", type=float, default=15.0)
    sp.add_argument("--p0", type=float, default=1.0)
    sp.add_argument("--q0", type=float, default=0.0)
    sp.add_argument("--h-grid", dest="h_grid", type=str, default=None)
    common(sp)

    sp = sub.add_parser("ode-trajectory", help="oscillator trajectories + energy laws")
    sp.add_argument("--h", type=float, default=0.0375)
    sp.add_argument("--T", type=float, default=15.0)
    sp.add_argument("--p0", type=float, default=1.0)
    sp.add_argument("--q0", type=float, default=0.0)
    common(sp)

    sp = sub.add_parser("ou-weak-order", help="linear SDE weak-error order fit")
    sp.add_argument("--method", choices=sorted(_SDE_METHODS),
                    default="euler-maruyama")
    sp.add_argument("--reference", choices=["exact", "modified"], default="exact")
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--sigma", type=float, default=0.1)
    sp.add_argument("--x0", type=float, default=10.0)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--h-grid", dest="h_grid", type=str, default=None)
    common(sp)

    sp = sub.add_parser("optimizer-weak-order",
                        help="coordinate-descent chain vs its modified diffusion")
    sp.add_argument("--matrix", type=str, default="diag:1,2")
    sp.add_argument("--x0", type=str, default="1,1")
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--mode", choices=["global", "onestep"], default="global")
    sp.add_argument("--phi", type=str, default="x1sq")
    sp.add_argument("--h-grid", dest="h_grid", type=str, default=None)
    common(sp)

    sp = sub.add_parser("sigma-check",
                        help="closed-form vs enumerated estimator covariance")
    sp.add_argument("--d", type=int, default=4)
    sp.add_argument("--trials", type=int, default=20)
    common(sp)

    sp = sub.add_parser("stability", help="mean-square stability verdict")
    sp.add_argument("--matrix", type=str, default="diag:1,2")
    sp.add_argument("--b", type=str, default=None)
    sp.add_argument("--x0", type=str, default="3,-2")
    sp.add_argument("--h", type=float, default=0.1)
    sp.add_argument("--T", type=float, default=3.0)
    sp.add_argument("--paths", type=int, default=10_000)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--grid", type=int, default=30)
    common(sp)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    name = args.experiment
    reserved = {"experiment", "out", "seed", "workers", "check"}
    params = {k: v for k, v in vars(args).items()
              if k not in reserved and v is not None}
    if "h_grid" in params:
        params["h_grid"] = parse_grid(params["h_grid"])
    spec = ExperimentSpec(name=name, params=params, out=args.out,
                          seed=args.seed, workers=args.workers, check=args.check)
    try:
        return run_experiment(spec)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
