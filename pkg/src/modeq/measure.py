"""Error metrics, convergence-order fitting, Monte Carlo estimation, and the
mean-square stability experiment.

Wherever the problem is linear (the mean-reverting SDE family, quadratic
optimizer chains) weak errors are computed through exact moment recursions of
the numerical chain, so order fits carry no sampling noise.  Monte Carlo is
reserved for the stability experiment and cross-validation; its paths draw
from independent counter-based streams keyed by (master seed, path index) and
are reduced in path order, which makes every estimate bit-reproducible for a
fixed seed regardless of how many workers execute the paths.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .dynamics import (
    EULER,
    EULER_MARUYAMA,
    IMPLICIT_EULER,
    SdeProblem,
    SYMPLECTIC_EULER,
    build_modified_sde,
    evaluate_phi_moments,
    harmonic,
    harmonic_modified,
    ou,
    ou_modified,
)
from .errors import DivergenceError, InputError
from .estimator import Coordinate, enumerate_outcomes
from .integrate import (
    IMPLICIT_EULER_AFFINE,
    StepperConfig,
    Trajectory,
    run,
)
from .objective import Quadratic, constants

# Paths are simulated in fixed chunks of this size; the chunking is purely a
# memory/vectorization tradeoff and never affects results (each path draws
# from its own stream and reductions run in path order).
MC_CHUNK = 2048


@dataclass(frozen=True)
class ErrorCurve:
    """Error measurements over a strictly decreasing stepsize grid."""

    hs: np.ndarray
    errors: np.ndarray
    stderrs: np.ndarray

    def __post_init__(self):
        hs = np.asarray(self.hs, dtype=float)
        errors = np.asarray(self.errors, dtype=float)
        stderrs = np.asarray(self.stderrs, dtype=float)
        if not (hs.shape == errors.shape == stderrs.shape) or hs.ndim != 1:
            raise InputError("hs, errors and stderrs must be 1-d and equally long")
        if np.any(np.diff(hs) >= 0.0):
            raise InputError("stepsizes must be strictly decreasing")
        if not np.all(np.isfinite(errors)) or np.any(errors < 0.0):
            raise InputError("errors must be finite and >= 0")
        object.__setattr__(self, "hs", hs)
        object.__setattr__(self, "errors", errors)
        object.__setattr__(self, "stderrs", stderrs)


class OrderFit(NamedTuple):
    """Least-squares slope of log(error) against log(h)."""

    slope: float
    intercept: float
    r_squared: float


class McEstimate(NamedTuple):
    """Sample mean with normal-theory standard error."""

    mean: float
    stderr: float
    paths: int


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the mean-square stability check for the modified diffusion.

    alpha is the guaranteed decay rate 2 mu - h ((d-1) L**2 - K) and h_max
    the largest stepsize for which alpha stays positive.  The grid rows hold
    the estimated squared distance to the minimizer, its standard error and
    the bound exp(-alpha t) * |x0 - xstar|**2.  ``passed`` is claimed only
    when the configuration is within the guaranteed regime (h <= h_max), the
    bound holds at every grid point with a 3-standard-error allowance, and
    the fitted decay rate reaches 90% of alpha.
    """

    alpha: float
    h_max: float
    h: float
    applicable: bool
    times: np.ndarray
    msq: np.ndarray
    stderr: np.ndarray
    bound: np.ndarray
    initial_msq: float
    fitted_rate: float
    bound_ok: bool
    rate_ok: bool
    passed: bool
    paths: int
    inner_step: float
    delta_check_rel: Optional[float] = None


def global_error(numeric: Trajectory, exact: Callable[[float], np.ndarray]) -> float:
    """Euclidean distance between the final numeric state and exact(T)."""
    ref = np.asarray(exact(numeric.final_time), dtype=float)
    return float(np.linalg.norm(numeric.final_state - ref))


def fit_order(curve: ErrorCurve) -> OrderFit:
    """Fit log(error) = slope * log(h) + intercept by least squares."""
    if curve.hs.shape[0] < 3:
        raise InputError("order fitting needs at least 3 points")
    if np.any(curve.errors <= 0.0):
        raise InputError("order fitting needs strictly positive errors "
                         "(drop exact-zero points)")
    logh = np.log(curve.hs)
    loge = np.log(curve.errors)
    slope, intercept = np.polyfit(logh, loge, 1)
    pred = slope * logh + intercept
    ss_res = float(np.sum((loge - pred) ** 2))
    ss_tot = float(np.sum((loge - np.mean(loge)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return OrderFit(slope=float(slope), intercept=float(intercept), r_squared=r2)


def steps_for(T: float, h: float) -> int:
    """Step count n with n * h = T, rejecting non-divisible grids."""
    n = int(round(T / h))
    if n < 0 or abs(n * h - T) > 1e-9 * max(1.0, abs(T)):
        raise InputError(f"final time T={T} is not an integer multiple of h={h}")
    return n


# --- exact chain moment recursions -----------------------------------------

def ou_chain_moment(method: str, gamma: float, sigma: float, h: float,
                    x0: float, n: int, phi) -> float:
    """Exact E[x_n] or E[x_n**2] of the one-step chain on the linear SDE.

    Explicit:  x' = (1 - gamma h) x + sigma sqrt(h) xi
    Implicit:  x' = (x + sigma sqrt(h) xi) / (1 + gamma h)
    """
    want_second = phi in ("x2", ("xx", 0, 0))
    if not want_second and phi not in ("x", ("x", 0)):
        raise InputError(f"unsupported test function {phi!r}")
    if method == EULER_MARUYAMA:
        a, noise = 1.0 - gamma * h, sigma * sigma * h
        mean_factor, sq_factor = a, a * a
        add = noise
    elif method in (IMPLICIT_EULER, IMPLICIT_EULER_AFFINE):
        r = 1.0 / (1.0 + gamma * h)
        mean_factor, sq_factor = r, r * r
        add = sigma * sigma * h * r * r
    else:
        raise InputError(f"unknown chain method {method!r}")
    if not want_second:
        return x0 * mean_factor**n
    m = x0 * x0
    for _ in range(n):
        m = sq_factor * m + add
    return m


def coordinate_chain_moments(quad: Quadratic, h: float, x0,
                             n: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact (E x_n, E x_n x_n') of the single-coordinate descent chain.

    The chain x' = x - h d P_w (A x + b), with P_w projecting onto a uniform
    random axis, closes over first and second moments:

      m' = (I - h A) m - h b
      S' = S - h (A S + S A + b m' + m b') + h**2 d diag(E[g g'])

    with E[g g'] = A S A + A m b' + b m' A + b b'.
    """
    A, b = quad.A, quad.b
    d = quad.dimension
    m = np.asarray(x0, dtype=float).copy()
    if m.shape != (d,):
        raise InputError(f"x0 must have shape ({d},), got {m.shape}")
    S = np.outer(m, m)
    eye_minus = np.eye(d) - h * A
    for _ in range(n):
        Am = A @ m
        G = A @ S @ A + np.outer(Am, b) + np.outer(b, Am) + np.outer(b, b)
        S = (S - h * (A @ S + S @ A + np.outer(b, m) + np.outer(m, b))
             + (h * h * d) * np.diag(np.diag(G)))
        m = eye_minus @ m - h * b
    return m, 0.5 * (S + S.T)


def enumerated_step_moments(kind, obj, x0, h: float) -> tuple[np.ndarray, np.ndarray]:
    """(E x_1, E x_1 x_1') after one optimizer step, by outcome enumeration."""
    x0 = np.asarray(x0, dtype=float)
    dist = enumerate_outcomes(kind, obj, x0)
    x1 = x0[None, :] - h * dist.values
    m = dist.probabilities @ x1
    S = (x1 * dist.probabilities[:, None]).T @ x1
    return m, 0.5 * (S + S.T)


# --- weak error -------------------------------------------------------------

def weak_error(config: StepperConfig, prob: SdeProblem, x0, T: float, phi,
               reference: Optional[SdeProblem] = None, mode: str = "recursion",
               paths: int = 0, master_seed: int = 0, workers: int = 1):
    """|E phi(X(T)) - E phi(x_n)| for a one-step chain against exact moments.

    The reference moments default to the problem's own; passing a different
    problem (e.g. the method's modified equation) measures the chain against
    that solution instead.  In recursion mode (linear problems only) the
    chain moment is exact and a plain float is returned; in Monte Carlo mode
    an :class:`McEstimate` of the error carries the sampling stderr.
    """
    n = steps_for(T, config.h)
    if n != config.steps:
        raise InputError(f"config.steps={config.steps} but T/h={n}")
    ref = reference if reference is not None else prob
    if ref.exact_moments is None:
        raise InputError("reference problem supplies no exact moments")
    x0_arr = np.atleast_1d(np.asarray(x0, dtype=float))
    exact_val = ref.exact_moments(x0_arr, T, phi)

    if mode == "recursion":
        if prob.affine is None or prob.dimension != 1:
            raise InputError("recursion mode needs a 1-d problem with affine drift")
        gamma = float(prob.affine[0][0, 0])
        sigma = float(np.asarray(prob.diffusion(x0_arr))[0, 0])
        chain_val = ou_chain_moment(config.method, gamma, sigma, config.h,
                                    float(x0_arr[0]), n, phi)
        return abs(exact_val - chain_val)
    if mode == "mc":
        est = monte_carlo_moment(prob, config, x0_arr, T, phi, paths, master_seed,
                                 workers=workers)
        return McEstimate(mean=abs(exact_val - est.mean), stderr=est.stderr,
                          paths=est.paths)
    raise InputError(f"unknown mode {mode!r}")


# --- Monte Carlo engine ------------------------------------------------------

def path_rng(master_seed: int, path_index: int) -> np.random.Generator:
    """Independent counter-based stream for one path.

    Distinct Philox keys per (seed, path) give non-overlapping streams whose
    draws do not depend on chunking or worker scheduling.
    """
    key = (int(master_seed) << 64) | int(path_index)
    return np.random.Generator(np.random.Philox(key=key))


def _phi_values(phi, X: np.ndarray) -> np.ndarray:
    if callable(phi):
        return np.asarray(phi(X), dtype=float)
    if isinstance(phi, tuple) and len(phi) == 2 and phi[0] == "x":
        return X[:, phi[1]]
    if phi == "x" and X.shape[1] == 1:
        return X[:, 0]
    if isinstance(phi, tuple) and len(phi) == 3 and phi[0] == "xx":
        return X[:, phi[1]] * X[:, phi[2]]
    if phi == "x2" and X.shape[1] == 1:
        return X[:, 0] ** 2
    raise InputError(f"unsupported test function {phi!r}")


def _batch_drift(prob: SdeProblem):
    if prob.drift_batch is not None:
        return prob.drift_batch
    return lambda X: np.array([prob.drift(x) for x in X])


def _batch_diffusion(prob: SdeProblem):
    if prob.diffusion_batch is not None:
        return prob.diffusion_batch
    return lambda X: np.array([prob.diffusion(x) for x in X])


def _simulate_paths(prob: SdeProblem, method: str, h: float, steps: int,
                    x0: np.ndarray, start: int, stop: int, master_seed: int,
                    record_at: Optional[np.ndarray] = None
                    ) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Advance paths [start, stop); return final states and recorded states.

    Each path's normals come from its own stream, drawn as one
    (steps, noise_dim) block and consumed row by row.
    """
    count = stop - start
    d, m = prob.dimension, prob.noise_dim
    normals = np.empty((steps, count, m))
    for i in range(count):
        normals[:, i, :] = path_rng(master_seed, start + i).standard_normal((steps, m))

    driftb = _batch_drift(prob)
    diffb = _batch_diffusion(prob)
    sqrt_h = math.sqrt(h)
    X = np.tile(np.asarray(x0, dtype=float), (count, 1))

    solve_mat = None
    if method == IMPLICIT_EULER_AFFINE:
        if prob.affine is None:
            raise InputError("implicit stepping needs declared affine drift")
        M, c = prob.affine
        solve_mat = np.linalg.inv(np.eye(d) + h * M)
        affine_c = c
    elif method != EULER_MARUYAMA:
        raise InputError(f"Monte Carlo supports explicit/implicit one-step "
                         f"chains, not {method!r}")

    recorded = None
    rec_pos = {}
    if record_at is not None:
        recorded = np.empty((count, len(record_at), d))
        rec_pos = {int(s): k for k, s in enumerate(record_at)}

    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(steps):
            noise = np.einsum("nij,nj->ni", diffb(X), normals[step])
            if method == EULER_MARUYAMA:
                X = X + h * driftb(X) + sqrt_h * noise
            else:
                X = (X + h * affine_c + sqrt_h * noise) @ solve_mat.T
            if not np.all(np.isfinite(X)):
                bad = int(np.where(~np.isfinite(X).all(axis=1))[0][0])
                raise DivergenceError(
                    f"path {start + bad} diverged at step {step + 1}",
                    step_index=step + 1, path_index=start + bad,
                )
            k = rec_pos.get(step + 1)
            if k is not None:
                recorded[:, k, :] = X
    return X, recorded


def _run_chunks(task, n_paths: int, workers: int, chunk: int = MC_CHUNK) -> list:
    """Run task(start, stop) over fixed path chunks; results in chunk order."""
    bounds = [(s, min(s + chunk, n_paths)) for s in range(0, n_paths, chunk)]
    if workers <= 1 or len(bounds) == 1:
        return [task(s, e) for s, e in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: task(*b), bounds))


def monte_carlo_moment(prob: SdeProblem, config: StepperConfig, x0, T: float,
                       phi, paths: int, master_seed: int,
                       workers: int = 1) -> McEstimate:
    """Estimate E[phi(X(T))] by simulating the configured chain.

    Bit-reproducible for fixed (seed, paths): per-path streams are derived
    from (master_seed, path index) and the reduction runs in path order no
    matter how many workers execute the chunks.
    """
    if paths < 2:
        raise InputError(f"paths={paths} must be >= 2")
    n = steps_for(T, config.h)
    if n != config.steps:
        raise InputError(f"config.steps={config.steps} but T/h={n}")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))

    def task(start, stop):
        final, _ = _simulate_paths(prob, config.method, config.h, n, x0,
                                   start, stop, master_seed)
        return _phi_values(phi, final)

    values = np.concatenate(_run_chunks(task, paths, workers))
    if np.all(values == values[0]):
        # identical samples (noise-free problem): zero variance by definition,
        # without the 1-ulp artifact of subtracting a rounded mean
        return McEstimate(mean=float(values[0]), stderr=0.0, paths=paths)
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(paths))
    return McEstimate(mean=mean, stderr=stderr, paths=paths)


# --- stability experiment ----------------------------------------------------

def stability_experiment(obj: Quadratic, h: float, x0, T: float, paths: int,
                         inner_step: float, master_seed: int,
                         grid_points: int = 30, workers: int = 1,
                         delta_check: bool = False) -> StabilityReport:
    """Check the guaranteed mean-square contraction of the modified diffusion.

    Simulates the single-coordinate modified SDE with the explicit scheme at
    ``inner_step`` and compares the estimated E|X(t) - xstar|**2 on a uniform
    grid against exp(-alpha t) |x0 - xstar|**2, where
    alpha = 2 mu - h ((d - 1) L**2 - K).  When h exceeds
    h_max = 2 mu / ((d - 1) L**2 - K) the guarantee does not apply; the
    experiment still runs and reports, but never claims a pass.
    """
    if not isinstance(obj, Quadratic):
        raise InputError("stability experiment requires a quadratic objective")
    if inner_step > h / 100.0 + 1e-15:
        raise InputError(f"inner step {inner_step} must be <= h/100 = {h / 100.0}")
    if grid_points < 2:
        raise InputError("need at least 2 grid points")

    cc = constants(obj)
    d = obj.dimension
    denom = (d - 1) * cc.L**2 - cc.K
    alpha = 2.0 * cc.mu - h * denom
    h_max = (2.0 * cc.mu / denom) if denom > 0.0 else math.inf
    applicable = h <= h_max
    if not applicable:
        warnings.warn(
            f"stepsize h={h} exceeds the guaranteed range h_max={h_max:g}; "
            "the report will not claim a pass", stacklevel=2)

    msde = build_modified_sde(obj, Coordinate(1), h)
    xstar = obj.minimizer
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (d,):
        raise InputError(f"x0 must have shape ({d},), got {x0.shape}")
    initial_msq = float(np.sum((x0 - xstar) ** 2))

    n_steps = steps_for(T, inner_step)
    times = np.arange(1, grid_points + 1) * (T / grid_points)
    record_at = np.array([int(round(t / inner_step)) for t in times])
    if np.any(np.abs(record_at * inner_step - times) > 1e-9):
        raise InputError("grid times must align with the inner step")

    def task(start, stop):
        _, rec = _simulate_paths(msde, EULER_MARUYAMA, inner_step, n_steps, x0,
                                 start, stop, master_seed, record_at=record_at)
        return np.sum((rec - xstar) ** 2, axis=2)

    per_path = np.concatenate(_run_chunks(task, paths, workers))
    msq = per_path.mean(axis=0)
    stderr = per_path.std(axis=0, ddof=1) / math.sqrt(paths)
    bound = np.exp(-alpha * times) * initial_msq

    if initial_msq == 0.0:
        bound_ok, rate_ok, fitted_rate = True, True, math.inf
    else:
        bound_ok = bool(np.all(msq <= bound + 3.0 * stderr + 1e-12))
        if np.all(msq > 0.0):
            slope, _ = np.polyfit(times, np.log(msq), 1)
            fitted_rate = -float(slope)
        else:
            fitted_rate = math.nan
        rate_ok = bool(fitted_rate >= alpha - 0.1 * abs(alpha))

    delta_check_rel = None
    if delta_check:
        delta_check_rel = stability_delta_bias(
            obj, h, x0, T, min(paths, 1000), inner_step, master_seed,
            grid_points=grid_points)

    return StabilityReport(
        alpha=alpha, h_max=h_max, h=h, applicable=applicable,
        times=times, msq=msq, stderr=stderr, bound=bound,
        initial_msq=initial_msq, fitted_rate=fitted_rate,
        bound_ok=bound_ok, rate_ok=rate_ok,
        passed=bool(applicable and bound_ok and rate_ok),
        paths=paths, inner_step=inner_step, delta_check_rel=delta_check_rel,
    )


def stability_delta_bias(obj: Quadratic, h: float, x0, T: float, paths: int,
                         inner_step: float, master_seed: int,
                         grid_points: int = 30) -> float:
    """Max relative change of the grid means when the inner step is halved.

    Both resolutions are driven by the same Brownian paths (the coarse run
    sums consecutive fine increments), so the comparison isolates the
    discretization bias instead of sampling noise.
    """
    msde = build_modified_sde(obj, Coordinate(1), h)
    d = msde.dimension
    xstar = obj.minimizer
    x0 = np.asarray(x0, dtype=float)
    n_coarse = steps_for(T, inner_step)
    times = np.arange(1, grid_points + 1) * (T / grid_points)
    rec_coarse = {int(round(t / inner_step)): k for k, t in enumerate(times)}
    rec_fine = {2 * s: k for s, k in rec_coarse.items()}

    driftb = _batch_drift(msde)
    diffb = _batch_diffusion(msde)
    sqrt_h = math.sqrt(h)

    def one_chunk(start, stop):
        count = stop - start
        fine = np.empty((2 * n_coarse, count, d))
        for i in range(count):
            fine[:, i, :] = path_rng(master_seed, start + i).standard_normal(
                (2 * n_coarse, d))
        coarse = (fine[0::2] + fine[1::2]) / math.sqrt(2.0)

        def advance(normals, dt, rec_map):
            X = np.tile(x0, (count, 1))
            out = np.empty((count, grid_points))
            sqrt_dt = math.sqrt(dt)
            for step in range(normals.shape[0]):
                noise = np.einsum("nij,nj->ni", diffb(X), normals[step])
                X = X + dt * driftb(X) + sqrt_dt * noise
                k = rec_map.get(step + 1)
                if k is not None:
                    out[:, k] = np.sum((X - xstar) ** 2, axis=1)
            return out

        return (advance(coarse, inner_step, rec_coarse),
                advance(fine, 0.5 * inner_step, rec_fine))

    results = _run_chunks(one_chunk, paths, 1)
    coarse_msq = np.concatenate([r[0] for r in results]).mean(axis=0)
    fine_msq = np.concatenate([r[1] for r in results]).mean(axis=0)
    scale = np.maximum(np.abs(fine_msq), 1e-300)
    return float(np.max(np.abs(coarse_msq - fine_msq) / scale))


# --- curve builders for the standard experiments -----------------------------

def harmonic_error_curve(method: str, reference: str, h_grid: Sequence[float],
                         T: float, x0) -> ErrorCurve:
    """Global-error curve of an oscillator chain against an exact flow.

    ``reference`` is "exact" (the base oscillator) or "modified" (the
    method's own modified equation, which the chain tracks one order
    better).
    """
    if method not in (EULER, SYMPLECTIC_EULER):
        raise InputError(f"unknown method {method!r}")
    base = harmonic()
    x0 = np.asarray(x0, dtype=float)
    errors = []
    for h in h_grid:
        n = steps_for(T, h)
        traj = run(base, StepperConfig(method=method, h=h, steps=n), x0)
        if reference == "exact":
            ref_prob = base
        elif reference == "modified":
            ref_prob = harmonic_modified(method, h)
        else:
            raise InputError(f"unknown reference {reference!r}")
        errors.append(global_error(traj, lambda t: ref_prob.exact(x0, t)))
    return ErrorCurve(np.asarray(h_grid, dtype=float), np.asarray(errors),
                      np.zeros(len(errors)))


def ou_weak_error_curve(method: str, reference: str, h_grid: Sequence[float],
                        T: float, x0: float, gamma: float, sigma: float,
                        phi="x2") -> ErrorCurve:
    """Weak-error curve of a chain on the linear SDE, recursion mode."""
    if method not in (EULER_MARUYAMA, IMPLICIT_EULER_AFFINE):
        raise InputError(f"unknown method {method!r}")
    base = ou(gamma, sigma)
    errors = []
    for h in h_grid:
        n = steps_for(T, h)
        if reference == "exact":
            ref = None
        elif reference == "modified":
            mod_name = EULER_MARUYAMA if method == EULER_MARUYAMA else IMPLICIT_EULER
            ref = ou_modified(mod_name, gamma, sigma, h)
        else:
            raise InputError(f"unknown reference {reference!r}")
        err = weak_error(StepperConfig(method=method, h=h, steps=n), base,
                         np.array([x0]), T, phi, reference=ref, mode="recursion")
        errors.append(err)
    return ErrorCurve(np.asarray(h_grid, dtype=float), np.asarray(errors),
                      np.zeros(len(errors)))


def optimizer_weak_error_curves(quad: Quadratic, h_grid: Sequence[float],
                                T: float, x0, phis: Sequence,
                                mode: str = "global") -> dict:
    """Weak-error curves of the coordinate-descent chain vs its modified SDE.

    mode "global": exact chain moments after T/h steps against the moment
    oracle at T (expected second order).  mode "onestep": enumerated moments
    after a single step against the oracle at t=h (expected third order).
    All test functions share one moment integration per stepsize.
    """
    if mode not in ("global", "onestep"):
        raise InputError(f"unknown mode {mode!r}")
    x0 = np.asarray(x0, dtype=float)
    errs = {phi: [] for phi in phis}
    from .dynamics import moment_state

    for h in h_grid:
        msde = build_modified_sde(quad, Coordinate(1), h)
        if mode == "global":
            n = steps_for(T, h)
            m_chain, S_chain = coordinate_chain_moments(quad, h, x0, n)
            m_sde, S_sde = moment_state(msde, x0, T)
        else:
            m_chain, S_chain = enumerated_step_moments(Coordinate(1), quad, x0, h)
            m_sde, S_sde = moment_state(msde, x0, h)
        for phi in phis:
            chain_val = evaluate_phi_moments(phi, m_chain, S_chain)
            sde_val = evaluate_phi_moments(phi, m_sde, S_sde)
            errs[phi].append(abs(chain_val - sde_val))
    hs = np.asarray(h_grid, dtype=float)
    return {phi: ErrorCurve(hs, np.asarray(v), np.zeros(len(v)))
            for phi, v in errs.items()}
