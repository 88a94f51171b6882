"""Catalog of dynamical systems: base equations, their stepsize-dependent
modified equations, and exact solution / exact moment oracles.

The modified equations carry the leading-order correction that a one-step
method actually follows: for the planar oscillator both the explicit and the
semi-implicit Euler variants, for the linear mean-reverting SDE the
Euler-Maruyama and implicit Euler variants, and for a general stochastic
optimization iteration the drift-corrected diffusion

    dX = -grad(F + (h/4) |grad F|^2) dt + sqrt(h) sqrt(Sigma(X)) dW,

whose diffusion is fed by the estimator noise covariance Sigma.  For
quadratic objectives with the single-coordinate estimator the first and
second moments of that diffusion satisfy a closed linear ODE system, which
:func:`moment_oracle` integrates to machine accuracy; this removes all Monte
Carlo noise from weak-order measurements.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InputError
from .estimator import (
    Coordinate,
    EstimatorKind,
    matrix_sqrt,
    sigma_closed_form,
    sigma_empirical,
    sqrt_psd_batch,
)
from .objective import Quadratic, grad, hessian_grad

EULER = "euler"
SYMPLECTIC_EULER = "symplectic_euler"
EULER_MARUYAMA = "euler_maruyama"
IMPLICIT_EULER = "implicit_euler"

# Test functions for moment oracles are addressed as ("x", i) for the i-th
# mean component and ("xx", i, j) for the (i, j) second moment.
PHI_MEAN = "x"
PHI_SECOND = "xx"


class OdeProblem:
    """An autonomous ODE dx/dt = drift(x) with an optional exact solution.

    ``exact(x0, t)`` returns the flow map when available.  ``pq_split``,
    when set, declares the cross-coupled structure drift(p, q) =
    (a(q), b(p)) required by the semi-implicit Euler update.
    """

    def __init__(self, drift: Callable, dimension: int,
                 exact: Optional[Callable] = None,
                 pq_split: Optional[tuple[Callable, Callable]] = None):
        self.drift = drift
        self.dimension = dimension
        self.exact = exact
        self.pq_split = pq_split


class SdeProblem:
    """An SDE dX = drift(X) dt + diffusion(X) dW with optional oracles.

    diffusion(x) returns a (dimension, noise_dim) matrix.  ``exact_moments``
    is a callable (x0, t, phi) -> float for the phi identifiers this problem
    supports.  ``affine`` declares drift(x) = -M x + c for implicit solves
    and exact chain recursions.  ``drift_batch`` / ``diffusion_batch``
    evaluate many states at once (rows of an (n, dimension) array) and exist
    for problems the Monte Carlo engine must integrate quickly.
    """

    def __init__(self, drift: Callable, diffusion: Callable, dimension: int,
                 noise_dim: int,
                 exact_moments: Optional[Callable] = None,
                 affine: Optional[tuple[np.ndarray, np.ndarray]] = None,
                 drift_batch: Optional[Callable] = None,
                 diffusion_batch: Optional[Callable] = None):
        self.drift = drift
        self.diffusion = diffusion
        self.dimension = dimension
        self.noise_dim = noise_dim
        self.exact_moments = exact_moments
        self.affine = affine
        self.drift_batch = drift_batch
        self.diffusion_batch = diffusion_batch


def hamiltonian(state) -> float:
    """Energy 0.5 p**2 + 0.5 q**2 of a planar oscillator state (p, q)."""
    p, q = float(state[0]), float(state[1])
    return 0.5 * (p * p + q * q)


def modified_hamiltonian(state, h: float) -> float:
    """The quadratic form 0.5 (p**2 + q**2) - (h/2) p q.

    Exactly conserved both by the semi-implicit Euler map with stepsize h
    and by its modified equation.
    """
    p, q = float(state[0]), float(state[1])
    return 0.5 * (p * p + q * q) - 0.5 * h * p * q


def harmonic() -> OdeProblem:
    """Planar oscillator dp/dt = q, dq/dt = -p with its rotation flow."""

    def drift(x):
        return np.array([x[1], -x[0]])

    def exact(x0, t):
        p0, q0 = float(x0[0]), float(x0[1])
        c, s = math.cos(t), math.sin(t)
        return np.array([p0 * c + q0 * s, -p0 * s + q0 * c])

    return OdeProblem(drift, 2, exact=exact,
                      pq_split=(lambda q: q, lambda p: -p))


def harmonic_modified(method: str, h: float) -> OdeProblem:
    """Modified oscillator equation followed (to second order) by a method.

    Explicit Euler:       dp/dt = q + (h/2) p,  dq/dt = -p + (h/2) q.
    Semi-implicit Euler:  dp/dt = q - (h/2) p,  dq/dt = -p + (h/2) q.

    Both flows have closed forms: the explicit variant is a rotation with
    radial growth exp(h t / 2) (so the energy grows like exp(h t)); the
    semi-implicit variant oscillates at frequency sqrt(1 - h**2/4) and
    conserves :func:`modified_hamiltonian` exactly.
    """
    if h <= 0.0:
        raise InputError(f"stepsize h={h} must be > 0")

    if method == EULER:
        mat = np.array([[0.5 * h, 1.0], [-1.0, 0.5 * h]])

        def exact(x0, t):
            c, s = math.cos(t), math.sin(t)
            rot = np.array([[c, s], [-s, c]])
            return math.exp(0.5 * h * t) * (rot @ np.asarray(x0, dtype=float))

    elif method == SYMPLECTIC_EULER:
        if h >= 2.0:
            raise InputError(
                f"semi-implicit modified equation needs h < 2, got h={h}"
            )
        mat = np.array([[-0.5 * h, 1.0], [-1.0, 0.5 * h]])
        omega = math.sqrt(1.0 - 0.25 * h * h)

        def exact(x0, t):
            c, s = math.cos(omega * t), math.sin(omega * t)
            flow = c * np.eye(2) + (s / omega) * mat
            return flow @ np.asarray(x0, dtype=float)

    else:
        raise InputError(f"unknown method {method!r}")

    return OdeProblem(lambda x: mat @ np.asarray(x, dtype=float), 2, exact=exact)


def _ou_problem(gamma: float, sigma: float) -> SdeProblem:
    def drift(x):
        return -gamma * np.asarray(x, dtype=float)

    def diffusion(x):
        return np.array([[sigma]])

    def exact_moments(x0, t, phi):
        x0 = float(np.asarray(x0).reshape(()) if np.ndim(x0) == 0 else np.asarray(x0)[0])
        if phi == PHI_MEAN or phi == (PHI_MEAN, 0):
            return x0 * math.exp(-gamma * t)
        if phi == "x2" or phi == (PHI_SECOND, 0, 0):
            decay = math.exp(-2.0 * gamma * t)
            return x0 * x0 * decay + (sigma * sigma) / (2.0 * gamma) * (1.0 - decay)
        raise InputError(f"unsupported test function {phi!r}")

    return SdeProblem(
        drift, diffusion, dimension=1, noise_dim=1,
        exact_moments=exact_moments,
        affine=(np.array([[gamma]]), np.zeros(1)),
        drift_batch=lambda X: -gamma * X,
        diffusion_batch=lambda X: np.full((X.shape[0], 1, 1), sigma),
    )


def ou(gamma: float, sigma: float) -> SdeProblem:
    """Linear mean-reverting SDE dX = -gamma X dt + sigma dW (1-d).

    Exact moments: E X(t) = x0 exp(-gamma t) and
    E X(t)**2 = x0**2 exp(-2 gamma t) + sigma**2/(2 gamma) (1 - exp(-2 gamma t)).
    """
    if gamma <= 0.0:
        raise InputError(f"gamma={gamma} must be > 0")
    if sigma < 0.0:
        raise InputError(f"sigma={sigma} must be >= 0")
    return _ou_problem(gamma, sigma)


def ou_modified(method: str, gamma: float, sigma: float, h: float) -> SdeProblem:
    """Modified equation a one-step method follows on the mean-reverting SDE.

    Both variants keep the linear structure with effective coefficients:
    Euler-Maruyama   gamma_eff = gamma + (h/2) gamma**2,
    implicit Euler   gamma_eff = gamma - (h/2) gamma**2,
    and in both cases sigma_eff = sigma (1 + gamma h / 2), so the exact
    moment formulas carry over with (gamma_eff, sigma_eff).
    """
    if gamma <= 0.0:
        raise InputError(f"gamma={gamma} must be > 0")
    if h <= 0.0:
        raise InputError(f"stepsize h={h} must be > 0")
    if method == EULER_MARUYAMA:
        gamma_eff = gamma + 0.5 * h * gamma * gamma
    elif method == IMPLICIT_EULER:
        gamma_eff = gamma - 0.5 * h * gamma * gamma
    else:
        raise InputError(f"unknown method {method!r}")
    if gamma_eff <= 0.0:
        raise DomainError(
            f"effective rate {gamma_eff:g} must be > 0 (method {method}, h={h})"
        )
    sigma_eff = sigma * (1.0 + 0.5 * gamma * h)
    return _ou_problem(gamma_eff, sigma_eff)


def gradient_flow(obj) -> OdeProblem:
    """dX/dt = -grad F(X); exact flow available for quadratic objectives."""

    def drift(x):
        return -grad(obj, x)

    exact = None
    if isinstance(obj, Quadratic):
        eigvals, eigvecs = obj.eigendecomposition()
        xstar = obj.minimizer

        def exact(x0, t):
            x0 = np.asarray(x0, dtype=float)
            coeffs = eigvecs.T @ (x0 - xstar)
            return xstar + eigvecs @ (np.exp(-eigvals * t) * coeffs)

    return OdeProblem(drift, obj.dimension, exact=exact)


class ModifiedSde(SdeProblem):
    """Stepsize-dependent diffusion followed by a stochastic optimizer.

    drift(x)     = -grad F(x) - (h/2) hessian(x) @ grad F(x)
    diffusion(x) = sqrt(h) * principal_sqrt(Sigma(x))

    with Sigma the estimator noise covariance; both vanish at the minimizer
    for the single-coordinate estimator, and at h = 0 the drift reduces to
    the plain gradient flow.
    """

    def __init__(self, obj, kind: EstimatorKind, h: float):
        if h <= 0.0:
            raise InputError(f"stepsize h={h} must be > 0")
        self.objective = obj
        self.estimator = kind
        self.stepsize = h
        d = obj.dimension
        closed_form = isinstance(kind, Coordinate) and kind.m == 1
        sqrt_h = math.sqrt(h)

        def sigma_at(x):
            if closed_form:
                return sigma_closed_form(obj, x)
            return sigma_empirical(kind, obj, x)

        def drift(x):
            return -grad(obj, x) - 0.5 * h * hessian_grad(obj, x)

        def diffusion(x):
            return sqrt_h * matrix_sqrt(sigma_at(x))

        affine = None
        drift_batch = None
        diffusion_batch = None
        if isinstance(obj, Quadratic):
            A, b = obj.A, obj.b
            M = A + 0.5 * h * (A @ A)
            affine = (M, -(b + 0.5 * h * (A @ b)))

            def drift_batch(X):
                g = X @ A + b
                return -g - 0.5 * h * (g @ A)

            if closed_form:

                def diffusion_batch(X):
                    g = X @ A + b
                    sig = -g[:, :, None] * g[:, None, :]
                    diag = np.arange(d)
                    sig[:, diag, diag] += d * g * g
                    return sqrt_h * sqrt_psd_batch(sig)

        super().__init__(
            drift, diffusion, dimension=d, noise_dim=d,
            affine=affine, drift_batch=drift_batch,
            diffusion_batch=diffusion_batch,
        )
        self.sigma = sigma_at


def build_modified_sde(obj, kind: EstimatorKind, h: float) -> ModifiedSde:
    """Construct the modified diffusion for an optimizer iteration."""
    return ModifiedSde(obj, kind, h)


# --- exact moment propagation for the modified diffusion -------------------
#
# For a quadratic objective with the single-coordinate estimator, the drift
# is affine and Sigma is quadratic in the state, so m(t) = E X and
# S(t) = E X X' satisfy a closed, constant-coefficient linear ODE system:
#
#   m' = -(M m + c)
#   S' = -M S - S M' - c m' - m c' + h (d diag(G) - G),
#        G = A S A + A m b' + b m' A + b b'
#
# with M = A + (h/2) A**2 and c = b + (h/2) A b.

def _moment_rhs(quad: Quadratic, h: float):
    A, b = quad.A, quad.b
    d = quad.dimension
    M = A + 0.5 * h * (A @ A)
    c = b + 0.5 * h * (A @ b)

    def rhs(y: np.ndarray) -> np.ndarray:
        m = y[:d]
        S = y[d:].reshape(d, d)
        Am = A @ m
        G = A @ S @ A + np.outer(Am, b) + np.outer(b, Am) + np.outer(b, b)
        dm = -(M @ m + c)
        dS = (-(M @ S + S @ M.T) - np.outer(c, m) - np.outer(m, c)
              + h * (d * np.diag(np.diag(G)) - G))
        return np.concatenate([dm, dS.ravel()])

    return rhs


def _affine_compress(rhs, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Represent an affine map y -> rhs(y) as (L, k) with rhs(y) = L y + k."""
    k = rhs(np.zeros(n))
    L = np.empty((n, n))
    eye = np.eye(n)
    for j in range(n):
        L[:, j] = rhs(eye[j]) - k
    return L, k


def _rk4_linear(L: np.ndarray, k: np.ndarray, y0: np.ndarray,
                t: float, n_steps: int) -> np.ndarray:
    dt = t / n_steps
    y = y0.copy()
    for _ in range(n_steps):
        k1 = L @ y + k
        k2 = L @ (y + 0.5 * dt * k1) + k
        k3 = L @ (y + 0.5 * dt * k2) + k
        k4 = L @ (y + dt * k3) + k
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def moment_state(msde: ModifiedSde, x0, t: float,
                 n_steps: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """Exact (mean, second moment matrix) of the modified diffusion at time t.

    Integrates the closed moment ODE system with a classical fourth-order
    method at a fixed step no larger than 1e-4 * t, then repeats at half the
    step and requires agreement to 1e-9 relative before returning the finer
    result.  Requires a quadratic objective and the single-coordinate
    estimator.
    """
    if not isinstance(msde.objective, Quadratic):
        raise InputError("moment propagation requires a quadratic objective")
    if not (isinstance(msde.estimator, Coordinate) and msde.estimator.m == 1):
        raise InputError("moment propagation requires the Coordinate(1) estimator")
    d = msde.dimension
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (d,):
        raise InputError(f"x0 must have shape ({d},), got {x0.shape}")
    if t < 0.0:
        raise InputError(f"t={t} must be >= 0")

    y0 = np.concatenate([x0, np.outer(x0, x0).ravel()])
    if t == 0.0:
        return x0.copy(), np.outer(x0, x0)

    n = d + d * d
    L, k = _affine_compress(_moment_rhs(msde.objective, msde.stepsize), n)
    n_coarse = max(int(n_steps), 10_000)  # keeps the step at or below 1e-4 * t
    y_coarse = _rk4_linear(L, k, y0, t, n_coarse)
    y_fine = _rk4_linear(L, k, y0, t, 2 * n_coarse)
    scale = max(1.0, float(np.max(np.abs(y_fine))))
    if float(np.max(np.abs(y_fine - y_coarse))) > 1e-9 * scale:
        raise RuntimeError(
            "moment integration failed its step-halving verification"
        )
    m = y_fine[:d]
    S = y_fine[d:].reshape(d, d)
    return m, 0.5 * (S + S.T)


def moment_oracle(msde: ModifiedSde, x0, t: float, phi) -> float:
    """E[phi(X(t))] for the modified diffusion, exact to integrator tolerance.

    ``phi`` is ("x", i) for the i-th mean component or ("xx", i, j) for the
    second moment E[X_i X_j].
    """
    m, S = moment_state(msde, x0, t)
    return evaluate_phi_moments(phi, m, S)


def evaluate_phi_moments(phi, m: np.ndarray, S: np.ndarray) -> float:
    """Evaluate a mean/second-moment test function on propagated moments."""
    d = m.shape[0]
    if isinstance(phi, tuple) and len(phi) == 2 and phi[0] == PHI_MEAN:
        i = phi[1]
        if not 0 <= i < d:
            raise InputError(f"component {i} out of range for dimension {d}")
        return float(m[i])
    if isinstance(phi, tuple) and len(phi) == 3 and phi[0] == PHI_SECOND:
        i, j = phi[1], phi[2]
        if not (0 <= i < d and 0 <= j < d):
            raise InputError(f"components {(i, j)} out of range for dimension {d}")
        return float(S[i, j])
    raise InputError(f"unsupported test function {phi!r}")
