"""Unbiased stochastic gradient estimators and their noise covariance.

An estimator kind describes how a random surrogate for the full gradient is
drawn: a minibatch of component gradients, a rescaled random coordinate, or a
random coordinate paired with its own Lipschitz constant.  Every kind has a
finite outcome space, so unbiasedness and the covariance

    Sigma(x) = E[(ghat - g)(ghat - g)'],   g = gradient(x)

can be checked by exact enumeration rather than by sampling.  For the
single-coordinate estimator the covariance collapses to the closed form
``d * diag(g**2) - outer(g, g)``, whose trace is ``(d - 1) * |g|**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import NamedTuple, Union

import numpy as np

from .errors import CapacityError, DomainError, InputError
from .objective import SumObjective, grad

MAX_OUTCOMES = 10**6

# Negative eigenvalues with magnitude up to PSD_RTOL * lambda_max are treated
# as roundoff and clamped to zero; anything more negative is rejected.
PSD_RTOL = 1e-10


@dataclass(frozen=True)
class Minibatch:
    """Mean of the component gradients over a random size-m subset of terms."""

    m: int
    with_replacement: bool = False


@dataclass(frozen=True)
class Coordinate:
    """(d/m) * sum of m randomly chosen partial derivatives on their axes."""

    m: int = 1


@dataclass(frozen=True)
class LipschitzCoordinate:
    """Single random coordinate, stepped with its own constant 1/(d*L_i)."""

    lipschitz: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lipschitz", tuple(float(v) for v in self.lipschitz))
        if any(v <= 0.0 for v in self.lipschitz):
            raise InputError("all per-coordinate Lipschitz constants must be > 0")


EstimatorKind = Union[Minibatch, Coordinate, LipschitzCoordinate]


class CoordinateDraw(NamedTuple):
    """One Lipschitz-coordinate draw: chosen axis and its raw partial derivative.

    The optimizer consumes this with stepsize 1/(d * L_index); the estimator
    value it represents is ``d * partial * e_index``.
    """

    index: int
    partial: float

    def estimator_value(self, d: int) -> np.ndarray:
        v = np.zeros(d)
        v[self.index] = d * self.partial
        return v


class OutcomeDistribution(NamedTuple):
    """Full finite distribution of estimator values at a fixed point.

    probabilities -- shape (K,), summing to 1
    values        -- shape (K, d), one estimator draw per outcome
    """

    probabilities: np.ndarray
    values: np.ndarray

    def mean(self) -> np.ndarray:
        return self.probabilities @ self.values

    def covariance(self, center: np.ndarray | None = None) -> np.ndarray:
        """Probability-weighted covariance of the values about ``center``.

        ``center`` defaults to the distribution mean; passing the exact
        gradient makes this the estimator noise covariance.
        """
        c = self.mean() if center is None else np.asarray(center, dtype=float)
        dev = self.values - c
        return (dev * self.probabilities[:, None]).T @ dev


def _validate_coordinate_m(m: int, d: int):
    if not 1 <= m <= d:
        raise InputError(f"coordinate subset size m={m} must satisfy 1 <= m <= {d}")


def _validate_minibatch(kind: Minibatch, obj) -> SumObjective:
    if not isinstance(obj, SumObjective):
        raise InputError("Minibatch estimators require a SumObjective")
    if not 1 <= kind.m <= obj.n_terms:
        raise InputError(
            f"minibatch size m={kind.m} must satisfy 1 <= m <= {obj.n_terms}"
        )
    return obj


def sample(kind: EstimatorKind, obj, x, rng: np.random.Generator):
    """Draw one realization of the gradient estimator at x.

    Returns the estimator vector, except for :class:`LipschitzCoordinate`
    where the (axis, partial-derivative) pair is returned because the step
    size depends on the drawn axis.
    """
    x = np.asarray(x, dtype=float)
    d = obj.dimension
    if x.shape != (d,):
        raise InputError(f"x must have shape ({d},), got {x.shape}")

    if isinstance(kind, Minibatch):
        sobj = _validate_minibatch(kind, obj)
        if kind.with_replacement:
            idx = rng.integers(0, sobj.n_terms, size=kind.m)
        else:
            idx = rng.choice(sobj.n_terms, size=kind.m, replace=False)
        out = np.zeros(d)
        # summing in index order keeps the value independent of draw order
        for i in sorted(int(i) for i in idx):
            out += sobj.term_gradient(i, x)
        return out / kind.m

    if isinstance(kind, Coordinate):
        _validate_coordinate_m(kind.m, d)
        g = grad(obj, x)
        if kind.m == 1:
            w = int(rng.integers(0, d))
            out = np.zeros(d)
            out[w] = d * g[w]
            return out
        idx = rng.choice(d, size=kind.m, replace=False)
        out = np.zeros(d)
        out[idx] = (d / kind.m) * g[idx]
        return out

    if isinstance(kind, LipschitzCoordinate):
        if len(kind.lipschitz) != d:
            raise InputError(
                f"lipschitz vector has length {len(kind.lipschitz)}, expected {d}"
            )
        g = grad(obj, x)
        w = int(rng.integers(0, d))
        return CoordinateDraw(index=w, partial=float(g[w]))

    raise InputError(f"unknown estimator kind: {kind!r}")


def enumerate_outcomes(kind: EstimatorKind, obj, x) -> OutcomeDistribution:
    """Exact outcome distribution of the estimator at x.

    Raises :class:`CapacityError` when the outcome space exceeds 10**6.
    """
    x = np.asarray(x, dtype=float)
    d = obj.dimension
    if x.shape != (d,):
        raise InputError(f"x must have shape ({d},), got {x.shape}")

    if isinstance(kind, Minibatch):
        sobj = _validate_minibatch(kind, obj)
        n, m = sobj.n_terms, kind.m
        term_grads = np.array([sobj.term_gradient(i, x) for i in range(n)])
        if kind.with_replacement:
            count = n**m
            if count > MAX_OUTCOMES:
                raise CapacityError(f"{n}^{m} = {count} outcomes exceed {MAX_OUTCOMES}")
            values = np.array(
                [term_grads[list(w)].mean(axis=0) for w in product(range(n), repeat=m)]
            )
        else:
            count = math.comb(n, m)
            if count > MAX_OUTCOMES:
                raise CapacityError(
                    f"C({n},{m}) = {count} outcomes exceed {MAX_OUTCOMES}"
                )
            values = np.array(
                [term_grads[list(w)].mean(axis=0) for w in combinations(range(n), m)]
            )
        probs = np.full(len(values), 1.0 / len(values))
        return OutcomeDistribution(probs, values)

    if isinstance(kind, Coordinate):
        _validate_coordinate_m(kind.m, d)
        g = grad(obj, x)
        count = math.comb(d, kind.m)
        if count > MAX_OUTCOMES:
            raise CapacityError(f"C({d},{kind.m}) = {count} outcomes exceed {MAX_OUTCOMES}")
        values = np.zeros((count, d))
        for k, w in enumerate(combinations(range(d), kind.m)):
            idx = list(w)
            values[k, idx] = (d / kind.m) * g[idx]
        probs = np.full(count, 1.0 / count)
        return OutcomeDistribution(probs, values)

    if isinstance(kind, LipschitzCoordinate):
        if len(kind.lipschitz) != d:
            raise InputError(
                f"lipschitz vector has length {len(kind.lipschitz)}, expected {d}"
            )
        g = grad(obj, x)
        values = d * np.diag(g)
        probs = np.full(d, 1.0 / d)
        return OutcomeDistribution(probs, values)

    raise InputError(f"unknown estimator kind: {kind!r}")


def sigma_closed_form(obj, x) -> np.ndarray:
    """Noise covariance of the single-coordinate estimator, in closed form.

    With g the exact gradient, Sigma = d * diag(g**2) - outer(g, g).
    """
    g = grad(obj, x)
    d = g.shape[0]
    return d * np.diag(g * g) - np.outer(g, g)


def sigma_empirical(kind: EstimatorKind, obj, x) -> np.ndarray:
    """Noise covariance by exact outcome enumeration (not a sampling estimate)."""
    dist = enumerate_outcomes(kind, obj, x)
    return dist.covariance(center=grad(obj, x))


def validate_covariance(sigma, atol_sym: float = 1e-12) -> np.ndarray:
    """Check symmetry and PSD-ness (up to roundoff); return the array."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InputError(f"covariance must be square, got shape {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=0.0, atol=atol_sym):
        raise DomainError("covariance is not symmetric within 1e-12")
    eigvals = np.linalg.eigvalsh(0.5 * (sigma + sigma.T))
    floor = -PSD_RTOL * max(1.0, float(eigvals[-1]))
    if eigvals[0] < floor:
        raise DomainError(f"covariance is not PSD: smallest eigenvalue {eigvals[0]:g}")
    return sigma


def matrix_sqrt(sigma) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix.

    Eigenvalues inside the roundoff band are clamped to zero; eigenvalues
    below ``-1e-10 * lambda_max`` raise :class:`DomainError`.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InputError(f"matrix must be square, got shape {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-12):
        raise DomainError("matrix is not symmetric within 1e-12")
    eigvals, eigvecs = np.linalg.eigh(0.5 * (sigma + sigma.T))
    floor = -PSD_RTOL * max(1.0, float(eigvals[-1]))
    if eigvals[0] < floor:
        raise DomainError(f"matrix is not PSD: smallest eigenvalue {eigvals[0]:g}")
    clamped = np.clip(eigvals, 0.0, None)
    return (eigvecs * np.sqrt(clamped)) @ eigvecs.T


def sqrt_psd_batch(sigmas: np.ndarray) -> np.ndarray:
    """Principal square roots of a batch of symmetric PSD matrices.

    ``sigmas`` has shape (n, d, d).  The 2x2 case uses the trace/determinant
    closed form (sqrt(S) = (S + sqrt(det) I) / sqrt(tr + 2 sqrt(det))); other
    sizes fall back to a batched eigendecomposition.  Small negative
    eigenvalue/determinant roundoff is clamped to zero.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.ndim != 3 or sigmas.shape[1] != sigmas.shape[2]:
        raise InputError(f"expected shape (n, d, d), got {sigmas.shape}")
    d = sigmas.shape[1]

    if d == 1:
        return np.sqrt(np.clip(sigmas, 0.0, None))

    if d == 2:
        tr = sigmas[:, 0, 0] + sigmas[:, 1, 1]
        det = sigmas[:, 0, 0] * sigmas[:, 1, 1] - sigmas[:, 0, 1] * sigmas[:, 1, 0]
        s = np.sqrt(np.clip(det, 0.0, None))
        denom = np.sqrt(np.clip(tr + 2.0 * s, 0.0, None))
        out = sigmas + s[:, None, None] * np.eye(2)
        safe = denom > 0.0
        inv = np.zeros_like(denom)
        inv[safe] = 1.0 / denom[safe]
        # denom == 0 only when the matrix itself is (numerically) zero
        out *= inv[:, None, None]
        out[~safe] = 0.0
        return out

    eigvals, eigvecs = np.linalg.eigh(sigmas)
    clamped = np.sqrt(np.clip(eigvals, 0.0, None))
    return np.einsum("nik,nk,njk->nij", eigvecs, clamped, eigvecs)
