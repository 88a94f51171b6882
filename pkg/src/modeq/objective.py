"""Smooth objective functions with exact derivative and convexity-constant oracles.

Two first-class objectives are provided: :class:`Quadratic` (value, gradient,
Hessian and minimizer in closed form) and :class:`SumObjective` (the mean of N
component objectives, the form used by minibatch gradient estimators).  Any
object exposing ``dimension``, ``value(x)``, ``gradient(x)`` and ``hessian(x)``
works with the rest of the package.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, InputError

# Relative eigenvalue floor below which a symmetric matrix is rejected as
# not positive definite.
_PD_RTOL = 1e-12
_SYM_ATOL = 1e-12


class ConvexityConstants(NamedTuple):
    """Constants controlling contraction rates for a strongly convex objective.

    L  -- Lipschitz constant of the gradient (largest Hessian eigenvalue)
    mu -- strong-convexity constant (smallest Hessian eigenvalue)
    K  -- lower bound for the monotonicity of x -> hessian(x) @ gradient(x)
          (mu**2 for a quadratic)
    """

    L: float
    mu: float
    K: float


def _as_vector(x, d: int, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (d,):
        raise InputError(f"{name} must have shape ({d},), got {x.shape}")
    return x


class Quadratic:
    """F(x) = 0.5 x'Ax + b'x with A symmetric positive definite.

    The minimizer solves A x + b = 0.  Eigenvalues below ``1e-12 * lambda_max``
    cause rejection: convexity constants are meaningless for degenerate A.
    """

    def __init__(self, A, b=None):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InputError(f"A must be square, got shape {A.shape}")
        if not np.allclose(A, A.T, rtol=0.0, atol=_SYM_ATOL):
            raise DomainError("A must be symmetric (componentwise tolerance 1e-12)")
        d = A.shape[0]
        if b is None:
            b = np.zeros(d)
        b = _as_vector(b, d, "b")

        eigvals, eigvecs = np.linalg.eigh(0.5 * (A + A.T))
        if eigvals[-1] <= 0.0 or eigvals[0] <= _PD_RTOL * eigvals[-1]:
            raise DomainError(
                f"A is not positive definite: eigenvalue range [{eigvals[0]:g}, {eigvals[-1]:g}]"
            )

        self._A = A.copy()
        self._b = b.copy()
        self._A.flags.writeable = False
        self._b.flags.writeable = False
        self._eigvals = eigvals
        self._eigvecs = eigvecs
        self._minimizer = -np.linalg.solve(A, b)

    @property
    def A(self) -> np.ndarray:
        return self._A

    @property
    def b(self) -> np.ndarray:
        return self._b

    @property
    def dimension(self) -> int:
        return self._A.shape[0]

    @property
    def minimizer(self) -> np.ndarray:
        """The unique stationary point."""
        return self._minimizer.copy()

    def eigendecomposition(self) -> tuple[np.ndarray, np.ndarray]:
        """(eigenvalues ascending, orthonormal eigenvectors as columns) of A."""
        return self._eigvals.copy(), self._eigvecs.copy()

    def value(self, x) -> float:
        x = _as_vector(x, self.dimension)
        return float(0.5 * x @ self._A @ x + self._b @ x)

    def gradient(self, x) -> np.ndarray:
        x = _as_vector(x, self.dimension)
        return self._A @ x + self._b

    def hessian(self, x) -> np.ndarray:
        _as_vector(x, self.dimension)
        return self._A.copy()


class SumObjective:
    """The mean (1/N) * sum of N component objectives.

    Component gradients are what minibatch estimators sample; the aggregate
    value/gradient/hessian are the means of the component ones.
    """

    def __init__(self, terms: Sequence):
        terms = list(terms)
        if not terms:
            raise InputError("SumObjective needs at least one term")
        d = terms[0].dimension
        for i, t in enumerate(terms):
            if t.dimension != d:
                raise InputError(
                    f"term {i} has dimension {t.dimension}, expected {d}"
                )
        self.terms = terms
        self.n_terms = len(terms)
        self._d = d

    @property
    def dimension(self) -> int:
        return self._d

    def value(self, x) -> float:
        x = _as_vector(x, self._d)
        return sum(t.value(x) for t in self.terms) / self.n_terms

    def gradient(self, x) -> np.ndarray:
        x = _as_vector(x, self._d)
        g = np.zeros(self._d)
        for t in self.terms:
            g += t.gradient(x)
        return g / self.n_terms

    def hessian(self, x) -> np.ndarray:
        x = _as_vector(x, self._d)
        H = np.zeros((self._d, self._d))
        for t in self.terms:
            H += t.hessian(x)
        return H / self.n_terms

    def term_gradient(self, i: int, x) -> np.ndarray:
        """Gradient of the i-th component (not scaled by 1/N)."""
        return self.terms[i].gradient(_as_vector(x, self._d))


def grad(obj, x) -> np.ndarray:
    """Gradient of the objective at x."""
    return obj.gradient(x)


def hessian_grad(obj, x) -> np.ndarray:
    """hessian(x) @ gradient(x), i.e. half the gradient of |gradient|^2."""
    return obj.hessian(x) @ obj.gradient(x)


def constants(obj: Quadratic) -> ConvexityConstants:
    """Convexity constants (L, mu, K) = (lambda_max, lambda_min, lambda_min**2)."""
    if not isinstance(obj, Quadratic):
        raise InputError("constants() requires a Quadratic objective")
    eigvals, _ = obj.eigendecomposition()
    lo, hi = float(eigvals[0]), float(eigvals[-1])
    return ConvexityConstants(L=hi, mu=lo, K=lo * lo)


def random_quadratic(d: int, rng: np.random.Generator,
                     eig_range: tuple[float, float] = (0.5, 3.0),
                     with_offset: bool = True) -> Quadratic:
    """Random SPD quadratic: orthogonal basis, eigenvalues uniform in eig_range."""
    if d < 1:
        raise InputError("d must be >= 1")
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eigvals = rng.uniform(*eig_range, size=d)
    A = (q * eigvals) @ q.T
    A = 0.5 * (A + A.T)
    b = rng.standard_normal(d) if with_offset else np.zeros(d)
    return Quadratic(A, b)
