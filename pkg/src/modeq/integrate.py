"""One-step integrators and the optimizer-as-timestepper adapters.

A :class:`StepperConfig` names the update rule, the stepsize and the step
count; :func:`run` repeats the corresponding one-step map and records the
whole trajectory.  Stochastic steps consume one standard normal vector (or
one estimator draw) per step from the generator they are handed, in step
order, so a fixed (seed, config) pair reproduces a trajectory bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import OdeProblem, SdeProblem
from .errors import DivergenceError, DomainError, InputError
from .estimator import CoordinateDraw, EstimatorKind, sample

EULER = "euler"
SYMPLECTIC_EULER = "symplectic_euler"
EULER_MARUYAMA = "euler_maruyama"
IMPLICIT_EULER_AFFINE = "implicit_euler_affine"
OPTIMIZER = "optimizer"

_METHODS = (EULER, SYMPLECTIC_EULER, EULER_MARUYAMA, IMPLICIT_EULER_AFFINE,
            OPTIMIZER)


@dataclass(frozen=True)
class StepperConfig:
    """Update rule plus stepsize h and step count; final time is steps * h."""

    method: str
    h: float
    steps: int
    estimator: Optional[EstimatorKind] = None

    def __post_init__(self):
        if self.method not in _METHODS:
            raise InputError(f"unknown method {self.method!r}; expected one of {_METHODS}")
        if self.h <= 0.0:
            raise InputError(f"stepsize h={self.h} must be > 0")
        if self.steps < 0:
            raise InputError(f"steps={self.steps} must be >= 0")
        if self.method == OPTIMIZER and self.estimator is None:
            raise InputError("optimizer stepping needs an estimator kind")

    @property
    def final_time(self) -> float:
        return self.steps * self.h


@dataclass(frozen=True)
class Trajectory:
    """Uniformly spaced times t_k = k * h and the recorded states."""

    times: np.ndarray
    states: np.ndarray

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])


def euler_step(prob: OdeProblem, x, h: float) -> np.ndarray:
    """Explicit Euler update x + h * drift(x)."""
    x = np.asarray(x, dtype=float)
    return x + h * np.asarray(prob.drift(x), dtype=float)


def symplectic_euler_step(prob: OdeProblem, x, h: float) -> np.ndarray:
    """Semi-implicit update: new q from old p, then new p from the new q.

    Requires the problem to declare its (a(q), b(p)) drift split; the update
    is q' = q + h b(p), p' = p + h a(q').
    """
    if prob.pq_split is None:
        raise InputError("semi-implicit Euler needs a problem with a p/q drift split")
    a, b = prob.pq_split
    p, q = float(x[0]), float(x[1])
    q_new = q + h * b(p)
    p_new = p + h * a(q_new)
    return np.array([p_new, q_new])


def euler_maruyama_step(prob: SdeProblem, x, h: float,
                        rng: np.random.Generator) -> np.ndarray:
    """x + h drift(x) + sqrt(h) diffusion(x) @ xi with xi standard normal."""
    x = np.asarray(x, dtype=float)
    xi = rng.standard_normal(prob.noise_dim)
    g = np.asarray(prob.diffusion(x), dtype=float)
    return x + h * np.asarray(prob.drift(x), dtype=float) + np.sqrt(h) * (g @ xi)


def implicit_euler_affine_step(prob: SdeProblem, x, h: float,
                               rng: np.random.Generator) -> np.ndarray:
    """Implicit update for affine drift -M x + c, solved exactly.

    x' = (I + h M)^{-1} (x + h c + sqrt(h) diffusion(x) @ xi); the noise is
    evaluated at the current state, as in the explicit scheme.
    """
    if prob.affine is None:
        raise InputError("implicit stepping needs a problem with declared affine drift")
    M, c = prob.affine
    x = np.asarray(x, dtype=float)
    xi = rng.standard_normal(prob.noise_dim)
    g = np.asarray(prob.diffusion(x), dtype=float)
    lhs = np.eye(prob.dimension) + h * M
    rhs = x + h * c + np.sqrt(h) * (g @ xi)
    try:
        return np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise DomainError(f"implicit system is singular at h={h}") from exc


def optimizer_step(kind: EstimatorKind, obj, x, h: float,
                   rng: np.random.Generator) -> np.ndarray:
    """One stochastic optimization iteration x - h * (estimator draw).

    The Lipschitz-coordinate kind ignores h and moves the drawn axis by
    partial / L_axis (the stepsize 1/(d L_axis) applied to the rescaled
    coordinate estimator).
    """
    x = np.asarray(x, dtype=float)
    draw = sample(kind, obj, x, rng)
    if isinstance(draw, CoordinateDraw):
        out = x.copy()
        out[draw.index] -= draw.partial / kind.lipschitz[draw.index]
        return out
    return x - h * draw


def run(prob, config: StepperConfig, x0,
        rng: Optional[np.random.Generator] = None) -> Trajectory:
    """Repeat the configured one-step map, recording every state.

    ``prob`` is an :class:`OdeProblem`, an :class:`SdeProblem`, or (for
    optimizer stepping) the objective itself.  Any non-finite component
    aborts with a :class:`DivergenceError` carrying the step index.
    """
    method, h, n = config.method, config.h, config.steps
    needs_rng = method in (EULER_MARUYAMA, IMPLICIT_EULER_AFFINE, OPTIMIZER)
    if needs_rng and rng is None:
        raise InputError(f"method {method!r} needs a random generator")

    x = np.asarray(x0, dtype=float).copy()
    dim = x.shape[0]
    states = np.empty((n + 1, dim))
    states[0] = x
    # overflow surfaces as a DivergenceError, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            if method == EULER:
                x = euler_step(prob, x, h)
            elif method == SYMPLECTIC_EULER:
                x = symplectic_euler_step(prob, x, h)
            elif method == EULER_MARUYAMA:
                x = euler_maruyama_step(prob, x, h, rng)
            elif method == IMPLICIT_EULER_AFFINE:
                x = implicit_euler_affine_step(prob, x, h, rng)
            else:
                x = optimizer_step(config.estimator, prob, x, h, rng)
            if not np.all(np.isfinite(x)):
                raise DivergenceError(
                    f"non-finite state after step {k + 1} (h={h})", step_index=k + 1
                )
            states[k + 1] = x
    times = np.arange(n + 1) * h
    return Trajectory(times=times, states=states)
