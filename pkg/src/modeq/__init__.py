"""Modified-equation analysis of stochastic optimization iterations.

Treats a fixed-stepsize stochastic optimizer as a weak timestepper for an
SDE, builds the stepsize-dependent modified equation it actually follows,
and verifies convergence orders, conservation laws, covariance identities
and mean-square stability -- deterministically wherever the problem is
linear, by reproducible Monte Carlo otherwise.
"""

from .errors import CapacityError, DivergenceError, DomainError, InputError
from .objective import (
    ConvexityConstants,
    Quadratic,
    SumObjective,
    constants,
    grad,
    hessian_grad,
    random_quadratic,
)
from .estimator import (
    Coordinate,
    CoordinateDraw,
    LipschitzCoordinate,
    Minibatch,
    OutcomeDistribution,
    enumerate_outcomes,
    matrix_sqrt,
    sample,
    sigma_closed_form,
    sigma_empirical,
    sqrt_psd_batch,
)
from .dynamics import (
    ModifiedSde,
    OdeProblem,
    SdeProblem,
    build_modified_sde,
    gradient_flow,
    hamiltonian,
    harmonic,
    harmonic_modified,
    modified_hamiltonian,
    moment_oracle,
    moment_state,
    ou,
    ou_modified,
)
from .integrate import (
    StepperConfig,
    Trajectory,
    euler_maruyama_step,
    euler_step,
    implicit_euler_affine_step,
    optimizer_step,
    run,
    symplectic_euler_step,
)
from .measure import (
    ErrorCurve,
    McEstimate,
    OrderFit,
    StabilityReport,
    coordinate_chain_moments,
    enumerated_step_moments,
    fit_order,
    global_error,
    harmonic_error_curve,
    monte_carlo_moment,
    optimizer_weak_error_curves,
    ou_chain_moment,
    ou_weak_error_curve,
    stability_experiment,
    weak_error,
)

__version__ = "0.1.0"
