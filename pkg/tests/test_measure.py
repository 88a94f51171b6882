import math

import numpy as np
import pytest

from modeq import (
    Coordinate,
    DivergenceError,
    ErrorCurve,
    InputError,
    Quadratic,
    SdeProblem,
    StepperConfig,
    coordinate_chain_moments,
    enumerate_outcomes,
    enumerated_step_moments,
    fit_order,
    global_error,
    harmonic,
    monte_carlo_moment,
    ou,
    ou_chain_moment,
    ou_modified,
    run,
    stability_experiment,
    weak_error,
)
from modeq.dynamics import EULER_MARUYAMA, IMPLICIT_EULER
from modeq.integrate import EULER, IMPLICIT_EULER_AFFINE
from modeq.measure import stability_delta_bias, steps_for


def test_global_error_zero_for_exact_match():
    prob = harmonic()
    x0 = np.array([1.0, 0.0])
    traj = run(prob, StepperConfig(EULER, 0.1, 10), x0)
    assert global_error(traj, lambda t: traj.final_state) == 0.0


def test_global_error_first_order_halving():
    prob = harmonic()
    x0 = np.array([1.0, 0.0])
    T = 15.0
    errs = []
    for h in (0.02, 0.01):
        traj = run(prob, StepperConfig(EULER, h, int(round(T / h))), x0)
        errs.append(global_error(traj, lambda t: prob.exact(x0, t)))
    assert 1.7 <= errs[0] / errs[1] <= 2.3


def test_global_error_consistent_with_energy_law():
    prob = harmonic()
    x0 = np.array([1.0, 0.0])
    h, n = 0.0375, 400
    traj = run(prob, StepperConfig(EULER, h, n), x0)
    # the numeric radius grows like (1 + h^2)^(n/2) while the exact stays 1
    assert abs(np.linalg.norm(traj.final_state) - (1 + h * h) ** (n / 2)) < 1e-12
    err = global_error(traj, lambda t: prob.exact(x0, t))
    assert err >= (1 + h * h) ** (n / 2) - 1.0 - 1e-12


def test_fit_order_exact_power_laws():
    hs = np.array([0.1, 0.05, 0.025, 0.0125])
    fit1 = fit_order(ErrorCurve(hs, 3.7 * hs, np.zeros(4)))
    assert abs(fit1.slope - 1.0) < 1e-12
    assert fit1.r_squared > 1.0 - 1e-12
    fit2 = fit_order(ErrorCurve(hs, 0.2 * hs**2, np.zeros(4)))
    assert abs(fit2.slope - 2.0) < 1e-12


def test_fit_order_validation():
    hs = np.array([0.1, 0.05, 0.025])
    with pytest.raises(InputError):
        fit_order(ErrorCurve(hs, np.array([1.0, 0.0, 1.0]), np.zeros(3)))
    with pytest.raises(InputError):
        fit_order(ErrorCurve(hs[:2], np.ones(2), np.zeros(2)))


def test_error_curve_validation():
    with pytest.raises(InputError):
        ErrorCurve(np.array([0.1, 0.2]), np.ones(2), np.zeros(2))  # increasing
    with pytest.raises(InputError):
        ErrorCurve(np.array([0.2, 0.1]), np.array([1.0, -1.0]), np.zeros(2))
    with pytest.raises(InputError):
        ErrorCurve(np.array([0.2, 0.1]), np.array([1.0, np.inf]), np.zeros(2))


def test_steps_for():
    assert steps_for(1.0, 0.04) == 25
    assert steps_for(0.0, 0.1) == 0
    with pytest.raises(InputError):
        steps_for(1.0, 0.03)


def test_ou_chain_moment_against_closed_form():
    # EM second-moment recursion has the closed form
    # rho^n x0^2 + sigma^2 h (1 - rho^n) / (1 - rho) with rho = (1 - gamma h)^2
    gamma, sigma, h, x0, n = 1.0, 0.1, 0.04, 10.0, 25
    rho = (1.0 - gamma * h) ** 2
    closed = rho**n * x0**2 + sigma**2 * h * (1 - rho**n) / (1 - rho)
    got = ou_chain_moment(EULER_MARUYAMA, gamma, sigma, h, x0, n, "x2")
    assert abs(got - closed) < 1e-12 * closed
    # first moment is a pure geometric decay
    got1 = ou_chain_moment(EULER_MARUYAMA, gamma, sigma, h, x0, n, "x")
    assert abs(got1 - x0 * (1 - gamma * h) ** n) < 1e-12


def test_implicit_chain_moment_against_brute_force():
    # brute force: propagate E[x], E[x^2] step by step from the update
    # x' = (x + sigma sqrt(h) xi) / (1 + gamma h)
    gamma, sigma, h, x0, n = 1.3, 0.4, 0.05, 2.0, 17
    r = 1.0 / (1.0 + gamma * h)
    m1, m2 = x0, x0 * x0
    for _ in range(n):
        m1 = r * m1
        m2 = r * r * (m2 + sigma * sigma * h)
    assert abs(ou_chain_moment(IMPLICIT_EULER, gamma, sigma, h, x0, n, "x") - m1) < 1e-14
    assert abs(ou_chain_moment(IMPLICIT_EULER, gamma, sigma, h, x0, n, "x2") - m2) < 1e-14


def brute_force_chain_moments(quad, h, x0, n):
    """Enumerate all length-n coordinate sequences exactly (oracle)."""
    d = quad.dimension
    states = [(1.0, np.asarray(x0, dtype=float))]
    for _ in range(n):
        new = []
        for prob_w, x in states:
            dist = enumerate_outcomes(Coordinate(1), quad, x)
            for p, v in zip(dist.probabilities, dist.values):
                new.append((prob_w * p, x - h * v))
        states = new
    m = sum(p * x for p, x in states)
    S = sum(p * np.outer(x, x) for p, x in states)
    return m, S


def test_coordinate_chain_moments_against_enumeration():
    quad = Quadratic(np.array([[2.0, 0.5], [0.5, 1.0]]), np.array([0.3, -0.4]))
    x0 = np.array([1.0, -1.0])
    h = 0.07
    for n in (1, 2, 3):
        m_ref, S_ref = brute_force_chain_moments(quad, h, x0, n)
        m, S = coordinate_chain_moments(quad, h, x0, n)
        assert np.max(np.abs(m - m_ref)) < 1e-13
        assert np.max(np.abs(S - S_ref)) < 1e-13


def test_enumerated_step_moments_match_recursion():
    quad = Quadratic(np.diag([1.0, 2.0]), np.array([0.2, 0.1]))
    x0 = np.array([0.5, 1.5])
    h = 0.03
    m_e, S_e = enumerated_step_moments(Coordinate(1), quad, x0, h)
    m_r, S_r = coordinate_chain_moments(quad, h, x0, 1)
    assert np.max(np.abs(m_e - m_r)) < 1e-14
    assert np.max(np.abs(S_e - S_r)) < 1e-14


def test_weak_error_zero_horizon():
    prob = ou(1.0, 0.1)
    cfg = StepperConfig(EULER_MARUYAMA, 0.1, 0)
    assert weak_error(cfg, prob, 10.0, 0.0, "x2") == 0.0


def test_weak_error_recursion_first_order_halving():
    prob = ou(1.0, 0.1)
    errs = []
    for h in (0.01, 0.005):
        cfg = StepperConfig(EULER_MARUYAMA, h, int(round(1.0 / h)))
        errs.append(weak_error(cfg, prob, 10.0, 1.0, "x2"))
    assert errs[0] > 0.0
    assert 0.85 * 2.0 <= errs[0] / errs[1] <= 1.15 * 2.0


def test_weak_error_against_modified_is_smaller():
    gamma, sigma, h = 1.0, 0.1, 0.02
    prob = ou(gamma, sigma)
    cfg = StepperConfig(EULER_MARUYAMA, h, 50)
    vs_exact = weak_error(cfg, prob, 10.0, 1.0, "x2")
    mod = ou_modified(EULER_MARUYAMA, gamma, sigma, h)
    vs_modified = weak_error(cfg, prob, 10.0, 1.0, "x2", reference=mod)
    assert vs_modified < 0.1 * vs_exact


def test_weak_error_mc_mode():
    prob = ou(1.0, 0.1)
    cfg = StepperConfig(EULER_MARUYAMA, 0.05, 20)
    est = weak_error(cfg, prob, 10.0, 1.0, "x2", mode="mc", paths=4000,
                     master_seed=4)
    exact_gap = weak_error(cfg, prob, 10.0, 1.0, "x2", mode="recursion")
    assert abs(est.mean - exact_gap) < 4.0 * est.stderr


def test_monte_carlo_deterministic_and_worker_independent():
    prob = ou(1.0, 0.1)
    cfg = StepperConfig(EULER_MARUYAMA, 0.02, 50)
    kwargs = dict(x0=np.array([10.0]), T=1.0, phi="x2", paths=3000, master_seed=7)
    a = monte_carlo_moment(prob, cfg, **kwargs)
    b = monte_carlo_moment(prob, cfg, **kwargs)
    c = monte_carlo_moment(prob, cfg, **kwargs, workers=4)
    assert a == b == c


def test_monte_carlo_noise_free_problem():
    prob = ou(1.0, 0.0)
    cfg = StepperConfig(EULER_MARUYAMA, 0.05, 20)
    est = monte_carlo_moment(prob, cfg, np.array([10.0]), 1.0, "x2", 100, 0)
    assert est.stderr == 0.0
    assert abs(est.mean - ou_chain_moment(EULER_MARUYAMA, 1.0, 0.0, 0.05, 10.0,
                                          20, "x2")) < 1e-10


def test_monte_carlo_matches_chain_moment():
    prob = ou(1.0, 0.1)
    h, n = 1e-3, 1000
    cfg = StepperConfig(EULER_MARUYAMA, h, n)
    est = monte_carlo_moment(prob, cfg, np.array([10.0]), 1.0, "x2", 20_000, 42)
    chain = ou_chain_moment(EULER_MARUYAMA, 1.0, 0.1, h, 10.0, n, "x2")
    assert abs(est.mean - chain) < 4.0 * est.stderr
    # and the discretization bias keeps it near the exact diffusion moment
    analytic = prob.exact_moments(np.array([10.0]), 1.0, "x2")
    assert abs(est.mean - analytic) < abs(chain - analytic) + 4.0 * est.stderr


def test_monte_carlo_stderr_scaling():
    prob = ou(1.0, 0.1)
    cfg = StepperConfig(EULER_MARUYAMA, 0.02, 50)
    a = monte_carlo_moment(prob, cfg, np.array([10.0]), 1.0, "x2", 4000, 21)
    b = monte_carlo_moment(prob, cfg, np.array([10.0]), 1.0, "x2", 8000, 21)
    ratio = a.stderr / b.stderr
    assert abs(ratio - math.sqrt(2.0)) < 0.1 * math.sqrt(2.0)


def test_monte_carlo_implicit_method():
    gamma, sigma, h, n = 1.0, 0.1, 0.05, 20
    prob = ou(gamma, sigma)
    cfg = StepperConfig(IMPLICIT_EULER_AFFINE, h, n)
    est = monte_carlo_moment(prob, cfg, np.array([10.0]), 1.0, "x2", 20_000, 5)
    chain = ou_chain_moment(IMPLICIT_EULER, gamma, sigma, h, 10.0, n, "x2")
    assert abs(est.mean - chain) < 4.0 * est.stderr


def test_monte_carlo_validation_and_divergence():
    prob = ou(1.0, 0.1)
    cfg = StepperConfig(EULER_MARUYAMA, 0.02, 50)
    with pytest.raises(InputError):
        monte_carlo_moment(prob, cfg, np.array([10.0]), 1.0, "x2", 1, 0)
    exploding = SdeProblem(lambda x: 1e3 * x, lambda x: np.zeros((1, 1)), 1, 1,
                           drift_batch=lambda X: 1e3 * X,
                           diffusion_batch=lambda X: np.zeros((X.shape[0], 1, 1)))
    with pytest.raises(DivergenceError) as info:
        monte_carlo_moment(exploding, StepperConfig(EULER_MARUYAMA, 1.0, 200),
                           np.array([1.0]), 200.0, "x", 8, 0)
    assert info.value.path_index is not None


def test_stability_d1_deterministic_equality_rate():
    # univariate case: the modified flow is deterministic with decay rate
    # exactly 2 (1 + h/2) = 2 + h, matching the guaranteed alpha = 2 mu + h K
    h = 0.1
    quad = Quadratic(np.array([[1.0]]))
    rep = stability_experiment(quad, h, np.array([2.0]), 2.0, 10, 1e-3, 0,
                               grid_points=20, delta_check=True)
    assert abs(rep.alpha - (2.0 + h)) < 1e-14
    assert rep.h_max == math.inf
    assert rep.applicable
    assert rep.passed
    assert abs(rep.fitted_rate - (2.0 + h)) < 5e-3
    assert np.max(rep.stderr) < 1e-12  # no noise in one dimension
    assert rep.delta_check_rel < 0.01


def test_stability_trivial_at_minimizer():
    quad = Quadratic(np.diag([1.0, 2.0]), np.array([0.5, -0.5]))
    rep = stability_experiment(quad, 0.1, quad.minimizer, 1.0, 10, 1e-3, 0,
                               grid_points=10)
    assert rep.initial_msq == 0.0
    assert rep.passed


def test_stability_small_run_passes():
    quad = Quadratic(np.diag([1.0, 2.0]))
    rep = stability_experiment(quad, 0.1, np.array([3.0, -2.0]), 1.5, 1000,
                               1e-3, 2, grid_points=15)
    assert abs(rep.alpha - 1.7) < 1e-14
    assert abs(rep.h_max - 2.0 / 3.0) < 1e-14
    assert rep.passed


def test_stability_inapplicable_configuration():
    quad = Quadratic(np.diag([1.0, 2.0]))
    with pytest.warns(UserWarning, match="exceeds the guaranteed range"):
        rep = stability_experiment(quad, 1.0, np.array([3.0, -2.0]), 1.5, 200,
                                   1e-2, 2, grid_points=15)
    assert rep.alpha == -1.0
    assert not rep.applicable
    assert not rep.passed  # no claim outside the guaranteed regime


def test_stability_validation():
    quad = Quadratic(np.diag([1.0, 2.0]))
    with pytest.raises(InputError):
        stability_experiment(quad, 0.1, np.zeros(2), 1.0, 10, 0.01, 0)  # delta too big
    with pytest.raises(InputError):
        stability_experiment(quad, 0.1, np.zeros(2), 1.0, 10, 1e-3, 0,
                             grid_points=7)  # grid misaligned with delta


def test_stability_delta_bias_is_small():
    quad = Quadratic(np.diag([1.0, 2.0]))
    rel = stability_delta_bias(quad, 0.1, np.array([3.0, -2.0]), 1.0, 400,
                               1e-3, 3, grid_points=10)
    assert rel < 0.01
