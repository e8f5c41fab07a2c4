"""Smoke tests for the python bindings: exercise the main operations
end to end on small inputs."""

import math

import pytest

import greenstop as gs


@pytest.fixture(scope="module")
def jump_params():
    return gs.ModelParams(gamma=1.0, sigma=1.0, lambda_=1.0, beta=1.0)


@pytest.fixture(scope="module")
def jump_problem(jump_params):
    return gs.Problem.jump_ou(jump_params, 1.0)


def test_model_basics(jump_params, jump_problem):
    assert gs.excess_root(jump_params, 1.0) == pytest.approx(0.5)
    assert gs.excess_function(jump_params, 1.0, 1.0) == pytest.approx(1.0)
    assert jump_problem.reward(-2.0) == 0.0
    assert jump_problem.smooth_reward(-2.0) == -2.0
    assert jump_problem.excess(0.5) == pytest.approx(0.0)


def test_model_rejects_bad_params():
    with pytest.raises(Exception):
        gs.ModelParams(gamma=0.0, sigma=1.0, lambda_=1.0, beta=1.0)
    with pytest.raises(Exception):
        gs.ModelParams(gamma=1.0, sigma=0.0, lambda_=0.0, beta=1.0)


def test_transform_values(jump_params):
    h = gs.homogeneous_h(jump_params, 1.0, 1.0)
    expected = math.exp(-0.25) * 0.5
    assert h.real == pytest.approx(expected, abs=1e-12)
    assert h.imag == pytest.approx(expected, abs=1e-12)

    assert gs.ghat(jump_params, 1.0, 0.0, 0.0) == pytest.approx(1.0)
    g = gs.ghat(jump_params, 1.0, 0.0, 1.0)
    assert g.real == pytest.approx(0.6456356004306174, abs=1e-8)
    assert g.imag == pytest.approx(0.2032371665734271, abs=1e-8)

    assert gs.ode_residual(jump_params, 1.0, 0.0, 1.0, 1e-4) < 1e-4


def test_brownian_solver_reaches_the_analytic_threshold():
    params = gs.ModelParams(gamma=1.0, sigma=1.0, lambda_=0.0, beta=1.0)
    prob = gs.Problem.custom(params, 1.0,
                             lambda x: max(x, 0.0),
                             lambda x: x,
                             lambda y: y)
    kernel = gs.BrownianKernel(1.0)
    cfg = gs.SolveConfig()
    cfg.root_tol = 1e-8
    report = gs.solve_threshold(prob, kernel, cfg)
    assert report.threshold == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-6)


def test_fourier_kernel_and_value(jump_problem):
    grid = gs.FourierGrid()
    kernel = gs.FourierGreenKernel(jump_problem, grid)
    # resolvent mass and identity at one source point
    mass = kernel.integrate_tail(0.0, -1e9, lambda y: 1.0)
    assert mass == pytest.approx(1.0, abs=1e-3)
    ident = kernel.integrate_tail(0.0, -1e9, jump_problem.excess)
    assert ident == pytest.approx(0.0, abs=1e-2)

    cfg = gs.SolveConfig()
    report = gs.solve_threshold(jump_problem, kernel, cfg)
    assert report.threshold == pytest.approx(1.1442, abs=0.01)
    v = gs.value_function(jump_problem, kernel, report.threshold, 2.0)
    assert v == pytest.approx(2.0, abs=0.01)


def test_simulation_reproducibility(jump_problem):
    cfg = gs.SimConfig()
    cfg.n_paths = 2000
    cfg.dt = 2e-3
    cfg.seed = 31415
    a = gs.estimate_policy_value(jump_problem, 0.0, 1.1442, cfg)
    b = gs.estimate_policy_value(jump_problem, 0.0, 1.1442, cfg)
    assert a.mean == b.mean
    assert a.std_error == b.std_error
    assert a.ci95 == b.ci95

    immediate = gs.estimate_policy_value(jump_problem, 2.0, 1.0, cfg)
    assert immediate.mean == 2.0
    assert immediate.std_error == 0.0


def test_marginal_law(jump_params):
    xs = gs.sample_marginal(jump_params, 0.0, 1.0, 0.01, 20000, 7)
    mean = sum(xs) / len(xs)
    var = sum((x - mean) ** 2 for x in xs) / (len(xs) - 1)
    se = math.sqrt(var / len(xs))
    expected = 1.0 - math.exp(-1.0)
    assert abs(mean - expected) < 4.0 * se


def test_kernel_grid_export(jump_problem):
    grid = gs.FourierGrid()
    grid.x_values = [0.0, 1.0]
    kg = gs.build_kernel_grid(jump_problem, grid)
    assert len(kg.rows) == 2
    assert len(kg.y_values) == grid.n_z
    assert kg.rows[0].mass == pytest.approx(1.0, abs=1e-3)
    assert all(d >= 0.0 for d in kg.rows[0].density)
