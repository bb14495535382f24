import numpy as np
import pytest
from scipy.integrate import quad

import quasihom.bvp as bvp
from quasihom.bvp import (boundary_operators, closure, derivative_closure, reconstruct_field,
                          run_bvp, solve_bvp, solve_mean_bvp, two_scale_data)
from quasihom.effective import OperatorCoeffs, SECOND
from quasihom.errors import DegenerateOperatorError, ResonanceError
from quasihom.material import Bilaminate, MediumSpec, SinusoidalProfile
from quasihom.presets import example

GRID = 2001


@pytest.fixture(scope="module")
def ex1_data():
    ex = example("ex1")
    return ex, two_scale_data(ex.spec, np.linspace(0, 1, GRID))


@pytest.fixture(scope="module")
def hom_data():
    from quasihom.material import LinearProfile

    spec = MediumSpec(LinearProfile(0.0, 0.0), Bilaminate(0.5, 0.0, 0.0), epsilon_inverse=10)
    return spec, two_scale_data(spec, np.linspace(0, 1, GRID))


@pytest.mark.parametrize("order", [0, 1, 2])
def test_homogeneous_closed_form(hom_data, order):
    spec, data = hom_data
    w, tau = 3.0, 0.5
    f = solve_bvp(spec, order, w, tau, GRID, data)
    ref = tau * np.sin(w * f.x) / (w * np.cos(w))
    assert np.max(np.abs(f.mean - ref)) < 1e-5 * np.max(np.abs(ref))
    np.testing.assert_array_equal(f.u, f.mean)


def test_closure_in_homogeneous_medium(hom_data):
    spec, data = hom_data
    w = 3.0
    x = np.linspace(0.1, 0.9, 5)
    clo = closure(data.field, spec.epsilon, w, x)
    u, u_x = np.sin(w * x), w * np.cos(w * x)
    u_xx, u_xxx = derivative_closure(2, clo, u, u_x)
    np.testing.assert_allclose(u_xx, -w * w * u, atol=1e-10)
    np.testing.assert_allclose(u_xxx, -w * w * u_x, atol=1e-9)
    u_xx, _ = derivative_closure(1, clo, 0.0, 1.0)
    np.testing.assert_allclose(u_xx, -clo.D * clo.E)
    with pytest.raises(ValueError):
        derivative_closure(0, clo, u, u_x)


def test_static_limit(ex1_data):
    ex, data = ex1_data
    f = solve_bvp(ex.spec, 0, 1e-6, 1.0, GRID, data)
    spec = ex.spec
    d, a = spec.micro.delta_G, spec.micro.alpha
    mu = lambda t: (spec.macro.G(t) ** 2 - d * d) / (a * (spec.macro.G(t) + d)
                                                     + (1 - a) * (spec.macro.G(t) - d))
    xs = f.x[::200]
    ref = np.array([quad(lambda t: 1 / mu(t), 0, x, epsabs=1e-14)[0] for x in xs])
    assert np.max(np.abs(f.mean[::200] - ref)) < 1e-6 * np.max(np.abs(ref))
    assert np.max(np.abs(f.sigma - 1.0)) < 1e-5


def test_boundary_operators_at_zero_epsilon(ex1_data):
    ex, data = ex1_data
    w = ex.omega
    o0, o1 = boundary_operators(data.field, 0.0, w, data.boundary_cells)
    for o in (o0, o1):
        assert o.A == pytest.approx(1.0, abs=1e-12)
        assert o.B == 0.0 and o.C == 0.0
        mu0, mu0_x, rho0 = (float(data.field(n, o.x, d)) for n, d in
                            (("mu0", 0), ("mu0", 1), ("rho0", 0)))
        assert o.D == pytest.approx(1 / mu0)
        assert o.E == pytest.approx(mu0_x)
        assert o.F == pytest.approx(w * w * rho0)


def test_constant_coefficient_H1():
    from quasihom.material import LinearProfile

    spec = MediumSpec(LinearProfile(0.0, 0.0), Bilaminate(0.5, 0.3, 0.2), epsilon_inverse=20)
    data = two_scale_data(spec, np.linspace(0, 1, 101))
    clo = closure(data.field, spec.epsilon, 2.0, np.array([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(clo.H1, clo.D**2 * clo.E * clo.F, atol=1e-9)


def test_degenerate_operator(monkeypatch, hom_data):
    spec, data = hom_data

    def fake(field, eps, x, level):
        one = np.ones_like(np.asarray(x, dtype=float))
        return OperatorCoeffs(x, level, one, 0 * one, -one, 0 * one, 4.0 * one)

    monkeypatch.setattr(bvp, "_E", fake)
    with pytest.raises(DegenerateOperatorError):
        closure(data.field, spec.epsilon, 2.0, np.array([0.0, 1.0]))


def test_resonance_detection(hom_data):
    spec, data = hom_data
    # cos(w) = 0 makes the traction problem singular
    with pytest.raises(ResonanceError, match="shift"):
        solve_mean_bvp(spec, 0, np.pi / 2, 1.0, GRID, data)
    near = solve_mean_bvp(spec, 0, np.pi / 2 + 1e-4, 1.0, GRID, data).condition
    far = solve_mean_bvp(spec, 0, 1.0, 1.0, GRID, data).condition
    assert near > 100 * far


@pytest.mark.parametrize("order", [0, 1, 2])
def test_boundary_rows_hold(ex1_data, order):
    ex, data = ex1_data
    m = solve_mean_bvp(ex.spec, order, ex.omega, 1.0, GRID, data)
    (a0, b0, r0), (a1, b1, r1) = m.rows
    assert abs(a0 * m.u[0] + b0 * m.u_x[0] - r0) < 1e-8 * np.max(np.abs(m.u))
    assert abs(a1 * m.u[-1] + b1 * m.u_x[-1] - r1) < 1e-8 * abs(r1)


def test_closure_matches_finite_differences(ex1_data):
    ex, data = ex1_data
    m = solve_mean_bvp(ex.spec, 2, ex.omega, 1.0, GRID, data)
    u_xx, _ = derivative_closure(2, m.closure, m.u, m.u_x)
    h = m.x[1] - m.x[0]
    fd = (m.u[2:] - 2 * m.u[1:-1] + m.u[:-2]) / h**2
    scale = np.max(np.abs(u_xx))
    assert np.max(np.abs(fd - u_xx[1:-1])[10:-10]) < 1e-3 * scale


def test_grid_convergence():
    ex = example("ex1")
    sols = []
    for n in (501, 1001, 2001):
        x = np.linspace(0, 1, n)
        sols.append(solve_mean_bvp(ex.spec, 2, ex.omega, 1.0, n,
                                   two_scale_data(ex.spec, x, stations=101)).u)
    d1 = np.max(np.abs(sols[0] - sols[1][::2]))
    d2 = np.max(np.abs(sols[1] - sols[2][::2]))
    assert 3.0 < d1 / d2 < 5.0


def test_orders_collapse_without_microstructure():
    spec = MediumSpec(SinusoidalProfile(0.2, 0.0, 0.1, 0.0), Bilaminate(0.5, 0.0, 0.0),
                      epsilon_inverse=20)
    study = run_bvp(spec, 5.0, grid_size=1001)
    for j in (1, 2):
        np.testing.assert_allclose(study.fields[j].u, study.fields[0].u, atol=1e-10)
        np.testing.assert_allclose(study.fields[j].u, study.fields[j].mean, atol=1e-14)


def test_ex3_traction_residual():
    ex = example("ex3")
    study = run_bvp(ex.spec, ex.omega)
    assert study.traction_residual(2) < 1e-6
    assert study.relative_l2_error(2) < study.relative_l2_error(0)


def test_ex2_second_order_tracks_wiggles():
    ex = example("ex2")
    study = run_bvp(ex.spec, ex.omega)
    d = lambda f: np.diff(f, 2)
    ref = d(study.exact.u)
    err = {j: np.linalg.norm(d(study.fields[j].u) - ref) / np.linalg.norm(ref) for j in (0, 2)}
    assert err[2] < 0.5 * err[0]
    assert study.table().shape == (GRID, 12)


def test_reconstruction_orders(ex1_data):
    ex, data = ex1_data
    m = solve_mean_bvp(ex.spec, 1, ex.omega, 1.0, GRID, data)
    f = reconstruct_field(ex.spec, 1, m, data)
    np.testing.assert_allclose(f.u, m.u + ex.spec.epsilon * data.table["P"] * m.u_x)
    assert f.order == 1
