import numpy as np
import pytest
from scipy.optimize import brentq

from quasihom.dispersion import (AlignmentError, DispersionBranch, baseline_dispersion,
                                 baseline_speed, default_k_grid, dispersion_error,
                                 exact_dispersion, fourier_matrices, homogenized_dispersion,
                                 microstructure_free_dispersion, monodromy)
from quasihom.errors import InvalidMaterialError
from quasihom.oracle import bilayer_closed_form
from quasihom.presets import material


@pytest.fixture(scope="module")
def mat3_branches():
    spec = material("material3")
    k = default_k_grid(40)
    return (exact_dispersion(spec, k), homogenized_dispersion(spec, 0, k),
            homogenized_dispersion(spec, 2, k))


def test_homogeneous_monodromy(homogeneous):
    M = monodromy(homogeneous, np.pi)
    assert M.trace == pytest.approx(-2.0, abs=1e-12)
    with pytest.raises(ValueError):
        monodromy(homogeneous, 1.0, slices_per_unit_cell=8)


@pytest.mark.parametrize("w", [0.5, 1.0, 2.0])
def test_monodromy_unimodular(w):
    assert abs(monodromy(material("material1"), w).det - 1.0) < 1e-8


def test_monodromy_slice_convergence():
    spec = material("material3")
    a = monodromy(spec, 1.0, 128).trace
    b = monodromy(spec, 1.0, 256).trace
    assert abs(a - b) < 1e-6


def test_homogeneous_branch_is_unit_speed(homogeneous):
    k = default_k_grid(16)
    w = exact_dispersion(homogeneous, k).omega
    np.testing.assert_allclose(w[:-1], k[:-1], rtol=1e-10)
    # no gap at k = pi: the edge is a tangency, resolvable to ~sqrt(machine eps)
    assert w[-1] == pytest.approx(np.pi, rel=1e-6)
    for order in (0, 2):
        np.testing.assert_allclose(homogenized_dispersion(homogeneous, order, k).omega, k,
                                   rtol=1e-10)


def test_bilayer_relation(const_bilaminate):
    k = default_k_grid(20)
    ex = exact_dispersion(const_bilaminate, k)
    l = 0.5 / 50
    ref = [brentq(lambda w: bilayer_closed_form(0.8, 0.8, l, 1.2, 1.2, l, w) - np.cos(kk / 50),
                  1e-9, 4.0) for kk in k]
    np.testing.assert_allclose(ex.omega, ref, rtol=1e-6)


def test_linear_macro_rejected():
    with pytest.raises(InvalidMaterialError):
        exact_dispersion(material("material5"), default_k_grid(4))


def test_microstructure_softens_material1():
    spec = material("material1")
    k = np.array([np.pi])
    assert exact_dispersion(spec, k).omega[0] < microstructure_free_dispersion(spec, k).omega[0]


def test_baseline_speeds(homogeneous, const_bilaminate):
    assert baseline_speed(homogeneous) == pytest.approx(1.0, rel=1e-14)
    assert baseline_speed(const_bilaminate) == pytest.approx(np.sqrt(0.96), rel=1e-13)
    spec = material("material1")
    slope = exact_dispersion(spec, np.array([1e-3])).omega[0] / 1e-3
    assert baseline_speed(spec) == pytest.approx(slope, rel=1e-2)
    b = baseline_dispersion(spec, default_k_grid(5))
    assert b.model == "Baseline"


def test_small_k_homogenized_slope():
    spec = material("material3")
    k = np.array([1e-3])
    w = homogenized_dispersion(spec, 2, k).omega[0]
    assert w / k[0] == pytest.approx(baseline_speed(spec), rel=1e-2)


def test_branch_shape(mat3_branches):
    for br in mat3_branches:
        assert np.all(br.omega > 0)
        assert np.all(np.diff(br.omega) > 0)
        assert br.flags["branch_jumps"] == []


def test_second_order_is_closer(mat3_branches):
    ex, h0, h2 = mat3_branches
    e0, e2 = dispersion_error(ex, h0), dispersion_error(ex, h2)
    assert np.mean(e2 <= e0) >= 0.9


def test_error_metric_properties(mat3_branches):
    ex, h0, _ = mat3_branches
    assert np.all(dispersion_error(ex, ex) == 0)
    lam = 3.7
    scaled = dispersion_error(DispersionBranch(ex.k, lam * ex.omega, "Exact"),
                              DispersionBranch(ex.k, lam * h0.omega, "Homog0"))
    np.testing.assert_allclose(scaled, dispersion_error(ex, h0), rtol=1e-12, atol=1e-15)
    other = DispersionBranch(ex.k[:-1], ex.omega[:-1], "Exact")
    with pytest.raises(AlignmentError):
        dispersion_error(other, h0)


def test_fourier_matrices_differentiate_trig():
    D1, D2 = fourier_matrices(32)
    x = np.arange(32) / 32
    f = np.sin(2 * np.pi * 3 * x)
    np.testing.assert_allclose(D1 @ f, 6 * np.pi * np.cos(6 * np.pi * x), atol=1e-10)
    np.testing.assert_allclose(D2 @ f, -(6 * np.pi) ** 2 * f, atol=1e-8)
