import numpy as np
import pytest

from quasihom.cells import solve_cells
from quasihom.effective import (COEFFICIENTS, FIRST, SECOND, ZEROTH, CellStresses,
                                assemble_E, assemble_E_bloch, build_field,
                                compute_cell_stresses, compute_effective, operator_terms)
from quasihom.errors import DependencyError, InvalidCoefficientError
from quasihom.material import Bilaminate, LinearProfile, MediumSpec
from quasihom.presets import material


@pytest.fixture(scope="module")
def field3():
    return build_field(material("material3"), n=201)


def test_unit_bilaminate_coefficients():
    spec = MediumSpec(LinearProfile(), Bilaminate(0.5, 0.2, 0.1))
    c = compute_effective(spec, 0.0, solve_cells(spec, 0.0))
    assert c["mu0"] == pytest.approx(0.96, rel=1e-14)
    assert c["rho0"] == pytest.approx(1.0, rel=1e-14)
    assert abs(c["mu1"]) < 1e-14 and abs(c["rho1"]) < 1e-14


@pytest.mark.parametrize("x", [0.0, 0.37, 0.81])
def test_mu0_is_harmonic_mean(x):
    spec = material("material1")
    cells = solve_cells(spec, x)
    c = compute_effective(spec, x, cells)
    assert c["mu0"] == pytest.approx(1.0 / cells.mean(1.0 / cells.G), rel=1e-9)


def test_missing_cell_data_is_named():
    spec = material("material2")
    cells = solve_cells(spec, 0.1)
    del cells.values["Rt"]
    with pytest.raises(DependencyError, match="Rt"):
        compute_effective(spec, 0.1, cells)


def test_cell_stresses():
    spec = material("material4")
    cells = solve_cells(spec, 0.6)
    st = compute_cell_stresses(spec, 0.6, cells)
    assert isinstance(st, CellStresses)
    assert np.max(np.abs(st[0] - 1.0)) < 1e-12
    with pytest.raises(InvalidCoefficientError):
        compute_cell_stresses(spec, 0.6, cells, mu0=-1.0)


def test_cell_stresses_degenerate_media():
    free = material("material3").without_microstructure()
    st = compute_cell_stresses(free, 0.2, solve_cells(free, 0.2))
    for j in range(1, 6):
        assert np.max(np.abs(st[j])) < 1e-10
    const = material("material3").with_constant_macro()
    st = compute_cell_stresses(const, 0.2, solve_cells(const, 0.2))
    for j in (2, 3, 4):
        assert np.max(np.abs(st[j])) < 1e-9
    for j in (1, 5):
        assert np.max(np.abs(st[j])) > 1e-3


def test_field_needs_dense_grid():
    with pytest.raises(ValueError):
        build_field(material("material1"), x_grid=np.linspace(0, 1, 6))


def test_field_self_convergence(field3):
    fine = build_field(material("material3"), n=401)
    x = np.linspace(0, 1, 1001)
    assert np.max(np.abs(fine("mu0", x) - field3("mu0", x))) < 1e-8


def test_microstructure_free_field_is_exact_at_nodes():
    spec = material("material5").without_microstructure()
    f = build_field(spec, n=21)
    np.testing.assert_allclose(f.samples["mu0"], spec.macro.G(f.x), rtol=1e-14)
    np.testing.assert_allclose(f.samples["rho0"], spec.macro.rho(f.x), rtol=1e-14)


def test_table_layout(field3):
    t = field3.table()
    assert t.shape == (201, 1 + len(COEFFICIENTS))
    np.testing.assert_array_equal(t[:, 0], field3.x)


def test_E_at_zero_epsilon(field3):
    x = np.linspace(0, 1, 33)
    E = assemble_E(field3, 0.0, x, SECOND)
    np.testing.assert_allclose(E.E1, field3("rho0", x))
    np.testing.assert_allclose(E.E4, field3("mu0", x, 1))
    np.testing.assert_allclose(E.E5, field3("mu0", x))
    assert np.all(E.E2 == 0) and np.all(E.E3 == 0)
    Z = assemble_E(field3, 1 / 50, x, ZEROTH)
    for a, b in zip(Z.as_tuple(), E.as_tuple()):
        np.testing.assert_array_equal(a, b)


def test_E_truncation_levels(field3):
    x = np.linspace(0, 1, 17)
    eps = 1 / 50
    terms = operator_terms(field3, x)
    first = assemble_E(field3, eps, x, FIRST)
    full = assemble_E(field3, eps, x, SECOND)
    for name in ("E1", "E2", "E3", "E4", "E5"):
        t0, t1, t2 = terms[name]
        np.testing.assert_array_equal(getattr(first, name), t0 + eps * t1 + 0.0 * t2)
        np.testing.assert_array_equal(getattr(full, name), t0 + eps * t1 + eps**2 * t2)
    with pytest.raises(ValueError):
        assemble_E(field3, eps, x, "third")


def test_E_constant_macro_bilaminate():
    spec = material("material3").with_constant_macro()
    f = build_field(spec, n=21)
    eps = 1 / 50
    x = np.linspace(0, 1, 9)
    E = assemble_E(f, eps, x, SECOND)
    rho2, mu2, rho0, mu0 = (f.samples[k][0] for k in ("rho2", "mu2", "rho0", "mu0"))
    np.testing.assert_allclose(E.E3, eps**2 * (rho2 - mu2 * rho0 / mu0), rtol=1e-8)
    assert np.max(np.abs(E.E2)) < 1e-12
    assert np.max(np.abs(E.E4)) < 1e-12
    np.testing.assert_allclose(E.E1, rho0, rtol=1e-12)
    np.testing.assert_allclose(E.E5, mu0, rtol=1e-12)


def test_bloch_coefficients(field3):
    E = assemble_E(field3, 1 / 50, np.array([0.3]), SECOND).as_tuple()
    E6, E7, E8, E9 = assemble_E_bloch(*E, 0.0)
    np.testing.assert_array_equal(E6, E[0])
    np.testing.assert_array_equal(E7, E[1])
    np.testing.assert_array_equal(E8, 0 * E[0])
    np.testing.assert_array_equal(E9, E[3])
    k = np.pi / 2
    E1, E2, E3, E4, E5 = E
    E6, E7, E8, E9 = assemble_E_bloch(*E, k)
    np.testing.assert_allclose(E6, (E1 - k * k * E3) + 1j * k * E2)
    np.testing.assert_allclose(E7, E2 + 2j * k * E3)
    np.testing.assert_allclose(E8, -k * k * E5 + 1j * k * E4)
    np.testing.assert_allclose(E9, E4 + 2j * k * E5)
    assert E6.imag == pytest.approx(k * E2)
