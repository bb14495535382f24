"""Invariant checks run by the ``validate`` command."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bvp import run_bvp, two_scale_data
from .cells import default_grid, solve_cells
from .effective import COEFFICIENTS, build_field, compute_cell_stresses
from .material import Bilaminate
from .oracle import exact_bvp

HIGHER = tuple(c for c in COEFFICIENTS if c not in ("mu0", "rho0"))


@dataclass
class Check:
    name: str
    value: float
    tolerance: float
    comparison: str = "<="

    @property
    def passed(self):
        if not np.isfinite(self.value):
            return False
        if self.comparison == "<":
            return self.value < self.tolerance
        return self.value <= self.tolerance

    def row(self):
        return [self.name, self.value, self.tolerance, "pass" if self.passed else "FAIL"]


def closed_form_coefficients(spec, x):
    """mu0 and rho0 of an additive bilaminate from harmonic / arithmetic means."""
    m = spec.micro
    Gp = spec.macro.G(x)
    mu0 = (Gp**2 - m.delta_G**2) / (m.alpha * (Gp + m.delta_G) + (1 - m.alpha) * (Gp - m.delta_G))
    rho0 = spec.macro.rho(x) + m.delta_rho * (1.0 - 2.0 * m.alpha)
    return mu0, rho0


def sigma0_deviation(spec, stations=21, n_y=256):
    """max |Sigma_0 - 1| over x-stations and uniform y-nodes."""
    grid = default_grid(spec)
    y = (np.arange(n_y) + 0.5) / n_y
    worst = 0.0
    for x in np.linspace(0.0, 1.0, stations):
        cells = solve_cells(spec, x, grid=grid)
        st = compute_cell_stresses(spec, x, cells)
        worst = max(worst, float(np.max(np.abs(st.sample(0, y) - 1.0))))
    return worst


def compatibility_residual(spec, stations=11):
    """Largest scaled |<s>| over the sources of the Q, Ptilde, Qtilde, R, Rtilde problems."""
    grid = default_grid(spec)
    worst = 0.0
    for x in np.linspace(0.0, 1.0, stations):
        cells = solve_cells(spec, x, grid=grid)
        for s in cells.sources.values():
            worst = max(worst, abs(grid.mean(s)) / max(1.0, float(np.max(np.abs(s)))))
    return worst


def degeneracy(spec, stations=21):
    """Coefficient maxima of the constant-macro and microstructure-free companions."""
    x = np.linspace(0.0, 1.0, stations)
    const = build_field(spec.with_constant_macro(), x_grid=x, threads=1).samples
    free_spec = spec.without_microstructure()
    free = build_field(free_spec, x_grid=x, threads=1).samples
    const_max = max(float(np.max(np.abs(const[c])))
                    for c in ("mu1", "rho1", "rho2t", "eta", "phi", "psi"))
    free_max = max(float(np.max(np.abs(free[c]))) for c in HIGHER)
    free_mu0 = float(np.max(np.abs(free["mu0"] - free_spec.macro.G(x))))
    free_rho0 = float(np.max(np.abs(free["rho0"] - free_spec.macro.rho(x))))
    return const_max, free_max, max(free_mu0, free_rho0)


def run_checks(spec, example=None, tau=1.0, threads=None):
    """Return (checks, coefficient field) for ``spec``; BVP checks if ``example`` is given."""
    checks = []
    x = np.linspace(0.0, 1.0, 101)
    field = build_field(spec, x_grid=x, threads=threads)
    s = field.samples
    if isinstance(spec.micro, Bilaminate) and not spec.multiplicative:
        mu0, rho0 = closed_form_coefficients(spec, x)
        checks.append(Check("closed_form_mu0", float(np.max(np.abs(s["mu0"] / mu0 - 1))), 1e-8))
        checks.append(Check("closed_form_rho0", float(np.max(np.abs(s["rho0"] / rho0 - 1))), 1e-8))
        checks.append(Check("bilaminate_mu1_rho1",
                            float(max(np.max(np.abs(s["mu1"])), np.max(np.abs(s["rho1"])))),
                            1e-8, "<"))
    checks.append(Check("sigma0_unity", sigma0_deviation(spec), 1e-9, "<"))
    checks.append(Check("compatibility", compatibility_residual(spec), 1e-9, "<"))
    const_max, free_max, free_exact = degeneracy(spec)
    checks.append(Check("constant_macro_degeneracy", const_max, 1e-8, "<"))
    checks.append(Check("micro_free_degeneracy", free_max, 1e-12, "<"))
    checks.append(Check("micro_free_leading", free_exact, 1e-12, "<"))
    if spec.macro.periodic or spec.macro.is_constant():
        from .dispersion import monodromy

        det = max(abs(monodromy(spec, w).det - 1.0) for w in (0.5, 1.0, 2.0))
        checks.append(Check("monodromy_unimodular", det, 1e-8))
    static = exact_bvp(spec, 1e-6, tau)
    checks.append(Check("static_stress", float(np.max(np.abs(static.sigma - tau))) / abs(tau), 1e-6))
    if example is not None:
        grid = np.linspace(0.0, 1.0, 2001)
        data = two_scale_data(spec, grid, threads=threads)
        study = run_bvp(spec, example.omega, tau, data=data)
        e = [study.l2_error(j) for j in (0, 1, 2)]
        checks.append(Check("bvp_order_2_le_1", e[2] - e[1], 0.0))
        checks.append(Check("bvp_order_1_le_0", e[1] - e[0], 0.0))
        checks.append(Check("bvp_relative_error_2", study.relative_l2_error(2), 0.1, "<"))
        checks.append(Check("bvp_traction_residual_2", study.traction_residual(2, tau), 1e-4, "<"))
    return checks, field
