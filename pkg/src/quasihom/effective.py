"""Effective coefficients, cell stresses and the compacted mean-field operator.

The second-order mean-field equation is written in the reduced form

    (E5 + w^2 E3) u'' + (E4 + w^2 E2) u' + w^2 E1 u = 0,

whose coefficients E1..E5 combine the effective coefficients and x-derivatives
of their ratios. For Bloch waves u = v(x) exp(ikx) the same equation becomes
a periodic problem for v with complex coefficients E6..E9.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .cells import DEFAULT_HX, default_grid, solve_cells
from .errors import DependencyError, InvalidCoefficientError

COEFFICIENTS = ("mu0", "mu1", "mu2", "rho0", "rho1", "rho2", "rho2t",
                "eta", "phi", "psi")

ZEROTH, FIRST, SECOND = "zeroth", "first", "second"
LEVELS = (ZEROTH, FIRST, SECOND)


def thread_count(default=None):
    """Worker count from ``QH_THREADS`` (default: all cores)."""
    env = os.environ.get("QH_THREADS")
    if env:
        return max(1, int(env))
    return default or (os.cpu_count() or 1)


# --------------------------------------------------------------------------
# pointwise coefficients and stresses
# --------------------------------------------------------------------------

def _require(cells, kind, names):
    table = getattr(cells, kind)
    for n in names:
        if n not in table:
            raise DependencyError(f"cell data is missing {kind[:-1]} {n!r} at x={cells.x}")


def compute_effective(spec, x, cells):
    """All ten effective coefficients at station ``x`` from cell solutions.

    Each coefficient is the unit-cell average of its defining expression,
    e.g. mu0 = <G (1 + P_y)> and psi = <G (Q_x + Ptilde + Qtilde_y)>.
    """
    _require(cells, "values", ("P", "Q", "Pt", "Qt", "R", "Rt"))
    _require(cells, "x_derivs", ("P", "Pt", "Q"))
    G, rho = cells.G, cells.rho
    v, d, dx = cells.values, cells.derivs, cells.x_derivs
    avg = cells.mean
    return {
        "mu0": avg(G * (1.0 + d["P"])),
        "rho0": avg(rho),
        "mu1": avg(G * (v["P"] + d["Q"])),
        "rho1": avg(rho * v["P"]),
        "eta": avg(G * (dx["P"] + d["Pt"])),
        "mu2": avg(G * (v["Q"] + d["R"])),
        "rho2": avg(rho * v["Q"]),
        "rho2t": avg(rho * v["Pt"]),
        "phi": avg(G * (dx["Pt"] + d["Rt"])),
        "psi": avg(G * (dx["Q"] + v["Pt"] + d["Qt"])),
    }


@dataclass
class CellStresses:
    """Sigma_0..Sigma_5 as nodal arrays on the cell grid at one station."""

    x: float
    grid: object
    sigma: tuple

    def __getitem__(self, j):
        return self.sigma[j]

    def sample(self, j, y):
        return self.grid.sample(self.sigma[j], y)


def compute_cell_stresses(spec, x, cells, mu0=None):
    """The six normalized cell fluxes; Sigma_0 is formed literally, not set to 1."""
    G = cells.G
    v, d, dx = cells.values, cells.derivs, cells.x_derivs
    if mu0 is None:
        mu0 = cells.mean(G * (1.0 + d["P"]))
    if not mu0 > 0:
        raise InvalidCoefficientError(f"mu0 = {mu0} is not positive at x={x}")
    sig = (
        G * (1.0 + d["P"]) / mu0,
        G * (v["P"] + d["Q"]) / mu0,
        G * (dx["P"] + d["Pt"]) / mu0,
        G * (d["Rt"] + dx["Pt"]) / mu0,
        G * (v["Pt"] + dx["Q"] + d["Qt"]) / mu0,
        G * (v["Q"] + d["R"]) / mu0,
    )
    return CellStresses(float(x), cells.grid, sig)


# --------------------------------------------------------------------------
# x-sampled field with spline interpolation
# --------------------------------------------------------------------------

class EffectiveField:
    """Effective coefficients sampled on a uniform x-grid and splined.

    Splines are not-a-knot cubics, or periodic ones when the grid spans a
    whole period of a periodic macro profile. Derivatives of coefficient
    ratios such as [rho0/mu0]_xx come from splining the ratio itself.
    """

    def __init__(self, x, samples, spec=None, periodic=None):
        self.x = np.asarray(x, dtype=float)
        self.samples = {k: np.array(samples[k], dtype=float) for k in COEFFICIENTS}
        self.spec = spec
        if periodic is None:
            periodic = (spec is not None and spec.macro.periodic
                        and np.isclose(self.x[-1] - self.x[0], 1.0))
        self.periodic = bool(periodic)
        if self.periodic:
            for v in self.samples.values():
                v[-1] = v[0]
        bc = "periodic" if self.periodic else "not-a-knot"
        if np.any(self.samples["mu0"] <= 0) or np.any(self.samples["rho0"] <= 0):
            raise InvalidCoefficientError("mu0 and rho0 must be positive")
        sp = {k: CubicSpline(self.x, v, bc_type=bc) for k, v in self.samples.items()}
        self._sp = sp
        mu0 = self.samples["mu0"]
        mu0_x = sp["mu0"](self.x, 1)
        mu1_x = sp["mu1"](self.x, 1)
        eta_x = sp["eta"](self.x, 1)
        ratios = {
            "b": self.samples["rho0"] / mu0,          # rho0/mu0
            "a": mu0_x / mu0,                         # mu0_x/mu0
            "m": self.samples["mu1"] / mu0,           # mu1/mu0
            "k": (mu1_x + self.samples["eta"]) / mu0,  # (mu1_x + eta)/mu0
            "r": self.samples["rho1"] / mu0,          # rho1/mu0
            "e": eta_x / mu0,                         # eta_x/mu0
        }
        if self.periodic:
            for v in ratios.values():
                v[-1] = v[0]
        self._ratio = {k: CubicSpline(self.x, v, bc_type=bc) for k, v in ratios.items()}

    def __call__(self, name, x, order=0):
        return self._sp[name](x, order)

    def ratio(self, name, x, order=0):
        return self._ratio[name](x, order)

    def table(self):
        cols = [self.x] + [self.samples[k] for k in COEFFICIENTS]
        return np.column_stack(cols)

    def resampled(self, x_new):
        return {k: self._sp[k](x_new) for k in COEFFICIENTS}


def _station(args):
    spec, x, grid, h_x = args
    cells = solve_cells(spec, x, grid=grid, h_x=h_x)
    return compute_effective(spec, x, cells)


def build_field(spec, x_grid=None, n=201, h_x=DEFAULT_HX, threads=None, n_panels=256):
    """Sample all effective coefficients on ``x_grid`` and spline them.

    ``x_grid`` defaults to ``n`` uniform points on [0, 1].
    """
    if x_grid is None:
        x_grid = np.linspace(0.0, 1.0, n)
    x_grid = np.asarray(x_grid, dtype=float)
    span = x_grid[-1] - x_grid[0]
    if len(x_grid) < 4 or (len(x_grid) - 1) < 9 * span - 1e-12:
        raise ValueError("x-grid needs at least 9 points per unit length")
    grid = default_grid(spec, n_panels)
    jobs = [(spec, float(x), grid, h_x) for x in x_grid]
    workers = threads if threads is not None else thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_station, jobs))
    else:
        rows = [_station(j) for j in jobs]
    samples = {k: np.array([r[k] for r in rows]) for k in COEFFICIENTS}
    return EffectiveField(x_grid, samples, spec)


# --------------------------------------------------------------------------
# compacted operator
# --------------------------------------------------------------------------

@dataclass
class OperatorCoeffs:
    x: np.ndarray
    level: str
    E1: np.ndarray
    E2: np.ndarray
    E3: np.ndarray
    E4: np.ndarray
    E5: np.ndarray

    def as_tuple(self):
        return self.E1, self.E2, self.E3, self.E4, self.E5


def operator_terms(field, x):
    """The O(1), O(eps) and O(eps^2) parts of E1..E5 at ``x``.

    Returns a dict ``{"E1": (t0, t1, t2), ...}``.
    """
    x = np.asarray(x, dtype=float)
    f = lambda k, o=0: field(k, x, o)
    q = lambda k, o=0: field.ratio(k, x, o)
    mu0, mu0_x = f("mu0"), f("mu0", 1)
    rho0 = f("rho0")
    mu1, rho1, eta = f("mu1"), f("rho1"), f("eta")
    mu1_x, eta_x = f("mu1", 1), f("eta", 1)
    mu2, mu2_x = f("mu2"), f("mu2", 1)
    rho2, rho2t = f("rho2"), f("rho2t")
    phi, phi_x = f("phi"), f("phi", 1)
    psi, psi_x = f("psi"), f("psi", 1)

    b, b_x, b_xx = q("b"), q("b", 1), q("b", 2)
    a, a_x, a_xx = q("a"), q("a", 1), q("a", 2)
    m, m_x = q("m"), q("m", 1)
    k, k_x = q("k"), q("k", 1)
    r_x = q("r", 1)
    e, e_x = q("e"), q("e", 1)
    C2 = psi + mu2_x
    km = k + m_x
    zero = np.zeros_like(mu0)

    E1 = (rho0,
          -mu1 * b_x,
          mu1 * (b_x * km + m * (b_xx - a * b_x)) - b_x * C2 + mu2 * (a * b_x - b_xx))
    E2 = (zero,
          rho1 - mu1 * b,
          mu1 * (b * km + m * (2.0 * b_x - a * b) - r_x) + rho2t - b * C2
          + mu2 * (a * b - 2.0 * b_x))
    E3 = (zero,
          zero,
          mu1 * (b * m - rho1 / mu0) + rho2 - mu2 * b)
    E4 = (mu0_x,
          eta_x - mu1 * a_x,
          phi_x - a_x * C2 + mu2 * (a * a_x - a_xx)
          + mu1 * (a_x * km - e_x + m * (a_xx - a * a_x)))
    E5 = (mu0,
          eta + mu1_x - mu1 * a,
          psi_x + phi - a * C2 + mu2 * (a * a - 2.0 * a_x)
          + mu1 * (a * km - e - k_x + m * (2.0 * a_x - a * a)))
    return {"E1": E1, "E2": E2, "E3": E3, "E4": E4, "E5": E5}


def assemble_E(field, epsilon, x, level=SECOND):
    """E1..E5 at ``x`` truncated to ``level`` (zeroth, first or second).

    The zeroth level keeps the O(1) parts only (the barred coefficients), the
    first level drops O(eps^2) (hatted), the second keeps everything.
    """
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    e1 = epsilon if level in (FIRST, SECOND) else 0.0
    e2 = epsilon**2 if level == SECOND else 0.0
    terms = operator_terms(field, x)
    vals = {name: t0 + e1 * t1 + e2 * t2 for name, (t0, t1, t2) in terms.items()}
    return OperatorCoeffs(np.asarray(x, dtype=float), level, **vals)


def assemble_E_bloch(E1, E2, E3, E4, E5, k):
    """Complex coefficients E6..E9 of the Bloch-reduced periodic problem."""
    ik = 1j * k
    E6 = E1 + ik * E2 + ik**2 * E3
    E7 = E2 + 2.0 * ik * E3
    E8 = ik * E4 + ik**2 * E5
    E9 = E4 + 2.0 * ik * E5
    return E6, E7, E8, E9
