"""Effective boundary value problems for the fixed/loaded bar and field reconstruction.

The bar occupies [0, 1], is fixed at x = 0 and loaded by a time-harmonic
traction tau at x = 1. At each order j the mean field solves

    (E5 + w^2 E3) <u>'' + (E4 + w^2 E2) <u>' + w^2 E1 <u> = 0

with the order-j truncation of E1..E5 and Robin-type end conditions that
carry the cell functions at the boundary. Displacement and stress are then
rebuilt from <u>, its closure derivatives and the cell data at (x, x/eps).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import LinearOperator, onenormest, splu

from .cells import DEFAULT_HX, default_grid, solve_cells
from .effective import (FIRST, SECOND, ZEROTH, EffectiveField, assemble_E,
                        compute_cell_stresses, compute_effective, thread_count)
from .errors import DegenerateOperatorError, ResonanceError
from .oracle import WaveField, exact_bvp

DEFAULT_GRID = 2001
DEFAULT_STATIONS = 201
COND_LIMIT = 1e12
LEVEL_OF_ORDER = {0: ZEROTH, 1: FIRST, 2: SECOND}
_FD_STEP = 1e-4


# --------------------------------------------------------------------------
# closure coefficients
# --------------------------------------------------------------------------

def _E(field, epsilon, x, level):
    return assemble_E(field, epsilon, x, level)


def _E_x(field, epsilon, x, level, h=_FD_STEP):
    """x-derivatives of E1..E5 by fourth-order central differences of the splines."""
    x = np.asarray(x, dtype=float)
    f = [_E(field, epsilon, x + s * h, level).as_tuple() for s in (-2, -1, 1, 2)]
    return tuple((a - 8.0 * b + 8.0 * c - d) / (12.0 * h) for a, b, c, d in zip(*f))


@dataclass
class Closure:
    """D, E, F and the third-derivative coefficients H1, H2 at points x.

    <u>'' = -D (F <u> + E <u>') and <u>''' = H1 <u> + H2 <u>'.
    """

    x: np.ndarray
    D: np.ndarray
    E: np.ndarray
    F: np.ndarray
    D_x: np.ndarray
    E_x: np.ndarray
    F_x: np.ndarray
    H1: np.ndarray
    H2: np.ndarray


def closure(field, epsilon, omega, x, level=SECOND):
    x = np.asarray(x, dtype=float)
    w2 = omega * omega
    E1, E2, E3, E4, E5 = _E(field, epsilon, x, level).as_tuple()
    E1x, E2x, E3x, E4x, E5x = _E_x(field, epsilon, x, level)
    lead = w2 * E3 + E5
    if np.any(np.abs(lead) < 1e-14 * np.maximum(1.0, np.abs(E5))):
        raise DegenerateOperatorError(
            f"w^2 E3 + E5 vanishes on [{x.min()}, {x.max()}] at omega={omega}")
    D = 1.0 / lead
    E = w2 * E2 + E4
    F = w2 * E1
    D_x = -D * D * (w2 * E3x + E5x)
    E_x = w2 * E2x + E4x
    F_x = w2 * E1x
    H1 = -D_x * F + D * D * E * F - D * F_x
    H2 = -D_x * E - D * E_x + D * D * E * E - D * F
    return Closure(x, D, E, F, D_x, E_x, F_x, H1, H2)


def derivative_closure(order, clo, u, u_x):
    """(<u>_xx, <u>_xxx) from the field equation and its derivative.

    <u>_xxx is only defined at order 2 (None otherwise).
    """
    if order < 1:
        raise ValueError("derivative closure needs order >= 1")
    u_xx = -clo.D * (clo.F * u + clo.E * u_x)
    u_xxx = clo.H1 * u + clo.H2 * u_x if order == 2 else None
    return u_xx, u_xxx


@dataclass
class BoundaryOps:
    """Boundary operators at one end x (cell data taken at y = x)."""

    x: float
    A: float
    B: float
    C: float
    D: float
    E: float
    F: float
    H1: float
    H2: float
    P: float
    Pt: float
    Q: float
    Sigma: tuple
    mu0: float


def _scalar(v):
    return float(np.asarray(v).reshape(-1)[0])


def boundary_operators(field, epsilon, omega, boundary_cells, level=SECOND):
    """BoundaryOps at x = 0 and x = 1.

    ``boundary_cells`` maps x in {0.0, 1.0} to a CellSolution at that station.
    Cell quantities are read at y = 0 for x = 0 and y = 1 for x = 1.
    """
    out = []
    for xb in (0.0, 1.0):
        cells = boundary_cells[xb]
        mu0 = _scalar(field("mu0", xb))
        st = compute_cell_stresses(None, xb, cells, mu0=cells.mean(cells.G * (1.0 + cells.derivs["P"])))
        Sig = tuple(_scalar(st.sample(j, xb)) for j in range(6))
        clo = closure(field, epsilon, omega, np.array([xb]), level)
        e, e2 = epsilon, epsilon * epsilon
        A = Sig[0] + e * Sig[2] + e2 * Sig[3]
        B = e * Sig[1] + e2 * Sig[4]
        C = e2 * Sig[5]
        out.append(BoundaryOps(
            xb, A, B, C, float(clo.D[0]), float(clo.E[0]), float(clo.F[0]),
            float(clo.H1[0]), float(clo.H2[0]),
            _scalar(cells.sample("P", xb)), _scalar(cells.sample("Pt", xb)),
            _scalar(cells.sample("Q", xb)), Sig, mu0))
    return tuple(out)


def boundary_rows(order, ops0, ops1, epsilon, omega, field):
    """Coefficients (a, b, rhs) of a <u> + b <u>' = rhs at x = 0 and x = 1."""
    e, e2 = epsilon, epsilon * epsilon
    rhs1 = 1.0 / ops1.mu0  # times tau
    if order == 0:
        return (1.0, 0.0, 0.0), (0.0, 1.0, rhs1)
    if order == 1:
        # O(1) (barred) coefficients close u'' inside the O(eps) term
        E1, _, _, E4, E5 = (float(v[0]) for v in
                            assemble_E(field, epsilon, np.array([1.0]), ZEROTH).as_tuple())
        S = ops1.Sigma
        a1 = -e * S[1] * omega**2 * E1 / E5
        b1 = S[0] + e * (S[2] - S[1] * E4 / E5)
        return (1.0, e * ops0.P, 0.0), (a1, b1, rhs1)
    o0, o1 = ops0, ops1
    a0 = 1.0 - e2 * o0.Q * o0.D * o0.F
    b0 = e * o0.P + e2 * o0.Pt - e2 * o0.Q * o0.D * o0.E
    a1 = o1.C * o1.H1 - o1.D * o1.B * o1.F
    b1 = o1.A + o1.C * o1.H2 - o1.D * o1.B * o1.E
    return (a0, b0, 0.0), (a1, b1, rhs1)


# --------------------------------------------------------------------------
# two-scale data on the BVP grid
# --------------------------------------------------------------------------

_TABLE_NAMES = ("P", "Pt", "Q", "S0", "S1", "S2", "S3", "S4", "S5")


@dataclass
class TwoScale:
    """Effective field plus cell data interpolated to (x_i, x_i/eps mod 1)."""

    field: EffectiveField
    x: np.ndarray
    table: dict
    boundary_cells: dict


def _station(args):
    spec, xs, grid, h_x, y_targets = args
    cells = solve_cells(spec, xs, grid=grid, h_x=h_x)
    coeffs = compute_effective(spec, xs, cells)
    st = compute_cell_stresses(spec, xs, cells, mu0=coeffs["mu0"])
    rows = [cells.sample("P", y_targets), cells.sample("Pt", y_targets),
            cells.sample("Q", y_targets)]
    rows += [st.sample(j, y_targets) for j in range(6)]
    return coeffs, np.array(rows), cells


def _diagonal_spline(xs, V, x):
    """Evaluate, for each i, the x-spline through column i of V at x[i]."""
    spl = CubicSpline(xs, V, axis=0)
    idx = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, len(xs) - 2)
    t = x - xs[idx]
    cols = np.arange(len(x))
    c = spl.c[:, idx, cols]
    return ((c[0] * t + c[1]) * t + c[2]) * t + c[3]


def two_scale_data(spec, x, stations=DEFAULT_STATIONS, h_x=DEFAULT_HX, threads=None):
    """Solve cells on ``stations`` uniform x-stations and map them onto ``x``.

    Cell functions and stresses are sampled at the fast coordinates
    y_i = x_i / eps of every grid point and then splined in the slow
    coordinate; all six stresses and P, Ptilde, Q are continuous in y.
    """
    x = np.asarray(x, dtype=float)
    xs = np.linspace(0.0, 1.0, stations)
    y = np.mod(x * spec.epsilon_inverse, 1.0)
    grid = default_grid(spec)
    jobs = [(spec, float(s), grid, h_x, y) for s in xs]
    workers = threads if threads is not None else thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            res = list(pool.map(_station, jobs))
    else:
        res = [_station(j) for j in jobs]
    samples = {k: np.array([r[0][k] for r in res]) for k in res[0][0]}
    field = EffectiveField(xs, samples, spec)
    stack = np.array([r[1] for r in res])  # (stations, 9, len(x))
    table = {n: _diagonal_spline(xs, stack[:, j, :], x) for j, n in enumerate(_TABLE_NAMES)}
    boundary = {0.0: res[0][2], 1.0: res[-1][2]}
    return TwoScale(field, x, table, boundary)


# --------------------------------------------------------------------------
# mean-field solve
# --------------------------------------------------------------------------

@dataclass
class MeanField:
    order: int
    x: np.ndarray
    u: np.ndarray
    u_x: np.ndarray
    rows: tuple
    closure: Closure
    condition: float


def _condition_estimate(A, lu):
    n = A.shape[0]
    inv = LinearOperator((n, n), matvec=lu.solve, rmatvec=lambda v: lu.solve(v, trans="T"),
                         dtype=float)
    return float(onenormest(A) * onenormest(inv))


def solve_mean_bvp(spec, order, omega, tau=1.0, grid_size=DEFAULT_GRID, data=None):
    """Order-j mean field <u>^[j] by second-order finite differences.

    Interior rows are central differences scaled by h^2; the end conditions
    use one-sided three-point derivatives.

    Raises
    ------
    ResonanceError
        When the estimated condition number of the system exceeds 1e12.
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if grid_size < 5:
        raise ValueError("grid_size must be at least 5")
    x = np.linspace(0.0, 1.0, grid_size)
    if data is None:
        data = two_scale_data(spec, x)
    eps = spec.epsilon
    field = data.field
    level = LEVEL_OF_ORDER[order]
    clo = closure(field, eps, omega, x, level)
    ops0, ops1 = boundary_operators(field, eps, omega, data.boundary_cells, SECOND)
    row0, row1 = boundary_rows(order, ops0, ops1, eps, omega, field)
    n = grid_size
    h = x[1] - x[0]
    # u'' + D E u' + D F u = 0, times h^2
    p = clo.D * clo.E
    q = clo.D * clo.F
    lower = 1.0 - 0.5 * h * p[1:-1]
    diag = -2.0 + h * h * q[1:-1]
    upper = 1.0 + 0.5 * h * p[1:-1]
    i = np.arange(1, n - 1)
    rows = [i, i, i]
    cols = [i - 1, i, i + 1]
    vals = [lower, diag, upper]
    a0, b0, r0 = row0
    a1, b1, r1 = row1
    # a u + b (-3u0 + 4u1 - u2)/(2h) at x = 0, (3uN - 4uN-1 + uN-2)/(2h) at x = 1
    rows += [np.zeros(3, int), np.full(3, n - 1)]
    cols += [np.array([0, 1, 2]), np.array([n - 1, n - 2, n - 3])]
    vals += [np.array([a0 - 1.5 * b0 / h, 2.0 * b0 / h, -0.5 * b0 / h]) * h,
             np.array([a1 + 1.5 * b1 / h, -2.0 * b1 / h, 0.5 * b1 / h]) * h]
    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    rhs = np.zeros(n)
    rhs[0] = r0 * tau * h
    rhs[-1] = r1 * tau * h
    try:
        lu = splu(A)
    except RuntimeError as exc:
        raise ResonanceError(f"singular system at omega={omega}; shift omega slightly") from exc
    cond = _condition_estimate(A, lu)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ResonanceError(
            f"near-resonant mean-field problem at omega={omega} (condition ~{cond:.2e}); "
            "shift omega slightly")
    u = lu.solve(rhs)
    u_x = np.gradient(u, h, edge_order=2)
    return MeanField(order, x, u, u_x, (row0, row1), clo, cond)


# --------------------------------------------------------------------------
# reconstruction
# --------------------------------------------------------------------------

def reconstruct_field(spec, order, mean, data):
    """Displacement u^[j] and stress sigma^[j] from the mean field and cell data."""
    eps = spec.epsilon
    t = data.table
    u, u_x = mean.u, mean.u_x
    mu0 = data.field("mu0", mean.x)
    if order == 0:
        disp = u.copy()
        sigma = mu0 * t["S0"] * u_x
    elif order == 1:
        u_xx, _ = derivative_closure(1, mean.closure, u, u_x)
        disp = u + eps * t["P"] * u_x
        sigma = mu0 * (t["S0"] * u_x + eps * (t["S1"] * u_xx + t["S2"] * u_x))
    else:
        u_xx, u_xxx = derivative_closure(2, mean.closure, u, u_x)
        A = t["S0"] + eps * t["S2"] + eps**2 * t["S3"]
        B = eps * t["S1"] + eps**2 * t["S4"]
        C = eps**2 * t["S5"]
        disp = u + (eps * t["P"] + eps**2 * t["Pt"]) * u_x + eps**2 * t["Q"] * u_xx
        sigma = mu0 * (A * u_x + B * u_xx + C * u_xxx)
    return WaveField(mean.x, disp, sigma, order, mean=u, mean_x=u_x)


def solve_bvp(spec, order, omega, tau=1.0, grid_size=DEFAULT_GRID, data=None):
    """Mean-field solve followed by reconstruction."""
    x = np.linspace(0.0, 1.0, grid_size)
    if data is None:
        data = two_scale_data(spec, x)
    mean = solve_mean_bvp(spec, order, omega, tau, grid_size, data)
    return reconstruct_field(spec, order, mean, data)


FIELD_COLUMNS = ("x", "u_exact", "u0", "u1", "u2", "sigma_exact", "sigma0", "sigma1",
                 "sigma2", "mean0", "mean1", "mean2")


@dataclass
class BVPStudy:
    exact: WaveField
    fields: dict

    def table(self):
        f = self.fields
        cols = [self.exact.x, self.exact.u]
        cols += [f[j].u for j in (0, 1, 2)]
        cols += [self.exact.sigma] + [f[j].sigma for j in (0, 1, 2)]
        cols += [f[j].mean for j in (0, 1, 2)]
        return np.column_stack(cols)

    def l2_error(self, order):
        """Trapezoid L2 norm of u^[j] - u_exact on [0, 1]."""
        d = self.fields[order].u - self.exact.u
        return float(np.sqrt(np.trapezoid(d * d, self.exact.x)))

    def relative_l2_error(self, order):
        ref = np.sqrt(np.trapezoid(self.exact.u**2, self.exact.x))
        return self.l2_error(order) / ref

    def traction_residual(self, order, tau=1.0):
        return abs(self.fields[order].sigma[-1] - tau) / abs(tau)


def run_bvp(spec, omega, tau=1.0, grid_size=DEFAULT_GRID, orders=(0, 1, 2), data=None):
    """Exact and homogenized fields on a shared uniform grid."""
    x = np.linspace(0.0, 1.0, grid_size)
    if data is None:
        data = two_scale_data(spec, x)
    exact = exact_bvp(spec, omega, tau, x=x)
    fields = {j: solve_bvp(spec, j, omega, tau, grid_size, data) for j in orders}
    return BVPStudy(exact, fields)
