"""Cell problems of second-order two-scale homogenization in 1D.

Every cell problem has the flux form

    [G (w_y + t)]_y = s   on Y = (0, 1),   w and G (w_y + t) Y-periodic,  <w> = 0,

with continuity of w and of the flux across interfaces. Integrating once
gives the flux S(y) + c with S the antiderivative of s, and c is fixed by
periodicity of w. The six problems (P, Q, Ptilde, Qtilde, R, Rtilde) only
differ in the data (t, s), which are assembled from lower-order cell
functions and their x-derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CompatibilityError, DependencyError, InvalidMaterialError
from .material import eval_total
from .quadrature import CellGrid

CELL_FUNCTIONS = ("P", "Q", "Pt", "Qt", "R", "Rt")
DEFAULT_HX = 1e-3
COMPAT_TOL = 1e-9


# --------------------------------------------------------------------------
# the generic periodic flux problem
# --------------------------------------------------------------------------

@dataclass
class FluxSolution:
    grid: object
    w: np.ndarray
    w_y: np.ndarray
    flux: np.ndarray
    source_mean: float = 0.0


def _as_nodal(f, y):
    if callable(f):
        return np.broadcast_to(np.asarray(f(y), dtype=float), y.shape).copy()
    return np.broadcast_to(np.asarray(f, dtype=float), y.shape)


def _check_compat(source_mean, s, tol, problem):
    scale = max(1.0, float(np.max(np.abs(s))) if np.size(s) else 1.0)
    if abs(source_mean) > tol * scale:
        label = f" in cell problem {problem}" if problem else ""
        raise CompatibilityError(
            f"source mean {source_mean:.3e} is not zero{label}; the periodic flux "
            "problem has no solution", residual_mean=source_mean, problem=problem)


def flux_solve(grid, G, t, s, tol=COMPAT_TOL, problem=None):
    """Solve the periodic flux problem on a quadrature ``CellGrid``."""
    if np.any(G <= 0):
        raise InvalidMaterialError("G must be positive on the unit cell")
    S, s_mean = grid.antiderivative(s)
    _check_compat(s_mean, s, tol, problem)
    inv_G = 1.0 / G
    c = (grid.mean(t) - grid.mean(S * inv_G)) / grid.mean(inv_G)
    flux = S + c
    w_y = flux * inv_G - t
    W, _ = grid.antiderivative(w_y)
    w = W - grid.mean(W)
    return FluxSolution(grid, w, w_y, flux, s_mean)


def solve_flux_ode(G, t, s, interfaces=(), grid=None, tol=COMPAT_TOL):
    """Solve ``[G(w_y + t)]_y = s`` with periodicity and zero mean.

    ``G``, ``t`` and ``s`` are callables of y or arrays of nodal values on
    ``grid``; a default grid aligned with ``interfaces`` is built if none is
    given.

    Returns
    -------
    FluxSolution
        Nodal values of w, w_y and the flux G (w_y + t).
    """
    if grid is None:
        grid = CellGrid(interfaces)
    y = grid.y
    return flux_solve(grid, _as_nodal(G, y), _as_nodal(t, y), _as_nodal(s, y), tol=tol)


# --------------------------------------------------------------------------
# the cell-problem chain
# --------------------------------------------------------------------------

class _QuadratureBackend:
    """Exact-quadrature backend used by the production solver."""

    def __init__(self, grid):
        self.grid = grid
        self.y = grid.y

    def material(self, spec, x):
        G, rho = eval_total(spec, np.full_like(self.y, x), self.y)
        return {"G": G, "rho": rho}

    def mean(self, f):
        return self.grid.mean(f)

    def solve(self, mat, t, s, problem):
        sol = flux_solve(self.grid, mat["G"], t, s, problem=problem)
        return sol.w, sol.flux


def _richardson(fn, x, h):
    """Central difference with one Richardson step, applied key-wise to a dict."""
    fp, fm = fn(x + h), fn(x - h)
    fp2, fm2 = fn(x + h / 2), fn(x - h / 2)
    out = {}
    for k in fp:
        d1 = (fp[k] - fm[k]) / (2 * h)
        d2 = (fp2[k] - fm2[k]) / h
        out[k] = (4.0 * d2 - d1) / 3.0
    return out


def _level0(backend, spec, x):
    mat = backend.material(spec, x)
    G, rho = mat["G"], mat["rho"]
    P, flux_P = backend.solve(mat, np.ones_like(G), np.zeros_like(G), "P")
    mu0 = backend.mean(flux_P)
    rho0 = backend.mean(rho)
    return {"mat": mat, "P": P, "flux_P": flux_P, "mu0": mu0, "rho0": rho0,
            "mu0_over_rho0": mu0 / rho0}


_L0_DIFF = ("P", "flux_P", "mu0", "rho0", "mu0_over_rho0")


def _level1(backend, spec, x, h):
    L0 = _level0(backend, spec, x)
    d0 = _richardson(lambda z: _pick(_level0(backend, spec, z), _L0_DIFF), x, h)
    mat = L0["mat"]
    rho = mat["rho"]
    mu0, rho0 = L0["mu0"], L0["rho0"]
    P = L0["P"]
    P_x = d0["P"]
    mu0_x = d0["mu0"]

    s_Q = rho * mu0 / rho0 - L0["flux_P"]
    Q, flux_Q = backend.solve(mat, P, s_Q, "Q")

    s_Pt = rho * mu0_x / rho0 - d0["flux_P"]
    Pt, flux_Pt = backend.solve(mat, P_x, s_Pt, "Ptilde")

    out = dict(L0)
    out.update({
        "P_x": P_x, "mu0_x": mu0_x, "rho0_x": d0["rho0"],
        "d_mu0_over_rho0": d0["mu0_over_rho0"],
        "mu0x_over_rho0": mu0_x / rho0,
        "Q": Q, "flux_Q": flux_Q, "Pt": Pt, "flux_Pt": flux_Pt,
        "mu1": backend.mean(flux_Q), "rho1": backend.mean(rho * P),
        "eta": backend.mean(flux_Pt),
        "src_Q": s_Q, "src_Pt": s_Pt,
    })
    return out


_L1_DIFF = ("Q", "Pt", "flux_Q", "flux_Pt", "mu1", "eta", "mu0x_over_rho0")


def _level2(backend, spec, x, h):
    L1 = _level1(backend, spec, x, h)
    d1 = _richardson(lambda z: _pick(_level1(backend, spec, z, h), _L1_DIFF), x, h)
    mat = L1["mat"]
    rho = mat["rho"]
    P, Q, Pt = L1["P"], L1["Q"], L1["Pt"]
    mu0, rho0, mu1, rho1, eta = L1["mu0"], L1["rho0"], L1["mu1"], L1["rho1"], L1["eta"]
    Q_x, Pt_x = d1["Q"], d1["Pt"]
    P_dev = P - rho1 / rho0

    s_Qt = (rho / rho0 * (eta + d1["mu1"]) - d1["flux_Q"] - L1["flux_Pt"]
            + rho * P_dev * (L1["mu0x_over_rho0"] + L1["d_mu0_over_rho0"]))
    Qt, flux_Qt = backend.solve(mat, Pt + Q_x, s_Qt, "Qtilde")

    s_R = rho / rho0 * mu1 - L1["flux_Q"] + rho * (mu0 / rho0) * P_dev
    R, flux_R = backend.solve(mat, Q, s_R, "R")

    s_Rt = rho / rho0 * d1["eta"] - d1["flux_Pt"] + rho * P_dev * d1["mu0x_over_rho0"]
    Rt, flux_Rt = backend.solve(mat, Pt_x, s_Rt, "Rtilde")

    out = dict(L1)
    out.update({
        "Q_x": Q_x, "Pt_x": Pt_x, "mu1_x": d1["mu1"], "eta_x": d1["eta"],
        "Qt": Qt, "flux_Qt": flux_Qt, "R": R, "flux_R": flux_R,
        "Rt": Rt, "flux_Rt": flux_Rt,
        "src_Qt": s_Qt, "src_R": s_R, "src_Rt": s_Rt,
    })
    return out


def _pick(d, keys):
    return {k: d[k] for k in keys}


# --------------------------------------------------------------------------
# public solution object
# --------------------------------------------------------------------------

_T_OF = {  # the "t" data whose flux G(w_y + t) defines each problem
    "P": lambda d: np.ones_like(d["P"]),
    "Q": lambda d: d["P"],
    "Pt": lambda d: d["P_x"],
    "Qt": lambda d: d["Pt"] + d["Q_x"],
    "R": lambda d: d["Q"],
    "Rt": lambda d: d["Pt_x"],
}


@dataclass
class CellSolution:
    """Six cell functions at one macroscopic station ``x``.

    Fields are stored as nodal values on ``grid``. ``fluxes[name]`` is the
    generalized flux of the problem defining ``name`` (e.g. G(1 + P_y) for P)
    and ``derivs[name]`` the y-derivative of the cell function.
    """

    x: float
    grid: CellGrid
    G: np.ndarray
    rho: np.ndarray
    values: dict
    derivs: dict
    fluxes: dict
    x_derivs: dict
    sources: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.values[name]

    def sample(self, name, y, kind="value"):
        """Interpolate a cell function (or its flux / y-derivative) at ``y``."""
        table = {"value": self.values, "flux": self.fluxes,
                 "deriv": self.derivs, "x_deriv": self.x_derivs}[kind]
        if name not in table:
            raise DependencyError(f"cell data {kind} {name!r} not available at x={self.x}")
        return self.grid.sample(table[name], y)

    def mean(self, f):
        return self.grid.mean(f)

    def to_rows(self):
        """Rows [x, y, P, Q, Ptilde, Qtilde, R, Rtilde] at the grid nodes."""
        cols = [np.full_like(self.grid.y, self.x), self.grid.y]
        cols += [self.values[n] for n in ("P", "Q", "Pt", "Qt", "R", "Rt")]
        return np.column_stack(cols)


def _chain_to_solution(d, grid, x):
    G = d["mat"]["G"]
    values = {n: d[n] for n in CELL_FUNCTIONS}
    fluxes = {n: d["flux_" + n] for n in CELL_FUNCTIONS}
    derivs = {n: fluxes[n] / G - _T_OF[n](d) for n in CELL_FUNCTIONS}
    x_derivs = {"P": d["P_x"], "Pt": d["Pt_x"], "Q": d["Q_x"]}
    sources = {k[4:]: d[k] for k in d if k.startswith("src_")}
    scalars = {k: d[k] for k in ("mu0", "rho0", "mu1", "rho1", "eta", "mu0_x",
                                 "mu1_x", "eta_x")}
    return CellSolution(float(x), grid, G, d["mat"]["rho"], values, derivs,
                        fluxes, x_derivs, sources, scalars)


def solve_cells(spec, x, grid=None, h_x=DEFAULT_HX, n_panels=256):
    """Solve all six cell problems at station ``x``.

    Order is P -> (Q, Ptilde) -> (R, Qtilde, Rtilde). The x-derivatives needed
    by the tilde problems are central differences of re-solved cell data with
    one Richardson step (steps ``h_x`` and ``h_x/2``).
    """
    if grid is None:
        grid = default_grid(spec, n_panels)
    d = _level2(_QuadratureBackend(grid), spec, float(x), h_x)
    return _chain_to_solution(d, grid, x)


def default_grid(spec, n_panels=256):
    return CellGrid(spec.micro.breakpoints(), n_panels=n_panels)


def solve_P(spec, x, grid=None):
    """Cell function P at x; its flux G(1 + P_y) is the constant mu0(x)."""
    grid = grid or default_grid(spec)
    d = _level0(_QuadratureBackend(grid), spec, float(x))
    G = d["mat"]["G"]
    return FluxSolution(grid, d["P"], d["flux_P"] / G - 1.0, d["flux_P"])


def solve_Q(spec, x, P, grid=None):
    """Cell function Q given P (a FluxSolution from :func:`solve_P`)."""
    grid = grid or P.grid
    G, rho = eval_total(spec, np.full_like(grid.y, x), grid.y)
    mu0 = grid.mean(P.flux)
    rho0 = grid.mean(rho)
    s = rho * mu0 / rho0 - P.flux
    return flux_solve(grid, G, P.w, s, problem="Q")


def solve_Ptilde(spec, x, P, P_x, h_x=DEFAULT_HX, grid=None):
    """Cell function Ptilde given P and its x-derivative at x."""
    grid = grid or P.grid
    backend = _QuadratureBackend(grid)
    G, rho = eval_total(spec, np.full_like(grid.y, x), grid.y)
    d0 = _richardson(lambda z: _pick(_level0(backend, spec, z), ("flux_P", "mu0")),
                     float(x), h_x)
    rho0 = grid.mean(rho)
    s = rho * d0["mu0"] / rho0 - d0["flux_P"]
    return flux_solve(grid, G, P_x, s, problem="Ptilde")


def solve_Qtilde_R_Rtilde(spec, x, h_x=DEFAULT_HX, grid=None):
    """The three highest-order cell functions, as a dict of FluxSolutions."""
    sol = solve_cells(spec, x, grid=grid, h_x=h_x)
    return {n: FluxSolution(sol.grid, sol.values[n], sol.derivs[n], sol.fluxes[n])
            for n in ("Qt", "R", "Rt")}


def x_derivative_of_cell(spec, x, which, h_x=DEFAULT_HX, grid=None):
    """x-derivative of one cell function by re-solving at x +- h_x.

    ``which`` is one of ``"P", "Q", "Pt"``.
    """
    grid = grid or default_grid(spec)
    backend = _QuadratureBackend(grid)
    if which == "P":
        fn = lambda z: {"P": _level0(backend, spec, z)["P"]}
    elif which in ("Q", "Pt"):
        fn = lambda z: {which: _level1(backend, spec, z, h_x)[which]}
    else:
        raise ValueError(f"x-derivative available for P, Q, Pt; got {which!r}")
    return _richardson(fn, float(x), h_x)[which]


# --------------------------------------------------------------------------
# finite-difference oracle (independent discretization of the same chain)
# --------------------------------------------------------------------------

class FiniteDifferenceBackend:
    """Conservative periodic finite differences on a uniform node grid.

    Nodes sit at y_i = i/N, fluxes at half-nodes. Material values at nodes
    are cell averages (mean of the values at y_i +- h/4) so that interfaces
    coinciding with nodes are handled to second order.
    """

    def __init__(self, n=10_000):
        self.n = n
        self.h = 1.0 / n
        self.y = np.arange(n) * self.h
        self.y_face = self.y + 0.5 * self.h
        i = np.arange(n)
        ip = (i + 1) % n
        main = np.ones(n)
        D = sp.csr_matrix((np.concatenate([-main, main]),
                           (np.concatenate([i, i]), np.concatenate([i, ip]))),
                          shape=(n, n)) / self.h
        self._D = D  # node -> face forward difference
        self._avg = sp.csr_matrix((np.full(2 * n, 0.5),
                                   (np.concatenate([i, i]), np.concatenate([i, ip]))),
                                  shape=(n, n))  # node -> face average

    def material(self, spec, x):
        xs = np.full_like(self.y, x)
        Gf, _ = eval_total(spec, xs, self.y_face)
        q = 0.25 * self.h
        Gm, rm = eval_total(spec, xs, np.mod(self.y - q, 1.0))
        Gp, rp = eval_total(spec, xs, self.y + q)
        return {"G": 0.5 * (Gm + Gp), "rho": 0.5 * (rm + rp), "Gf": Gf}

    def mean(self, f):
        return float(np.mean(f))

    def solve(self, mat, t, s, problem):
        n = self.n
        Gf = sp.diags(mat["Gf"])
        t_face = self._avg @ t
        # divergence (face -> node) is -D^T
        A = -self._D.T @ Gf @ self._D
        rhs = s + self._D.T @ (mat["Gf"] * t_face)
        _check_compat(self.mean(s), s, COMPAT_TOL, problem)
        ones = sp.csr_matrix(np.ones((n, 1)))
        K = sp.bmat([[A, ones], [ones.T, None]], format="csc")
        sol = spla.spsolve(K, np.concatenate([rhs, [0.0]]))
        w = sol[:n]
        flux_face = mat["Gf"] * (self._D @ w + t_face)
        flux = 0.5 * (flux_face + np.roll(flux_face, 1))
        return w, flux


def solve_cells_fd(spec, x, n=10_000, h_x=3e-3):
    """Cell functions by dense periodic finite differences (oracle).

    The default x-step is larger than the production one: the sparse solves
    carry ~1e-13 roundoff, which nested differencing would otherwise amplify.
    """
    backend = FiniteDifferenceBackend(n)
    d = _level2(backend, spec, float(x), h_x)
    return backend.y, {k: d[k] for k in CELL_FUNCTIONS}, d
