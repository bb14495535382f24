"""First-pass-band dispersion of a quasi-periodic bar on its unit macrocell.

Bloch waves u(x) = v(x) exp(ikx) with v 1-periodic are sought for k in
(0, pi]. The exact branch comes from the macrocell monodromy matrix
(2 cos k = tr M(w)); the homogenized branches from a periodic eigenproblem
for the mean field, discretized by Fourier collocation.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig, toeplitz
from scipy.optimize import brentq, minimize_scalar

from .effective import FIRST, SECOND, ZEROTH, assemble_E, assemble_E_bloch, build_field, thread_count
from .errors import AlignmentError, BandGapError, InvalidMaterialError
from .oracle import DEFAULT_SLICES, chain_product, chain_propagators, slice_chain

MODELS = ("Exact", "Homog0", "Homog2", "Baseline", "MicrostructureFree")
DEFAULT_MODES = 64
ROOT_XTOL = 1e-12


class NonPropagatingModeWarning(UserWarning):
    pass


@dataclass
class DispersionBranch:
    """omega(k) on a k-grid in (0, pi] for one model."""

    k: np.ndarray
    omega: np.ndarray
    model: str
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS and not self.model.startswith("Homog"):
            raise ValueError(f"unknown model tag {self.model!r}")


@dataclass(frozen=True)
class Monodromy:
    matrix: np.ndarray
    slices: int

    @property
    def trace(self):
        return float(self.matrix[0, 0] + self.matrix[1, 1])

    @property
    def det(self):
        return float(np.linalg.det(self.matrix))


def default_k_grid(n=200):
    """``n`` uniform points in (0, pi], excluding k = 0."""
    return np.pi * np.arange(1, n + 1) / n


def check_periodic(spec):
    if not (spec.macro.periodic or spec.macro.is_constant()):
        raise InvalidMaterialError(
            "dispersion needs a 1-periodic macro profile; linear grading is not periodic")


def monodromy(spec, omega, slices_per_unit_cell=DEFAULT_SLICES):
    """Propagator of (u, G u_x) across the macrocell [0, 1]."""
    if slices_per_unit_cell < 16:
        raise ValueError("slices_per_unit_cell must be at least 16")
    chain = slice_chain(spec, slices_per_unit_cell)
    M = chain_product(chain_propagators(chain, omega))
    return Monodromy(M, len(chain))


class _HalfTrace:
    """w -> tr M(w) / 2 with the slice chain built once."""

    def __init__(self, spec, slices):
        self.chain = slice_chain(spec, slices)

    def __call__(self, w):
        M = chain_product(chain_propagators(self.chain, w))
        return 0.5 * (M[0, 0] + M[1, 1])


def _band_edge(half, c, max_steps=8192):
    """Upper end of the first pass band: first w > 0 where tr M / 2 hits -1."""
    step = np.pi * c / 256.0
    w_pp = w_prev = 0.0
    h_prev = 1.0
    for i in range(1, max_steps):
        w = i * step
        h = half(w)
        if h < -1.0:
            return brentq(lambda t: half(t) + 1.0, w_prev, w, xtol=ROOT_XTOL)
        if h > h_prev:
            # turned upward: either a closed gap (tangency at -1) or a gap
            # narrower than the scan step
            res = minimize_scalar(half, bounds=(w_pp, w), method="bounded",
                                  options={"xatol": 1e-12})
            if res.fun < -1.0:
                return brentq(lambda t: half(t) + 1.0, w_pp, res.x, xtol=ROOT_XTOL)
            return float(res.x)
        w_pp, w_prev, h_prev = w_prev, w, h
    raise BandGapError("first band edge not found", last_valid_k=None)


def _mean_field(spec, n_gauss=8):
    """Cell-by-cell Gauss averages <1/G> and <rho> over the macrocell."""
    from numpy.polynomial.legendre import leggauss

    from .material import eval_total

    xi, wi = leggauss(n_gauss)
    pieces = np.array([0.0, *spec.micro.breakpoints(), 1.0])
    n = spec.epsilon_inverse
    inv_G = rho = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        y = a + 0.5 * (b - a) * (xi + 1.0)
        x = (np.arange(n)[:, None] + y[None, :]) / n
        G, r = eval_total(spec, x, np.broadcast_to(y, x.shape))
        w = 0.5 * (b - a) * wi / n
        inv_G += np.sum(w / G)
        rho += np.sum(w * r)
    return inv_G, rho


def baseline_speed(spec):
    """sqrt(mu_hom / rho_hom) with harmonic / arithmetic means of G, rho."""
    inv_G, rho = _mean_field(spec)
    return float(np.sqrt(1.0 / inv_G / rho))


def baseline_dispersion(spec, k_grid=None):
    k = default_k_grid() if k_grid is None else np.asarray(k_grid, dtype=float)
    return DispersionBranch(k, baseline_speed(spec) * k, "Baseline")


def _check_k(k):
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0.0) or np.any(k > np.pi * (1 + 1e-14)):
        raise ValueError("k-grid must lie in (0, pi]")
    return k


def exact_dispersion(spec, k_grid=None, slices=DEFAULT_SLICES, threads=None, model="Exact"):
    """Acoustic branch from tr M(w) / 2 = cos k.

    On [0, w_edge] the half-trace decreases monotonically from 1 to -1, so
    every k in (0, pi] has exactly one root there, bracketed by Brent's method.
    """
    check_periodic(spec)
    k = _check_k(default_k_grid() if k_grid is None else k_grid)
    half = _HalfTrace(spec, slices)
    c = baseline_speed(spec)
    w_edge = _band_edge(half, c)
    h_edge = half(w_edge)

    def solve(kk):
        ck = np.cos(kk)
        if h_edge - ck >= 0.0:
            return w_edge
        return brentq(lambda w: half(w) - ck, 0.0, w_edge, xtol=ROOT_XTOL, rtol=1e-14)

    workers = threads if threads is not None else thread_count()
    if workers > 1 and len(k) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            omega = np.array(list(pool.map(solve, k)))
    else:
        omega = np.array([solve(kk) for kk in k])
    branch = DispersionBranch(k, omega, model, {"band_edge": w_edge})
    branch.flags["branch_jumps"] = _continuity_flags(k, omega, c)
    return branch


def microstructure_free_dispersion(spec, k_grid=None, slices=DEFAULT_SLICES, threads=None):
    return exact_dispersion(spec.without_microstructure(), k_grid, slices, threads,
                            model="MicrostructureFree")


def _continuity_flags(k, omega, c):
    """Indices i where |w(k_{i+1}) - w(k_i)| exceeds 3 c dk."""
    dk = np.diff(k)
    dw = np.abs(np.diff(omega))
    return [int(i) for i in np.nonzero(dw > 3.0 * c * dk)[0]]


def fourier_matrices(n):
    """First and second spectral differentiation matrices on n periodic points of [0, 1)."""
    if n % 2:
        raise ValueError("number of collocation points must be even")
    h = 2.0 * np.pi / n
    j = np.arange(1, n)
    col1 = np.concatenate(([0.0], 0.5 * (-1.0) ** j / np.tan(j * h / 2.0)))
    D1 = toeplitz(col1, -col1)
    col2 = np.concatenate(([-np.pi**2 / (3.0 * h**2) - 1.0 / 6.0],
                           -0.5 * (-1.0) ** j / np.sin(j * h / 2.0) ** 2))
    D2 = toeplitz(col2)
    s = 2.0 * np.pi  # from [0, 2pi) to [0, 1)
    return s * D1, s * s * D2


def _level_of(order):
    return {0: ZEROTH, 1: FIRST, 2: SECOND}[order]


def homogenized_dispersion(spec, order=2, k_grid=None, field=None, modes=DEFAULT_MODES,
                           im_tol=1e-6):
    """Acoustic branch of the effective Bloch problem at ``order`` 0 or 2.

    Solves w^2 A v = -B v with A = E6 + E7 D + E3 D^2 and
    B = E8 + E9 D + E5 D^2 at each k. The eigenvalue kept is the one of
    smallest positive real part; when its eigenvector overlaps the previous
    k's selection poorly, the best-overlapping low eigenvalue is kept instead.
    """
    check_periodic(spec)
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    k = _check_k(default_k_grid() if k_grid is None else k_grid)
    if field is None:
        field = build_field(spec)
    x = np.arange(modes) / modes
    E = assemble_E(field, spec.epsilon, x, _level_of(order))
    D1, D2 = fourier_matrices(modes)
    omega = np.empty(len(k))
    nonprop = []
    prev = None
    for i, kk in enumerate(k):
        E6, E7, E8, E9 = assemble_E_bloch(*E.as_tuple(), kk)
        A = np.diag(E6) + E7[:, None] * D1 + E.E3[:, None] * D2
        B = np.diag(E8) + E9[:, None] * D1 + E.E5[:, None] * D2
        lam, vec = eig(-B, A)
        ok = np.isfinite(lam) & (lam.real > 0.0)
        idx = np.nonzero(ok)[0]
        if len(idx) == 0:
            raise BandGapError(f"no propagating mode at k={kk}",
                               last_valid_k=float(k[i - 1]) if i else None)
        idx = idx[np.argsort(lam.real[idx])]
        pick = idx[0]
        if prev is not None:
            cand = idx[:4]
            ov = np.abs(vec[:, cand].conj().T @ prev) / np.linalg.norm(vec[:, cand], axis=0)
            if ov[0] < 0.5 and ov.max() > ov[0]:
                pick = cand[int(np.argmax(ov))]
        val = lam[pick]
        if abs(val.imag) > im_tol * abs(val.real):
            nonprop.append(float(kk))
            warnings.warn(f"complex omega^2 at k={kk}: {val}", NonPropagatingModeWarning)
        omega[i] = np.sqrt(val.real)
        v = vec[:, pick]
        prev = v / np.linalg.norm(v)
    branch = DispersionBranch(k, omega, f"Homog{order}", {"non_propagating": nonprop})
    branch.flags["branch_jumps"] = _continuity_flags(k, omega, baseline_speed(spec))
    return branch


def dispersion_error(exact, approx):
    """|w_approx - w_exact| / ||w_exact||_2, the norm by trapezoid rule in k."""
    if exact.k.shape != approx.k.shape or not np.array_equal(exact.k, approx.k):
        raise AlignmentError("dispersion branches live on different k-grids")
    norm = np.sqrt(np.trapezoid(exact.omega**2, exact.k))
    return np.abs(approx.omega - exact.omega) / norm


def l1_error(err, k):
    return float(np.trapezoid(err, k))
