"""Two-scale material description G(x, y), rho(x, y) of a quasi-periodic bar.

The macroscopic part (G', rho') depends on the slow coordinate x, the
microscopic part (G'', rho'') is 1-periodic in the fast coordinate y = x/eps.
The two combine either additively or multiplicatively.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InsufficientDataError, InvalidMaterialError


# --------------------------------------------------------------------------
# macroscopic profiles
# --------------------------------------------------------------------------

class MacroProfile:
    """Base class for the smooth macroscopic variation (G', rho')."""

    periodic = False

    def G(self, x):
        return self.derivative("G", x, 0)

    def rho(self, x):
        return self.derivative("rho", x, 0)

    def derivative(self, which, x, order):
        raise NotImplementedError

    def is_constant(self):
        return False


@dataclass(frozen=True)
class LinearProfile(MacroProfile):
    """G'(x) = 1 + gamma_G x and rho'(x) = 1 + gamma_rho x."""

    gamma_G: float = 0.0
    gamma_rho: float = 0.0

    def derivative(self, which, x, order):
        _check_which(which)
        _check_order(order)
        x = np.asarray(x, dtype=float)
        g = self.gamma_G if which == "G" else self.gamma_rho
        if order == 0:
            return 1.0 + g * x
        if order == 1:
            return np.full_like(x, g)
        return np.zeros_like(x)

    def is_constant(self):
        return self.gamma_G == 0.0 and self.gamma_rho == 0.0


@dataclass(frozen=True)
class SinusoidalProfile(MacroProfile):
    """G'(x) = 1 + gamma_G sin(2 pi x + beta_G), likewise for rho'."""

    gamma_G: float = 0.0
    beta_G: float = 0.0
    gamma_rho: float = 0.0
    beta_rho: float = 0.0

    periodic = True

    def derivative(self, which, x, order):
        _check_which(which)
        _check_order(order)
        x = np.asarray(x, dtype=float)
        if which == "G":
            g, b = self.gamma_G, self.beta_G
        else:
            g, b = self.gamma_rho, self.beta_rho
        k = 2.0 * np.pi
        phase = k * x + b
        # d^n/dx^n sin(kx + b) = k^n sin(kx + b + n pi/2)
        val = g * k**order * np.sin(phase + order * np.pi / 2.0)
        if order == 0:
            val = 1.0 + val
        return val

    def is_constant(self):
        return self.gamma_G == 0.0 and self.gamma_rho == 0.0


class TabulatedProfile(MacroProfile):
    """Macroscopic profile given by samples, interpolated by cubic splines.

    Parameters
    ----------
    G_samples, rho_samples : array_like, shape (m, 2)
        ``[x, value]`` pairs. At least 4 samples each.
    periodic : bool
        Declare the profile 1-periodic (needed by the dispersion routines).
    """

    def __init__(self, G_samples, rho_samples, periodic=False):
        G_samples = np.asarray(G_samples, dtype=float)
        rho_samples = np.asarray(rho_samples, dtype=float)
        for name, s in (("G", G_samples), ("rho", rho_samples)):
            if s.ndim != 2 or s.shape[1] != 2:
                raise ValueError(f"tabulated {name} must be a list of [x, value] pairs")
            if len(s) < 4:
                raise InsufficientDataError(
                    f"tabulated {name} needs at least 4 samples, got {len(s)}")
            if np.any(s[:, 1] <= 0):
                raise InvalidMaterialError(f"tabulated {name}' must be positive")
        self.G_samples = G_samples
        self.rho_samples = rho_samples
        self.periodic = bool(periodic)
        self._splines = {
            "G": CubicSpline(G_samples[:, 0], G_samples[:, 1]),
            "rho": CubicSpline(rho_samples[:, 0], rho_samples[:, 1]),
        }

    def derivative(self, which, x, order):
        _check_which(which)
        _check_order(order)
        samples = self.G_samples if which == "G" else self.rho_samples
        if order == 3 and len(samples) < 6:
            raise InsufficientDataError(
                "third derivative of a tabulated profile needs at least 6 samples")
        return self._splines[which](np.asarray(x, dtype=float), order)

    def is_constant(self):
        return (np.ptp(self.G_samples[:, 1]) == 0.0
                and np.ptp(self.rho_samples[:, 1]) == 0.0)

    def __repr__(self):
        return (f"TabulatedProfile({len(self.G_samples)} G samples, "
                f"{len(self.rho_samples)} rho samples)")


def macro_derivative(profile, which, x, order):
    """Analytic (or spline) x-derivative of G' or rho' of order 1..3."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    return profile.derivative(which, x, order)


# --------------------------------------------------------------------------
# microscopic profiles
# --------------------------------------------------------------------------

class MicroProfile:
    """Base class for the Y-periodic fluctuation (G'', rho'') on Y = (0, 1)."""

    def values(self, y, multiplicative=False):
        """Return (G'', rho'') at y in [0, 1), right-limits at interfaces."""
        raise NotImplementedError

    def breakpoints(self):
        """Points in (0, 1) where the profile is not smooth."""
        raise NotImplementedError

    def is_trivial(self):
        return False


@dataclass(frozen=True)
class Bilaminate(MicroProfile):
    """Two-phase cell: value -delta on (0, alpha), +delta on (alpha, 1).

    In multiplicative mode the fluctuation is read as 1 + delta(-1 + 2H(y - alpha))
    so that G'' and rho'' stay positive.
    """

    alpha: float = 0.5
    delta_G: float = 0.0
    delta_rho: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidMaterialError(f"alpha must lie in (0, 1), got {self.alpha}")

    def values(self, y, multiplicative=False):
        y = np.asarray(y, dtype=float)
        sign = np.where(y >= self.alpha, 1.0, -1.0)
        g = self.delta_G * sign
        r = self.delta_rho * sign
        if multiplicative:
            g = 1.0 + g
            r = 1.0 + r
        return g, r

    def breakpoints(self):
        return [self.alpha]

    def is_trivial(self):
        return self.delta_G == 0.0 and self.delta_rho == 0.0


class TabulatedPeriodic(MicroProfile):
    """Piecewise-linear periodic fluctuation with explicit discontinuities.

    Each smooth piece between consecutive interfaces is interpolated
    linearly from the samples falling inside it (constant extension to the
    piece ends).

    Parameters
    ----------
    G_samples, rho_samples : array_like, shape (m, 2)
        ``[y, value]`` pairs with y in [0, 1).
    interfaces : sequence of float
        Every discontinuity location in (0, 1).
    """

    def __init__(self, G_samples, rho_samples, interfaces=()):
        self.G_samples = np.asarray(G_samples, dtype=float)
        self.rho_samples = np.asarray(rho_samples, dtype=float)
        self.interfaces = sorted(float(a) for a in interfaces)
        if any(not 0.0 < a < 1.0 for a in self.interfaces):
            raise InvalidMaterialError("interfaces must lie in (0, 1)")
        for name, s in (("G", self.G_samples), ("rho", self.rho_samples)):
            if s.ndim != 2 or s.shape[1] != 2 or len(s) == 0:
                raise ValueError(f"tabulated {name}'' must be a list of [y, value] pairs")
        self._edges = np.array([0.0, *self.interfaces, 1.0])

    def _interp(self, samples, y):
        out = np.empty_like(y)
        piece = np.searchsorted(self._edges, y, side="right") - 1
        piece = np.clip(piece, 0, len(self._edges) - 2)
        for k in range(len(self._edges) - 1):
            sel = piece == k
            if not np.any(sel):
                continue
            lo, hi = self._edges[k], self._edges[k + 1]
            inside = (samples[:, 0] >= lo) & (samples[:, 0] < hi)
            pts = samples[inside]
            if len(pts) == 0:
                raise InsufficientDataError(
                    f"no samples inside micro piece [{lo}, {hi})")
            order = np.argsort(pts[:, 0])
            out[sel] = np.interp(y[sel], pts[order, 0], pts[order, 1])
        return out

    def values(self, y, multiplicative=False):
        y = np.asarray(y, dtype=float)
        flat = np.atleast_1d(y).ravel()
        G = self._interp(self.G_samples, flat).reshape(y.shape)
        rho = self._interp(self.rho_samples, flat).reshape(y.shape)
        return G, rho

    def breakpoints(self):
        pts = set(self.interfaces)
        for s in (self.G_samples, self.rho_samples):
            pts.update(float(v) for v in s[:, 0] if 0.0 < v < 1.0)
        return sorted(pts)

    def is_trivial(self):
        return False

    def __repr__(self):
        return f"TabulatedPeriodic(interfaces={self.interfaces})"


# --------------------------------------------------------------------------
# the full medium
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MediumSpec:
    """Quasi-periodic medium with eps = 1 / epsilon_inverse."""

    macro: MacroProfile
    micro: MicroProfile
    separation: str = "additive"
    epsilon_inverse: int = 50
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.separation not in ("additive", "multiplicative"):
            raise InvalidMaterialError(
                f"separation must be 'additive' or 'multiplicative', got {self.separation!r}")
        n = self.epsilon_inverse
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise InvalidMaterialError(f"epsilon_inverse must be a positive integer, got {n!r}")
        object.__setattr__(self, "epsilon_inverse", int(n))

    @property
    def epsilon(self):
        return 1.0 / self.epsilon_inverse

    @property
    def epsilon_fraction(self):
        return Fraction(1, self.epsilon_inverse)

    @property
    def multiplicative(self):
        return self.separation == "multiplicative"

    def with_epsilon_inverse(self, n):
        return MediumSpec(self.macro, self.micro, self.separation, n, self.name)

    def without_microstructure(self):
        """The microstructure-free companion G = G', rho = rho'."""
        micro = Bilaminate(0.5, 0.0, 0.0)
        return MediumSpec(self.macro, micro, "additive", self.epsilon_inverse,
                          (self.name + " (micro-free)").strip())

    def with_constant_macro(self):
        return MediumSpec(LinearProfile(0.0, 0.0), self.micro, self.separation,
                          self.epsilon_inverse, self.name)


def eval_cell(spec, x, y):
    """G(x, y) and rho(x, y) on the two-scale domain (no positivity check)."""
    y = np.mod(np.asarray(y, dtype=float), 1.0)
    Gp = spec.macro.G(x)
    rp = spec.macro.rho(x)
    Gpp, rpp = spec.micro.values(y, multiplicative=spec.multiplicative)
    if spec.multiplicative:
        return Gp * Gpp, rp * rpp
    return Gp + Gpp, rp + rpp


def eval_total(spec, x, y):
    """Total coefficients at slow coordinate x and fast coordinate y.

    ``y`` is wrapped into [0, 1); at an interface the right-limit is returned.
    Arrays broadcast against each other.

    Raises
    ------
    InvalidMaterialError
        If G or rho is not strictly positive at some sampled point.
    """
    x_arr, y_arr = np.broadcast_arrays(np.asarray(x, dtype=float),
                                       np.asarray(y, dtype=float))
    G, rho = eval_cell(spec, x_arr, y_arr)
    G = np.broadcast_to(G, x_arr.shape)
    rho = np.broadcast_to(rho, x_arr.shape)
    bad = (G <= 0) | (rho <= 0)
    if np.any(bad):
        i = np.flatnonzero(bad.ravel())[0]
        xb, yb = x_arr.ravel()[i], y_arr.ravel()[i]
        raise InvalidMaterialError(
            f"non-positive material at (x={xb:.6g}, y={yb:.6g}): "
            f"G={G.ravel()[i]:.6g}, rho={rho.ravel()[i]:.6g}", x=xb, y=yb)
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return float(G), float(rho)
    return G, rho


def eval_physical(spec, x):
    """G and rho of the real bar at physical position x (y = x/eps)."""
    x = np.asarray(x, dtype=float)
    return eval_total(spec, x, x * spec.epsilon_inverse)


def _check_which(which):
    if which not in ("G", "rho"):
        raise ValueError(f"which must be 'G' or 'rho', got {which!r}")


def _check_order(order):
    if order not in (0, 1, 2, 3):
        raise ValueError(f"derivative order must be 0..3, got {order!r}")
