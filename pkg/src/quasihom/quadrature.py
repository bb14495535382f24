"""Composite Gauss-Legendre grid on the unit cell with interface-aligned panels."""
from __future__ import annotations

import numpy as np
from numpy.polynomial import legendre as L


def _reference_rule(order):
    xi, wi = L.leggauss(order)
    # nodal values -> Legendre coefficients
    V = L.legvander(xi, order - 1)
    Vinv = np.linalg.inv(V)
    # integral from -1 to xi_i of the interpolant, as a matrix on nodal values
    cumul = np.empty((order, order))
    for j in range(order):
        c = Vinv[:, j]
        cumul[:, j] = L.legval(xi, L.legint(c, lbnd=-1))
    return xi, wi, Vinv, cumul


class CellGrid:
    """Panels of ``order``-point Gauss-Legendre nodes covering Y = (0, 1).

    Panel edges include every breakpoint, so integrands that are smooth on
    each piece are integrated with spectral accuracy (exactly, for
    polynomials of degree < 2*order).

    Parameters
    ----------
    breakpoints : sequence of float
        Discontinuity locations in (0, 1).
    n_panels : int
        Total number of panels, shared out in proportion to piece length.
    order : int
        Gauss points per panel.
    """

    def __init__(self, breakpoints=(), n_panels=256, order=8):
        bps = sorted({float(b) for b in breakpoints if 0.0 < b < 1.0})
        pieces = np.array([0.0, *bps, 1.0])
        lengths = np.diff(pieces)
        counts = np.maximum(1, np.round(n_panels * lengths).astype(int))
        edges = [pieces[:1]]
        for a, b, m in zip(pieces[:-1], pieces[1:], counts):
            edges.append(np.linspace(a, b, m + 1)[1:])
        self.edges = np.concatenate(edges)
        self.breakpoints = bps
        self.order = order
        self.n_panels = len(self.edges) - 1
        xi, wi, self._Vinv, self._cumul = _reference_rule(order)
        self._xi = xi
        a = self.edges[:-1, None]
        half = 0.5 * np.diff(self.edges)[:, None]
        self._half = half
        self.nodes2d = a + half * (xi[None, :] + 1.0)
        self.weights2d = half * wi[None, :]
        self.y = self.nodes2d.ravel()
        self.weights = self.weights2d.ravel()

    @property
    def size(self):
        return self.y.size

    def mean(self, f):
        return float(np.dot(self.weights, f))

    def antiderivative(self, f):
        """Integral from 0 to each node, and the total over Y."""
        f2 = np.reshape(f, self.nodes2d.shape)
        local = (f2 @ self._cumul.T) * self._half
        totals = (self.weights2d * f2).sum(axis=1)
        offsets = np.concatenate(([0.0], np.cumsum(totals)[:-1]))
        return (local + offsets[:, None]).ravel(), float(totals.sum())

    def sample(self, f, y):
        """Evaluate the piecewise interpolant of nodal values ``f`` at ``y``.

        ``y`` is wrapped into [0, 1]; points on a panel edge use the panel to
        their right except y = 1, which uses the last panel.
        """
        y = np.asarray(y, dtype=float)
        yw = np.where(y == 1.0, 1.0, np.mod(y, 1.0))
        idx = np.searchsorted(self.edges, yw, side="right") - 1
        idx = np.clip(idx, 0, self.n_panels - 1)
        a = self.edges[idx]
        h = self.edges[idx + 1] - a
        xi = 2.0 * (yw - a) / h - 1.0
        coef = np.reshape(f, self.nodes2d.shape) @ self._Vinv.T
        vals = L.legvander(xi, self.order - 1)
        return np.einsum("...k,...k->...", vals, coef[idx])
