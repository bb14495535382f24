"""Cell functions of a graded bilaminate.

At each slow position x the six periodic cell functions P, Q, Ptilde,
Qtilde, R and Rtilde are found on the unit cell. The bilaminate makes P
piecewise linear, and the graded background G'(x) makes the tilde
functions switch on only where G' varies.
"""
import numpy as np

from quasihom.cells import CELL_FUNCTIONS, solve_cells, solve_cells_fd
from quasihom.presets import material

from _plotting import save_figure

spec = material("material3")
print(spec)

# quadrature solution at a few stations
y = np.linspace(0.0, 1.0, 401, endpoint=False)
for x in (0.0, 0.25, 0.5):
    sol = solve_cells(spec, x)
    peaks = ", ".join(f"{n}={np.max(np.abs(sol.sample(n, y))):.3e}" for n in CELL_FUNCTIONS)
    print(f"x={x:4.2f}  max|.|: {peaks}")

# G'_x vanishes at x = 1/4, and with it Ptilde and Qtilde
sol = solve_cells(spec, 0.25)
print("Ptilde at x=0.25 is zero:", np.max(np.abs(sol.sample("Pt", y))) == 0.0)

# cross-check against a 10^4-point finite-difference discretization
yf, fd, _ = solve_cells_fd(spec, 0.5)
sol = solve_cells(spec, 0.5)
for n in CELL_FUNCTIONS:
    err = np.max(np.abs(sol.sample(n, yf) - fd[n])) / np.max(np.abs(fd[n]))
    print(f"{n:>2}: quadrature vs FD relative max error {err:.1e}")


def figure(plt):
    fig, axes = plt.subplots(2, 3, figsize=(10, 5), sharex=True)
    for ax, n in zip(axes.ravel(), CELL_FUNCTIONS):
        ax.plot(y, sol.sample(n, y))
        ax.set_title(n)
    fig.suptitle("cell functions, material3, x = 0.5")
    return fig


save_figure(figure, "01_cell_functions.png")
