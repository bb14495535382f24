"""Effective coefficients and the operator E1..E5.

The zeroth-order modulus mu0 of a bilaminate is the harmonic mean of its two
phases and the density the arithmetic mean; both are checked against the
closed forms. The higher coefficients carry the gradient of the background.
"""
import numpy as np

from quasihom.effective import COEFFICIENTS, LEVELS, assemble_E, build_field
from quasihom.presets import material
from quasihom.validate import closed_form_coefficients

from _plotting import save_figure

spec = material("material4")
x = np.linspace(0.0, 1.0, 101)
field = build_field(spec, x_grid=x)
s = field.samples

mu0, rho0 = closed_form_coefficients(spec, x)
print("mu0 vs closed form, max rel:", np.max(np.abs(s["mu0"] / mu0 - 1)))
print("rho0 vs closed form, max rel:", np.max(np.abs(s["rho0"] / rho0 - 1)))
for c in COEFFICIENTS:
    print(f"{c:>5}: range [{s[c].min(): .4e}, {s[c].max(): .4e}]")

# the coefficient field is a spline in x, so it can be read off anywhere
print("mu0(0.3) =", float(field("mu0", 0.3)))

for level in LEVELS:
    E = assemble_E(field, spec.epsilon, x, level)
    print(f"{level:>6}: max|E1..E5| =", [f"{np.max(np.abs(e)):.3e}" for e in E.as_tuple()])


def figure(plt):
    fig, axes = plt.subplots(2, 5, figsize=(13, 5), sharex=True)
    for ax, c in zip(axes.ravel(), COEFFICIENTS):
        ax.plot(x, s[c])
        ax.set_title(c)
    fig.suptitle("effective coefficients, material4")
    return fig


save_figure(figure, "02_effective_coefficients.png")
