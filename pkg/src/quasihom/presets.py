"""Named materials and worked examples of sinusoidally and linearly graded bilaminates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .material import Bilaminate, LinearProfile, MediumSpec, SinusoidalProfile

PI = np.pi

# name: (macro kind, gamma_G, delta_G, beta_G, gamma_rho, delta_rho, beta_rho, alpha)
MATERIAL_TABLE = {
    "material1": ("sinusoidal", 1 / 5, 3 / 5, 0.0, 1 / 5, 1 / 25, 0.0, 1 / 2),
    "material2": ("sinusoidal", 1 / 5, 1 / 5, 0.0, 0.0, 0.0, 0.0, 1 / 2),
    "material3": ("sinusoidal", 1 / 5, 1 / 5, 0.0, 1 / 5, 1 / 5, 0.0, 1 / 2),
    "material4": ("sinusoidal", 1 / 5, 2 / 5, PI / 2, 1 / 5, 1 / 5, PI / 2, 1 / 2),
    "material5": ("linear", 2 * PI / 5, 2 / 5, None, 2 * PI / 5, 1 / 5, None, 1 / 2),
}

# name: (material, omega, epsilon_inverse)
EXAMPLE_TABLE = {
    "ex1": ("material4", PI**2, 20),
    "ex2": ("material4", 3 * PI**2, 40),
    "ex3": ("material5", 2 * PI**2, 20),
}

DISPERSION_EPS_INVERSE = 50


@dataclass(frozen=True)
class Example:
    name: str
    spec: MediumSpec
    omega: float
    tau: float = 1.0


def material(name, epsilon_inverse=DISPERSION_EPS_INVERSE):
    """MediumSpec for one of ``material1`` .. ``material5``."""
    try:
        kind, gG, dG, bG, gr, dr, br, alpha = MATERIAL_TABLE[name]
    except KeyError:
        raise KeyError(f"unknown material preset {name!r}") from None
    if kind == "linear":
        macro = LinearProfile(gG, gr)
    else:
        macro = SinusoidalProfile(gG, bG, gr, br)
    return MediumSpec(macro, Bilaminate(alpha, dG, dr), "additive", epsilon_inverse, name)


def example(name):
    """The medium, frequency and traction of ``ex1`` .. ``ex3``."""
    try:
        mat, omega, n = EXAMPLE_TABLE[name]
    except KeyError:
        raise KeyError(f"unknown example preset {name!r}") from None
    return Example(name, material(mat, n), omega)


def preset_names():
    return sorted(MATERIAL_TABLE) + sorted(EXAMPLE_TABLE)
