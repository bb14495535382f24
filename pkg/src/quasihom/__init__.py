"""Second-order homogenization of 1D waves in quasi-periodic bars."""
from .bvp import run_bvp, solve_bvp, solve_mean_bvp, two_scale_data
from .cells import solve_cells, solve_cells_fd
from .dispersion import (baseline_dispersion, dispersion_error, exact_dispersion,
                         homogenized_dispersion, monodromy)
from .effective import assemble_E, build_field, compute_cell_stresses, compute_effective
from .errors import QuasihomError
from .io import load_spec, spec_from_dict
from .material import (Bilaminate, LinearProfile, MediumSpec, SinusoidalProfile,
                       TabulatedPeriodic, TabulatedProfile, eval_total)
from .oracle import bilayer_closed_form, exact_bvp
from .presets import example, material

__version__ = "0.1.0"
