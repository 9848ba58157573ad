"""Single-photon scattering through a coupled-cavity array with a central qubit."""

from .analytics import (
    bound_state_closed_form,
    characteristic_roots,
    inband_splitting,
    lorentzian_prediction,
    secular_basis,
)
from .core import (
    ArraySpec,
    ModeBasis,
    Ports,
    SpecError,
    bare_band,
    build_hamiltonian,
    diagonalize,
    mode_basis,
    validate_spec,
)
from .resonance import linewidth_sweep, quasi_bound_survey, refine_peak
from .scattering import (
    evaluate_waveguide_amplitude,
    gamma_beta,
    mode_excitations,
    scatter,
    transmission_spectrum,
)

__version__ = "0.1.0"
