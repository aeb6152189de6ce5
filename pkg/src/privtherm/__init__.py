"""Private correlations and entanglement diagnostics for thermal spin chains."""

__version__ = "0.1.0"

from .errors import DegenerateGroundStateError, NumericalError, QuadratureError, ValidationError
from .operators import (ModelSpec, Operator, Spectrum, build_hamiltonian, charge_operator,
                        eigendecompose, identity, natural_symmetry, parity_operator, parse_pauli,
                        partial_trace, pauli_string, sum_operators, symmetry_sector_projector)
from .thermal import (DiscreteSpectralFunction, ThermalState, canonical_state,
                      connected_correlator, density_state, entropy_nats, expectation, gibbs_state,
                      pure_state, reduced_density, sector_mixture_state, spectral_function)
from .private_info import (KeyRateReport, WeakPovm, chi_B_exact, chi_E_exact, d2_chiE_eigensum,
                           d2_chiE_spectral, d2_Iab, epsilon_mixing_scan, find_beta_p,
                           key_rate_report, mutual_information_ab, richardson_d2,
                           strong_symmetry_chiE)
from .ising import (IsingParams, QuadratureConfig, d2_chiE_ising, d2_Iab_ising, key_length_ising,
                    time_autocorrelator, time_autocorrelators, x_mean, xx_correlator,
                    xx_correlators)
from .qfi import QfiReport, producibility_bound, qfi_eigensum, qfi_report, qfi_spectral
from .separability import (PptResult, TwoQubitState, heisenberg_chain_check, heisenberg_rho_ab,
                           partial_transpose, ppt_verdict)
from .fitting import ScalingFit, scaling_fit

__all__ = [
    "__version__",
    "DegenerateGroundStateError",
    "NumericalError",
    "QuadratureError",
    "ValidationError",
    "ModelSpec",
    "Operator",
    "Spectrum",
    "build_hamiltonian",
    "charge_operator",
    "eigendecompose",
    "identity",
    "natural_symmetry",
    "parity_operator",
    "parse_pauli",
    "partial_trace",
    "pauli_string",
    "sum_operators",
    "symmetry_sector_projector",
    "DiscreteSpectralFunction",
    "ThermalState",
    "canonical_state",
    "connected_correlator",
    "density_state",
    "entropy_nats",
    "expectation",
    "gibbs_state",
    "pure_state",
    "reduced_density",
    "sector_mixture_state",
    "spectral_function",
    "KeyRateReport",
    "WeakPovm",
    "chi_B_exact",
    "chi_E_exact",
    "d2_chiE_eigensum",
    "d2_chiE_spectral",
    "d2_Iab",
    "epsilon_mixing_scan",
    "find_beta_p",
    "key_rate_report",
    "mutual_information_ab",
    "richardson_d2",
    "strong_symmetry_chiE",
    "IsingParams",
    "QuadratureConfig",
    "d2_chiE_ising",
    "d2_Iab_ising",
    "key_length_ising",
    "time_autocorrelator",
    "time_autocorrelators",
    "x_mean",
    "xx_correlator",
    "xx_correlators",
    "QfiReport",
    "producibility_bound",
    "qfi_eigensum",
    "qfi_report",
    "qfi_spectral",
    "PptResult",
    "TwoQubitState",
    "heisenberg_chain_check",
    "heisenberg_rho_ab",
    "partial_transpose",
    "ppt_verdict",
    "ScalingFit",
    "scaling_fit",
]
