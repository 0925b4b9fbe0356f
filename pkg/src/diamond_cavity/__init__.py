"""Diamond-configuration atoms in a two-mode cavity: models, dynamics and field extraction."""

from .cavity import (
    AtomPreset,
    CavityGeometry,
    MirrorSpec,
    coupling_g,
    damping_rates,
    derive_system,
    kappa_gamma,
    load_atom_preset,
    load_mirror_preset,
    mode_volume,
)
from .core import (
    DensityOperator,
    HilbertSpace,
    KetState,
    Operator,
    destroy,
    embed,
    flip,
    identity,
    kron,
    number,
)
from .dynamics import (
    EvolutionResult,
    MappingReport,
    evolve_lindblad,
    evolve_nonhermitian,
    find_t_pi_numeric,
    mapping_phase,
    mean_photon_b_analytic,
    photon_transfer,
    state_mapping_report,
    t_pi_analytic,
    tpi_deviation_scan,
)
from .inout import (
    FomResult,
    LangevinMatrix,
    apply_output_loss,
    figure_of_merit,
    fom_approx,
    fom_quadrature,
    fom_sylvester,
    langevin_matrix,
    temporal_profile,
)
from .linalg import hermitian_eig, matrix_exponential, sylvester_solve
from .model import (
    DressedBasis,
    EffectiveCoefficients,
    FrameChoice,
    PhysicalParams,
    build_dressed_hamiltonian,
    build_effective_hamiltonian,
    build_effective_lindblads,
    build_effective_nonhermitian,
    build_full_hamiltonian,
    build_lindblads,
    build_nonhermitian,
    dressed_basis,
    effective_coefficients,
    omega_prime_for_zero_delta1,
    validity_report,
)

__version__ = "0.1.0"

__all__ = [
    "AtomPreset",
    "CavityGeometry",
    "DensityOperator",
    "DressedBasis",
    "EffectiveCoefficients",
    "EvolutionResult",
    "FomResult",
    "FrameChoice",
    "HilbertSpace",
    "KetState",
    "LangevinMatrix",
    "MappingReport",
    "MirrorSpec",
    "Operator",
    "PhysicalParams",
    "apply_output_loss",
    "build_dressed_hamiltonian",
    "build_effective_hamiltonian",
    "build_effective_lindblads",
    "build_effective_nonhermitian",
    "build_full_hamiltonian",
    "build_lindblads",
    "build_nonhermitian",
    "coupling_g",
    "damping_rates",
    "derive_system",
    "destroy",
    "dressed_basis",
    "effective_coefficients",
    "embed",
    "evolve_lindblad",
    "evolve_nonhermitian",
    "figure_of_merit",
    "find_t_pi_numeric",
    "flip",
    "fom_approx",
    "fom_quadrature",
    "fom_sylvester",
    "hermitian_eig",
    "identity",
    "kappa_gamma",
    "kron",
    "langevin_matrix",
    "load_atom_preset",
    "load_mirror_preset",
    "mapping_phase",
    "matrix_exponential",
    "mean_photon_b_analytic",
    "mode_volume",
    "number",
    "omega_prime_for_zero_delta1",
    "photon_transfer",
    "state_mapping_report",
    "sylvester_solve",
    "t_pi_analytic",
    "temporal_profile",
    "tpi_deviation_scan",
    "validity_report",
    "__version__",
]
