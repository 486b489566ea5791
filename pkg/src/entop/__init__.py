"""Entangled operations built from coherent superpositions of local operations."""

from .errors import *  # noqa: F401,F403
from .interferometer import (
    ArmAmplitudes,
    PhaseNoiseModel,
    PostSelectionResult,
    TimeBinConfig,
    apply_phase_noise,
    enumerate_outcomes,
    postselect,
    simulate_scenario,
    waveplate_phase_control,
)
from .metrics import concurrence, process_fidelity, purity, state_fidelity, uhlmann_fidelity
from .operators import (
    BranchSuperposition,
    LocalOperator,
    SchmidtDecomposition,
    apply_to_state,
    build_superposition,
    ccu,
    controlled_unitary,
    entanglement_filter,
    ghz_operator,
    is_unitary,
    ising_xx,
    schmidt2_unitary,
    schmidt_decompose,
    schmidt_number,
    swap_operator,
    to_matrix,
    w_operator,
)
from .opspec import parse_operator
from .tomography import (
    monte_carlo,
    qpt,
    qst_mle,
    simulate_counts,
    standard_settings,
)

__version__ = "0.1.0"
