"""Pairing-model moments, exact colouring oracles, and the
chromatic-number predictor for random regular graphs."""

__version__ = "0.1.0"

from .asymptotics import (
    ChromaticPrediction,
    CycleCorrection,
    LogValue,
    coeff_asym,
    cycle_correction,
    det_H,
    ey2_asym,
    ey_asym,
    gamma_const,
    molloy_reed_excludes,
    predict_chromatic,
    s1_closed_form,
    second_moment_ratio,
    sum_lambda_delta_sq,
    sum_lambda_delta_sq_series,
    within_theorem_range,
)
from .coloring import (
    chromatic_number,
    count_balanced_colourings,
    exists_balanced_colouring,
)
from .errors import GuardError, InputError, RegchromError
from .genfunc import (
    coeff_pair,
    coeff_single,
    count_colour_types,
    exact_T,
    exact_expected_Y,
    exact_second_moment,
)
from .montecarlo import (
    ChiFrequencyTable,
    MomentReport,
    chi_frequency,
    convergence_study,
    enumerate_moments,
    estimate_moments,
)
from .pairing import (
    CycleCounts,
    Multigraph,
    Pairing,
    count_cycles,
    double_factorial,
    enumerate_pairings,
    is_simple,
    pairing_rng,
    read_multigraph,
    sample_pairing,
    to_multigraph,
    write_multigraph,
)
from .spectral import (
    EigReport,
    basis_f,
    evec3_identities,
    gaussian_det_check,
    verify_evec2,
)
from .variational import (
    an_bound_gap,
    maximize_phi,
    phi,
    phi_center,
    psi_bound_check,
    random_doubly_stochastic,
    threshold_degree,
)
