"""Gap labelling for discrete one-dimensional ergodic Schroedinger operators.

The package computes finite-volume integrated densities of states for
operators H u(n) = u(n+1) + u(n-1) + V(n) u(n) with dynamically defined
potentials, locates spectral gaps, and matches the IDS value on each gap
against the countable label group the base dynamics dictates.
"""
from .dynamics import (
    Affine,
    Bernoulli,
    CosineSum,
    Direct,
    LetterValues,
    Periodic,
    ResonanceWarning,
    Rotation,
    Substitution,
    SubstitutionSubshift,
    fixed_point_prefix,
    iterate_affine,
    phase_ensemble,
    sample_potential,
)
from .errors import ConfigurationError, GaplabError, NumericalError, ResourceLimitError
from .ids import (
    EmpiricalDOS,
    Gap,
    IDSProfile,
    certify_gap,
    detect_gaps,
    empirical_dos,
    ids_at,
    ids_profile,
)
from .label_groups import (
    AffineLabels,
    DerivedSubstitution,
    FractionGroup,
    FrequencyModule,
    LabelMatch,
    PerronData,
    PerronModule,
    WeightRing,
    derive_substitution,
    enumerate_labels,
    group_for_system,
    integer_kernel,
    match_label,
    perron,
    prefix_factorization,
    substitution_label_group,
)
from .operator_core import (
    DirichletSolution,
    TransferMatrix,
    Truncation,
    build_truncation,
    char_poly_value,
    count_eigenvalues_above,
    dirichlet_solution,
    eigenvalues,
    oscillation_counts,
    sign_flip_count,
    transfer_log_norms,
    transfer_product,
)

__version__ = "0.1.0"
