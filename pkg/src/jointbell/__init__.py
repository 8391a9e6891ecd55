"""Unsharp joint spin measurements and Bell expressions on one to three qubits."""

from .correlations import (
    Joint2,
    Joint2WithInferred,
    Joint3,
    MeasurementPlan,
    Sharp,
    coincidence_probability,
    jm_variance,
    joint_correlation,
    outcome_table,
    sharp_correlation,
)
from .inequalities import (
    InequalityReport,
    chsh_value,
    ghz_hierarchy,
    gisin3_joint_value,
    gisin3_value,
    gisin4_value,
    gisin_xyz_joint_value,
    mermin_joint_value,
    mermin_value,
)
from .pauli_core import (
    DensityMatrix,
    Direction,
    bloch_observable,
    ghz_state,
    random_mixed_state,
    random_pure_state,
    singlet_state,
    tensor,
)
from .povm import (
    InfeasibleMeasurementError,
    build_joint_povm2,
    build_joint_povm3,
    busch_margin,
)
from .search import SearchResult, maximize, maximize_joint_regime

__all__ = [
    "DensityMatrix",
    "Direction",
    "InequalityReport",
    "InfeasibleMeasurementError",
    "Joint2",
    "Joint2WithInferred",
    "Joint3",
    "MeasurementPlan",
    "SearchResult",
    "Sharp",
    "bloch_observable",
    "build_joint_povm2",
    "build_joint_povm3",
    "busch_margin",
    "chsh_value",
    "coincidence_probability",
    "ghz_hierarchy",
    "ghz_state",
    "gisin3_joint_value",
    "gisin3_value",
    "gisin4_value",
    "gisin_xyz_joint_value",
    "jm_variance",
    "joint_correlation",
    "maximize",
    "maximize_joint_regime",
    "mermin_joint_value",
    "mermin_value",
    "outcome_table",
    "random_mixed_state",
    "random_pure_state",
    "sharp_correlation",
    "singlet_state",
    "tensor",
]
