"""oscillab: stability and oscillation regime maps for 1D parabolic solvers."""

from .atlas import (
    Classification,
    ConjectureAudit,
    RegimeMap,
    SweepConfig,
    behavior_set,
    classify_cell,
    conjecture_audit,
    curve_band_mask,
    run_sweep,
    so_region_report,
    theoretical_curves,
)
from .diagnostics import (
    DiagnosticsConfig,
    RunFlags,
    infinity_norm,
    monotonicity_check,
    oscillation_check,
    run_simulation,
    stability_check,
)
from .problems import (
    BoundaryCondition,
    EquationSpec,
    IBVP,
    Mesh1D,
    build_mesh,
    default_ibvp,
    equation_by_name,
    sample_initial_condition,
)
from .schemes import (
    StateVector,
    TridiagonalMatrix,
    TwoLevelScheme,
    assemble,
    assemble_btcs,
    assemble_btcs_frozen,
    assemble_btcs_linapprox,
    assemble_crank_nicolson,
    assemble_ftcs,
    assemble_semi_implicit,
    step,
    thomas_solve,
)
from .spectral import (
    ConditionCurve,
    Spectrum,
    dense_eigenvalues,
    dominance_curve,
    dominance_test,
    effective_update_matrix,
    heat_ftcs_eigenvalues,
    positive_eig_curve,
    positive_real_test,
    scheme_spectrum,
    spectral_radius,
    tridiag_eigenvalues_closed,
    tridiag_eigenvectors,
    vn_stability_curve,
    von_neumann_factor,
)

__version__ = "0.1.0"
