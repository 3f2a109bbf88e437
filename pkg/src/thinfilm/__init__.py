"""Spectral bifurcation toolkit for a thermocapillary thin-film model.

Continues branches of stationary square and hexagonal film patterns in
the Marangoni number on symmetric Fourier lattices, verifies the local
branch expansions against closed forms, classifies spectral stability
under co-periodic, superharmonic, and subharmonic perturbations, tracks
branches toward film rupture, and cross-validates with a time stepper
for the full fourth-order evolution equation.
"""

from .lattice import (
    LatticeKind,
    LatticeSpec,
    critical_wave_indices,
    dual_wavevector,
    make_lattice,
    symmetry_orbit,
)
from .field import (
    DomainViolation,
    SymmetricField,
    analyze,
    bilaplacian,
    inner_product_L2,
    laplacian,
    multiply,
    nonlinear_pointwise,
    norm_L2,
    norm_X,
    read_snapshot,
    synthesize,
    write_snapshot,
    zeros,
)
from .stationary import (
    NoConvergence,
    ProblemParams,
    StationaryState,
    constraint_K,
    jacobian_apply,
    newton_solve,
    residual,
)
from .linstab import (
    COPERIODIC,
    PerturbationClass,
    SpectrumReport,
    classify_stability,
    critical_marangoni,
    dispersion,
    evolution_linearization_spectrum,
)
from .localbif import (
    BifurcationPointInfo,
    closed_form_coefficients,
    expansion_coefficients,
    kernel_element,
    locate_bifurcation,
    transversality_check,
)
from .continuation import (
    Branch,
    BranchPoint,
    ContinuationConfig,
    InadmissibleKernel,
    Termination,
    branch_switch,
    detect_events,
    extend_branch,
    nodal_check,
    scan_trivial_branch,
    seed_branch,
)
from .evolve import EvolutionState, Inconclusive, classify_nonlinear_stability, rhs, step

__version__ = "0.1.0"
