"""loxokit: numerics for spectra and dynamics around closed hyperbolic orbits.

Subpackages cover symplectic linear algebra and normal forms, Hamiltonian
flows with closed-orbit and control diagnostics, radial model spectra on a
hyperbolic cylinder, complex-absorbed model resolvents, and the damped wave
equation on a warped product.
"""

from .symplectic import (
    DEFAULT_TOL,
    HAMILTON_MATRIX,
    POINCARE_MAP,
    ComplexHyperbolicQuad,
    DefectiveBeyondTolerance,
    EllipticEigenvaluePresent,
    EllipticGroup,
    GroupingFailed,
    HamiltonMatrix,
    NegativeRealEigenvalue,
    NotPositiveDefinite,
    NotSymplectic,
    QuadraticHamiltonian,
    RealHyperbolicPair,
    SpectrumClassification,
    SymplecticError,
    SymplecticTransform,
    Tolerances,
    classify,
    hamilton_matrix,
    hamilton_residual,
    quadratic_form_of,
    standard_symplectic_matrix,
    symplectic_log,
    symplectic_pairing,
    symplectic_polar,
    symplectic_residual,
)
from .normal_form import (
    BirkhoffNormalForm,
    EscapeRateForm,
    InvariantSubspaces,
    WilliamsonDecomposition,
    birkhoff_normal_form,
    escape_rate_form,
    stable_unstable_subspaces,
    williamson,
)
from .flows import (
    ClosedOrbit,
    ControlReport,
    FlowError,
    HamiltonianSystem,
    MonodromyData,
    check_geometric_control,
    find_closed_orbit,
    flow,
    linearized_poincare_map,
    surface_of_revolution,
    surface_state,
    system_from_config,
    trajectory_average,
)
from .spectra import (
    ConcentrationReport,
    RadialOperator,
    build_radial_operator,
    eigenpair_near,
    mass_outside,
    neck_mode,
    nonconcentration_scan,
    solve_eigenpairs,
)
from .resolvent import (
    AbsorbingProfile,
    DiscretizedOperator,
    ResolventScan,
    global_absorption_check,
    harm_osc_lower_bound,
    positive_commutator_check,
    quantize_model,
    rescale_state,
    sigma_min_point,
    sigma_min_scan,
)
from .dampedwave import (
    DampedWaveProblem,
    DecayReport,
    EigenfrequencySet,
    EnergyTrace,
    assemble_pencil,
    decay_report,
    eigenfrequencies,
    evolve,
    interpolation_defect,
    mode_frame,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
