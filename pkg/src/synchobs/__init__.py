"""Synchronous observer design for fundamental systems on homogeneous spaces.

Lie-group primitives, group actions with synchronous error functions,
fundamental lifts, a numerical accessibility-algebra engine, and a hybrid
observer simulator with Lyapunov monitoring.
"""

from .lie_core import (
    SE2,
    SO3,
    VAA,
    AlgebraElement,
    GroupElement,
    TangentVector,
    bracket,
    compose,
    exp,
    identity,
    inverse,
    left_translate,
)
from .actions import (
    SPHERE2,
    SPHERE_ACTION,
    UNICYCLE_ACTION,
    UNICYCLE_M,
    VAA_ACTION,
    VAA_M,
    GroupAction,
    Manifold,
    ManifoldPoint,
    act,
    error,
    fundamental_field,
    reconstruct,
)
from .systems import (
    AffineSystem,
    FundamentalStructure,
    VerificationReport,
    eval_system,
    lift_input,
    lifted_dynamics,
    verify_fundamental,
    verify_synchrony,
)
from .accessibility import (
    AlgebraBasis,
    AlgebraMatch,
    ControllabilityReport,
    NonClosureError,
    VectorFieldHandle,
    bracket_vf,
    build_accessibility_basis,
    controllability_check,
    match_algebra,
    structure_constants,
)
from .observer import (
    CostFunction,
    Measurement,
    ObserverState,
    SimTrace,
    UpdateChannel,
    apply_update,
    check_lyapunov_monotonicity,
    differential_decrease_check,
    lyapunov_value,
    propagate,
    propagate_truth,
    run_hybrid,
)
from .scenarios import (
    ScenarioBundle,
    VAAGains,
    bearings_scenario,
    load_scenario,
    unicycle_scenario,
    vaa_initial_observer,
    vaa_scenario,
    vaa_truth,
)

__version__ = "0.1.0"
