from .combined import (
    build_combined,
    closed_loop_matrix,
    convergence_constraint,
    relative_degree_ok,
    stability_matrix,
    sym,
    tracking_gain,
)
from .library import CellGain, GainLibrary
from .safety import (
    barrier_faces,
    closed_loop_face_matrix,
    face_dual_value,
    face_primal_max,
    reference_term,
    require_bounded,
    safety_constraints,
    state_samples,
)
from .solver import assemble_axis_gains, diagnose_infeasibility, synthesize, synthesize_decomposed
from .types import (
    AgentSystem,
    BarrierFace,
    CombinedSystem,
    FaceCertificate,
    GainMatrix,
    RelativeDegreeError,
    SolverFailureError,
    SynthesisCertificate,
    SynthesisConfig,
    SynthesisInfeasibleError,
    UnboundedCellError,
)
from .verify import verify

__all__ = [
    "AgentSystem",
    "BarrierFace",
    "CellGain",
    "CombinedSystem",
    "FaceCertificate",
    "GainLibrary",
    "GainMatrix",
    "RelativeDegreeError",
    "SolverFailureError",
    "SynthesisCertificate",
    "SynthesisConfig",
    "SynthesisInfeasibleError",
    "UnboundedCellError",
    "assemble_axis_gains",
    "barrier_faces",
    "build_combined",
    "closed_loop_face_matrix",
    "closed_loop_matrix",
    "convergence_constraint",
    "diagnose_infeasibility",
    "face_dual_value",
    "face_primal_max",
    "reference_term",
    "relative_degree_ok",
    "require_bounded",
    "safety_constraints",
    "stability_matrix",
    "state_samples",
    "sym",
    "synthesize",
    "synthesize_decomposed",
    "tracking_gain",
    "verify",
]
