"""memamp: heralded amplification of weak coherent states stored in atom ensembles.

Simulates the write/read Raman processes that amplify a stored collective
excitation upon photon detection, with closed-form gain formulas, a
brute-force full-Hilbert-space oracle, amplifier quality metrics, multi-stage
schedules, and Monte Carlo sampling of heralding outcomes.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .dicke import (
    DickeVector,
    LadderDirection,
    Schedule,
    apply_ladder,
    apply_ss_dagger,
    basis_state,
    fidelity,
    gain_eigenvalue,
    ladder_coeff,
    relative_gain,
    weak_coherent_atomic_state,
)
from .joint import (
    EvolutionOrder,
    HeraldPattern,
    JointState,
    ModeTruncation,
    apply_read,
    apply_write,
    build_joint,
    herald,
    reduced_conditional_density,
)
from .metrics import (
    DensityMatrix,
    QualityReport,
    p_amp,
    p_mode,
    p_spon,
    p_success_analytic,
    p_success_numeric,
    quality,
)
from .oracle import (
    FullStateVector,
    apply_collective_full,
    build_dicke_full,
    project_to_dicke,
    verify_ladder,
)
from .protocol import (
    AmplificationReport,
    GainConvention,
    MCReport,
    ProtocolConfig,
    StageKind,
    StageReport,
    monte_carlo,
    run_schedule,
    run_stage,
)

__version__ = "0.1.0"

__all__ = [
    "AmplificationReport",
    "DensityMatrix",
    "DickeVector",
    "EvolutionOrder",
    "FullStateVector",
    "GainConvention",
    "HeraldPattern",
    "JointState",
    "KERNEL_BACKEND",
    "LadderDirection",
    "MCReport",
    "ModeTruncation",
    "ProtocolConfig",
    "QualityReport",
    "Schedule",
    "StageKind",
    "StageReport",
    "apply_collective_full",
    "apply_ladder",
    "apply_read",
    "apply_ss_dagger",
    "apply_write",
    "basis_state",
    "build_dicke_full",
    "build_joint",
    "fidelity",
    "gain_eigenvalue",
    "herald",
    "ladder_coeff",
    "monte_carlo",
    "p_amp",
    "p_mode",
    "p_spon",
    "p_success_analytic",
    "p_success_numeric",
    "project_to_dicke",
    "quality",
    "reduced_conditional_density",
    "relative_gain",
    "run_schedule",
    "run_stage",
    "verify_ladder",
    "weak_coherent_atomic_state",
]
