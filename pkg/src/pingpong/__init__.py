"""Simulation laboratory for the ping-pong quantum direct communication
protocol: qubit and qudit variants, dense coding, eavesdropping couplings,
and control-mode detection statistics."""

from .qstate import (
    Basis,
    DensityMatrix,
    MeasurementOutcome,
    Operator,
    StateVector,
    SubsystemLayout,
    apply,
    complete_isometry,
    factor,
    measure,
    partial_trace,
    tensor,
    trace_distance,
)
from .protocol import (
    CoherenceBreakError,
    CycleRecord,
    ProtocolConfig,
    QuditAlgebra,
    algebra,
    bob_decode,
    dense_encode,
    make_initial_state,
    run_session,
)
from .attacks import (
    EavesdropperHandle,
    StateFamily,
    cnot_attack,
    cpbs,
    generic_coupling,
    intercept_resend,
    no_attack,
    pavicic_circuit,
    qudit_shift_attack,
    validate_coupling,
)
from .control import (
    ControlModeHandle,
    DetectionReport,
    analytic_pdet,
    computational_control,
    dual_basis_expand,
    empirical_pdet,
    two_basis_control,
)

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "CoherenceBreakError",
    "ControlModeHandle",
    "CycleRecord",
    "DensityMatrix",
    "DetectionReport",
    "EavesdropperHandle",
    "MeasurementOutcome",
    "Operator",
    "ProtocolConfig",
    "QuditAlgebra",
    "StateFamily",
    "StateVector",
    "SubsystemLayout",
    "algebra",
    "analytic_pdet",
    "apply",
    "bob_decode",
    "cnot_attack",
    "complete_isometry",
    "computational_control",
    "cpbs",
    "dense_encode",
    "dual_basis_expand",
    "empirical_pdet",
    "factor",
    "generic_coupling",
    "intercept_resend",
    "make_initial_state",
    "measure",
    "no_attack",
    "partial_trace",
    "pavicic_circuit",
    "qudit_shift_attack",
    "run_session",
    "tensor",
    "trace_distance",
    "two_basis_control",
    "validate_coupling",
]
