"""Eavesdropping strategies against the travel leg.

Coupling attacks entangle the travel qudit with an ancilla through a unitary
Q on the forward leg, undo it with Q^-1 on the return leg, and read the
bit-flip symbol off the ancilla. The generic builder constructs Q from any
orthonormal detection/probe families; the controlled-shift, CNOT and
beam-splitter-circuit attacks are concrete instances. Intercept-resend is
the procedural baseline that control mode exists to defeat.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .protocol import TRAVEL, algebra
from .qstate import (
    ATOL_BASIS,
    Basis,
    BasisError,
    Operator,
    StateVector,
    SubsystemLayout,
    apply,
    complete_isometry,
    measure,
    orthonormal_completion,
    tensor,
)

# Trinary-rail levels: an empty rail, a horizontally and a vertically
# polarized photon. The index mapping is fixed package-wide.
VACUUM, H_POL, V_POL = 0, 1, 2
RAIL_DIM = 3


@dataclass(frozen=True)
class StateFamily:
    """Orthonormal ancilla states (a detection or probe family)."""

    states: tuple[StateVector, ...]

    def __post_init__(self):
        if not self.states:
            raise ValueError("family must contain at least one state")
        layout = self.states[0].layout
        if any(s.layout != layout for s in self.states):
            raise ValueError("family states must share one ancilla layout")
        mat = self.columns
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(len(self.states))))
        if dev > ATOL_BASIS:
            raise BasisError(f"family is not orthonormal (Gram deviation {dev:.3e})")

    @classmethod
    def computational(cls, layout: SubsystemLayout, size: int) -> "StateFamily":
        if size > layout.dim:
            raise ValueError("family larger than the ancilla dimension")
        states = []
        for k in range(size):
            amps = np.zeros(layout.dim, dtype=np.complex128)
            amps[k] = 1.0
            states.append(StateVector(layout, amps))
        return cls(tuple(states))

    @property
    def layout(self) -> SubsystemLayout:
        return self.states[0].layout

    @property
    def columns(self) -> np.ndarray:
        return np.column_stack([s.amps for s in self.states])

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class CouplingReport:
    """Per-(k, m) residuals of the index-shift conditions on Q and Q^-1."""

    rows: tuple[tuple[int, int, float, float], ...]
    tolerance: float = 1e-10

    @property
    def max_residual(self) -> float:
        return max(max(f, b) for _, _, f, b in self.rows)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tolerance

    def failures(self) -> list[tuple[int, int, float, float]]:
        return [row for row in self.rows if max(row[2], row[3]) >= self.tolerance]


@dataclass(frozen=True)
class EavesdropperHandle:
    """Eve's per-cycle actions: ancilla prep, coupling, decoupling, readout.

    Handles are immutable; per-cycle scratch lives in the `notes` dict owned
    by the running session. `coupling` acts on travel (x) ancilla with the
    travel axis first; `detection` is the readout family (None: abstain).
    """

    name: str
    dim: int
    initial_ancilla: StateVector
    coupling: Operator | None
    detection: StateFamily | None = None
    _readout_basis: Basis | None = field(init=False, default=None, repr=False)

    def __post_init__(self):
        anc_dim = self.initial_ancilla.layout.dim
        if self.coupling is not None:
            if self.coupling.kind != "unitary":
                raise ValueError("coupling must be a unitary-tagged operator")
            if self.coupling.dim != self.dim * anc_dim:
                raise ValueError(
                    f"coupling dim {self.coupling.dim} != travel*ancilla {self.dim * anc_dim}"
                )
        if self.detection is not None:
            if len(self.detection) != self.dim:
                raise ValueError("detection family must hold one state per travel level")
            completed = orthonormal_completion(self.detection.columns, anc_dim)
            object.__setattr__(self, "_readout_basis", Basis(completed, "detection"))

    @property
    def ancilla_layout(self) -> SubsystemLayout:
        return self.initial_ancilla.layout

    @property
    def ancilla_labels(self) -> tuple[str, ...]:
        return self.initial_ancilla.layout.labels

    def attach(self, state: StateVector) -> StateVector:
        return tensor(state, self.initial_ancilla)

    def forward(self, state: StateVector, rng, notes: dict) -> StateVector:
        return apply(state, self.coupling, (TRAVEL,) + self.ancilla_labels)

    def backward(self, state: StateVector, rng, notes: dict) -> StateVector:
        return apply(state, self.coupling.inverse, (TRAVEL,) + self.ancilla_labels)

    def readout(self, state: StateVector, rng, notes: dict) -> tuple[int | None, StateVector]:
        """Measure the ancilla in the detection family and undo the index shift."""
        if self.detection is None:
            return None, state
        out = measure(state, self.ancilla_labels, self._readout_basis, rng)
        if out.outcome >= self.dim:  # outside the family; unreachable in a clean run
            return None, out.state
        return (-out.outcome) % self.dim, out.state

    def coupled_branches(self, init: StateVector) -> list[tuple[float, StateVector]]:
        """Post-forward ensemble for exact detectability computations."""
        return [(1.0, self.forward(self.attach(init), None, {}))]


@lru_cache(maxsize=None)
def _swap_operator(dim: int) -> Operator:
    m = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for a in range(dim):
        for b in range(dim):
            m[b * dim + a, a * dim + b] = 1.0
    return Operator.unitary(m)


@dataclass(frozen=True)
class InterceptResendHandle(EavesdropperHandle):
    """Measure-and-substitute attack.

    Forward leg: Eve swaps the genuine travel qudit into her storage
    register, measures it in the computational basis (keeping the outcome),
    and substitutes a fresh qudit prepared in a uniformly random
    computational state. Return leg: she measures the returning substitute,
    which reveals the shift symbol exactly, and hands the genuine particle
    back so Bob receives something.
    """

    def forward(self, state, rng, notes):
        label = self.ancilla_labels[0]
        state = apply(state, _swap_operator(self.dim), (TRAVEL, label))
        got = measure(state, label, Basis.computational(self.dim), rng)
        notes["genuine"] = got.outcome
        fake = int(rng.integers(self.dim))
        notes["fake"] = fake
        state = got.state
        if fake:
            state = apply(state, algebra(self.dim).encoding(fake, 0), TRAVEL)
        return state

    def backward(self, state, rng, notes):
        got = measure(state, TRAVEL, Basis.computational(self.dim), rng)
        notes["returned"] = got.outcome
        return apply(got.state, _swap_operator(self.dim), (TRAVEL, self.ancilla_labels[0]))

    def readout(self, state, rng, notes):
        mu_hat = (notes["returned"] - notes["fake"]) % self.dim
        return mu_hat, state

    def coupled_branches(self, init):
        dim = self.dim
        coeffs = init.reshaped()  # (home, travel)
        branches = []
        layout = init.layout.concat(self.ancilla_layout)
        for m1 in range(dim):
            column = coeffs[:, m1]
            p = float(np.vdot(column, column).real)
            if p <= 0.0:
                continue
            home = column / math.sqrt(p)
            for fake in range(dim):
                travel = np.zeros(dim)
                travel[fake] = 1.0
                stored = np.zeros(dim)
                stored[m1] = 1.0
                amps = np.kron(np.kron(home, travel), stored)
                branches.append((p / dim, StateVector(layout, amps)))
        return branches


def no_attack(dim: int = 2) -> EavesdropperHandle:
    """Baseline handle: one-dimensional scratch ancilla, identity coupling."""
    layout = SubsystemLayout.of(("e", 1))
    return EavesdropperHandle(
        name="none",
        dim=dim,
        initial_ancilla=StateVector.basis(layout, (0,)),
        coupling=Operator.unitary(np.eye(dim)),
        detection=None,
    )


def intercept_resend(dim: int) -> EavesdropperHandle:
    if dim < 2:
        raise ValueError("dim must be >= 2")
    layout = SubsystemLayout.of(("e", dim))
    return InterceptResendHandle(
        name="intercept-resend",
        dim=dim,
        initial_ancilla=StateVector.basis(layout, (0,)),
        coupling=None,
        detection=None,
    )


def cnot_attack() -> EavesdropperHandle:
    """Single-qubit-ancilla attack with Q = CNOT, travel as control."""
    layout = SubsystemLayout.of(("x", 2))
    cnot = np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 1, 0],
        ],
        dtype=np.complex128,
    )
    return EavesdropperHandle(
        name="cnot",
        dim=2,
        initial_ancilla=StateVector.basis(layout, (0,)),
        coupling=Operator.unitary(cnot),
        detection=StateFamily.computational(layout, 2),
    )


def qudit_shift_attack(dim: int) -> EavesdropperHandle:
    """Controlled-shift attack: Q|k_t, m_e> = |k_t, (m+k mod D)_e>."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    layout = SubsystemLayout.of(("e", dim))
    m = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for k in range(dim):
        for a in range(dim):
            m[k * dim + (a + k) % dim, k * dim + a] = 1.0
    return EavesdropperHandle(
        name="qudit-shift",
        dim=dim,
        initial_ancilla=StateVector.basis(layout, (0,)),
        coupling=Operator.unitary(m),
        detection=StateFamily.computational(layout, dim),
    )


# --- photonic rail machinery -------------------------------------------------

def rail_layout() -> SubsystemLayout:
    return SubsystemLayout.of(("x", RAIL_DIM), ("y", RAIL_DIM))


def rail_state(x_level: int, y_level: int) -> StateVector:
    return StateVector.basis(rail_layout(), (x_level, y_level))


def _rail_superposition(*terms: tuple[int, int]) -> StateVector:
    amps = sum(rail_state(x, y).amps for x, y in terms) / math.sqrt(len(terms))
    return StateVector(rail_layout(), amps)


def chi_states() -> tuple[StateVector, StateVector]:
    """Detection states: empty x-rail / empty y-rail, photon horizontal."""
    return rail_state(VACUUM, H_POL), rail_state(H_POL, VACUUM)


def probe_states() -> tuple[StateVector, StateVector]:
    """The two equal superpositions the circuit maps the ancilla onto."""
    a_state = _rail_superposition((H_POL, VACUUM), (VACUUM, V_POL))
    d_state = _rail_superposition((VACUUM, H_POL), (V_POL, VACUUM))
    return a_state, d_state


def _travel_rail_basis(t: int, rails: StateVector) -> StateVector:
    travel = StateVector.basis(SubsystemLayout.of((TRAVEL, 2)), (t,))
    return tensor(travel, rails)


def pavicic_circuit() -> EavesdropperHandle:
    """Beam-splitter-circuit attack on two trinary rails.

    The unitary is pinned by its four specified actions (each chi state maps
    onto one of the equal superpositions, swapped when the travel qubit is
    set) and completed deterministically; protocol evolution never leaves
    the specified subspace, so the completion is unobservable.
    """
    chi0, chi1 = chi_states()
    a_state, d_state = probe_states()
    domain = [
        _travel_rail_basis(0, chi0),
        _travel_rail_basis(1, chi0),
        _travel_rail_basis(0, chi1),
        _travel_rail_basis(1, chi1),
    ]
    image = [
        _travel_rail_basis(0, a_state),
        _travel_rail_basis(1, d_state),
        _travel_rail_basis(0, d_state),
        _travel_rail_basis(1, a_state),
    ]
    return EavesdropperHandle(
        name="pavicic",
        dim=2,
        initial_ancilla=chi0,
        coupling=complete_isometry(domain, image),
        detection=StateFamily((chi0, chi1)),
    )


def cpbs() -> Operator:
    """Controlled polarization beam splitter on the travel qubit and two rails.

    With the control at 0 the horizontal photon hops rails and the vertical
    one stays; with the control at 1 the roles are exchanged. All basis
    states outside the eight-row truth table are left untouched.
    """
    table = {
        (0, VACUUM, H_POL): (0, H_POL, VACUUM),
        (0, H_POL, VACUUM): (0, VACUUM, H_POL),
        (0, VACUUM, V_POL): (0, VACUUM, V_POL),
        (0, V_POL, VACUUM): (0, V_POL, VACUUM),
        (1, VACUUM, H_POL): (1, VACUUM, H_POL),
        (1, H_POL, VACUUM): (1, H_POL, VACUUM),
        (1, VACUUM, V_POL): (1, V_POL, VACUUM),
        (1, V_POL, VACUUM): (1, VACUUM, V_POL),
    }
    layout = SubsystemLayout.of((TRAVEL, 2), ("x", RAIL_DIM), ("y", RAIL_DIM))
    domain, image = [], []
    for src, dst in table.items():
        domain.append(StateVector.basis(layout, src))
        image.append(StateVector.basis(layout, dst))
    for t in range(2):
        for x in range(RAIL_DIM):
            for y in range(RAIL_DIM):
                if (t, x, y) not in table:
                    fixed = StateVector.basis(layout, (t, x, y))
                    domain.append(fixed)
                    image.append(fixed)
    return complete_isometry(domain, image)


def generic_coupling(
    dim: int,
    detection: StateFamily,
    probes: StateFamily,
    name: str = "generic",
) -> EavesdropperHandle:
    """Build Eve's unitary from arbitrary detection/probe families.

    Q maps |k_t>|detection_m> to |k_t>|probe_{m+k mod D}> for every k, m;
    the remainder of the space is filled in by deterministic completion.
    The result is checked with validate_coupling before it is returned.
    """
    if len(detection) != dim or len(probes) != dim:
        raise ValueError("need exactly one detection and one probe state per travel level")
    if detection.layout != probes.layout:
        raise ValueError("detection and probe families must share the ancilla layout")
    travel_layout = SubsystemLayout.of((TRAVEL, dim))
    domain, image = [], []
    for k in range(dim):
        travel = StateVector.basis(travel_layout, (k,))
        for m in range(dim):
            domain.append(tensor(travel, detection.states[m]))
            image.append(tensor(travel, probes.states[(m + k) % dim]))
    coupling = complete_isometry(domain, image)
    report = validate_coupling(coupling, detection, probes, dim)
    if not report.passed:
        raise ArithmeticError(
            f"constructed coupling violates the shift conditions: {report.failures()[:3]}"
        )
    return EavesdropperHandle(
        name=name,
        dim=dim,
        initial_ancilla=detection.states[0],
        coupling=coupling,
        detection=detection,
    )


def validate_coupling(
    coupling: Operator, detection: StateFamily, probes: StateFamily, dim: int
) -> CouplingReport:
    """Residuals of Q|k, d_m> = |k, p_{m+k}> and the inverse condition."""
    anc_dim = detection.layout.dim
    if coupling.dim != dim * anc_dim:
        raise ValueError("coupling dimension does not match travel * ancilla")
    det = detection.columns
    prb = probes.columns
    inv = coupling.matrix.conj().T
    rows = []
    for k in range(dim):
        e_k = np.zeros(dim)
        e_k[k] = 1.0
        for m in range(dim):
            fwd_in = np.kron(e_k, det[:, m])
            fwd_out = np.kron(e_k, prb[:, (m + k) % dim])
            fwd = float(np.linalg.norm(coupling.matrix @ fwd_in - fwd_out))
            bwd_in = np.kron(e_k, prb[:, m])
            bwd_out = np.kron(e_k, det[:, (m - k) % dim])
            bwd = float(np.linalg.norm(inv @ bwd_in - bwd_out))
            rows.append((k, m, fwd, bwd))
    return CouplingReport(tuple(rows))


def family_from_json(path: str | Path) -> tuple[StateFamily, StateFamily]:
    """Load detection/probe families from a JSON description.

    Schema: {"detection": [state, ...], "probes": [state, ...]} where each
    state is an array of [re, im] amplitude pairs. All states must share one
    length, which becomes the dimension of a single ancilla register "e".
    """
    payload = json.loads(Path(path).read_text())
    try:
        raw_det = payload["detection"]
        raw_prb = payload["probes"]
    except (TypeError, KeyError) as exc:
        raise ValueError("family file needs 'detection' and 'probes' arrays") from exc

    def build(raw) -> StateFamily:
        vectors = [np.array([complex(re, im) for re, im in state]) for state in raw]
        lengths = {len(v) for v in vectors}
        if len(lengths) != 1:
            raise ValueError("all family states must have the same length")
        layout = SubsystemLayout.of(("e", lengths.pop()))
        return StateFamily(tuple(StateVector.from_amps(layout, v) for v in vectors))

    return build(raw_det), build(raw_prb)


def from_name(name: str, dim: int) -> EavesdropperHandle:
    """Resolve an attack by its CLI name."""
    if name == "none":
        return no_attack(dim)
    if name == "intercept-resend":
        return intercept_resend(dim)
    if name == "cnot":
        if dim != 2:
            raise ValueError("cnot attack requires dim = 2")
        return cnot_attack()
    if name == "pavicic":
        if dim != 2:
            raise ValueError("pavicic attack requires dim = 2")
        return pavicic_circuit()
    if name == "qudit-shift":
        return qudit_shift_attack(dim)
    if name.startswith("generic:"):
        detection, probes = family_from_json(name.split(":", 1)[1])
        return generic_coupling(dim, detection, probes)
    raise ValueError(f"unknown attack name {name!r}")
