"""Control-mode strategies and detection-probability computation.

A control mode is a weighted menu of measurement bases plus, per basis, the
set of (alice, bob) outcome pairs that an undisturbed pair can produce. The
pass predicates are derived from the configured initial state rather than
hard-coded, which settles the sign conventions for the singlet in the dual
basis automatically.

Detection probabilities come in two flavours: analytic (fail-projector
expectation against the exact post-coupling ensemble) and empirical
(seeded Monte Carlo over control cycles, with a Wilson interval).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attacks import EavesdropperHandle
from .protocol import (
    HOME,
    QUBIT_SINGLET,
    TRAVEL,
    ProtocolConfig,
    make_initial_state,
)
from .qstate import Basis, Operator, StateVector, SubsystemLayout, partial_trace
from .rand import PDET_TAG, stream

# Joint probabilities above this are treated as support of the clean state
# when deriving pass predicates; clean zeros sit at squared float error.
_SUPPORT_CUTOFF = 1e-9


@dataclass(frozen=True)
class ControlBasis:
    """One menu entry: a basis, its selection weight, and the passing pairs."""

    basis_id: str
    basis: Basis
    weight: float
    allowed: frozenset[tuple[int, int]]  # (alice_outcome, bob_outcome)


@dataclass(frozen=True)
class ControlModeHandle:
    name: str
    dim: int
    bases: tuple[ControlBasis, ...]

    def __post_init__(self):
        total = sum(b.weight for b in self.bases)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"basis weights sum to {total}, expected 1")
        for b in self.bases:
            if b.basis.dim != self.dim:
                raise ValueError("every menu basis must match the travel dimension")

    def draw(self, rng: np.random.Generator) -> ControlBasis:
        u = rng.random()
        acc = 0.0
        for b in self.bases:
            acc += b.weight
            if u < acc:
                return b
        return self.bases[-1]

    def passes(self, basis_id: str, alice: int, bob: int) -> bool:
        for b in self.bases:
            if b.basis_id == basis_id:
                return (alice, bob) in b.allowed
        raise ValueError(f"unknown basis id {basis_id!r}")


@dataclass(frozen=True)
class DetectionReport:
    """Analytic and empirical single-cycle detection probability."""

    p_analytic: float
    p_empirical: float
    failures: int
    trials: int
    ci_low: float
    ci_high: float


def _allowed_pairs(init: StateVector, basis: Basis) -> frozenset[tuple[int, int]]:
    """Outcome pairs with support when both parties measure the clean state."""
    coeffs = basis.matrix.conj().T @ init.reshaped() @ basis.matrix.conj()
    probs = np.abs(coeffs) ** 2  # [bob, alice]
    return frozenset(
        (int(a), int(b)) for b, a in zip(*np.nonzero(probs > _SUPPORT_CUTOFF))
    )


def computational_control(cfg: ProtocolConfig) -> ControlModeHandle:
    """Single-basis menu; the pass predicate follows the configured state."""
    basis = Basis.computational(cfg.dim)
    allowed = _allowed_pairs(make_initial_state(cfg), basis)
    return ControlModeHandle(
        name="computational",
        dim=cfg.dim,
        bases=(ControlBasis("computational", basis, 1.0, allowed),),
    )


def two_basis_control(cfg: ProtocolConfig) -> ControlModeHandle:
    """Computational and dual bases with equal selection probability."""
    if cfg.initial_state_kind != QUBIT_SINGLET or cfg.dim != 2:
        raise ValueError("two-basis control is defined for the qubit singlet kind only")
    init = make_initial_state(cfg)
    comp = Basis.computational(2)
    dual = Basis.dual()
    return ControlModeHandle(
        name="two-basis",
        dim=2,
        bases=(
            ControlBasis("computational", comp, 0.5, _allowed_pairs(init, comp)),
            ControlBasis("dual", dual, 0.5, _allowed_pairs(init, dual)),
        ),
    )


def from_name(name: str, cfg: ProtocolConfig) -> ControlModeHandle:
    if name == "computational":
        return computational_control(cfg)
    if name == "two-basis":
        return two_basis_control(cfg)
    raise ValueError(f"unknown control mode {name!r}")


def fail_projector(entry: ControlBasis, dim: int) -> Operator:
    """Projector onto the outcome pairs the pass predicate rejects."""
    passing = np.zeros((dim * dim, dim * dim), dtype=np.complex128)
    for alice, bob in entry.allowed:
        b_vec = entry.basis.state(bob)
        a_vec = entry.basis.state(alice)
        passing += np.kron(np.outer(b_vec, b_vec.conj()), np.outer(a_vec, a_vec.conj()))
    return Operator.projector(np.eye(dim * dim) - passing)


def _check_dims(eve: EavesdropperHandle, control: ControlModeHandle, cfg: ProtocolConfig):
    if eve.dim != cfg.dim or control.dim != cfg.dim:
        raise ValueError(
            f"dimension mismatch: attack {eve.dim}, control {control.dim}, config {cfg.dim}"
        )


def analytic_pdet(eve: EavesdropperHandle, control: ControlModeHandle, cfg: ProtocolConfig) -> float:
    """Menu-weighted fail-projector expectation on the coupled control state."""
    _check_dims(eve, control, cfg)
    init = make_initial_state(cfg)
    total = 0.0
    projectors = [(cb.weight, fail_projector(cb, cfg.dim)) for cb in control.bases]
    for prob, state in eve.coupled_branches(init):
        rho = partial_trace(state, (HOME, TRAVEL))
        for weight, proj in projectors:
            total += prob * weight * rho.expectation(proj)
    return float(total)


def _joint_outcome_table(
    branches: list[tuple[float, StateVector]], basis: Basis, dim: int
) -> np.ndarray:
    """P(alice, bob) for one basis, marginalized over Eve's subsystems."""
    table = np.zeros((dim, dim))
    conj = basis.matrix.conj()
    for prob, state in branches:
        arr = state.amps.reshape(dim, dim, -1)
        step = np.einsum("hi,htr->itr", conj, arr)
        coeffs = np.einsum("tj,itr->ijr", conj, step)  # [bob, alice, eve]
        table += prob * np.einsum("ijr,ijr->ji", coeffs, coeffs.conj()).real
    return np.clip(table, 0.0, None)


def empirical_pdet(
    eve: EavesdropperHandle,
    control: ControlModeHandle,
    cfg: ProtocolConfig,
    trials: int,
) -> DetectionReport:
    """Seeded Monte Carlo over independent control cycles.

    The coupled ensemble and the per-basis Born tables are computed once;
    each trial samples a basis and an outcome pair from the exact joint
    distribution. Deterministic for a fixed cfg.seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _check_dims(eve, control, cfg)
    init = make_initial_state(cfg)
    branches = eve.coupled_branches(init)
    rng = stream(cfg.seed, PDET_TAG)
    weights = np.array([cb.weight for cb in control.bases])
    chosen = rng.choice(len(control.bases), size=trials, p=weights / weights.sum())
    failures = 0
    for b_idx, cb in enumerate(control.bases):
        n_b = int(np.sum(chosen == b_idx))
        if n_b == 0:
            continue
        table = _joint_outcome_table(branches, cb.basis, cfg.dim)
        flat = table.reshape(-1)
        flat = flat / flat.sum()
        outcomes = rng.choice(cfg.dim * cfg.dim, size=n_b, p=flat)
        fail_mask = np.array(
            [(a, b) not in cb.allowed for a in range(cfg.dim) for b in range(cfg.dim)]
        )
        failures += int(np.sum(fail_mask[outcomes]))
    low, high = wilson_interval(failures, trials)
    return DetectionReport(
        p_analytic=analytic_pdet(eve, control, cfg),
        p_empirical=failures / trials,
        failures=failures,
        trials=trials,
        ci_low=low,
        ci_high=high,
    )


def wilson_interval(failures: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson 95% score interval; well-behaved at zero failures."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    phat = failures / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return center - half, center + half


@dataclass(frozen=True, eq=False)
class DualBasisDecomposition:
    """Coefficients of a coupled qubit control state in the |+->(x)|+-> frame.

    components[(home_sign, travel_sign)] is the unnormalized ancilla vector
    multiplying that product term.
    """

    ancilla_layout: SubsystemLayout
    components: dict[tuple[str, str], np.ndarray]

    def component(self, home_sign: str, travel_sign: str) -> np.ndarray:
        return self.components[(home_sign, travel_sign)]

    def norm(self, home_sign: str, travel_sign: str) -> float:
        return float(np.linalg.norm(self.components[(home_sign, travel_sign)]))


def dual_basis_expand(state: StateVector) -> DualBasisDecomposition:
    """Expand a coupled (h, t, ancilla) qubit state over the dual basis."""
    labels = state.layout.labels
    if labels[:2] != (HOME, TRAVEL) or state.layout.dims[:2] != (2, 2):
        raise ValueError("dual-basis expansion expects a qubit state on (h, t, ancilla)")
    conj = Basis.dual().matrix.conj()
    arr = state.amps.reshape(2, 2, -1)
    step = np.einsum("hi,htr->itr", conj, arr)
    coeffs = np.einsum("tj,itr->ijr", conj, step)  # [home_sign, travel_sign, eve]
    signs = ("+", "-")
    components = {
        (signs[i], signs[j]): np.ascontiguousarray(coeffs[i, j, :]) for i in range(2) for j in range(2)
    }
    anc_entries = state.layout.entries[2:] or (("e", 1),)
    return DualBasisDecomposition(SubsystemLayout(tuple(anc_entries)), components)
