"""Property suites: algebraic invariants under random inputs and fixed seeds."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import all_pairs, coupling_zoo, qubit_cfg, qudit_cfg, rand_family, rand_state, rand_unitary
from pingpong.attacks import no_attack, validate_coupling
from pingpong.control import computational_control
from pingpong.protocol import algebra, bob_decode, dense_encode, make_initial_state, run_session
from pingpong.qstate import (
    Basis,
    Operator,
    StateVector,
    SubsystemLayout,
    apply,
    complete_isometry,
    measure,
    partial_trace,
    tensor,
)

rng_seeds = st.integers(min_value=0, max_value=2**31 - 1)


@settings(max_examples=60, deadline=None)
@given(rng_seeds)
def test_tensor_norm_multiplicative(seed):
    rng = np.random.default_rng(seed)
    a = rand_state(rng, SubsystemLayout.of(("a", int(rng.integers(2, 5)))))
    b = rand_state(rng, SubsystemLayout.of(("b", int(rng.integers(2, 5)))))
    assert abs(tensor(a, b).norm - 1.0) < 1e-12


@settings(max_examples=60, deadline=None)
@given(rng_seeds)
def test_unitary_roundtrip_is_identity(seed):
    rng = np.random.default_rng(seed)
    layout = SubsystemLayout.of(("a", 2), ("b", 3))
    state = rand_state(rng, layout)
    u = Operator.unitary(rand_unitary(rng, 6))
    back = apply(apply(state, u, ("a", "b")), u.inverse, ("a", "b"))
    assert np.max(np.abs(back.amps - state.amps)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(rng_seeds)
def test_unitary_apply_preserves_norm(seed):
    rng = np.random.default_rng(seed)
    layout = SubsystemLayout.of(("a", 3), ("b", 2))
    state = rand_state(rng, layout)
    u = Operator.unitary(rand_unitary(rng, 3))
    assert abs(apply(state, u, "a").norm - 1.0) < 1e-12


@settings(max_examples=40, deadline=None)
@given(rng_seeds, st.floats(min_value=0.0, max_value=2 * math.pi))
def test_decode_ignores_global_phase(seed, theta):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(2, 5))
    cfg = qudit_cfg(dim)
    mu, nu = int(rng.integers(dim)), int(rng.integers(dim))
    state = dense_encode(make_initial_state(cfg), mu, nu, algebra(dim))
    rotated = StateVector(state.layout, np.exp(1j * theta) * state.amps)
    assert bob_decode(rotated, cfg) == (mu, nu)


@settings(max_examples=40, deadline=None)
@given(rng_seeds)
def test_completion_extends_partial_isometry(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(3, 9))
    k = int(rng.integers(1, dim))
    layout = SubsystemLayout.of(("q", dim))
    dom_mat = rand_unitary(rng, dim)[:, :k]
    img_mat = rand_unitary(rng, dim)[:, :k]
    domain = [StateVector(layout, dom_mat[:, j]) for j in range(k)]
    image = [StateVector(layout, img_mat[:, j]) for j in range(k)]
    op = complete_isometry(domain, image)
    assert np.max(np.abs(op.matrix.conj().T @ op.matrix - np.eye(dim))) < 1e-12
    for d, i in zip(domain, image):
        assert np.linalg.norm(op.matrix @ d.amps - i.amps) < 1e-12


@settings(max_examples=40, deadline=None)
@given(rng_seeds)
def test_measurement_probability_matches_amplitudes(seed):
    rng = np.random.default_rng(seed)
    layout = SubsystemLayout.of(("a", 3), ("b", 2))
    state = rand_state(rng, layout)
    out = measure(state, "a", Basis.computational(3), rng)
    marginal = np.sum(np.abs(state.reshaped()) ** 2, axis=1)
    assert out.probability == pytest.approx(marginal[out.outcome], abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(rng_seeds)
def test_partial_trace_of_product_is_rank_one(seed):
    rng = np.random.default_rng(seed)
    a = rand_state(rng, SubsystemLayout.of(("a", 3)))
    b = rand_state(rng, SubsystemLayout.of(("b", 4)))
    rho = partial_trace(tensor(a, b), "a")
    eigs = np.linalg.eigvalsh(rho.matrix)
    assert abs(eigs[-1] - 1.0) < 1e-10


# --- seeded suites (run once per seed in SEEDS) -------------------------------


def test_born_frequencies_match_probabilities(seed):
    n = 20_000
    band = 4 / math.sqrt(n)
    rng = np.random.default_rng(seed)

    init = make_initial_state(qubit_cfg())
    counts = np.zeros(2)
    for _ in range(n):
        counts[measure(init, "t", Basis.computational(2), rng).outcome] += 1
    assert np.max(np.abs(counts / n - 0.5)) < band

    layout = SubsystemLayout.of(("q", 3))
    biased = StateVector(layout, np.sqrt([0.5, 0.3, 0.2]).astype(complex))
    counts = np.zeros(3)
    for _ in range(n):
        counts[measure(biased, "q", Basis.computational(3), rng).outcome] += 1
    assert np.max(np.abs(counts / n - [0.5, 0.3, 0.2])) < band


def test_coupling_zoo_unitarity(seed):
    for eve, _ in coupling_zoo(seed):
        q = eve.coupling.matrix
        assert np.max(np.abs(q.conj().T @ q - np.eye(q.shape[0]))) < 1e-12


def test_coupling_zoo_shift_residuals(seed):
    for eve, _ in coupling_zoo(seed):
        if eve.detection is None:
            continue
        probes = _implied_probes(eve)
        report = validate_coupling(eve.coupling, eve.detection, probes, eve.dim)
        assert report.passed


def _implied_probes(eve):
    """Probe family read off the coupling: Q|0_t, d_m> = |0_t>|p_m>."""
    from pingpong.attacks import StateFamily
    from pingpong.qstate import factor

    travel_layout = SubsystemLayout.of(("t", eve.dim))
    probes = []
    for m in range(eve.dim):
        src = tensor(StateVector.basis(travel_layout, (0,)), eve.detection.states[m])
        out = StateVector(src.layout, eve.coupling.matrix @ src.amps)
        probes.append(factor(out, eve.ancilla_labels))
    return StateFamily(tuple(probes))


def test_random_unitaries_keep_apply_reversible(seed):
    rng = np.random.default_rng(seed)
    layout = SubsystemLayout.of(("a", 2), ("b", 2), ("c", 3))
    for _ in range(20):
        state = rand_state(rng, layout)
        u = Operator.unitary(rand_unitary(rng, 6))
        targets = ("b", "c")
        back = apply(apply(state, u, targets), u.inverse, targets)
        assert np.max(np.abs(back.amps - state.amps)) < 1e-12


def test_session_transcripts_deterministic(seed):
    cfg = qubit_cfg(control_prob=0.3, n_cycles=60, seed=seed)
    message = all_pairs(2) * 15
    control = computational_control(cfg)
    assert run_session(cfg, message, no_attack(2), control) == run_session(
        cfg, message, no_attack(2), control
    )


def test_generic_families_keep_protocol_transparent(seed):
    rng = np.random.default_rng(seed)
    from pingpong.attacks import generic_coupling
    from pingpong.control import analytic_pdet

    eve = generic_coupling(3, rand_family(rng, 5, 3), rand_family(rng, 5, 3))
    cfg = qudit_cfg(3, control_prob=0.0, n_cycles=9)
    assert abs(analytic_pdet(eve, computational_control(cfg), cfg)) < 1e-12
    records = run_session(cfg, all_pairs(3), eve, computational_control(cfg))
    assert all(r.bob_decoded == r.alice_symbols for r in records)
    assert all(r.eve_guess == r.alice_symbols[0] for r in records)


def test_generic_couplings_invisible_for_every_dimension(seed):
    rng = np.random.default_rng(seed)
    from pingpong.attacks import generic_coupling
    from pingpong.control import analytic_pdet

    for dim in (2, 3, 4, 5):
        eve = generic_coupling(dim, rand_family(rng, dim + 1, dim), rand_family(rng, dim + 1, dim))
        cfg = qudit_cfg(dim)
        value = analytic_pdet(eve, computational_control(cfg), cfg)
        assert 0.0 <= value + 1e-15 and abs(value) < 1e-12
