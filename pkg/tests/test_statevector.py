import math

import numpy as np
import pytest

from helpers import flat, random_circuit, reference_gate
from qmilp.circuit import (
    QuantumCircuit,
    RegisterLayout,
    compose,
    h,
    inverse,
    layout_for,
    mcz,
    x,
)
from qmilp.ilp import enumerate_domain, evaluate_form
from qmilp.statevector import (
    GuardError,
    MeasurementError,
    SparseState,
    StateVector,
    ancilla_residual,
    init_zero,
    marginal,
    measure_partial,
    prepare_initial,
    register_values,
)
from qmilp.walk import model_for, synth_V, synth_W

K = 5


@pytest.mark.parametrize("seed", range(6))
def test_backends_match_reference(seed):
    rng = np.random.default_rng(seed)
    circ = random_circuit(rng, K, 40)
    amps = rng.normal(size=1 << K) + 1j * rng.normal(size=1 << K)
    amps /= np.linalg.norm(amps)
    expected = amps.copy()
    for g in circ.gates:
        expected = reference_gate(g, K) @ expected
    dense = StateVector(circ.layout, amps.copy()).apply(circ)
    sparse = SparseState(circ.layout, np.arange(1 << K), amps.copy()).apply(circ)
    assert np.abs(dense.to_dense() - expected).max() < 1e-12
    assert np.abs(sparse.to_dense() - expected).max() < 1e-12


def test_hadamard_example():
    state = StateVector(flat(1)).apply(QuantumCircuit(flat(1), [h(0)]))
    assert np.allclose(state.to_dense(), [1 / math.sqrt(2)] * 2)


def test_mcz_without_controls_is_global_sign():
    state = SparseState(flat(2), [1, 2], [0.6, 0.8]).apply(QuantumCircuit(flat(2), [mcz()]))
    assert np.allclose(state.amps, [-0.6, -0.8])


def test_sparse_drops_cancelled_amplitudes():
    state = SparseState(flat(1)).apply(QuantumCircuit(flat(1), [h(0), h(0)]))
    assert state.keys.tolist() == [0]


def test_dense_guard():
    with pytest.raises(GuardError):
        StateVector(flat(27))


def test_layout_mismatch():
    with pytest.raises(ValueError):
        StateVector(flat(2)).apply(QuantumCircuit(flat(3), [x(0)]))


def test_probabilities_over_packs_in_given_order():
    state = SparseState(flat(3), [0b110], [1.0])
    assert state.probabilities_over([2, 0]) == {0b01: 1.0}
    dense = StateVector(flat(3), np.eye(8)[0b110].astype(complex))
    assert dense.probabilities_over([2, 0]) == {0b01: 1.0}


@pytest.mark.parametrize("sparse", [False, True])
def test_measure_frequencies_and_reset(sparse):
    layout = RegisterLayout.from_widths([("a", 1), ("b", 1)])
    amps = np.array([math.sqrt(0.2), 0, 0, math.sqrt(0.8)], dtype=complex)  # |00>, |11>
    rng = np.random.default_rng(11)
    hits = 0
    for _ in range(2000):
        state = StateVector(layout, amps.copy())
        if sparse:
            state = SparseState.from_dense(state)
        outcome, state = measure_partial(state, rng, ["a"])
        hits += outcome["a"]
        assert register_values(state, "a") == {0: pytest.approx(1.0)}
        assert state.norm() == pytest.approx(1.0)
        assert register_values(state, "b") == {outcome["a"]: pytest.approx(1.0)}
    assert abs(hits / 2000 - 0.8) < 0.03


def test_measure_empty_state():
    state = SparseState(flat(1), [], [])
    with pytest.raises(MeasurementError):
        measure_partial(state, np.random.default_rng(0), ["q"])


def test_prepare_initial_halfplane(halfplane):
    layout = layout_for(halfplane)
    state = prepare_initial(halfplane, layout, sparse=True)
    table = marginal(state)
    assert len(table) == 16 and all(p == pytest.approx(1 / 16) for p in table.values())
    values = register_values(state, "F", signed=True)
    expect = {}
    for pt in enumerate_domain(halfplane):
        v = evaluate_form(halfplane.objective, pt)
        expect[v] = expect.get(v, 0) + 1 / 16
    assert values == pytest.approx(expect)
    assert ancilla_residual(state) == 0.0


def test_dense_and_sparse_walk_agree(tiny):
    layout = layout_for(tiny)
    walk = synth_W(tiny, model_for(tiny, 0.8, "exact", layout), layout)
    dense = prepare_initial(tiny, layout).apply(walk).apply(walk)
    sparse = prepare_initial(tiny, layout, sparse=True).apply(walk).apply(walk)
    assert np.abs(dense.to_dense() - sparse.to_dense()).max() < 1e-12


def test_V_roundtrip_leaves_ancillas_clean(halfplane):
    layout = layout_for(halfplane)
    v = synth_V(halfplane, layout)
    state = prepare_initial(halfplane, layout, sparse=True).apply(compose(v, inverse(v)))
    assert ancilla_residual(state, ("Sp", "Fp", "R", "carry", "ext", "C")) < 1e-24


def test_init_zero_kinds():
    assert isinstance(init_zero(flat(2)), StateVector)
    assert isinstance(init_zero(flat(2), sparse=True), SparseState)
