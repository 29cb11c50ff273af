import math

import pytest
from hypothesis import given, strategies as st

from qmilp.arith import synth_negate
from qmilp.circuit import (
    CircuitError,
    Gate,
    GateKind,
    QuantumCircuit,
    RegisterLayout,
    append,
    compose,
    cry,
    cswap,
    gate_cost,
    h,
    inverse,
    layout_for,
    mcx,
    mcz,
    new_circuit,
    qubit_count,
    toffoli_equivalents,
    x,
)
from qmilp.ilp import IlpInstance, LinearForm, Constraint
from qmilp.walk import AcceptanceMode, model_for, synth_walk_parts


def flat(k):
    return RegisterLayout.from_widths([("q", k)])


# layouts

def test_halfplane_layout(halfplane):
    layout = layout_for(halfplane)
    assert layout.widths() == {"S": 4, "Sp": 4, "F": 5, "Fp": 5, "R": 1, "C": 1, "carry": 1, "ext": 3}
    assert qubit_count(layout) == 24
    assert len(new_circuit(layout)) == 0


def test_minimal_layout_has_no_counter():
    layout = layout_for(IlpInstance(1, 1, LinearForm(0, (1,))))
    assert layout.width("R") == 0


def test_layout_ranges_cover_everything(halfplane):
    layout = layout_for(halfplane)
    covered = sorted(q for name in layout.widths() for q in layout.qubits(name))
    assert covered == list(range(layout.num_qubits))


@pytest.mark.parametrize("m, width", [(1, 1), (2, 2), (3, 2), (4, 3)])
def test_counter_width(m, width):
    cons = tuple(Constraint(LinearForm(0, (1,))) for _ in range(m))
    assert layout_for(IlpInstance(1, 2, LinearForm(0, (1,)), cons)).width("R") == width


def test_doubling_d_doubles_s_registers():
    a = layout_for(IlpInstance(2, 2, LinearForm(0, (1, 1))))
    b = layout_for(IlpInstance(2, 4, LinearForm(0, (1, 1))))
    assert b.width("S") == 2 * a.width("S") and b.width("Sp") == 2 * a.width("Sp")


def test_overlapping_layout_rejected():
    with pytest.raises(CircuitError, match="overlapping"):
        RegisterLayout((("a", 0, 3), ("b", 2, 2)))


def test_gap_in_layout_rejected():
    with pytest.raises(CircuitError, match="non-contiguous"):
        RegisterLayout((("a", 0, 2), ("b", 3, 2)))


# gates and circuits

def test_append_x():
    circ = append(new_circuit(flat(2)), x(0))
    assert len(circ) == 1


def test_target_in_controls_rejected():
    with pytest.raises(CircuitError):
        mcx(1, [0, 1])


def test_out_of_range_rejected():
    with pytest.raises(CircuitError):
        new_circuit(flat(2)).append(x(2))


def test_nonfinite_angle_rejected():
    with pytest.raises(CircuitError):
        cry(0, math.inf)


def test_mcx_kind_follows_control_count():
    assert mcx(0).kind is GateKind.X
    assert mcx(0, [1]).kind is GateKind.CX
    assert mcx(0, [1, (2, False)]).kind is GateKind.MCX


def test_negation_gate_sequence():
    # three NOTs, then the +1 cascade: MCX on the top bit, CX, X on bit 0
    gates = synth_negate(flat(3), [0, 1, 2]).gates
    assert [g.kind for g in gates] == [GateKind.X] * 3 + [GateKind.MCX, GateKind.CX, GateKind.X]
    assert gates[3].targets == (2,) and gates[4].targets == (1,)


def test_compose_with_empty_is_identity():
    c = QuantumCircuit(flat(3), [h(0), mcx(2, [0, 1])])
    assert compose(c, new_circuit(flat(3))) == c


def test_compose_layout_mismatch():
    with pytest.raises(CircuitError):
        compose(new_circuit(flat(2)), new_circuit(flat(3)))


def test_inverse_involution():
    c = QuantumCircuit(flat(3), [h(0), cry(1, 0.3, [0]), cswap(1, 2, [(0, False)]), mcz([0, 1])])
    assert inverse(inverse(c)) == c


def test_inverse_negates_rotation():
    g = inverse(QuantumCircuit(flat(2), [cry(0, 0.25, [1])])).gates[0]
    assert g.kind is GateKind.CRY and g.angle == -0.25


def test_inverse_swaps_t_and_tdg():
    c = QuantumCircuit(flat(1), [Gate(GateKind.T, (0,))])
    assert inverse(c).gates[0].kind is GateKind.TDG


def test_dump_lists_polarity():
    line = mcx(2, [0, (1, False)]).dump()
    assert line == "MCX 2 [0+ 1-]"


# cost model

def test_toffoli_costs_one():
    assert toffoli_equivalents(QuantumCircuit(flat(3), [mcx(2, [0, 1])])).toffoli_equivalents == 1.0


def test_five_control_mcx():
    assert gate_cost(mcx(5, range(5))) == 7.0


def test_fourteen_t_gates():
    c = QuantumCircuit(flat(1), [Gate(GateKind.T, (0,))] * 14)
    assert toffoli_equivalents(c).toffoli_equivalents == 2.0


@pytest.mark.parametrize(
    "gate, cost",
    [
        (x(0), 0), (h(0), 0), (mcx(0, [1]), 0),
        (cry(0, 0.1), 0), (cry(0, 0.1, [1]), 0), (cry(0, 0.1, [1, 2]), 2), (cry(0, 0.1, [1, 2, 3]), 4),
        (cswap(0, 1), 0), (cswap(0, 1, [2]), 1), (cswap(0, 1, [2, 3]), 3),
        (mcz(), 0), (mcz([0, 1]), 1), (mcz([0, 1, 2]), 3),
    ],
)
def test_gate_costs(gate, cost):
    assert gate_cost(gate) == cost


def test_polarity_does_not_change_cost():
    assert gate_cost(mcx(3, [0, 1, 2])) == gate_cost(mcx(3, [(0, False), (1, False), 2]))


gates_strategy = st.lists(
    st.one_of(
        st.builds(lambda t, cs: mcx(t, [c for c in cs if c != t]), st.integers(0, 5), st.sets(st.integers(0, 5), max_size=4)),
        st.builds(lambda t, cs, a: cry(t, a, [c for c in cs if c != t]), st.integers(0, 5),
                  st.sets(st.integers(0, 5), max_size=4), st.floats(-3, 3)),
        st.just(Gate(GateKind.T, (0,))),
        st.just(Gate(GateKind.TDG, (1,))),
    ),
    max_size=30,
)


@given(gates_strategy, gates_strategy)
def test_cost_additive(a, b):
    ca, cb = QuantumCircuit(flat(6), a), QuantumCircuit(flat(6), b)
    total = toffoli_equivalents(compose(ca, cb)).exact
    assert total == toffoli_equivalents(ca).exact + toffoli_equivalents(cb).exact


@given(gates_strategy)
def test_cost_symmetric(a):
    c = QuantumCircuit(flat(6), a)
    assert toffoli_equivalents(inverse(c)).exact == toffoli_equivalents(c).exact


@pytest.mark.parametrize("mode", ["exact", "linear"])
def test_breakdown_sums_to_total(halfplane, mode):
    layout = layout_for(halfplane)
    walk = synth_walk_parts(halfplane, model_for(halfplane, 1.0, mode, layout), layout).circuit
    report = toffoli_equivalents(walk)
    assert set(report.breakdown) == {"V", "B", "F", "R"}
    assert sum(report.breakdown.values()) == report.toffoli_equivalents
    assert report.num_qubits == 24
