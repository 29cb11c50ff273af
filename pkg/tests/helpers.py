"""Batch simulation of permutation circuits and a gate-by-gate unitary reference."""
import math

import numpy as np

from qmilp.circuit import Gate, GateKind, QuantumCircuit, RegisterLayout, cry, cswap, h, mcx, mcz

from qmilp.statevector import SparseState


def basis_map(circuit, inputs):
    """Output basis index for each input basis index; asserts a clean permutation."""
    layout = circuit.layout
    k = layout.num_qubits
    inputs = np.asarray(inputs, dtype=np.int64)
    tags = np.arange(len(inputs), dtype=np.int64)
    state = SparseState(layout, (tags << k) | inputs, np.ones(len(inputs), dtype=complex))
    state.apply(circuit)
    assert len(state.keys) == len(inputs), "circuit is not a basis permutation"
    assert np.allclose(state.amps, 1.0)
    out = np.empty(len(inputs), dtype=np.int64)
    out[state.keys >> k] = state.keys & ((np.int64(1) << k) - 1)
    return out


def read(index, qubits):
    value = 0
    for j, q in enumerate(qubits):
        value |= ((int(index) >> q) & 1) << j
    return value


def write(index, qubits, value):
    for j, q in enumerate(qubits):
        bit = (value >> j) & 1
        index = (index & ~(1 << q)) | (bit << q)
    return index


def signed(value, width):
    return value - (1 << width) if value >> (width - 1) & 1 else value


def flat(k):
    return RegisterLayout.from_widths([("q", k)])


def reference_gate(gate, k):
    """Column-by-column unitary of one gate, written out from its definition."""
    dim = 1 << k
    u = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        if not all((col >> q & 1) == pol for q, pol in gate.controls):
            u[col, col] = 1
            continue
        kind = gate.kind
        if kind is GateKind.MCZ:
            u[col, col] = -1
        elif kind is GateKind.CSWAP:
            a, b = gate.targets
            ba, bb = col >> a & 1, col >> b & 1
            u[col ^ ((ba ^ bb) << a) ^ ((ba ^ bb) << b), col] = 1
        else:
            (t,) = gate.targets
            bit = col >> t & 1
            if kind in (GateKind.X, GateKind.CX, GateKind.MCX):
                u[col ^ (1 << t), col] = 1
            elif kind is GateKind.T:
                u[col, col] = np.exp(1j * math.pi / 4) if bit else 1
            elif kind is GateKind.TDG:
                u[col, col] = np.exp(-1j * math.pi / 4) if bit else 1
            elif kind is GateKind.H:
                u[col & ~(1 << t), col] = 1 / math.sqrt(2)
                u[col | (1 << t), col] = -1 / math.sqrt(2) if bit else 1 / math.sqrt(2)
            elif kind is GateKind.CRY:
                c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
                if bit:
                    u[col & ~(1 << t), col], u[col, col] = -s, c
                else:
                    u[col, col], u[col | (1 << t), col] = c, s
    return u


def random_circuit(rng, k, size):
    layout = flat(k)
    gates = []
    for _ in range(size):
        qs = [int(q) for q in rng.permutation(k)]
        pick = int(rng.integers(0, 7))
        ctrls = [(q, bool(rng.integers(0, 2))) for q in qs[2:2 + int(rng.integers(0, 3))]]
        if pick == 0:
            gates.append(h(qs[0]))
        elif pick == 1:
            gates.append(mcx(qs[0], ctrls))
        elif pick == 2:
            gates.append(cry(qs[0], float(rng.uniform(-3, 3)), ctrls))
        elif pick == 3:
            gates.append(cswap(qs[0], qs[1], ctrls))
        elif pick == 4:
            gates.append(mcz(ctrls))
        elif pick == 5:
            gates.append(Gate(GateKind.T, (qs[0],)))
        else:
            gates.append(Gate(GateKind.TDG, (qs[0],)))
    return QuantumCircuit(layout, gates)
