"""Exact statevector simulation of circuits over a RegisterLayout.

Two storage formats share one interface:

* ``StateVector`` keeps all 2^k amplitudes (guarded at k <= 26).
* ``SparseState`` keeps only nonzero amplitudes as (basis index, amplitude)
  arrays. The walk keeps F, F', the counter and the adder ancillas as
  functions of (S, S', C), so the support stays near 2^(2nd+2) even when k
  is far beyond what a dense vector can hold.

Qubit q is bit q of the basis index.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .arith import linear_form_on
from .circuit import Gate, GateKind, QuantumCircuit, RegisterLayout, h, layout_for, x
from .ilp import IlpInstance, decode_twos_complement, index_to_point

MAX_DENSE_QUBITS = 26
_DROP = 1e-14  # amplitudes below this magnitude are discarded by the sparse backend
_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_T_PHASE = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))


class GuardError(ValueError):
    pass


class MeasurementError(RuntimeError):
    pass


def _single_qubit_matrix(gate: Gate) -> np.ndarray:
    if gate.kind is GateKind.H:
        return np.array([[_INV_SQRT2, _INV_SQRT2], [_INV_SQRT2, -_INV_SQRT2]], dtype=complex)
    c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


class _State:
    layout: RegisterLayout
    seed: int | None = None

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    def apply(self, circuit: QuantumCircuit) -> "_State":
        if circuit.layout != self.layout:
            raise ValueError("layout mismatch between state and circuit")
        for gate in circuit.gates:
            self.apply_gate(gate)
        return self

    def register_mask(self, names: Iterable[str]) -> tuple[list[int], int]:
        qubits = [q for name in names for q in self.layout.qubits(name)]
        mask = 0
        for q in qubits:
            mask |= 1 << q
        return qubits, mask


class StateVector(_State):
    """Dense amplitude vector of length 2^k."""

    def __init__(self, layout: RegisterLayout, amplitudes: np.ndarray | None = None, seed: int | None = None):
        k = layout.num_qubits
        if k > MAX_DENSE_QUBITS:
            need = (16 << k) / 2**30
            raise GuardError(
                f"dense state over {k} qubits needs {need:.1f} GiB; limit is {MAX_DENSE_QUBITS} qubits"
            )
        self.layout = layout
        self.seed = seed
        if amplitudes is None:
            amplitudes = np.zeros(1 << k, dtype=complex)
            amplitudes[0] = 1.0
        self.amplitudes = np.asarray(amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << k,):
            raise ValueError("amplitude vector has the wrong length")

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amplitudes.copy(), self.seed)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_dense(self) -> np.ndarray:
        return self.amplitudes

    def _view(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def _index(self, controls, fixed=()) -> list:
        k = self.num_qubits
        idx: list = [slice(None)] * k
        for q, pol in controls:
            idx[k - 1 - q] = int(pol)
        for q, val in fixed:
            idx[k - 1 - q] = val
        return idx

    def apply_gate(self, gate: Gate) -> None:
        if self.num_qubits == 0:
            if gate.kind is GateKind.MCZ:
                self.amplitudes *= -1
            return
        v = self._view()
        kind = gate.kind
        if kind is GateKind.MCZ:
            v[tuple(self._index(gate.controls))] *= -1
            return
        if kind is GateKind.CSWAP:
            p, q = gate.targets
            i01 = tuple(self._index(gate.controls, [(p, 1), (q, 0)]))
            i10 = tuple(self._index(gate.controls, [(p, 0), (q, 1)]))
            tmp = v[i01].copy()
            v[i01] = v[i10]
            v[i10] = tmp
            return
        (t,) = gate.targets
        i0 = tuple(self._index(gate.controls, [(t, 0)]))
        i1 = tuple(self._index(gate.controls, [(t, 1)]))
        if kind in (GateKind.X, GateKind.CX, GateKind.MCX):
            tmp = v[i0].copy()
            v[i0] = v[i1]
            v[i1] = tmp
        elif kind in (GateKind.T, GateKind.TDG):
            v[i1] *= _T_PHASE if kind is GateKind.T else _T_PHASE.conjugate()
        else:
            m = _single_qubit_matrix(gate)
            a0, a1 = v[i0].copy(), v[i1].copy()
            v[i0] = m[0, 0] * a0 + m[0, 1] * a1
            v[i1] = m[1, 0] * a0 + m[1, 1] * a1

    def probabilities_over(self, qubits: Sequence[int]) -> dict[int, float]:
        """Marginal distribution of the given qubits, keyed by packed value (qubits[j] -> bit j)."""
        k = self.num_qubits
        probs = (np.abs(self.amplitudes) ** 2).reshape((2,) * k) if k else np.abs(self.amplitudes) ** 2
        keep = [k - 1 - q for q in qubits]
        other = tuple(a for a in range(k) if a not in keep)
        marg = probs.sum(axis=other) if other else probs
        # axes of marg are the kept axes in ascending axis order
        order = sorted(keep)
        out: dict[int, float] = {}
        for combo in np.argwhere(marg > 0) if marg.ndim else []:
            value = 0
            for ax, bit in zip(order, combo):
                q = k - 1 - ax
                value |= int(bit) << qubits.index(q)
            out[value] = float(marg[tuple(combo)])
        return out

    def project(self, qubits: Sequence[int], value: int) -> float:
        """Zero every amplitude inconsistent with qubits == value; return the kept mass."""
        fixed = [(q, value >> j & 1) for j, q in enumerate(qubits)]
        keep = np.zeros_like(self.amplitudes)
        kv, sv = keep.reshape((2,) * self.num_qubits), self._view()
        idx = tuple(self._index((), fixed))
        kv[idx] = sv[idx]
        mass = float(np.vdot(keep, keep).real)
        self.amplitudes = keep
        return mass

    def scale(self, factor: float) -> None:
        self.amplitudes *= factor

    def basis_items(self) -> tuple[np.ndarray, np.ndarray]:
        idx = np.flatnonzero(self.amplitudes)
        return idx.astype(np.int64), self.amplitudes[idx]


class SparseState(_State):
    """Nonzero amplitudes only: parallel arrays of basis indices and amplitudes."""

    def __init__(self, layout: RegisterLayout, keys=None, amps=None, seed: int | None = None):
        if layout.num_qubits > 62:
            raise GuardError("sparse backend indexes basis states with 64-bit integers (k <= 62)")
        self.layout = layout
        self.seed = seed
        if keys is None:
            keys, amps = np.zeros(1, dtype=np.int64), np.ones(1, dtype=complex)
        self.keys = np.asarray(keys, dtype=np.int64)
        self.amps = np.asarray(amps, dtype=complex)

    @classmethod
    def from_dense(cls, state: StateVector) -> "SparseState":
        keys, amps = state.basis_items()
        return cls(state.layout, keys, amps.copy(), state.seed)

    def copy(self) -> "SparseState":
        return SparseState(self.layout, self.keys.copy(), self.amps.copy(), self.seed)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(1 << self.num_qubits, dtype=complex)
        np.add.at(out, self.keys, self.amps)
        return out

    def _mask(self, controls) -> np.ndarray | None:
        mask = None
        for q, pol in controls:
            m = ((self.keys >> q) & 1) == int(pol)
            mask = m if mask is None else mask & m
        return mask

    def apply_gate(self, gate: Gate) -> None:
        kind = gate.kind
        sel = self._mask(gate.controls)
        if kind is GateKind.MCZ:
            if sel is None:
                self.amps = -self.amps
            else:
                self.amps[sel] *= -1
            return
        if kind is GateKind.CSWAP:
            p, q = gate.targets
            differ = ((self.keys >> p) ^ (self.keys >> q)) & 1 == 1
            hit = differ if sel is None else differ & sel
            self.keys[hit] ^= (1 << p) | (1 << q)
            return
        (t,) = gate.targets
        bit = np.int64(1) << t
        if kind in (GateKind.X, GateKind.CX, GateKind.MCX):
            if sel is None:
                self.keys ^= bit
            else:
                self.keys[sel] ^= bit
            return
        if kind in (GateKind.T, GateKind.TDG):
            hit = (self.keys & bit) != 0
            if sel is not None:
                hit &= sel
            self.amps[hit] *= _T_PHASE if kind is GateKind.T else _T_PHASE.conjugate()
            return
        self._apply_mixing(_single_qubit_matrix(gate), bit, sel)

    def _apply_mixing(self, m: np.ndarray, bit: np.int64, sel: np.ndarray | None) -> None:
        if sel is None:
            keys, amps = self.keys, self.amps
            rest_k, rest_a = self.keys[:0], self.amps[:0]
        else:
            keys, amps = self.keys[sel], self.amps[sel]
            rest_k, rest_a = self.keys[~sel], self.amps[~sel]
        b = ((keys & bit) != 0).astype(np.intp)
        k0 = keys & ~bit
        out_keys = np.concatenate([rest_k, k0, k0 | bit])
        out_amps = np.concatenate([rest_a, m[0, b] * amps, m[1, b] * amps])
        self.keys, self.amps = _coalesce(out_keys, out_amps)

    def probabilities_over(self, qubits: Sequence[int]) -> dict[int, float]:
        packed = _pack(self.keys, qubits)
        p = np.abs(self.amps) ** 2
        uniq, inv = np.unique(packed, return_inverse=True)
        sums = np.bincount(inv, weights=p)
        return {int(u): float(s) for u, s in zip(uniq, sums) if s > 0}

    def project(self, qubits: Sequence[int], value: int) -> float:
        keep = _pack(self.keys, qubits) == value
        self.keys, self.amps = self.keys[keep], self.amps[keep]
        return float(np.vdot(self.amps, self.amps).real)

    def scale(self, factor: float) -> None:
        self.amps *= factor

    def basis_items(self) -> tuple[np.ndarray, np.ndarray]:
        return self.keys, self.amps


def _pack(keys: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    out = np.zeros_like(keys)
    for j, q in enumerate(qubits):
        out |= ((keys >> q) & 1) << j
    return out


def _coalesce(keys: np.ndarray, amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    uniq, inv = np.unique(keys, return_inverse=True)
    re = np.bincount(inv, weights=amps.real, minlength=len(uniq))
    im = np.bincount(inv, weights=amps.imag, minlength=len(uniq))
    total = re + 1j * im
    keep = np.abs(total) > _DROP
    return uniq[keep], total[keep]


State = StateVector | SparseState


def init_zero(layout: RegisterLayout, sparse: bool = False, seed: int | None = None) -> State:
    if sparse:
        return SparseState(layout, seed=seed)
    return StateVector(layout, seed=seed)


def prepare_initial(
    instance: IlpInstance,
    layout: RegisterLayout | None = None,
    sparse: bool = False,
    seed: int | None = None,
) -> State:
    """Uniform superposition on S with f(x) computed into F; everything else |0>."""
    layout = layout or layout_for(instance)
    state = init_zero(layout, sparse=sparse, seed=seed)
    prep = QuantumCircuit(layout, [h(q) for q in layout.qubits("S")])
    prep.extend(linear_form_on(layout, instance.objective, "S", "F"))
    return state.apply(prep)


def apply_circuit(state: State, circuit: QuantumCircuit) -> State:
    """Apply ``circuit`` in place and return the state."""
    return state.apply(circuit)


def measure_partial(
    state: State,
    rng: np.random.Generator,
    registers: Sequence[str] = ("C", "Sp"),
    reset: bool = True,
) -> tuple[dict[str, int], State]:
    """Born-rule measurement of ``registers``; the collapsed registers are reset to |0>.

    Returns the outcome per register (unsigned bit pattern) and the state,
    which is modified in place.
    """
    qubits, _ = state.register_mask(registers)
    if not qubits:
        return {}, state
    dist = state.probabilities_over(qubits)
    values = np.array(sorted(dist))
    probs = np.array([dist[v] for v in values])
    total = probs.sum()
    if not total > 0:
        raise MeasurementError("no probability mass to measure")
    value = int(values[rng.choice(len(values), p=probs / total)])
    mass = state.project(qubits, value)
    if mass <= 0:
        raise MeasurementError("projected onto an outcome with zero probability")
    state.scale(1.0 / math.sqrt(mass))
    if reset:
        for j, q in enumerate(qubits):
            if value >> j & 1:
                state.apply_gate(x(q))
    outcome, pos = {}, 0
    for name in registers:
        width = state.layout.width(name)
        outcome[name] = (value >> pos) & ((1 << width) - 1)
        pos += width
    return outcome, state


def register_values(state: State, name: str, signed: bool = False) -> dict[int, float]:
    qubits = state.layout.qubits(name)
    dist = state.probabilities_over(qubits)
    if not signed:
        return dist
    w = len(qubits)
    return {decode_twos_complement(v, w): p for v, p in dist.items()}


def marginal(state: State, register: str = "S") -> dict[tuple[int, ...], float]:
    """Probability table over decoded points of the S (or S') register."""
    layout = state.layout
    dist = state.probabilities_over(layout.qubits(register))
    return {index_to_point(v, layout.n, layout.d): p for v, p in sorted(dist.items())}


def ancilla_residual(state: State, registers: Sequence[str] = ("Fp", "R", "carry", "ext")) -> float:
    """Probability mass with any of ``registers`` away from |0>."""
    regs = [r for r in registers if r in state.layout and state.layout.width(r) > 0]
    qubits, _ = state.register_mask(regs)
    if not qubits:
        return 0.0
    dist = state.probabilities_over(qubits)
    return float(sum(p for v, p in dist.items() if v != 0))
