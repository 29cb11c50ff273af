"""Gate-level circuits over named registers and the Toffoli-equivalent cost model."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .ilp import IlpInstance, required_value_width


class GateKind(str, Enum):
    X = "X"
    H = "H"
    CX = "CX"
    MCX = "MCX"
    CRY = "CRY"
    CSWAP = "CSWAP"
    MCZ = "MCZ"
    T = "T"
    TDG = "TDG"


SELF_INVERSE = {GateKind.X, GateKind.H, GateKind.CX, GateKind.MCX, GateKind.CSWAP, GateKind.MCZ}

_TARGET_COUNT = {
    GateKind.X: 1, GateKind.H: 1, GateKind.CX: 1, GateKind.MCX: 1, GateKind.CRY: 1,
    GateKind.CSWAP: 2, GateKind.MCZ: 0, GateKind.T: 1, GateKind.TDG: 1,
}


class CircuitError(ValueError):
    pass


Control = tuple[int, bool]


@dataclass(frozen=True, slots=True)
class Gate:
    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[Control, ...] = ()
    angle: float | None = None

    def __post_init__(self):
        if len(self.targets) != _TARGET_COUNT[self.kind]:
            raise CircuitError(f"{self.kind.value} takes {_TARGET_COUNT[self.kind]} target(s)")
        ctrl_qubits = [q for q, _ in self.controls]
        if len(set(ctrl_qubits)) != len(ctrl_qubits) or len(set(self.targets)) != len(self.targets):
            raise CircuitError("repeated qubit in gate")
        if set(ctrl_qubits) & set(self.targets):
            raise CircuitError(f"{self.kind.value}: target inside its own control set")
        if self.kind in (GateKind.X, GateKind.H, GateKind.T, GateKind.TDG) and self.controls:
            raise CircuitError(f"{self.kind.value} takes no controls")
        if self.kind is GateKind.CX and len(self.controls) != 1:
            raise CircuitError("CX takes exactly one control")
        if self.kind is GateKind.CRY:
            if self.angle is None or not math.isfinite(self.angle):
                raise CircuitError("CRY needs a finite angle")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    @property
    def num_controls(self) -> int:
        return len(self.controls)

    def inverse(self) -> "Gate":
        if self.kind in SELF_INVERSE:
            return self
        if self.kind is GateKind.CRY:
            return Gate(GateKind.CRY, self.targets, self.controls, -self.angle)
        if self.kind is GateKind.T:
            return Gate(GateKind.TDG, self.targets)
        return Gate(GateKind.T, self.targets)

    def dump(self) -> str:
        ctrl = " ".join(f"{q}{'+' if pol else '-'}" for q, pol in self.controls)
        line = f"{self.kind.value} {' '.join(map(str, self.targets))} [{ctrl}]".replace("  ", " ")
        if self.angle is not None:
            line += f" {self.angle!r}"
        return line


def _controls(controls: Iterable) -> tuple[Control, ...]:
    out = []
    for c in controls:
        if isinstance(c, tuple):
            out.append((int(c[0]), bool(c[1])))
        else:
            out.append((int(c), True))
    return tuple(out)


def x(target: int) -> Gate:
    return Gate(GateKind.X, (target,))


def h(target: int) -> Gate:
    return Gate(GateKind.H, (target,))


def mcx(target: int, controls: Iterable = ()) -> Gate:
    """X with any number of (qubit, polarity) controls; kind follows the control count."""
    ctrl = _controls(controls)
    if not ctrl:
        return x(target)
    if len(ctrl) == 1:
        return Gate(GateKind.CX, (target,), ctrl)
    return Gate(GateKind.MCX, (target,), ctrl)


def cry(target: int, angle: float, controls: Iterable = ()) -> Gate:
    return Gate(GateKind.CRY, (target,), _controls(controls), float(angle))


def cswap(a: int, b: int, controls: Iterable = ()) -> Gate:
    return Gate(GateKind.CSWAP, (a, b), _controls(controls))


def mcz(controls: Iterable = ()) -> Gate:
    """Phase -1 on every basis state satisfying all controls (global -1 if none)."""
    return Gate(GateKind.MCZ, (), _controls(controls))


@dataclass(frozen=True)
class RegisterLayout:
    """Named, disjoint, contiguous qubit ranges covering 0..k-1.

    ``n`` and ``d`` describe how the S / S' registers split into variables.
    """

    registers: tuple[tuple[str, int, int], ...]  # (name, start, width)
    n: int = 0
    d: int = 0

    def __post_init__(self):
        spans = sorted((start, width, name) for name, start, width in self.registers)
        names = [name for name, _, _ in self.registers]
        if len(set(names)) != len(names):
            raise CircuitError("duplicate register name")
        pos = 0
        for start, width, name in spans:
            if width < 0:
                raise CircuitError(f"register {name} has negative width")
            if start != pos:
                kind = "overlapping" if start < pos else "non-contiguous"
                raise CircuitError(f"{kind} register ranges at {name} (start {start}, expected {pos})")
            pos += width

    @classmethod
    def from_widths(cls, widths: Sequence[tuple[str, int]], n: int = 0, d: int = 0) -> "RegisterLayout":
        regs, pos = [], 0
        for name, width in widths:
            regs.append((name, pos, width))
            pos += width
        return cls(tuple(regs), n, d)

    @property
    def num_qubits(self) -> int:
        return sum(width for _, _, width in self.registers)

    def __contains__(self, name: str) -> bool:
        return any(r[0] == name for r in self.registers)

    def width(self, name: str) -> int:
        return self._lookup(name)[2]

    def start(self, name: str) -> int:
        return self._lookup(name)[1]

    def qubits(self, name: str) -> list[int]:
        _, start, width = self._lookup(name)
        return list(range(start, start + width))

    def variable(self, name: str, i: int) -> list[int]:
        """Qubits of variable i inside the S or S' register (LSB first)."""
        start = self.start(name) + i * self.d
        return list(range(start, start + self.d))

    def widths(self) -> dict[str, int]:
        return {name: width for name, _, width in self.registers}

    def _lookup(self, name: str):
        for reg in self.registers:
            if reg[0] == name:
                return reg
        raise KeyError(f"no register named {name!r}")


def counter_width(num_constraints: int) -> int:
    """Qubits needed to hold the values 0..m' (0 qubits when m' = 0)."""
    return num_constraints.bit_length()


def layout_for(instance: IlpInstance, value_width: int | None = None) -> RegisterLayout:
    """S, S', F, F', R, C, one CDKM carry line and the sign-extension scratch."""
    w = required_value_width(instance) if value_width is None else value_width
    nd = instance.n * instance.d
    return RegisterLayout.from_widths(
        [
            ("S", nd), ("Sp", nd), ("F", w), ("Fp", w),
            ("R", counter_width(instance.num_constraints)), ("C", 1),
            ("carry", 1), ("ext", max(0, w - instance.d)),
        ],
        n=instance.n, d=instance.d,
    )


def qubit_count(layout: RegisterLayout) -> int:
    return layout.num_qubits


class QuantumCircuit:
    """Ordered gate list over a layout.

    ``append``/``extend`` build in place; ``compose`` and ``inverse`` return
    new circuits. ``sections`` tag gate spans with sub-operator names for the
    resource breakdown.
    """

    def __init__(self, layout: RegisterLayout, gates: Iterable[Gate] = (), sections=()):
        self.layout = layout
        self.gates: list[Gate] = []
        self.sections: list[tuple[str, int, int]] = list(sections)
        for g in gates:
            self.append(g)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, QuantumCircuit)
            and self.layout == other.layout
            and self.gates == other.gates
        )

    def append(self, gate: Gate) -> "QuantumCircuit":
        k = self.layout.num_qubits
        for q in gate.qubits:
            if not 0 <= q < k:
                raise CircuitError(f"qubit {q} outside layout of {k} qubits")
        self.gates.append(gate)
        return self

    def extend(self, other: "QuantumCircuit | Iterable[Gate]", label: str | None = None) -> "QuantumCircuit":
        start = len(self.gates)
        if isinstance(other, QuantumCircuit):
            if other.layout != self.layout:
                raise CircuitError("layout mismatch")
            self.gates.extend(other.gates)
            self.sections.extend((name, a + start, b + start) for name, a, b in other.sections)
        else:
            for g in other:
                self.append(g)
        if label is not None:
            self.sections.append((label, start, len(self.gates)))
        return self

    def copy(self) -> "QuantumCircuit":
        out = QuantumCircuit(self.layout)
        out.gates = list(self.gates)
        out.sections = list(self.sections)
        return out

    def dump(self) -> str:
        return "\n".join(g.dump() for g in self.gates)


def new_circuit(layout: RegisterLayout) -> QuantumCircuit:
    return QuantumCircuit(layout)


def append(circuit: QuantumCircuit, gate: Gate) -> QuantumCircuit:
    return circuit.append(gate)


def compose(*circuits: QuantumCircuit, labels: Sequence[str | None] | None = None) -> QuantumCircuit:
    """Concatenate circuits in order; optional labels tag each part."""
    if not circuits:
        raise CircuitError("nothing to compose")
    layout = circuits[0].layout
    out = QuantumCircuit(layout)
    labels = labels or [None] * len(circuits)
    for circ, label in zip(circuits, labels):
        if circ.layout != layout:
            raise CircuitError("layout mismatch")
        out.extend(circ, label)
    return out


def inverse(circuit: QuantumCircuit) -> QuantumCircuit:
    out = QuantumCircuit(circuit.layout)
    out.gates = [g.inverse() for g in reversed(circuit.gates)]
    last = len(circuit.gates)
    out.sections = [(name, last - b, last - a) for name, a, b in reversed(circuit.sections)]
    return out


def mcx_cost(num_controls: int) -> int:
    return 2 * num_controls - 3 if num_controls >= 2 else 0


def gate_cost(gate: Gate) -> float:
    """Toffoli-equivalents of one gate; control polarity never matters."""
    kind, nc = gate.kind, gate.num_controls
    if kind in (GateKind.MCX, GateKind.CX, GateKind.X, GateKind.MCZ):
        return float(mcx_cost(nc))
    if kind is GateKind.CRY:
        return float(2 * nc - 2) if nc >= 1 else 0.0
    if kind is GateKind.CSWAP:
        return float(mcx_cost(nc + 1))
    if kind in (GateKind.T, GateKind.TDG):
        return 1.0 / 7.0
    return 0.0


@dataclass
class ResourceReport:
    counts: dict[tuple[str, int], int]
    toffoli_equivalents: float
    breakdown: dict[str, float] = field(default_factory=dict)
    num_qubits: int = 0
    exact: Fraction = Fraction(0)  # same total without float rounding of the T/7 terms

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "toffoli_equivalents": self.toffoli_equivalents,
            "breakdown": dict(self.breakdown),
            "counts": {f"{k}/{nc}": v for (k, nc), v in sorted(self.counts.items())},
        }


def _exact_total(gates: Iterable[Gate]) -> Fraction:
    whole, t_gates = 0, 0
    for g in gates:
        if g.kind in (GateKind.T, GateKind.TDG):
            t_gates += 1
        else:
            whole += int(gate_cost(g))
    return whole + Fraction(t_gates, 7)


def toffoli_equivalents(circuit: QuantumCircuit) -> ResourceReport:
    counts = Counter((g.kind.value, g.num_controls) for g in circuit.gates)
    total = _exact_total(circuit.gates)
    parts: dict[str, Fraction] = {}
    covered = 0
    for name, a, b in circuit.sections:
        parts[name] = parts.get(name, Fraction(0)) + _exact_total(circuit.gates[a:b])
        covered += b - a
    if parts and covered != len(circuit.gates):
        parts["other"] = total - sum(parts.values())
    breakdown = {name: float(v) for name, v in parts.items()}
    return ResourceReport(dict(counts), float(total), breakdown, circuit.layout.num_qubits, total)
