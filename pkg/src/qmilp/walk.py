"""Synthesis of the Metropolis walk step W = R V^dag B^dag F B V.

V proposes a uniform candidate in S' and evaluates f(x') and the number of
satisfied constraints; B writes the acceptance amplitude onto the coin; the
shift swaps (S, F) with (S', F') when the coin is |1> and the counter reads
m'; the reflection is 2|0><0| - I on (S', C).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .arith import _emit_cdkm, linear_form_on
from .circuit import (
    QuantumCircuit,
    RegisterLayout,
    compose,
    cry,
    cswap,
    h,
    inverse,
    layout_for,
    mcz,
    x,
)
from .arith import _emit_increment
from .ilp import IlpInstance, LinearForm, Sense


class AcceptanceMode(str, Enum):
    EXACT = "exact"
    LINEAR = "linear"


def target_angle(beta: float, v: int) -> float:
    """Coin angle whose |1> probability is min(1, exp(-beta v))."""
    return 2.0 * math.asin(min(1.0, math.exp(-beta * v / 2.0)))


@dataclass(frozen=True)
class AcceptanceModel:
    mode: AcceptanceMode
    beta: float
    data_width: int
    linear_slope: float = 0.0
    per_value_angles: dict[int, float] = field(default_factory=dict)

    @property
    def v_max(self) -> int:
        return (1 << self.data_width) - 1

    @property
    def bit_angles(self) -> list[float]:
        """Linear mode: rotation applied for data bit j of a nonnegative difference."""
        return [-self.linear_slope * (1 << j) for j in range(self.data_width)]

    def angle(self, delta: int) -> float:
        """Total coin rotation the circuit applies for objective difference ``delta``."""
        if delta <= 0:
            return math.pi
        if self.mode is AcceptanceMode.EXACT:
            return self.per_value_angles[delta]
        return math.pi + sum(t for j, t in enumerate(self.bit_angles) if delta >> j & 1)

    def amplitude(self, delta: int) -> float:
        """Coin |1> amplitude, i.e. the square root of the acceptance probability."""
        return math.sin(self.angle(delta) / 2.0)

    def probability(self, delta: int) -> float:
        return self.amplitude(delta) ** 2


def fit_acceptance(beta: float, data_width: int, mode: AcceptanceMode | str = AcceptanceMode.EXACT) -> AcceptanceModel:
    """Build the coin-rotation model for inverse temperature ``beta``.

    Linear mode fits one slope c to pi - c*v against the exact angles by least
    squares over v = 0..v_max, then caps it at pi/v_max so every angle stays
    in [0, pi]; the per-bit angles -c*2^j make the acceptance monotone.
    """
    mode = AcceptanceMode(mode)
    if data_width < 0 or beta < 0:
        raise ValueError("need data_width >= 0 and beta >= 0")
    v_max = (1 << data_width) - 1
    if mode is AcceptanceMode.EXACT:
        angles = {v: target_angle(beta, v) for v in range(1, v_max + 1)}
        return AcceptanceModel(mode, float(beta), data_width, per_value_angles=angles)
    if v_max == 0:
        return AcceptanceModel(mode, float(beta), data_width)
    v = np.arange(v_max + 1, dtype=float)
    target = np.array([target_angle(beta, int(k)) for k in v])
    best = float(np.dot(v, math.pi - target) / np.dot(v, v))
    slope = min(math.pi / v_max, max(0.0, best))
    return AcceptanceModel(mode, float(beta), data_width, linear_slope=slope)


def _counter_increment(layout: RegisterLayout, controls) -> QuantumCircuit:
    circ = QuantumCircuit(layout)
    _emit_increment(circ, layout.qubits("R"), controls)
    return circ


def synth_equality_check(layout: RegisterLayout, form: LinearForm) -> QuantumCircuit:
    """H_j: add 1 to R when form(S') == 0, leaving F' at |0>."""
    u = linear_form_on(layout, form, "Sp", "Fp")
    zero_test = _counter_increment(layout, [(q, False) for q in layout.qubits("Fp")])
    return compose(u, zero_test, inverse(u))


def synth_inequality_check(layout: RegisterLayout, form: LinearForm) -> QuantumCircuit:
    """G_i: add 1 to R when form(S') >= 0 (sign bit of F' clear)."""
    u = linear_form_on(layout, form, "Sp", "Fp")
    sign = layout.qubits("Fp")[-1]
    sign_test = _counter_increment(layout, [(sign, False)])
    return compose(u, sign_test, inverse(u))


def synth_V(instance: IlpInstance, layout: RegisterLayout | None = None) -> QuantumCircuit:
    """Hadamards on S', the constraint checks (equalities first), then U_f into F'."""
    layout = layout or layout_for(instance)
    circ = QuantumCircuit(layout, [h(q) for q in layout.qubits("Sp")])
    for con in instance.constraints:
        if con.sense is Sense.EQ:
            circ.extend(synth_equality_check(layout, con.form))
    for con in instance.constraints:
        if con.sense is Sense.GE:
            circ.extend(synth_inequality_check(layout, con.form))
    circ.extend(linear_form_on(layout, instance.objective, "Sp", "Fp"))
    return circ


def _difference(layout: RegisterLayout) -> QuantumCircuit:
    """F' <- F' - F via NOT(F) and a carry-in of 1."""
    f, fp, carry = layout.qubits("F"), layout.qubits("Fp"), layout.start("carry")
    circ = QuantumCircuit(layout)
    pre = QuantumCircuit(layout, [x(q) for q in f] + [x(carry)])
    circ.extend(pre)
    _emit_cdkm(circ, f, fp, carry)
    circ.extend(inverse(pre))
    return circ


def _coin_rotations(layout: RegisterLayout, model: AcceptanceModel) -> QuantumCircuit:
    fp = layout.qubits("Fp")
    coin = layout.start("C")
    data, sign = fp[:-1], fp[-1]
    if len(data) != model.data_width:
        raise ValueError(f"model built for {model.data_width} data bits, F' has {len(data)}")
    circ = QuantumCircuit(layout, [cry(coin, math.pi)])
    if model.mode is AcceptanceMode.LINEAR:
        for q, theta in zip(data, model.bit_angles):
            if theta != 0.0:
                circ.append(cry(coin, theta, [(q, True), (sign, False)]))
    else:
        for v in range(1, model.v_max + 1):
            theta = model.per_value_angles[v] - math.pi
            if theta != 0.0:
                pattern = [(q, bool(v >> j & 1)) for j, q in enumerate(data)]
                circ.append(cry(coin, theta, pattern + [(sign, False)]))
    return circ


def synth_B(instance: IlpInstance, model: AcceptanceModel, layout: RegisterLayout | None = None) -> QuantumCircuit:
    """Coin |0> -> sqrt(1-A)|0> + sqrt(A)|1>, with F' restored to f(x')."""
    layout = layout or layout_for(instance)
    diff = _difference(layout)
    return compose(diff, _coin_rotations(layout, model), inverse(diff))


def synth_shift(instance: IlpInstance, layout: RegisterLayout | None = None) -> QuantumCircuit:
    """Swap (S, F) with (S', F') when C = 1 and R = m'."""
    layout = layout or layout_for(instance)
    m = instance.num_constraints
    controls = [(layout.start("C"), True)]
    controls += [(q, bool(m >> j & 1)) for j, q in enumerate(layout.qubits("R"))]
    circ = QuantumCircuit(layout)
    pairs = list(zip(layout.qubits("S"), layout.qubits("Sp")))
    pairs += list(zip(layout.qubits("F"), layout.qubits("Fp")))
    for a, b in pairs:
        circ.append(cswap(a, b, controls))
    return circ


def synth_reflection(layout: RegisterLayout) -> QuantumCircuit:
    """2|0><0| - I on (S', C): global -1, then -1 again on the all-zero pattern."""
    zero = [(q, False) for q in layout.qubits("Sp") + layout.qubits("C")]
    return QuantumCircuit(layout, [mcz(), mcz(zero)])


@dataclass
class WalkOperator:
    circuit: QuantumCircuit
    parts: dict[str, QuantumCircuit]


def synth_walk_parts(
    instance: IlpInstance, model: AcceptanceModel, layout: RegisterLayout | None = None
) -> WalkOperator:
    layout = layout or layout_for(instance)
    v = synth_V(instance, layout)
    b = synth_B(instance, model, layout)
    shift = synth_shift(instance, layout)
    refl = synth_reflection(layout)
    circ = compose(v, b, shift, inverse(b), inverse(v), refl, labels=["V", "B", "F", "B", "V", "R"])
    return WalkOperator(circ, {"V": v, "B": b, "F": shift, "R": refl})


def synth_W(instance: IlpInstance, model: AcceptanceModel, layout: RegisterLayout | None = None) -> QuantumCircuit:
    return synth_walk_parts(instance, model, layout).circuit


def model_for(instance: IlpInstance, beta: float, mode, layout: RegisterLayout | None = None) -> AcceptanceModel:
    layout = layout or layout_for(instance)
    return fit_acceptance(beta, layout.width("Fp") - 1, mode)
