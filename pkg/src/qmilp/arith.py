"""Reversible two's-complement arithmetic: negation, increment, CDKM addition,
sign extension and linear-form evaluation by repeated addition.

Registers are passed as lists of qubit indices, least-significant bit first;
the last entry is the sign bit.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .circuit import QuantumCircuit, RegisterLayout, inverse, mcx, x
from .ilp import LinearForm


def _emit_increment(circ: QuantumCircuit, reg: Sequence[int], controls: Iterable = ()) -> None:
    # descending cascade: bit j flips when all lower bits are 1
    extra = list(controls)
    for j in reversed(range(len(reg))):
        circ.append(mcx(reg[j], extra + [(q, True) for q in reg[:j]]))


def synth_increment(layout: RegisterLayout, reg: Sequence[int], controls: Iterable = ()) -> QuantumCircuit:
    """|v> -> |v + 1 mod 2^w> when every control is satisfied."""
    circ = QuantumCircuit(layout)
    _emit_increment(circ, reg, controls)
    return circ


def synth_negate(layout: RegisterLayout, reg: Sequence[int]) -> QuantumCircuit:
    """|x> -> |-x mod 2^w> as bitwise NOT followed by +1."""
    circ = QuantumCircuit(layout)
    for q in reg:
        circ.append(x(q))
    _emit_increment(circ, reg)
    return circ


def _maj(circ: QuantumCircuit, a: int, b: int, c: int) -> None:
    circ.append(mcx(b, [c]))
    circ.append(mcx(a, [c]))
    circ.append(mcx(c, [a, b]))


def _uma(circ: QuantumCircuit, a: int, b: int, c: int) -> None:
    circ.append(mcx(c, [a, b]))
    circ.append(mcx(a, [c]))
    circ.append(mcx(b, [a]))


def _emit_cdkm(circ: QuantumCircuit, a: Sequence[int], b: Sequence[int], carry: int) -> None:
    m = len(a)
    if len(b) != m:
        raise ValueError(f"CDKM operands differ in width ({m} vs {len(b)})")
    _maj(circ, carry, b[0], a[0])
    for i in range(1, m):
        _maj(circ, a[i - 1], b[i], a[i])
    for i in reversed(range(1, m)):
        _uma(circ, a[i - 1], b[i], a[i])
    _uma(circ, carry, b[0], a[0])


def synth_cdkm_add(layout: RegisterLayout, a: Sequence[int], b: Sequence[int], carry: int) -> QuantumCircuit:
    """|a>|b>|c> -> |a>|a + b + c mod 2^m>|c> (modular ripple-carry adder)."""
    circ = QuantumCircuit(layout)
    _emit_cdkm(circ, a, b, carry)
    return circ


def _emit_sign_extend(circ: QuantumCircuit, src: Sequence[int], scratch: Sequence[int]) -> None:
    for q in scratch:
        circ.append(mcx(q, [src[-1]]))


def synth_sign_extend(layout: RegisterLayout, src: Sequence[int], scratch: Sequence[int]) -> QuantumCircuit:
    """Copy the sign bit of src into every scratch qubit (self-inverse)."""
    circ = QuantumCircuit(layout)
    _emit_sign_extend(circ, src, scratch)
    return circ


def _emit_accumulate(
    circ: QuantumCircuit,
    coeff: int,
    var: Sequence[int],
    acc: Sequence[int],
    carry: int,
    scratch: Sequence[int],
) -> None:
    if coeff == 0:
        return
    w, d = len(acc), len(var)
    if w < d:
        raise ValueError(f"accumulator ({w} bits) narrower than variable ({d} bits)")
    ext = list(scratch[: w - d])
    if len(ext) != w - d:
        raise ValueError(f"need {w - d} sign-extension qubits, got {len(scratch)}")
    operand = list(var) + ext
    prologue = QuantumCircuit(circ.layout)
    if coeff < 0:
        # a - b = a + (NOT b) + 1 with the +1 entering through the carry line
        for q in var:
            prologue.append(x(q))
        prologue.append(x(carry))
    _emit_sign_extend(prologue, var, ext)
    circ.extend(prologue)
    for _ in range(abs(coeff)):
        _emit_cdkm(circ, operand, acc, carry)
    circ.extend(inverse(prologue))


def synth_accumulate_term(
    layout: RegisterLayout,
    coeff: int,
    var: Sequence[int],
    acc: Sequence[int],
    carry: int,
    scratch: Sequence[int] = (),
) -> QuantumCircuit:
    """|x>|v> -> |x>|v + coeff*x mod 2^w> by |coeff| CDKM additions."""
    circ = QuantumCircuit(layout)
    _emit_accumulate(circ, coeff, var, acc, carry, scratch)
    return circ


def _emit_constant(circ: QuantumCircuit, value: int, acc: Sequence[int]) -> None:
    bits = value & ((1 << len(acc)) - 1)
    for j, q in enumerate(acc):
        if bits >> j & 1:
            circ.append(x(q))


def synth_linear_form(
    layout: RegisterLayout,
    form: LinearForm,
    variables: Sequence[Sequence[int]],
    acc: Sequence[int],
    carry: int,
    scratch: Sequence[int] = (),
) -> QuantumCircuit:
    """|x>|0> -> |x>|form(x) mod 2^w>: load the constant, then one term per variable."""
    if len(variables) != len(form.coefficients):
        raise ValueError("one variable register per coefficient required")
    circ = QuantumCircuit(layout)
    _emit_constant(circ, form.constant, acc)
    for coeff, var in zip(form.coefficients, variables):
        _emit_accumulate(circ, coeff, var, acc, carry, scratch)
    return circ


def linear_form_on(layout: RegisterLayout, form: LinearForm, source: str, target: str) -> QuantumCircuit:
    """U_form reading variables from register ``source`` into register ``target``."""
    return synth_linear_form(
        layout,
        form,
        [layout.variable(source, i) for i in range(layout.n)],
        layout.qubits(target),
        layout.start("carry"),
        layout.qubits("ext"),
    )
