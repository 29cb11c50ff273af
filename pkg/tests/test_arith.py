import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import basis_map, read, signed, write
from qmilp.arith import (
    linear_form_on,
    synth_accumulate_term,
    synth_cdkm_add,
    synth_increment,
    synth_linear_form,
    synth_negate,
    synth_sign_extend,
)
from qmilp.circuit import RegisterLayout, compose, inverse, layout_for
from qmilp.ilp import IlpInstance, LinearForm, enumerate_domain, evaluate_form, point_to_index, random_instance


def regs(*widths):
    names = [f"r{i}" for i in range(len(widths))]
    layout = RegisterLayout.from_widths(list(zip(names, widths)))
    return layout, [layout.qubits(n) for n in names]


def all_inputs(layout):
    return np.arange(1 << layout.num_qubits, dtype=np.int64)


# negation and increment

@pytest.mark.parametrize("value, expected", [(3, 0b101), (0, 0), (0b100, 0b100)])
def test_negate_examples(value, expected):
    layout, (r,) = regs(3)
    assert basis_map(synth_negate(layout, r), [value])[0] == expected


@pytest.mark.parametrize("w", range(1, 7))
def test_negate_exhaustive(w):
    layout, (r,) = regs(w)
    out = basis_map(synth_negate(layout, r), all_inputs(layout))
    assert list(out) == [(-v) % (1 << w) for v in range(1 << w)]


@pytest.mark.parametrize("value, expected", [(0b01, 0b10), (0b11, 0b00)])
def test_increment_examples(value, expected):
    layout, (r,) = regs(2)
    assert basis_map(synth_increment(layout, r), [value])[0] == expected


def test_increment_unsatisfied_control_is_identity():
    layout, (r, c) = regs(2, 1)
    circ = synth_increment(layout, r, [(c[0], True)])
    inputs = [v for v in range(8) if not v >> 2 & 1]
    assert list(basis_map(circ, inputs)) == inputs


@pytest.mark.parametrize("w", range(1, 7))
def test_increment_controlled_exhaustive(w):
    layout, (r, c) = regs(w, 2)
    circ = synth_increment(layout, r, [(c[0], True), (c[1], False)])
    out = basis_map(circ, all_inputs(layout))
    for i, o in enumerate(out):
        fire = read(i, c) == 0b01
        assert read(o, r) == (read(i, r) + fire) % (1 << w)
        assert read(o, c) == read(i, c)


# CDKM adder

@pytest.mark.parametrize("a, b, cin, expected", [(2, 3, 0, 5), (3, 6, 0, 1), (0b100, 5, 1, 2)])
def test_cdkm_examples(a, b, cin, expected):
    # the last case is 5 - 3 computed as 5 + NOT(3) + 1
    layout, (ra, rb, rc) = regs(3, 3, 1)
    inp = write(write(write(0, ra, a), rb, b), rc, cin)
    out = basis_map(synth_cdkm_add(layout, ra, rb, rc[0]), [inp])[0]
    assert read(out, rb) == expected and read(out, ra) == a and read(out, rc) == cin


@pytest.mark.parametrize("m", range(1, 5))
def test_cdkm_exhaustive(m):
    layout, (ra, rb, rc) = regs(m, m, 1)
    out = basis_map(synth_cdkm_add(layout, ra, rb, rc[0]), all_inputs(layout))
    for i, o in enumerate(out):
        a, b, c = read(i, ra), read(i, rb), read(i, rc)
        assert read(o, rb) == (a + b + c) % (1 << m)
        assert read(o, ra) == a and read(o, rc) == c


def test_cdkm_width_mismatch():
    layout, (ra, rb, rc) = regs(2, 3, 1)
    with pytest.raises(ValueError):
        synth_cdkm_add(layout, ra, rb, rc[0])


# sign extension

@pytest.mark.parametrize("value, scratch", [(0b11, 0b111), (0b01, 0b000)])
def test_sign_extend_examples(value, scratch):
    layout, (src, dst) = regs(2, 3)
    out = basis_map(synth_sign_extend(layout, src, dst), [value])[0]
    assert read(out, dst) == scratch


def test_sign_extend_involution():
    layout, (src, dst) = regs(2, 3)
    c = synth_sign_extend(layout, src, dst)
    inputs = [write(0, src, v) for v in range(4)]
    assert list(basis_map(compose(c, c), inputs)) == inputs


# accumulate and linear forms

def _accumulate_layout(d, w):
    layout, (var, acc, carry, ext) = regs(d, w, 1, max(0, w - d))
    return layout, var, acc, carry[0], ext


@pytest.mark.parametrize("coeff, x, v, w, expected", [(-2, 1, 0, 5, -2), (3, -2, 1, 5, -5)])
def test_accumulate_examples(coeff, x, v, w, expected):
    layout, var, acc, carry, ext = _accumulate_layout(2, w)
    inp = write(write(0, var, x % 4), acc, v % (1 << w))
    out = basis_map(synth_accumulate_term(layout, coeff, var, acc, carry, ext), [inp])[0]
    assert signed(read(out, acc), w) == expected
    assert read(out, acc) == expected % (1 << w)


def test_accumulate_zero_coefficient_is_empty():
    layout, var, acc, carry, ext = _accumulate_layout(2, 4)
    assert len(synth_accumulate_term(layout, 0, var, acc, carry, ext)) == 0


def test_accumulate_narrow_accumulator_rejected():
    layout, var, acc, carry, ext = _accumulate_layout(3, 2)
    with pytest.raises(ValueError):
        synth_accumulate_term(layout, 1, var, acc, carry, ext)


@pytest.mark.parametrize("coeff", [-3, -1, 1, 2])
@pytest.mark.parametrize("d, w", [(1, 3), (2, 4), (2, 5), (3, 4)])
def test_accumulate_exhaustive(coeff, d, w):
    layout, var, acc, carry, ext = _accumulate_layout(d, w)
    circ = synth_accumulate_term(layout, coeff, var, acc, carry, ext)
    inputs = [write(write(0, var, x), acc, v) for x in range(1 << d) for v in range(1 << w)]
    out = basis_map(circ, inputs)
    for i, o in zip(inputs, out):
        x = signed(read(i, var), d)
        assert read(o, acc) == (read(i, acc) + coeff * x) % (1 << w)
        assert read(o, var) == read(i, var)
        assert read(o, [carry]) == 0 and read(o, ext) == 0
    # uncompute
    assert list(basis_map(compose(circ, inverse(circ)), inputs)) == inputs


def test_halfplane_objective_at_optimum(halfplane):
    layout = layout_for(halfplane)
    circ = linear_form_on(layout, halfplane.objective, "Sp", "Fp")
    inp = point_to_index((1, 1), 2) << layout.start("Sp")
    out = basis_map(circ, [inp])[0]
    assert signed(read(out, layout.qubits("Fp")), 5) == -3


def test_zero_form_leaves_accumulator():
    inst = IlpInstance(2, 2, LinearForm(0, (0, 0)))
    layout = layout_for(inst)
    assert len(linear_form_on(layout, inst.objective, "S", "F")) == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_linear_form_matches_evaluator(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, 2, int(rng.integers(1, 3)), 1, coeff_bound=3)
    layout = layout_for(inst)
    for form in (inst.objective, inst.constraints[0].form):
        circ = linear_form_on(layout, form, "S", "F")
        pts = enumerate_domain(inst)
        inputs = [point_to_index(x, inst.d) for x in pts]
        out = basis_map(circ, inputs)
        w = layout.width("F")
        for x, i, o in zip(pts, inputs, out):
            assert signed(read(o, layout.qubits("F")), w) == evaluate_form(form, x)
            assert o & ~sum(1 << q for q in layout.qubits("F")) == i  # everything else restored
        assert list(basis_map(compose(circ, inverse(circ)), inputs)) == inputs


def test_linear_form_constant_only():
    layout, (var, acc, carry, ext) = regs(2, 4, 1, 2)
    circ = synth_linear_form(layout, LinearForm(-3, (0,)), [var], acc, carry[0], ext)
    assert signed(read(basis_map(circ, [0])[0], acc), 4) == -3
