"""Numerical checks of the walk's spectral structure.

W is materialized column by column through the sparse simulator: every
basis column is loaded at once, with the column index held in key bits
above the k circuit qubits, so one pass over the gate list yields the whole
matrix. The eigenphase check works on the W-invariant subspace A + B,
A = span{|x>|f(x)>|0>}, B = P^dag F P A, which is tiny compared to 2^k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .circuit import QuantumCircuit, RegisterLayout, compose, inverse, layout_for
from .ilp import (
    IlpInstance,
    classical_chain,
    eliminate_equalities,
    encode_twos_complement,
    evaluate_form,
    feasible_points,
    enumerate_domain,
    gibbs_distribution,
    point_to_index,
)
from .statevector import GuardError, SparseState
from .walk import AcceptanceMode, model_for, synth_walk_parts

MATRIX_GUARD = 14
PHASE_ATOL = 1e-8   # eigenvalues within this of 1 count as eigenvalue 1
OVERLAP_MIN = 1e-8  # eigenvectors below this overlap with A + B are ignored


def _guard(layout: RegisterLayout, max_qubits: int | None) -> None:
    if max_qubits is not None and layout.num_qubits > max_qubits:
        raise GuardError(
            f"matrix over {layout.num_qubits} qubits exceeds the guard of {max_qubits}"
        )


def circuit_matrix(circuit: QuantumCircuit, max_qubits: int | None = MATRIX_GUARD) -> sp.csr_matrix:
    """Unitary of ``circuit`` as a sparse 2^k x 2^k matrix (column j = circuit|j>)."""
    layout = circuit.layout
    _guard(layout, max_qubits)
    k = layout.num_qubits
    if 2 * k > 62:
        raise GuardError("column batching needs 2k <= 62")
    cols = np.arange(1 << k, dtype=np.int64)
    state = SparseState(layout, (cols << k) | cols, np.ones(1 << k, dtype=complex))
    state.apply(circuit)
    low = (np.int64(1) << k) - 1
    rows, colidx = state.keys & low, state.keys >> k
    return sp.csr_matrix((state.amps, (rows, colidx)), shape=(1 << k, 1 << k))


def build_walk_matrix(
    instance: IlpInstance,
    beta: float,
    mode=AcceptanceMode.EXACT,
    max_qubits: int | None = MATRIX_GUARD,
) -> sp.csr_matrix:
    instance = eliminate_equalities(instance)
    layout = layout_for(instance)
    _guard(layout, max_qubits)
    parts = synth_walk_parts(instance, model_for(instance, beta, mode, layout), layout)
    return circuit_matrix(parts.circuit, max_qubits)


def unitarity_residual(matrix) -> float:
    """max |(W^dag W - I)_ij| for a dense or sparse square matrix."""
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError("matrix must be square")
    if sp.issparse(matrix):
        gram = (matrix.conj().T @ matrix - sp.identity(matrix.shape[0], format="csr")).tocoo()
        return float(np.abs(gram.data).max()) if gram.nnz else 0.0
    m = np.asarray(matrix)
    return float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())


def _branch_key(layout: RegisterLayout, instance: IlpInstance, point) -> int:
    value = evaluate_form(instance.objective, point)
    w = layout.width("F")
    return point_to_index(point, layout.d) | encode_twos_complement(value, w) << layout.start("F")


def pi_state(instance: IlpInstance, beta: float, layout: RegisterLayout | None = None) -> SparseState:
    """sum_x sqrt(pi_beta(x)) |x>_S |f(x)>_F |0> over the feasible points."""
    instance = eliminate_equalities(instance)
    layout = layout or layout_for(instance)
    table = gibbs_distribution(instance, beta)
    keys = np.array([_branch_key(layout, instance, x) for x in table.entries], dtype=np.int64)
    amps = np.sqrt(np.array([p for p in table.entries.values()], dtype=float)).astype(complex)
    return SparseState(layout, keys, amps)


def eigenstate_residual(
    instance: IlpInstance,
    beta: float,
    mode=AcceptanceMode.EXACT,
    max_qubits: int | None = MATRIX_GUARD,
) -> float:
    """||W|Pi> - |Pi>||_2, evaluated by applying the circuit to |Pi>."""
    instance = eliminate_equalities(instance)
    layout = layout_for(instance)
    _guard(layout, max_qubits)
    walk = synth_walk_parts(instance, model_for(instance, beta, mode, layout), layout).circuit
    ref = pi_state(instance, beta, layout)
    out = ref.copy().apply(walk)
    return _distance(out, ref)


def _distance(a: SparseState, b: SparseState) -> float:
    keys = np.concatenate([a.keys, b.keys])
    amps = np.concatenate([a.amps, -b.amps])
    uniq, inv = np.unique(keys, return_inverse=True)
    diff = np.bincount(inv, weights=amps.real) + 1j * np.bincount(inv, weights=amps.imag)
    return float(np.linalg.norm(diff))


def detailed_balance_residual(
    instance: IlpInstance,
    beta: float,
    mode=AcceptanceMode.EXACT,
    form: str = "amplitude",
) -> float:
    """max over feasible pairs of |sqrt(pi(x)) a(x,x') - sqrt(pi(x')) a(x',x)|.

    ``form="amplitude"`` uses the coin amplitude a = sqrt(A), the identity the
    eigenstate argument needs. ``form="probability"`` uses a = A, which only
    balances at beta = 0 and is kept for comparison.
    """
    if form not in ("amplitude", "probability"):
        raise ValueError("form must be 'amplitude' or 'probability'")
    instance = eliminate_equalities(instance)
    layout = layout_for(instance)
    model = model_for(instance, beta, mode, layout)
    table = gibbs_distribution(instance, beta)
    pts = [x for x in table.entries]
    root = np.sqrt([p for p in table.entries.values()])
    vals = [evaluate_form(instance.objective, x) for x in pts]
    rate = model.amplitude if form == "amplitude" else model.probability
    worst = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            lhs = root[i] * rate(vals[j] - vals[i])
            rhs = root[j] * rate(vals[i] - vals[j])
            worst = max(worst, abs(lhs - rhs))
    return worst


@dataclass
class GapReport:
    phase_gap: float            # smallest |theta| among eigenvalues != 1 on A + B
    classical_gap: float        # delta of the classical chain
    bound: float                # arccos(1 - delta)
    satisfied: bool
    unit_multiplicity: float    # dimension of the eigenvalue-1 space inside A + B
    pi_overlap: float           # |<Pi|v>|^2 summed over that space
    subspace_dim: int
    invariance_residual: float  # ||(I - QQ^dag) W Q||, 0 when A + B is W-invariant
    route: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _basis_columns(instance: IlpInstance, layout: RegisterLayout, points) -> SparseState:
    # one column per point, index in the high key bits
    k = layout.num_qubits
    low = np.array([_branch_key(layout, instance, x) for x in points], dtype=np.int64)
    cols = np.arange(len(points), dtype=np.int64)
    return SparseState(layout, (cols << k) | low, np.ones(len(points), dtype=complex))


def _columns_to_dense(state: SparseState, k: int, ncols: int, rows: np.ndarray) -> np.ndarray:
    low = (np.int64(1) << k) - 1
    r = np.searchsorted(rows, state.keys & low)
    if np.any(rows[np.minimum(r, len(rows) - 1)] != (state.keys & low)):
        raise ValueError("column support leaves the given row set")
    out = np.zeros((len(rows), ncols), dtype=complex)
    np.add.at(out, (r, state.keys >> k), state.amps)
    return out


def walk_subspace(
    instance: IlpInstance,
    beta: float,
    mode=AcceptanceMode.EXACT,
    region: str = "feasible",
):
    """Orthonormal basis of A + B and the restriction of W to it.

    ``region="domain"`` builds A from every x in the search space, as the
    uniqueness argument does; ``region="feasible"`` uses feasible x only.
    Returns (rows, Q, H, residual): the basis-state indices spanned, the
    orthonormal basis Q over those rows, H = Q^dag W Q, and the invariance
    residual ||W Q - Q H||.
    """
    instance = eliminate_equalities(instance)
    layout = layout_for(instance)
    k = layout.num_qubits
    parts = synth_walk_parts(instance, model_for(instance, beta, mode, layout), layout)
    p = compose(parts.parts["V"], parts.parts["B"])
    pfp = compose(p, parts.parts["F"], inverse(p))
    if region == "domain":
        points = enumerate_domain(instance)
    elif region == "feasible":
        points = feasible_points(instance)
    else:
        raise ValueError("region must be 'domain' or 'feasible'")
    a = _basis_columns(instance, layout, points)
    b = a.copy().apply(pfp)
    low = (np.int64(1) << k) - 1
    rows = np.unique(np.concatenate([a.keys & low, b.keys & low]))
    # W maps A + B into itself; the images may still touch new rows, so take
    # the union once more before measuring the leak.
    span = np.hstack([
        _columns_to_dense(a, k, len(points), rows),
        _columns_to_dense(b, k, len(points), rows),
    ])
    q = scipy.linalg.orth(span, rcond=1e-10)
    qstate = _dense_columns_to_state(layout, rows, q)
    wq = qstate.apply(parts.circuit)
    rows_all = np.unique(np.concatenate([rows, wq.keys & low]))
    wq_dense = _columns_to_dense(wq, k, q.shape[1], rows_all)
    q_all = np.zeros((len(rows_all), q.shape[1]), dtype=complex)
    q_all[np.searchsorted(rows_all, rows)] = q
    hmat = q_all.conj().T @ wq_dense
    residual = float(np.linalg.norm(wq_dense - q_all @ hmat, 2)) if q.size else 0.0
    return rows, q, hmat, residual


def _dense_columns_to_state(layout: RegisterLayout, rows: np.ndarray, q: np.ndarray) -> SparseState:
    k = layout.num_qubits
    r, c = np.nonzero(np.abs(q) > 0)
    keys = (c.astype(np.int64) << k) | rows[r]
    return SparseState(layout, keys, q[r, c].astype(complex))


def _phase_summary(evals: np.ndarray, weights: np.ndarray, pi_weights: np.ndarray):
    phases = np.angle(evals)
    unit = np.abs(evals - 1.0) <= PHASE_ATOL
    mult = float(weights[unit].sum())
    pi_ov = float(pi_weights[unit].sum())
    keep = (~unit) & (weights >= OVERLAP_MIN)
    gap = float(np.abs(phases[keep]).min()) if np.any(keep) else math.pi
    return gap, mult, pi_ov


def eigenphase_gap_check(
    instance: IlpInstance,
    beta: float,
    mode=AcceptanceMode.EXACT,
    route: str = "subspace",
    region: str = "feasible",
    max_qubits: int | None = MATRIX_GUARD,
) -> GapReport:
    """Compare the smallest nonzero eigenphase of W on A + B with arccos(1 - delta).

    ``route="subspace"`` diagonalizes Q^dag W Q directly. ``route="dense"``
    takes the Schur form of the full matrix and keeps eigenvectors whose
    overlap with A + B is at least 1e-8; overlaps are summed per eigenvalue
    so degenerate eigenspaces are counted by dimension.
    """
    instance = eliminate_equalities(instance)
    layout = layout_for(instance)
    _guard(layout, max_qubits)
    rows, q, hmat, residual = walk_subspace(instance, beta, mode, region)
    ref = pi_state(instance, beta, layout)
    pi_vec = np.zeros(len(rows), dtype=complex)
    idx = np.searchsorted(rows, ref.keys)
    pi_vec[idx] = ref.amps
    if route == "subspace":
        tform, z = scipy.linalg.schur(hmat, output="complex")
        evals = np.diag(tform)
        weights = np.ones(len(evals))
        pi_weights = np.abs((q @ z).conj().T @ pi_vec) ** 2
    elif route == "dense":
        full = build_walk_matrix(instance, beta, mode, max_qubits).toarray()
        tform, z = scipy.linalg.schur(full, output="complex")
        evals = np.diag(tform)
        zr = z[rows]
        weights = np.linalg.norm(q.conj().T @ zr, axis=0) ** 2
        pi_weights = np.abs(zr.conj().T @ pi_vec) ** 2
    else:
        raise ValueError("route must be 'subspace' or 'dense'")
    gap, mult, pi_ov = _phase_summary(evals, weights, pi_weights)
    delta = classical_chain(instance, beta).gap
    bound = math.acos(min(1.0, max(-1.0, 1.0 - delta)))
    return GapReport(
        phase_gap=gap,
        classical_gap=delta,
        bound=bound,
        satisfied=bool(gap >= bound - 1e-6),
        unit_multiplicity=mult,
        pi_overlap=pi_ov,
        subspace_dim=q.shape[1],
        invariance_residual=residual,
        route=route,
    )
