"""Resource sweeps over random instances and least-squares summaries."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .circuit import layout_for, toffoli_equivalents
from .ilp import random_instance
from .walk import AcceptanceMode, model_for, synth_W

ROW_FIELDS = ("n", "d", "m", "coeff_bound", "k", "toffoli")


@dataclass(frozen=True)
class SweepRow:
    n: int
    d: int
    m: int
    coeff_bound: int
    k: int
    toffoli: float


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r2: float
    count: int


def linear_fit(x: Sequence[float], y: Sequence[float]) -> Fit:
    """Ordinary least squares y ~ slope*x + intercept with the coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least two points for a fit")
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ np.array([slope, intercept])
    total = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / total if total > 0 else 1.0
    return Fit(float(slope), float(intercept), r2, len(x))


def parse_range(text: str) -> list[int]:
    """'1..4' -> [1, 2, 3, 4]; '3' -> [3]; '2,5' -> [2, 5]."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = (int(p) for p in part.split("..", 1))
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError(f"no values in {text!r}")
    return out


def _one(args) -> SweepRow:
    n, m, bits, bound, beta, mode, entropy = args
    rng = np.random.default_rng(entropy)
    d = int(rng.choice(bits))
    inst = random_instance(rng, n, d, m, coeff_bound=bound)
    layout = layout_for(inst)
    walk = synth_W(inst, model_for(inst, beta, mode, layout), layout)
    return SweepRow(n, d, m, bound, layout.num_qubits, toffoli_equivalents(walk).toffoli_equivalents)


def sweep(
    variables: Iterable[int],
    bits: Sequence[int],
    constraints: Iterable[int],
    instances: int,
    coeff_bound: int = 4,
    seed: int = 0,
    beta: float = 1.0,
    mode=AcceptanceMode.LINEAR,
    workers: int = 1,
) -> list[SweepRow]:
    """One synthesized W per random instance; d is drawn uniformly from ``bits``.

    Every instance gets its own child seed, so rows do not depend on the
    number of workers.
    """
    if instances < 1 or coeff_bound < 1:
        raise ValueError("need instances >= 1 and coeff_bound >= 1")
    mode = AcceptanceMode(mode)
    configs = list(product(variables, constraints))
    children = np.random.SeedSequence(seed).spawn(len(configs) * instances)
    jobs = [
        (n, m, tuple(bits), coeff_bound, beta, mode, children[i * instances + j])
        for i, (n, m) in enumerate(configs)
        for j in range(instances)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_one, jobs, chunksize=8))
    return [_one(job) for job in jobs]


def summarize(rows: Sequence[SweepRow]) -> dict:
    """Toffoli-vs-k fits per (n, m) group and one qubits-vs-nd fit over all rows."""
    groups: dict[tuple[int, int], list[SweepRow]] = {}
    for r in rows:
        groups.setdefault((r.n, r.m), []).append(r)
    fits = {}
    for key, grp in sorted(groups.items()):
        if len({r.k for r in grp}) < 2:
            continue
        fits[key] = linear_fit([r.k for r in grp], [r.toffoli for r in grp])
    qubits = None
    if len({r.n * r.d for r in rows}) >= 2:
        qubits = linear_fit([r.n * r.d for r in rows], [r.k for r in rows])
    return {"toffoli_vs_k": fits, "qubits_vs_nd": qubits}


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=ROW_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow(asdict(r))
    return buf.getvalue()


def summary_to_csv(summary: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["fit", "n", "m", "slope", "intercept", "r2", "count"])
    for (n, m), f in summary["toffoli_vs_k"].items():
        writer.writerow(["toffoli_vs_k", n, m, f.slope, f.intercept, f.r2, f.count])
    q = summary["qubits_vs_nd"]
    if q is not None:
        writer.writerow(["qubits_vs_nd", "", "", q.slope, q.intercept, q.r2, q.count])
    return buf.getvalue()
