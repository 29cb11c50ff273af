from pathlib import Path

import numpy as np
import pytest

from qmilp.circuit import layout_for
from qmilp.ilp import load_instance, random_instance

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


@pytest.fixture(scope="session")
def halfplane():
    return load_instance(INSTANCES / "halfplane.json")


@pytest.fixture(scope="session")
def wedge():
    return load_instance(INSTANCES / "wedge.json")


@pytest.fixture(scope="session")
def tiny():
    return load_instance(INSTANCES / "tiny.json")


@pytest.fixture
def halfplane_path():
    return str(INSTANCES / "halfplane.json")


@pytest.fixture
def tiny_path():
    return str(INSTANCES / "tiny.json")


SMALL_SHAPES = [(1, 1, 0), (1, 1, 1), (1, 2, 0), (1, 2, 1), (1, 2, 2), (2, 1, 1)]


def small_instances(count, seed=0, max_qubits=14, coeff_bound=2):
    """Random feasible instances whose layouts fit the matrix guard."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n, d, m = SMALL_SHAPES[rng.integers(len(SMALL_SHAPES))]
        inst = random_instance(rng, n, d, m, coeff_bound=coeff_bound, require_feasible=True)
        if layout_for(inst).num_qubits <= max_qubits:
            out.append(inst)
    return out
