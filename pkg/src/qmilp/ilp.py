"""Integer linear programs in canonical form and their brute-force oracles.

Every quantity the circuit layer produces (objective values, constraint
counts, the Gibbs table the walk should approach, the classical chain it
quantizes) has an exact classical counterpart here.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Callable, Iterator, Sequence

import numpy as np

MAX_ENUMERATION_BITS = 24

Point = tuple[int, ...]


class InstanceFormatError(ValueError):
    """Raised when an instance file cannot be turned into an IlpInstance."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class InfeasibleInstanceError(ValueError):
    pass


class DomainTooLargeError(ValueError):
    pass


class Sense(str, Enum):
    GE = "ge"
    EQ = "eq"


def _check_int(value, name: str) -> int:
    # bool is an int subclass; reject it explicitly
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise InstanceFormatError(name, f"non-integer value {value!r}")
    return int(value)


@dataclass(frozen=True)
class LinearForm:
    constant: int
    coefficients: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "constant", _check_int(self.constant, "constant"))
        coeffs = tuple(
            _check_int(c, f"coefficients[{i}]") for i, c in enumerate(self.coefficients)
        )
        object.__setattr__(self, "coefficients", coeffs)

    def __call__(self, point: Sequence[int]) -> int:
        return evaluate_form(self, point)

    def __neg__(self) -> "LinearForm":
        return LinearForm(-self.constant, tuple(-c for c in self.coefficients))

    @property
    def is_zero(self) -> bool:
        return self.constant == 0 and not any(self.coefficients)


@dataclass(frozen=True)
class Constraint:
    form: LinearForm
    sense: Sense = Sense.GE

    def holds(self, point: Sequence[int]) -> bool:
        value = evaluate_form(self.form, point)
        return value >= 0 if self.sense is Sense.GE else value == 0


@dataclass(frozen=True)
class IlpInstance:
    """minimize objective(x) s.t. constraints, x_i in [-2^(d-1), 2^(d-1)-1]."""

    n: int
    d: int
    objective: LinearForm
    constraints: tuple[Constraint, ...] = ()
    equalities_split: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InstanceFormatError("variables", f"need at least one variable, got {self.n}")
        if self.d < 1:
            raise InstanceFormatError("bits", f"need at least one bit per variable, got {self.d}")
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if len(self.objective.coefficients) != self.n:
            raise InstanceFormatError(
                "objective.coefficients",
                f"coefficient count mismatch: expected {self.n}, got {len(self.objective.coefficients)}",
            )
        for i, con in enumerate(self.constraints):
            if len(con.form.coefficients) != self.n:
                raise InstanceFormatError(
                    f"constraints[{i}].coefficients",
                    f"coefficient count mismatch: expected {self.n}, got {len(con.form.coefficients)}",
                )

    @property
    def lower(self) -> int:
        return -(1 << (self.d - 1))

    @property
    def upper(self) -> int:
        return (1 << (self.d - 1)) - 1

    @property
    def domain_size(self) -> int:
        return 1 << (self.n * self.d)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def has_equalities(self) -> bool:
        return any(c.sense is Sense.EQ for c in self.constraints)

    def is_feasible(self, point: Sequence[int]) -> bool:
        return all(c.holds(point) for c in self.constraints)

    def to_dict(self) -> dict:
        return {
            "variables": self.n,
            "bits": self.d,
            "objective": {
                "constant": self.objective.constant,
                "coefficients": list(self.objective.coefficients),
            },
            "constraints": [
                {
                    "coefficients": list(c.form.coefficients),
                    "constant": c.form.constant,
                    "sense": c.sense.value,
                }
                for c in self.constraints
            ],
        }


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise InstanceFormatError(where + key, "missing field")
    return obj[key]


def _parse_form(obj, where: str, n: int) -> LinearForm:
    if not isinstance(obj, dict):
        raise InstanceFormatError(where.rstrip("."), "expected an object")
    coeffs = _require(obj, "coefficients", where)
    if not isinstance(coeffs, list):
        raise InstanceFormatError(where + "coefficients", "expected a list")
    constant = obj.get("constant", 0)
    values = [_check_int(c, f"{where}coefficients[{i}]") for i, c in enumerate(coeffs)]
    if len(values) != n:
        raise InstanceFormatError(
            where + "coefficients",
            f"coefficient count mismatch: expected {n}, got {len(values)}",
        )
    return LinearForm(_check_int(constant, where + "constant"), tuple(values))


def parse_instance(text: str) -> IlpInstance:
    """Parse the JSON instance format.

    ``{"variables": n, "bits": d, "objective": {"constant": c0, "coefficients": [...]},
    "constraints": [{"coefficients": [...], "constant": c0, "sense": "ge" | "eq"}]}``
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError("<document>", f"malformed syntax: {exc}") from None
    if not isinstance(data, dict):
        raise InstanceFormatError("<document>", "malformed syntax: top level must be an object")

    n = _check_int(_require(data, "variables", ""), "variables")
    d = _check_int(_require(data, "bits", ""), "bits")
    if n < 1:
        raise InstanceFormatError("variables", f"need at least one variable, got {n}")
    if d < 1:
        raise InstanceFormatError("bits", f"d < 1 (got {d})")
    objective = _parse_form(_require(data, "objective", ""), "objective.", n)

    raw = data.get("constraints", [])
    if not isinstance(raw, list):
        raise InstanceFormatError("constraints", "expected a list")
    constraints = []
    for i, item in enumerate(raw):
        where = f"constraints[{i}]."
        form = _parse_form(item, where, n)
        sense = item.get("sense", "ge")
        try:
            constraints.append(Constraint(form, Sense(sense)))
        except ValueError:
            raise InstanceFormatError(where + "sense", f"unknown sense {sense!r}") from None
    return IlpInstance(n, d, objective, tuple(constraints))


def load_instance(path) -> IlpInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def eliminate_equalities(instance: IlpInstance) -> IlpInstance:
    """Replace each h = 0 by the pair h >= 0, -h >= 0."""
    if not instance.has_equalities:
        return instance
    out = []
    split = 0
    for con in instance.constraints:
        if con.sense is Sense.EQ:
            out.append(Constraint(con.form, Sense.GE))
            out.append(Constraint(-con.form, Sense.GE))
            split += 1
        else:
            out.append(con)
    return IlpInstance(
        instance.n, instance.d, instance.objective, tuple(out),
        equalities_split=instance.equalities_split + split,
    )


def evaluate_form(form: LinearForm, point: Sequence[int]) -> int:
    if len(point) != len(form.coefficients):
        raise ValueError(
            f"point has {len(point)} entries, form has {len(form.coefficients)} coefficients"
        )
    return form.constant + sum(c * int(x) for c, x in zip(form.coefficients, point))


def satisfied_count(instance: IlpInstance, point: Sequence[int]) -> int:
    return sum(1 for c in instance.constraints if c.holds(point))


def decode_twos_complement(bits: int, width: int) -> int:
    bits &= (1 << width) - 1
    return bits - (1 << width) if bits >> (width - 1) else bits


def encode_twos_complement(value: int, width: int) -> int:
    return value & ((1 << width) - 1)


def index_to_point(index: int, n: int, d: int) -> Point:
    mask = (1 << d) - 1
    return tuple(decode_twos_complement((index >> (i * d)) & mask, d) for i in range(n))


def point_to_index(point: Sequence[int], d: int) -> int:
    index = 0
    for i, x in enumerate(point):
        index |= encode_twos_complement(int(x), d) << (i * d)
    return index


def enumerate_domain(instance: IlpInstance) -> list[Point]:
    """All points of the search space, in S-register basis order."""
    bits = instance.n * instance.d
    if bits > MAX_ENUMERATION_BITS:
        raise DomainTooLargeError(
            f"domain has 2^{bits} points; enumeration is limited to n*d <= {MAX_ENUMERATION_BITS}"
        )
    return [index_to_point(i, instance.n, instance.d) for i in range(1 << bits)]


def feasible_points(instance: IlpInstance) -> list[Point]:
    return [x for x in enumerate_domain(instance) if instance.is_feasible(x)]


def _feasible_or_raise(instance: IlpInstance) -> list[Point]:
    pts = feasible_points(instance)
    if not pts:
        raise InfeasibleInstanceError("infeasible instance: the feasible region is empty")
    return pts


@dataclass(frozen=True)
class GibbsTable:
    beta: float
    entries: dict[Point, float]

    def argmax(self) -> Point:
        return max(self.entries, key=self.entries.__getitem__)


def _boltzmann_weights(values: np.ndarray, beta: float) -> np.ndarray:
    shifted = -beta * (values - values.min())
    w = np.exp(shifted)
    return w / w.sum()


def gibbs_distribution(instance: IlpInstance, beta: float) -> GibbsTable:
    """pi_beta(x) proportional to exp(-beta f(x)) over the feasible region."""
    pts = _feasible_or_raise(instance)
    values = np.array([evaluate_form(instance.objective, x) for x in pts], dtype=float)
    probs = _boltzmann_weights(values, beta)
    return GibbsTable(float(beta), dict(zip(pts, probs.tolist())))


def metropolis_acceptance(delta: float, beta: float) -> float:
    if delta <= 0:
        return 1.0
    return math.exp(-beta * delta)


@dataclass(frozen=True)
class ClassicalChain:
    states: tuple[Point, ...]
    matrix: np.ndarray
    gap: float
    stationary: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        return _symmetrized_eigenvalues(self.matrix, self.stationary)


def _symmetrized_eigenvalues(matrix: np.ndarray, pi: np.ndarray) -> np.ndarray:
    s = np.sqrt(pi)
    sym = (s[:, None] * matrix) / s[None, :]
    sym = 0.5 * (sym + sym.T)
    return np.sort(np.linalg.eigvalsh(sym))[::-1]


def classical_chain(
    instance: IlpInstance,
    beta: float,
    acceptance: Callable[[int], float] | None = None,
) -> ClassicalChain:
    """Metropolis chain on the feasible region with a uniform proposal over Theta.

    ``acceptance`` maps an objective difference to an acceptance probability;
    the exact Metropolis rule is used when it is omitted.
    """
    pts = _feasible_or_raise(instance)
    if acceptance is None:
        acceptance = lambda delta: metropolis_acceptance(delta, beta)  # noqa: E731
    values = [evaluate_form(instance.objective, x) for x in pts]
    size = len(pts)
    proposal = 1.0 / instance.domain_size
    matrix = np.zeros((size, size))
    for i in range(size):
        for j in range(size):
            if i != j:
                matrix[i, j] = proposal * acceptance(values[j] - values[i])
        matrix[i, i] = 1.0 - matrix[i].sum()
    pi = _boltzmann_weights(np.array(values, dtype=float), beta)
    if size == 1:
        gap = 1.0
    else:
        eig = _symmetrized_eigenvalues(matrix, pi)
        gap = float(1.0 - eig[1])
    return ClassicalChain(tuple(pts), matrix, gap, pi)


def stationary_by_power_iteration(matrix: np.ndarray, tol: float = 1e-15, max_iter: int = 200_000) -> np.ndarray:
    """Left fixed point of a row-stochastic matrix, independent of any Gibbs formula."""
    size = matrix.shape[0]
    v = np.full(size, 1.0 / size)
    # lazy chain: same fixed point, no periodicity
    lazy = 0.5 * (matrix + np.eye(size))
    for _ in range(max_iter):
        nxt = v @ lazy
        nxt /= nxt.sum()
        if np.abs(nxt - v).max() < tol:
            return nxt
        v = nxt
    return v


def _form_partial_intervals(form: LinearForm, lo: int, hi: int) -> Iterator[tuple[int, int]]:
    low = high = form.constant
    yield low, high
    for c in form.coefficients:
        a, b = c * lo, c * hi
        low += min(a, b)
        high += max(a, b)
        yield low, high


def form_range(form: LinearForm, lo: int, hi: int) -> tuple[int, int]:
    *_, last = _form_partial_intervals(form, lo, hi)
    return last


def width_for_interval(low: int, high: int) -> int:
    w = 1
    while low < -(1 << (w - 1)) or high > (1 << (w - 1)) - 1:
        w += 1
    return w


def required_value_width(instance: IlpInstance) -> int:
    """Two's-complement width for F/F' that no partial sum or difference can overflow."""
    lo, hi = instance.lower, instance.upper
    low = high = 0
    forms = [instance.objective] + [c.form for c in instance.constraints]
    forms += [-c.form for c in instance.constraints if c.sense is Sense.EQ]
    for form in forms:
        for a, b in _form_partial_intervals(form, lo, hi):
            low, high = min(low, a), max(high, b)
    fmin, fmax = form_range(instance.objective, lo, hi)
    low, high = min(low, fmin - fmax), max(high, fmax - fmin)
    return width_for_interval(low, high)


def argmin_points(instance: IlpInstance) -> tuple[list[Point], int]:
    pts = _feasible_or_raise(instance)
    values = [evaluate_form(instance.objective, x) for x in pts]
    best = min(values)
    return [x for x, v in zip(pts, values) if v == best], best


def random_instance(
    rng: np.random.Generator,
    n: int,
    d: int,
    m: int,
    coeff_bound: int = 4,
    require_feasible: bool = False,
) -> IlpInstance:
    """Uniform integer coefficients in [-bound, bound]; all-zero rows are redrawn."""

    def draw() -> LinearForm:
        while True:
            coeffs = rng.integers(-coeff_bound, coeff_bound + 1, size=n)
            if np.any(coeffs):
                const = int(rng.integers(-coeff_bound, coeff_bound + 1))
                return LinearForm(const, tuple(int(c) for c in coeffs))

    while True:
        inst = IlpInstance(n, d, draw(), tuple(Constraint(draw()) for _ in range(m)))
        if not require_feasible or any(True for _ in _iter_feasible(inst)):
            return inst


def _iter_feasible(instance: IlpInstance) -> Iterator[Point]:
    lo, hi = instance.lower, instance.upper
    for x in product(range(lo, hi + 1), repeat=instance.n):
        if instance.is_feasible(x):
            yield x
