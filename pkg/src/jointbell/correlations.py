"""Correlation functions and outcome probabilities for mixed sharp/joint measurement plans.

Each party of a :class:`MeasurementPlan` carries one measurement: a sharp
spin measurement, a two-direction joint POVM, a two-direction joint POVM with
an inferred third result, or a three-axis joint POVM. Every labelled result is
a number attached to each outcome of that party's measurement. Correlations
and coincidence probabilities are sums over the full table of outcome tuples;
the operator identities (``E_J = alpha E``) are only used as cross-checks.

The inferred result of :class:`Joint2WithInferred` is ``k + l`` with values in
{-2, 0, +2}. For ``b = a + c`` with ``|a + c| = 1`` this is the linear
post-processing that gives mean ``alpha <b . sigma>``. A +/-1 relabelling
cannot reach the full factor ``alpha``.
"""

from __future__ import annotations

import itertools
import re
from functools import cached_property
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .pauli_core import (
    DERIVED_TOL,
    I2,
    DensityMatrix,
    DimensionError,
    Direction,
    bloch_observable,
    expectation,
    partial_trace,
    tensor,
)
from .povm import SIGNS, JointPovm2, JointPovm3


class UnknownLabelError(KeyError):
    pass


@dataclass(frozen=True)
class Sharp:
    """Projective measurement of ``direction . sigma`` with result +/-1."""

    direction: Direction
    label: str

    @property
    def labels(self) -> tuple[str, ...]:
        return (self.label,)

    @cached_property
    def table(self) -> tuple[np.ndarray, np.ndarray]:
        obs = bloch_observable(self.direction)
        elements = np.stack([0.5 * (I2 + s * obs) for s in SIGNS])
        values = np.array([[s] for s in SIGNS], dtype=float)
        return elements, values


@dataclass(frozen=True)
class Joint2:
    """Joint POVM giving results for ``povm.a`` and ``povm.b`` (labels in that order)."""

    povm: JointPovm2
    labels: tuple[str, str]

    @cached_property
    def table(self) -> tuple[np.ndarray, np.ndarray]:
        keys, els = zip(*self.povm.outcomes())
        return np.stack(els), np.array(keys, dtype=float)


@dataclass(frozen=True)
class Joint2WithInferred:
    """Joint POVM on a and b plus an inferred result for ``a + b`` equal to the sum of both results."""

    povm: JointPovm2
    labels: tuple[str, str]
    inferred_direction: Direction
    inferred_label: str

    def __post_init__(self) -> None:
        s = self.povm.a.vector + self.povm.b.vector
        if abs(np.linalg.norm(s) - 1.0) > DERIVED_TOL:
            raise ValueError(f"|a + b| = {np.linalg.norm(s)!r}; inference needs |a + b| = 1")
        if np.abs(s - self.inferred_direction.vector).max() > DERIVED_TOL:
            raise ValueError("inferred direction must equal a + b")
        if abs(self.povm.alpha - self.povm.beta) > DERIVED_TOL:
            raise ValueError("inferred result needs equal sharpness on a and b")

    @property
    def all_labels(self) -> tuple[str, str, str]:
        return (*self.labels, self.inferred_label)

    @cached_property
    def table(self) -> tuple[np.ndarray, np.ndarray]:
        keys, els = zip(*self.povm.outcomes())
        values = np.array([(k, l, k + l) for k, l in keys], dtype=float)
        return np.stack(els), values


@dataclass(frozen=True)
class Joint3:
    povm: JointPovm3
    labels: tuple[str, str, str]

    @cached_property
    def table(self) -> tuple[np.ndarray, np.ndarray]:
        keys, els = zip(*self.povm.outcomes())
        return np.stack(els), np.array(keys, dtype=float)


PlanEntry = Union[Sharp, Joint2, Joint2WithInferred, Joint3]


def _entry_labels(entry: PlanEntry) -> tuple[str, ...]:
    if isinstance(entry, Joint2WithInferred):
        return entry.all_labels
    return tuple(entry.labels)


@dataclass(frozen=True)
class MeasurementPlan:
    """One measurement per party, in party order."""

    entries: tuple[PlanEntry, ...]
    label_index: dict[str, tuple[int, int]] = field(init=False, repr=False)

    def __init__(self, entries: Sequence[PlanEntry]) -> None:
        entries = tuple(entries)
        if not 1 <= len(entries) <= 3:
            raise ValueError("a plan needs one to three parties")
        index: dict[str, tuple[int, int]] = {}
        for party, entry in enumerate(entries):
            for col, label in enumerate(_entry_labels(entry)):
                if label in index:
                    raise ValueError(f"duplicate outcome label {label!r}")
                index[label] = (party, col)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "label_index", index)

    @property
    def n_parties(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.label_index)


@dataclass(frozen=True, eq=False)
class OutcomeTable:
    """Exact probability of every outcome tuple of a plan on a state.

    ``probs[i, j, ...]`` is the probability of outcome ``i`` on party 1,
    ``j`` on party 2, and so on. ``values[p][i, c]`` is the number assigned to
    label column ``c`` of party ``p`` for its outcome ``i``.
    """

    plan: MeasurementPlan
    probs: np.ndarray
    values: tuple[np.ndarray, ...]

    def label_values(self, label: str) -> tuple[int, np.ndarray]:
        try:
            party, col = self.plan.label_index[label]
        except KeyError:
            raise UnknownLabelError(f"label {label!r} not in plan (labels: {', '.join(self.plan.labels)})") from None
        return party, self.values[party][:, col]

    def rows(self):
        """Iterate ``(assignment, probability)`` over all outcome tuples."""
        shapes = [range(v.shape[0]) for v in self.values]
        for idx in itertools.product(*shapes):
            assignment = {}
            for party, i in enumerate(idx):
                for label, val in zip(_entry_labels(self.plan.entries[party]), self.values[party][i]):
                    assignment[label] = int(val)
            yield assignment, float(self.probs[idx])


_EINSUM = {
    1: "ab,iba->i",
    2: "abcd,ica,jdb->ij",
    3: "abcdef,ida,jeb,kfc->ijk",
}


def outcome_table(rho: DensityMatrix, plan: MeasurementPlan) -> OutcomeTable:
    """Probabilities ``trace(rho (E_1 x E_2 x ...))`` for every outcome tuple."""
    if rho.n_qubits != plan.n_parties:
        raise DimensionError(f"{rho.n_qubits}-qubit state but {plan.n_parties}-party plan")
    tables = [entry.table for entry in plan.entries]
    elements = [t[0] for t in tables]
    n = plan.n_parties
    r = rho.matrix.reshape([2] * (2 * n))
    probs = np.einsum(_EINSUM[n], r, *elements, optimize=False)
    if np.abs(probs.imag).max() > DERIVED_TOL:
        raise ValueError("outcome probabilities have an imaginary part; elements are not Hermitian")
    return OutcomeTable(plan=plan, probs=probs.real, values=tuple(t[1] for t in tables))


def sharp_correlation(rho: DensityMatrix, dirs: Sequence[Direction]) -> float:
    """``<(d_1 . sigma) x (d_2 . sigma) x ...>``, computed from operators."""
    if len(dirs) != rho.n_qubits:
        raise DimensionError(f"{len(dirs)} directions for a {rho.n_qubits}-qubit state")
    return expectation(rho, tensor([bloch_observable(d) for d in dirs]))


def correlation_from_table(table: OutcomeTable, selection: Sequence[str | None]) -> float:
    if len(selection) != table.plan.n_parties:
        raise DimensionError(f"selection has {len(selection)} labels for {table.plan.n_parties} parties")
    factors = []
    for party, label in enumerate(selection):
        if label is None:
            factors.append(np.ones(table.values[party].shape[0]))
            continue
        owner, vals = table.label_values(label)
        if owner != party:
            raise UnknownLabelError(f"label {label!r} belongs to party {owner + 1}, not party {party + 1}")
        factors.append(vals)
    result = table.probs
    for vals in reversed(factors):
        result = result @ vals
    return float(result)


def joint_correlation(rho: DensityMatrix, plan: MeasurementPlan, selection: Sequence[str | None]) -> float:
    """Mean product of the selected results, one label per party.

    ``None`` in ``selection`` ignores that party's result.
    """
    return correlation_from_table(outcome_table(rho, plan), selection)


def jm_variance(rho: DensityMatrix, povm: JointPovm2, which: str) -> float:
    """Variance of the jointly measured result for ``which`` ('a' or 'b') on a single qubit."""
    if which not in ("a", "b"):
        raise ValueError("which must be 'a' or 'b'")
    if rho.n_qubits != 1:
        raise DimensionError("jm_variance needs a single-qubit state")
    table = outcome_table(rho, MeasurementPlan([Joint2(povm, ("a", "b"))]))
    _, vals = table.label_values(which)
    mean = float(table.probs @ vals)
    second = float(table.probs @ vals**2)
    return second - mean * mean


# --- predicates -----------------------------------------------------------

Predicate = Callable[[Mapping[str, int]], bool]
_TOKEN = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def parse_predicate(text: str) -> tuple[Predicate, frozenset[str]]:
    """Parse a chained equality of signed label products, e.g. ``"a1*b2 = b1*a2 = -a3"``.

    Returns the predicate and the set of labels it references.
    """
    sides = [s.strip() for s in re.split(r"==?", text)]
    if len(sides) < 2 or any(not s for s in sides):
        raise ValueError(f"predicate {text!r} needs at least two sides joined by '='")
    terms: list[tuple[int, list[str]]] = []
    labels: set[str] = set()
    for side in sides:
        sign = 1
        while side[:1] in ("-", "+"):
            if side[0] == "-":
                sign = -sign
            side = side[1:].strip()
        factors = [f.strip() for f in side.split("*")]
        for f in factors:
            if not _TOKEN.match(f):
                raise ValueError(f"bad label {f!r} in predicate {text!r}")
        labels.update(factors)
        terms.append((sign, factors))

    def predicate(o: Mapping[str, int]) -> bool:
        vals = []
        for sign, factors in terms:
            v = sign
            for f in factors:
                v *= o[f]
            vals.append(v)
        return all(v == vals[0] for v in vals[1:])

    return predicate, frozenset(labels)


def probability_from_table(table: OutcomeTable, predicate: Predicate | str) -> float:
    if isinstance(predicate, str):
        predicate, needed = parse_predicate(predicate)
        missing = needed - set(table.plan.labels)
        if missing:
            raise UnknownLabelError(f"unknown labels in predicate: {', '.join(sorted(missing))}")
    total = 0.0
    for assignment, p in table.rows():
        try:
            hit = predicate(assignment)
        except KeyError as exc:
            raise UnknownLabelError(f"predicate references unknown label {exc.args[0]!r}") from None
        if hit:
            total += p
    return total


def coincidence_probability(rho: DensityMatrix, plan: MeasurementPlan, predicate: Predicate | str) -> float:
    """Total probability of the outcome tuples satisfying ``predicate``.

    ``predicate`` is either a callable on ``{label: value}`` or a string
    accepted by :func:`parse_predicate`.
    """
    return probability_from_table(outcome_table(rho, plan), predicate)


# --- scaling and no-signalling checks -------------------------------------


@dataclass(frozen=True)
class ScalingResidual:
    residual_a: float
    residual_b: float

    @property
    def worst(self) -> float:
        return max(self.residual_a, self.residual_b)


def verify_appendix_scaling(rho: DensityMatrix, povm: JointPovm2, c: Direction) -> ScalingResidual:
    """Compare jointly measured correlations on party 1 with scaled sharp ones.

    Returns ``|E_J(a, c) - alpha E(a, c)|`` and ``|E_J(b, c) - beta E(b, c)|``.
    """
    if rho.n_qubits != 2:
        raise DimensionError("scaling check needs a two-qubit state")
    plan = MeasurementPlan([Joint2(povm, ("a", "b")), Sharp(c, "c")])
    table = outcome_table(rho, plan)
    ej_a = correlation_from_table(table, ("a", "c"))
    ej_b = correlation_from_table(table, ("b", "c"))
    return ScalingResidual(
        residual_a=abs(ej_a - povm.alpha * sharp_correlation(rho, (povm.a, c))),
        residual_b=abs(ej_b - povm.beta * sharp_correlation(rho, (povm.b, c))),
    )


EQUAL_CROSS_PRODUCTS = "a1*b2 = b1*a2"
ANTI_EQUAL_PRODUCTS = "a1*a2 = -b1*b2"


def conditional_states(rho: DensityMatrix, direction: Direction) -> list[tuple[int, float, DensityMatrix | None]]:
    """Update parties 1-2 of a three-qubit state on a sharp measurement of party 3.

    Returns ``(outcome, probability, conditional state)`` per outcome; the
    state is ``None`` when the outcome has zero probability.
    """
    if rho.n_qubits != 3:
        raise DimensionError("conditional update expects a three-qubit state")
    obs = bloch_observable(direction)
    out = []
    for s in SIGNS:
        proj = tensor([I2, I2, 0.5 * (I2 + s * obs)])
        unnorm = partial_trace(proj @ rho.matrix, keep=(0, 1))
        p = float(np.trace(unnorm).real)
        if p <= 1e-14:
            out.append((s, p, None))
            continue
        cond = unnorm / p
        cond = 0.5 * (cond + cond.conj().T)
        out.append((s, p, DensityMatrix(cond)))
    return out


def pair_event_probability(
    rho12: DensityMatrix, povm1: JointPovm2, povm2: JointPovm2, event: Predicate | str = EQUAL_CROSS_PRODUCTS
) -> float:
    plan = MeasurementPlan([Joint2(povm1, ("a1", "b1")), Joint2(povm2, ("a2", "b2"))])
    return coincidence_probability(rho12, plan, event)


def conditioned_event_probability(
    rho: DensityMatrix,
    povm1: JointPovm2,
    povm2: JointPovm2,
    third: Direction,
    event: Predicate | str = EQUAL_CROSS_PRODUCTS,
) -> float:
    """Probability of a parties-1-2 event when party 3 measures ``third``, via conditional states."""
    total = 0.0
    for _, p, cond in conditional_states(rho, third):
        if cond is not None:
            total += p * pair_event_probability(cond, povm1, povm2, event)
    return total


def no_signaling_check(
    rho: DensityMatrix,
    povm1: JointPovm2,
    povm2: JointPovm2,
    third_dirs: tuple[Direction, Direction],
    event: Predicate | str = EQUAL_CROSS_PRODUCTS,
) -> float:
    """``|p(event | party 3 measures d) - p(event | party 3 measures d')|``."""
    first, second = third_dirs
    return abs(
        conditioned_event_probability(rho, povm1, povm2, first, event)
        - conditioned_event_probability(rho, povm1, povm2, second, event)
    )


def traced_event_probability(
    rho: DensityMatrix, povm1: JointPovm2, povm2: JointPovm2, event: Predicate | str = EQUAL_CROSS_PRODUCTS
) -> float:
    """Same event with party 3 traced out instead of measured."""
    reduced = DensityMatrix(partial_trace(rho, keep=(0, 1)))
    return pair_event_probability(reduced, povm1, povm2, event)
