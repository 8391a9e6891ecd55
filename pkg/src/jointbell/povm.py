"""Unsharp joint measurements of two or three spin-1/2 components.

A joint measurement of ``a . sigma`` and ``b . sigma`` with sharpness factors
``alpha`` and ``beta`` exists iff::

    |alpha a + beta b| + |alpha a - beta b| <= 2

The two-direction POVM built here uses the bias
``m = (|alpha a + beta b| - |alpha a - beta b|) / 2``, which makes the
``k == l`` and ``k != l`` positivity constraints tight together, so the
construction succeeds exactly when the condition above holds.

For three mutually orthogonal axes, ``alpha^2 + beta^2 + gamma^2 <= 1`` is
sufficient. Whether it is also necessary is an open conjecture; only
sufficiency is used and tested here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .pauli_core import (
    DERIVED_TOL,
    I2,
    STRUCTURAL_TOL,
    Direction,
    min_eigenvalue,
    sigma_dot,
)

SIGNS = (1, -1)
FEASIBILITY_TOL = 1e-12


class InfeasibleMeasurementError(ValueError):
    """Requested sharpness factors admit no joint measurement."""

    def __init__(self, message: str, margin: float | None = None) -> None:
        super().__init__(message)
        self.margin = margin


def _check_sharpness(**factors: float) -> None:
    for name, value in factors.items():
        if not (0.0 <= value <= 1.0):
            raise ValueError(f"sharpness {name}={value!r} outside [0, 1]")


@dataclass(frozen=True)
class BuschMargin:
    """Slack ``2 - |alpha a + beta b| - |alpha a - beta b|`` of the joint-measurability condition."""

    value: float

    @property
    def feasible(self) -> bool:
        return self.value >= -FEASIBILITY_TOL

    def __float__(self) -> float:
        return self.value


def _plus_minus_norms(alpha: float, a: Direction, beta: float, b: Direction) -> tuple[float, float]:
    u = alpha * a.vector
    v = beta * b.vector
    return float(np.linalg.norm(u + v)), float(np.linalg.norm(u - v))


def busch_margin(alpha: float, a: Direction, beta: float, b: Direction) -> BuschMargin:
    _check_sharpness(alpha=alpha, beta=beta)
    plus, minus = _plus_minus_norms(alpha, a, beta, b)
    return BuschMargin(2.0 - plus - minus)


def max_symmetric_sharpness(a: Direction, b: Direction) -> float:
    """Largest common sharpness ``alpha = beta`` for which a and b are jointly measurable."""
    plus, minus = _plus_minus_norms(1.0, a, 1.0, b)
    # plus + minus >= 2 exactly; rounding can push the ratio just above 1
    return min(1.0, 2.0 / (plus + minus))


def three_direction_condition(alpha: float, beta: float, gamma: float) -> bool:
    return alpha * alpha + beta * beta + gamma * gamma <= 1.0 + STRUCTURAL_TOL


@dataclass(frozen=True, eq=False)
class JointPovm2:
    """Four-outcome joint measurement indexed by ``(k, l)`` in {+1, -1}^2.

    ``k`` is the outcome for ``a``, ``l`` the outcome for ``b``.
    """

    a: Direction
    b: Direction
    alpha: float
    beta: float
    m: float
    elements: dict[tuple[int, int], np.ndarray]

    def element(self, k: int, l: int) -> np.ndarray:
        return self.elements[(k, l)]

    def outcomes(self) -> Iterator[tuple[tuple[int, int], np.ndarray]]:
        for key in itertools.product(SIGNS, SIGNS):
            yield key, self.elements[key]

    def marginal_a(self, k: int) -> np.ndarray:
        return sum(self.elements[(k, l)] for l in SIGNS)

    def marginal_b(self, l: int) -> np.ndarray:
        return sum(self.elements[(k, l)] for k in SIGNS)

    def min_eigenvalues(self) -> dict[tuple[int, int], float]:
        return {key: min_eigenvalue(el) for key, el in self.outcomes()}

    def residuals(self) -> dict[str, float]:
        """Worst deviations from the POVM invariants (completeness, marginal scaling)."""
        total = sum(self.elements.values())
        res = {"completeness": float(np.abs(total - I2).max())}
        res["marginal_a"] = max(
            float(np.abs(self.marginal_a(k) - 0.5 * (I2 + k * self.alpha * sigma_dot(self.a.vector))).max())
            for k in SIGNS
        )
        res["marginal_b"] = max(
            float(np.abs(self.marginal_b(l) - 0.5 * (I2 + l * self.beta * sigma_dot(self.b.vector))).max())
            for l in SIGNS
        )
        res["positivity"] = max(0.0, -min(self.min_eigenvalues().values()))
        return res


def build_joint_povm2(alpha: float, a: Direction, beta: float, b: Direction) -> JointPovm2:
    """Joint measurement of ``a . sigma`` and ``b . sigma`` scaled by alpha and beta.

    Elements are ``G(k, l) = [(1 + k l m) I + (k alpha a + l beta b) . sigma] / 4``.

    Raises
    ------
    InfeasibleMeasurementError
        If the margin is below -1e-12; the margin is attached to the exception.
    """
    _check_sharpness(alpha=alpha, beta=beta)
    plus, minus = _plus_minus_norms(alpha, a, beta, b)
    margin = 2.0 - plus - minus
    if margin < -FEASIBILITY_TOL:
        raise InfeasibleMeasurementError(
            f"no joint measurement for alpha={alpha!r}, beta={beta!r}: margin {margin!r} < 0",
            margin=margin,
        )
    m = 0.5 * (plus - minus)
    av, bv = alpha * a.vector, beta * b.vector
    elements = {}
    for k, l in itertools.product(SIGNS, SIGNS):
        el = 0.25 * ((1 + k * l * m) * I2 + sigma_dot(k * av + l * bv))
        el.setflags(write=False)
        elements[(k, l)] = el
    return JointPovm2(a=a, b=b, alpha=float(alpha), beta=float(beta), m=m, elements=elements)


@dataclass(frozen=True, eq=False)
class JointPovm3:
    """Eight-outcome joint measurement indexed by ``(j, k, l)`` for directions a, b, c."""

    a: Direction
    b: Direction
    c: Direction
    alpha: float
    beta: float
    gamma: float
    elements: dict[tuple[int, int, int], np.ndarray]

    def outcomes(self) -> Iterator[tuple[tuple[int, int, int], np.ndarray]]:
        for key in itertools.product(SIGNS, SIGNS, SIGNS):
            yield key, self.elements[key]

    def marginal(self, axis: int, sign: int) -> np.ndarray:
        return sum(el for key, el in self.outcomes() if key[axis] == sign)

    def min_eigenvalues(self) -> dict[tuple[int, int, int], float]:
        return {key: min_eigenvalue(el) for key, el in self.outcomes()}

    def residuals(self) -> dict[str, float]:
        total = sum(self.elements.values())
        res = {"completeness": float(np.abs(total - I2).max())}
        for axis, (name, d, s) in enumerate(
            (("a", self.a, self.alpha), ("b", self.b, self.beta), ("c", self.c, self.gamma))
        ):
            res[f"marginal_{name}"] = max(
                float(np.abs(self.marginal(axis, sg) - 0.5 * (I2 + sg * s * sigma_dot(d.vector))).max())
                for sg in SIGNS
            )
        res["positivity"] = max(0.0, -min(self.min_eigenvalues().values()))
        return res


def build_joint_povm3(
    alpha: float,
    beta: float,
    gamma: float,
    a: Direction,
    b: Direction,
    c: Direction,
) -> JointPovm3:
    """Joint measurement along three orthogonal axes, ``G(j,k,l) = [I + (j alpha a + k beta b + l gamma c) . sigma] / 8``.

    Only orthogonal axes are accepted: there ``|j alpha a + k beta b + l gamma c|``
    equals ``sqrt(alpha^2 + beta^2 + gamma^2)``, so the sufficient condition
    guarantees positivity.
    """
    _check_sharpness(alpha=alpha, beta=beta, gamma=gamma)
    if not three_direction_condition(alpha, beta, gamma):
        raise InfeasibleMeasurementError(
            f"alpha^2 + beta^2 + gamma^2 = {alpha**2 + beta**2 + gamma**2!r} exceeds 1"
        )
    for (n1, d1), (n2, d2) in itertools.combinations((("a", a), ("b", b), ("c", c)), 2):
        if abs(d1.dot(d2)) > DERIVED_TOL:
            raise ValueError(f"directions {n1} and {n2} are not orthogonal (dot product {d1.dot(d2)!r})")
    elements = {}
    for j, k, l in itertools.product(SIGNS, SIGNS, SIGNS):
        el = 0.125 * (I2 + sigma_dot(j * alpha * a.vector + k * beta * b.vector + l * gamma * c.vector))
        el.setflags(write=False)
        elements[(j, k, l)] = el
    return JointPovm3(a=a, b=b, c=c, alpha=float(alpha), beta=float(beta), gamma=float(gamma), elements=elements)


def symmetric_boundary_sharpness() -> float:
    """2 / (1 + sqrt 3), the common sharpness limit for directions 120 degrees apart."""
    return 2.0 / (1.0 + math.sqrt(3.0))
