"""Multi-restart Nelder-Mead maximization over Bloch-sphere angles and sharpness factors.

Parameter vectors put ``2 * n_directions`` spherical angles
``(theta_1, phi_1, theta_2, phi_2, ...)`` first. Any remaining entries are
sharpness factors, started uniformly in [0, 1]. Constrained sharpness
problems are handled by a projection applied before every evaluation, so the
objective only ever sees feasible points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .pauli_core import Direction, X, Y, random_direction

DEFAULT_BUDGET = 20_000
DEFAULT_RESTARTS = 16

Objective = Callable[[np.ndarray], float]
Projection = Callable[[np.ndarray], np.ndarray]


class NonFiniteObjectiveError(ArithmeticError):
    def __init__(self, params: np.ndarray, value: float) -> None:
        super().__init__(f"objective returned {value!r} at {np.asarray(params).tolist()}")
        self.params = np.asarray(params).copy()
        self.value = value


class _BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class SphereParam:
    theta: float
    phi: float

    def to_direction(self) -> Direction:
        return Direction.from_angles(self.theta, self.phi)

    @classmethod
    def from_direction(cls, d: Direction) -> SphereParam:
        return cls(*d.angles())

    def canonical(self) -> SphereParam:
        """Equivalent angles with theta in [0, pi] and phi in [0, 2 pi)."""
        return SphereParam.from_direction(self.to_direction())


def directions_from_params(params: Sequence[float], n_directions: int) -> list[Direction]:
    return [Direction.from_angles(params[2 * i], params[2 * i + 1]) for i in range(n_directions)]


@dataclass
class SearchResult:
    best_value: float
    best_params: np.ndarray
    evaluations: int
    converged: bool
    n_directions: int = 0
    incumbents: list[float] = field(default_factory=list, repr=False)

    @property
    def directions(self) -> list[SphereParam]:
        return [
            SphereParam(float(self.best_params[2 * i]), float(self.best_params[2 * i + 1])).canonical()
            for i in range(self.n_directions)
        ]

    @property
    def sharpness(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.best_params[2 * self.n_directions :])


class _Tracker:
    """Counts evaluations against the budget and keeps the running best."""

    def __init__(self, objective: Objective, project: Projection | None, budget: int) -> None:
        self.objective = objective
        self.project = project
        self.budget = budget
        self.count = 0
        self.best_value = -math.inf
        self.best_params: np.ndarray | None = None
        self.incumbents: list[float] = []

    def __call__(self, x: np.ndarray) -> float:
        if self.count >= self.budget:
            raise _BudgetExhausted
        p = self.project(np.array(x, dtype=float)) if self.project else np.array(x, dtype=float)
        value = float(self.objective(p))
        self.count += 1
        if not math.isfinite(value):
            raise NonFiniteObjectiveError(p, value)
        if value > self.best_value:
            self.best_value = value
            self.best_params = p
        self.incumbents.append(self.best_value)
        return -value


def _initial_point(rng: np.random.Generator, n_params: int, n_directions: int) -> np.ndarray:
    x = np.empty(n_params)
    for i in range(n_directions):
        x[2 * i : 2 * i + 2] = random_direction(rng).angles()
    x[2 * n_directions :] = rng.uniform(0.0, 1.0, size=n_params - 2 * n_directions)
    return x


def _simplex(x0: np.ndarray, n_directions: int) -> np.ndarray:
    n = x0.size
    sim = np.tile(x0, (n + 1, 1))
    for i in range(n):
        step = 0.5 if i < 2 * n_directions else 0.1
        sim[i + 1, i] += step
    return sim


def maximize(
    objective: Objective,
    n_params: int,
    *,
    budget: int = DEFAULT_BUDGET,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    n_directions: int = 0,
    project: Projection | None = None,
    x0: Sequence[float] | None = None,
    xatol: float = 1e-10,
    fatol: float = 1e-14,
) -> SearchResult:
    """Maximize ``objective`` with restarted Nelder-Mead, deterministically per seed.

    The budget is split evenly over the restarts. Whatever is left at the end
    goes to a final polishing run from the incumbent. ``best_params`` are
    reported after projection.

    Raises
    ------
    NonFiniteObjectiveError
        As soon as the objective returns NaN or infinity.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if not 0 <= 2 * n_directions <= n_params:
        raise ValueError("n_directions does not fit in n_params")
    rng = np.random.default_rng(seed)
    tracker = _Tracker(objective, project, budget)
    per_restart = max(1, budget // (restarts + 1))
    converged = False

    def run(start: np.ndarray, maxfev: int) -> bool:
        if maxfev <= 0:
            return False
        # the start point is always evaluated first, even if the simplex cannot be
        tracker(start)
        if maxfev == 1 or tracker.count >= tracker.budget:
            return False
        res = minimize(
            tracker,
            start,
            method="Nelder-Mead",
            options={
                "maxfev": maxfev - 1,
                "xatol": xatol,
                "fatol": fatol,
                "initial_simplex": _simplex(start, n_directions),
                "adaptive": n_params > 4,
            },
        )
        return bool(res.success)

    try:
        for r in range(restarts):
            if r == 0 and x0 is not None:
                start = np.asarray(x0, dtype=float)
            else:
                start = _initial_point(rng, n_params, n_directions)
            remaining = tracker.budget - tracker.count
            converged |= run(start, min(per_restart, remaining))
        remaining = tracker.budget - tracker.count
        if remaining > 0 and tracker.best_params is not None:
            converged |= run(tracker.best_params, remaining)
    except _BudgetExhausted:
        pass

    return SearchResult(
        best_value=tracker.best_value,
        best_params=tracker.best_params,
        evaluations=tracker.count,
        converged=converged,
        n_directions=n_directions,
        incumbents=tracker.incumbents,
    )


# --- constrained sharpness problems ----------------------------------------


def project_busch_pair(alpha: float, beta: float, a: Direction, b: Direction) -> tuple[float, float]:
    """Clip to [0, 1] and scale radially onto the joint-measurability region if outside it.

    The left-hand side of the condition is homogeneous of degree one, so one
    division lands exactly on the boundary.
    """
    alpha = min(max(alpha, 0.0), 1.0)
    beta = min(max(beta, 0.0), 1.0)
    u, v = alpha * a.vector, beta * b.vector
    s = 0.5 * (np.linalg.norm(u + v) + np.linalg.norm(u - v))
    if s > 1.0:
        alpha, beta = alpha / s, beta / s
    return alpha, beta


def project_ball(values: Sequence[float]) -> np.ndarray:
    v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    n = float(np.linalg.norm(v))
    return v / n if n > 1.0 else v


@dataclass(frozen=True)
class JointRegime:
    name: str
    n_params: int
    constraint: str
    objective: Objective
    project: Projection
    x0: tuple[float, ...]


def _regimes() -> dict[str, JointRegime]:
    from . import inequalities as ineq
    from .pauli_core import ghz_state, singlet_state
    from .povm import build_joint_povm2, max_symmetric_sharpness

    ghz = ghz_state()
    singlet = singlet_state()
    a2, _, c2 = ineq.GISIN_COPLANAR_PARTY2

    def project_mermin(p: np.ndarray) -> np.ndarray:
        a1, b1 = project_busch_pair(p[0], p[1], X, Y)
        a2_, b2_ = project_busch_pair(p[2], p[3], X, Y)
        return np.array([a1, b1, a2_, b2_])

    def mermin_objective(p: np.ndarray) -> float:
        povm1 = build_joint_povm2(p[0], X, p[1], Y)
        povm2 = build_joint_povm2(p[2], X, p[3], Y)
        return ineq.mermin_joint_value(ghz, povm1, povm2).value

    alpha_max = max_symmetric_sharpness(a2, c2)

    def project_gisin(p: np.ndarray) -> np.ndarray:
        return np.array([min(max(p[0], 0.0), alpha_max)])

    def gisin_objective(p: np.ndarray) -> float:
        return ineq.gisin3_joint_value(singlet, p[0]).value

    def xyz_objective(p: np.ndarray) -> float:
        return ineq.gisin_xyz_joint_value(p[0], p[1], p[2])

    return {
        "mermin_joint": JointRegime(
            "mermin_joint", 4, "busch", mermin_objective, project_mermin, (0.5, 0.5, 0.5, 0.5)
        ),
        "gisin3_joint": JointRegime("gisin3_joint", 1, "busch", gisin_objective, project_gisin, (0.5,)),
        "gisin_xyz_joint": JointRegime("gisin_xyz_joint", 3, "three_direction", xyz_objective, project_ball, (0.3, 0.3, 0.3)),
    }


JOINT_REGIMES = ("mermin_joint", "gisin3_joint", "gisin_xyz_joint")
CONSTRAINTS = {"busch", "three_direction"}


def maximize_joint_regime(
    expression: str,
    constraint: str | None = None,
    *,
    budget: int = DEFAULT_BUDGET,
    restarts: int = 4,
    seed: int = 0,
) -> SearchResult:
    """Maximize a joint-regime Bell expression over its sharpness factors.

    ``expression`` is one of ``mermin_joint`` (alpha1, beta1, alpha2, beta2 for
    x/y joint measurements on parties 1 and 2 of the GHZ state),
    ``gisin3_joint`` (common alpha on the 120-degree pair of the coplanar Gisin
    setup) or ``gisin_xyz_joint`` (alpha, beta, gamma on x, y, z). Infeasible
    points are projected radially onto the feasible set. ``constraint``, if
    given, must match the expression's own ('busch' or 'three_direction').
    """
    if expression not in JOINT_REGIMES:
        raise ValueError(f"unknown expression {expression!r}; expected one of {', '.join(JOINT_REGIMES)}")
    regime = _regimes()[expression]
    if constraint is not None and constraint != regime.constraint:
        raise ValueError(f"{expression} is constrained by {regime.constraint!r}, not {constraint!r}")
    return maximize(
        regime.objective,
        regime.n_params,
        budget=budget,
        restarts=restarts,
        seed=seed,
        project=regime.project,
        x0=regime.x0,
    )
