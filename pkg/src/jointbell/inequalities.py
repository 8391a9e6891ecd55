"""CHSH, Mermin and Gisin three-setting expressions under sharp and joint measurement regimes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import search
from .correlations import (
    ANTI_EQUAL_PRODUCTS,
    EQUAL_CROSS_PRODUCTS,
    Joint2,
    Joint2WithInferred,
    Joint3,
    MeasurementPlan,
    Sharp,
    correlation_from_table,
    no_signaling_check,
    outcome_table,
    probability_from_table,
    sharp_correlation,
)
from .pauli_core import (
    DERIVED_TOL,
    DensityMatrix,
    DimensionError,
    Direction,
    X,
    Y,
    Z,
    ghz_state,
    singlet_state,
)
from .povm import (
    FEASIBILITY_TOL,
    InfeasibleMeasurementError,
    JointPovm2,
    build_joint_povm2,
    build_joint_povm3,
    max_symmetric_sharpness,
    three_direction_condition,
)

REGIMES = ("sharp", "joint-on-one", "joint-on-two", "joint-on-all")

CHSH_CLASSICAL = 2.0
TSIRELSON = 2.0 * math.sqrt(2.0)
MERMIN_CLASSICAL = 2.0
MERMIN_QUANTUM = 4.0
MERMIN_JOINT_CEILING = 2.0
GISIN3_CLASSICAL = 5.0
GISIN3_QUANTUM_COPLANAR = 6.0
GISIN4_CLASSICAL = 6.0
GISIN4_XYZ = 4.0 * math.sqrt(3.0)
GISIN3_JOINT_CEILING = 12.0 / (1.0 + math.sqrt(3.0))
GISIN_XYZ_JOINT_CEILING = 4.0


@dataclass(frozen=True)
class InequalityReport:
    name: str
    value: float
    classical_bound: float
    quantum_bound: float | None
    regime: str
    terms: Mapping[str, float] = field(default_factory=dict, compare=False, repr=False)
    violated: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        object.__setattr__(self, "violated", self.value > self.classical_bound + DERIVED_TOL)

    @property
    def ratio(self) -> float:
        return self.value / self.classical_bound


# --- direction presets ----------------------------------------------------

_S3 = math.sqrt(3.0)


def _d(*v: float) -> Direction:
    return Direction.from_vector(v)


CHSH_OPTIMAL = (X, Y, _d(1, 1, 0), _d(1, -1, 0))
GHZ_X = (X, X, X)
GHZ_Y = (Y, Y, Y)

# b2 = a2 + c2 holds exactly in floating point with these literals
GISIN_COPLANAR_PARTY2 = (
    Direction(1.0, 0.0, 0.0),
    Direction(0.5, _S3 / 2, 0.0),
    Direction(-0.5, _S3 / 2, 0.0),
)
_G2 = [d.vector for d in GISIN_COPLANAR_PARTY2]
GISIN_COPLANAR_PARTY1 = (
    Direction.from_vector(-(_G2[0] + _G2[1] + _G2[2])),
    Direction.from_vector(-(_G2[0] + _G2[1] - _G2[2])),
    Direction.from_vector(-(_G2[0] - _G2[1] - _G2[2])),
)
GISIN_COPLANAR = GISIN_COPLANAR_PARTY1 + GISIN_COPLANAR_PARTY2

XYZ_PARTY2 = (X, Y, Z)
XYZ_PARTY1 = (_d(-1, -1, -1), _d(-1, -1, 1), _d(-1, 1, 1), _d(-1, 1, -1))

# sign of E(party-1 setting, party-2 setting) in the Gisin sums
GISIN3_COEFFS = {
    ("a1", "a2"): 1, ("a1", "b2"): 1, ("a1", "c2"): 1,
    ("b1", "a2"): 1, ("b1", "b2"): 1, ("b1", "c2"): -1,
    ("c1", "a2"): 1, ("c1", "b2"): -1, ("c1", "c2"): -1,
}  # fmt: skip
GISIN4_COEFFS = {**GISIN3_COEFFS, ("d1", "a2"): 1, ("d1", "b2"): -1, ("d1", "c2"): 1}


def _check_qubits(rho: DensityMatrix, n: int, what: str) -> None:
    if rho.n_qubits != n:
        raise DimensionError(f"{what} needs a {n}-qubit state, got {rho.n_qubits}")


# --- CHSH -----------------------------------------------------------------


def chsh_value(
    rho: DensityMatrix, a1: Direction, b1: Direction, a2: Direction, b2: Direction
) -> InequalityReport:
    """``|E(a1,a2) + E(a1,b2) + E(b1,a2) - E(b1,b2)|`` from sharp measurements."""
    _check_qubits(rho, 2, "CHSH")
    terms = {
        "a1a2": sharp_correlation(rho, (a1, a2)),
        "a1b2": sharp_correlation(rho, (a1, b2)),
        "b1a2": sharp_correlation(rho, (b1, a2)),
        "b1b2": sharp_correlation(rho, (b1, b2)),
    }
    value = abs(terms["a1a2"] + terms["a1b2"] + terms["b1a2"] - terms["b1b2"])
    return InequalityReport("chsh", value, CHSH_CLASSICAL, TSIRELSON, "sharp", terms)


# --- Mermin / GHZ ---------------------------------------------------------

MERMIN_SIGNS = (1, -1, -1, -1)


def mermin_value(
    rho: DensityMatrix,
    x_settings: Sequence[Direction] = GHZ_X,
    y_settings: Sequence[Direction] = GHZ_Y,
    signs: Sequence[int] = MERMIN_SIGNS,
) -> InequalityReport:
    """``|s0 E(x,x,x) + s1 E(x,y,y) + s2 E(y,x,y) + s3 E(y,y,x)|`` with default signs (+, -, -, -)."""
    _check_qubits(rho, 3, "Mermin")
    x1, x2, x3 = x_settings
    y1, y2, y3 = y_settings
    terms = {
        "xxx": sharp_correlation(rho, (x1, x2, x3)),
        "xyy": sharp_correlation(rho, (x1, y2, y3)),
        "yxy": sharp_correlation(rho, (y1, x2, y3)),
        "yyx": sharp_correlation(rho, (y1, y2, x3)),
    }
    value = abs(sum(s * t for s, t in zip(signs, terms.values())))
    return InequalityReport("mermin", value, MERMIN_CLASSICAL, MERMIN_QUANTUM, "sharp", terms)


def _joint_pair_plans(
    povm1: JointPovm2, povm2: JointPovm2, third: tuple[Direction, Direction]
) -> tuple[MeasurementPlan, MeasurementPlan]:
    p1 = Joint2(povm1, ("x1", "y1"))
    p2 = Joint2(povm2, ("x2", "y2"))
    return (
        MeasurementPlan([p1, p2, Sharp(third[0], "x3")]),
        MeasurementPlan([p1, p2, Sharp(third[1], "y3")]),
    )


def mermin_joint_value(
    rho: DensityMatrix,
    povm1: JointPovm2,
    povm2: JointPovm2,
    third: tuple[Direction, Direction] = (X, Y),
) -> InequalityReport:
    """Mermin combination with joint measurements on parties 1 and 2.

    ``povm.a`` plays the x setting and ``povm.b`` the y setting. Party 3
    measures ``third[0]`` or ``third[1]`` sharply. On the GHZ state with x/y
    settings the value is ``(alpha1 + beta1)(alpha2 + beta2)``.
    """
    _check_qubits(rho, 3, "Mermin")
    plan_x3, plan_y3 = _joint_pair_plans(povm1, povm2, third)
    tx = outcome_table(rho, plan_x3)
    ty = outcome_table(rho, plan_y3)
    terms = {
        "xxx": correlation_from_table(tx, ("x1", "x2", "x3")),
        "xyy": correlation_from_table(ty, ("x1", "y2", "y3")),
        "yxy": correlation_from_table(ty, ("y1", "x2", "y3")),
        "yyx": correlation_from_table(tx, ("y1", "y2", "x3")),
    }
    value = abs(terms["xxx"] - terms["xyy"] - terms["yxy"] - terms["yyx"])
    return InequalityReport("mermin_joint", value, MERMIN_CLASSICAL, MERMIN_JOINT_CEILING, "joint-on-two", terms)


def mermin_joint_closed_form(alpha1: float, beta1: float, alpha2: float, beta2: float) -> float:
    return (alpha1 + beta1) * (alpha2 + beta2)


@dataclass(frozen=True)
class ProbabilityCheck:
    """Both sides of the probability-form Mermin-type inequalities on one plan.

    ``p_equal`` is ``p(a1 b2 = b1 a2)`` with party 3 measuring a3;
    ``p_anti`` is ``p(a1 a2 = -b1 b2)`` with party 3 measuring b3.
    """

    p_equal: float
    p_equal_split: tuple[float, float]
    half_abs_equal: float
    p_anti: float
    p_anti_split: tuple[float, float]
    half_abs_anti: float
    lhs_split: float
    lhs_combined: float
    complement: float
    complement_same_plan: float
    no_signaling_residual: float
    tol: float = DERIVED_TOL

    @property
    def checks(self) -> dict[str, bool]:
        t = self.tol
        return {
            "p_equal >= half |E + E|": self.p_equal >= self.half_abs_equal - t,
            "p_equal split is exact": abs(sum(self.p_equal_split) - self.p_equal) <= t,
            "|p(=a3) - p(=-a3)| = half |E + E|": abs(
                abs(self.p_equal_split[0] - self.p_equal_split[1]) - self.half_abs_equal
            ) <= t,
            "p_anti >= half |E - E|": self.p_anti >= self.half_abs_anti - t,
            "p_anti split is exact": abs(sum(self.p_anti_split) - self.p_anti) <= t,
            "|p(=b3) - p(=-b3)| = half |E - E|": abs(
                abs(self.p_anti_split[0] - self.p_anti_split[1]) - self.half_abs_anti
            ) <= t,
            "|E + E| + |E - E| <= 2": self.lhs_split <= 2.0 + t,
            "|E + E + E - E| <= 2": self.lhs_combined <= 2.0 + t,
            "complementary probabilities sum to 1": abs(self.complement - 1.0) <= t
            and abs(self.complement_same_plan - 1.0) <= t,
            "no signaling": self.no_signaling_residual <= t,
        }

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def mermin_type_probability_check(
    rho: DensityMatrix,
    povm1: JointPovm2,
    povm2: JointPovm2,
    a3: Direction,
    b3: Direction,
    tol: float = DERIVED_TOL,
) -> ProbabilityCheck:
    """Evaluate the probability chain behind the joint-measurement Mermin-type inequality.

    Party 1 jointly measures ``povm1.a``/``povm1.b`` (labels a1, b1), party 2
    ``povm2.a``/``povm2.b`` (a2, b2), party 3 measures a3 or b3 sharply.
    """
    _check_qubits(rho, 3, "Mermin-type check")
    p1 = Joint2(povm1, ("a1", "b1"))
    p2 = Joint2(povm2, ("a2", "b2"))
    ta = outcome_table(rho, MeasurementPlan([p1, p2, Sharp(a3, "a3")]))
    tb = outcome_table(rho, MeasurementPlan([p1, p2, Sharp(b3, "b3")]))

    p_equal = probability_from_table(ta, EQUAL_CROSS_PRODUCTS)
    split_equal = (
        probability_from_table(ta, "a1*b2 = b1*a2 = a3"),
        probability_from_table(ta, "a1*b2 = b1*a2 = -a3"),
    )
    e_ab_a = correlation_from_table(ta, ("a1", "b2", "a3"))
    e_ba_a = correlation_from_table(ta, ("b1", "a2", "a3"))

    p_anti = probability_from_table(tb, ANTI_EQUAL_PRODUCTS)
    split_anti = (
        probability_from_table(tb, "a1*a2 = -b1*b2 = b3"),
        probability_from_table(tb, "a1*a2 = -b1*b2 = -b3"),
    )
    e_aa_b = correlation_from_table(tb, ("a1", "a2", "b3"))
    e_bb_b = correlation_from_table(tb, ("b1", "b2", "b3"))

    return ProbabilityCheck(
        p_equal=p_equal,
        p_equal_split=split_equal,
        half_abs_equal=0.5 * abs(e_ab_a + e_ba_a),
        p_anti=p_anti,
        p_anti_split=split_anti,
        half_abs_anti=0.5 * abs(e_aa_b - e_bb_b),
        lhs_split=abs(e_ab_a + e_ba_a) + abs(e_aa_b - e_bb_b),
        lhs_combined=abs(e_ab_a + e_ba_a + e_aa_b - e_bb_b),
        complement=p_equal + p_anti,
        complement_same_plan=p_equal + probability_from_table(ta, ANTI_EQUAL_PRODUCTS),
        no_signaling_residual=max(
            no_signaling_check(rho, povm1, povm2, (a3, b3), EQUAL_CROSS_PRODUCTS),
            no_signaling_check(rho, povm1, povm2, (a3, b3), ANTI_EQUAL_PRODUCTS),
        ),
        tol=tol,
    )


def ghz2_value(correlator: Callable[[str, str, str], float]) -> float:
    """Average of the (x1 +/- y1) decomposition of the Mermin combination.

    ``correlator(s1, s2, s3)`` returns E for settings named 'x' or 'y' per party.
    """

    def rest(s1: str, sign: int) -> float:
        # x2 x3 - y2 y3 -/+ x2 y3 -/+ y2 x3
        return (
            correlator(s1, "x", "x")
            - correlator(s1, "y", "y")
            - sign * correlator(s1, "x", "y")
            - sign * correlator(s1, "y", "x")
        )

    plus = rest("x", 1) + rest("y", 1)  # (x1 + y1)(...)
    minus = rest("x", -1) - rest("y", -1)  # (x1 - y1)(...)
    return 0.5 * (plus + minus)


def _joint_on_one_value(
    rho: DensityMatrix, povm1: JointPovm2, party2: tuple[Direction, Direction], party3: tuple[Direction, Direction]
) -> float:
    entry1 = Joint2(povm1, ("x1", "y1"))
    entries2 = {s: Sharp(d, s + "2") for s, d in zip("xy", party2)}
    entries3 = {s: Sharp(d, s + "3") for s, d in zip("xy", party3)}
    tables = {
        s2 + s3: outcome_table(rho, MeasurementPlan([entry1, entries2[s2], entries3[s3]]))
        for s2 in "xy"
        for s3 in "xy"
    }

    def correlator(s1: str, s2: str, s3: str) -> float:
        return correlation_from_table(tables[s2 + s3], (s1 + "1", s2 + "2", s3 + "3"))

    return abs(ghz2_value(correlator))


def ghz_hierarchy(
    regime: str,
    *,
    budget: int | None = None,
    restarts: int = 2,
    seed: int = 0,
) -> float:
    """Largest value of the decomposed Mermin expression on the GHZ state in a regime.

    'sharp' evaluates x/y settings (4). 'joint-on-two' maximizes over feasible
    sharpness factors of x/y joint measurements on parties 1 and 2 (2).
    'joint-on-one' puts an x/y joint measurement on party 1 and maximizes
    numerically over its sharpness factors and the sharp settings of parties 2
    and 3 (2 sqrt 2).

    The default budget is 3000 evaluations for 'joint-on-one' and the search
    module default otherwise.
    """
    ghz = ghz_state()
    if regime == "sharp":

        def correlator(s1: str, s2: str, s3: str) -> float:
            d = {"x": X, "y": Y}
            return sharp_correlation(ghz, (d[s1], d[s2], d[s3]))

        return abs(ghz2_value(correlator))
    if regime == "joint-on-two":
        return search.maximize_joint_regime(
            "mermin_joint", budget=budget or search.DEFAULT_BUDGET, seed=seed
        ).best_value
    if regime == "joint-on-one":
        return optimize_joint_on_one(ghz, budget=budget or 3000, restarts=restarts, seed=seed).best_value
    raise ValueError(f"unknown regime {regime!r}; expected sharp, joint-on-one or joint-on-two")


def optimize_joint_on_one(
    rho: DensityMatrix,
    *,
    budget: int = search.DEFAULT_BUDGET,
    restarts: int = search.DEFAULT_RESTARTS,
    seed: int = 0,
) -> search.SearchResult:
    """Maximize over 4 sharp directions (parties 2, 3) plus (alpha, beta) of party 1's x/y joint POVM."""

    def project(p: np.ndarray) -> np.ndarray:
        out = p.copy()
        out[8], out[9] = search.project_busch_pair(p[8], p[9], X, Y)
        return out

    def objective(p: np.ndarray) -> float:
        dirs = search.directions_from_params(p, 4)
        povm = build_joint_povm2(p[8], X, p[9], Y)
        return _joint_on_one_value(rho, povm, (dirs[0], dirs[1]), (dirs[2], dirs[3]))

    return search.maximize(
        objective, 10, budget=budget, restarts=restarts, seed=seed, n_directions=4, project=project
    )


# --- Gisin ----------------------------------------------------------------


def _gisin_sum(coeffs: Mapping[tuple[str, str], int], correlator: Callable[[str, str], float]) -> tuple[float, dict]:
    terms = {f"{l1}{l2}": correlator(l1, l2) for (l1, l2) in coeffs}
    value = sum(c * terms[f"{l1}{l2}"] for (l1, l2), c in coeffs.items())
    return value, terms


def gisin3_value(
    rho: DensityMatrix,
    a1: Direction,
    b1: Direction,
    c1: Direction,
    a2: Direction,
    b2: Direction,
    c2: Direction,
) -> InequalityReport:
    """Nine-term correlation form of ``a1(a2+b2+c2) + b1(a2+b2-c2) + c1(a2-b2-c2) <= 5``."""
    _check_qubits(rho, 2, "Gisin")
    dirs = {"a1": a1, "b1": b1, "c1": c1, "a2": a2, "b2": b2, "c2": c2}
    value, terms = _gisin_sum(GISIN3_COEFFS, lambda l1, l2: sharp_correlation(rho, (dirs[l1], dirs[l2])))
    return InequalityReport("gisin3", value, GISIN3_CLASSICAL, None, "sharp", terms)


def gisin4_value(
    rho: DensityMatrix,
    a1: Direction,
    b1: Direction,
    c1: Direction,
    d1: Direction,
    a2: Direction,
    b2: Direction,
    c2: Direction,
) -> InequalityReport:
    """Twelve-term variant with the extra combination ``d1(a2 - b2 + c2)``; classical bound 6."""
    _check_qubits(rho, 2, "Gisin")
    dirs = {"a1": a1, "b1": b1, "c1": c1, "d1": d1, "a2": a2, "b2": b2, "c2": c2}
    value, terms = _gisin_sum(GISIN4_COEFFS, lambda l1, l2: sharp_correlation(rho, (dirs[l1], dirs[l2])))
    return InequalityReport("gisin4", value, GISIN4_CLASSICAL, None, "sharp", terms)


def gisin3_joint_value(
    rho: DensityMatrix,
    alpha: float,
    party1: Sequence[Direction] = GISIN_COPLANAR_PARTY1,
) -> InequalityReport:
    """Gisin-3 combination with party 2 jointly measuring a2, c2 and inferring b2 = a2 + c2.

    Uses the coplanar setup. ``alpha`` must not exceed 2/(1 + sqrt 3).
    """
    _check_qubits(rho, 2, "Gisin")
    a2, b2, c2 = GISIN_COPLANAR_PARTY2
    limit = max_symmetric_sharpness(a2, c2)
    if not 0.0 <= alpha <= limit + FEASIBILITY_TOL:
        raise InfeasibleMeasurementError(
            f"alpha={alpha!r} infeasible for directions 120 degrees apart (limit {limit!r})",
            margin=2.0 - 2.0 * alpha / limit,
        )
    alpha = min(alpha, limit)
    povm = build_joint_povm2(alpha, a2, alpha, c2)
    entry2 = Joint2WithInferred(povm, ("a2", "c2"), b2, "b2")
    tables = {
        label: outcome_table(rho, MeasurementPlan([Sharp(d, label), entry2]))
        for label, d in zip(("a1", "b1", "c1"), party1)
    }
    value, terms = _gisin_sum(GISIN3_COEFFS, lambda l1, l2: correlation_from_table(tables[l1], (l1, l2)))
    return InequalityReport("gisin3_joint", value, GISIN3_CLASSICAL, GISIN3_JOINT_CEILING, "joint-on-one", terms)


def gisin_xyz_joint_value(alpha: float, beta: float | None = None, gamma: float | None = None) -> float:
    """Twelve-term Gisin sum on the singlet with party 2 jointly measuring x, y, z.

    Party 1 uses the four directions antiparallel to ``x +/- y +/- z``. With
    ``beta = gamma = alpha`` the value is ``4 sqrt(3) alpha``.
    """
    beta = alpha if beta is None else beta
    gamma = alpha if gamma is None else gamma
    if not three_direction_condition(alpha, beta, gamma):
        raise InfeasibleMeasurementError(
            f"alpha^2 + beta^2 + gamma^2 = {alpha**2 + beta**2 + gamma**2!r} exceeds 1"
        )
    rho = singlet_state()
    povm = build_joint_povm3(alpha, beta, gamma, *XYZ_PARTY2)
    entry2 = Joint3(povm, ("a2", "b2", "c2"))
    tables = {
        label: outcome_table(rho, MeasurementPlan([Sharp(d, label), entry2]))
        for label, d in zip(("a1", "b1", "c1", "d1"), XYZ_PARTY1)
    }
    value, _ = _gisin_sum(GISIN4_COEFFS, lambda l1, l2: correlation_from_table(tables[l1], (l1, l2)))
    return value


def gisin_xyz_joint_report(alpha: float) -> InequalityReport:
    return InequalityReport(
        "gisin_xyz_joint", gisin_xyz_joint_value(alpha), GISIN4_CLASSICAL, GISIN_XYZ_JOINT_CEILING, "joint-on-one"
    )


# --- sharp-setting optimizers ---------------------------------------------


def optimize_chsh(rho: DensityMatrix, **kwargs) -> search.SearchResult:
    """Maximize CHSH over all four directions."""

    def objective(p: np.ndarray) -> float:
        return chsh_value(rho, *search.directions_from_params(p, 4)).value

    return search.maximize(objective, 8, n_directions=4, **kwargs)


def optimize_mermin(rho: DensityMatrix, **kwargs) -> search.SearchResult:
    """Maximize the Mermin combination over six directions (x and y setting per party)."""

    def objective(p: np.ndarray) -> float:
        d = search.directions_from_params(p, 6)
        return mermin_value(rho, d[0:3], d[3:6]).value

    return search.maximize(objective, 12, n_directions=6, **kwargs)


def optimize_gisin3_coplanar(rho: DensityMatrix, **kwargs) -> search.SearchResult:
    """Maximize Gisin-3 over six directions confined to the xy-plane.

    Each parameter is an azimuth in units of full turns.
    """

    def objective(p: np.ndarray) -> float:
        dirs = [Direction(math.cos(2 * math.pi * t), math.sin(2 * math.pi * t), 0.0) for t in p]
        return gisin3_value(rho, *dirs).value

    return search.maximize(objective, 6, **kwargs)
