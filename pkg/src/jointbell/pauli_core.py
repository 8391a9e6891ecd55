"""Dense spin-1/2 linear algebra for one to three qubits.

Operators are plain complex ``numpy`` arrays. States are wrapped in
:class:`DensityMatrix`, which validates on construction. Party order in every
tensor product is left to right, party 1 first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

STRUCTURAL_TOL = 1e-12
DERIVED_TOL = 1e-10
MAX_QUBITS = 3

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

for _m in (I2, SIGMA_X, SIGMA_Y, SIGMA_Z):
    _m.setflags(write=False)


class NormalizationError(ValueError):
    """A vector that should be a unit direction is not."""


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class Direction:
    """Unit vector on the Bloch sphere.

    Use :meth:`from_vector` to normalize an arbitrary non-zero 3-vector; the
    plain constructor insists on unit length.
    """

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        norm2 = self.x * self.x + self.y * self.y + self.z * self.z
        if not math.isfinite(norm2) or abs(norm2 - 1.0) > STRUCTURAL_TOL:
            raise NormalizationError(
                f"direction ({self.x}, {self.y}, {self.z}) has squared norm {norm2!r}, expected 1"
            )

    @classmethod
    def from_vector(cls, v: Iterable[float]) -> Direction:
        arr = np.asarray(list(v), dtype=float)
        if arr.shape != (3,):
            raise DimensionError(f"direction needs 3 components, got shape {arr.shape}")
        norm = float(np.linalg.norm(arr))
        if not math.isfinite(norm) or norm < 1e-15:
            raise NormalizationError(f"cannot normalize vector {arr.tolist()}")
        arr = arr / norm
        return cls(*arr)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> Direction:
        st = math.sin(theta)
        return cls(st * math.cos(phi), st * math.sin(phi), math.cos(theta))

    def angles(self) -> tuple[float, float]:
        """Polar angle in [0, pi] and azimuth in [0, 2 pi)."""
        theta = math.atan2(math.hypot(self.x, self.y), self.z)
        phi = math.atan2(self.y, self.x) % (2 * math.pi)
        if phi >= 2 * math.pi:  # -tiny % 2pi rounds up to 2pi
            phi = 0.0
        return theta, phi

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other: Direction) -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def __neg__(self) -> Direction:
        return Direction(-self.x, -self.y, -self.z)


X = Direction(1.0, 0.0, 0.0)
Y = Direction(0.0, 1.0, 0.0)
Z = Direction(0.0, 0.0, 1.0)


def as_vector(d: Direction | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(d, Direction):
        return d.vector
    arr = np.asarray(d, dtype=float)
    if arr.shape != (3,):
        raise DimensionError(f"expected a 3-vector, got shape {arr.shape}")
    return arr


def sigma_dot(v: Sequence[float] | np.ndarray) -> np.ndarray:
    """``v . sigma`` for an arbitrary real 3-vector (no unit check)."""
    vx, vy, vz = (float(c) for c in v)
    return np.array([[vz, vx - 1j * vy], [vx + 1j * vy, -vz]], dtype=complex)


def bloch_observable(d: Direction | Sequence[float] | np.ndarray) -> np.ndarray:
    """Spin observable ``d . sigma`` with eigenvalues +1 and -1.

    Raises
    ------
    NormalizationError
        If ``d`` is not a unit vector to within 1e-12 in squared norm.
    """
    v = as_vector(d)
    norm2 = float(v @ v)
    if abs(norm2 - 1.0) > STRUCTURAL_TOL:
        raise NormalizationError(f"direction {v.tolist()} is not a unit vector")
    return sigma_dot(v)


def tensor(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product in party order (first operand acts on party 1)."""
    ops = list(ops)
    if not ops:
        raise ValueError("tensor needs at least one operand")
    return reduce(_kron, (np.asarray(op, dtype=complex) for op in ops))


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.kron without its generic-shape overhead; operands are square matrices
    n, m = a.shape[0], b.shape[0]
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(n * m, n * m)


def is_hermitian(op: np.ndarray, tol: float = STRUCTURAL_TOL) -> bool:
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.allclose(op, op.conj().T, rtol=0, atol=tol)


def _check_hermitian(op: np.ndarray) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DimensionError(f"operator must be square, got shape {op.shape}")
    if not is_hermitian(op):
        raise NotHermitianError("operator is not Hermitian within 1e-12")
    return op


def eigenvalues(op: np.ndarray) -> np.ndarray:
    """Ascending real eigenvalues of a small Hermitian matrix."""
    op = _check_hermitian(op)
    if op.shape == (1, 1):
        return np.array([op[0, 0].real])
    if op.shape == (2, 2):
        # closed form: mean +/- sqrt(half-difference^2 + |off-diagonal|^2)
        a, d = op[0, 0].real, op[1, 1].real
        mean = 0.5 * (a + d)
        radius = math.hypot(0.5 * (a - d), abs(op[0, 1]))
        return np.array([mean - radius, mean + radius])
    return np.linalg.eigvalsh(op)


def min_eigenvalue(op: np.ndarray) -> float:
    return float(eigenvalues(op)[0])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """An n-qubit state (n <= 3) as a validated 2^n x 2^n matrix."""

    matrix: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {m.shape}")
        n = int(round(math.log2(m.shape[0]))) if m.shape[0] > 0 else -1
        if n < 1 or 2**n != m.shape[0] or n > MAX_QUBITS:
            raise DimensionError(f"dimension {m.shape[0]} is not 2^n for 1 <= n <= {MAX_QUBITS}")
        if not is_hermitian(m):
            raise NotHermitianError("density matrix is not Hermitian within 1e-12")
        tr = np.trace(m).real
        if abs(tr - 1.0) > STRUCTURAL_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        if float(np.linalg.eigvalsh(m)[0]) < -DERIVED_TOL:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "n_qubits", n)

    @classmethod
    def from_ket(cls, ket: Sequence[complex] | np.ndarray) -> DensityMatrix:
        psi = np.asarray(ket, dtype=complex).reshape(-1)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


def expectation(rho: DensityMatrix, op: np.ndarray) -> float:
    """``trace(rho op)`` as a real number.

    Raises
    ------
    DimensionError
        If the operator does not act on the state's Hilbert space.
    ValueError
        If the trace has an imaginary part above 1e-10 (operator not Hermitian).
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != rho.matrix.shape:
        raise DimensionError(f"operator shape {op.shape} does not match state shape {rho.matrix.shape}")
    val = np.einsum("ij,ji->", rho.matrix, op)
    if abs(val.imag) > DERIVED_TOL:
        raise ValueError(f"expectation has imaginary part {val.imag!r}")
    return float(val.real)


def singlet_state() -> DensityMatrix:
    """(|+-> - |-+>)/sqrt(2) in the sigma_z basis."""
    ket = np.zeros(4, dtype=complex)
    ket[0b01] = 1 / math.sqrt(2)
    ket[0b10] = -1 / math.sqrt(2)
    return DensityMatrix.from_ket(ket)


def ghz_state() -> DensityMatrix:
    """(|+++> + |--->)/sqrt(2) in the sigma_z basis."""
    ket = np.zeros(8, dtype=complex)
    ket[0] = ket[7] = 1 / math.sqrt(2)
    return DensityMatrix.from_ket(ket)


def maximally_mixed(n_qubits: int) -> DensityMatrix:
    _check_qubits(n_qubits)
    d = 2**n_qubits
    return DensityMatrix(np.eye(d, dtype=complex) / d)


def product_state(directions: Sequence[Direction]) -> DensityMatrix:
    """Pure product state with each qubit's Bloch vector along the given direction."""
    return DensityMatrix(tensor([0.5 * (I2 + bloch_observable(d)) for d in directions]))


def _check_qubits(n_qubits: int) -> None:
    if n_qubits not in (1, 2, 3):
        raise ValueError(f"unsupported qubit count {n_qubits}; expected 1, 2 or 3")


def random_pure_state(n_qubits: int, seed: int | None = None) -> DensityMatrix:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    _check_qubits(n_qubits)
    rng = np.random.default_rng(seed)
    d = 2**n_qubits
    ket = rng.normal(size=d) + 1j * rng.normal(size=d)
    return DensityMatrix.from_ket(ket)


def random_mixed_state(n_qubits: int, seed: int | None = None, rank: int | None = None) -> DensityMatrix:
    """Random mixed state ``G G^dagger / tr`` from a Ginibre matrix ``G``."""
    _check_qubits(n_qubits)
    rng = np.random.default_rng(seed)
    d = 2**n_qubits
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m / np.trace(m).real)


def random_direction(rng: np.random.Generator) -> Direction:
    """Direction drawn uniformly on the sphere."""
    while True:
        v = rng.normal(size=3)
        if np.linalg.norm(v) > 1e-8:
            return Direction.from_vector(v)


def partial_trace(rho: DensityMatrix | np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced matrix on the parties listed in ``keep`` (0-based, kept in order).

    Accepts unnormalized operators, which the conditional-state update relies on.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    n = int(round(math.log2(m.shape[0])))
    keep = sorted(keep)
    t = m.reshape([2] * (2 * n))
    letters = "abcdefghijkl"
    rows = list(letters[:n])
    cols = list(letters[n : 2 * n])
    for q in range(n):
        if q not in keep:
            cols[q] = rows[q]
    out = "".join(rows[q] for q in keep) + "".join(cols[q] for q in keep)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    d = 2 ** len(keep)
    return reduced.reshape(d, d)
