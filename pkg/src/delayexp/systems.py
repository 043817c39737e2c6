"""Core data model: delay systems, coefficient sequences, trajectories.

All types are immutable after construction (arrays are copied and locked),
so instances can be shared freely across threads.  Construction is
validation: a successfully built object satisfies its invariants.

The system solved throughout the package is the pure delay recursion

    x(k+1) = A x(k) + B_k x(k-m) + f(k),   k = 0, 1, 2, ...
    x(k)   = phi(k),                        k = -m, ..., 0,

with square A (invertible), delay m >= 1, an eventually-constant matrix
sequence {B_k}, forcing f and initial function phi.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadDelay,
    DimensionMismatch,
    DomainError,
    NonFiniteEntry,
    SingularA,
)

DEFAULT_RCOND_THRESHOLD = 1e-12


def _frozen_array(values, name, shape=None, dtype=float):
    """Copy ``values`` into a locked float array, checking finiteness."""
    arr = np.array(values, dtype=dtype)
    if shape is not None and arr.shape != shape:
        raise DimensionMismatch(f"{name}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"{name}: contains NaN or infinite entries")
    arr.setflags(write=False)
    return arr


def as_square_matrix(values, name="matrix", dim=None):
    """Validate ``values`` as a finite square n x n float matrix."""
    arr = np.array(values, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name}: expected a square matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"{name}: expected {dim}x{dim}, got {arr.shape[0]}x{arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry(f"{name}: contains NaN or infinite entries")
    arr.setflags(write=False)
    return arr


def reciprocal_condition(a: np.ndarray) -> float:
    """1-norm reciprocal condition estimate of ``a`` (0.0 if not invertible)."""
    try:
        a_inv = np.linalg.inv(a)
    except np.linalg.LinAlgError:
        return 0.0
    denom = np.linalg.norm(a, 1) * np.linalg.norm(a_inv, 1)
    if not np.isfinite(denom) or denom == 0.0:
        return 0.0
    return 1.0 / denom


@dataclass(frozen=True, eq=False)
class MatrixSequence:
    """Eventually-constant family {M_k}: prefix for k < len(prefix), tail after.

    lookup(k) is total for every k >= 0, which is what makes desk-scale
    experiments over arbitrary horizons possible with finite data.
    """

    prefix: tuple
    tail: np.ndarray

    def __post_init__(self):
        tail = as_square_matrix(self.tail, "tail")
        object.__setattr__(self, "tail", tail)
        n = tail.shape[0]
        checked = tuple(
            as_square_matrix(mat, f"prefix[{i}]", dim=n) for i, mat in enumerate(self.prefix)
        )
        object.__setattr__(self, "prefix", checked)

    @classmethod
    def constant(cls, matrix) -> "MatrixSequence":
        return cls(prefix=(), tail=matrix)

    @classmethod
    def zero(cls, dim: int) -> "MatrixSequence":
        return cls(prefix=(), tail=np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.tail.shape[0]

    def lookup(self, k: int) -> np.ndarray:
        if k < 0:
            raise DomainError(f"MatrixSequence.lookup: index {k} < 0")
        if k < len(self.prefix):
            return self.prefix[k]
        return self.tail

    def shifted(self, s: int) -> "MatrixSequence":
        """The sequence k -> M_{k+s}; still eventually constant."""
        if s < 0:
            raise DomainError(f"MatrixSequence.shifted: shift {s} < 0")
        return MatrixSequence(prefix=self.prefix[s:], tail=self.tail)

    def stack(self, count: int) -> np.ndarray:
        """Materialize the first ``count`` members as a (count, n, n) array."""
        out = np.empty((count, self.dim, self.dim))
        for k in range(count):
            out[k] = self.lookup(k)
        return out

    def is_constant(self) -> bool:
        return all(np.array_equal(mat, self.tail) for mat in self.prefix)

    def __eq__(self, other):
        if not isinstance(other, MatrixSequence):
            return NotImplemented
        return (
            len(self.prefix) == len(other.prefix)
            and all(np.array_equal(a, b) for a, b in zip(self.prefix, other.prefix))
            and np.array_equal(self.tail, other.tail)
        )


@dataclass(frozen=True, eq=False)
class VectorSequence:
    """Eventually-constant family {v_k} of n-vectors; tail defaults to zero."""

    prefix: tuple
    tail: np.ndarray

    def __post_init__(self):
        tail = _frozen_array(self.tail, "tail")
        if tail.ndim != 1:
            raise DimensionMismatch(f"tail: expected a vector, got shape {tail.shape}")
        object.__setattr__(self, "tail", tail)
        n = tail.shape[0]
        checked = tuple(
            _frozen_array(vec, f"prefix[{i}]", shape=(n,)) for i, vec in enumerate(self.prefix)
        )
        object.__setattr__(self, "prefix", checked)

    @classmethod
    def zero(cls, dim: int) -> "VectorSequence":
        return cls(prefix=(), tail=np.zeros(dim))

    @classmethod
    def constant(cls, vector) -> "VectorSequence":
        return cls(prefix=(), tail=vector)

    @property
    def dim(self) -> int:
        return self.tail.shape[0]

    def lookup(self, k: int) -> np.ndarray:
        if k < 0:
            raise DomainError(f"VectorSequence.lookup: index {k} < 0")
        if k < len(self.prefix):
            return self.prefix[k]
        return self.tail

    def is_zero(self) -> bool:
        return not np.any(self.tail) and not any(np.any(v) for v in self.prefix)

    def __eq__(self, other):
        if not isinstance(other, VectorSequence):
            return NotImplemented
        return (
            len(self.prefix) == len(other.prefix)
            and all(np.array_equal(a, b) for a, b in zip(self.prefix, other.prefix))
            and np.array_equal(self.tail, other.tail)
        )


@dataclass(frozen=True, eq=False)
class InitialFunction:
    """Initial data phi on k = -m, ..., 0 (exactly m+1 vectors)."""

    m: int
    values: np.ndarray  # shape (m+1, n), row i holds phi(i - m)

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise BadDelay(f"delay m must be a positive integer, got {self.m!r}")
        values = _frozen_array(self.values, "phi")
        if values.ndim != 2:
            raise DimensionMismatch(f"phi: expected (m+1, n) array, got shape {values.shape}")
        if values.shape[0] != self.m + 1:
            raise DimensionMismatch(
                f"phi: need m+1 = {self.m + 1} vectors for k = -m..0, got {values.shape[0]}"
            )
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def value(self, k: int) -> np.ndarray:
        """phi(k) for -m <= k <= 0."""
        if not -self.m <= k <= 0:
            raise DomainError(f"phi is defined on -m..0, got k={k}")
        return self.values[k + self.m]

    def __eq__(self, other):
        if not isinstance(other, InitialFunction):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class DelaySystem:
    """Validated Cauchy problem data (A, m, {B_k}, f, phi).

    Construction performs full validation; see validate_system for the
    checks and the error types raised.
    """

    A: np.ndarray
    m: int
    B: MatrixSequence
    f: VectorSequence
    phi: InitialFunction
    rcond_threshold: float = field(default=DEFAULT_RCOND_THRESHOLD, compare=False)

    def __post_init__(self):
        a = as_square_matrix(self.A, "A")
        object.__setattr__(self, "A", a)
        if not isinstance(self.m, int) or self.m < 1:
            raise BadDelay(f"delay m must be a positive integer, got {self.m!r}")
        n = a.shape[0]
        if self.B.dim != n:
            raise DimensionMismatch(f"B: dimension {self.B.dim} != A dimension {n}")
        if self.f.dim != n:
            raise DimensionMismatch(f"f: dimension {self.f.dim} != A dimension {n}")
        if self.phi.dim != n:
            raise DimensionMismatch(f"phi: dimension {self.phi.dim} != A dimension {n}")
        if self.phi.m != self.m:
            raise DimensionMismatch(
                f"phi: covers delay {self.phi.m}, system delay is {self.m}"
            )
        rc = reciprocal_condition(a)
        if not rc > self.rcond_threshold:
            raise SingularA(
                f"A failed the invertibility check: reciprocal condition estimate "
                f"{rc:.3e} is not above the threshold {self.rcond_threshold:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DelaySystem):
            return NotImplemented
        return (
            np.array_equal(self.A, other.A)
            and self.m == other.m
            and self.B == other.B
            and self.f == other.f
            and self.phi == other.phi
        )


def validate_system(candidate, rcond_threshold: float = DEFAULT_RCOND_THRESHOLD) -> DelaySystem:
    """Validate raw system data (or re-validate a DelaySystem).

    Accepts an existing DelaySystem (idempotent: returns an equal system)
    or a mapping with keys A, m, B, f, phi as produced by sysio.

    Raises DimensionMismatch, SingularA, BadDelay or NonFiniteEntry.
    """
    if isinstance(candidate, DelaySystem):
        return DelaySystem(
            A=candidate.A,
            m=candidate.m,
            B=candidate.B,
            f=candidate.f,
            phi=candidate.phi,
            rcond_threshold=rcond_threshold,
        )
    if isinstance(candidate, dict):
        from .sysio import system_from_dict

        return system_from_dict(candidate, rcond_threshold=rcond_threshold)
    raise DomainError(
        f"validate_system expects a DelaySystem or a mapping, got {type(candidate).__name__}"
    )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Dense solution values on k = -m, ..., k_max.

    states[i] holds x(i - m); all entries are finite by construction
    (solvers report Overflow instead of storing Inf/NaN).
    """

    m: int
    states: np.ndarray  # shape (m + 1 + k_max, n)

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise BadDelay(f"delay m must be a positive integer, got {self.m!r}")
        states = _frozen_array(self.states, "states")
        if states.ndim != 2 or states.shape[0] < self.m + 1:
            raise DimensionMismatch(
                f"states: expected at least m+1 = {self.m + 1} rows, got shape {states.shape}"
            )
        object.__setattr__(self, "states", states)

    @property
    def k_max(self) -> int:
        return self.states.shape[0] - self.m - 1

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def value(self, k: int) -> np.ndarray:
        if not -self.m <= k <= self.k_max:
            raise DomainError(f"trajectory stores k = {-self.m}..{self.k_max}, got k={k}")
        return self.states[k + self.m]

    def ks(self):
        return range(-self.m, self.k_max + 1)

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.states, other.states)
