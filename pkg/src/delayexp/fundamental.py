"""Fundamental matrix of the delay recursion and the A-conjugated sequence.

The fundamental matrix is the matrix solution of

    Phi(k+1) = A Phi(k) + B_k Phi(k-m),   k >= 0,
    Phi(k)   = A^k on k = -m..0,          Phi(k) = 0 for k <= -m-1.

Closed form: Phi(k) = A^k (I + sum_{d=1}^{l} P(k, d)) where P is built on
the conjugated sequence D_k = A^{-k-1} B_k A^{k-m} (see transform_D).

fundamental_phi evaluates that closed form layer by layer directly in
x-coordinates: with R(k, d) = A^k P(k, d) the layers obey

    R(k+1, d) = A R(k, d) + B_k R(k-m, d-1),   R(k, 0) = A^k,

which is the same nested-sum layer recurrence conjugated term by term.
Evaluating layers in x-coordinates avoids forming A^{+-k}-sized
intermediates, whose cancellation destroys all accuracy for horizons
beyond a few multiples of the delay (see ERRATA.md).  phi_oracle steps
the defining recursion directly and is the module's independent oracle.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from ._kernels import delay_layers
from .errors import DomainError, Overflow, SingularA
from .systems import DelaySystem, MatrixSequence, reciprocal_condition

INVERSE_CHECK_TOL = 1e-10


class PowerCache:
    """Memoized integer powers A^k for both signs.

    The inverse is computed once (pivoted LU via numpy) and verified:
    A A^{-1} must equal I entrywise to 1e-10, else SingularA.  Lookups are
    safe under concurrent readers; a lock keeps inserts idempotent.
    """

    def __init__(self, a: np.ndarray):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"PowerCache needs a square matrix, got shape {a.shape}")
        self.a = a
        try:
            self.a_inv = np.linalg.inv(a)
        except np.linalg.LinAlgError as exc:
            raise SingularA(f"A is not invertible: {exc}") from exc
        residual = np.abs(self.a @ self.a_inv - np.eye(a.shape[0])).max()
        if not residual < INVERSE_CHECK_TOL:
            raise SingularA(
                f"A A^-1 deviates from I by {residual:.3e} (tolerance {INVERSE_CHECK_TOL:.0e})"
            )
        self._powers = {0: np.eye(a.shape[0]), 1: a, -1: self.a_inv}
        self._lock = threading.Lock()

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    def power(self, k: int) -> np.ndarray:
        pows = self._powers
        if k in pows:
            return pows[k]
        with self._lock:
            if k in pows:
                return pows[k]
            base = self.a if k > 0 else self.a_inv
            step = 1 if k > 0 else -1
            # Walk from the nearest cached power toward k.
            j = k
            while j not in pows:
                j -= step
            value = pows[j]
            while j != k:
                value = base @ value
                j += step
                pows[j] = value
            return pows[k]


class TransformedMatrixSequence:
    """Lazy sequence D_k = A^{-k-1} B_k A^{k-m} (the A-conjugated coefficients).

    Not eventually constant in general, even for constant B, so members are
    generated on demand from the formula and memoized.
    """

    def __init__(self, powers: PowerCache, B: MatrixSequence, m: int):
        self._powers = powers
        self._B = B
        self.m = m
        self._cache: dict[int, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self._B.dim

    def lookup(self, k: int) -> np.ndarray:
        if k < 0:
            raise DomainError(f"TransformedMatrixSequence.lookup: index {k} < 0")
        got = self._cache.get(k)
        if got is None:
            got = self._powers.power(-k - 1) @ self._B.lookup(k) @ self._powers.power(k - self.m)
            self._cache[k] = got
        return got

    def stack(self, count: int) -> np.ndarray:
        out = np.empty((count, self.dim, self.dim))
        for k in range(count):
            out[k] = self.lookup(k)
        return out


def transform_D(A: np.ndarray, B: MatrixSequence, m: int) -> TransformedMatrixSequence:
    """Coefficient sequence of the equivalent undelayed-leading-term system.

    Substituting z(k) = A^{-k} x(k) turns the recursion into
    z(k+1) = z(k) + D_k z(k-m) + A^{-k-1} f(k) with these D_k.
    """
    return TransformedMatrixSequence(PowerCache(A), B, m)


@dataclass(frozen=True)
class FundamentalMatrix:
    """Phi(k) for -m-1 <= k <= k_max (and 0 below the stored range)."""

    m: int
    values: np.ndarray  # shape (k_max + m + 2, n, n); row i holds Phi(i - m - 1)

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def k_max(self) -> int:
        return self.values.shape[0] - self.m - 2

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def value(self, k: int) -> np.ndarray:
        if k < -self.m - 1:
            return np.zeros((self.dim, self.dim))
        if k > self.k_max:
            raise DomainError(f"fundamental matrix stores k <= {self.k_max}, got k={k}")
        return self.values[k + self.m + 1]

    def ks(self):
        return range(-self.m - 1, self.k_max + 1)


def _check_finite(values: np.ndarray, m: int, what: str) -> None:
    finite = np.isfinite(values).all(axis=tuple(range(1, values.ndim)))
    if not finite.all():
        bad = int(np.argmin(finite)) - m
        raise Overflow(f"{what} overflowed double precision at k={bad}", k=bad)


def fundamental_phi(system: DelaySystem, k_max: int) -> FundamentalMatrix:
    """Fundamental matrix from the closed nested-sum formula.

    Layers of A^k (I + sum_d P(k, d)) are accumulated in x-coordinates by
    the kernel; cost O(k_max * l_max * n^3).
    """
    if k_max < 0:
        raise DomainError(f"fundamental_phi requires k_max >= 0, got {k_max}")
    n, m = system.dim, system.m
    powers = PowerCache(system.A)
    init0 = np.empty((m + 1, n, n))
    for kappa in range(-m, 1):
        init0[kappa + m] = powers.power(kappa)
    b_stack = system.B.stack(k_max)
    v = delay_layers(system.A, b_stack, m, init0)  # (k_max+m+1, n, n), kappa=-m..k_max
    values = np.concatenate([np.zeros((1, n, n)), v], axis=0)
    _check_finite(values, m + 1, "fundamental matrix")
    return FundamentalMatrix(m=m, values=values)


def phi_oracle(system: DelaySystem, k_max: int) -> FundamentalMatrix:
    """Step the defining recursion Phi(k+1) = A Phi(k) + B_k Phi(k-m) directly."""
    if k_max < 0:
        raise DomainError(f"phi_oracle requires k_max >= 0, got {k_max}")
    n, m = system.dim, system.m
    powers = PowerCache(system.A)
    values = np.zeros((k_max + m + 2, n, n))
    for k in range(-m, 1):
        values[k + m + 1] = powers.power(k)
    for k in range(0, k_max):
        nxt = system.A @ values[k + m + 1] + system.B.lookup(k) @ values[k + 1]
        if not np.all(np.isfinite(nxt)):
            raise Overflow(f"fundamental matrix overflowed double precision at k={k + 1}", k=k + 1)
        values[k + m + 2] = nxt
    return FundamentalMatrix(m=m, values=values)
