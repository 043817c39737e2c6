"""Trajectory solvers: direct recursion (oracle) and the representation formula.

solve_recursion steps the defining recursion and is the ground truth every
closed-form result is compared against.

The representation solvers evaluate the variation-of-constants formula

    x(k) =  X(k, 0) A^m phi(-m)
          + sum_{j=-m+1}^{0} X(k, m+j) A^m (phi(j) - A phi(j-1))
          + sum_{j=1}^{k}    X(k, m+j) A^m f(j-1),

where X(k, s) is the fundamental family re-based at start s: the matrix
solution of X(k+1, s) = A X(k, s) + B_k X(k-m, s) for k >= s with
X(k, s) = A^{k-s} on k = s-m..s and 0 below.  Equivalently
X(k, s) = A^{k-s} e_s(k-s) with e_s the delayed exponential of the
conjugated coefficient sequence shifted by s.  When {B_k} is constant,
X(k, s) = Phi(k-s) and the formula collapses to the familiar
one-parameter superposition; for time-varying coefficients the re-basing
is what makes the superposition solve the recursion (see ERRATA.md).

Each X(., m+j)-term acts on a single fixed vector, so it is evaluated by
the vector layer recurrence via the kernel backend, in x-coordinates,
with no negative powers of A beyond A^{-m}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import delay_layers
from .errors import DomainError, Overflow, ShapeMismatch
from .fundamental import PowerCache
from .systems import DelaySystem, Trajectory


def solve_recursion(system: DelaySystem, k_max: int) -> Trajectory:
    """Step x(k+1) = A x(k) + B_k x(k-m) + f(k) from the initial function."""
    if k_max < 0:
        raise DomainError(f"solve_recursion requires k_max >= 0, got {k_max}")
    n, m = system.dim, system.m
    states = np.zeros((k_max + m + 1, n))
    states[0 : m + 1] = system.phi.values
    for k in range(k_max):
        nxt = system.A @ states[k + m] + system.B.lookup(k) @ states[k] + system.f.lookup(k)
        if not np.all(np.isfinite(nxt)):
            raise Overflow(f"trajectory overflowed double precision at k={k + 1}", k=k + 1)
        states[k + m + 1] = nxt
    return Trajectory(m=m, states=states)


def _rep_trajectory(
    system: DelaySystem,
    k_max: int,
    include_forcing: bool,
    corrupt_initial_sign: bool = False,
) -> Trajectory:
    """Shared evaluation of the representation formula.

    corrupt_initial_sign flips the first term's weight to A^{-m} phi(-m);
    it exists purely as a mutation hook for negative testing of the check
    pipeline and must stay False in production use.
    """
    if k_max < 0:
        raise DomainError(f"representation solver requires k_max >= 0, got {k_max}")
    n, m = system.dim, system.m
    powers = PowerCache(system.A)
    a_m = powers.power(m)

    # Weight vectors g_s = A^m w_s, one per start s; s = 0..m come from the
    # initial function, s = m+j for j >= 1 carry the forcing value f(j-1).
    phi = system.phi.values
    initial_power = powers.power(-m) if corrupt_initial_sign else a_m
    weights = [initial_power @ phi[0]]
    for j in range(-m + 1, 1):
        weights.append(a_m @ (phi[j + m] - system.A @ phi[j + m - 1]))
    if include_forcing:
        for j in range(1, k_max + 1):
            weights.append(a_m @ system.f.lookup(j - 1))

    states = np.zeros((k_max + m + 1, n))
    neg_powers = np.stack([powers.power(kappa) for kappa in range(-m, 1)])
    for s, g in enumerate(weights):
        if not np.any(g):
            continue
        horizon = max(k_max - s, 0)
        init0 = np.ascontiguousarray((neg_powers @ g)[:, :, None])  # A^kappa g, kappa=-m..0
        b_stack = system.B.shifted(s).stack(horizon)
        v = delay_layers(system.A, b_stack, m, init0)[:, :, 0]
        # v[kappa+m] = X(s+kappa, s) g; accumulate x(k) += v(k-s).
        lo_k = max(s - m, -m)
        states[lo_k + m : k_max + m + 1] += v[lo_k - s + m : k_max - s + m + 1]
    finite = np.isfinite(states).all(axis=1)
    if not finite.all():
        bad = int(np.argmin(finite)) - m
        raise Overflow(f"representation overflowed double precision at k={bad}", k=bad)
    return Trajectory(m=m, states=states)


def solve_homogeneous_rep(system: DelaySystem, k_max: int) -> Trajectory:
    """Representation-formula solution of the homogeneous problem (f = 0)."""
    if not system.f.is_zero():
        raise DomainError("solve_homogeneous_rep requires f = 0; use solve_nonhomogeneous_rep")
    return _rep_trajectory(system, k_max, include_forcing=False)


def solve_nonhomogeneous_rep(system: DelaySystem, k_max: int) -> Trajectory:
    """Representation-formula solution including the forcing sum."""
    return _rep_trajectory(system, k_max, include_forcing=True)


def to_z_trajectory(system: DelaySystem, x: Trajectory) -> Trajectory:
    """z(k) = A^{-k} x(k): coordinates in which the leading term is the identity."""
    if x.dim != system.dim:
        raise ShapeMismatch(f"trajectory dimension {x.dim} != system dimension {system.dim}")
    powers = PowerCache(system.A)
    states = np.stack([powers.power(-k) @ x.value(k) for k in x.ks()])
    if not np.all(np.isfinite(states)):
        raise Overflow("z-transform overflowed double precision")
    return Trajectory(m=x.m, states=states)


def from_z_trajectory(system: DelaySystem, z: Trajectory) -> Trajectory:
    """Inverse of to_z_trajectory: x(k) = A^k z(k)."""
    if z.dim != system.dim:
        raise ShapeMismatch(f"trajectory dimension {z.dim} != system dimension {system.dim}")
    powers = PowerCache(system.A)
    states = np.stack([powers.power(k) @ z.value(k) for k in z.ks()])
    if not np.all(np.isfinite(states)):
        raise Overflow("z-transform overflowed double precision")
    return Trajectory(m=z.m, states=states)


@dataclass(frozen=True)
class ComparisonReport:
    """Per-step error metrics between two trajectories over k = -m..k_max.

    Relative error is measured against max(1, ||b(k)||_inf) so trajectories
    passing through zero do not produce spurious failures.
    """

    m: int
    tol: float
    abs_err: np.ndarray  # per k, max over components
    rel_err: np.ndarray

    def __post_init__(self):
        self.abs_err.setflags(write=False)
        self.rel_err.setflags(write=False)

    @property
    def k_max(self) -> int:
        return self.abs_err.shape[0] - self.m - 1

    def ks(self):
        return range(-self.m, self.k_max + 1)

    @property
    def max_abs_err(self) -> float:
        return float(self.abs_err.max())

    @property
    def max_rel_err(self) -> float:
        return float(self.rel_err.max())

    @property
    def passed(self) -> bool:
        return bool(self.max_rel_err <= self.tol)

    @property
    def first_fail_k(self):
        bad = np.nonzero(self.rel_err > self.tol)[0]
        return int(bad[0]) - self.m if bad.size else None


def compare(a: Trajectory, b: Trajectory, tol: float) -> ComparisonReport:
    """Entrywise error report between trajectories a and b (b is the reference)."""
    if a.m != b.m or a.k_max != b.k_max or a.dim != b.dim:
        raise ShapeMismatch(
            f"cannot compare trajectories: (m={a.m}, k_max={a.k_max}, n={a.dim}) vs "
            f"(m={b.m}, k_max={b.k_max}, n={b.dim})"
        )
    if not tol > 0:
        raise DomainError(f"comparison tolerance must be > 0, got {tol}")
    diff = np.abs(a.states - b.states).max(axis=1)
    scale = np.maximum(1.0, np.abs(b.states).max(axis=1))
    return ComparisonReport(m=a.m, tol=tol, abs_err=diff, rel_err=diff / scale)
