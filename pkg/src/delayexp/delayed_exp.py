"""Delayed matrix exponential for a sequence of (non-commuting) matrices.

The building block is the depth-d nested sum

    P(k, d) = sum_{j1=(d-1)(m+1)}^{k-1} D_{j1}
              sum_{j2=(d-1)(m+1)}^{j1}  D_{j2-(m+1)}
              ...
              sum_{jd=(d-1)(m+1)}^{j_{d-1}} D_{jd-(d-1)(m+1)},

an ordered product over chains of sequence indices that descend by at
least m+1 per factor.  Conventions making every formula total:
P(k, 0) = I for all k, and P(k, d) = 0 for d >= 1 when the outer sum is
empty (k <= (d-1)(m+1)).

The delayed exponential is then

    e(k) = 0                                   for k <= -m-1,
    e(k) = I                                   for -m <= k <= 0,
    e(k) = I + sum_{d=1}^{l} P(k, d)           for k in block l,

where block l covers k = (l-1)(m+1)+1 .. l(m+1).  It satisfies the
difference relation e(k+1) - e(k) = D_k e(k-m) for every k >= 0.

Two independent evaluators are provided: p_direct enumerates the nested
sums literally (reference/oracle, exponential cost, budget-guarded) and
p_table fills the whole grid by the layer recurrence

    P(k+1, d) = P(k, d) + D_k P(k-m, d-1)

in O(k_max * l_max * n^3) via the selected kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from ._kernels import fill_p_table
from .errors import DomainError, NegativeInnerIndex, Overflow, WorkBudgetExceeded

DEFAULT_TERM_BUDGET = 10**7


def block_index(k: int, m: int) -> int:
    """The unique l >= 1 with (l-1)(m+1)+1 <= k <= l(m+1); l = ceil(k/(m+1))."""
    if k < 1:
        raise DomainError(f"block_index requires k >= 1, got k={k}")
    if m < 1:
        raise DomainError(f"block_index requires m >= 1, got m={m}")
    return -(-k // (m + 1))


def nested_sum_term_count(m: int, k: int, d: int) -> int:
    """Closed-form count of index tuples in P(k, d): C(k-(d-1)m, d)."""
    top = k - (d - 1) * m
    if top < d:
        return 0
    return comb(top, d)


def p_direct(
    D,
    m: int,
    k: int,
    d: int,
    max_terms: int = DEFAULT_TERM_BUDGET,
) -> np.ndarray:
    """Literal nested-sum evaluation of P(k, d).

    Reference implementation: cost grows combinatorially with d, so it is
    guarded by ``max_terms`` and intended for cross-checking p_table, not
    for production paths.  D is any sequence object with .dim and
    .lookup(k).
    """
    n = D.dim
    if d < 0:
        raise DomainError(f"p_direct requires d >= 0, got d={d}")
    if d == 0:
        return np.eye(n)
    if k < 0:
        raise DomainError(f"p_direct requires k >= 0 when d >= 1, got k={k}")
    lo = (d - 1) * (m + 1)
    if k - 1 < lo:
        return np.zeros((n, n))
    count = nested_sum_term_count(m, k, d)
    if count > max_terms:
        raise WorkBudgetExceeded(
            f"p_direct(k={k}, d={d}, m={m}) needs {count} index tuples "
            f"(budget {max_terms})"
        )

    def factor(depth: int, j: int) -> np.ndarray:
        idx = j - (depth - 1) * (m + 1)
        if idx < 0:
            raise NegativeInnerIndex(
                f"nested sum asked for D at index {idx} (depth {depth}, j={j})"
            )
        return D.lookup(idx)

    def tail_sum(depth: int, upper: int) -> np.ndarray:
        # sum_{j=lo}^{upper} D_{j-(depth-1)(m+1)} * (next depth, bounded by j)
        acc = np.zeros((n, n))
        for j in range(lo, upper + 1):
            fac = factor(depth, j)
            acc += fac if depth == d else fac @ tail_sum(depth + 1, j)
        return acc

    return tail_sum(1, k - 1)


def nested_sum_count(m: int, k: int, d: int) -> int:
    """Number of index tuples in P(k, d), by explicit enumeration.

    Equals C(k-(d-1)m, d); kept as the enumeration so the closed form can
    be verified against it.
    """
    if d < 1:
        raise DomainError(f"nested_sum_count requires d >= 1, got d={d}")
    if m < 1:
        raise DomainError(f"nested_sum_count requires m >= 1, got m={m}")
    lo = (d - 1) * (m + 1)

    def count(depth: int, upper: int) -> int:
        if depth == d:
            return max(0, upper - lo + 1)
        return sum(count(depth + 1, j) for j in range(lo, upper + 1))

    return count(1, k - 1)


@dataclass(frozen=True)
class PTable:
    """All P(k, d) cells for 0 <= k <= k_max, 0 <= d <= l_max, plus lookups."""

    m: int
    k_max: int
    cells: np.ndarray  # shape (k_max+1, l_max+1, n, n), read-only

    def __post_init__(self):
        self.cells.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.cells.shape[2]

    @property
    def l_max(self) -> int:
        return self.cells.shape[1] - 1

    def p(self, k: int, d: int) -> np.ndarray:
        """P(k, d) honoring the boundary conventions for any k, d >= 0."""
        n = self.dim
        if d < 0:
            raise DomainError(f"PTable.p requires d >= 0, got d={d}")
        if d == 0:
            return np.eye(n)
        if k <= (d - 1) * (self.m + 1):
            return np.zeros((n, n))
        if k > self.k_max or d > self.l_max:
            raise DomainError(
                f"PTable covers k <= {self.k_max}, d <= {self.l_max}; got (k={k}, d={d})"
            )
        return self.cells[k, d]

    def exp_value(self, k: int) -> np.ndarray:
        """Delayed exponential e(k) read off the table (any k <= k_max)."""
        n = self.dim
        if k <= -self.m - 1:
            return np.zeros((n, n))
        if k <= 0:
            return np.eye(n)
        if k > self.k_max:
            raise DomainError(f"PTable covers k <= {self.k_max}, got k={k}")
        return np.eye(n) + self.cells[k, 1:].sum(axis=0)


def p_table(D, m: int, k_max: int) -> PTable:
    """Fill the whole P grid by the layer recurrence (dynamic programming)."""
    if k_max < 0:
        raise DomainError(f"p_table requires k_max >= 0, got {k_max}")
    if m < 1:
        raise DomainError(f"p_table requires m >= 1, got m={m}")
    l_max = block_index(k_max, m) if k_max >= 1 else 0
    d_stack =np_stack(D, k_max)
    cells = fill_p_table(d_stack, m, l_max)
    if not np.all(np.isfinite(cells)):
        bad_k = int(np.argwhere(~np.isfinite(cells).all(axis=(1, 2, 3)))[0, 0])
        raise Overflow(f"P table overflowed double precision at k={bad_k}", k=bad_k)
    return PTable(m=m, k_max=k_max, cells=cells)


def np_stack(D, count: int) -> np.ndarray:
    """Materialize D_0..D_{count-1} as a (count, n, n) array."""
    if hasattr(D, "stack"):
        return np.ascontiguousarray(D.stack(count))
    out = np.empty((count, D.dim, D.dim))
    for k in range(count):
        out[k] = D.lookup(k)
    return out


def delayed_exp(D, m: int, k: int, table: PTable | None = None) -> np.ndarray:
    """Delayed exponential e(k); total over all integers k.

    Pass a precomputed PTable when evaluating many k values; otherwise a
    table up to k is built on the fly.
    """
    n = D.dim
    if k <= -m - 1:
        return np.zeros((n, n))
    if k <= 0:
        return np.eye(n)
    if table is None:
        table = p_table(D, m, k)
    return table.exp_value(k)


def delayed_exp_permutable(D_const: np.ndarray, m: int, k: int) -> np.ndarray:
    """Closed form for a constant sequence D: I + sum_d D^d C(k-(d-1)m, d).

    This is the constant-coefficient delayed exponential; for a constant
    sequence it agrees with delayed_exp on the whole domain.
    """
    D_const = np.asarray(D_const, dtype=float)
    n = D_const.shape[0]
    if k <= -m - 1:
        return np.zeros((n, n))
    if k <= 0:
        return np.eye(n)
    l = block_index(k, m)
    acc = np.eye(n)
    power = np.eye(n)
    for d in range(1, l + 1):
        power = power @ D_const
        coeff = comb(k - (d - 1) * m, d) if k - (d - 1) * m >= d else 0
        if coeff == 0:
            continue
        try:
            coeff_f = float(coeff)
        except OverflowError as exc:
            raise Overflow(
                f"binomial C({k - (d - 1) * m}, {d}) exceeds double range", k=k
            ) from exc
        acc = acc + power * coeff_f
    if not np.all(np.isfinite(acc)):
        raise Overflow(f"delayed_exp_permutable overflowed at k={k}", k=k)
    return acc
