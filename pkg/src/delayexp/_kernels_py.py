"""Pure-NumPy kernels: the hot dynamic-programming loops.

A compiled Cython twin (_kernels_cy) implements the same two functions with
identical semantics; _kernels picks one at import time.  Keep signatures,
conventions and accumulation order in sync between the two backends.

Conventions shared by both kernels (d is the nesting depth, m the delay):
  * layer 0 is the depth-0 payload: the identity block (fill_p_table) or
    A^kappa applied to a seed (delay_layers);
  * layer d >= 1 is zero whenever the time index is <= (d-1)(m+1);
  * each step adds the coefficient matrix times the (k-m, d-1) cell.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def fill_p_table(d_stack: np.ndarray, m: int, l_max: int) -> np.ndarray:
    """Depth-layered nested-sum table P(k, d) for 0 <= k <= K, 0 <= d <= l_max.

    d_stack[k] holds the sequence member D_k for k = 0..K-1.  The table is
    filled with the layer recurrence P(k+1, d) = P(k, d) + D_k P(k-m, d-1),
    with P(k, 0) = I for every k (including k < 0) and P(k, d) = 0 in the
    empty-sum region k <= (d-1)(m+1).

    Returns an array of shape (K+1, l_max+1, n, n).
    """
    K, n = d_stack.shape[0], d_stack.shape[1]
    table = np.zeros((K + 1, l_max + 1, n, n))
    table[:, 0] = np.eye(n)
    for k in range(K):
        d_hi = min(l_max, k // (m + 1) + 1)
        if d_hi < 1:
            continue
        if k - m < 0:
            # Only d = 1 can receive a contribution: P(k-m, 0) = I.
            table[k + 1, 1] = table[k, 1] + d_stack[k]
        else:
            table[k + 1, 1 : d_hi + 1] = table[k, 1 : d_hi + 1] + np.matmul(
                d_stack[k], table[k - m, 0:d_hi]
            )
    return table


def delay_layers(a: np.ndarray, b_stack: np.ndarray, m: int, init0: np.ndarray) -> np.ndarray:
    """Layered evaluation of the delayed-exponential action in x-coordinates.

    Propagates layers r(kappa, d) of shape (n, p) by

        r(kappa+1, d) = A r(kappa, d) + B_kappa r(kappa-m, d-1),  d >= 1,
        r(kappa+1, 0) = A r(kappa, 0),

    where init0[i] seeds layer 0 on kappa = -m..0 (i.e. A^kappa applied to
    the payload) and b_stack[kappa] is the step coefficient for
    kappa = 0..K-1.  Layer d is zero for kappa <= (d-1)(m+1).

    Returns v of shape (K+m+1, n, p) with v[kappa+m] = sum_d r(kappa, d),
    the fundamental-family action on the payload for kappa = -m..K.
    """
    K = b_stack.shape[0]
    n, p = init0.shape[1], init0.shape[2]
    l_max = max(0, -(-K // (m + 1)))  # ceil(K/(m+1))
    r = np.zeros((K + m + 1, l_max + 1, n, p))
    r[0 : m + 1, 0] = init0
    for kappa in range(K):
        r[kappa + m + 1, 0] = a @ r[kappa + m, 0]
        d_hi = min(l_max, kappa // (m + 1) + 1)
        if d_hi < 1:
            continue
        r[kappa + m + 1, 1 : d_hi + 1] = np.matmul(a, r[kappa + m, 1 : d_hi + 1]) + np.matmul(
            b_stack[kappa], r[kappa, 0:d_hi]
        )
    return r.sum(axis=1)
