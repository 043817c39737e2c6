"""Seeded random systems and sequences for checks, benchmarks and tests.

Entries are uniform in [-1, 1].  A is rejection-sampled to condition
number <= cond_max (default 100) so that powers over desk-scale horizons
stay inside double range.  The B prefix has length 2(m+1)+3 with a random
tail, which makes the coefficients genuinely nonconstant, and generation
retries until B_0 does not commute with A so the non-commuting regime is
actually exercised.
"""

from __future__ import annotations

import numpy as np

from .systems import DelaySystem, InitialFunction, MatrixSequence, VectorSequence

DEFAULT_COND_MAX = 100.0
_NONCOMMUTING_MIN = 1e-3
_MAX_TRIES = 200


def _rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def random_invertible(rng, n: int, cond_max: float = DEFAULT_COND_MAX) -> np.ndarray:
    rng = _rng(rng)
    for _ in range(_MAX_TRIES):
        a = rng.uniform(-1.0, 1.0, (n, n))
        if n == 1 and abs(a[0, 0]) < 1e-2:
            continue
        if np.linalg.cond(a) <= cond_max:
            return a
    raise RuntimeError(f"no well-conditioned {n}x{n} matrix after {_MAX_TRIES} draws")


def random_matrix_sequence(rng, n: int, prefix_len: int) -> MatrixSequence:
    rng = _rng(rng)
    prefix = tuple(rng.uniform(-1.0, 1.0, (n, n)) for _ in range(prefix_len))
    tail = rng.uniform(-1.0, 1.0, (n, n))
    return MatrixSequence(prefix=prefix, tail=tail)


def random_system(
    seed_or_rng,
    n: int,
    m: int,
    *,
    cond_max: float = DEFAULT_COND_MAX,
    zero_f: bool = False,
    constant_b: bool = False,
    require_noncommuting: bool = True,
) -> DelaySystem:
    """One random validated DelaySystem; deterministic given a seed."""
    rng = _rng(seed_or_rng)
    for _ in range(_MAX_TRIES):
        a = random_invertible(rng, n, cond_max)
        if constant_b:
            b = MatrixSequence.constant(rng.uniform(-1.0, 1.0, (n, n)))
        else:
            b = random_matrix_sequence(rng, n, 2 * (m + 1) + 3)
        if require_noncommuting and n > 1:
            b0 = b.lookup(0)
            if np.abs(a @ b0 - b0 @ a).max() < _NONCOMMUTING_MIN:
                continue
        if zero_f:
            f = VectorSequence.zero(n)
        else:
            f_prefix = tuple(rng.uniform(-1.0, 1.0, n) for _ in range(m + 2))
            f = VectorSequence(prefix=f_prefix, tail=rng.uniform(-1.0, 1.0, n))
        phi = InitialFunction(m=m, values=rng.uniform(-1.0, 1.0, (m + 1, n)))
        return DelaySystem(A=a, m=m, B=b, f=f, phi=phi)
    raise RuntimeError("failed to draw a suitable random system")


def random_permutable_system(seed_or_rng, n: int, m: int, degree: int = 2) -> DelaySystem:
    """System with constant B a random polynomial in A (so AB = BA)."""
    rng = _rng(seed_or_rng)
    a = random_invertible(rng, n)
    coeffs = rng.uniform(-1.0, 1.0, degree + 1)
    b = np.zeros((n, n))
    power = np.eye(n)
    for c in coeffs:
        b = b + c * power
        power = power @ a
    f_prefix = tuple(rng.uniform(-1.0, 1.0, n) for _ in range(m + 2))
    return DelaySystem(
        A=a,
        m=m,
        B=MatrixSequence.constant(b),
        f=VectorSequence(prefix=f_prefix, tail=rng.uniform(-1.0, 1.0, n)),
        phi=InitialFunction(m=m, values=rng.uniform(-1.0, 1.0, (m + 1, n))),
    )
