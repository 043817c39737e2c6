import numpy as np
import pytest

from delayexp import DelaySystem, InitialFunction, MatrixSequence, VectorSequence


@pytest.fixture
def scalar_delay2():
    """A=1, B=1, m=2, phi=1, f=0: the hand-steppable scalar instance."""
    return DelaySystem(
        A=[[1.0]],
        m=2,
        B=MatrixSequence.constant([[1.0]]),
        f=VectorSequence.zero(1),
        phi=InitialFunction(m=2, values=[[1.0], [1.0], [1.0]]),
    )


@pytest.fixture
def undelayed_2x2():
    """B = 0: reduces to x(k) = A^k phi(0)."""
    a = np.array([[0.6, 0.3], [-0.2, 0.9]])
    return DelaySystem(
        A=a,
        m=1,
        B=MatrixSequence.zero(2),
        f=VectorSequence.zero(2),
        phi=InitialFunction(m=1, values=[[1.0, -2.0], [0.5, 1.5]]),
    )


def make_system(a, m, b_seq, phi_rows, f_seq=None):
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    return DelaySystem(
        A=a,
        m=m,
        B=b_seq,
        f=f_seq if f_seq is not None else VectorSequence.zero(n),
        phi=InitialFunction(m=m, values=phi_rows),
    )
