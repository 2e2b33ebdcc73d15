import numpy as np
import pytest

from qpert.model import StandardQP


@pytest.fixture
def dq1():
    """min 0.5||x||^2 s.t. x1 + x2 = 1, x >= 0; optimum (0.5, 0.5), y = 0.5."""
    return StandardQP(H=np.eye(2), A=[[1.0, 1.0]], b=[1.0], c=[0.0, 0.0], name="DQ1")


@pytest.fixture
def dq2():
    """min 0.5||x||^2 + x2 s.t. x1 = 1, x >= 0; optimum (1, 0), y = 1, s = (0, 1)."""
    return StandardQP(H=np.eye(2), A=[[1.0, 0.0]], b=[1.0], c=[0.0, 1.0], name="DQ2")


@pytest.fixture
def dq3():
    """min x1 + 0.5 x2^2 s.t. x1 = 1, x >= 0; optimum (1, 0) with s = (0, 0)."""
    return StandardQP(H=np.diag([0.0, 1.0]), A=[[1.0, 0.0]], b=[1.0], c=[1.0, 0.0],
                      name="DQ3")
