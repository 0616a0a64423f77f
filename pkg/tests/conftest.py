import numpy as np
import pytest

import vechgarch as vg


def _reference_spec_d2():
    # Moderate-persistence 2-dimensional spec used across the stochastic
    # tests: rho(A + B) ~ 0.69, unconditional covariance [[1, .25], [.25, 1]].
    a = np.array([
        [0.12, 0.02, 0.01],
        [0.01, 0.10, 0.02],
        [0.02, 0.01, 0.12],
    ])
    b = np.array([
        [0.50, 0.03, 0.01],
        [0.02, 0.52, 0.02],
        [0.01, 0.03, 0.48],
    ])
    h = np.array([1.0, 0.25, 1.0])
    c = (np.eye(3) - a - b) @ h
    return vg.GarchSpec(d=2, c=c, A=a, B=b)


@pytest.fixture(scope="session")
def ref_spec_d2():
    return _reference_spec_d2()


@pytest.fixture(scope="session")
def ref_spec_d1():
    return vg.GarchSpec(d=1, c=np.array([0.3]), A=np.array([[0.1]]),
                        B=np.array([[0.6]]))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240814))
