import math

import pytest

# shared evaluation sites: generic interior points of the upper half-plane
Z1 = 0.1 + 1.2j
Z2 = -0.3 + 0.9j
PAIR2 = (0.2 + 1.3j, -0.45 + 1.05j)


def rel_err(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.fixture(scope="session")
def fast_policy():
    from heckekernel.types import TruncationPolicy

    return TruncationPolicy(H=200, B=20_000, C=200, tol=1e-2)
