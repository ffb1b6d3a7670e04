import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from whfact import MonodromySpec, solve_point


@pytest.fixture(scope="session")
def eps_golden():
    """Fully verified factorisation of the eps family at (4, 3), eps = 1."""
    return solve_point(MonodromySpec.aiii_eps(1.0), 4.0, 3.0, verify=True)


@pytest.fixture(scope="session")
def cs_golden():
    """Fully verified factorisation of the (c, s) family at (3, 5),
    c = sqrt(2), s = 1."""
    return solve_point(MonodromySpec.aiii_cs(2.0 ** 0.5, 1.0), 3.0, 5.0,
                       verify=True)
