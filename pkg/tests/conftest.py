from pathlib import Path

import numpy as np
import pytest

from permutons import Perm

FIXTURES = Path(__file__).parent / "fixtures"

# the two order-9 permutations with balanced 3-pattern profile (8,17,17,17,17,8)
BALANCED_9 = (
    Perm((4, 3, 8, 9, 5, 1, 2, 7, 6)),
    Perm((4, 7, 2, 9, 5, 1, 8, 3, 6)),
)


@pytest.fixture
def rng():
    return np.random.default_rng(991)


def random_perm(rng, n: int) -> Perm:
    return Perm(tuple(int(v) + 1 for v in rng.permutation(n)))
