import random
from fractions import Fraction

import pytest

from fairlot import Instance, Lottery


@pytest.fixture
def t1():
    # two agents, one partition, both value bundle 1 only
    return Instance(n=2, m=1, utilities=(((1, 0), (1, 0)),))


@pytest.fixture
def t2():
    # two agents, one partition, each values her own bundle at 2
    return Instance(n=2, m=1, utilities=(((2, 0), (0, 2)),))


@pytest.fixture
def uniform_lottery():
    half = Fraction(1, 2)
    return Lottery(p=(1,), q=(((half, half), (half, half)),))


@pytest.fixture
def identity_lottery():
    return Lottery(p=(1,), q=(((1, 0), (0, 1)),))


def make_random_instance(rng: random.Random, n_choices=(2, 3), m_choices=(1, 2, 3),
                         low=-3, high=3) -> Instance:
    n = rng.choice(n_choices)
    m = rng.choice(m_choices)
    utilities = tuple(
        tuple(tuple(Fraction(rng.randint(low, high)) for _ in range(n)) for _ in range(n))
        for _ in range(m))
    return Instance(n=n, m=m, utilities=utilities)


def make_random_lottery(rng: random.Random, n: int, m: int) -> Lottery:
    """Random point of the lottery polytope: convex mix of pure allocations."""
    import itertools
    perms = list(itertools.permutations(range(n)))
    picks = [(rng.randrange(m), rng.choice(perms)) for _ in range(rng.randint(1, 2 * m + 2))]
    weights = [Fraction(rng.randint(1, 10)) for _ in picks]
    total = sum(weights)
    p = [Fraction(0)] * m
    q = [[[Fraction(0)] * n for _ in range(n)] for _ in range(m)]
    for wgt, (k, perm) in zip(weights, picks):
        lam = wgt / total
        p[k] += lam
        for i in range(n):
            q[k][i][perm[i]] += lam
    return Lottery(p=tuple(p), q=tuple(tuple(tuple(row) for row in mat) for mat in q))
