import itertools
import random
from collections import Counter
from fractions import Fraction

import pytest

from fairlot import (BvnDecomposition, Lottery, StructuralError, decompose,
                     reconstruct, sample, sample_many, sample_stream)

HALF = Fraction(1, 2)


def test_identity_decomposition():
    dec = decompose(Lottery(p=(1,), q=(((1, 0), (0, 1)),)))
    assert dec.per_partition == ((((0, 1), Fraction(1)),),)


def test_uniform_2x2():
    dec = decompose(Lottery(p=(1,), q=(((HALF, HALF), (HALF, HALF)),)))
    assert dec.per_partition == ((((0, 1), HALF), ((1, 0), HALF)),)


def test_3x3_two_permutations():
    q = ((HALF, HALF, 0), (HALF, 0, HALF), (0, HALF, HALF))
    dec = decompose(Lottery(p=(1,), q=(q,)))
    assert dec.per_partition == ((((0, 2, 1), HALF), ((1, 0, 2), HALF)),)


def test_zero_probability_partition_omitted():
    lot = Lottery(p=(1, 0), q=((((1, 0), (0, 1))), (((0, 0), (0, 0)))))
    dec = decompose(lot)
    assert dec.per_partition[1] == ()
    assert reconstruct(dec) == lot


def test_invalid_lottery_rejected():
    with pytest.raises(StructuralError):
        decompose(Lottery(p=(1,), q=(((1, 0), (1, 0)),)))


def _random_bistochastic_lottery(rng: random.Random, n: int) -> Lottery:
    perms = list(itertools.permutations(range(n)))
    chosen = [rng.choice(perms) for _ in range(rng.randint(1, 2 * n))]
    weights = [Fraction(rng.randint(1, 12)) for _ in chosen]
    total = sum(weights)
    mat = [[Fraction(0)] * n for _ in range(n)]
    for wgt, perm in zip(weights, chosen):
        for i in range(n):
            mat[i][perm[i]] += wgt / total
    return Lottery(p=(1,), q=(tuple(tuple(row) for row in mat),))


def test_reconstruction_and_birkhoff_bound():
    rng = random.Random(71)
    for _ in range(100):
        n = rng.randint(2, 6)
        lot = _random_bistochastic_lottery(rng, n)
        dec = decompose(lot)
        assert reconstruct(dec) == lot
        pieces = dec.per_partition[0]
        assert len(pieces) <= (n - 1) ** 2 + 1
        assert sum((a for _, a in pieces), Fraction(0)) == 1
        assert all(a > 0 for _, a in pieces)


def test_multi_partition_reconstruction():
    rng = random.Random(72)
    for _ in range(25):
        n = rng.randint(2, 4)
        m = rng.randint(2, 3)
        raw = [Fraction(rng.randint(0, 5)) for _ in range(m)]
        if not any(raw):
            raw[0] = Fraction(1)
        total = sum(raw)
        p = [x / total for x in raw]
        slices = []
        for k in range(m):
            if p[k]:
                body = _random_bistochastic_lottery(rng, n).q[0]
                slices.append(tuple(tuple(v * p[k] for v in row) for row in body))
            else:
                slices.append(tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n)))
        lot = Lottery(p=tuple(p), q=tuple(slices))
        assert reconstruct(decompose(lot)) == lot


def test_sample_deterministic_support():
    dec = decompose(Lottery(p=(1,), q=(((1, 0), (0, 1)),)))
    assert sample(dec, seed=7) == (0, (0, 1))
    assert sample(dec, seed=12345) == (0, (0, 1))


def test_sample_seed_reproducibility():
    dec = decompose(Lottery(p=(1,), q=(((HALF, HALF), (HALF, HALF)),)))
    assert sample_many(dec, 42, 200) == sample_many(dec, 42, 200)
    stream = sample_stream(dec, 42)
    assert [next(stream) for _ in range(5)] == sample_many(dec, 42, 5)


def test_sample_frequencies_match_coefficients():
    dec = decompose(Lottery(p=(1,), q=(((HALF, HALF), (HALF, HALF)),)))
    draws = sample_many(dec, 99, 20000)
    freq = Counter(perm for _, perm in draws)
    assert abs(freq[(0, 1)] / 20000 - 0.5) < 0.02


def test_sample_partition_marginals():
    third = Fraction(1, 3)
    lot = Lottery(p=(third, 1 - third),
                  q=(((third, 0), (0, third)), ((1 - third, 0), (0, 1 - third))))
    dec = decompose(lot)
    draws = sample_many(dec, 5, 30000)
    freq = Counter(k for k, _ in draws)
    assert abs(freq[0] / 30000 - 1 / 3) < 0.02


def test_json_roundtrip():
    lot = Lottery(p=(HALF, HALF),
                  q=(((HALF, 0), (0, HALF)), ((Fraction(1, 4), Fraction(1, 4)),
                                              (Fraction(1, 4), Fraction(1, 4)))))
    dec = decompose(lot)
    again = BvnDecomposition.loads(dec.dumps())
    assert again == dec
    assert reconstruct(again) == lot
