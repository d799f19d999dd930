from fractions import Fraction

import numpy as np
import pytest

from cspadv.csp import Instance, or_, value_fraction, xor
from cspadv.fourier import hypercube
from cspadv.gen import nae_ae_gadget, random_kxor, triangle_free_random
from cspadv.oracle import (
    Mixture,
    Procedure,
    TooLarge,
    brute_force_opt,
    exhaustive_expectation,
    max_deviation,
    value_distribution,
)


def naive_hist(inst):
    counts = inst.satisfied_counts(hypercube(inst.n))
    return np.bincount(counts, minlength=inst.m + 1)


class TestBruteForce:
    def test_single(self):
        val, x = brute_force_opt(Instance.kxor(3, [(0, 1, 2)], [-1]))
        assert val == 1 and value_fraction(Instance.kxor(3, [(0, 1, 2)], [-1]), x) == 1

    def test_gadget(self):
        assert brute_force_opt(nae_ae_gadget())[0] == Fraction(1, 2)

    @pytest.mark.parametrize("n", [5, 17, 19])
    def test_matches_naive_and_gray_walk(self, n):
        inst = random_kxor(n, 3, 3, n)
        val, x = brute_force_opt(inst)
        assert val == Fraction(int(naive_hist(inst).nonzero()[0].max()), inst.m)
        assert value_fraction(inst, x) == val

    def test_too_large(self):
        with pytest.raises(TooLarge):
            brute_force_opt(random_kxor(30, 3, 1, 0))


class TestDistribution:
    def test_gadget_point_mass(self):
        hist = value_distribution(nae_ae_gadget())
        assert hist[4] == 64 and hist.sum() == 64

    def test_single_xor(self):
        assert list(value_distribution(Instance.kxor(3, [(0, 1, 2)], [1]))) == [4, 4]

    def test_high_block(self):
        inst = triangle_free_random(18, 3, 2, 5)
        assert np.array_equal(value_distribution(inst), naive_hist(inst))

    def test_max_deviation(self):
        assert max_deviation(Instance.kxor(2, [(0, 1)], [1])) == Fraction(1, 2)


class TestExpectation:
    def test_fair_coins(self):
        proc = Procedure(2, lambda inst, c: int(c[0] == c[1]))
        assert exhaustive_expectation(proc, None) == Fraction(1, 2)

    def test_biased(self):
        proc = Procedure(1, lambda inst, c: c[0], biases=[Fraction(1, 3)])
        assert exhaustive_expectation(proc, None) == Fraction(1, 3)

    def test_mixture(self):
        one = Procedure(0, lambda inst, c: 1)
        zero = Procedure(0, lambda inst, c: 0)
        assert exhaustive_expectation(Mixture([(Fraction(1, 4), one), (Fraction(3, 4), zero)]), None) == Fraction(1, 4)

    def test_width_limit(self):
        with pytest.raises(TooLarge):
            exhaustive_expectation(Procedure(30, lambda i, c: 0), None)
