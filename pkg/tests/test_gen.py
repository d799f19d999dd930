from fractions import Fraction

import numpy as np
import pytest

from cspadv.csp import check_triangle_free, degrees, max_degree, mu, validate, value_fraction
from cspadv.fourier import hypercube
from cspadv.gen import (
    GenSpec,
    InfeasibleSpec,
    complete_graph_maxcut,
    generate,
    grid_2sat,
    nae_ae_gadget,
    random_kxor,
    random_sign_complete_graph,
    triangle_free_random,
)
from cspadv.oracle import brute_force_opt


class TestRandomKxor:
    def test_minimal(self):
        assert random_kxor(3, 3, 1, 0).m == 1

    def test_degree_and_distinct(self):
        inst = random_kxor(100, 3, 6, 4)
        assert max_degree(inst) <= 6
        assert len({frozenset(s) for s in inst.scopes}) == inst.m
        assert validate(inst).ok
        assert inst.m >= 0.9 * (100 * 6 // 3)

    def test_deterministic(self):
        assert random_kxor(60, 4, 5, 9) == random_kxor(60, 4, 5, 9)

    def test_infeasible(self):
        with pytest.raises(InfeasibleSpec):
            random_kxor(2, 3, 1, 0)


class TestTriangleFreeGen:
    def test_always_triangle_free(self):
        for s in range(1000):
            inst = triangle_free_random(40, 3, 3, s)
            assert check_triangle_free(inst).ok and validate(inst, min_arity=2).ok
            assert max_degree(inst) <= 3

    def test_matching_when_D1(self):
        inst = triangle_free_random(300, 3, 1, 0)
        assert set(degrees(inst)) <= {0, 1}

    def test_density(self):
        inst = triangle_free_random(2000, 3, 8, 0)
        mean_arity = np.mean([3, 3, 2, 2])
        assert inst.m >= 0.5 * int(2000 * 8 / mean_arity)

    def test_named_mix(self):
        inst = triangle_free_random(100, ["or2"], 2, 0)
        assert {p.arity for p in inst.predicates} == {2}


class TestGadgets:
    @pytest.mark.parametrize("n,opt", [(3, Fraction(2, 3)), (4, Fraction(4, 6)), (10, Fraction(25, 45))])
    def test_complete_cut(self, n, opt):
        inst = complete_graph_maxcut(n)
        assert inst.m == n * (n - 1) // 2
        assert brute_force_opt(inst)[0] == opt

    def test_grid_shape(self):
        for D in (2, 3, 4):
            inst = grid_2sat(D)
            assert inst.n == D * D and inst.m == 2 * D * D * (D - 1) // 2
            assert set(degrees(inst)) == {2 * (D - 1)}
            assert mu(inst) == Fraction(3, 4)

    def test_grid_optimum_window(self):
        for D in (2, 3, 4):
            opt = brute_force_opt(grid_2sat(D))[0]
            assert Fraction(3, 4) <= opt <= Fraction(3, 4) + Fraction(1, 2 * (D - 1))

    def test_grid_D2_exact(self):
        assert brute_force_opt(grid_2sat(2))[0] == 1

    def test_nae_ae_every_assignment_half(self):
        inst = nae_ae_gadget()
        assert (inst.n, inst.m) == (6, 8)
        assert mu(inst) == Fraction(1, 2)
        for x in hypercube(6):
            assert value_fraction(inst, x) == Fraction(1, 2)

    def test_random_sign_graph(self):
        inst = random_sign_complete_graph(8, 3)
        assert inst.m == 28 and inst.kxor_arity == 2

    def test_generate_dispatch(self):
        assert generate(GenSpec("nae_ae")).m == 8
        assert generate(GenSpec("kxor", n=30, k=3, D=3, seed=1)) == random_kxor(30, 3, 3, 1)
        with pytest.raises(ValueError):
            GenSpec("kxor", n=2, k=3)
        with pytest.raises(ValueError):
            generate(GenSpec("nope"))
