"""Decoupled 3XOR solver versus the 1/sqrt(D) yardstick on random instances."""
import math

from cspadv.gen import random_kxor
from cspadv.xor3 import solve_3xor, solve_3xor_derandomized

n = 200
print(f"{'D':>4} {'m':>6} {'random':>9} {'derand':>9} {'1/sqrt(D)':>10}")
for D in (4, 9, 16, 36):
    inst = random_kxor(n, 3, D, seed=D)
    _, rep = solve_3xor(inst, rng=1)
    _, det = solve_3xor_derandomized(inst)
    print(f"{D:>4} {inst.m:>6} {rep.advantage:>9.4f} {det.advantage:>9.4f} {1 / math.sqrt(D):>10.4f}")
