"""AdvRand on kXOR for several k, and the median-threshold greedy on a mixed triangle-free family."""
from cspadv.advrand import solve_kxor
from cspadv.csp import check_triangle_free
from cspadv.gen import random_kxor, triangle_free_random
from cspadv.trifree import solve_triangle_free

for k in (2, 3, 4, 5):
    inst = random_kxor(600, k, 6, seed=k)
    _, rep = solve_kxor(inst, rng=0)
    side = rep.extra.get("side", "")
    print(f"{k}XOR m={inst.m}: value {rep.value:.4f} advantage {rep.advantage:+.4f} "
          f"t={rep.extra['t']:.2f} precondition_met={rep.extra['precondition_met']} {side}")

inst = triangle_free_random(1000, 3, 4, seed=3)
print("triangle-free:", check_triangle_free(inst).ok, f"m={inst.m}")
_, rep = solve_triangle_free(inst, rng=0)
print(f"  mu {rep.mu:.4f} value {rep.value:.4f} advantage {rep.advantage:+.4f} "
      f"sum sqrt(deg)/m {rep.yardstick:.4f} reps {rep.reps}")
