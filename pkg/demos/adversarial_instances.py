"""Instances where no assignment does much better than random, checked by enumeration."""
from cspadv.gen import complete_graph_maxcut, grid_2sat, nae_ae_gadget, random_sign_complete_graph
from cspadv.oracle import brute_force_opt, max_deviation, value_distribution

gadget = nae_ae_gadget()
hist = value_distribution(gadget)
print(f"NAE/AE gadget: {gadget.n} vars, {gadget.m} constraints")
print("  satisfied-count histogram over all 64 assignments:", {c: int(v) for c, v in enumerate(hist) if v})

for n in (6, 10, 14):
    best, _ = brute_force_opt(complete_graph_maxcut(n))
    print(f"max-cut on K_{n}: optimum {best} = {float(best):.4f} (D = {n - 1})")

best, _ = brute_force_opt(grid_2sat(3))
print(f"grid 2SAT with D=3: optimum {best}")

for s in range(3):
    dev = max_deviation(random_sign_complete_graph(14, s))
    print(f"random-sign K_14, seed {s}: best |val - 1/2| = {float(dev):.4f}")
