# Heat bath on welfare versus greedy swapping, n = 50 students in 5 houses.
import statistics
import sys

import numpy as np

from peermatch import GreedyConfig, McmcConfig, build_instance, social_welfare, solve_greedy, solve_mcmc
from peermatch.generators import generate_random_instance
from peermatch.io import write_trace_csv
from peermatch.solvers import random_matching

out = sys.argv[1] if len(sys.argv) > 1 else None

greedy, heat = [], []
for seed in range(10):
    inst = build_instance(generate_random_instance(50, 5, seed=seed, p=0.15))
    start = random_matching(inst, seed)
    g, gt = solve_greedy(inst, start, GreedyConfig(seed=seed))
    h, ht = solve_mcmc(inst, start, McmcConfig(max_iterations=20_000, seed=seed, polish=True))
    greedy.append(social_welfare(inst, g))
    heat.append(social_welfare(inst, h))
    if out and seed == 0:
        write_trace_csv(gt, f"{out}/greedy_trace.csv")
        write_trace_csv(ht, f"{out}/mcmc_trace.csv")

print("greedy       median W:", round(statistics.median(greedy), 2))
print("mcmc+polish  median W:", round(statistics.median(heat), 2))
print("per-instance gain:", np.round(np.array(heat) - np.array(greedy), 1))

# Temperature scales the welfare change inside the logistic: larger means greedier.
inst = build_instance(generate_random_instance(50, 5, seed=0, p=0.15))
start = random_matching(inst, 0)
for T in (0.1, 1.0, 10.0):
    _, tr = solve_mcmc(inst, start, McmcConfig(max_iterations=20_000, temperature=T, seed=0))
    w = tr.column("welfare")
    print(f"T={T:>4}: final W {w[-1]:8.2f}  best {tr.best_welfare:8.2f}  accepted {tr.swaps_accepted}")
