# How much of one friendship graph can m equal houses keep inside?
import sys

from peermatch import HeuristicConfig, build_instance
from peermatch.generators import generate_random_instance
from peermatch.io import rows_csv
from peermatch.metrics import gamma_star_trend

net = build_instance(generate_random_instance(120, 1, seed=10, p=0.05, scoring="zero")).network
print("students", net.student_count, "edges", net.edge_count)

rows = gamma_star_trend(net, [2, 3, 4, 6, 8, 12], HeuristicConfig(restarts=2, mcmc_iterations=10_000))
text = rows_csv(rows)
print(text, end="")
if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(text)
