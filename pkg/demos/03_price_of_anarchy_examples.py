# Two constructions: one where stable matchings can be arbitrarily bad, and one
# where clustering caps the damage almost exactly.
from peermatch import bound_report, build_instance, exact_extremes, partition_metrics, social_welfare
from peermatch.generators import generate_tight_example, generate_unbounded_poa, tight_example_matchings

# Close friends split up by two weak ties.
for k in (4, 8, 16, 32):
    s = exact_extremes(build_instance(generate_unbounded_poa(k)))
    print(f"k={k:>2}: best W {s.max_welfare:5.1f}, worst stable W {s.min_stable_welfare:.1f}, PoA {s.exact_poa}")

# Grid of clusters: rows hold every edge, columns cut them all yet are stable.
for m, k in [(2, 4), (3, 3), (3, 10), (4, 20)]:
    inst = build_instance(generate_tight_example(m, k))
    rows, cols = tight_example_matchings(m, k)
    ratio = social_welfare(inst, rows) / social_welfare(inst, cols)
    rep = bound_report(inst, gamma_star=1.0)
    print(f"m={m} k={k:>2}: ratio {ratio:.4f}  bound {rep.bound_simple:.1f}  Q {rep.Q:.4f}  "
          f"gamma(rows) {partition_metrics(inst, rows).gamma:.0f}  gamma(cols) {partition_metrics(inst, cols).gamma:.0f}")
