"""
Exhaustive MDR scan: cells, labels and the model ranking
========================================================

The core loop: for every feature pair, group samples into genotype cells,
test each cell against the rest, label it H / L / O, pool the labeled cells
into the model statistic and rank all pairs. On simulated data the planted
interaction should surface at the top even though neither SNP has any
marginal effect.
"""

import numpy as np

from mbmdr import (
    HyperParams,
    arrange_cells,
    enumerate_and_rank,
    label_cells,
    simulate_dataset,
)
from mbmdr.simulate import build_scenario

spec = build_scenario(scenario=3, mafs=[0.2, 0.2], h2=0.1, n=2000, q=50, seed=3)
ds = simulate_dataset(spec)
hp = HyperParams(order=2, adjustment="NONE", alpha=0.1, min_cell_size=10, s=5)

# Look at the planted pair (columns 0 and 1) close up.
table = label_cells(arrange_cells(ds, (0, 1)), hp, ds)
label_chars = {1: "H", -1: "L", 0: "O"}
print("cell counts (cases/controls) and labels for the planted pair:")
for cell in range(9):
    print(f"  genotype ({cell // 3},{cell % 3}):"
          f" {int(table.case_counts[cell]):4d}/{int(table.control_counts[cell]):4d}"
          f"  p={table.p_value[cell]:.4f}  {label_chars[int(table.labels[cell])]}")

# Scan all 1225 pairs and rank them.
ranking = enumerate_and_rank(ds, hp)
print("\ntop 5 of", len(ranking.models), "models:")
for m in ranking.models[:5]:
    print(f"  features {m.tuple}  statistic {m.statistic:8.2f}")

truth = (0, 1)
rank_of_truth = 1 + [m.tuple for m in ranking.models].index(truth)
print(f"\nplanted pair {truth} ranks #{rank_of_truth}")

# The same scan with codominant adjustment absorbs lower-order signal, so a
# SNP with a main effect cannot masquerade as an interaction partner.
hp_adj = HyperParams(order=2, adjustment="CODOMINANT", alpha=0.1,
                     min_cell_size=10, s=5)
ranking_adj = enumerate_and_rank(ds, hp_adj)
print("top pair under adjustment:", ranking_adj.models[0].tuple)
