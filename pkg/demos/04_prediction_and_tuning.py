"""
From ranked models to individual predictions
============================================

A trained classifier keeps the s best MDR models. A new sample falls into
one cell per model; the cells' case proportions average into a probability,
their H/L labels vote for the hard class, and counting H as +1 / L as -1
gives an integer risk score. The hyperparameters (order, alpha, minimum
cell size, O-cell handling, s) are picked by seeded random search with
cross-validated AUC.
"""

import numpy as np

from mbmdr import (
    SearchSpace,
    auc,
    load_model,
    predict_class,
    predict_proba,
    risk_score,
    save_model,
    simulate_dataset,
    train_classifier,
    tune,
)
from mbmdr.benchmark import split_half
from mbmdr.simulate import build_scenario

spec = build_scenario(scenario=3, mafs=[0.2, 0.2], h2=0.1, n=2000, q=50, seed=21)
ds = simulate_dataset(spec)
train, holdout = split_half(ds, seed=1)

result = tune(train, SearchSpace(), budget=20, k=5, seed=5)
print("best hyperparameters:", result.best)
print("cross-validated AUC:", round(result.cv_auc, 4))

clf = train_classifier(train, result.best)
proba = predict_proba(clf, holdout.genotypes)
print("\nholdout AUC:", round(auc(proba, holdout.phenotype), 4))

# The three prediction modes for a handful of samples:
some = holdout.genotypes[:5]
print("\nsample predictions:")
for x, p, c, r in zip(some, predict_proba(clf, some),
                      predict_class(clf, some), risk_score(clf, some)):
    print(f"  genotypes {x[:4]}...  proba {p:.3f}  class {c}  score {r:+d}")

# Classifiers persist as versioned JSON and reload bit-exactly.
save_model(clf, "/tmp/mdr_demo_model.json")
reloaded = load_model("/tmp/mdr_demo_model.json")
assert (predict_proba(reloaded, some) == predict_proba(clf, some)).all()
print("\nsaved, reloaded and verified identical predictions")
