"""
Penetrance tables, prevalence, heritability and the scale effect
================================================================

A penetrance table assigns every multilocus genotype combination the
probability of showing the phenotype. This walkthrough builds the two
classic two-SNP examples, derives prevalence and heritability, and shows
why "interaction" depends on the scale you measure it on.
"""

import numpy as np

from mbmdr import (
    heritability,
    logit,
    marginal_penetrance,
    penetrance_scale_effects,
    penetrance_to_effects,
    prevalence,
    table_from_mafs,
)

# A table where both SNPs act recessively and the effects add up on the
# log-odds scale: rows are genotypes of SNP A, columns genotypes of SNP B.
recessive = table_from_mafs(
    (0.25, 0.25),
    [0.62, 0.62, 0.82,
     0.62, 0.62, 0.82,
     0.73, 0.73, 0.88],
)
print("penetrances:\n", recessive.f.reshape(3, 3))
print("prevalence K =", round(prevalence(recessive), 4))
print("heritability h2 =", round(heritability(recessive), 4))

# On the probability scale the joint cell 0.88 falls short of the additive
# expectation 0.62 + 0.11 + 0.20 = 0.93: a -0.05 deviation.
linear = penetrance_scale_effects(recessive.f, 2)
print("\npenetrance-scale interaction (A2A2 x B2B2):",
      round(linear.effects[((0, 2), (1, 2))], 4))

# On the log-odds scale the same table is perfectly additive: the main
# effects are ~0.5 and ~1.0 and the interaction terms vanish. Whether two
# features "interact" is a statement about the chosen scale.
effects = penetrance_to_effects(recessive.f, 2)
print("logit-scale main effect of A2A2:", round(effects.effects[((0, 2),)], 4))
print("logit-scale main effect of B2B2:", round(effects.effects[((1, 2),)], 4))
print("logit-scale interaction (A2A2 x B2B2):",
      round(effects.effects[((0, 2), (1, 2))], 4))
print("logit(0.62) =", round(logit(0.62), 4), "(the intercept)")

# The opposite extreme: an XOR-like table with no marginal signal at all.
# Averaging over either SNP gives a flat 0.25, yet the pair explains
# two thirds of the phenotype variance.
xor = table_from_mafs(
    (0.5, 0.5),
    [0.0, 0.0, 1.0,
     0.0, 0.5, 0.0,
     1.0, 0.0, 0.0],
)
print("\nXOR-style table:\n", xor.f.reshape(3, 3))
print("marginal penetrance of B:", marginal_penetrance(xor, 0).f)
print("marginal penetrance of A:", marginal_penetrance(xor, 1).f)
print("K =", xor.K, " h2 =", round(xor.h2, 4))
print("single-SNP analyses would see nothing here.")
