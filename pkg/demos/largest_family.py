"""
The first family and the Mittag-Leffler law
===========================================

The size of family 1, scaled by N^(1-r), converges to a Mittag-Leffler
variable with parameter 1 - r.  Later families are thinner by a Beta factor.
"""

from yulefam import ml_moment, run_largest_family_experiment, z_moment

r, N = 0.5, 20_000
rep = run_largest_family_experiment(r, N, replicates=2000, k=1)
print(f"KS distance to the limit law: {rep.ks_D:.4f} (p = {rep.ks_p:.3f})")
for m, mean, se, theory in rep.moments:
    print(f"E[(R_1 / N^(1-r))^{m:g}] = {mean:.4f} +- {se:.4f}   limit {theory:.4f}")

# family 2 exists only if individual 2 founded it (probability r)
rep2 = run_largest_family_experiment(r, N, replicates=2000, k=2)
print(f"\nfraction of runs where individual 2 founded: {rep2.acceptance:.3f}")
print(f"E[R_2 / N^(1-r)] = {rep2.moments[0][1]:.4f}   limit {z_moment(r, 2, 1):.4f}")
print(f"mean of Mittag-Leffler({1 - r}): {ml_moment(1 - r, 1):.5f}")
