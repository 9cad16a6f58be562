"""
Family counts follow a power law
================================

Simulate the duplication model at the parameters of a small gene-family
data set and compare the number of families of size at least S with g(S).
"""

import numpy as np

from yulefam import census, fit_loglog_slope, g_of_S, ModelParams, run_tail_experiment, simulate_duplication

r, N = 0.018, 20_000

# one population: count families of each size
fc = census(simulate_duplication(ModelParams(r, N), seed=1))
print(f"{fc.n_families} families, largest has {fc.family_sizes[-1]} members")

# a single run is noisy; average over replicates instead
grid = np.unique(np.round(np.geomspace(1, 2 * N ** (1 - r), 25)).astype(int))
table = run_tail_experiment(r, N, replicates=200, S_grid=grid)

print(f"\n{'S':>6} {'mean F':>10} {'g(S)':>10} {'rel err':>8}")
for S, mean, se, g in table.rows():
    print(f"{S:6d} {mean:10.3f} {g:10.3f} {(mean - g) / g:8.3f}")

# slope of log F against log S over the straight part
fit = fit_loglog_slope(table, 3, np.exp(4))
print(f"\nfitted slope {fit.slope:.3f} +- {fit.slope_stderr:.3f}, limit {-1 / (1 - r):.3f}")

# F counts family 1 as well, which g leaves out; the gap is about one family
print("mean F - g over [10, 55]:", np.round((table.mean - table.prediction)[(grid >= 10) & (grid <= 55)], 2))
print("g(1) =", round(g_of_S(r, N, 1), 2), "vs mean number of families", round(1 + r * (N - 1), 2))
