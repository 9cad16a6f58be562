"""
Beyond the power-law window
===========================

Past the scale N^(1-r) the power law no longer describes the family
counts: the expected number of families larger than x N^(1-r) eventually
falls off like exp(-c x^(1/r)), well below g.
"""

import numpy as np

from yulefam import g_of_S, run_tail_decay_experiment

r, N = 0.5, 10_000
d = run_tail_decay_experiment(r, N, replicates=2000, x_grid=[1, 1.5, 2, 2.5, 3])
for x, est, se in d.rows():
    S = x * N ** (1 - r)
    print(f"x={x:4.2f}  families > {S:5.0f}: {est:.4f} +- {se:.4f}   power law {g_of_S(r, N, S):.4f}")
print(f"\nslope of log count in x^(1/r): {d.slope:.3f} (t = {d.t_stat:.1f})")
print("decreasing:", d.is_decreasing())
