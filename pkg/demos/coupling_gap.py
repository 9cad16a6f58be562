"""
Sticks and populations on one probability space
===============================================

Build the stick-breaking weights and the population together and watch the
largest difference between cumulative family fractions shrink like 1/sqrt(N).
"""

from yulefam import ModelParams, max_coupling_gap, run_coupling_experiment, simulate_coupled

run = simulate_coupled(ModelParams(0.3, 1000), seed=4)
print("first five X_k:", run.X[:5].round(4))
print("first five Y_k:", run.Y[:5].round(4))
print("max gap in this run:", round(max_coupling_gap(run), 4))

report = run_coupling_experiment(0.3, [100, 400, 1600, 6400], replicates=300)
print(f"\n{'N':>6} {'mean gap':>10} {'stderr':>9} {'5/sqrt N':>9}")
for N, gap, se, bound, ratio in report.rows():
    print(f"{N:6d} {gap:10.5f} {se:9.5f} {bound:9.4f}")
slope, se = report.loglog_slope()
print(f"\nlog-log slope {slope:.3f} +- {se:.3f}")
