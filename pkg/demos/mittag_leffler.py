"""
Mittag-Leffler density, distribution function and sampler
=========================================================
"""

import math

import numpy as np

from yulefam import ml_cdf, ml_density, ml_moment, sample_ml, sample_stable, tail_constants

# at alpha = 1/2 the density is a half-normal shape
x = np.array([0.5, 1.0, 2.0, 4.0])
print("density      ", ml_density(0.5, x).round(10))
print("closed form  ", (np.exp(-x ** 2 / 4) / math.sqrt(math.pi)).round(10))
print("cdf          ", ml_cdf(0.5, x).round(10))

# the same evaluators for other parameters
for alpha in (0.2, 0.8, 0.95):
    print(f"alpha={alpha}: f(1) = {ml_density(alpha, 1.0):.10f}, F(1) = {ml_cdf(alpha, 1.0):.10f}")

# samplers: positive stable X with E exp(-lam X) = exp(-lam^alpha), and M = X^(-alpha)
X = sample_stable(0.7, seed=2, size=200_000)
print("\nE exp(-X) =", np.exp(-X).mean().round(4), " target", round(math.exp(-1), 4))
M = sample_ml(0.7, seed=3, size=200_000)
print("E M =", M.mean().round(4), " target", round(ml_moment(0.7, 1), 4))

# tail constants in the two normalisations of the stable law
print("\nconstants, characteristic-function scale:", tail_constants(0.5))
print("constants, Laplace scale:                ", tail_constants(0.5, "laplace"))
