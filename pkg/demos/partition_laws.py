"""
Exact partition laws
====================

Unlike the Ewens formula, the duplication model's partition law depends
on the order of the blocks, not only on their sizes.
"""

from yulefam import (CRPParams, SetPartition, dup_partition_prob, enumerate_partitions, ewens_prob,
                     polya_sequence_prob, simulate_crp)

print(f"{'partition':>10} {'duplication':>12} {'Ewens':>8}")
for p in enumerate_partitions(3):
    print(f"{str(p):>10} {dup_partition_prob(0.5, p):12.4f} {ewens_prob(1.0, p):8.4f}")

# same block sizes, different probabilities
a, b = SetPartition.parse("1,2|3"), SetPartition.parse("1,3|2")
print("\n{1,2}{3} vs {1,3}{2}:", dup_partition_prob(0.5, a), dup_partition_prob(0.5, b))

# the Polya urn, by contrast, is exchangeable
print("urn sequences 110 and 011:", polya_sequence_prob(1, 1, [1, 1, 0]), polya_sequence_prob(1, 1, [0, 1, 1]))

# a Chinese restaurant with (alpha, theta) = (0.5, 1)
print("restaurant seating:", simulate_crp(CRPParams(0.5, 1.0), 12, seed=5))
