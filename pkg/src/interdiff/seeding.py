"""Splittable seeding for replications.

A replication's seed depends only on the master seed and its index, so a
batch gives the same per-replication streams no matter how it is split
across workers.
"""
MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def child_seed(master: int, index: int) -> int:
    return splitmix64((master & MASK64) ^ splitmix64(index))
