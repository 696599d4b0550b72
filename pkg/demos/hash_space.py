"""
How full is the address space?
==============================

A hostname hashes to a 32-bit address that is usually nobody's. Scaled
down to a 16-bit space with 2**14 random live ids, count how often a
hash lands on a live id and compare with 1 - exp(-1/4).
"""

import math
import random

from andna import digest32, ring_distance, rounded_hash_gnode

rng = random.Random(2)
space = 1 << 16
live = {rng.randrange(space) for _ in range(1 << 14)}
print("distinct live ids:", len(live), "of", space)

trials = 100_000
hits = sum((digest32(f"name-{i}".encode()) & 0xFFFF) in live for i in range(trials))
print(f"measured {hits / trials:.4f}, expected {1 - math.exp(-0.25):.4f}")

# A hash that misses is served by the nearest live gnode on the ring.
gnodes = sorted(rng.sample(range(1 << 24), 8))
h = digest32(b"netsukuku") >> 8
g = rounded_hash_gnode(h, gnodes)
print(f"hash gnode {h:06x} -> {g:06x} (distance {ring_distance(h, g)})")
