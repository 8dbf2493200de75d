"""Processor-space algebra: reshape a machine grid and resolve indices back.

A machine is a 2-level grid, nodes x processors-per-node.  Transformations
(split, merge, swap, slice, decompose) reshape that grid into whatever rank a
mapping strategy needs, and every index of the reshaped space resolves back
to a concrete (node, processor) pair.
"""

from procmap import machine_space

print(__doc__)

# -- a 2-node, 4-GPU machine ---------------------------------------------------
m = machine_space("GPU", 2, 4)
print(f"base space: shape {m.shape}, {m.size} processors")

# Fuse both dimensions into one flat rank: index 5 lands on node 1, GPU 2.
flat = m.merge(0, 1)
print(f"merge(0, 1): shape {flat.shape}; flat[5] resolves to {flat.resolve((5,))}")

# Split the flat rank back apart; split is the exact inverse of merge.
restored = flat.split(0, 2)
print(f"then split(0, 2): shape {restored.shape}")
assert all(restored.resolve(idx) == m.resolve(idx) for idx in m.indices())
print("split/merge round-trip resolves identically to the original space")

# -- a 6D view for a 3D iteration space -----------------------------------------
# Four splits turn (2, 4) into (2, 1, 1) x (1, 2, 2): the node dimension
# blocks the x axis while the GPUs block the y-z plane.
six = m.split(0, 2).split(1, 1).split(3, 1).split(4, 2)
print(f"\nfour splits: shape {six.shape}")
for idx in [(0, 0, 0, 0, 0, 0), (1, 0, 0, 0, 1, 1)]:
    print(f"  six{idx} -> (node, gpu) = {six.resolve(idx)}")

# The 8 transformed indices cover all 8 processors exactly once.
targets = sorted(six.resolve(idx) for idx in six.indices())
assert targets == [(n, g) for n in range(2) for g in range(4)]
print("all 8 indices hit all 8 processors bijectively")

# -- slicing targets a processor subset -------------------------------------------
half = m.slice(1, 2, 3)
print(f"\nslice(1, 2, 3): shape {half.shape} (GPUs 2 and 3 of each node)")
print(f"  half[(1, 0)] -> {half.resolve((1, 0))}")
