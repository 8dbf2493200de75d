"""Choosing a processor grid: exhaustive search vs. the balanced heuristic.

Splitting d processors over a k-dimensional iteration space means choosing
factors with product d.  A shape-oblivious heuristic balances the factors;
the exhaustive search scores every factorization against the iteration-space
extents and provably minimizes boundary communication.
"""

from procmap import (
    BlockGrid,
    amgm_lower_bound,
    enumerate_factorizations,
    greedy_grid,
    score,
    search_optimal,
    surface_volume,
    workload_vector,
)

print(__doc__)

# -- 6 processors over a 12 x 18 space --------------------------------------------
extents = (12, 18)
print(f"candidate factorizations of 6 over {extents}:")
for f in enumerate_factorizations(6, 2):
    vol = surface_volume(BlockGrid(extents, f))
    print(f"  grid {f}: inverse-workload sum {score(f, extents)!s:>6}, "
          f"boundary volume {vol}")

greedy = greedy_grid(6, 2)
best, best_score = search_optimal(6, extents)
print(f"balanced heuristic picks {greedy}: "
      f"volume {surface_volume(BlockGrid(extents, greedy))}")
print(f"exhaustive search picks {best}: "
      f"volume {surface_volume(BlockGrid(extents, best))}")

# -- the integrality trap -----------------------------------------------------------
# 72 = 2^3 * 3^2 over an (8, 9) space: balancing factor magnitudes gives
# lopsided per-processor workloads, while the search lines the grid up with
# the extents for a perfectly balanced workload of (1, 1).
extents = (8, 9)
greedy = greedy_grid(72, 2)
best, _ = search_optimal(72, extents)


def fmt(workloads):
    return "(" + ", ".join(str(w) for w in workloads) + ")"


print(f"\n72 processors over {extents}:")
print(f"  heuristic {greedy}: workload vector {fmt(workload_vector(greedy, extents))}")
print(f"  search    {best}: workload vector {fmt(workload_vector(best, extents))}")

# -- the lower bound ------------------------------------------------------------------
# The inverse-workload sum can never drop below k * (d / prod(l))^(1/k);
# equality holds exactly when all workloads agree.
for d, extents in [(6, (12, 18)), (16, (4, 8, 4)), (72, (8, 9))]:
    _, s = search_optimal(d, extents)
    bound = amgm_lower_bound(d, extents)
    tag = "tight" if abs(float(s) - bound) < 1e-12 else "slack"
    print(f"d={d:>3} l={extents}: score {float(s):.6f} >= bound {bound:.6f} ({tag})")
