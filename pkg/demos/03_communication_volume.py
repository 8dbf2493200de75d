"""Communication-volume models, validated against a counting oracle.

Three closed forms cover the common exchange patterns of block-partitioned
grids: boundary elements (both sides of every internal face), anisotropic
halo exchange, and all-to-all transposes along a dimension.  A brute-force
oracle counts cells near block faces directly and confirms the closed forms.
"""

from procmap import BlockGrid, halo_volume, oracle_boundary_count, surface_volume, transpose_volume

print(__doc__)

# -- boundary elements: the cost of a bad grid -------------------------------------
for extents, grid_dims in [((12, 18), (3, 2)), ((12, 18), (2, 3)), ((18, 12), (3, 2))]:
    grid = BlockGrid(extents, grid_dims)
    closed = surface_volume(grid)
    counted = oracle_boundary_count(grid, (1,) * len(extents))
    print(f"space {extents} on grid {grid_dims}: "
          f"closed form {closed}, oracle {counted}")
    assert closed == counted

# -- a 3D block partition ------------------------------------------------------------
grid = BlockGrid((4, 8, 4), (2, 4, 2))
print(f"\nspace (4, 8, 4) on grid (2, 4, 2), blocks of {grid.workloads()}:")
print(f"  boundary elements {surface_volume(grid)} "
      f"(oracle {oracle_boundary_count(grid, (1, 1, 1))})")

# -- anisotropic halos ------------------------------------------------------------------
# A halo of width h_n along dimension n exchanges d_n * h_n * prod(l_other)
# elements; widths of zero silence a dimension entirely.
for widths in [(1, 1, 1), (2, 0, 1), (0, 0, 0)]:
    print(f"  halo widths {widths}: volume {halo_volume(grid, widths)}")

# -- transposes ---------------------------------------------------------------------------
# All-to-all along dimension n keeps 1/d_n of each partition local and sends
# the rest to peers in the same pencil.
for n in range(3):
    print(f"  transpose along dim {n}: volume {transpose_volume(grid, n)}")
