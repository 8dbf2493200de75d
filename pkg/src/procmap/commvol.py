"""Communication-volume models for block-partitioned iteration spaces.

Three published closed forms plus one counting oracle:

* `surface_volume` -- boundary elements of a block partition, both sides of
  every internal face:  SA(w) * d - SA(l)  with  SA(x) = 2 * prod(x) * sum(1/x).
  At k = 2 this is the perimeter form 2*(w1 + w2)*d - 2*(l1 + l2).
* `halo_volume` -- anisotropic halo exchange:  V = sum_n d_n h_n prod_{m!=n} l_m.
  This is a different published model from `surface_volume` (it counts d_n
  slabs per dimension, edge slabs included); the two are never cross-asserted.
* `transpose_volume` -- all-to-all along one dimension:
  V*_n = (1 - 1/d_n) * prod(w) * d.
* `oracle_boundary_count` -- enumerates cells near block faces, independent of
  the closed forms, and is the ground truth the formulas are validated against.

Workloads w_m = l_m / d_m are exact rationals throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod

from .errors import DimOutOfRange, ShapeMismatch, TooLarge

#: Largest cell count `oracle_boundary_count` will enumerate.
ORACLE_CELL_CAP = 10_000_000


@dataclass(frozen=True)
class BlockGrid:
    """A rectangular iteration space cut into a grid of blocks.

    Block boundaries along dimension m fall at floor(l_m * b / d_m), the same
    arithmetic a block mapping function uses, so non-divisible extents produce
    the blocks the mapper actually assigns.
    """

    extents: tuple[int, ...]
    grid: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(self.extents))
        object.__setattr__(self, "grid", tuple(self.grid))
        if len(self.extents) != len(self.grid):
            raise ShapeMismatch(
                f"extents rank {len(self.extents)} != grid rank {len(self.grid)}"
            )
        for m, (l, d) in enumerate(zip(self.extents, self.grid)):
            if not 1 <= d <= l:
                raise ShapeMismatch(f"grid[{m}] = {d} not in 1..{l}")

    @property
    def rank(self) -> int:
        return len(self.extents)

    @property
    def blocks(self) -> int:
        return prod(self.grid)

    def workloads(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(l, d) for l, d in zip(self.extents, self.grid))

    def boundaries(self, m: int) -> list[int]:
        """The d_m + 1 cut positions of dimension m (0 and l_m included)."""
        l, d = self.extents[m], self.grid[m]
        return [l * b // d for b in range(d + 1)]


@dataclass(frozen=True)
class HaloSpec:
    """Per-dimension halo widths; width 0 disables exchange along a dimension."""

    widths: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(self.widths))
        if any(w < 0 for w in self.widths):
            raise ShapeMismatch(f"halo widths must be non-negative, got {self.widths}")


def _halo_widths(grid: BlockGrid, halo) -> tuple[int, ...]:
    widths = halo.widths if isinstance(halo, HaloSpec) else tuple(halo)
    if len(widths) != grid.rank:
        raise ShapeMismatch(f"halo rank {len(widths)} != grid rank {grid.rank}")
    return widths


def _surface_area(x) -> Fraction:
    return 2 * prod(x, start=Fraction(1)) * sum(Fraction(1) / v for v in x)


def surface_volume(grid: BlockGrid) -> Fraction:
    """Boundary element count SA(w) * d - SA(l), both sides of each face."""
    return _surface_area(grid.workloads()) * grid.blocks - _surface_area(grid.extents)


def perimeter_volume(grid: BlockGrid) -> Fraction:
    """2D-only perimeter form 2*(w1 + w2)*d - 2*(l1 + l2); equals surface_volume."""
    if grid.rank != 2:
        raise ShapeMismatch(f"perimeter form is 2D only, got rank {grid.rank}")
    w1, w2 = grid.workloads()
    l1, l2 = grid.extents
    return 2 * (w1 + w2) * grid.blocks - 2 * (l1 + l2)


def halo_volume(grid: BlockGrid, halo) -> Fraction:
    """Anisotropic halo volume: sum_n d_n * h_n * prod_{m != n} l_m."""
    widths = _halo_widths(grid, halo)
    total = Fraction(0)
    for n in range(grid.rank):
        total += (
            grid.grid[n]
            * widths[n]
            * prod(l for m, l in enumerate(grid.extents) if m != n)
        )
    return total


def halo_volume_blockform(grid: BlockGrid, halo) -> Fraction:
    """The equivalent form (sum_n h_n / w_n) * prod(l); exact for uniform blocks."""
    widths = _halo_widths(grid, halo)
    ws = grid.workloads()
    return sum(Fraction(h) / w for h, w in zip(widths, ws)) * prod(grid.extents)


def transpose_volume(grid: BlockGrid, n: int) -> Fraction:
    """All-to-all volume along dimension n: (1 - 1/d_n) * prod(w) * d."""
    if not 0 <= n < grid.rank:
        raise DimOutOfRange(f"dimension {n} out of range for rank {grid.rank}")
    w_prod = prod(grid.workloads(), start=Fraction(1))
    return (1 - Fraction(1, grid.grid[n])) * w_prod * grid.blocks


def oracle_boundary_count(grid: BlockGrid, halo, cap: int = ORACLE_CELL_CAP) -> int:
    """Count cells near internal block faces by direct enumeration.

    For every face between two adjacent blocks along dimension n, cells of
    the two blocks within h_n of the face are counted, both sides, summed
    over all faces.  Because the partition is a product grid, the qualifying
    cells along dimension n pair with every cell position in the other
    dimensions, so each dimension contributes its 1D count times
    prod_{m != n} l_m.
    """
    widths = _halo_widths(grid, halo)
    if prod(grid.extents) > cap:
        raise TooLarge(f"{prod(grid.extents)} cells exceed the cap of {cap}")
    total = 0
    for n in range(grid.rank):
        h = widths[n]
        if h == 0:
            continue
        bounds = grid.boundaries(n)
        line = 0
        for b in range(1, grid.grid[n]):
            cut = bounds[b]
            # cells of the left block within h below the cut
            for x in range(bounds[b - 1], cut):
                if x >= cut - h:
                    line += 1
            # cells of the right block within h at or above the cut
            for x in range(cut, bounds[b + 1]):
                if x < cut + h:
                    line += 1
        cross = prod(l for m, l in enumerate(grid.extents) if m != n)
        total += line * cross
    return total
