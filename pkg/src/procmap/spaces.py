"""Processor-space algebra.

A machine exposes a 2-level logical grid (nodes x processors-per-node).
Transformations reshape that grid while staying invertible: any index into a
transformed space resolves back to a base (node, processor) coordinate.  All
values are immutable and every operation is a pure function, so spaces can be
shared freely across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod

from .errors import (
    BadDimOrder,
    BadSliceBounds,
    DimOutOfRange,
    IndexOutOfRange,
    NonDivisibleSplit,
    ProductMismatch,
)

PROC_KINDS = ("CPU", "GPU", "OMP")

#: Cap for exhaustive materialization; resolution itself is lazy per index.
MATERIALIZE_CAP = 1 << 20


@dataclass(frozen=True)
class MachineShape:
    """A machine's base grid: `nodes` nodes with `procs_per_node` processors each."""

    kind: str
    nodes: int
    procs_per_node: int

    def __post_init__(self):
        if self.kind not in PROC_KINDS:
            raise ValueError(f"unknown processor kind {self.kind!r}")
        if self.nodes < 1 or self.procs_per_node < 1:
            raise ValueError("machine extents must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nodes, self.procs_per_node)


@dataclass(frozen=True)
class Split:
    dim: int
    factor: int


@dataclass(frozen=True)
class Merge:
    p: int
    q: int


@dataclass(frozen=True)
class Swap:
    p: int
    q: int


@dataclass(frozen=True)
class Slice:
    dim: int
    low: int
    high: int


Transform = Split | Merge | Swap | Slice


@dataclass(frozen=True)
class _Link:
    """One applied transform plus the shape of the space it was applied to."""

    transform: Transform
    source_shape: tuple[int, ...]


def _check_dim(shape: tuple[int, ...], i: int, what: str = "dimension") -> None:
    if not 0 <= i < len(shape):
        raise DimOutOfRange(f"{what} {i} out of range for shape {shape}")


@dataclass(frozen=True)
class ProcSpace:
    """A processor grid reached from a base machine through a transform chain."""

    base: MachineShape
    chain: tuple[_Link, ...]
    shape: tuple[int, ...]

    @staticmethod
    def of(machine: MachineShape) -> "ProcSpace":
        return ProcSpace(machine, (), machine.shape)

    @property
    def rank(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return prod(self.shape)

    def _extend(self, transform: Transform, new_shape: tuple[int, ...]) -> "ProcSpace":
        return ProcSpace(self.base, self.chain + (_Link(transform, self.shape),), new_shape)

    # -- transformation primitives ------------------------------------------

    def split(self, i: int, d: int) -> "ProcSpace":
        """Replace dimension i of extent s by the pair (d, s // d)."""
        _check_dim(self.shape, i)
        if d < 1:
            raise NonDivisibleSplit(f"split factor must be positive, got {d}")
        s = self.shape[i]
        if s % d != 0:
            raise NonDivisibleSplit(f"factor {d} does not divide extent {s} of dim {i}")
        new_shape = self.shape[:i] + (d, s // d) + self.shape[i + 1:]
        return self._extend(Split(i, d), new_shape)

    def merge(self, p: int, q: int) -> "ProcSpace":
        """Fuse dimensions p < q into one dimension of extent s_p * s_q at position p."""
        _check_dim(self.shape, p)
        _check_dim(self.shape, q)
        if p >= q:
            raise BadDimOrder(f"merge requires p < q, got ({p}, {q})")
        new_shape = (
            self.shape[:p]
            + (self.shape[p] * self.shape[q],)
            + self.shape[p + 1:q]
            + self.shape[q + 1:]
        )
        return self._extend(Merge(p, q), new_shape)

    def swap(self, p: int, q: int) -> "ProcSpace":
        """Exchange dimensions p and q."""
        _check_dim(self.shape, p)
        _check_dim(self.shape, q)
        lst = list(self.shape)
        lst[p], lst[q] = lst[q], lst[p]
        return self._extend(Swap(p, q), tuple(lst))

    def slice(self, i: int, low: int, high: int) -> "ProcSpace":
        """Restrict dimension i to [low, high], offsetting indices by low."""
        _check_dim(self.shape, i)
        if not 0 <= low <= high < self.shape[i]:
            raise BadSliceBounds(
                f"slice bounds ({low}, {high}) invalid for extent {self.shape[i]}"
            )
        new_shape = self.shape[:i] + (high - low + 1,) + self.shape[i + 1:]
        return self._extend(Slice(i, low, high), new_shape)

    def decompose(self, i: int, factors: tuple[int, ...]) -> "ProcSpace":
        """Replace dimension i by the given factors via a split sequence.

        decompose(i, (f_1, ..., f_k)) is shorthand for splitting dimension
        i + n by f_{n+1}, for n = 0 .. k-2; the product of the factors must
        equal the extent of dimension i.
        """
        _check_dim(self.shape, i)
        factors = tuple(factors)
        if not factors or any(f < 1 for f in factors):
            raise ProductMismatch(f"factors must be positive, got {factors}")
        if prod(factors) != self.shape[i]:
            raise ProductMismatch(
                f"product of {factors} is {prod(factors)}, expected {self.shape[i]}"
            )
        space = self
        for n, f in enumerate(factors[:-1]):
            space = space.split(i + n, f)
        return space

    # -- index resolution -----------------------------------------------------

    @property
    def has_slice(self) -> bool:
        return any(isinstance(link.transform, Slice) for link in self.chain)

    def resolve(self, idx: tuple[int, ...]) -> tuple[int, int]:
        """Map an index of this space back to a base (node, processor) pair.

        Walks the transform chain in reverse, applying each transform's index
        mapping.  Any out-of-range coordinate, including intermediate ones, is
        a hard error rather than a wraparound.
        """
        idx = tuple(idx)
        self._check_index(idx, self.shape)
        coords = list(idx)
        for link in reversed(self.chain):
            t = link.transform
            src = link.source_shape
            if isinstance(t, Split):
                i, d = t.dim, t.factor
                coords[i:i + 2] = [coords[i] + coords[i + 1] * d]
            elif isinstance(t, Merge):
                p, q = t.p, t.q
                sp = src[p]
                v = coords[p]
                coords[p:p + 1] = [v % sp]
                coords.insert(q, v // sp)
            elif isinstance(t, Swap):
                coords[t.p], coords[t.q] = coords[t.q], coords[t.p]
            else:  # Slice
                coords[t.dim] += t.low
            self._check_index(coords, src)
        node, proc = coords
        return node, proc

    @staticmethod
    def _check_index(coords, shape) -> None:
        if len(coords) != len(shape):
            raise IndexOutOfRange(f"index {tuple(coords)} has wrong rank for shape {shape}")
        for c, s in zip(coords, shape):
            if not 0 <= c < s:
                raise IndexOutOfRange(f"index {tuple(coords)} out of range for shape {shape}")

    def indices(self):
        """Iterate over every index tuple of this space."""
        return itertools.product(*(range(s) for s in self.shape))

    def materialize(self) -> dict[tuple[int, ...], tuple[int, int]]:
        """Full index -> (node, proc) table; intended for exhaustive tests."""
        if self.size > MATERIALIZE_CAP:
            raise IndexOutOfRange(f"space of {self.size} points exceeds materialize cap")
        return {idx: self.resolve(idx) for idx in self.indices()}


def machine_space(kind: str, nodes: int, procs_per_node: int) -> ProcSpace:
    """Convenience constructor for the untransformed space of a machine."""
    return ProcSpace.of(MachineShape(kind, nodes, procs_per_node))
