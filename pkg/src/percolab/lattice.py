"""Lattice geometry: boxes, outer boundaries, adjacency, Chebyshev distance.

Two lattice kinds are supported:

* ``Z_BOND`` -- bond percolation on Z^d (d >= 2), nearest-neighbour adjacency.
* ``TRIANGULAR_SITE`` -- site percolation on the triangular lattice, realised
  as Z^2 with six neighbours: (+-1, 0), (0, +-1), (1, 1) and (-1, -1).

Sites are plain tuples of ints.  All distances used by the growth process are
L-infinity (Chebyshev), independent of the lattice kind.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import product
from typing import Iterable

Site = tuple[int, ...]


class LatticeKind(str, Enum):
    Z_BOND = "z_bond"
    TRIANGULAR_SITE = "triangular_site"


_TRI_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1))


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice kind plus ambient dimension."""

    kind: LatticeKind
    d: int = 2

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"dimension must be >= 2, got {self.d}")
        if self.kind == LatticeKind.TRIANGULAR_SITE and self.d != 2:
            raise ValueError("triangular site lattice is two-dimensional")

    @property
    def site_mode(self) -> bool:
        return self.kind == LatticeKind.TRIANGULAR_SITE

    def neighbor_offsets(self) -> tuple[Site, ...]:
        if self.kind == LatticeKind.TRIANGULAR_SITE:
            return _TRI_OFFSETS
        offsets = []
        for axis in range(self.d):
            for sign in (1, -1):
                off = [0] * self.d
                off[axis] = sign
                offsets.append(tuple(off))
        return tuple(offsets)


TRIANGULAR = LatticeSpec(LatticeKind.TRIANGULAR_SITE, 2)
Z2_BOND = LatticeSpec(LatticeKind.Z_BOND, 2)


@dataclass(frozen=True)
class Region:
    """A finite set of sites, optionally tagged with box/rectangle structure.

    ``shape`` is one of ``"box"`` (center + radius), ``"rect"`` (corner +
    per-axis extents, inclusive) or ``"set"``.  The structural tags let
    rectangle-aware operations (crossings) recover their geometry.  Regions
    are nonempty except for results of set-valued queries (the long-arm set
    of an all-closed configuration, say), which carry ``dim`` explicitly.
    """

    sites: frozenset[Site]
    shape: str = "set"
    origin: Site | None = None
    extent: tuple[int, ...] | None = None
    dim: int | None = None

    def __post_init__(self) -> None:
        if not self.sites and self.dim is None:
            raise ValueError("region must be nonempty (or carry an explicit dim)")
        dims = {len(s) for s in self.sites}
        if len(dims) > 1:
            raise ValueError("all sites must share one dimension")
        if dims:
            d = dims.pop()
            if self.dim is not None and self.dim != d:
                raise ValueError("dim does not match the sites")
            object.__setattr__(self, "dim", d)

    @property
    def d(self) -> int:
        return self.dim

    def __len__(self) -> int:
        return len(self.sites)

    def __contains__(self, site: Site) -> bool:
        return site in self.sites

    def __iter__(self):
        return iter(self.sites)

    def bounds(self) -> tuple[Site, Site]:
        """(min corner, max corner) of the bounding box."""
        if not self.sites:
            raise ValueError("empty region has no bounds")
        arr = list(self.sites)
        lo = tuple(min(s[a] for s in arr) for a in range(self.d))
        hi = tuple(max(s[a] for s in arr) for a in range(self.d))
        return lo, hi

    def to_json(self) -> list[list[int]]:
        return sorted(list(s) for s in self.sites)


def box_sites(center: Site, n: int) -> Region:
    """All sites within L-infinity distance ``n`` of ``center``."""
    if n < 0:
        raise ValueError(f"box radius must be >= 0, got {n}")
    ranges = [range(c - n, c + n + 1) for c in center]
    sites = frozenset(map(tuple, product(*ranges)))
    return Region(sites, shape="box", origin=tuple(center), extent=(n,))


def rect_region(corner: Site, widths: tuple[int, ...]) -> Region:
    """Axis-aligned rectangle: ``corner + [0, w_a]`` per axis, inclusive."""
    if len(widths) != len(corner):
        raise ValueError("corner and widths must have equal length")
    if any(w < 0 for w in widths):
        raise ValueError("rectangle extents must be >= 0")
    ranges = [range(c, c + w + 1) for c, w in zip(corner, widths)]
    sites = frozenset(map(tuple, product(*ranges)))
    return Region(sites, shape="rect", origin=tuple(corner), extent=tuple(widths))


def neighbors(v: Site, lattice: LatticeSpec) -> Region:
    """Adjacent sites of ``v`` under the lattice adjacency."""
    if len(v) != lattice.d:
        raise ValueError(f"site dimension {len(v)} != lattice dimension {lattice.d}")
    sites = frozenset(tuple(a + b for a, b in zip(v, off)) for off in lattice.neighbor_offsets())
    return Region(sites)


def outer_boundary(region: Region | Iterable[Site], lattice: LatticeSpec) -> Region:
    """Sites outside the region adjacent to some site of it."""
    inside = region.sites if isinstance(region, Region) else frozenset(region)
    offsets = lattice.neighbor_offsets()
    out = set()
    for s in inside:
        for off in offsets:
            w = tuple(a + b for a, b in zip(s, off))
            if w not in inside:
                out.add(w)
    return Region(frozenset(out))


def linf_distance(u: Site, v: Site) -> int:
    """Chebyshev distance max_a |u_a - v_a|."""
    if len(u) != len(v):
        raise ValueError("sites must share one dimension")
    return max(abs(a - b) for a, b in zip(u, v))


@lru_cache(maxsize=256)
def box_with_boundary(lattice: LatticeSpec, n: int, center: Site | None = None) -> Region:
    """The box of radius ``n`` together with its outer boundary.

    This is the standard carrier for experiments that look at arms from inside
    the box to its boundary.  Cached: carriers are reused heavily.
    """
    c = center if center is not None else (0,) * lattice.d
    box = box_sites(c, n)
    ring = outer_boundary(box, lattice)
    return Region(box.sites | ring.sites)
