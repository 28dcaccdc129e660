"""Simultaneous ball-growth process on a finite point set.

Grow an L-infinity ball at unit speed around every point of X.  Each time two
balls of distinct components touch, join their centers by an edge; after k-1
merges the edges form a spanning tree.  The merge radii are half-integers, so
everything is stored as doubled radii (``r2 = 2r``), keeping all comparisons
exact: balls of radius r around u and v first touch when 2r equals the
Chebyshev distance.

The merge sequence is exactly single linkage: the multiset of merge radii
equals the multiset of L-infinity minimum-spanning-tree edge half-lengths.
Ties are broken deterministically by the lexicographically smallest eligible
(u, v) pair with u < v, so records are independent of input order.

Blobs are the connected components arising along the way; each carries its
doubled birth and death radii and a rasterized shell region (death-ball union
minus birth-ball union).  Shells of distinct blobs are pairwise disjoint.
Boundary extraction uses L-infinity (box) adjacency, matching the ball
geometry; the root blob's outer face is the boundary of the doubled box.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .lattice import Region, Site, linf_distance


@dataclass(frozen=True)
class MergeEdge:
    u: Site
    v: Site
    r2: int  # doubled merge radius == Chebyshev distance of u, v


@dataclass(frozen=True)
class GrowthRecord:
    points: tuple[Site, ...]
    edges: tuple[MergeEdge, ...]

    @property
    def k(self) -> int:
        return len(self.points)

    def r2_sequence(self) -> tuple[int, ...]:
        return tuple(e.r2 for e in self.edges)


@dataclass(frozen=True)
class Blob:
    """A component of the growth process; ``d2 is None`` marks the root.

    ``others`` holds the remaining points of X.  A dying blob's death ball
    touches the balls of other same-radius components at sites exactly
    equidistant to both (possible only for even d2); those interface sites
    belong to no shell, which is what keeps the shells pairwise disjoint on
    the lattice.
    """

    members: frozenset[Site]
    b2: int
    d2: int | None
    others: frozenset[Site] | None = None

    @property
    def is_root(self) -> bool:
        return self.d2 is None


def _validated_points(points: Iterable[Site]) -> tuple[Site, ...]:
    pts = tuple(tuple(int(c) for c in p) for p in points)
    if not pts:
        raise ValueError("need at least one point")
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    dims = {len(p) for p in pts}
    if len(dims) != 1:
        raise ValueError("points must share one dimension")
    return pts


def grow_tree(points: Iterable[Site]) -> GrowthRecord:
    """Run the growth process; returns merge edges in nondecreasing r2 order.

    Records are canonical: points are stored sorted, and ties in the merge
    order break on the lexicographically smallest (u, v) pair, so permuted
    inputs yield identical records.
    """
    pts = tuple(sorted(_validated_points(points)))
    k = len(pts)
    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            pairs.append((linf_distance(pts[i], pts[j]), pts[i], pts[j], i, j))
    pairs.sort(key=lambda t: (t[0], t[1], t[2]))

    parent = list(range(k))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for dist, u, v, i, j in pairs:
        ri, rj = find(i), find(j)
        if ri == rj:
            continue
        parent[ri] = rj
        edges.append(MergeEdge(u, v, dist))
        if len(edges) == k - 1:
            break
    return GrowthRecord(pts, tuple(edges))


def merge_radii(points: Iterable[Site]) -> Counter:
    """Multiset of doubled merge radii R(X); values are ints (r2 = 2r)."""
    return Counter(grow_tree(points).r2_sequence())


def blobs(record: GrowthRecord, n: int) -> list[Blob]:
    """All components arising during the merge sequence, 2k-1 in total.

    Points must lie in the box of radius ``n``; the final all-points component
    is the root (``d2 = None``), whose outer face is the boundary of the
    doubled box.
    """
    for p in record.points:
        if any(abs(c) > n for c in p):
            raise ValueError(f"point {p} outside the radius-{n} box")
    comp: dict[Site, frozenset[Site]] = {p: frozenset([p]) for p in record.points}
    born: dict[frozenset, int] = {frozenset([p]): 0 for p in record.points}
    out: list[Blob] = []
    allpts = frozenset(record.points)
    for e in record.edges:
        cu, cv = comp[e.u], comp[e.v]
        out.append(Blob(cu, born.pop(cu), e.r2, others=allpts - cu))
        out.append(Blob(cv, born.pop(cv), e.r2, others=allpts - cv))
        merged = cu | cv
        born[merged] = e.r2
        for p in merged:
            comp[p] = merged
    (root_members, root_b2), = born.items()
    out.append(Blob(root_members, root_b2, None))
    return out


def _cheb_field(members: Sequence[Site], origin: Site, shape: tuple[int, ...]) -> np.ndarray:
    """min over members of the Chebyshev distance, rasterized on a grid."""
    d = len(origin)
    grids = np.indices(shape)
    out = np.full(shape, np.iinfo(np.int64).max, dtype=np.int64)
    for x in members:
        cheb = np.zeros(shape, dtype=np.int64)
        for a in range(d):
            np.maximum(cheb, np.abs(grids[a] + origin[a] - x[a]), out=cheb)
        np.minimum(out, cheb, out=out)
    return out


def _ball_union_mask(
    members: Sequence[Site], r2: int, origin: Site, shape: tuple[int, ...]
) -> np.ndarray:
    """Sites w with 2 * min_x ||w - x||_inf <= r2, rasterized on a grid."""
    if r2 < 0:
        return np.zeros(shape, dtype=bool)
    return _cheb_field(members, origin, shape) <= r2 // 2


def _blob_bbox(blob: Blob, n: int) -> tuple[Site, tuple[int, ...]]:
    d = len(next(iter(blob.members)))
    if blob.is_root:
        origin = (-(2 * n + 1),) * d
        shape = (2 * (2 * n + 1) + 1,) * d
        return origin, shape
    pad = blob.d2 // 2 + 1
    lo = tuple(min(x[a] for x in blob.members) - pad for a in range(d))
    hi = tuple(max(x[a] for x in blob.members) + pad for a in range(d))
    return lo, tuple(h - l + 1 for l, h in zip(lo, hi))


def _region_from_mask(mask: np.ndarray, origin: Site, d: int) -> Region:
    coords = np.argwhere(mask)
    sites = frozenset(tuple(int(c + o) for c, o in zip(row, origin)) for row in coords)
    return Region(sites, dim=d)


def blob_region(blob: Blob, n: int) -> Region:
    """The shell between the blob's birth-ball union and death-ball union."""
    mask, origin = blob_region_mask(blob, n)
    return _region_from_mask(mask, origin, len(next(iter(blob.members))))


def blob_region_mask(blob: Blob, n: int) -> tuple[np.ndarray, Site]:
    """Raster form of ``blob_region``; (mask, grid origin)."""
    members = sorted(blob.members)
    origin, shape = _blob_bbox(blob, n)
    if blob.is_root:
        d = len(origin)
        box = np.zeros(shape, dtype=bool)
        sl = tuple(slice(-2 * n - origin[a], 2 * n + 1 - origin[a]) for a in range(d))
        box[sl] = True
        death = _ball_union_mask(members, blob.b2, origin, shape)
        return box & ~death, origin
    cheb = _cheb_field(members, origin, shape)
    death = cheb * 2 <= blob.d2
    if blob.others and blob.d2 % 2 == 0:
        # touching interfaces with other components belong to no shell
        other_cheb = _cheb_field(sorted(blob.others), origin, shape)
        death &= ~((cheb * 2 == blob.d2) & (other_cheb * 2 <= blob.d2))
    birth = cheb * 2 <= blob.b2
    return death & ~birth, origin


def _box_adjacent_boundary(mask: np.ndarray) -> np.ndarray:
    """Outer boundary under Chebyshev (box) adjacency."""
    from scipy import ndimage

    full = np.ones((3,) * mask.ndim, dtype=bool)
    return ndimage.binary_dilation(mask, structure=full) & ~mask


def blob_boundaries(blob: Blob, n: int) -> tuple[Region, Region]:
    """(inner, outer) face boundaries of the blob's shell.

    Inner: boundary of the birth-ball union.  Outer: boundary of the
    death-ball union, or the boundary of the doubled box for the root.
    """
    members = sorted(blob.members)
    d = len(members[0])
    origin, shape = _blob_bbox(blob, n)
    if blob.is_root:
        pad_origin = tuple(o - 1 for o in origin)
        pad_shape = tuple(s + 2 for s in shape)
        box = np.zeros(pad_shape, dtype=bool)
        sl = tuple(slice(-2 * n - pad_origin[a], 2 * n + 1 - pad_origin[a]) for a in range(d))
        box[sl] = True
        ob = _region_from_mask(_box_adjacent_boundary(box), pad_origin, d)
        ib = _region_from_mask(
            _box_adjacent_boundary(_ball_union_mask(members, blob.b2, pad_origin, pad_shape)),
            pad_origin,
            d,
        )
        return ib, ob
    pad_origin = tuple(o - 1 for o in origin)
    pad_shape = tuple(s + 2 for s in shape)
    birth = _ball_union_mask(members, blob.b2, pad_origin, pad_shape)
    death = _ball_union_mask(members, blob.d2, pad_origin, pad_shape)
    ib = _region_from_mask(_box_adjacent_boundary(birth), pad_origin, d)
    ob = _region_from_mask(_box_adjacent_boundary(death), pad_origin, d)
    return ib, ob


@dataclass(frozen=True)
class RadiusBoundReport:
    """Checks i * r2_{k - i^d} <= 2n for integer i in [1, (k-1)^(1/d)]."""

    checks: tuple[tuple[int, int, int], ...]  # (i, r2, bound 2n)
    equalities: tuple[tuple[int, int, int], ...]
    violations: tuple[tuple[int, int, int], ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_radius_bound(record: GrowthRecord, n: int) -> RadiusBoundReport:
    """Pigeonhole bound on the ordered merge radii, in non-strict form."""
    for p in record.points:
        if any(abs(c) > n for c in p):
            raise ValueError(f"point {p} outside the radius-{n} box")
    k = record.k
    d = len(record.points[0])
    r2s = record.r2_sequence()
    checks, eqs, bad = [], [], []
    i = 1
    while i**d <= k - 1:
        r2 = r2s[k - i**d - 1]  # r_{k - i^d}, 1-based
        entry = (i, r2, 2 * n)
        checks.append(entry)
        if i * r2 > 2 * n:
            bad.append(entry)
        elif i * r2 == 2 * n:
            eqs.append(entry)
        i += 1
    return RadiusBoundReport(tuple(checks), tuple(eqs), tuple(bad))


def ordering_count(radii: Counter | Iterable[int]) -> int:
    """Number of distinct orderings of the multiset (exact big integer)."""
    c = radii if isinstance(radii, Counter) else Counter(radii)
    total = sum(c.values())
    out = math.factorial(total)
    for mult in c.values():
        out //= math.factorial(mult)
    return out


def _pi_callable(pi) -> Callable[[int], float]:
    if callable(pi):
        return pi
    return lambda s: pi.pi(s)


def prob_upper_bound(radii: Counter | Iterable[int], n: int, pi, c3: float) -> float:
    """Product bound on the probability that all of X has long arms.

    ``radii`` holds doubled radii; the arm probability at half-integer radius
    r is evaluated at ceil(r), conservative for nonincreasing pi.
    """
    c = radii if isinstance(radii, Counter) else Counter(radii)
    f = _pi_callable(pi)
    out = c3 * f(n)
    for r2, mult in c.items():
        out *= (c3 * f((r2 + 1) // 2)) ** mult
    return out


def count_upper_bound(radii: Counter | Iterable[int], n: int, c4: float, d: int) -> float:
    """Bound on the number of k-point sets with the given merge radii."""
    c = radii if isinstance(radii, Counter) else Counter(radii)
    out = c4 * float(ordering_count(c)) * float(n) ** d
    for r2, mult in c.items():
        r = Fraction(r2, 2)
        out *= (d * c4 * float(r) ** (d - 1)) ** mult
    return out
