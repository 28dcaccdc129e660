"""Connectivity analytics on a configuration.

Conventions (site mode): a path is open iff every vertex on it is open,
endpoints included; an arm from a box boundary needs an open vertex on that
boundary.  Bond mode: a path is open iff every edge is open; every site
participates, so singletons count as clusters of size 1.

Arm and crossing events confine paths to the stated region closure; any path
reaching the outer boundary must cross it, so the confinement loses no
generality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import grid
from .lattice import LatticeSpec, Region, Site, box_with_boundary
from .sampler import Config


@dataclass(frozen=True)
class ClusterLabels:
    """Cluster labels over a region; 0 marks non-participating positions."""

    lattice: LatticeSpec
    origin: tuple[int, ...]
    label_grid: np.ndarray = field(repr=False)
    sizes: np.ndarray = field(repr=False)

    def label_of(self, site: Site) -> int:
        idx = tuple(c - o for c, o in zip(site, self.origin))
        return int(self.label_grid[idx])

    def n_clusters(self) -> int:
        return len(self.sizes)


def _require_subregion(config: Config, region: Region) -> None:
    if not region.sites <= config.region.sites:
        raise ValueError("region escapes the configuration carrier")


def _bond_labels(config: Config, mask: np.ndarray) -> np.ndarray:
    edges = []
    for a in range(config.lattice.d):
        ok = grid.edge_exists(mask, a) & config.edge_open[a]
        edges.append(ok[None])
    return grid.label_bonds_batch(edges, mask)[0]


def _labels_on_mask(config: Config, mask: np.ndarray) -> np.ndarray:
    """Label grid for paths confined to ``mask``."""
    if config.site_mode:
        lab, _ = ndimage.label(config.site_open & mask, structure=grid.site_structure(config.lattice))
        return lab
    return _bond_labels(config, mask)


def label_clusters(config: Config, region: Region) -> ClusterLabels:
    """Connected clusters with paths confined to ``region``."""
    _require_subregion(config, region)
    mask = config.raster.mask_of_region(region)
    lab = _labels_on_mask(config, mask)
    sizes = grid.cluster_sizes_single(lab)
    return ClusterLabels(config.lattice, config.raster.origin, lab, sizes)


def ith_largest_size(labels: ClusterLabels, i: int) -> int:
    """Size of the i-th largest cluster; 0 if there are fewer than i."""
    if i < 1:
        raise ValueError("i must be >= 1")
    if i > len(labels.sizes):
        return 0
    return int(labels.sizes[i - 1])


def long_arm_set(config: Config, n: int) -> Region:
    """Sites of the inner box connected to the boundary of the doubled box.

    Paths are confined to box(2n) plus its outer boundary; the carrier must
    cover that set.
    """
    lattice = config.lattice
    needed = box_with_boundary(lattice, 2 * n)
    if not needed.sites <= config.region.sites:
        raise ValueError("carrier too small: need box(2n) plus boundary")
    raster = config.raster
    center = (0,) * lattice.d
    mask = raster.mask_of_region(needed)
    lab = _labels_on_mask(config, mask)
    ring = raster.boundary_mask(center, 2 * n)
    inner = raster.box_mask(center, n)
    seed = lab[ring]
    flags = np.zeros(int(lab.max(initial=0)) + 1, dtype=bool)
    flags[seed[seed > 0]] = True
    flags[0] = False
    hit = flags[lab] & inner
    coords = np.argwhere(hit)
    sites = frozenset(tuple(int(c + o) for c, o in zip(row, raster.origin)) for row in coords)
    return Region(sites, dim=lattice.d)


def arm_event(config: Config, m: int, n: int) -> bool:
    """Open path from the boundary of box(m) to the boundary of box(n).

    Paths confined to box(n) plus its outer boundary.  By convention the
    event is True when m == n.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m} n={n}")
    if m == n:
        return True
    lattice = config.lattice
    needed = box_with_boundary(lattice, n)
    if not needed.sites <= config.region.sites:
        raise ValueError("carrier too small: need box(n) plus boundary")
    raster = config.raster
    center = (0,) * lattice.d
    mask = raster.mask_of_region(needed)
    lab = _labels_on_mask(config, mask)
    a = raster.boundary_mask(center, m)
    b = raster.boundary_mask(center, n)
    return bool(grid.connect_through(lab[None], a, b)[0])


def _crossing(config: Config, rect: Region, axis: int) -> bool:
    if rect.shape != "rect" or rect.origin is None or rect.extent is None:
        raise ValueError("crossing events need a rectangle region")
    if config.lattice.d != 2:
        raise ValueError("crossing events are two-dimensional")
    _require_subregion(config, rect)
    raster = config.raster
    sl = raster.rect_slices(rect.origin, rect.extent)
    if config.site_mode:
        crop = config.site_open[sl]
        lab, _ = ndimage.label(crop, structure=grid.site_structure(config.lattice))
    else:
        shape = tuple(s.stop - s.start for s in sl)
        edges = []
        for a in range(2):
            e = config.edge_open[a][sl].copy()
            end = [slice(None), slice(None)]
            end[a] = slice(shape[a] - 1, shape[a])
            e[tuple(end)] = False
            edges.append(e[None])
        lab = grid.label_bonds_batch(edges, np.ones(shape, dtype=bool))[0]
    take = [slice(None), slice(None)]
    take[axis] = 0
    lo = lab[tuple(take)]
    take[axis] = -1
    hi = lab[tuple(take)]
    pool = lo[lo > 0]
    return bool(pool.size and (np.isin(hi, pool) & (hi > 0)).any())


def horizontal_crossing(config: Config, rect: Region) -> bool:
    """Left edge column connected to right edge column inside the rectangle."""
    return _crossing(config, rect, axis=0)


def vertical_crossing(config: Config, rect: Region) -> bool:
    """Bottom edge row connected to top edge row inside the rectangle."""
    return _crossing(config, rect, axis=1)


def connected_in(config: Config, s: Region, a: Region, b: Region) -> bool:
    """Some a in A joined to some b in B by an open path inside S."""
    _require_subregion(config, s)
    mask = config.raster.mask_of_region(s)
    lab = _labels_on_mask(config, mask)
    am = config.raster.mask_of_region(a) & mask
    bm = config.raster.mask_of_region(b) & mask
    return bool(grid.connect_through(lab[None], am, bm)[0])
