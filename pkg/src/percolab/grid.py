"""Rasterized lattice geometry and batched connectivity kernels.

Everything Monte-Carlo-hot runs through this module.  Configurations live on a
rectangular bounding box (the "raster"); regions become boolean masks; cluster
labeling is vectorized with ``scipy.ndimage.label`` (site mode) or
``scipy.sparse.csgraph`` (bond mode).

The batching trick: a whole batch of configurations is stacked along a leading
axis and labeled with ONE call, using a structuring element that has no
connectivity across the batch axis.  Label values are then unique per sample,
so set-membership tests (``np.isin``) can pool labels across the batch without
cross-talk.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .lattice import LatticeSpec, Region, Site


def site_structure(lattice: LatticeSpec) -> np.ndarray:
    """ndimage structuring element realizing the lattice adjacency."""
    s = np.zeros((3,) * lattice.d, dtype=bool)
    center = (1,) * lattice.d
    s[center] = True
    for off in lattice.neighbor_offsets():
        s[tuple(1 + o for o in off)] = True
    return s


def batch_structure(lattice: LatticeSpec) -> np.ndarray:
    """Structure for labeling a (B, ...) stack without cross-sample links."""
    s = np.zeros((3,) * (lattice.d + 1), dtype=bool)
    s[1] = site_structure(lattice)
    return s


class BoxRaster:
    """Bounding box ``[origin, origin + shape)`` indexed as coord - origin."""

    def __init__(self, lattice: LatticeSpec, origin: Site, shape: tuple[int, ...]):
        self.lattice = lattice
        self.origin = tuple(origin)
        self.shape = tuple(shape)
        self._region_masks: dict[Region, np.ndarray] = {}

    def index(self, site: Site) -> tuple[int, ...]:
        return tuple(c - o for c, o in zip(site, self.origin))

    def contains(self, site: Site) -> bool:
        return all(0 <= c - o < s for c, o, s in zip(site, self.origin, self.shape))

    def box_slices(self, center: Site, radius: int) -> tuple[slice, ...]:
        sl = tuple(
            slice(c - radius - o, c + radius + 1 - o)
            for c, o in zip(center, self.origin)
        )
        for s, size in zip(sl, self.shape):
            if s.start < 0 or s.stop > size:
                raise ValueError("box escapes the raster bounding box")
        return sl

    def box_mask(self, center: Site, radius: int) -> np.ndarray:
        m = np.zeros(self.shape, dtype=bool)
        m[self.box_slices(center, radius)] = True
        return m

    def boundary_mask(self, center: Site, radius: int) -> np.ndarray:
        """Outer vertex boundary of the box, under the lattice adjacency."""
        box = self.box_mask(center, radius)
        dil = ndimage.binary_dilation(box, structure=site_structure(self.lattice))
        return dil & ~box

    def rect_slices(self, corner: Site, widths: tuple[int, ...]) -> tuple[slice, ...]:
        return tuple(
            slice(c - o, c + w + 1 - o) for c, o, w in zip(corner, self.origin, widths)
        )

    def mask_of_region(self, region: Region) -> np.ndarray:
        cached = self._region_masks.get(region)
        if cached is not None:
            return cached
        coords = np.array(sorted(region.sites), dtype=np.int64)
        coords -= np.array(self.origin, dtype=np.int64)
        if (coords < 0).any() or (coords >= np.array(self.shape)).any():
            raise ValueError("region escapes the raster bounding box")
        m = np.zeros(self.shape, dtype=bool)
        m[tuple(coords.T)] = True
        if len(self._region_masks) < 64:
            self._region_masks[region] = m
        return m


def carrier_raster(lattice: LatticeSpec, radius: int) -> tuple[BoxRaster, np.ndarray]:
    """Raster and mask for the carrier: box(radius) plus its outer boundary."""
    origin = (-(radius + 1),) * lattice.d
    shape = (2 * radius + 3,) * lattice.d
    raster = BoxRaster(lattice, origin, shape)
    box = raster.box_mask((0,) * lattice.d, radius)
    dil = ndimage.binary_dilation(box, structure=site_structure(lattice))
    return raster, dil


def edge_exists(carrier_mask: np.ndarray, axis: int) -> np.ndarray:
    """Bond-mode edge slots: both endpoints (idx, idx + e_axis) in the carrier."""
    ex = np.zeros_like(carrier_mask)
    lo = tuple(slice(0, -1) if a == axis else slice(None) for a in range(carrier_mask.ndim))
    hi = tuple(slice(1, None) if a == axis else slice(None) for a in range(carrier_mask.ndim))
    ex[lo] = carrier_mask[lo] & carrier_mask[hi]
    return ex


# ---------------------------------------------------------------------------
# Batched labeling


def label_sites_batch(open_batch: np.ndarray, lattice: LatticeSpec) -> np.ndarray:
    """Label open-site clusters of a (B, ...) stack; 0 = closed/background."""
    labels, _ = ndimage.label(open_batch, structure=batch_structure(lattice))
    return labels


def label_bonds_batch(
    edge_open: list[np.ndarray], participating: np.ndarray
) -> np.ndarray:
    """Label bond-mode clusters of a (B, ...) stack of edge arrays.

    ``edge_open[a]`` is a (B, ...) bool array: edge from idx to idx + e_a open.
    Every participating site gets a positive label; others get 0.  Labels are
    unique per sample (samples are disjoint node blocks).
    """
    B = edge_open[0].shape[0]
    shape = edge_open[0].shape[1:]
    V = int(np.prod(shape))
    strides = [int(np.prod(shape[a + 1:], dtype=np.int64)) for a in range(len(shape))]
    rows, cols = [], []
    for a, ea in enumerate(edge_open):
        idx = np.flatnonzero(ea)
        rows.append(idx)
        cols.append(idx + strides[a])
    r = np.concatenate(rows) if rows else np.empty(0, np.int64)
    c = np.concatenate(cols) if cols else np.empty(0, np.int64)
    g = coo_matrix((np.ones(len(r), np.int8), (r, c)), shape=(B * V, B * V))
    _, comp = connected_components(g, directed=False)
    labels = comp.reshape((B,) + shape).astype(np.int64) + 1
    labels[:, ~participating] = 0
    return labels


# ---------------------------------------------------------------------------
# Per-sample reductions on batch labels


def connect_through(labels: np.ndarray, mask_a: np.ndarray, mask_b: np.ndarray) -> np.ndarray:
    """Per-sample: does some cluster touch both masks? (B,) bool."""
    la = labels[:, mask_a]
    lb = labels[:, mask_b]
    pool = la[la > 0]
    if pool.size == 0:
        return np.zeros(labels.shape[0], dtype=bool)
    return ((lb > 0) & np.isin(lb, pool)).any(axis=1)


def count_connected_to(labels: np.ndarray, seed_mask: np.ndarray, count_mask: np.ndarray) -> np.ndarray:
    """Per-sample count of sites in ``count_mask`` sharing a cluster with ``seed_mask``."""
    seed = labels[:, seed_mask]
    nmax = int(labels.max(initial=0))
    flags = np.zeros(nmax + 1, dtype=bool)
    sv = seed[seed > 0]
    flags[sv] = True
    flags[0] = False
    body = labels[:, count_mask]
    return flags[body].sum(axis=1).astype(np.int64)


def largest_count(labels: np.ndarray, within: np.ndarray | None = None) -> np.ndarray:
    """Per-sample size of the largest cluster (optionally restricted to a mask)."""
    B = labels.shape[0]
    flat = labels[:, within] if within is not None else labels.reshape(B, -1)
    nmax = int(flat.max(initial=0))
    if nmax == 0:
        return np.zeros(B, dtype=np.int64)
    counts = np.bincount(flat.ravel(), minlength=nmax + 1)
    owner = np.zeros(nmax + 1, dtype=np.int64)
    owner[flat] = np.arange(B, dtype=np.int64)[:, None]
    out = np.zeros(B, dtype=np.int64)
    np.maximum.at(out, owner[1:], counts[1:])
    return out


def cluster_sizes_single(labels: np.ndarray) -> np.ndarray:
    """Cluster sizes of one labelled grid, nonincreasing."""
    nmax = int(labels.max(initial=0))
    if nmax == 0:
        return np.zeros(0, dtype=np.int64)
    counts = np.bincount(labels.ravel(), minlength=nmax + 1)[1:]
    counts = counts[counts > 0]
    return np.sort(counts)[::-1]
