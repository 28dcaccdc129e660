"""Deterministic seeded sampling of percolation configurations.

Element order
-------------
Site mode: carrier sites in lexicographic coordinate order (equal to C-order
of the bounding-box raster restricted to the carrier mask).

Bond mode: pairs ``(u, axis)`` where ``u`` is the lexicographically smaller
endpoint and the edge runs to ``u + e_axis``; pairs ordered site-major, axis
ascending.  Only edges with both endpoints in the carrier are elements.

Randomness
----------
Replica seeds come from ``derive_stream`` (the SplitMix64 sequence of the
master seed, a platform-independent bijective 64-bit mix).  Each configuration
draws from ``numpy.random.Philox`` keyed by its seed: one block of uniform
doubles compared against ``p``, or, when ``p == 0.5`` exactly, one block of
raw bytes expanded to bits (bit ``k`` of the stream is element ``k``,
MSB-first within each byte).  Both paths are deterministic in
``(lattice, region, p, seed)``, bit for bit, across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import BoxRaster, edge_exists
from .lattice import LatticeSpec, Region, Site

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def derive_stream(master_seed: int, replica_index: int) -> int:
    """Seed for replica ``replica_index``: SplitMix64 stream of the master seed."""
    if replica_index < 0:
        raise ValueError("replica_index must be >= 0")
    x = (master_seed + (replica_index + 1) * _GAMMA) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def element_bits(p: float, count: int, seed: int) -> np.ndarray:
    """The open/closed bit stream for ``count`` elements."""
    rng = rng_for(seed)
    if p == 0.5:
        raw = rng.integers(0, 256, size=(count + 7) // 8, dtype=np.uint8)
        return np.unpackbits(raw)[:count].astype(bool)
    return rng.random(count) < p


@dataclass(frozen=True)
class Config:
    """One sampled (or hand-built) configuration over a finite carrier."""

    lattice: LatticeSpec
    region: Region
    p: float
    seed: int | None
    raster: BoxRaster = field(repr=False)
    carrier_mask: np.ndarray = field(repr=False)
    site_open: np.ndarray | None = field(repr=False, default=None)
    edge_open: tuple[np.ndarray, ...] | None = field(repr=False, default=None)

    @property
    def site_mode(self) -> bool:
        return self.lattice.site_mode

    def n_elements(self) -> int:
        if self.site_mode:
            return int(self.carrier_mask.sum())
        return sum(int(edge_exists(self.carrier_mask, a).sum()) for a in range(self.lattice.d))

    def element_states(self) -> np.ndarray:
        """Flat open/closed states in documented element order."""
        if self.site_mode:
            return self.site_open[self.carrier_mask]
        exists = np.stack(
            [edge_exists(self.carrier_mask, a) for a in range(self.lattice.d)], axis=-1
        )
        states = np.stack(self.edge_open, axis=-1)
        return states[exists]

    def packed_states(self) -> np.ndarray:
        return np.packbits(self.element_states())

    def to_json(self) -> dict:
        lo, hi = self.region.bounds()
        return {
            "lattice": {"kind": self.lattice.kind.value, "d": self.lattice.d},
            "region": {"n_sites": len(self.region), "lo": list(lo), "hi": list(hi)},
            "p": self.p,
            "seed": self.seed,
            "states_hex": self.packed_states().tobytes().hex(),
        }


def _raster_for_region(lattice: LatticeSpec, region: Region) -> tuple[BoxRaster, np.ndarray]:
    lo, hi = region.bounds()
    shape = tuple(h - l + 1 for l, h in zip(lo, hi))
    raster = BoxRaster(lattice, lo, shape)
    return raster, raster.mask_of_region(region)


def sample_config(lattice: LatticeSpec, region: Region, p: float, seed: int) -> Config:
    """Product-measure sample: each element open independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    raster, mask = _raster_for_region(lattice, region)
    if lattice.site_mode:
        bits = element_bits(p, int(mask.sum()), seed)
        open_ = np.zeros(raster.shape, dtype=bool)
        open_[mask] = bits
        return Config(lattice, region, p, seed, raster, mask, site_open=open_)
    exists = [edge_exists(mask, a) for a in range(lattice.d)]
    stacked = np.stack(exists, axis=-1)
    bits = element_bits(p, int(stacked.sum()), seed)
    states = np.zeros(stacked.shape, dtype=bool)
    states[stacked] = bits
    edges = tuple(states[..., a] for a in range(lattice.d))
    return Config(lattice, region, p, seed, raster, mask, edge_open=edges)


def config_from_sites(lattice: LatticeSpec, region: Region, open_sites: Sequence[Site]) -> Config:
    """Hand-built site-mode configuration (for tests and fixtures)."""
    if not lattice.site_mode:
        raise ValueError("config_from_sites requires a site-percolation lattice")
    raster, mask = _raster_for_region(lattice, region)
    open_ = np.zeros(raster.shape, dtype=bool)
    for s in open_sites:
        if s not in region:
            raise ValueError(f"open site {s} outside region")
        open_[raster.index(s)] = True
    return Config(lattice, region, float("nan"), None, raster, mask, site_open=open_)


def config_from_edges(
    lattice: LatticeSpec, region: Region, open_edges: Sequence[tuple[Site, Site]]
) -> Config:
    """Hand-built bond-mode configuration (for tests and fixtures)."""
    if lattice.site_mode:
        raise ValueError("config_from_edges requires a bond-percolation lattice")
    raster, mask = _raster_for_region(lattice, region)
    edges = tuple(np.zeros(raster.shape, dtype=bool) for _ in range(lattice.d))
    for u, v in open_edges:
        diff = tuple(b - a for a, b in zip(u, v))
        if sum(abs(x) for x in diff) != 1:
            raise ValueError(f"not a lattice edge: {u}-{v}")
        if any(x < 0 for x in diff):
            u, v = v, u
            diff = tuple(-x for x in diff)
        axis = diff.index(1)
        if u not in region or v not in region:
            raise ValueError(f"edge {u}-{v} outside region")
        edges[axis][raster.index(u)] = True
    return Config(lattice, region, float("nan"), None, raster, mask, edge_open=edges)


# ---------------------------------------------------------------------------
# Fast batch generation (estimator kernels; bypasses Config objects)


def site_open_batch(
    carrier_mask: np.ndarray, p: float, seeds: Sequence[int]
) -> np.ndarray:
    """Stack of site-mode open grids, one per seed; identical to sample_config."""
    idx = np.flatnonzero(carrier_mask)
    bits = np.empty((len(seeds), idx.size), dtype=bool)
    for i, s in enumerate(seeds):
        bits[i] = element_bits(p, idx.size, s)
    out = np.zeros((len(seeds), carrier_mask.size), dtype=bool)
    out[:, idx] = bits
    return out.reshape((len(seeds),) + carrier_mask.shape)


def edge_open_batch(
    carrier_mask: np.ndarray, d: int, p: float, seeds: Sequence[int]
) -> list[np.ndarray]:
    """Stack of bond-mode edge grids per axis; identical to sample_config."""
    exists = np.stack([edge_exists(carrier_mask, a) for a in range(d)], axis=-1)
    idx = np.flatnonzero(exists)
    bits = np.empty((len(seeds), idx.size), dtype=bool)
    for i, s in enumerate(seeds):
        bits[i] = element_bits(p, idx.size, s)
    out = np.zeros((len(seeds), exists.size), dtype=bool)
    out[:, idx] = bits
    out = out.reshape((len(seeds),) + exists.shape)
    return [out[..., a] for a in range(d)]
