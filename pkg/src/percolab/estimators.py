"""Monte Carlo estimation of arm probabilities and cluster statistics.

Seeding and replica sharing
---------------------------
Every estimator family draws replica seeds from a family seed
``derive_stream(derive_stream(master, TAG), n)``; replica ``i`` then uses
``derive_stream(family_seed, i)``.  Estimators in the same family at the same
scale therefore share replicas: the largest-cluster, long-arm tail and
binomial-moment statistics at one ``n`` are measured on identical
configurations (variance reduction; also makes algebraic identities between
them exact).  Arm-probability rows share replicas across the inner scales
``m`` at fixed ``n``.  Everything is deterministic in the master seed and
invariant under worker count: counters are integers merged by addition.

Carriers
--------
Arm estimation at scale n samples exactly the path-confinement region, the
box of radius n plus its boundary.  Long-arm/cluster statistics at scale n
sample the box of radius 2n plus its boundary, where both the largest-cluster
and long-arm observables are defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Sequence

import numpy as np

from . import grid
from .lattice import LatticeKind, LatticeSpec
from .parallel import run_counters
from .sampler import derive_stream, edge_open_batch, site_open_batch

TAG_PI = 0x501
TAG_VN = 0x502
TAG_CROSS = 0x503
TAG_FKG = 0x504
TAG_DN = 0x505
TAG_RSW = 0x506
TAG_LOWER = 0x507

#: Critical points used as defaults; the d = 3 bond value is a literature
#: constant supplied through configuration, never asserted by tests.
DEFAULT_P_C = {
    (LatticeKind.TRIANGULAR_SITE, 2): 0.5,
    (LatticeKind.Z_BOND, 2): 0.5,
    (LatticeKind.Z_BOND, 3): 0.2488126,
}


def family_seed(master_seed: int, tag: int, *keys: int) -> int:
    s = derive_stream(master_seed, tag)
    for k in keys:
        s = derive_stream(s, k)
    return s


def default_p(lattice: LatticeSpec) -> float:
    try:
        return DEFAULT_P_C[(lattice.kind, lattice.d)]
    except KeyError:
        raise ValueError(f"no default critical point for {lattice}") from None


# ---------------------------------------------------------------------------
# Estimates and confidence machinery


def wald_stderr(successes: int, samples: int) -> float:
    p = successes / samples
    return math.sqrt(p * (1 - p) / samples)


def wilson_halfwidth(successes: int, samples: int, z: float = 1.0) -> float:
    """Half-width of the Wilson score interval (z = 1 gives a 1-sigma analogue)."""
    p = successes / samples
    denom = 1 + z * z / samples
    return (z / denom) * math.sqrt(p * (1 - p) / samples + z * z / (4 * samples * samples))


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate with uncertainty."""

    samples: int
    point: float
    stderr: float
    successes: int | None = None
    ci_method: str = "wilson"

    def __post_init__(self) -> None:
        if self.successes is not None and not 0 <= self.successes <= self.samples:
            raise ValueError("successes must lie in [0, samples]")
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")


def event_estimate(successes: int, samples: int, ci_method: str = "wilson") -> Estimate:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    point = successes / samples
    if ci_method == "wilson":
        err = wilson_halfwidth(successes, samples)
    elif ci_method == "wald":
        err = wald_stderr(successes, samples)
    else:
        raise ValueError(f"unknown ci method {ci_method!r}")
    return Estimate(samples, point, err, successes, ci_method)


def mean_estimate(total: int | float, total_sq: int | float, samples: int) -> Estimate:
    mean = total / samples
    var = max(0.0, total_sq / samples - mean * mean)
    return Estimate(samples, mean, math.sqrt(var / samples), None, "wald")


# ---------------------------------------------------------------------------
# Arm-probability table


@dataclass(frozen=True)
class PiRow:
    m: int
    n: int
    samples: int
    successes: int
    estimate: float
    stderr: float


@dataclass
class PiTable:
    """Arm-probability estimates keyed by (m, n); pi(m, m) = 1 by convention."""

    lattice: LatticeSpec
    p: float
    rows: dict[tuple[int, int], PiRow] = field(default_factory=dict)

    def add(self, row: PiRow) -> None:
        key = (row.m, row.n)
        if key in self.rows:
            raise ValueError(f"duplicate pi row {key}")
        self.rows[key] = row

    def pi(self, m: int, n: int | None = None) -> float:
        if n is None:
            m, n = 1, m
        if m == n:
            return 1.0
        key = (m, n)
        if key not in self.rows:
            raise ValueError(f"missing pi row {key}")
        return self.rows[key].estimate

    def stderr(self, m: int, n: int | None = None) -> float:
        if n is None:
            m, n = 1, m
        if m == n:
            return 0.0
        key = (m, n)
        if key not in self.rows:
            raise ValueError(f"missing pi row {key}")
        return self.rows[key].stderr

    def sorted_rows(self) -> list[PiRow]:
        return [self.rows[k] for k in sorted(self.rows)]


# ---------------------------------------------------------------------------
# Batched kernels (top level: picklable for worker processes)


def _batch_ranges(start: int, stop: int, size: int) -> Iterable[tuple[int, int]]:
    for s in range(start, stop, size):
        yield s, min(s + size, stop)


def _batch_size(cells: int) -> int:
    return max(4, min(256, 4_000_000 // max(cells, 1)))


def _open_batch(lattice: LatticeSpec, mask: np.ndarray, p: float, seeds: list[int]):
    if lattice.site_mode:
        return site_open_batch(mask, p, seeds)
    return edge_open_batch(mask, lattice.d, p, seeds)


def _labels_for(lattice: LatticeSpec, mask: np.ndarray, batch) -> np.ndarray:
    if lattice.site_mode:
        return grid.label_sites_batch(batch, lattice)
    return grid.label_bonds_batch([e for e in batch], mask)


def _arm_counts(task, start: int, stop: int) -> dict:
    lattice, p, n, ms, fam = task
    raster, carrier = grid.carrier_raster(lattice, n)
    center = (0,) * lattice.d
    outer = raster.boundary_mask(center, n)
    inner = {m: raster.boundary_mask(center, m) for m in ms}
    out = {f"arm:{m}": 0 for m in ms}
    bsize = _batch_size(carrier.size)
    for lo, hi in _batch_ranges(start, stop, bsize):
        seeds = [derive_stream(fam, i) for i in range(lo, hi)]
        batch = _open_batch(lattice, carrier, p, seeds)
        labels = _labels_for(lattice, carrier, batch)
        for m in ms:
            hits = grid.connect_through(labels, inner[m], outer)
            out[f"arm:{m}"] += int(hits.sum())
    return out


def _crop_labels(lattice: LatticeSpec, batch, sl: tuple[slice, ...]) -> np.ndarray:
    """Labels confined to a box crop (paths inside the crop only)."""
    full = (slice(None),) + sl
    if lattice.site_mode:
        return grid.label_sites_batch(batch[full], lattice)
    edges = []
    for a in range(lattice.d):
        e = batch[a][full].copy()
        end = [slice(None)] * (lattice.d + 1)
        end[a + 1] = slice(e.shape[a + 1] - 1, e.shape[a + 1])
        e[tuple(end)] = False
        edges.append(e)
    shape = edges[0].shape[1:]
    return grid.label_bonds_batch(edges, np.ones(shape, dtype=bool))


def _vn_counts(task, start: int, stop: int) -> dict:
    lattice, p, n, c1_thresholds, vn_thresholds, moment_ks, want_hist, fam = task
    raster, carrier = grid.carrier_raster(lattice, 2 * n)
    center = (0,) * lattice.d
    ring = raster.boundary_mask(center, 2 * n)
    inner = raster.box_mask(center, n)
    box_sl = raster.box_slices(center, n)
    out: dict = {
        "samples": 0,
        "vsum": 0,
        "vsq": 0,
        "c1sum": 0,
        "c1sq": 0,
    }
    for idx in range(len(c1_thresholds)):
        out[f"c1ge:{idx}"] = 0
    for idx in range(len(vn_thresholds)):
        out[f"vnge:{idx}"] = 0
    for k in moment_ks:
        out[f"msum:{k}"] = 0
        out[f"msq:{k}"] = 0
    hist: dict = {}
    bsize = _batch_size(carrier.size)
    for lo, hi in _batch_ranges(start, stop, bsize):
        seeds = [derive_stream(fam, i) for i in range(lo, hi)]
        batch = _open_batch(lattice, carrier, p, seeds)
        labels = _labels_for(lattice, carrier, batch)
        vn = grid.count_connected_to(labels, ring, inner)
        c1 = grid.largest_count(_crop_labels(lattice, batch, box_sl))
        out["samples"] += hi - lo
        out["vsum"] += int(vn.sum())
        out["vsq"] += int((vn.astype(object) ** 2).sum())
        out["c1sum"] += int(c1.sum())
        out["c1sq"] += int((c1.astype(object) ** 2).sum())
        for idx, t in enumerate(c1_thresholds):
            out[f"c1ge:{idx}"] += int((c1 >= t).sum())
        for idx, t in enumerate(vn_thresholds):
            out[f"vnge:{idx}"] += int((vn >= t).sum())
        for k in moment_ks:
            s = ssq = 0
            for v in vn.tolist():
                b = math.comb(v, k)
                s += b
                ssq += b * b
            out[f"msum:{k}"] += s
            out[f"msq:{k}"] += ssq
        if want_hist:
            for v in c1.tolist():
                hist[v] = hist.get(v, 0) + 1
    if want_hist:
        out["hist"] = hist
    return out


def vn_statistics(
    lattice: LatticeSpec,
    p: float,
    n: int,
    samples: int,
    master_seed: int,
    workers: int = 1,
    c1_thresholds: Sequence[float] = (),
    vn_thresholds: Sequence[float] = (),
    moment_ks: Sequence[int] = (),
    want_hist: bool = False,
) -> dict:
    """Shared-replica statistics of (largest cluster, long-arm count) at scale n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    fam = family_seed(master_seed, TAG_VN, n)
    task = (
        lattice,
        p,
        n,
        tuple(float(t) for t in c1_thresholds),
        tuple(float(t) for t in vn_thresholds),
        tuple(int(k) for k in moment_ks),
        bool(want_hist),
        fam,
    )
    return run_counters(partial(_vn_counts, task), samples, workers)


def _crossing_counts(task, start: int, stop: int) -> dict:
    lattice, p, widths, axis, fam = task
    shape = tuple(w + 1 for w in widths)
    raster = grid.BoxRaster(lattice, (0,) * lattice.d, shape)
    mask = np.ones(shape, dtype=bool)
    hits = 0
    bsize = _batch_size(mask.size)
    for lo, hi in _batch_ranges(start, stop, bsize):
        seeds = [derive_stream(fam, i) for i in range(lo, hi)]
        batch = _open_batch(lattice, mask, p, seeds)
        labels = _crop_labels(lattice, batch, tuple(slice(0, s) for s in shape))
        take_lo = [slice(None)] * (lattice.d + 1)
        take_lo[axis + 1] = 0
        take_hi = [slice(None)] * (lattice.d + 1)
        take_hi[axis + 1] = -1
        a = labels[tuple(take_lo)]
        b = labels[tuple(take_hi)]
        pool = a[a > 0]
        if pool.size:
            hits += int(((b > 0) & np.isin(b, pool)).any(axis=1).sum())
    return {"hits": hits}


def estimate_crossing(
    lattice: LatticeSpec,
    p: float,
    widths: tuple[int, int],
    axis: int,
    samples: int,
    master_seed: int,
    workers: int = 1,
    seed_tag: int = TAG_CROSS,
) -> Estimate:
    """Crossing probability of the rectangle [0,w0]x[0,w1] along ``axis``."""
    if lattice.d != 2:
        raise ValueError("crossing estimation is two-dimensional")
    fam = family_seed(master_seed, seed_tag, widths[0], widths[1], axis)
    task = (lattice, p, tuple(widths), axis, fam)
    counts = run_counters(partial(_crossing_counts, task), samples, workers)
    return event_estimate(counts.get("hits", 0), samples)


# ---------------------------------------------------------------------------
# Public estimator operations


def estimate_pi(
    lattice: LatticeSpec,
    p: float,
    m: int,
    n: int,
    samples: int,
    master_seed: int,
    workers: int = 1,
) -> Estimate:
    """Arm probability pi(m, n): boundary of box(m) joined to boundary of box(n)."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m} n={n}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if m == n:
        return Estimate(samples, 1.0, 0.0, samples)
    fam = family_seed(master_seed, TAG_PI, n)
    task = (lattice, p, n, (m,), fam)
    counts = run_counters(partial(_arm_counts, task), samples, workers)
    return event_estimate(counts[f"arm:{m}"], samples)


def build_pi_table(
    lattice: LatticeSpec,
    p: float,
    scales: Sequence[tuple[int, int]],
    samples: int,
    master_seed: int,
    workers: int = 1,
) -> PiTable:
    """One arm-probability row per (m, n) pair; rows at equal n share replicas."""
    table = PiTable(lattice, p)
    seen = set()
    for m, n in scales:
        if not 1 <= m <= n:
            raise ValueError(f"invalid scale pair ({m}, {n})")
        if (m, n) in seen:
            raise ValueError(f"duplicate scale pair ({m}, {n})")
        seen.add((m, n))
    by_n: dict[int, list[int]] = {}
    for m, n in scales:
        if m == n:
            table.add(PiRow(m, n, samples, samples, 1.0, 0.0))
        else:
            by_n.setdefault(n, []).append(m)
    for n in sorted(by_n):
        ms = tuple(sorted(by_n[n]))
        fam = family_seed(master_seed, TAG_PI, n)
        task = (lattice, p, n, ms, fam)
        counts = run_counters(partial(_arm_counts, task), samples, workers)
        for m in ms:
            hits = counts[f"arm:{m}"]
            est = event_estimate(hits, samples)
            table.add(PiRow(m, n, samples, hits, est.point, est.stderr))
    return table


@dataclass(frozen=True)
class SizeDistribution:
    """Empirical distribution of an integer statistic."""

    counts: dict[int, int]
    samples: int
    mean: float
    stderr: float

    def quantile(self, q: float) -> int:
        if not 0 <= q <= 1:
            raise ValueError("q must be in [0, 1]")
        need = q * self.samples
        acc = 0
        for v in sorted(self.counts):
            acc += self.counts[v]
            if acc >= need:
                return v
        return max(self.counts)


def largest_cluster_distribution(
    lattice: LatticeSpec,
    p: float,
    n: int,
    samples: int,
    master_seed: int,
    workers: int = 1,
) -> SizeDistribution:
    """Histogram, mean and quantiles of the largest-cluster size in box(n)."""
    stats = vn_statistics(lattice, p, n, samples, master_seed, workers, want_hist=True)
    est = mean_estimate(stats["c1sum"], stats["c1sq"], samples)
    counts = {int(k): v for k, v in stats.get("hist", {}).items()}
    return SizeDistribution(counts, samples, est.point, est.stderr)


def _tail_threshold(lattice: LatticeSpec, n: int, u: float, pi: PiTable) -> float:
    if u < 1:
        raise ValueError("u must be >= 1")
    scale = max(1, int(n / u))
    return float(n**lattice.d) * pi.pi(scale)


def tail_probability(
    lattice: LatticeSpec,
    p: float,
    n: int,
    u: float,
    samples: int,
    pi: PiTable,
    master_seed: int,
    workers: int = 1,
) -> Estimate:
    """P(largest cluster in box(n) has at least n^d * pi(n/u) sites)."""
    t = _tail_threshold(lattice, n, u, pi)
    stats = vn_statistics(lattice, p, n, samples, master_seed, workers, c1_thresholds=(t,))
    return event_estimate(stats["c1ge:0"], samples)


def vn_tail(
    lattice: LatticeSpec,
    p: float,
    n: int,
    u: float,
    samples: int,
    pi: PiTable,
    master_seed: int,
    workers: int = 1,
) -> Estimate:
    """P(long-arm count at scale n is at least n^d * pi(n/u))."""
    t = _tail_threshold(lattice, n, u, pi)
    stats = vn_statistics(lattice, p, n, samples, master_seed, workers, vn_thresholds=(t,))
    return event_estimate(stats["vnge:0"], samples)


def moment_estimate(
    lattice: LatticeSpec,
    p: float,
    n: int,
    k: int,
    samples: int,
    master_seed: int,
    workers: int = 1,
) -> Estimate:
    """Sample mean of binom(|long-arm set|, k); exact integer accumulation."""
    if k < 1:
        raise ValueError("k must be >= 1")
    stats = vn_statistics(lattice, p, n, samples, master_seed, workers, moment_ks=(k,))
    return mean_estimate(stats[f"msum:{k}"], stats[f"msq:{k}"], samples)


# ---------------------------------------------------------------------------
# Table diagnostics


@dataclass(frozen=True)
class QuasiMultRow:
    k: int
    l: int
    m: int
    ratio: float | None
    stderr: float | None
    note: str = ""


@dataclass(frozen=True)
class QuasiMultReport:
    rows: tuple[QuasiMultRow, ...]
    max_ratio: float

    def worst(self) -> QuasiMultRow:
        valid = [r for r in self.rows if r.ratio is not None]
        return max(valid, key=lambda r: r.ratio)


def check_quasi_mult(pi: PiTable, triples: Sequence[tuple[int, int, int]]) -> QuasiMultReport:
    """Ratios pi(k,l) pi(l,m) / pi(k,m) with propagated standard errors."""
    rows = []
    worst = 0.0
    for k, l, m in triples:
        if not k <= l <= m:
            raise ValueError(f"need k <= l <= m, got {(k, l, m)}")
        a, b, c = pi.pi(k, l), pi.pi(l, m), pi.pi(k, m)
        if c == 0:
            rows.append(QuasiMultRow(k, l, m, None, None, "zero denominator"))
            continue
        ratio = a * b / c
        rel = 0.0
        for val, err in ((a, pi.stderr(k, l)), (b, pi.stderr(l, m)), (c, pi.stderr(k, m))):
            if val > 0:
                rel += (err / val) ** 2
        rows.append(QuasiMultRow(k, l, m, ratio, ratio * math.sqrt(rel)))
        worst = max(worst, ratio)
    return QuasiMultReport(tuple(rows), worst)


def fit_arm_exponent(pi: PiTable, scales: Sequence[int]) -> tuple[float, float]:
    """Least-squares slope of log pi(n) against log n, negated."""
    if len(scales) < 3:
        raise ValueError("need at least 3 scales")
    xs, ys = [], []
    for n in scales:
        val = pi.pi(n)
        if val <= 0:
            raise ValueError(f"nonpositive arm estimate at n={n}")
        xs.append(math.log(n))
        ys.append(math.log(val))
    x = np.array(xs)
    y = np.array(ys)
    xc = x - x.mean()
    slope = float((xc * (y - y.mean())).sum() / (xc**2).sum())
    resid = y - (y.mean() + slope * xc)
    dof = len(scales) - 2
    se = math.sqrt(float((resid**2).sum()) / dof / float((xc**2).sum())) if dof else 0.0
    return -slope, se
