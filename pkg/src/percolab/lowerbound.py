"""Lower-bound construction lab: crossing constants, FKG checks, gluing.

The construction event D(n, u) asks, for every integer vector v with
||v||_inf <= u and n' = floor(n/u), for a horizontal crossing of the tall
rectangle at corner n'v (extents n' by 2n') and a vertical crossing of the
wide rectangle at the same corner (extents 2n' by n').  The conditioned
gluing check then verifies, per configuration on which D holds, that

(i)  all participating sites w of the box(n - n') whose carrier cluster
     reaches Chebyshev distance 2n' + 1 from w (equivalently: w is joined to
     the boundary of box(2n') around w) lie in one carrier cluster, and
(ii) the sum over ||v||_inf <= u - 1 of the long-arm counts of box(n')
     around n'v is at most the size of the largest open cluster of the
     carrier.  The boxes of the sum overlap (spacing n', radius n'), so a
     site can be counted up to four times; the carrier-cluster reading is
     the only one consistent with the all-open case, where the sum is
     9 (2n'+1)^2 and any box-confined largest cluster would be smaller.

Conditioning uses rejection in deterministic fixed-size stages, so results
are reproducible and invariant under worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Sequence

import numpy as np

from . import grid
from .bounds import BoundParams
from .estimators import (
    TAG_DN,
    TAG_FKG,
    TAG_RSW,
    Estimate,
    PiTable,
    _batch_ranges,
    _batch_size,
    _crop_labels,
    _labels_for,
    _open_batch,
    estimate_crossing,
    event_estimate,
    family_seed,
    vn_statistics,
)
from .lattice import LatticeSpec, Site, rect_region
from .parallel import run_counters
from .sampler import Config, derive_stream


# ---------------------------------------------------------------------------
# RSW constant


@dataclass(frozen=True)
class RswFit:
    estimate: Estimate
    c11: float

    @property
    def infinite(self) -> bool:
        return math.isinf(self.c11)


def estimate_rsw_constant(
    lattice: LatticeSpec, p: float, n: int, samples: int, master_seed: int, workers: int = 1
) -> RswFit:
    """Horizontal crossing of the 2:1 rectangle (extents 2n by n); c11 = -log p̂.

    This is the hard-direction crossing, the nontrivial uniform lower bound.
    A zero estimate at the sampled resolution yields an infinite fit, flagged
    via ``infinite``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    est = estimate_crossing(lattice, p, (2 * n, n), 0, samples, master_seed, workers, TAG_RSW)
    c11 = abs(-math.log(est.point)) if est.point > 0 else math.inf
    return RswFit(est, c11)


# ---------------------------------------------------------------------------
# FKG checks on a catalog of increasing events

_EVENT_KINDS = ("h_crossing", "v_crossing", "arm", "vn_ge", "c1_ge")


@dataclass(frozen=True)
class EventSpec:
    """An increasing event from the certified catalog."""

    kind: str
    corner: Site | None = None
    widths: tuple[int, int] | None = None
    m: int | None = None
    n: int | None = None
    threshold: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _EVENT_KINDS:
            raise ValueError(f"event kind {self.kind!r} is not in the increasing-event catalog")
        if self.kind in ("h_crossing", "v_crossing"):
            if self.corner is None or self.widths is None:
                raise ValueError("crossing events need corner and widths")
        elif self.kind == "arm":
            if self.m is None or self.n is None or not 1 <= self.m <= self.n:
                raise ValueError("arm events need 1 <= m <= n")
        elif self.kind in ("vn_ge", "c1_ge"):
            if self.n is None or self.threshold is None:
                raise ValueError("threshold events need n and threshold")

    def required_radius(self) -> int:
        if self.kind in ("h_crossing", "v_crossing"):
            far = max(
                max(abs(c), abs(c + w)) for c, w in zip(self.corner, self.widths)
            )
            return far
        if self.kind == "arm":
            return self.n
        if self.kind == "vn_ge":
            return 2 * self.n
        return self.n


def _event_indicators(lattice: LatticeSpec, raster, batch, spec: EventSpec) -> np.ndarray:
    center = (0,) * lattice.d
    if spec.kind in ("h_crossing", "v_crossing"):
        axis = 0 if spec.kind == "h_crossing" else 1
        sl = raster.rect_slices(spec.corner, spec.widths)
        labels = _crop_labels(lattice, batch, sl)
        take_lo = [slice(None)] * (lattice.d + 1)
        take_lo[axis + 1] = 0
        take_hi = [slice(None)] * (lattice.d + 1)
        take_hi[axis + 1] = -1
        a = labels[tuple(take_lo)]
        b = labels[tuple(take_hi)]
        pool = a[a > 0]
        if not pool.size:
            return np.zeros(labels.shape[0], dtype=bool)
        return ((b > 0) & np.isin(b, pool)).any(axis=1)
    if spec.kind == "arm":
        mask = raster.box_mask(center, spec.n) | raster.boundary_mask(center, spec.n)
        if lattice.site_mode:
            labels = grid.label_sites_batch(batch & mask, lattice)
        else:
            edges = [e & grid.edge_exists(mask, a)[None] for a, e in enumerate(batch)]
            labels = grid.label_bonds_batch(edges, mask)
        return grid.connect_through(
            labels, raster.boundary_mask(center, spec.m), raster.boundary_mask(center, spec.n)
        )
    if spec.kind == "vn_ge":
        mask = raster.box_mask(center, 2 * spec.n) | raster.boundary_mask(center, 2 * spec.n)
        if lattice.site_mode:
            labels = grid.label_sites_batch(batch & mask, lattice)
        else:
            edges = [e & grid.edge_exists(mask, a)[None] for a, e in enumerate(batch)]
            labels = grid.label_bonds_batch(edges, mask)
        vn = grid.count_connected_to(
            labels, raster.boundary_mask(center, 2 * spec.n), raster.box_mask(center, spec.n)
        )
        return vn >= spec.threshold
    # c1_ge
    sl = raster.box_slices(center, spec.n)
    labels = _crop_labels(lattice, batch, sl)
    return grid.largest_count(labels) >= spec.threshold


def _fkg_counts(task, start: int, stop: int) -> dict:
    lattice, p, ev_a, ev_b, fam = task
    radius = max(ev_a.required_radius(), ev_b.required_radius())
    raster, carrier = grid.carrier_raster(lattice, radius)
    out = {"a": 0, "b": 0, "ab": 0}
    bsize = _batch_size(carrier.size)
    for lo, hi in _batch_ranges(start, stop, bsize):
        seeds = [derive_stream(fam, i) for i in range(lo, hi)]
        batch = _open_batch(lattice, carrier, p, seeds)
        ia = _event_indicators(lattice, raster, batch, ev_a)
        ib = _event_indicators(lattice, raster, batch, ev_b)
        out["a"] += int(ia.sum())
        out["b"] += int(ib.sum())
        out["ab"] += int((ia & ib).sum())
    return out


@dataclass(frozen=True)
class FkgResult:
    joint: Estimate
    marginal_a: Estimate
    marginal_b: Estimate
    z: float

    @property
    def product(self) -> float:
        return self.marginal_a.point * self.marginal_b.point


def fkg_check(
    lattice: LatticeSpec,
    p: float,
    event_a: EventSpec,
    event_b: EventSpec,
    samples: int,
    master_seed: int,
    workers: int = 1,
) -> FkgResult:
    """Joint vs product probability of two increasing events on shared replicas.

    ``z`` is the delta-method z-score of joint - product; positive association
    (the FKG inequality) predicts z bounded below by sampling noise.
    """
    fam = family_seed(master_seed, TAG_FKG)
    task = (lattice, p, event_a, event_b, fam)
    counts = run_counters(partial(_fkg_counts, task), samples, workers)
    na, nb, nab = counts["a"], counts["b"], counts["ab"]
    pa, pb, pab = na / samples, nb / samples, nab / samples
    diff = pab - pa * pb
    var = (
        pab * (1 - pab)
        + pb * pb * pa * (1 - pa)
        + pa * pa * pb * (1 - pb)
        - 2 * pb * pab * (1 - pa)
        - 2 * pa * pab * (1 - pb)
        + 2 * pa * pb * (pab - pa * pb)
    ) / samples
    if var > 0:
        z = diff / math.sqrt(var)
    else:
        z = 0.0 if diff >= 0 else -math.inf
    return FkgResult(
        event_estimate(nab, samples),
        event_estimate(na, samples),
        event_estimate(nb, samples),
        z,
    )


# ---------------------------------------------------------------------------
# Long-arm lower-bound constants


@dataclass(frozen=True)
class VnLowerReport:
    n: int
    samples: int
    mean_vn: float
    mean_stderr: float
    floor_value: float  # n^2 * pi(3n)
    floor_stderr: float
    mean_ok: bool  # mean_vn >= floor within 3 sigma
    c12_grid: tuple[float, ...]
    tail_probs: tuple[Estimate, ...]
    c13_fits: tuple[float, ...]


def vn_lower_constants(
    lattice: LatticeSpec,
    p: float,
    n: int,
    samples: int,
    pi: PiTable,
    master_seed: int,
    workers: int = 1,
    c12_grid: Sequence[float] = (0.1, 0.2, 0.5),
) -> VnLowerReport:
    """Mean long-arm count against n^2 pi(3n), plus tail fits on a C12 grid."""
    if lattice.d != 2:
        raise ValueError("lower-bound constants are two-dimensional")
    pin = pi.pi(n)
    pi3n = pi.pi(3 * n)
    thresholds = tuple(c * n * n * pin for c in c12_grid)
    stats = vn_statistics(
        lattice, p, n, samples, master_seed, workers, vn_thresholds=thresholds
    )
    mean = stats["vsum"] / samples
    var = max(0.0, stats["vsq"] / samples - mean * mean)
    mean_se = math.sqrt(var / samples)
    floor = n * n * pi3n
    floor_se = n * n * pi.stderr(3 * n)
    ok = mean - floor >= -3.0 * math.hypot(mean_se, floor_se)
    tails = []
    fits = []
    for idx in range(len(c12_grid)):
        est = event_estimate(stats[f"vnge:{idx}"], samples)
        tails.append(est)
        fits.append(abs(-math.log(est.point)) if est.point > 0 else math.inf)
    return VnLowerReport(
        n, samples, mean, mean_se, floor, floor_se, ok, tuple(c12_grid), tuple(tails), tuple(fits)
    )


# ---------------------------------------------------------------------------
# The gluing event D(n, u) and the conditioned checks


def _dn_rects(n: int, u: int, d: int) -> list[tuple[Site, tuple[int, int], int]]:
    if d != 2:
        raise ValueError("the gluing construction is two-dimensional")
    if not 2 <= u <= n:
        raise ValueError("u must be an integer in [2, n]")
    np_ = n // u
    rects = []
    for vx in range(-u, u + 1):
        for vy in range(-u, u + 1):
            corner = (np_ * vx, np_ * vy)
            rects.append((corner, (np_, 2 * np_), 0))  # horizontal, tall rectangle
            rects.append((corner, (2 * np_, np_), 1))  # vertical, wide rectangle
    return rects


def dn_event(config: Config, n: int, u: int) -> bool:
    """All 2 (2u+1)^2 crossings of the construction hold."""
    from .clusters import horizontal_crossing, vertical_crossing

    for corner, widths, axis in _dn_rects(n, u, config.lattice.d):
        rect = rect_region(corner, widths)
        if not rect.sites <= config.region.sites:
            raise ValueError("carrier too small for the construction rectangles")
        ok = horizontal_crossing(config, rect) if axis == 0 else vertical_crossing(config, rect)
        if not ok:
            return False
    return True


class GluingOutcome(Enum):
    NOT_APPLICABLE = "not_applicable"
    HOLDS = "holds"
    VIOLATED = "violated"


def _cluster_extremes(labels: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-label coordinate minima and maxima, one pair per axis."""
    nmax = int(labels.max(initial=0))
    coords = np.nonzero(labels)
    lab = labels[coords]
    out = []
    for axis_coords in coords:
        lo = np.full(nmax + 1, np.iinfo(np.int64).max, dtype=np.int64)
        hi = np.full(nmax + 1, np.iinfo(np.int64).min, dtype=np.int64)
        np.minimum.at(lo, lab, axis_coords)
        np.maximum.at(hi, lab, axis_coords)
        out.append((lo, hi))
    return out


def _gluing_violations(
    lattice: LatticeSpec, raster, carrier: np.ndarray, single_batch, n: int, u: int
) -> tuple[bool, bool]:
    """(one-cluster check violated, sum inequality violated) for one config."""
    np_ = n // u
    center = (0,) * lattice.d
    labels = _labels_for(lattice, carrier, single_batch)[0]

    # (i) qualifying long-arm sites of box(n - n') share one carrier cluster
    extremes = _cluster_extremes(labels)
    m = n - np_
    sl = raster.box_slices(center, m)
    crop = labels[sl]
    reach = np.zeros(crop.shape, dtype=np.int64)
    grids = np.indices(crop.shape)
    for axis, (lo, hi) in enumerate(extremes):
        w = grids[axis] + (center[axis] - m - raster.origin[axis])
        np.maximum(reach, hi[crop] - w, out=reach)
        np.maximum(reach, w - lo[crop], out=reach)
    qual = (crop > 0) & (reach >= 2 * np_ + 1)
    arm_labels = np.unique(crop[qual])
    viol_i = arm_labels.size > 1

    # (ii) sum of local long-arm counts vs largest carrier cluster
    nmax = int(labels.max(initial=0))
    total = 0
    for vx in range(-(u - 1), u):
        for vy in range(-(u - 1), u):
            c = (np_ * vx, np_ * vy)
            ring = raster.boundary_mask(c, 2 * np_)
            seed = labels[ring]
            flags = np.zeros(nmax + 1, dtype=bool)
            flags[seed[seed > 0]] = True
            flags[0] = False
            box = labels[raster.box_slices(c, np_)]
            total += int(flags[box].sum())
    c1 = int(grid.largest_count(labels[None])[0])
    viol_ii = total > c1
    return viol_i, viol_ii


def gluing_check(config: Config, n: int, u: int) -> GluingOutcome:
    """Deterministic implication check on one configuration (see module doc)."""
    if not dn_event(config, n, u):
        return GluingOutcome.NOT_APPLICABLE
    lattice = config.lattice
    if lattice.site_mode:
        batch = config.site_open[None]
    else:
        batch = [e[None] for e in config.edge_open]
    viol_i, viol_ii = _gluing_violations(
        lattice, config.raster, config.carrier_mask, batch, n, u
    )
    return GluingOutcome.VIOLATED if (viol_i or viol_ii) else GluingOutcome.HOLDS


def _dn_counts(task, start: int, stop: int) -> dict:
    lattice, p, n, u, fam = task
    raster, carrier = grid.carrier_raster(lattice, 2 * n)
    rects = _dn_rects(n, u, lattice.d)
    out = {"attempts": 0, "d": 0, "viol_i": 0, "viol_ii": 0, "viol": 0, "holds": 0}
    bsize = _batch_size(carrier.size)
    for lo, hi in _batch_ranges(start, stop, bsize):
        seeds = [derive_stream(fam, i) for i in range(lo, hi)]
        batch = _open_batch(lattice, carrier, p, seeds)
        out["attempts"] += hi - lo
        for corner, widths, axis in rects:
            if (batch.shape[0] if lattice.site_mode else batch[0].shape[0]) == 0:
                break
            sl = raster.rect_slices(corner, widths)
            labels = _crop_labels(lattice, batch, sl)
            take_lo = [slice(None)] * (lattice.d + 1)
            take_lo[axis + 1] = 0
            take_hi = [slice(None)] * (lattice.d + 1)
            take_hi[axis + 1] = -1
            a = labels[tuple(take_lo)]
            b = labels[tuple(take_hi)]
            pool = a[a > 0]
            ok = (
                ((b > 0) & np.isin(b, pool)).any(axis=1)
                if pool.size
                else np.zeros(labels.shape[0], dtype=bool)
            )
            if lattice.site_mode:
                batch = batch[ok]
            else:
                batch = [e[ok] for e in batch]
        survivors = batch.shape[0] if lattice.site_mode else batch[0].shape[0]
        out["d"] += int(survivors)
        for j in range(survivors):
            single = batch[j : j + 1] if lattice.site_mode else [e[j : j + 1] for e in batch]
            vi, vii = _gluing_violations(lattice, raster, carrier, single, n, u)
            out["viol_i"] += int(vi)
            out["viol_ii"] += int(vii)
            if vi or vii:
                out["viol"] += 1
            else:
                out["holds"] += 1
    return out


@dataclass(frozen=True)
class GluingCampaignReport:
    n: int
    u: int
    attempts: int
    conditioned: int
    holds: int
    violated: int
    violated_one_cluster: int
    violated_sum: int

    @property
    def acceptance_rate(self) -> float:
        return self.conditioned / self.attempts if self.attempts else 0.0


def gluing_campaign(
    lattice: LatticeSpec,
    p: float,
    n: int,
    u: int,
    target_conditioned: int,
    master_seed: int,
    workers: int = 1,
    stage_size: int = 50_000,
    max_attempts: int = 40_000_000,
    stop_after_violations: int | None = None,
) -> GluingCampaignReport:
    """Rejection-sample configurations on which D(n, u) holds; tally gluing.

    Attempts run in deterministic fixed-size stages so the outcome is
    reproducible and worker-count invariant.  The campaign stops once the
    conditioned target is reached, the violation budget is exhausted, or the
    attempt cap is hit (the acceptance rate is reported either way).
    """
    fam = family_seed(master_seed, TAG_DN, n, u)
    task = (lattice, p, n, u, fam)
    acc = {"attempts": 0, "d": 0, "viol_i": 0, "viol_ii": 0, "viol": 0, "holds": 0}
    start = 0
    while acc["d"] < target_conditioned and acc["attempts"] < max_attempts:
        if stop_after_violations is not None and acc["viol"] >= stop_after_violations:
            break
        stage = min(stage_size, max_attempts - acc["attempts"])
        part = run_counters(partial(_dn_counts_offset, task, start), stage, workers)
        for k, v in part.items():
            acc[k] += v
        start += stage
    return GluingCampaignReport(
        n,
        u,
        acc["attempts"],
        acc["d"],
        acc["holds"],
        acc["viol"],
        acc["viol_i"],
        acc["viol_ii"],
    )


def _dn_counts_offset(task, offset: int, start: int, stop: int) -> dict:
    return _dn_counts(task, offset + start, offset + stop)


def dn_probability(
    lattice: LatticeSpec, p: float, n: int, u: int, samples: int, master_seed: int, workers: int = 1
) -> Estimate:
    """Plain Monte Carlo estimate of P(D(n, u))."""
    fam = family_seed(master_seed, TAG_DN, n, u)
    task = (lattice, p, n, u, fam)
    counts = run_counters(partial(_dn_counts, task), samples, workers)
    return event_estimate(counts["d"], samples)


@dataclass(frozen=True)
class DnChainBound:
    """Empirical FKG chaining: P(D) against (p_H p_V)^((2u+1)^2)."""

    d_estimate: Estimate
    h_estimate: Estimate
    v_estimate: Estimate
    chained_bound: float

    @property
    def holds_within_3sigma(self) -> bool:
        return self.d_estimate.point >= self.chained_bound - 3 * self.d_estimate.stderr


def dn_fkg_bound(
    lattice: LatticeSpec, p: float, n: int, u: int, samples: int, master_seed: int, workers: int = 1
) -> DnChainBound:
    """Check P(D(n,u)) >= (p_H p_V)^((2u+1)^2) - 3 sigma at the empirical level.

    p_H and p_V are the single-rectangle crossing probabilities of the
    construction's tall and wide rectangles at scale n' = floor(n/u).
    """
    npr = n // u
    d_est = dn_probability(lattice, p, n, u, samples, master_seed, workers)
    h_est = estimate_crossing(lattice, p, (npr, 2 * npr), 0, samples, master_seed, workers)
    v_est = estimate_crossing(lattice, p, (2 * npr, npr), 1, samples, master_seed, workers)
    chained = (h_est.point * v_est.point) ** ((2 * u + 1) ** 2)
    return DnChainBound(d_est, h_est, v_est, chained)


# ---------------------------------------------------------------------------
# Direct lower-tail estimate vs the construction-implied bound


@dataclass(frozen=True)
class LowerTailResult:
    direct: Estimate
    implied_bound: float
    threshold: float


def lower_tail_estimate(
    lattice: LatticeSpec,
    p: float,
    n: int,
    u: int,
    samples: int,
    pi: PiTable,
    master_seed: int,
    params: BoundParams,
    workers: int = 1,
) -> LowerTailResult:
    """P(largest cluster >= (C12/2) n^2 pi(n/u)) vs exp(-(2 C11 + C13) u^2)."""
    if lattice.d != 2:
        raise ValueError("the lower tail construction is two-dimensional")
    if not 2 <= u <= n:
        raise ValueError("u must be an integer in [2, n]")
    c11, c12, c13 = params.require("C11", "C12", "C13")
    threshold = 0.5 * c12 * n * n * pi.pi(max(1, n // u))
    stats = vn_statistics(
        lattice, p, n, samples, master_seed, workers, c1_thresholds=(threshold,)
    )
    direct = event_estimate(stats["c1ge:0"], samples)
    implied = math.exp(-(2 * c11 + c13) * u * u)
    return LowerTailResult(direct, implied, threshold)
