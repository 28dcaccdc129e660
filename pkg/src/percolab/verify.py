"""Acceptance suite: one checkable criterion per entry, deterministic outputs.

Each criterion returns a ``CriterionResult`` whose ``data`` is JSON-stable
(pure function of the master seed), so a verify run writes byte-identical
result files for any worker count.  Criterion 9's conditioned gluing check is
implemented literally; see the package README for the measured behaviour of
that construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import minimum_spanning_tree

from . import bounds, clusters, estimators, growth, lowerbound, reports
from .bounds import BoundParams, int_root_ceil
from .estimators import PiTable, build_pi_table, check_quasi_mult, event_estimate, fit_arm_exponent
from .lattice import TRIANGULAR, Z2_BOND, LatticeSpec, Region, rect_region
from .lowerbound import EventSpec
from .sampler import Config, derive_stream, rng_for, sample_config

TAG_ORACLE = 0x601
TAG_BFS = 0x602


@dataclass(frozen=True)
class VerifyProfile:
    """Sample sizes per criterion; ``full`` holds the pinned gate values."""

    name: str
    crossing_samples: int = 20_000
    crossing_n: int = 32
    pi_samples: int = 10_000
    arm_scales: tuple[int, ...] = (8, 16, 32, 64, 128)
    dyadic_scales: tuple[int, ...] = (2, 4, 8, 16, 32, 64)
    oracle_instances: int = 1000
    oracle_kmax: int = 16
    oracle_box: int = 100
    tail_n: int = 64
    tail_us: tuple[float, ...] = (1.0, 1.5, 2.0, 3.0)
    tail_samples: int = 10_000
    glue_n: int = 32
    glue_u: int = 2
    glue_target: int = 10_000
    glue_stop_violations: int | None = 25
    glue_max_attempts: int = 40_000_000
    constant_samples: int = 4000
    vn_check_ns: tuple[int, ...] = (8, 16, 32)
    fkg_samples: int = 4000
    moment_ns: tuple[int, ...] = (16, 32, 64)
    moment_ks: tuple[int, ...] = (1, 2, 3, 4, 5)
    moment_samples: int = 3000
    bfs_configs: int = 1000
    sweep_kmax: int = 10_000
    determinism_workers: tuple[int, int] = (1, 8)
    determinism_criteria: tuple[int, ...] = (1, 2, 5, 6, 7, 14)


FULL = VerifyProfile(name="full")
QUICK = VerifyProfile(
    name="quick",
    crossing_samples=1500,
    crossing_n=12,
    pi_samples=600,
    arm_scales=(4, 8, 16),
    dyadic_scales=(2, 4, 8),
    oracle_instances=60,
    oracle_box=30,
    tail_n=12,
    tail_samples=600,
    glue_n=8,
    glue_u=2,
    glue_target=40,
    glue_stop_violations=10,
    glue_max_attempts=400_000,
    constant_samples=500,
    vn_check_ns=(4, 8),
    fkg_samples=500,
    moment_ns=(8, 12),
    moment_samples=400,
    bfs_configs=60,
    sweep_kmax=400,
    determinism_criteria=(),
)


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str
    data: dict

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{self.index:2d}] {mark} {self.name}: {self.detail}"


@dataclass
class VerifyContext:
    master_seed: int
    workers: int = 1
    profile: VerifyProfile = FULL
    lattice: LatticeSpec = TRIANGULAR
    p: float = 0.5
    _pi: PiTable | None = field(default=None, repr=False)

    def pi_table(self) -> PiTable:
        """Shared arm-probability table covering every scale the suite needs."""
        if self._pi is not None:
            return self._pi
        prof = self.profile
        scales: set[tuple[int, int]] = {(1, s) for s in prof.arm_scales}
        for n in prof.vn_check_ns:
            scales.add((1, n))
            scales.add((1, 3 * n))
        for u in prof.tail_us:
            scales.add((1, max(1, int(prof.tail_n / u))))
        for n in prof.moment_ns:
            for k in prof.moment_ks:
                scales.add((1, max(1, n // int_root_ceil(k, 2))))
        npr = prof.glue_n // prof.glue_u
        scales.add((1, npr))
        scales.add((1, prof.glue_n))
        scales.add((1, 3 * npr))
        ds = prof.dyadic_scales
        for i, m in enumerate(ds):
            for n in ds[i + 1:]:
                scales.add((m, n))
        self._pi = build_pi_table(
            self.lattice, self.p, sorted(scales), prof.pi_samples, self.master_seed, self.workers
        )
        return self._pi

    def growth_instances(self) -> list[tuple[tuple, ...]]:
        """Shared random point sets for the growth-process criteria."""
        prof = self.profile
        rng = rng_for(estimators.family_seed(self.master_seed, TAG_ORACLE))
        out = []
        for _ in range(prof.oracle_instances):
            k = int(rng.integers(1, prof.oracle_kmax + 1))
            pts: set[tuple] = set()
            while len(pts) < k:
                pts.add(tuple(int(c) for c in rng.integers(-prof.oracle_box, prof.oracle_box + 1, 2)))
            out.append(tuple(sorted(pts)))
        return out


# ---------------------------------------------------------------------------
# Criteria


def _c1_bond_crossing(ctx: VerifyContext) -> CriterionResult:
    n = ctx.profile.crossing_n
    est = estimators.estimate_crossing(
        Z2_BOND, 0.5, (n, n - 1), 0, ctx.profile.crossing_samples, ctx.master_seed, ctx.workers
    )
    dev = abs(est.point - 0.5)
    ok = dev <= 3 * est.stderr
    return CriterionResult(
        1,
        "bond-self-dual-crossing",
        ok,
        f"p_hat={est.point:.4f} stderr={est.stderr:.4f} |dev|={dev:.4f}",
        {"estimate": est.point, "stderr": est.stderr, "successes": est.successes, "n": n},
    )


def _c2_tri_crossing(ctx: VerifyContext) -> CriterionResult:
    n = ctx.profile.crossing_n
    est = estimators.estimate_crossing(
        TRIANGULAR, 0.5, (n - 1, n - 1), 0, ctx.profile.crossing_samples, ctx.master_seed, ctx.workers
    )
    dev = abs(est.point - 0.5)
    ok = dev <= 3 * est.stderr
    return CriterionResult(
        2,
        "triangular-self-dual-crossing",
        ok,
        f"p_hat={est.point:.4f} stderr={est.stderr:.4f} |dev|={dev:.4f}",
        {"estimate": est.point, "stderr": est.stderr, "successes": est.successes, "n": n},
    )


def _c3_arm_exponent(ctx: VerifyContext) -> CriterionResult:
    pi = ctx.pi_table()
    alpha, se = fit_arm_exponent(pi, list(ctx.profile.arm_scales))
    lo, hi = 0.05, 0.20
    ok = lo <= alpha <= hi
    return CriterionResult(
        3,
        "arm-exponent-window",
        ok,
        f"alpha_hat={alpha:.4f} stderr={se:.4f} window=[{lo},{hi}]",
        {"alpha_hat": alpha, "stderr": se, "scales": list(ctx.profile.arm_scales)},
    )


def _c4_quasi_mult(ctx: VerifyContext) -> CriterionResult:
    pi = ctx.pi_table()
    ds = ctx.profile.dyadic_scales
    triples = [
        (k, l, m)
        for i, k in enumerate(ds)
        for j, l in enumerate(ds[i:], start=i)
        for m in ds[j:]
    ]
    report = check_quasi_mult(pi, triples)
    ok = math.isfinite(report.max_ratio) and report.max_ratio <= 5.0
    worst = report.worst()
    return CriterionResult(
        4,
        "quasi-multiplicativity",
        ok,
        f"max_ratio={report.max_ratio:.3f} at (k,l,m)=({worst.k},{worst.l},{worst.m}) [<= 5]",
        {
            "max_ratio": report.max_ratio,
            "n_triples": len(triples),
            "worst": [worst.k, worst.l, worst.m],
        },
    )


def _mst_radii_oracle(points: tuple[tuple, ...]) -> list[int]:
    """Chebyshev MST edge lengths via an independent sparse-graph routine."""
    k = len(points)
    if k == 1:
        return []
    arr = np.array(points, dtype=np.int64)
    dist = np.abs(arr[:, None, :] - arr[None, :, :]).max(axis=2)
    iu = np.triu_indices(k, 1)
    g = coo_matrix((dist[iu].astype(float), iu), shape=(k, k))
    tree = minimum_spanning_tree(g)
    return sorted(int(round(w)) for w in tree.data)


def _c5_growth_oracle(ctx: VerifyContext) -> CriterionResult:
    mismatches = 0
    for pts in ctx.growth_instances():
        mine = sorted(growth.merge_radii(pts).elements())
        if mine != _mst_radii_oracle(pts):
            mismatches += 1
    ok = mismatches == 0
    return CriterionResult(
        5,
        "single-linkage-mst-oracle",
        ok,
        f"mismatches={mismatches}/{ctx.profile.oracle_instances}",
        {"mismatches": mismatches, "instances": ctx.profile.oracle_instances},
    )


def _c6_radius_bound(ctx: VerifyContext) -> CriterionResult:
    n = ctx.profile.oracle_box
    violations = 0
    equalities = 0
    for pts in ctx.growth_instances():
        rep = growth.check_radius_bound(growth.grow_tree(pts), n)
        violations += len(rep.violations)
        equalities += len(rep.equalities)
    ok = violations == 0
    return CriterionResult(
        6,
        "ordered-radius-bound",
        ok,
        f"violations={violations} equalities={equalities}",
        {"violations": violations, "equalities": equalities},
    )


def _c7_shell_disjoint(ctx: VerifyContext) -> CriterionResult:
    n = ctx.profile.oracle_box
    overlaps = 0
    side = 2 * (2 * n + 1) + 1
    origin0 = -(2 * n + 1)
    for pts in ctx.growth_instances():
        rec = growth.grow_tree(pts)
        canvas = np.zeros((side, side), dtype=np.int16)
        for blob in growth.blobs(rec, n):
            mask, origin = growth.blob_region_mask(blob, n)
            sl = tuple(
                slice(o - origin0, o - origin0 + s) for o, s in zip(origin, mask.shape)
            )
            canvas[sl] += mask
        overlaps += int((canvas > 1).sum())
    ok = overlaps == 0
    return CriterionResult(
        7,
        "shell-disjointness",
        ok,
        f"overlapping_sites={overlaps}",
        {"overlapping_sites": overlaps, "instances": ctx.profile.oracle_instances},
    )


def _c8_upper_tail_shape(ctx: VerifyContext) -> CriterionResult:
    prof = ctx.profile
    pi = ctx.pi_table()
    n = prof.tail_n
    us = prof.tail_us
    thresholds = [n * n * pi.pi(max(1, int(n / u))) for u in us]
    stats = estimators.vn_statistics(
        ctx.lattice,
        ctx.p,
        n,
        prof.tail_samples,
        ctx.master_seed,
        ctx.workers,
        c1_thresholds=thresholds,
    )
    ests = [event_estimate(stats[f"c1ge:{i}"], prof.tail_samples) for i in range(len(us))]
    points = [e.point for e in ests]
    strictly_down = all(a > b for a, b in zip(points, points[1:]))
    noise_ok = all(
        a - b > -3 * math.hypot(ea, eb)
        for (a, ea), (b, eb) in zip(
            [(e.point, e.stderr) for e in ests], [(e.point, e.stderr) for e in ests][1:]
        )
    )
    xs = np.array([u * u for u in us])
    ys = np.array([-math.log(p) if p > 0 else math.inf for p in points])
    slope = float(np.polyfit(xs, ys, 1)[0]) if all(map(math.isfinite, ys)) else math.nan
    ok = strictly_down and noise_ok and slope > 0
    return CriterionResult(
        8,
        "upper-tail-shape",
        ok,
        f"P={['%.4f' % p for p in points]} slope={slope:.4g}",
        {
            "u_grid": list(us),
            "thresholds": thresholds,
            "estimates": points,
            "stderrs": [e.stderr for e in ests],
            "slope": slope,
        },
    )


def _glue_constants(ctx: VerifyContext) -> tuple[BoundParams, dict]:
    """Fitted C11 (hard 2:1 crossing at the construction scale), C12, C13."""
    prof = ctx.profile
    npr = prof.glue_n // prof.glue_u
    rsw = lowerbound.estimate_rsw_constant(
        ctx.lattice, ctx.p, npr, prof.constant_samples, ctx.master_seed, ctx.workers
    )
    low = lowerbound.vn_lower_constants(
        ctx.lattice,
        ctx.p,
        npr,
        prof.constant_samples,
        ctx.pi_table(),
        ctx.master_seed,
        ctx.workers,
        c12_grid=(0.1, 0.2, 0.5),
    )
    pick = 1  # C12 = 0.2
    params = BoundParams(
        d=2,
        C11=rsw.c11,
        C12=low.c12_grid[pick],
        C13=low.c13_fits[pick],
        provenance={"C11": "fitted", "C12": "grid", "C13": "fitted"},
    )
    info = {
        "rsw_estimate": rsw.estimate.point,
        "C11": rsw.c11,
        "C12": params.C12,
        "C13": params.C13,
        "c12_grid": list(low.c12_grid),
        "c13_fits": list(low.c13_fits),
    }
    return params, info


def _c9_lower_tail_construction(ctx: VerifyContext) -> CriterionResult:
    prof = ctx.profile
    report = lowerbound.gluing_campaign(
        ctx.lattice,
        ctx.p,
        prof.glue_n,
        prof.glue_u,
        prof.glue_target,
        ctx.master_seed,
        ctx.workers,
        stop_after_violations=prof.glue_stop_violations,
        max_attempts=prof.glue_max_attempts,
    )
    params, info = _glue_constants(ctx)
    direct = lowerbound.lower_tail_estimate(
        ctx.lattice,
        ctx.p,
        prof.glue_n,
        prof.glue_u,
        prof.tail_samples,
        ctx.pi_table(),
        ctx.master_seed,
        params,
        ctx.workers,
    )
    bound_ok = direct.direct.point >= direct.implied_bound - 3 * direct.direct.stderr
    glue_ok = report.violated == 0 and report.conditioned >= prof.glue_target
    ok = glue_ok and bound_ok
    return CriterionResult(
        9,
        "lower-tail-construction",
        ok,
        (
            f"conditioned={report.conditioned} violated={report.violated} "
            f"(one-cluster={report.violated_one_cluster}, sum={report.violated_sum}); "
            f"direct={direct.direct.point:.4f} implied={direct.implied_bound:.3g}"
        ),
        {
            "attempts": report.attempts,
            "conditioned": report.conditioned,
            "violated": report.violated,
            "violated_one_cluster": report.violated_one_cluster,
            "violated_sum": report.violated_sum,
            "acceptance_rate": report.acceptance_rate,
            "direct": direct.direct.point,
            "direct_stderr": direct.direct.stderr,
            "implied_bound": direct.implied_bound,
            "threshold": direct.threshold,
            **info,
        },
    )


def _c10_mean_vn_floor(ctx: VerifyContext) -> CriterionResult:
    prof = ctx.profile
    pi = ctx.pi_table()
    rows = []
    ok = True
    for n in prof.vn_check_ns:
        rep = lowerbound.vn_lower_constants(
            ctx.lattice, ctx.p, n, prof.constant_samples, pi, ctx.master_seed, ctx.workers
        )
        ok &= rep.mean_ok
        rows.append(
            {
                "n": n,
                "mean_vn": rep.mean_vn,
                "floor": rep.floor_value,
                "mean_ok": rep.mean_ok,
            }
        )
    detail = " ".join(f"n={r['n']}:{r['mean_vn']:.0f}>={r['floor']:.0f}" for r in rows)
    return CriterionResult(10, "mean-long-arm-floor", ok, detail, {"rows": rows})


def _fkg_catalog(n: int) -> list[tuple[EventSpec, EventSpec]]:
    box = EventSpec("h_crossing", corner=(-n, -n), widths=(2 * n, 2 * n))
    boxv = EventSpec("v_crossing", corner=(-n, -n), widths=(2 * n, 2 * n))
    wide = EventSpec("h_crossing", corner=(-n, 0), widths=(2 * n, n))
    tall = EventSpec("v_crossing", corner=(0, -n), widths=(n, 2 * n))
    left = EventSpec("h_crossing", corner=(-n, -n), widths=(n, n))
    right = EventSpec("h_crossing", corner=(0, 0), widths=(n, n))
    arm_small = EventSpec("arm", m=1, n=n)
    arm_mid = EventSpec("arm", m=2, n=n)
    vn_ev = EventSpec("vn_ge", n=n // 2, threshold=float(n * n) / 4)
    c1_ev = EventSpec("c1_ge", n=n, threshold=float(n * n) / 2)
    return [
        (box, box),
        (box, boxv),
        (left, right),
        (wide, tall),
        (box, arm_small),
        (arm_small, arm_mid),
        (vn_ev, arm_small),
        (c1_ev, box),
        (vn_ev, c1_ev),
        (boxv, arm_mid),
    ]


def _c11_fkg(ctx: VerifyContext) -> CriterionResult:
    prof = ctx.profile
    n = min(16, prof.tail_n)
    rows = []
    ok = True
    for ev_a, ev_b in _fkg_catalog(n):
        res = lowerbound.fkg_check(
            ctx.lattice, ctx.p, ev_a, ev_b, prof.fkg_samples, ctx.master_seed, ctx.workers
        )
        ok &= res.z >= -3.0
        rows.append(
            {
                "a": ev_a.kind,
                "b": ev_b.kind,
                "joint": res.joint.point,
                "product": res.product,
                "z": res.z,
            }
        )
    zmin = min(r["z"] for r in rows)
    return CriterionResult(
        11, "fkg-positive-association", ok, f"min_z={zmin:.2f} over {len(rows)} pairs", {"rows": rows}
    )


def _c12_moment_stability(ctx: VerifyContext) -> CriterionResult:
    prof = ctx.profile
    pi = ctx.pi_table()
    fits = {}
    for n in prof.moment_ns:
        stats = estimators.vn_statistics(
            ctx.lattice,
            ctx.p,
            n,
            prof.moment_samples,
            ctx.master_seed,
            ctx.workers,
            moment_ks=prof.moment_ks,
        )
        best = 0.0
        for k in prof.moment_ks:
            mom = stats[f"msum:{k}"] / prof.moment_samples
            scale = max(1, n // int_root_ceil(k, 2))
            fit = mom ** (1 / k) * k / (n * n * pi.pi(scale))
            best = max(best, fit)
        fits[n] = best
    values = list(fits.values())
    spread = max(values) / min(values)
    ok = all(map(math.isfinite, values)) and spread < 2.0
    return CriterionResult(
        12,
        "moment-constant-stability",
        ok,
        f"fits={[f'{n}:{v:.3f}' for n, v in fits.items()]} spread={spread:.3f} [< 2]",
        {"fits": {str(k): v for k, v in fits.items()}, "spread": spread},
    )


def _canonical_partition(labels: np.ndarray) -> np.ndarray:
    """Relabel by first occurrence so partitions compare exactly."""
    flat = labels.ravel()
    out = np.zeros_like(flat)
    mapping: dict[int, int] = {}
    for i, v in enumerate(flat.tolist()):
        if v == 0:
            continue
        if v not in mapping:
            mapping[v] = len(mapping) + 1
        out[i] = mapping[v]
    return out.reshape(labels.shape)


def _bfs_labels(config: Config, region: Region) -> np.ndarray:
    """Independent flood-fill labeling used as the criterion-13 oracle."""
    lattice = config.lattice
    raster = config.raster
    offsets = lattice.neighbor_offsets()
    shape = raster.shape
    lab = np.zeros(shape, dtype=np.int32)
    in_region = raster.mask_of_region(region)
    if lattice.site_mode:
        participe = config.site_open & in_region
    else:
        participe = in_region.copy()
    next_label = 0
    idxs = np.argwhere(participe)
    for x, y in idxs.tolist():
        if lab[x, y]:
            continue
        next_label += 1
        stack = [(x, y)]
        lab[x, y] = next_label
        while stack:
            cx, cy = stack.pop()
            for ox, oy in offsets:
                nx, ny = cx + ox, cy + oy
                if not (0 <= nx < shape[0] and 0 <= ny < shape[1]):
                    continue
                if not participe[nx, ny] or lab[nx, ny]:
                    continue
                if not lattice.site_mode:
                    if ox + oy < 0:
                        ex, ey, axis = nx, ny, (0 if ox else 1)
                    else:
                        ex, ey, axis = cx, cy, (0 if ox else 1)
                    if not config.edge_open[axis][ex, ey]:
                        continue
                lab[nx, ny] = next_label
                stack.append((nx, ny))
    return lab


def _c13_bfs_oracle(ctx: VerifyContext) -> CriterionResult:
    prof = ctx.profile
    rng = rng_for(estimators.family_seed(ctx.master_seed, TAG_BFS))
    mismatches = 0
    for i in range(prof.bfs_configs):
        lattice = TRIANGULAR if i % 2 == 0 else Z2_BOND
        w = int(rng.integers(7, 64))
        h = int(rng.integers(7, 64))
        region = rect_region((0, 0), (w, h))
        seed = derive_stream(estimators.family_seed(ctx.master_seed, TAG_BFS), i)
        config = sample_config(lattice, region, 0.5, seed)
        mine = clusters.label_clusters(config, region)
        ours = _canonical_partition(mine.label_grid)
        oracle = _canonical_partition(_bfs_labels(config, region))
        if not np.array_equal(ours, oracle):
            mismatches += 1
    ok = mismatches == 0
    return CriterionResult(
        13,
        "cluster-labels-vs-bfs",
        ok,
        f"mismatches={mismatches}/{prof.bfs_configs}",
        {"mismatches": mismatches, "configs": prof.bfs_configs},
    )


def _independent_series(u: float, params: BoundParams, terms: int = 4000) -> float:
    """Naive high-to-low summation of the same two-piece series."""
    c2v = params.C2
    ud = u**params.d
    cut = int(ud / c2v)
    vals = [1.0]
    for k in range(1, cut + 1):
        vals.append((ud / (c2v * k)) ** k)
    k = cut + 1
    while k <= cut + terms:
        t = (ud / k) ** ((1 - params.alpha / params.d) * k)
        vals.append(t)
        if k > ud and t < 1e-18 * sum(vals):
            break
        k += 1
    return math.fsum(sorted(vals))


def _c14_bound_numerics(ctx: VerifyContext) -> CriterionResult:
    params = BoundParams(d=2, alpha=float(bounds.ONE_ARM_EXPONENT), C2=1.0)
    checks = {}
    ok = True
    for u in (1.0, 1.5, 2.0):
        mine, _ = bounds.generating_fn_bound(u, 16, params)
        ref = _independent_series(u, params)
        rel = abs(mine - ref) / ref
        checks[f"series_rel_err_u{u}"] = rel
        ok &= rel < 1e-9
    # exponential-series identity
    u, c2v = 1.7, 1.3
    total, term, k = 0.0, 1.0, 0
    while term > 1e-20:
        total += term
        k += 1
        term = term * (u * u / c2v) / k
    rel = abs(total - math.exp(u * u / c2v)) / math.exp(u * u / c2v)
    checks["exp_identity_rel_err"] = rel
    ok &= rel < 1e-9
    sup_mult, arg_mult = bounds.multinomial_sweep(ctx.profile.sweep_kmax, 2)
    sup_pow, arg_pow = bounds.power_product_sweep(ctx.profile.sweep_kmax, 2)
    checks["multinomial_sup"] = sup_mult
    checks["multinomial_argmax"] = arg_mult
    checks["power_product_sup"] = sup_pow
    checks["power_product_argmax"] = arg_pow
    ok &= math.isfinite(sup_mult) and math.isfinite(sup_pow)
    return CriterionResult(
        14,
        "bound-kit-numerics",
        ok,
        f"series_ok mult_sup={sup_mult:.3f} pow_sup={sup_pow:.3f}",
        checks,
    )


def _c15_determinism(ctx: VerifyContext) -> CriterionResult:
    import tempfile

    prof = ctx.profile
    indices = prof.determinism_criteria or (1, 5, 14)
    blobs_bytes = []
    for workers in prof.determinism_workers:
        with tempfile.TemporaryDirectory() as tmp:
            sub = VerifyContext(ctx.master_seed, workers, QUICK, ctx.lattice, ctx.p)
            results = [run_criterion(i, sub) for i in indices]
            files = write_results(Path(tmp), results, spec_digest="determinism-check")
            blobs_bytes.append({f.name: f.read_bytes() for f in files})
    ok = blobs_bytes[0] == blobs_bytes[1]
    return CriterionResult(
        15,
        "worker-count-determinism",
        ok,
        f"criteria={list(indices)} workers={list(prof.determinism_workers)} identical={ok}",
        {"criteria": list(indices), "workers": list(prof.determinism_workers), "identical": ok},
    )


_CRITERIA = {
    1: _c1_bond_crossing,
    2: _c2_tri_crossing,
    3: _c3_arm_exponent,
    4: _c4_quasi_mult,
    5: _c5_growth_oracle,
    6: _c6_radius_bound,
    7: _c7_shell_disjoint,
    8: _c8_upper_tail_shape,
    9: _c9_lower_tail_construction,
    10: _c10_mean_vn_floor,
    11: _c11_fkg,
    12: _c12_moment_stability,
    13: _c13_bfs_oracle,
    14: _c14_bound_numerics,
    15: _c15_determinism,
}


def run_criterion(index: int, ctx: VerifyContext) -> CriterionResult:
    if index not in _CRITERIA:
        raise ValueError(f"no criterion {index}")
    return _CRITERIA[index](ctx)


def write_results(out_dir: Path, results: list[CriterionResult], spec_digest: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    meta = reports.file_meta(spec_digest)
    rows = [(r.index, r.name, "pass" if r.passed else "fail", r.detail) for r in results]
    csv_path = reports.write_csv(
        out_dir / f"verify_{spec_digest[:12]}.csv", ("index", "name", "status", "detail"), rows, meta
    )
    payload = {
        "results": [
            {
                "index": r.index,
                "name": r.name,
                "passed": r.passed,
                "detail": r.detail,
                "data": r.data,
            }
            for r in results
        ]
    }
    json_path = reports.write_json(out_dir / f"verify_{spec_digest[:12]}.json", payload, meta)
    return [csv_path, json_path]


def run_verify(
    master_seed: int,
    workers: int = 1,
    profile: VerifyProfile = FULL,
    out_dir: Path | None = None,
    indices: list[int] | None = None,
    spec_digest: str = "",
    echo=print,
) -> tuple[list[CriterionResult], int]:
    ctx = VerifyContext(master_seed, workers, profile)
    results = []
    for i in indices or sorted(_CRITERIA):
        res = run_criterion(i, ctx)
        echo(res.line())
        results.append(res)
    if out_dir is not None:
        write_results(Path(out_dir), results, spec_digest or f"seed{master_seed}")
    failed = sum(not r.passed for r in results)
    return results, (1 if failed else 0)
