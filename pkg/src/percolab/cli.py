"""Command-line experiment runner.

Usage: ``percolab <subcommand> [--spec FILE] [--seed N] [--workers N]
[--out DIR] [--format csv|json|both]``.

The spec file is YAML (plain key-value with nesting; grammar documented in
the README).  Outputs are named ``<subcommand>_<spec-hash>.<ext>`` where the
hash digests the effective spec (after any --seed override), so identical
specs yield identical file names and bytes, independent of worker count.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from . import __version__, bounds, estimators, growth, lowerbound, reports
from .bounds import BoundParams
from .estimators import build_pi_table, vn_statistics, event_estimate
from .lattice import LatticeKind, LatticeSpec
from .verify import FULL, QUICK, run_verify


@dataclass
class ExperimentSpec:
    """Validated, round-trippable experiment description."""

    master_seed: int = 42
    lattice: str = "triangular_site"
    d: int = 2
    p: float | None = None
    samples: int = 1000
    workers: int = 1
    sizes: list = field(default_factory=lambda: [8, 16, 32])
    u_grid: list = field(default_factory=lambda: [1.0, 1.5, 2.0, 3.0])
    k_grid: list = field(default_factory=lambda: [1, 2, 3])
    pi: dict = field(default_factory=dict)
    tail: dict = field(default_factory=dict)
    blob: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    lower: dict = field(default_factory=dict)
    crossing: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        LatticeKind(self.lattice)
        if self.p is not None and not 0 <= self.p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if any(n < 1 for n in self.sizes):
            raise ValueError("sizes must be >= 1")
        if any(u < 1 for u in self.u_grid):
            raise ValueError("u grid values must be >= 1")
        if any(k < 1 for k in self.k_grid):
            raise ValueError("k grid values must be >= 1")

    @classmethod
    def from_file(cls, path: Path) -> "ExperimentSpec":
        raw = yaml.safe_load(Path(path).read_text()) or {}
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown spec keys: {sorted(unknown)}")
        return cls(**raw)

    def to_dict(self) -> dict:
        return asdict(self)

    def lattice_spec(self) -> LatticeSpec:
        return LatticeSpec(LatticeKind(self.lattice), self.d)

    def effective_p(self) -> float:
        if self.p is not None:
            return self.p
        return estimators.default_p(self.lattice_spec())


def _load_spec(args) -> tuple[ExperimentSpec, str]:
    spec = ExperimentSpec.from_file(args.spec) if args.spec else ExperimentSpec()
    if args.seed is not None:
        spec.master_seed = args.seed
    if args.workers is not None:
        spec.workers = args.workers
    # workers is an execution parameter, not experiment identity: results are
    # worker-invariant, so the digest must be too
    payload = {k: v for k, v in spec.to_dict().items() if k != "workers"}
    digest = reports.spec_hash(payload)
    return spec, digest


def _emit(args, spec_digest: str, stem: str, header, rows, payload: dict) -> list[Path]:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    meta = reports.file_meta(spec_digest)
    written = []
    if args.format in ("csv", "both"):
        written.append(reports.write_csv(out / f"{stem}_{spec_digest[:12]}.csv", header, rows, meta))
    if args.format in ("json", "both"):
        written.append(reports.write_json(out / f"{stem}_{spec_digest[:12]}.json", payload, meta))
    for p in written:
        print(f"wrote {p}")
    return written


def _cmd_pi(args) -> int:
    spec, digest = _load_spec(args)
    lattice, p = spec.lattice_spec(), spec.effective_p()
    scales = [tuple(s) for s in spec.pi.get("scales", [[1, n] for n in spec.sizes])]
    table = build_pi_table(lattice, p, scales, spec.samples, spec.master_seed, spec.workers)
    rows = reports.pi_table_rows(table)
    payload = {"pi_table": [dict(zip(reports.PI_HEADER, r)) for r in rows]}
    _emit(args, digest, "pi", reports.PI_HEADER, rows, payload)
    return 0


def _cmd_crossing(args) -> int:
    spec, digest = _load_spec(args)
    lattice, p = spec.lattice_spec(), spec.effective_p()
    rects = spec.crossing.get("rects")
    if rects is None:
        if lattice.kind == LatticeKind.Z_BOND:
            rects = [{"widths": [n, n - 1], "axis": 0} for n in spec.sizes]
        else:
            rects = [{"widths": [n - 1, n - 1], "axis": 0} for n in spec.sizes]
    header = ("lattice", "p", "w0", "w1", "axis", "samples", "successes", "estimate", "stderr")
    rows = []
    for r in rects:
        w0, w1 = r["widths"]
        axis = int(r.get("axis", 0))
        est = estimators.estimate_crossing(
            lattice, p, (w0, w1), axis, spec.samples, spec.master_seed, spec.workers
        )
        rows.append((lattice.kind.value, p, w0, w1, axis, est.samples, est.successes, est.point, est.stderr))
    payload = {"crossings": [dict(zip(header, r)) for r in rows]}
    _emit(args, digest, "crossing", header, rows, payload)
    return 0


def _cmd_tail(args) -> int:
    spec, digest = _load_spec(args)
    lattice, p = spec.lattice_spec(), spec.effective_p()
    statistic = spec.tail.get("statistic", "largest_cluster")
    if statistic not in ("largest_cluster", "long_arm"):
        raise ValueError("tail.statistic must be largest_cluster or long_arm")
    sizes = spec.tail.get("sizes", spec.sizes)
    pi_scales = sorted({(1, max(1, int(n / u))) for n in sizes for u in spec.u_grid})
    table = build_pi_table(lattice, p, pi_scales, spec.samples, spec.master_seed, spec.workers)
    header = ("statistic", "n", "u", "threshold", "samples", "successes", "estimate", "stderr")
    rows = []
    for n in sizes:
        thresholds = [n**lattice.d * table.pi(max(1, int(n / u))) for u in spec.u_grid]
        kw = {"c1_thresholds" if statistic == "largest_cluster" else "vn_thresholds": thresholds}
        stats = vn_statistics(
            lattice, p, n, spec.samples, spec.master_seed, spec.workers, **kw
        )
        key = "c1ge" if statistic == "largest_cluster" else "vnge"
        for i, u in enumerate(spec.u_grid):
            est = event_estimate(stats[f"{key}:{i}"], spec.samples)
            rows.append((statistic, n, u, thresholds[i], est.samples, est.successes, est.point, est.stderr))
    payload = {"tail": [dict(zip(header, r)) for r in rows]}
    if spec.tail.get("distribution"):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        payload["distributions"] = {}
        for n in sizes:
            dist = estimators.largest_cluster_distribution(
                lattice, p, n, spec.samples, spec.master_seed, spec.workers
            )
            path = reports.write_distribution_csv(
                out / f"dist_n{n}_{digest[:12]}.csv", dist.counts, digest
            )
            print(f"wrote {path}")
            payload["distributions"][str(n)] = {
                "mean": dist.mean,
                "stderr": dist.stderr,
                "median": dist.quantile(0.5),
                "q90": dist.quantile(0.9),
            }
    _emit(args, digest, "tail", header, rows, payload)
    return 0


def _cmd_blob(args) -> int:
    spec, digest = _load_spec(args)
    pts = json.loads(args.points) if args.points else spec.blob.get("points")
    if not pts:
        raise ValueError("blob needs points (--points JSON or blob.points in the spec)")
    points = [tuple(int(c) for c in p) for p in pts]
    n = int(spec.blob.get("n", max(abs(c) for p in points for c in p)))
    record = growth.grow_tree(points)
    blob_list = growth.blobs(record, n)
    radii = growth.merge_radii(points)
    d = len(points[0])
    c3 = spec.blob.get("C3")
    alpha = spec.blob.get("alpha")
    c4 = float(spec.blob.get("C4", 1.0))
    bound_values = {
        "count_upper_bound": growth.count_upper_bound(radii, n, c4, d),
        "C4": c4,
    }
    if c3 is not None and alpha is not None:
        bound_values["prob_upper_bound"] = growth.prob_upper_bound(
            radii, n, lambda s: float(s) ** -alpha, float(c3)
        )
        bound_values["C3"] = float(c3)
        bound_values["alpha"] = float(alpha)
    payload = {
        "points": [list(p) for p in record.points],
        "n": n,
        "edges": [{"u": list(e.u), "v": list(e.v), "r2": e.r2} for e in record.edges],
        "merge_radii_doubled": sorted(radii.elements()),
        "ordering_count": growth.ordering_count(radii),
        "bounds": bound_values,
        "blobs": [
            {
                "members": sorted(list(m) for m in b.members),
                "b2": b.b2,
                "d2": b.d2,
                "is_root": b.is_root,
                "region_size": len(growth.blob_region(b, n)),
            }
            for b in blob_list
        ],
        "radius_bound": {
            "violations": list(growth.check_radius_bound(record, n).violations),
            "equalities": list(growth.check_radius_bound(record, n).equalities),
        },
    }
    header = ("u", "v", "r2")
    rows = [(str(e.u), str(e.v), e.r2) for e in record.edges]
    _emit(args, digest, "blob", header, rows, payload)
    return 0


def _cmd_bounds(args) -> int:
    spec, digest = _load_spec(args)
    cfg = spec.bounds
    params = BoundParams(
        d=spec.d,
        alpha=cfg.get("alpha", float(bounds.ONE_ARM_EXPONENT) if spec.d == 2 else None),
        C2=cfg.get("C2", 1.0),
        c1=cfg.get("c1"),
        c2=cfg.get("c2"),
        c3=cfg.get("c3"),
        c4=cfg.get("c4"),
    )
    kmax = int(cfg.get("sweep_kmax", 10_000))
    sup_mult, arg_mult = bounds.multinomial_sweep(kmax, spec.d)
    sup_pow, arg_pow = bounds.power_product_sweep(kmax, spec.d)
    grid = [1.0 + 0.25 * i for i in range(13)]
    series = {repr(u): bounds.generating_fn_bound(u, max(spec.sizes), params)[0] for u in grid}
    payload = {
        "params": {"d": spec.d, "alpha": params.alpha, "C2": params.C2},
        "sweeps": {
            "kmax": kmax,
            "multinomial_sup": sup_mult,
            "multinomial_argmax": arg_mult,
            "power_product_sup": sup_pow,
            "power_product_argmax": arg_pow,
        },
        "generating_fn_series": series,
    }
    header = ("quantity", "value")
    rows = [
        ("multinomial_sup", sup_mult),
        ("multinomial_argmax", arg_mult),
        ("power_product_sup", sup_pow),
        ("power_product_argmax", arg_pow),
    ]
    _emit(args, digest, "bounds", header, rows, payload)
    return 0


def _cmd_lower(args) -> int:
    spec, digest = _load_spec(args)
    lattice, p = spec.lattice_spec(), spec.effective_p()
    cfg = spec.lower
    n = int(cfg.get("n", 32))
    u = int(cfg.get("u", 2))
    npr = n // u
    conditioned = int(cfg.get("conditioned", 200))
    c12_grid = tuple(cfg.get("c12_grid", [0.1, 0.2, 0.5]))
    scales = sorted({(1, npr), (1, 3 * npr), (1, n), (1, max(1, n // u))})
    table = build_pi_table(lattice, p, scales, spec.samples, spec.master_seed, spec.workers)
    rsw = lowerbound.estimate_rsw_constant(lattice, p, npr, spec.samples, spec.master_seed, spec.workers)
    low = lowerbound.vn_lower_constants(
        lattice, p, npr, spec.samples, table, spec.master_seed, spec.workers, c12_grid
    )
    campaign = lowerbound.gluing_campaign(
        lattice,
        p,
        n,
        u,
        conditioned,
        spec.master_seed,
        spec.workers,
        stop_after_violations=int(cfg.get("stop_after_violations", 25)),
        max_attempts=int(cfg.get("max_attempts", 2_000_000)),
    )
    pick = min(1, len(c12_grid) - 1)
    params = BoundParams(d=2, C11=rsw.c11, C12=c12_grid[pick], C13=low.c13_fits[pick])
    tail = lowerbound.lower_tail_estimate(
        lattice, p, n, u, spec.samples, table, spec.master_seed, params, spec.workers
    )
    chain = lowerbound.dn_fkg_bound(lattice, p, n, u, spec.samples, spec.master_seed, spec.workers)
    payload = {
        "n": n,
        "u": u,
        "rsw": {"estimate": rsw.estimate.point, "C11": rsw.c11},
        "c12_grid": list(low.c12_grid),
        "c13_fits": [x if math.isfinite(x) else None for x in low.c13_fits],
        "mean_vn": low.mean_vn,
        "mean_floor": low.floor_value,
        "campaign": {
            "attempts": campaign.attempts,
            "conditioned": campaign.conditioned,
            "holds": campaign.holds,
            "violated": campaign.violated,
            "violated_one_cluster": campaign.violated_one_cluster,
            "violated_sum": campaign.violated_sum,
            "acceptance_rate": campaign.acceptance_rate,
        },
        "lower_tail": {
            "direct": tail.direct.point,
            "stderr": tail.direct.stderr,
            "implied_bound": tail.implied_bound,
            "threshold": tail.threshold,
        },
        "fkg_chain": {
            "d_estimate": chain.d_estimate.point,
            "h_estimate": chain.h_estimate.point,
            "v_estimate": chain.v_estimate.point,
            "chained_bound": chain.chained_bound,
            "holds_within_3sigma": chain.holds_within_3sigma,
        },
    }
    header = ("quantity", "value")
    rows = [
        ("C11", rsw.c11),
        ("conditioned", campaign.conditioned),
        ("violated", campaign.violated),
        ("acceptance_rate", campaign.acceptance_rate),
        ("direct_lower_tail", tail.direct.point),
        ("implied_bound", tail.implied_bound),
    ]
    _emit(args, digest, "lower", header, rows, payload)
    return 0


def _cmd_verify(args) -> int:
    spec, digest = _load_spec(args)
    profile = QUICK if (args.quick or spec.verify.get("profile") == "quick") else FULL
    indices = spec.verify.get("criteria")
    _, code = run_verify(
        spec.master_seed,
        spec.workers,
        profile,
        Path(args.out),
        indices=indices,
        spec_digest=digest,
    )
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="percolab",
        description="Critical percolation cluster-statistics laboratory",
    )
    parser.add_argument("--version", action="version", version=f"percolab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", type=Path, default=None, help="YAML experiment spec")
    common.add_argument("--seed", type=int, default=None, help="override master seed")
    common.add_argument("--workers", type=int, default=None, help="worker processes")
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory")
    common.add_argument("--format", choices=("csv", "json", "both"), default="both")

    sub.add_parser("pi", parents=[common], help="arm-probability table")
    sub.add_parser("crossing", parents=[common], help="rectangle crossing probabilities")
    sub.add_parser("tail", parents=[common], help="largest-cluster / long-arm tail sweeps")
    blob = sub.add_parser("blob", parents=[common], help="growth process on a point set")
    blob.add_argument("--points", type=str, default=None, help="JSON list of coordinate pairs")
    sub.add_parser("bounds", parents=[common], help="bound evaluators and sweeps")
    sub.add_parser("lower", parents=[common], help="lower-bound construction suite")
    ver = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    ver.add_argument("--quick", action="store_true", help="reduced-size profile")

    args = parser.parse_args(argv)
    commands = {
        "pi": _cmd_pi,
        "crossing": _cmd_crossing,
        "tail": _cmd_tail,
        "blob": _cmd_blob,
        "bounds": _cmd_bounds,
        "lower": _cmd_lower,
        "verify": _cmd_verify,
    }
    try:
        return commands[args.command](args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
