"""Deterministic result files: CSV and JSON with embedded spec hash.

Output bytes are a pure function of the effective experiment spec and the
results; no timestamps, hostnames or worker counts appear, so replays are
byte-identical.  Every file carries the spec hash and the tool version: CSV
as a leading ``#``-comment line, JSON as a ``meta`` object.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Sequence

from . import __version__
from .estimators import PiTable, PiRow
from .lattice import LatticeSpec


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=True)


def spec_hash(spec_payload: dict) -> str:
    return hashlib.sha256(canonical_json(spec_payload).encode()).hexdigest()


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(
    path: Path,
    header: Sequence[str],
    rows: Sequence[Sequence],
    meta: dict,
) -> Path:
    lines = ["# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items()))]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path: Path, payload: dict, meta: dict) -> Path:
    doc = {"meta": dict(sorted(meta.items())), **payload}
    path = Path(path)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def file_meta(spec_digest: str) -> dict:
    return {"spec_hash": spec_digest, "version": __version__}


# ---------------------------------------------------------------------------
# Arm-probability table persistence

PI_HEADER = ("lattice", "p", "m", "n", "samples", "successes", "estimate", "stderr")


def pi_table_rows(table: PiTable) -> list[tuple]:
    return [
        (table.lattice.kind.value, table.p, r.m, r.n, r.samples, r.successes, r.estimate, r.stderr)
        for r in table.sorted_rows()
    ]


def write_pi_csv(path: Path, table: PiTable, spec_digest: str) -> Path:
    return write_csv(path, PI_HEADER, pi_table_rows(table), file_meta(spec_digest))


def write_pi_json(path: Path, table: PiTable, spec_digest: str) -> Path:
    rows = [dict(zip(PI_HEADER, row)) for row in pi_table_rows(table)]
    return write_json(path, {"pi_table": rows}, file_meta(spec_digest))


DIST_HEADER = ("value", "count")


def write_distribution_csv(path: Path, counts: dict, spec_digest: str) -> Path:
    rows = [(v, counts[v]) for v in sorted(counts)]
    return write_csv(path, DIST_HEADER, rows, file_meta(spec_digest))


def read_pi_csv(path: Path, lattice: LatticeSpec) -> PiTable:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    if tuple(header) != PI_HEADER:
        raise ValueError(f"unexpected header {header}")
    table: PiTable | None = None
    for ln in lines[1:]:
        kind, p, m, n, samples, succ, est, err = ln.split(",")
        if table is None:
            table = PiTable(lattice, float(p))
        table.add(PiRow(int(m), int(n), int(samples), int(succ), float(est), float(err)))
    if table is None:
        raise ValueError("empty table")
    return table
