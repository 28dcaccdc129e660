from __future__ import annotations

import json

import pytest
import yaml

from percolab.cli import ExperimentSpec, main
from percolab.lattice import TRIANGULAR
from percolab.reports import read_pi_csv, spec_hash


def write_spec(tmp_path, **overrides):
    doc = {
        "master_seed": 17,
        "lattice": "triangular_site",
        "samples": 200,
        "workers": 1,
        "sizes": [3, 4],
    }
    doc.update(overrides)
    path = tmp_path / "spec.yaml"
    path.write_text(yaml.safe_dump(doc))
    return path


def test_spec_round_trip(tmp_path):
    spec = ExperimentSpec(master_seed=5, samples=100, sizes=[2, 3], pi={"scales": [[1, 2]]})
    path = tmp_path / "s.yaml"
    path.write_text(yaml.safe_dump(spec.to_dict()))
    again = ExperimentSpec.from_file(path)
    assert again == spec
    assert spec_hash(again.to_dict()) == spec_hash(spec.to_dict())


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentSpec(p=1.5)
    with pytest.raises(ValueError):
        ExperimentSpec(samples=0)
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump({"nonsense_key": 1}))
    with pytest.raises(ValueError):
        ExperimentSpec.from_file(path)


def test_pi_subcommand_deterministic(tmp_path, capsys):
    spec = write_spec(tmp_path, pi={"scales": [[1, 2], [1, 3]]})
    out1 = tmp_path / "out1"
    out2 = tmp_path / "out2"
    assert main(["pi", "--spec", str(spec), "--out", str(out1)]) == 0
    assert main(["pi", "--spec", str(spec), "--out", str(out2), "--workers", "2"]) == 0
    files1 = sorted(out1.iterdir())
    files2 = sorted(out2.iterdir())
    assert [f.name for f in files1] == [f.name for f in files2]
    for a, b in zip(files1, files2):
        assert a.read_bytes() == b.read_bytes()
    csv = [f for f in files1 if f.suffix == ".csv"][0]
    table = read_pi_csv(csv, TRIANGULAR)
    assert (1, 2) in table.rows and (1, 3) in table.rows
    first = csv.read_text().splitlines()[0]
    assert "spec_hash=" in first and "version=" in first


def test_seed_override_changes_hash(tmp_path):
    spec = write_spec(tmp_path, pi={"scales": [[1, 2]]})
    out = tmp_path / "o"
    assert main(["pi", "--spec", str(spec), "--out", str(out), "--seed", "999"]) == 0
    assert main(["pi", "--spec", str(spec), "--out", str(out)]) == 0
    names = {f.name for f in out.iterdir()}
    assert len(names) == 4  # two spec hashes, csv + json each


def test_invalid_p_exits_nonzero(tmp_path, capsys):
    spec = write_spec(tmp_path, p=1.5)
    code = main(["pi", "--spec", str(spec), "--out", str(tmp_path / "x")])
    assert code == 2
    err = capsys.readouterr().err
    assert json.loads(err.strip())["error"]


def test_crossing_subcommand(tmp_path):
    spec = write_spec(tmp_path, sizes=[4])
    out = tmp_path / "cross"
    assert main(["crossing", "--spec", str(spec), "--out", str(out)]) == 0
    csv = [f for f in out.iterdir() if f.suffix == ".csv"][0]
    assert "estimate" in csv.read_text().splitlines()[1]


def test_blob_subcommand_points_flag(tmp_path):
    out = tmp_path / "blob"
    code = main(
        ["blob", "--points", "[[0,0],[4,0],[4,3]]", "--out", str(out), "--format", "json"]
    )
    assert code == 0
    doc = json.loads(next(out.glob("*.json")).read_text())
    assert doc["merge_radii_doubled"] == [3, 4]
    assert doc["ordering_count"] == 2
    assert len(doc["blobs"]) == 5


def test_blob_requires_points(tmp_path):
    assert main(["blob", "--out", str(tmp_path / "b")]) == 2


def test_tail_subcommand(tmp_path):
    spec = write_spec(
        tmp_path, sizes=[3], u_grid=[1.0, 2.0], samples=150, tail={"statistic": "long_arm"}
    )
    out = tmp_path / "tail"
    assert main(["tail", "--spec", str(spec), "--out", str(out)]) == 0
    doc = json.loads(next(out.glob("*.json")).read_text())
    assert len(doc["tail"]) == 2


def test_tail_distribution_export(tmp_path):
    spec = write_spec(
        tmp_path, sizes=[2], u_grid=[1.0], samples=120, tail={"distribution": True}
    )
    out = tmp_path / "dist"
    assert main(["tail", "--spec", str(spec), "--out", str(out)]) == 0
    dist_csv = next(out.glob("dist_n2_*.csv"))
    lines = dist_csv.read_text().splitlines()
    assert lines[1] == "value,count"
    total = sum(int(ln.split(",")[1]) for ln in lines[2:])
    assert total == 120


def test_bounds_subcommand(tmp_path):
    spec = write_spec(tmp_path, bounds={"sweep_kmax": 64, "C2": 1.0, "alpha": 0.104})
    out = tmp_path / "bounds"
    assert main(["bounds", "--spec", str(spec), "--out", str(out), "--format", "json"]) == 0
    doc = json.loads(next(out.glob("*.json")).read_text())
    assert doc["sweeps"]["kmax"] == 64
    assert doc["sweeps"]["multinomial_sup"] > 0


def test_lower_subcommand(tmp_path):
    spec = write_spec(
        tmp_path,
        samples=150,
        lower={"n": 8, "u": 2, "conditioned": 3, "max_attempts": 6000, "stop_after_violations": 3},
    )
    out = tmp_path / "low"
    assert main(["lower", "--spec", str(spec), "--out", str(out), "--format", "json"]) == 0
    doc = json.loads(next(out.glob("*.json")).read_text())
    assert "campaign" in doc and "rsw" in doc


def test_verify_subcommand_quick_subset(tmp_path):
    spec = write_spec(tmp_path, verify={"profile": "quick", "criteria": [1, 5, 14]})
    out = tmp_path / "ver"
    code = main(["verify", "--spec", str(spec), "--out", str(out)])
    assert code == 0
    assert any(f.name.startswith("verify_") for f in out.iterdir())
