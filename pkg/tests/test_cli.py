import csv
import json

import pytest

from multipolar_hardy import cli
from multipolar_hardy.quadrature import QuadratureError

POLES4 = [[0.5, 0, 0, 0], [-0.5, 0, 0, 0]]


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def rows(stem):
    with open(f"{stem}.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def test_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 1 + 8
    names = [line.split()[0] for line in out[1:]]
    assert names == list(cli.EXPERIMENTS)
    table = dict(zip(names, out[1:]))
    assert "sharpness" in table["sweep"]
    assert "extremal" in table["minimizer"]


def test_reduction_run(tmp_path):
    stem = tmp_path / "red"
    cfg = write(tmp_path, "c.json", {"experiment": "reduction", "N": 4, "poles": POLES4, "p": 2, "output_path": str(stem)})
    assert cli.main(["run", cfg]) == 0
    r = {row["experiment"]: row for row in rows(stem)}
    assert float(r["reduction/multipolar_p2"]["margin"]) <= 1e-9
    assert r["reduction/multipolar_p2"]["pass"] == "true"
    report = json.loads((tmp_path / "red.json").read_text())
    assert report["config"]["seed"] == 0 and report["passed"]


def test_sweep_run_and_schema(tmp_path):
    stem = tmp_path / "sw"
    data = {
        "experiment": "sweep",
        "manifold": "hyperbolic",
        "dimension": 4,
        "curvature_scale": 1.0,
        "poles": POLES4,
        "p": 2,
        "eps_list": [0.2, 0.1, 0.05],
        "samples": 50_000,
        "output_path": str(stem),
    }
    assert cli.main(["run", write(tmp_path, "c.json", data)]) == 0
    text = (tmp_path / "sw.csv").read_bytes()
    assert b"\r" not in text
    assert text.decode().splitlines()[0] == ",".join(cli.CSV_COLUMNS)
    r = rows(stem)
    assert len(r) == 3
    ratios = [float(x["ratio"]) for x in r]
    assert ratios[0] > ratios[1] > ratios[2]
    assert all(x["K"] and x["K_stderr"] for x in r)


def test_byte_identical(tmp_path):
    data = {"experiment": "rayleigh", "manifold": "hyperbolic", "N": 4, "poles": POLES4, "p": 2.5, "bumps": 2, "samples": 20_000, "seed": 5}
    out = []
    for k in range(2):
        stem = tmp_path / f"r{k}"
        assert cli.main(["run", write(tmp_path, f"c{k}.json", {**data, "output_path": str(stem)})]) == 0
        out.append((tmp_path / f"r{k}.csv").read_bytes())
    assert out[0] == out[1]


def test_yaml_config(tmp_path):
    stem = tmp_path / "b"
    path = tmp_path / "c.yaml"
    path.write_text(
        "experiment: bounds\nmanifold: hyperbolic\nN: 4\np: 2.5\n"
        f"poles: [[0.3, 0, 0, 0], [-0.3, 0, 0, 0]]\nsamples: 1000\noutput_path: {stem}\n"
    )
    assert cli.main(["run", str(path)]) == 0
    assert [r["experiment"] for r in rows(stem)][0] == "bounds/ch_domination"


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"p": 5}, "'p'"),
        ({"poles": [[0.5, 0, 0, 0]]}, "'poles'"),
        ({"poles": [[0.5, 0, 0], [0, 0, 0]]}, "'poles'"),
        ({"eps_list": [0.1, 0.2]}, "'eps_list'"),
        ({"manifold": "torus"}, "'manifold'"),
        ({"experiment": "fit"}, "'experiment'"),
        ({"colour": 1}, "'colour'"),
        ({"poles": [[1.5, 0, 0, 0], [0, 0, 0, 0]], "manifold": "hyperbolic"}, "'poles'"),
    ],
)
def test_rejections(tmp_path, capsys, patch, field):
    data = {"experiment": "sweep", "manifold": "hyperbolic", "N": 4, "poles": POLES4, "p": 2, "output_path": str(tmp_path / "x")}
    data.update(patch)
    assert cli.main(["run", write(tmp_path, "c.json", data)]) == 2
    assert field in capsys.readouterr().err


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text('{"experiment": "sweep",\n')
    assert cli.main(["run", str(path)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_numerical_failure(tmp_path, monkeypatch):
    def boom(cfg):
        raise QuadratureError("no strata")

    monkeypatch.setattr(cli, "run_experiment", boom)
    cfg = write(tmp_path, "c.json", {"experiment": "reduction", "N": 4, "poles": POLES4, "p": 2, "output_path": str(tmp_path / "x")})
    assert cli.main(["run", cfg]) == 3


def test_failed_check_exit_code(tmp_path):
    # the hyperbolic extremal has infinite energy, so the equality check fails
    stem = tmp_path / "m"
    data = {"experiment": "minimizer", "manifold": "hyperbolic", "N": 4, "p": 3, "poles": [[0.3, 0, 0, 0], [-0.3, 0, 0, 0]], "samples": 50_000, "output_path": str(stem)}
    assert cli.main(["run", write(tmp_path, "c.json", data)]) == 1
    assert rows(stem)[0]["pass"] == "false"


def test_number_format():
    assert cli._fmt(0.1) == "0.10000000000000001"
    assert float(cli._fmt(1 / 3)) == 1 / 3
    assert cli._fmt(None) == "" and cli._fmt(True) == "true"
