import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from bsmix.cli import main
from bsmix.model import Theta
from bsmix.simulation import generate_dataset, generate_vaccine_like, replicate_seed

GOLDEN = json.loads((Path(__file__).parent / "golden" / "fit_report_schema.json").read_text())
TYPES = {"number": (int, float), "int": int, "bool": bool, "str": str}


def check_schema(rep):
    assert rep["schema_version"] == GOLDEN["schema_version"]
    assert set(GOLDEN["required"]) <= set(rep) <= set(GOLDEN["required"]) | set(GOLDEN["optional"])
    for key, kind in {**GOLDEN["required"], **GOLDEN["optional"]}.items():
        if key not in rep:
            continue
        if kind.startswith("list["):
            inner = TYPES[kind[5:-1]]
            assert all(v is None or isinstance(v, inner) for v in rep[key]), key
        else:
            assert isinstance(rep[key], TYPES[kind]), key


@pytest.fixture(scope="module")
def vaccine_csv(tmp_path_factory):
    d = generate_vaccine_like(330, seed=1)
    raw = np.where(d.is_censored, 0.1, np.exp(d.y))
    path = tmp_path_factory.mktemp("data") / "vaccine.csv"
    with open(path, "w") as fh:
        fh.write("y,EZ,HI,FEM\n")
        for i in range(d.n):
            fh.write(f"{raw[i]:.10g},{d.X1[i, 1]:g},{d.X1[i, 2]:g},{d.X1[i, 3]:g}\n")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fit_report_schema(capsys, vaccine_csv):
    code, out, _ = run(capsys, "fit", "--data", vaccine_csv, "--ldl", "0.1")
    rep = json.loads(out)
    assert code == 0
    check_schema(rep)
    assert rep["model"] == "bernoulli-bs"
    assert rep["n_parameters"] == 1 + 4 + 4 == len(rep["parameters"]) == len(rep["se"])
    assert rep["parameters"][:2] == ["alpha", "beta1[const]"]
    assert rep["aic"] == pytest.approx(-2 * rep["loglik"] + 2 * 9)


def test_fit_tobit_bs_parameter_count(capsys, vaccine_csv):
    code, out, _ = run(capsys, "fit", "--data", vaccine_csv, "--ldl", "0.1", "--model", "tobit-bs")
    rep = json.loads(out)
    check_schema(rep)
    assert code == 0 and rep["n_parameters"] == 1 + 4
    assert rep["parameters"][0] == "alpha"


def test_fit_tobit_t_reports_df(capsys, vaccine_csv):
    _, out, _ = run(capsys, "fit", "--data", vaccine_csv, "--ldl", "0.1", "--model", "tobit-t")
    rep = json.loads(out)
    check_schema(rep)
    assert rep["df"] in (3, 4, 5, 7, 10, 15, 30)
    assert rep["n_parameters"] == 1 + 4 + 1


def test_fit_column_selection(capsys, vaccine_csv):
    _, out, _ = run(capsys, "fit", "--data", vaccine_csv, "--ldl", "0.1", "--x1", "FEM", "--x2", "EZ")
    rep = json.loads(out)
    assert rep["parameters"] == ["alpha", "beta1[const]", "beta1[FEM]", "beta2[const]", "beta2[EZ]"]


def test_fit_tsv(capsys, vaccine_csv):
    code, out, _ = run(capsys, "fit", "--data", vaccine_csv, "--ldl", "0.1", "--format", "tsv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "parameter\testimate\tse\tz\tp\tstars" and len(lines) == 10


def test_describe(capsys, vaccine_csv):
    code, out, _ = run(capsys, "describe", "--data", vaccine_csv, "--ldl", "0.1")
    s = json.loads(out)
    assert code == 0 and s["n"] == 330 and s["min"] == 0.1
    assert 0 < s["censored_fraction"] < 1


@pytest.mark.parametrize(
    "body,needle",
    [("y,x\n1,2\n3\n", "row 3"), ("y,x\n1,a\n", "column 'x'"), ("", "empty"), ("y,x\n", "no data")],
)
def test_malformed_csv_exit_1(capsys, tmp_path, body, needle):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    code, out, err = run(capsys, "fit", "--data", str(p), "--ldl", "0.1")
    assert code == 1 and out == ""
    assert needle in err


def test_missing_column_and_file(capsys, vaccine_csv, tmp_path):
    code, _, err = run(capsys, "fit", "--data", vaccine_csv, "--ldl", "0.1", "--x1", "nope")
    assert code == 1 and "nope" in err
    code, _, err = run(capsys, "fit", "--data", str(tmp_path / "missing.csv"), "--ldl", "0.1")
    assert code == 1


def test_residuals(capsys, vaccine_csv):
    code, out, err = run(capsys, "residuals", "--data", vaccine_csv, "--ldl", "0.1")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "index\tresidual\tis_censored\tcapped" and len(lines) == 331
    r = np.array([float(l.split("\t")[1]) for l in lines[1:]])
    assert 0.9 <= r.mean() <= 1.1
    assert "mean=" in err


def test_envelope_bytes_identical(capsys, vaccine_csv, tmp_path):
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    for path in (a, b):
        code, _, err = run(capsys, "envelope", "--data", vaccine_csv, "--ldl", "0.1", "--B", "100",
                           "--seed", "4", "--output", str(path))
        assert code == 0 and "outside=" in err
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 331


def test_simulate_bytes_identical(capsys, tmp_path):
    outs = []
    for workers in ("1", "2"):
        path = tmp_path / f"sim{workers}.tsv"
        proc = subprocess.run(
            [sys.executable, "-m", "bsmix.cli", "simulate", "--alphas", "0.5", "--ns", "100",
             "--replications", "8", "--output", str(path)],
            env={"BSMIX_WORKERS": workers, "PATH": ""}, capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert len(outs[0].decode().splitlines()) == 1 + 5


def test_x2_ignored_for_tobit_warns(capsys, vaccine_csv):
    code, _, err = run(capsys, "fit", "--data", vaccine_csv, "--ldl", "0.1", "--model", "tobit-ln", "--x2", "EZ")
    assert code == 0 and "--x2 is ignored" in err


def test_nonconverged_fit_exit_2(capsys, tmp_path):
    d = generate_dataset(Theta(1.0, (0.2, 0.5), (1.0, 2.0)), 300, replicate_seed(5, 1.0, 300, 11))
    p = tmp_path / "boundary.csv"
    p.write_text("y,x\n" + "".join(f"{float(y)!r},{float(x)!r}\n" for y, x in zip(d.y, d.X1[:, 1])))
    code, out, _ = run(capsys, "fit", "--data", str(p), "--ldl", "0", "--log-scale")
    rep = json.loads(out)
    assert code == 2 and rep["converged"] is False
    assert all(v is None for v in rep["se"])
