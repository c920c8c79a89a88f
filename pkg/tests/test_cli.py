import json

import numpy as np
import pytest

from synthaudit.cli import EXIT_ERROR, EXIT_GATE, EXIT_OK, EXIT_USAGE, main
from synthaudit.ingest import write_csv
from synthaudit.report import EvalReport, deterministic_view, fmt
from synthaudit.table import Table


def _table(n, seed, shift=0.0):
    r = np.random.default_rng(seed)
    y = r.integers(0, 2, size=n)
    return Table.from_columns({
        "dur": r.exponential(2.0, size=n) + shift + y,
        "bytes": r.normal(100, 10, size=n) + 10 * shift,
        "pkts": r.normal(5, 1, size=n) + 2 * y,
        "proto": r.choice(["tcp", "udp"], size=n).tolist(),
        "Label": np.array(["BENIGN", "DDoS"])[y].tolist(),
    }, label="Label")


@pytest.fixture
def files(tmp_path):
    real = tmp_path / "real.csv"
    write_csv(_table(400, 1), real)
    shifted = tmp_path / "shifted.csv"
    write_csv(_table(400, 2, shift=50.0), shifted)
    return real, shifted, tmp_path


def _run(args, out):
    code = main(args + ["--output-dir", str(out)])
    path = out / "report.json"
    return code, (json.loads(path.read_text()) if path.exists() else None)


def test_full_copy_run(files):
    real, _, tmp = files
    code, rep = _run(["full", "--real", str(real), "--synth", str(real), "--label", "Label",
                      "--seed", "7", "--permutations", "99"], tmp / "out")
    assert code == EXIT_OK and rep["exit_code"] == 0
    s = rep["sections"]
    assert s["gate"]["passed"]
    assert list(s) == ["quality", "diagnostic", "gate", "distinguishability", "utility",
                       "divergences", "stat_tests", "privacy"]
    for r in s["distinguishability"]:
        assert 0.4 <= r["roc_auc"] <= 0.6
    assert s["privacy"]["overfit_flag"]
    assert (tmp / "out" / "report.md").exists()


def test_full_gate_failure_and_force(files):
    real, shifted, tmp = files
    base = ["full", "--real", str(real), "--synth", str(shifted), "--label", "Label",
            "--permutations", "19"]
    code, rep = _run(base, tmp / "a")
    assert code == EXIT_GATE and rep["exit_code"] == EXIT_GATE
    assert not rep["sections"]["gate"]["passed"]
    assert "distinguishability" not in rep["sections"]
    code, rep = _run(base + ["--force"], tmp / "b")
    assert code == EXIT_OK
    assert rep["sections"]["distinguishability"][0]["roc_auc"] >= 0.99


def test_stattest_mmd(files):
    real, shifted, tmp = files
    code, rep = _run(["stattest", "--real", str(real), "--synth", str(shifted), "--label",
                      "Label", "--test", "mmd", "--permutations", "500", "--alpha", "0.05"],
                     tmp / "o")
    assert code == EXIT_OK
    (res,) = rep["sections"]["stat_tests"]["results"]
    assert res["statistic_name"] == "mmd_rbf"
    assert res["permutations"] == 500 and res["alpha"] == 0.05
    assert res["p_value"] == 1 / 501


@pytest.mark.parametrize("cmd,section", [("quality", "quality"), ("diagnose", "diagnostic"),
                                         ("divergence", "divergences"),
                                         ("privacy", "privacy"), ("utility", "utility")])
def test_subcommands(files, cmd, section):
    real, shifted, tmp = files
    code, rep = _run([cmd, "--real", str(real), "--synth", str(shifted), "--label", "Label"],
                     tmp / cmd)
    assert code == EXIT_OK
    assert list(rep["sections"]) == [section]


def test_distinguish_logistic(files):
    real, shifted, tmp = files
    code, rep = _run(["distinguish", "--real", str(real), "--synth", str(shifted), "--label",
                      "Label", "--classifier", "logistic"], tmp / "d")
    assert code == EXIT_OK
    assert [r["classifier"] for r in rep["sections"]["distinguishability"]] == ["logistic"]


def test_unknown_flag(files, capsys):
    real, _, tmp = files
    assert main(["quality", "--real", str(real), "--synth", str(real), "--bogus"]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err
    assert main(["nonsense"]) == EXIT_USAGE


def test_missing_file(files):
    _, _, tmp = files
    code = main(["quality", "--real", str(tmp / "nope.csv"), "--synth", str(tmp / "nope.csv"),
                 "--output-dir", str(tmp / "x")])
    assert code == EXIT_ERROR


def _strip(path):
    d = json.loads(path.read_text())
    d.pop("timestamps")
    return json.dumps(d, indent=2)


def test_determinism(files):
    real, shifted, tmp = files
    args = ["full", "--real", str(real), "--synth", str(shifted), "--label", "Label",
            "--seed", "3", "--permutations", "49", "--force"]
    main(args + ["--output-dir", str(tmp / "r1")])
    main(args + ["--output-dir", str(tmp / "r2")])
    assert _strip(tmp / "r1" / "report.json") == _strip(tmp / "r2" / "report.json")
    assert (tmp / "r1" / "report.md").read_text() == (tmp / "r2" / "report.md").read_text()


def test_markdown_matches_json(files):
    real, shifted, tmp = files
    _, rep = _run(["full", "--real", str(real), "--synth", str(shifted), "--label", "Label",
                   "--permutations", "49", "--force"], tmp / "m")
    md = (tmp / "m" / "report.md").read_text()
    s = rep["sections"]
    values = [s["quality"]["overall"], s["privacy"]["train_nndr"], s["privacy"]["test_nndr"],
              s["divergences"]["jensen_shannon"], s["divergences"]["hellinger"]]
    values += [r["p_value"] for r in s["stat_tests"]["results"]]
    values += [r["observed"] for r in s["stat_tests"]["results"]]
    values += [r["roc_auc"] for r in s["distinguishability"]]
    for v in values:
        assert f"| {fmt(v)} |" in md


def test_report_roundtrip(files):
    real, _, tmp = files
    _run(["quality", "--real", str(real), "--synth", str(real), "--label", "Label"], tmp / "q")
    text = (tmp / "q" / "report.json").read_text()
    rep = EvalReport.from_json(text)
    assert rep.to_json() == text
    assert "timestamps" not in deterministic_view(rep.to_dict())


@pytest.mark.parametrize("generator", ["gmm", "wgan_gp", "fgan_h2", "conditional"])
def test_fitgen_and_sample(files, generator):
    real, _, tmp = files
    model = tmp / f"{generator}.json"
    code, rep = _run(["fitgen", "--real", str(real), "--label", "Label", "--generator",
                      generator, "--epochs", "1", "--model", str(model)], tmp / generator)
    assert code == EXIT_OK and model.exists()
    assert rep["sections"]["generator"]["generator"] == generator
    out = tmp / f"{generator}.csv"
    code, rep = _run(["sample", "--model", str(model), "--n", "40", "--out", str(out)],
                     tmp / f"{generator}-s")
    assert code == EXIT_OK
    assert len(out.read_text().splitlines()) == 41
    assert rep["sections"]["sample"]["rows"] == 40


def test_fmt():
    assert fmt(0.123456789) == "0.123457"
    assert fmt(True) == "yes" and fmt(None) == "n/a"
    assert fmt("a|b") == "a\\|b"
