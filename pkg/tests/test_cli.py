import io
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest

from pot_tailrisk.catalog import ExclusionRule, exclude, exceedances, read_catalog, tail_count
from pot_tailrisk.cli import DPL_COLUMNS, MRL_COLUMNS, QQ_COLUMNS, SEED_ENV, SWEEP_COLUMNS, parse_grid, run
from pot_tailrisk.diagnostics import mrl_curve
from pot_tailrisk.fitting import fit_gpd
from pot_tailrisk.rare_event import EventProbabilityInput, event_probability

SCHEMA = json.loads(resources.files("pot_tailrisk").joinpath("schemas/report.schema.json").read_text())


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def read_tsv(text):
    lines = text.rstrip("\n").split("\n")
    header = lines[0].split("\t")
    return header, [line.split("\t") for line in lines[1:]]


@pytest.fixture
def small_file(tmp_path):
    path = tmp_path / "small.txt"
    path.write_text("11\n21\n")
    return path


def test_parse_grid():
    assert parse_grid("10:100:45") == [10.0, 55.0, 100.0]
    assert parse_grid("0.5:0.7:0.1") == [0.5, 0.6, 0.7]


def test_fit_report_without_bootstrap(synthetic_file):
    code, out, err = cli("fit", "--input", synthetic_file, "--format", "col2", "--B", 0)
    assert code == 0, err
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    (row,) = report["rows"]
    assert "intervals" not in row
    cat = exclude(read_catalog(str(synthetic_file), "col2"), ExclusionRule(tag="9/11"))
    fit = fit_gpd(exceedances(cat, 10), 10)
    assert row["xi"] == fit.xi and row["sigma"] == fit.sigma
    assert report["n_events"] == cat.n
    assert "[excluded tag=9/11 x1]" in report["source"]
    assert report["config"]["seed"] is None


def test_fit_with_bootstrap_validates(synthetic_file):
    code, out, _ = cli("fit", "--input", synthetic_file, "--format", "col2", "--B", 8, "--seed", 3)
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    row = report["rows"][0]
    assert set(row["intervals"]) == {"xi", "sigma", "reduction_stat", "prob_event"}
    lo, hi = row["intervals"]["xi"]
    assert lo <= hi
    assert report["config"]["generator"] == "philox4x64-10/splitmix64-v1"


def test_insufficient_tail_is_data_error(synthetic_file):
    code, out, err = cli("fit", "--input", synthetic_file, "--format", "col2", "--mu", 5000, "--B", 0)
    assert code == 2
    assert out == ""
    assert "error [threshold]" in err and "exceed threshold 5000" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["fit", "--bogus"],
        ["frobnicate"],
        ["sweep", "--input", "x", "--grid", "10:5:1"],
        ["fit", "--input", "x", "--level", "1.5"],
        ["fit", "--input", "x", "--jobs", "0"],
        ["mrl", "--input", "x", "--emit", "svg"],
    ],
)
def test_usage_errors(argv):
    code, _, _ = cli(*argv)
    assert code == 64


def test_parser_exit_codes(capsys):
    assert cli("fit")[0] == 64  # missing --input
    assert cli("--version")[0] == 0
    assert "pot-tailrisk" in capsys.readouterr().out


def test_data_errors(tmp_path):
    missing = tmp_path / "missing.txt"
    assert cli("fit", "--input", missing, "--B", 0)[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("5\n0\n")
    code, _, err = cli("fit", "--input", bad, "--B", 0)
    assert code == 2 and "line 2" in err and "error [load]" in err
    dup = tmp_path / "dup.txt"
    dup.write_text("1\n5\n5\n")
    assert cli("fit", "--input", dup, "--B", 0, "--exclude-severity", 5)[0] == 2


def test_default_tag_exclusion_warns_on_untagged_input(small_file):
    code, _, err = cli("mrl", "--input", small_file, "--grid", "1:1:1")
    assert code == 0
    assert "warning" in err and "tag=9/11" in err


def test_mrl_single_row_and_round_trip(small_file, synthetic_file, synthetic):
    code, out, _ = cli("mrl", "--input", small_file, "--grid", "1:1:1", "--no-exclude")
    assert code == 0
    assert out == "threshold\tmean_excess\tlo\thi\tn_exceed\n" + out.split("\n", 1)[1]
    header, rows = read_tsv(out)
    assert header == MRL_COLUMNS
    assert rows[0][:2] == ["1.0", "15.0"]

    code, out, _ = cli("mrl", "--input", synthetic_file, "--format", "col2", "--grid", "1:50:7")
    header, rows = read_tsv(out)
    curve = mrl_curve(synthetic, parse_grid("1:50:7"))
    np.testing.assert_array_equal([float(r[1]) for r in rows], curve.mean_excess)
    np.testing.assert_array_equal([float(r[2]) for r in rows], curve.lo)
    assert [int(r[4]) for r in rows] == curve.n_exceed.tolist()


def test_prob_matches_library_exactly(synthetic_file):
    code, out, _ = cli("prob", "--input", synthetic_file, "--format", "col2", "--mu", 20, "--y", 1000)
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, SCHEMA)
    cat = exclude(read_catalog(str(synthetic_file), "col2"), ExclusionRule(tag="9/11"))
    fit = fit_gpd(exceedances(cat, 20), 20)
    frac = tail_count(cat, 20)[1]
    assert report["prob_event"] == event_probability(EventProbabilityInput(1000, cat.n, 1 - frac, fit))
    assert report["n"] == cat.n
    code, out, _ = cli("prob", "--input", synthetic_file, "--format", "col2", "--mu", 20, "--y", 10)
    assert code == 2


def test_qq_tsv(synthetic_file):
    code, out, _ = cli("qq", "--input", synthetic_file, "--format", "col2", "--mu", 30)
    assert code == 0
    header, rows = read_tsv(out)
    assert header == QQ_COLUMNS
    model = [float(r[0]) for r in rows]
    assert np.all(np.diff(model) > 0)


def test_sweep_outputs_are_byte_identical(synthetic_file, tmp_path):
    args = ["sweep", "--input", synthetic_file, "--format", "col2", "--grid", "10:30:20", "--B", 6, "--seed", 11,
            "--emit", "tsv", "--emit", "json", "--emit", "svg"]
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert cli(*args, "--out", a)[0] == 0
    assert cli(*args, "--out", b)[0] == 0
    assert cli(*args, "--out", c, "--jobs", 2)[0] == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["config.json", "prob.svg", "report.json", "sweep.tsv", "xi.svg"]
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()
        if name != "config.json":
            assert (a / name).read_bytes() == (c / name).read_bytes()
    assert json.loads((c / "config.json").read_text())["jobs"] == 2
    jsonschema.validate(json.loads((a / "config.json").read_text()), SCHEMA)
    jsonschema.validate(json.loads((a / "report.json").read_text()), SCHEMA)
    header, rows = read_tsv((a / "sweep.tsv").read_text())
    assert header == SWEEP_COLUMNS and len(rows) == 2
    assert (a / "xi.svg").read_text().startswith("<svg")


def test_single_threshold_sweep_equals_fit(synthetic_file, tmp_path):
    common = ["--input", synthetic_file, "--format", "col2", "--B", 5, "--seed", 2]
    fit = json.loads(cli("fit", "--mu", 25, *common)[1])
    sweep = json.loads(cli("sweep", "--grid", "25:25:1", "--emit", "json", *common)[1])
    assert sweep["rows"] == fit["rows"]
    assert cli("fit", "--mu", 25, "--emit", "json", "--emit", "tsv", "--out", tmp_path / "f", *common)[0] == 0
    assert cli("sweep", "--grid", "25:25:1", "--out", tmp_path / "s", *common)[0] == 0
    assert sorted(p.name for p in (tmp_path / "f").iterdir()) == ["config.json", "report.json", "sweep.tsv"]
    assert (tmp_path / "f" / "sweep.tsv").read_bytes() == (tmp_path / "s" / "sweep.tsv").read_bytes()


def test_seed_from_environment(synthetic_file, monkeypatch):
    common = ["fit", "--input", synthetic_file, "--format", "col2", "--B", 4, "--mu", 40]
    flag = json.loads(cli(*common, "--seed", 77)[1])
    monkeypatch.setenv(SEED_ENV, "77")
    env = json.loads(cli(*common)[1])
    assert env["rows"] == flag["rows"]
    assert env["config"]["seed_source"] == "env"
    other = json.loads(cli(*common, "--seed", 78)[1])
    assert other["config"]["seed_source"] == "flag"
    assert other["rows"][0]["intervals"] != env["rows"][0]["intervals"]


def test_strict_needs_seed_and_time_seed_warns(synthetic_file, monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)
    common = ["fit", "--input", synthetic_file, "--format", "col2", "--B", 2, "--mu", 40]
    code, _, err = cli(*common, "--strict")
    assert code == 64 and "--seed" in err
    code, out, err = cli(*common)
    assert code == 0
    assert "time-based seed" in err
    assert json.loads(out)["config"]["seed_source"] == "time"
    # no randomness, no seed needed even in strict mode
    assert cli("fit", "--input", synthetic_file, "--format", "col2", "--B", 0, "--strict")[0] == 0


def test_dpl_sweep(synthetic_file):
    code, out, _ = cli("sweep", "--model", "dpl", "--input", synthetic_file, "--format", "col2",
                       "--grid", "10:20:10", "--B", 4, "--seed", 1)
    assert code == 0
    header, rows = read_tsv(out)
    assert header == DPL_COLUMNS
    assert [r[0] for r in rows] == ["10", "20"]
    assert all(1 < float(r[3]) < 10 for r in rows)


def test_jitter_is_seeded(synthetic_file):
    common = ["fit", "--input", synthetic_file, "--format", "col2", "--B", 0, "--mu", 40]
    a = json.loads(cli(*common, "--jitter", "--seed", 5)[1])
    b = json.loads(cli(*common, "--jitter", "--seed", 5)[1])
    plain = json.loads(cli(*common)[1])
    assert a["rows"] == b["rows"]
    assert a["rows"][0]["xi"] != plain["rows"][0]["xi"]
    assert "[jittered]" in a["source"]


def test_console_script_entry_point(small_file):
    proc = subprocess.run([sys.executable, "-m", "pot_tailrisk", "mrl", "--input", str(small_file), "--grid",
                           "1:1:1", "--no-exclude"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("1.0\t15.0\t")
