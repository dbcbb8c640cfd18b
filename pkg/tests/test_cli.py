import csv
import json

import pytest

from graphda import __version__
from graphda.cli import UsageError, main, parse_int_list

FAST = ["--n-per-domain", "40", "--K", "5", "--R", "3", "--iterations", "1", "-q"]


@pytest.fixture(autouse=True)
def serial(monkeypatch):
    monkeypatch.setenv("GRAPHDA_THREADS", "1")


def _run_json(tmp_path, *args, name="out.json"):
    out = tmp_path / name
    assert main([*args, "--out", str(out)]) == 0
    return out.read_bytes(), json.loads(out.read_text())


class TestSeeds:
    def test_ranges(self):
        assert parse_int_list("1..4,7") == [1, 2, 3, 4, 7]
        assert parse_int_list("3") == [3]
        assert parse_int_list("1,,2") == [1, 2]

    @pytest.mark.parametrize("bad", ["", "a", "4..2"])
    def test_bad(self, bad):
        with pytest.raises((ValueError, UsageError)):
            parse_int_list(bad)


def test_gen_data_is_byte_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["gen-data", "--synthetic", "--seed", "3", "--n-labels", "10",
                     "--out", str(tmp_path / d), "-q"]) == 0
    for name in ("source_features.csv", "target_labels.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_record_schema_and_determinism(tmp_path):
    args = ["run", "--method", "sda-dagl", "--synthetic", "--seeds", "1..2", "--n-labels", "8",
            *FAST]
    raw1, rec = _run_json(tmp_path, *args, name="a.json")
    raw2, _ = _run_json(tmp_path, *args, name="b.json")
    assert raw1 == raw2
    assert rec["schema_version"] == 1 and rec["tool_version"] == __version__
    assert rec["method"] == "sda-dagl" and rec["config"]["K"] == 5
    assert [s["seed"] for s in rec["seeds"]] == [1, 2]
    assert rec["aggregate"]["n"] == 2
    assert len(rec["seeds"][0]["trace"]) == 1
    assert "timings" not in rec and len(rec["dataset"]["sha256"]) == 64


def test_run_with_timings(tmp_path):
    _, rec = _run_json(tmp_path, "run", "--method", "sda", "--synthetic", "--seeds", "1",
                       "--timings", *FAST)
    assert rec["timings"]["total_seconds"] >= 0


def test_run_on_csv_directory(tmp_path):
    data = tmp_path / "data"
    assert main(["gen-data", "--synthetic", "--n-per-domain", "40", "--out", str(data), "-q"]) == 0
    _, rec = _run_json(tmp_path, "run", "--method", "sda", "--data", str(data), "--seeds", "1",
                       "--n-labels", "6", "--K", "5", "--R", "3", "-q")
    assert rec["dataset"]["kind"] == "csv"
    assert rec["seeds"][0]["n_eval"] == 34


def test_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--axis", "K", "--values", "4,5", "--methods", "sda",
                 "--synthetic", "--seeds", "1..2", "--n-labels", "8", "--out", str(out),
                 *[a for a in FAST if a not in ("--K", "5")]]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [(r["value"], r["method"], r["n_seeds"]) for r in rows] == [("4", "sda", "2"),
                                                                      ("5", "sda", "2")]


def test_bounds_passes(tmp_path):
    _, rec = _run_json(tmp_path, "bounds", "--family", "scale", "--n", "60", "-q")
    assert rec["manifold"]["A"] == pytest.approx(0.5)
    assert rec["report"]["all_passed"] is True


@pytest.mark.parametrize("argv", [
    ["run", "--method", "bogus", "--synthetic"],
    ["run", "--method", "sda", "--synthetic", "--seeds", "3..1"],
    ["sweep", "--axis", "K", "--values", "", "--synthetic"],
    ["sweep", "--axis", "K", "--values", "5", "--methods", "nope", "--synthetic"],
    ["run", "--method", "sda", "--synthetic", "--mu", "-1"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as info:
        code = main(argv)
        raise SystemExit(code)
    assert info.value.code == 2


def test_missing_data_exits_3(tmp_path):
    assert main(["run", "--method", "sda", "--data", str(tmp_path / "none"), "-q"]) == 3


def test_malformed_csv_exits_3(tmp_path):
    data = tmp_path / "data"
    main(["gen-data", "--synthetic", "--n-per-domain", "20", "--out", str(data), "-q"])
    (data / "target_features.csv").write_text("1,2,x\n")
    assert main(["run", "--method", "sda", "--data", str(data), "--n-labels", "2", "-q"]) == 3


def test_solver_error_exits_4():
    # pruning at 0.999 strands unlabeled nodes
    assert main(["run", "--method", "sda-dagl", "--synthetic", "--n-per-domain", "60",
                 "--seeds", "5", "--n-labels", "8", "--K", "6", "--R", "4", "--w-min", "0.999",
                 "--d-min", "0.05", "--mu-s", "100", "--mu-t", "100", "--iterations", "1",
                 "-q"]) == 4
