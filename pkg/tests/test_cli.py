import csv
import json

import pytest

from altrank.cli import main, parse_exact_int, parse_int_list


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def read_csv(path):
    with open(path, newline="") as fh:
        body = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(body))


# ---------------------------------------------------------------------------
# argument parsing helpers


def test_parse_exact_int_scientific():
    assert parse_exact_int("1e24") == 10**24
    assert parse_exact_int("2.5e7") == 25_000_000
    assert parse_exact_int("1_000_000") == 10**6
    assert parse_exact_int("-3e2") == -300
    assert parse_exact_int("+7") == 7
    assert parse_exact_int(42) == 42
    # no round trip through float: 17 digits survive
    assert parse_exact_int("1.2345678901234567e16") == 12345678901234567


def test_parse_exact_int_rejects():
    for bad in ("", "abc", "1.5", "1.23e1", "2.5e0", "1e-3"):
        with pytest.raises(ValueError):
            parse_exact_int(bad)


def test_parse_int_list():
    assert parse_int_list("5..8") == [5, 6, 7, 8]
    assert parse_int_list("10..10") == [10]
    assert parse_int_list("1, 2,3") == [1, 2, 3]
    assert parse_int_list("1e2,2e2") == [100, 200]
    assert parse_int_list([1, "2"]) == [1, 2]
    with pytest.raises(ValueError):
        parse_int_list("8..5")
    with pytest.raises(ValueError):
        parse_int_list(" , ")
    with pytest.raises(ValueError):
        parse_int_list("1e10..1e15")  # unit-step span, would explode


# ---------------------------------------------------------------------------
# exit codes and error cleanup


def test_unknown_flag_value_exits_2(tmp_path, capsys):
    rc = main(["sha-dist", "--out", str(tmp_path), "--samples", "abc"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_domain_error_exits_2_and_leaves_no_files(tmp_path, capsys):
    # n = 5 with r = 0 violates the parity constraint
    rc = main(
        ["sha-dist", "--out", str(tmp_path), "--n", "5", "--r", "0", "--samples", "10"]
    )
    assert rc == 2
    assert "error:" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_bad_config_file_exits_2(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("volume = 11\n")
    rc = main(["sha-dist", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 2
    assert "volume" in capsys.readouterr().err
    rc = main(["sha-dist", "--config", str(tmp_path / "missing.cfg")])
    assert rc == 2


# ---------------------------------------------------------------------------
# config precedence


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment line\nseed = 77\nsamples = 250\n")
    out = tmp_path / "out"
    rc = main(
        [
            "sha-dist",
            "--config",
            str(cfg),
            "--out",
            str(out),
            "--samples",
            "300",
            "--n",
            "2",
            "--x",
            "3",
        ]
    )
    assert rc == 0
    manifest = read_json(out / "sha_dist_manifest.json")
    assert manifest["seed"] == 77  # config file beats default
    assert manifest["config"]["samples"] == 300  # flag beats config file
    assert manifest["config"]["n"] == 2
    dist = read_json(out / "sha_dist.json")
    assert dist["total"] == 300


def test_print_config_writes_nothing(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    rc = main(["print-config"])
    assert rc == 0
    text = capsys.readouterr().out
    assert "seed" in text and "12345" in text
    assert list(tmp_path.iterdir()) == []


# ---------------------------------------------------------------------------
# command outputs


def test_predicted_table_command(tmp_path):
    rc = main(["predicted-table", "--out", str(tmp_path), "--h-list", "1e10,1e15"])
    assert rc == 0
    rows = read_csv(tmp_path / "predicted_table.csv")
    assert len(rows) == 2
    by_h = {int(r["h"]): r for r in rows}
    assert float(by_h[10**10]["rank0_pct"]) == pytest.approx(30.8, abs=0.1)
    assert float(by_h[10**15]["rank0_pct"]) == pytest.approx(38.1, abs=0.1)
    manifest = read_json(tmp_path / "predicted_table_manifest.json")
    for key in ("command", "claim", "version", "timestamp", "seed", "threads"):
        assert key in manifest
    assert "predicted_table.csv" in manifest["outputs"]


def test_count_command_census(tmp_path):
    rc = main(
        [
            "count",
            "--out",
            str(tmp_path),
            "--n",
            "3",
            "--r",
            "2",
            "--norm",
            "l2",
            "--bounds",
            "2..5",
        ]
    )
    assert rc == 0
    rows = read_csv(tmp_path / "counts.csv")
    got = {int(r["bound"]): int(r["count"]) for r in rows}
    assert got == {2: 6, 3: 32, 4: 80, 5: 178}
    fit = read_json(tmp_path / "counts_fit.json")
    assert fit["target_slope"] == 3.0
    assert abs(fit["slope"] - 3.0) < 0.4


def test_sha_dist_output_fields(tmp_path):
    rc = main(
        [
            "sha-dist",
            "--out",
            str(tmp_path),
            "--n",
            "2",
            "--x",
            "3",
            "--samples",
            "400",
            "--seed",
            "5",
        ]
    )
    assert rc == 0
    dist = read_json(tmp_path / "sha_dist.json")
    assert dist["total"] == 400
    assert sum(dist["counts"].values()) == 400
    assert 0.0 <= dist["tv_distance_truncated"] <= 1.0
    assert 0.0 < dist["reference_sum"] <= 1.0 + 1e-9
    assert dist["reference"]["2:[]"] == pytest.approx(0.4194224417951076, abs=1e-12)
    assert "reference_note" in dist


def test_cl_dist_runs_small(tmp_path):
    rc = main(
        [
            "cl-dist",
            "--out",
            str(tmp_path),
            "--n",
            "4",
            "--k",
            "6",
            "--samples",
            "300",
        ]
    )
    assert rc == 0
    dist = read_json(tmp_path / "cl_dist.json")
    assert dist["total"] == 300
    # reference column is the limiting law, not the finite-n probability
    assert dist["reference"]["2:[]"] == pytest.approx(0.2887880950866024, abs=1e-11)


def test_period_scan_command(tmp_path):
    rc = main(
        [
            "period-scan",
            "--out",
            str(tmp_path),
            "--h-min",
            "1e4",
            "--h-max",
            "1e6",
            "--samples",
            "120",
        ]
    )
    assert rc == 0
    rows = read_csv(tmp_path / "period_scan.csv")
    assert len(rows) == 120
    summary = read_json(tmp_path / "period_scan_summary.json")
    assert summary["samples"] == 120
    assert summary["normalized"]["min"] > 0


# ---------------------------------------------------------------------------
# determinism


def test_sha_dist_byte_identical_reruns(tmp_path):
    args = ["--n", "4", "--x", "5", "--samples", "500", "--seed", "31"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sha-dist", "--out", str(a)] + args) == 0
    assert main(["sha-dist", "--out", str(b)] + args) == 0
    assert (a / "sha_dist.json").read_bytes() == (b / "sha_dist.json").read_bytes()


def test_simulate_byte_identical_across_threads(tmp_path):
    args = [
        "--h-grid",
        "1e6,1e8,1e10",
        "--curves-per-band",
        "600",
        "--chunk",
        "200",
        "--seed",
        "99",
    ]
    a, b = tmp_path / "t1", tmp_path / "t2"
    assert main(["simulate", "--out", str(a), "--threads", "1"] + args) == 0
    assert main(["simulate", "--out", str(b), "--threads", "2"] + args) == 0
    survey_a = (a / "survey.csv").read_bytes()
    assert survey_a == (b / "survey.csv").read_bytes()
    assert b"#fit" in survey_a
    man_a = read_json(a / "survey_manifest.json")
    man_b = read_json(b / "survey_manifest.json")
    assert man_a["threads"] == 1 and man_b["threads"] == 2
    drop = {"timestamp", "threads", "config"}
    assert {k: v for k, v in man_a.items() if k not in drop} == {
        k: v for k, v in man_b.items() if k not in drop
    }


# ---------------------------------------------------------------------------
# verify suites


@pytest.mark.parametrize("suite", ["table", "lattice"])
def test_verify_suites_pass(tmp_path, capsys, suite):
    rc = main(["verify", suite, "--out", str(tmp_path), "--samples", "60"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "PASS" in out and "FAIL" not in out
    report = read_json(tmp_path / f"verify_{suite}.json")
    assert report["passed"] is True
    assert all(c["passed"] for c in report["checks"])


def test_verify_snf_thinned(tmp_path, capsys):
    rc = main(
        ["verify", "snf", "--out", str(tmp_path), "--stride", "4001", "--samples", "60"]
    )
    assert rc == 0
    report = read_json(tmp_path / "verify_snf.json")
    assert report["passed"] is True


def test_verify_period_suite(tmp_path, capsys):
    rc = main(["verify", "period", "--out", str(tmp_path)])
    assert rc == 0
    report = read_json(tmp_path / "verify_period.json")
    names = {c["name"] for c in report["checks"]}
    assert names == {
        "agm-vs-quadrature",
        "scaling-covariance",
        "normalized-period-band",
    }
    assert report["passed"] is True
