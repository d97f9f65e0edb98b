"""End-to-end command line coverage: exit codes, JSON shapes, file chains."""

import csv
import json

import pytest

from cantorlab import cli


def run(argv, capsys):
    rc = cli.main([str(a) for a in argv])
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def run_json(argv, capsys):
    rc, out, err = run(argv, capsys)
    assert rc == 0, err
    return json.loads(out)


@pytest.fixture(scope="module")
def state_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "state.json"
    rc = cli.main(
        ["build", "--base", "pow:1/4:1", "--eps", "1/10", "--sset", "even",
         "--out", str(path)]
    )
    assert rc == 0
    return path


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------


def test_computation_failure_exits_2(capsys):
    rc, out, err = run(["solve", "--t", "8", "--max-iter", "1"], capsys)
    assert rc == 2
    diag = json.loads(err)
    assert diag["error"] == "NoConvergence"
    assert diag["max_iter"] == 1
    assert diag["best_residual"] > 0


def test_search_exhausted_exits_2(capsys):
    rc, out, err = run(
        ["build", "--base", "const:2", "--eps", "1/10", "--horizon", "100"], capsys
    )
    assert rc == 2
    diag = json.loads(err)
    assert diag["error"] == "SearchExhausted"
    assert "growth threshold 18" in diag["message"]
    assert diag["search_cap"] > 0


def test_validation_exits_1(capsys):
    rc, _, err = run(["coeffs", "--t", "4", "--precision", "32"], capsys)
    assert rc == 1 and "at least 64 bits" in err
    rc, _, err = run(["sequences", "--spec", "pow:abc:1", "--values", "1:2"], capsys)
    assert rc == 1 and err.startswith("error:")
    rc, _, err = run(["analyze", "--checkpoints", "10"], capsys)
    assert rc == 1 and "--digits" in err


def test_usage_errors_exit_1(capsys):
    assert run(["coeffs"], capsys)[0] == 1  # missing required --t
    assert run(["nosuchcommand"], capsys)[0] == 1


def test_help_exits_0(capsys):
    assert run(["--help"], capsys)[0] == 0
    assert run(["solve", "--help"], capsys)[0] == 0


def test_generate_requires_out(state_file, capsys):
    rc, _, err = run(
        ["generate", "--state", state_file, "--seed", "s", "--count", "10"], capsys
    )
    assert rc == 1 and "--out" in err


# ---------------------------------------------------------------------------
# single-command output shapes
# ---------------------------------------------------------------------------


def test_solve_json(capsys):
    d = run_json(["solve", "--t", "3"], capsys)
    assert d["converged"] and d["in_region"] and d["t"] == 3
    assert d["c"][0] == pytest.approx(3.296630262886539, abs=1e-12)
    assert abs(d["c2_polynomial"]) < 1e-9


def test_scan_json(capsys):
    d = run_json(["scan", "--t-min", "2", "--t-max", "5"], capsys)
    assert d["failures"] == 0
    assert [s["t"] for s in d["solutions"]] == [2, 3, 4, 5]
    assert all(s["converged"] for s in d["solutions"])


def test_coeffs_json(capsys):
    d = run_json(
        ["coeffs", "--t", "4", "--eps", "1/2", "--sset", "even", "--all-k",
         "--show-values", "--ap1", "2:1", "--ap2", "2:2:1"],
        capsys,
    )
    assert d["values"] == ["6", "2/3", "3/2", "2/3"]
    assert d["orders"]["1"]["window_sum"] == "53/6"
    assert d["orders"]["2"]["window_sum"] == "6"
    assert all(o["match"] for o in d["orders"].values())
    assert d["ap1"] == "5" and d["ap2"] == "9"


def test_sequences_values_and_spec(capsys):
    rc, out, _ = run(
        ["sequences", "--spec", "pow:1/4:1", "--values", "1:3", "--print-spec"], capsys
    )
    assert rc == 0
    lines = out.strip().splitlines()
    assert lines[:3] == ["1\t3", "2\t3", "3\t3"]
    assert json.loads(lines[3]) == {"spec": "pow:1/4:1"}


def test_sequences_classify(capsys):
    d = run_json(["sequences", "--spec", "pow:1/4:1", "--classify", "500"], capsys)
    c = d["classify"]
    assert c["horizon"] == 500 and c["monotone_ok"]
    assert set(c["partial_sums"]) == {"1", "2", "3"}


def test_sequences_named_composition(capsys):
    rc, out, _ = run(["sequences", "--named", "composition", "--values", "1:2"], capsys)
    assert rc == 0
    assert out.splitlines()[0] == "1\t6"


def test_markov_json(capsys):
    d = run_json(
        ["markov", "--b", "2", "--k", "1", "--n", "2", "--matrix", "--entropy",
         "--check-stationary", "--word", "0,0"],
        capsys,
    )
    assert d["matrix"]["0"] == {"0": "3/4", "1": "1/4"}
    assert d["uniform_stationary"] is True
    assert d["entropy_nats"] == pytest.approx(0.5623351446188083, abs=1e-12)
    assert d["cylinder"] == "3/8"


def test_markov_sample_blocks(tmp_path, capsys):
    digits_file = tmp_path / "mk.txt"
    d = run_json(
        ["markov", "--b", "2", "--k", "1", "--n", "2", "--sample", "400",
         "--seed", "mk", "--blocks", "0;0-0", "--digits-out", digits_file],
        capsys,
    )
    sb = d["sample_blocks"]
    assert sb["0"]["measure"] == 0.5
    assert sb["0-0"]["measure"] == 0.375
    assert abs(sb["0"]["count"] - 200) <= 5 * sb["0"]["sigma_heuristic"]
    assert digits_file.read_text().startswith("CANTORDIGITS 1")


def test_moran_json(capsys):
    d = run_json(
        ["moran", "--n", "2", "--c", "1/3", "--stages", "20",
         "--checkpoints", "10,20"],
        capsys,
    )
    assert d["upper_final"] == pytest.approx(0.6309297535714574, abs=1e-12)
    assert d["lower_final"] < d["upper_final"]
    assert [r["k"] for r in d["rows"]] == [10, 20]
    assert "finite-stage" in d["caveat"]


def test_moran_json_spec_file(tmp_path, capsys):
    spec = tmp_path / "moran.json"
    spec.write_text(json.dumps({"n": [2, 3], "c": ["1/3", "1/4"]}))
    d = run_json(["moran", "--json-spec", spec, "--stages", "12"], capsys)
    assert 0 < d["lower_final"] < d["upper_final"] < 1


def test_discrepancy_vdc(tmp_path, capsys):
    csv_file = tmp_path / "disc.csv"
    d = run_json(["discrepancy", "--vdc", "1000", "--csv-out", csv_file], capsys)
    assert d["star_discrepancy"] == "157/64000"
    assert d["star_discrepancy_float"] == 0.002453125
    rows = list(csv.DictReader(csv_file.open()))
    assert rows[0]["kind"] == "DISC" and rows[0]["ratio"] == "0.002453125"


def test_discrepancy_points_file(tmp_path, capsys):
    pts = tmp_path / "pts.txt"
    pts.write_text("1/10\n3/10\n5/10\n7/10\n9/10\n")
    d = run_json(["discrepancy", "--points", pts], capsys)
    assert d["star_discrepancy"] == "1/10"


# ---------------------------------------------------------------------------
# schedule chain: build -> generate -> windows -> analyze
# ---------------------------------------------------------------------------


def test_build_writes_state(state_file):
    obj = json.loads(state_file.read_text())
    assert obj["base_spec"] == "pow:1/4:1"
    assert [s["kappa"] for s in obj["stages"]] == [16384, 252451]


def test_generate_is_deterministic(state_file, tmp_path, capsys):
    a, b, c = (tmp_path / x for x in ("a.txt", "b.txt", "c.txt"))
    for path, seed in ((a, "s1"), (b, "s1"), (c, "s2")):
        rc, out, _ = run(
            ["generate", "--state", state_file, "--seed", seed, "--count", "40",
             "--out", path],
            capsys,
        )
        assert rc == 0 and "wrote 40 digits" in out
    assert a.read_text() == b.read_text()
    assert a.read_text() != c.read_text()
    # raw streams carry lazy markers for the huge back-half positions
    assert "*" in a.read_text()


def test_generate_clip_materializes(state_file, tmp_path, capsys):
    path = tmp_path / "clip.txt"
    rc, _, _ = run(
        ["generate", "--state", state_file, "--seed", "s1", "--count", "40",
         "--clip", "--out", path],
        capsys,
    )
    assert rc == 0
    body = path.read_text()
    assert "*" not in body


def test_windows_json_and_csv(state_file, tmp_path, capsys):
    rows = run_json(
        ["windows", "--state", state_file, "--k", "1", "--per-stage", "1"], capsys
    )
    assert len(rows) == 6  # sampling always keeps first, middle, last
    assert rows[0]["prediction"] == pytest.approx(1.2865497076023391)
    exact = run_json(
        ["windows", "--state", state_file, "--k", "1", "--per-stage", "1", "--exact"],
        capsys,
    )
    assert exact[0]["q_sum"] == "4/3" and exact[0]["prediction"] == "220/171"
    csv_file = tmp_path / "win.csv"
    rc, out, _ = run(
        ["windows", "--state", state_file, "--k", "1,2", "--per-stage", "2",
         "--out", csv_file],
        capsys,
    )
    assert rc == 0
    rows = list(csv.DictReader(csv_file.open()))
    assert len(rows) == 12
    assert list(rows[0]) == ["i", "j", "k", "n_start", "n_end", "t", "const_q",
                             "alpha", "p_sum", "q_sum", "ratio", "prediction",
                             "err_bound"]


def test_analyze_digit_file_counts(state_file, tmp_path, capsys):
    digits = tmp_path / "d.txt"
    rc, _, _ = run(
        ["generate", "--state", state_file, "--seed", "an", "--count", "60",
         "--clip", "--out", digits],
        capsys,
    )
    assert rc == 0
    csv_file = tmp_path / "stats.csv"
    rc, out, _ = run(
        ["analyze", "--digits", digits, "--base", "pow:1/4:1",
         "--blocks", "0;0-0", "--checkpoints", "30,60",
         "--out", csv_file],
        capsys,
    )
    assert rc == 0 and "wrote 4 rows" in out
    rows = list(csv.DictReader(csv_file.open()))
    assert len(rows) == 4
    assert {r["kind"] for r in rows} == {"N"}
    assert [r["checkpoint"] for r in rows] == ["30", "30", "60", "60"]
    # counts are non-negative integers no larger than the window count
    for r in rows:
        assert 0 <= int(r["count"]) <= int(r["checkpoint"])


def test_analyze_all_kinds(state_file, capsys):
    d = run_json(
        ["analyze", "--state", state_file, "--seed", "an", "--blocks", "0;1;0-0",
         "--checkpoints", "40", "--ap1", "2", "--ap2", "1:2:1",
         "--pairs", "0/1", "--psi-target", "const:3", "--limit-estimate"],
        capsys,
    )
    kinds = {r["kind"] for r in d["rows"]}
    assert kinds == {"N", "API", "APII", "RN"}
    api = [r for r in d["rows"] if r["kind"] == "API"]
    assert {r["r"] for r in api} == {1, 2}
    assert all(r["block"] == "0-0" for r in api)
    rn = [r for r in d["rows"] if r["kind"] == "RN"][0]
    assert rn["block"] == "0/1"
    assert len(d["psi_transfer"]) == 3
    assert [e["block"] for e in d["limit_estimates"]] == ["0", "1", "0-0"]


def test_analyze_raw_stream_differs(state_file, capsys):
    clipped = run_json(
        ["analyze", "--state", state_file, "--seed", "an", "--blocks", "0",
         "--checkpoints", "40"],
        capsys,
    )
    raw = run_json(
        ["analyze", "--state", state_file, "--seed", "an", "--blocks", "0",
         "--checkpoints", "40", "--raw-stream"],
        capsys,
    )
    # raw streams keep markers, which never count as a small digit
    assert raw["rows"][0]["count"] <= clipped["rows"][0]["count"]


def test_hdmain_reports(tmp_path, capsys):
    csv_file = tmp_path / "dxn.csv"
    d = run_json(
        ["hdmain", "--horizon", "50", "--seed", "acc", "--dxn", "--dimension",
         "--checkpoints", "25,50", "--out-csv", csv_file],
        capsys,
    )
    assert d["copy_count"] == 4 and d["bases_match"] is True
    assert [r["checkpoint"] for r in d["dxn"]] == [25, 50]
    dim = d["dimension"]
    assert dim["lower_max"] >= dim["lower_final"] > 0
    rows = list(csv.DictReader(csv_file.open()))
    assert {r["kind"] for r in rows} == {"DXN"}


# ---------------------------------------------------------------------------
# config files and output redirection
# ---------------------------------------------------------------------------


def test_config_expansion_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg"
    cfg.write_text("eps=1/2\nsset=even\n")
    d = run_json(["coeffs", "--config", cfg, "--t", "4", "--k", "1"], capsys)
    assert d["orders"]["1"]["window_sum"] == "53/6"
    # explicit flags win over config values
    d = run_json(["coeffs", "--config", cfg, "--t", "4", "--k", "1", "--eps", "0"], capsys)
    assert d["orders"]["1"]["window_sum"] == "7"


def test_config_bad_line(tmp_path, capsys):
    cfg = tmp_path / "cfg"
    cfg.write_text("this is not a pair\n")
    rc, _, err = run(["coeffs", "--config", cfg, "--t", "4"], capsys)
    assert rc == 1 and "key=value" in err


def test_out_redirects_json(tmp_path, capsys):
    path = tmp_path / "sol.json"
    rc, out, _ = run(["solve", "--t", "3", "--out", path], capsys)
    assert rc == 0 and out == ""
    assert json.loads(path.read_text())["t"] == 3
