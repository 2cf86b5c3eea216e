"""End-to-end command-line checks, run in process through main()."""

import json

import pytest

from bmotrace.cli import RunConfig, main, parse_h, parse_levels, run


def invoke(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def last_json(out: str) -> dict:
    # reports start at the first brace; "wrote ..." lines may precede
    return json.loads(out[out.index("{"):])


def test_parse_h_accepts_fractions_and_decimals():
    assert parse_h("1/128") == 1.0 / 128.0
    assert parse_h("0.25") == 0.25
    assert parse_h(0.5) == 0.5


def test_parse_levels_count_and_list_forms():
    assert parse_levels("3") == [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
    assert parse_levels("1/8, 1/16") == [0.125, 0.0625]
    assert parse_levels([0.5, "1/4"]) == [0.5, 0.25]
    with pytest.raises(ValueError, match="at least two"):
        parse_levels("1")


def test_help_and_usage_exit_codes(capsys):
    assert invoke(capsys, ["--help"])[0] == 0
    # argparse usage failures map onto the validation code, not 2
    assert invoke(capsys, ["definitely-not-a-command"])[0] == 1
    assert invoke(capsys, [])[0] == 1
    assert run(RunConfig(command="zzz")) == 1


def test_domain_report_and_mask_dump(capsys, tmp_path):
    code, out, err = invoke(capsys, ["domain", "--shape", "disk",
                                     "--h", "1/16",
                                     "--out", str(tmp_path / "d")])
    assert code == 0
    rep = last_json(out)
    assert rep["command"] == "domain"
    assert rep["dim"] == 2
    assert rep["h"] == 1.0 / 16.0
    assert rep["cells"] > 0
    assert rep["boundary_faces"] > 0
    assert (tmp_path / "d.json").exists() and (tmp_path / "d.bin").exists()


def test_domain_spec_file_supplies_spacing(capsys, tmp_path):
    spec = tmp_path / "dom.json"
    spec.write_text(json.dumps({"type": "disk", "params": {"radius": 1.0},
                                "h": "1/16"}))
    code, out, _ = invoke(capsys, ["domain", "--domain", str(spec)])
    assert code == 0
    assert last_json(out)["h"] == 1.0 / 16.0


def test_domain_requires_shape_or_file(capsys):
    code, out, err = invoke(capsys, ["domain", "--h", "1/16"])
    assert code == 1
    assert "either --domain FILE or --shape TYPE" in err


def test_seminorm_oracle_cross_check_agrees(capsys):
    code, out, _ = invoke(capsys, ["seminorm", "--shape", "disk",
                                   "--h", "1/16", "--kind", "bmo",
                                   "--field-seed", "3", "--oracle"])
    assert code == 0
    rep = last_json(out)
    assert rep["oracle"]["exact_match"] is True
    assert rep["oracle"]["value"] == rep["result"]["value"]


def test_seminorm_oracle_limited_to_scannable_kinds(capsys):
    code, out, err = invoke(capsys, ["seminorm", "--shape", "disk",
                                     "--h", "1/16", "--kind", "miyachi",
                                     "--oracle"])
    assert code == 1
    assert "supports kinds bmo and b" in err


def test_seminorm_reports_are_byte_identical(capsys, tmp_path):
    argv = ["seminorm", "--shape", "disk", "--h", "1/16", "--kind", "b",
            "--field-seed", "5"]
    c1, _, _ = invoke(capsys, argv + ["--out", str(tmp_path / "a.json")])
    c2, _, _ = invoke(capsys, argv + ["--out", str(tmp_path / "b.json")])
    assert c1 == c2 == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_out_directory_gets_default_name(capsys, tmp_path):
    code, _, _ = invoke(capsys, ["seminorm", "--shape", "disk", "--h", "1/16",
                                 "--kind", "bmo", "--field-seed", "5",
                                 "--out", str(tmp_path / "reports")])
    assert code == 0
    assert (tmp_path / "reports" / "seminorm.json").exists()


def test_witness_svg_flag_writes_render(capsys, tmp_path):
    svg = tmp_path / "w.svg"
    code, _, _ = invoke(capsys, ["seminorm", "--shape", "disk", "--h", "1/16",
                                 "--kind", "bmo", "--field-seed", "5",
                                 "--witness-svg", str(svg)])
    assert code == 0
    assert "<circle" in svg.read_text()


def test_config_file_fills_gaps_but_cli_wins(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"shape": "disk", "h": "1/16", "kind": "b",
                               "field-seed": 5}))
    code_a, out_a, _ = invoke(capsys, ["seminorm", "--config", str(cfg)])
    code_b, out_b, _ = invoke(capsys, ["seminorm", "--config", str(cfg),
                                       "--kind", "bmo"])
    assert code_a == code_b == 0
    assert last_json(out_a)["result"]["kind"] == "b"
    assert last_json(out_b)["result"]["kind"] == "bmo"


def test_whitney_command_certifies(capsys):
    code, out, _ = invoke(capsys, ["whitney", "--shape", "annulus",
                                   "--shape-params",
                                   '{"r_inner": 0.4, "r_outer": 1.0}',
                                   "--max-level", "5"])
    assert code == 0
    rep = last_json(out)
    assert rep["all_ok"] is True
    assert rep["n_cubes"] > 0
    assert rep["violations"] == []
    assert set(rep["conditions"]) == {"covers", "disjoint", "distance_ok",
                                      "ratio_ok"}


def test_whitney_render_flag(capsys, tmp_path):
    svg = tmp_path / "w.svg"
    code, out, _ = invoke(capsys, ["whitney", "--shape", "disk",
                                   "--max-level", "4",
                                   "--render", str(svg)])
    assert code == 0
    rep = last_json(out)
    assert svg.read_text().count("<rect") == rep["n_cubes"]


def test_extend_jones_reports_matching(capsys):
    code, out, _ = invoke(capsys, ["extend", "--shape", "disk", "--h", "1/32",
                                   "--method", "jones", "--eps", "0.25",
                                   "--field-seed", "2"])
    assert code == 0
    rep = last_json(out)
    assert rep["jones"]["size_relation_ok"] is True
    assert rep["jones"]["matched_pairs"] > 0
    counts = rep["provenance_counts"]
    assert set(counts) == {"zero", "original", "matched", "reflected",
                           "g-part"}
    assert sum(counts.values()) > 0


def test_extend_writes_field_and_support(capsys, tmp_path):
    code, out, _ = invoke(capsys, ["extend", "--shape", "square", "--h", "1/8",
                                   "--method", "zero", "--field-seed", "1",
                                   "--out", str(tmp_path / "ext")])
    assert code == 0
    for name in ("ext.json", "ext.bin", "ext_support.json", "ext_support.bin"):
        assert (tmp_path / name).exists()


def test_extend_validation_errors_exit_1(capsys):
    code, _, err = invoke(capsys, ["extend", "--shape", "disk", "--h", "1/16",
                                   "--method", "weighted"])
    assert code == 1
    assert "--jacobian" in err


def test_chart_with_synthetic_frames(capsys):
    code, out, _ = invoke(capsys, ["chart", "--shape", "disk",
                                   "--samples", "200", "--frames", "50"])
    assert code == 0
    rep = last_json(out)
    assert rep["all_ok"] is True
    assert rep["synthetic_frames"]["worst"] < 1e-10


def test_chart_property_failure_exits_2(capsys):
    # an impossible tolerance turns a healthy run into a property failure
    code, out, _ = invoke(capsys, ["chart", "--shape", "disk",
                                   "--samples", "100", "--frames", "10",
                                   "--tol-frames", "1e-30"])
    assert code == 2
    assert last_json(out)["all_ok"] is False


def test_trace_counterexample_with_csv(capsys, tmp_path):
    csv = tmp_path / "rows.csv"
    code, out, _ = invoke(capsys, ["trace", "--counterexample",
                                   "--levels", "1/16,1/32,1/64",
                                   "--csv", str(csv)])
    assert code == 0
    rep = last_json(out)
    assert rep["all_ok"] is True
    lines = csv.read_text().splitlines()
    assert lines[0] == "h,sup_trace,bmo,b_normal,max_interior_div"
    assert len(lines) == 1 + len(rep["rows"])


def test_trace_experiment_mode(capsys):
    code, out, _ = invoke(capsys, ["trace", "--shape", "square", "--h", "1/16",
                                   "--mode", "NTH", "--n-fields", "3"])
    assert code == 0
    rep = last_json(out)
    assert rep["summary"]["n_fields"] == 3
    assert len(rep["reports"]) == 3


def test_suite_command_runs_and_validates_name(capsys):
    code, out, _ = invoke(capsys, ["suite", "--name", "frame-residuals"])
    assert code == 0
    rep = last_json(out)
    assert rep["command"] == "suite"
    assert rep["pass"] is True

    code, _, err = invoke(capsys, ["suite", "--name", "nope"])
    assert code == 1
    assert "unknown suite" in err
