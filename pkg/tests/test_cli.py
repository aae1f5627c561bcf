import json

import numpy as np
import pytest

from miregion.cli import main, parse_t_grid
from miregion.errors import ParseError
from miregion.guards import assert_residuals


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_graph_report(capsys, pmf_dir):
    code, out, _ = run(capsys, "graph", pmf_dir / "p_l.json")
    assert code == 0
    report = json.loads(out)
    assert report["graph"]["has_path_length_3"] is True
    assert report["manifest"]["command"] == "graph"
    assert report["manifest"]["direction_set_version"]


def test_exact_quantities(capsys, pmf_dir):
    code, out, _ = run(capsys, "quantities", pmf_dir / "pentagon.json", "--only", "korner_graph_entropy,gacs_korner_ci")
    assert code == 0
    q = json.loads(out)["quantities"]
    assert list(q) == ["gacs_korner_ci", "korner_graph_entropy"]
    assert q["korner_graph_entropy"]["value_bits"] == pytest.approx(np.log2(2.5), abs=1e-6)
    assert q["gacs_korner_ci"]["table1_form"] == "psi'(1, 1, -2; 0, 0, 1)"


def test_unknown_quantity_is_a_parse_error(capsys, pmf_dir):
    code, _, err = run(capsys, "quantities", pmf_dir / "p_eq.json", "--only", "shannon")
    assert code == 2
    assert json.loads(err)["error"] == "ParseError"


def test_interaction_chain_on_independent_bits(capsys, pmf_dir):
    code, out, _ = run(capsys, "quantities", pmf_dir / "p_ind.json", "--only", "g_ppi,g_pni,g_nni")
    assert code == 0
    report = json.loads(out)
    assert report["chain"]["ordered"] is True
    assert report["quantities"]["g_ppi"]["value_bits"] == pytest.approx(1.0)


def test_malformed_pmf_exits_with_validation_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"x_alphabet": ["a", "b"], "y_alphabet": ["c", "d"],
                               "pmf": [[0.5, -0.1], [0.3, 0.3]]}))
    code, _, err = run(capsys, "graph", bad)
    assert code == 3
    assert json.loads(err)["error"] == "NegativeEntry"


def test_unreadable_json_exits_with_parse_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(capsys, "graph", bad)
    assert code == 2
    code, _, _ = run(capsys, "graph", tmp_path / "missing.json")
    assert code == 2


def test_failed_guard_exits_with_validation_code(capsys, pmf_dir, monkeypatch):
    def broken_report(p, limit):
        assert_residuals({"indep_x": 0.5}, 1e-9, what="graph report")

    monkeypatch.setattr("miregion.cli.describe", broken_report)
    code, _, err = run(capsys, "graph", pmf_dir / "p_l.json")
    assert code == 3
    payload = json.loads(err)
    assert payload["error"] == "AssertionError"
    assert "indep_x" in payload["message"]


def test_cycle_witness_on_l_shape_fails_with_predicate(capsys, pmf_dir):
    code, _, err = run(capsys, "witness", pmf_dir / "p_l.json", "--kind", "cycle")
    assert code == 4
    payload = json.loads(err)
    assert payload["predicate"] == "has_cycle"
    assert payload["exit_code"] == 4


def test_bvn_witness_report(capsys, pmf_dir):
    code, out, _ = run(capsys, "witness", pmf_dir / "p_ind.json", "--kind", "bvn")
    assert code == 0
    report = json.loads(out)
    assert report["i_xyu"] == pytest.approx(1.0, abs=1e-9)
    assert max(report["residuals"].values()) <= 1e-9


def test_member_outside_outer_bound(capsys, pmf_dir):
    code, out, _ = run(capsys, "region", pmf_dir / "p_ind.json", "--member", "0,0,1.5")
    assert code == 0
    verdict = json.loads(out)["verdict"]
    assert verdict["status"] == "outside"
    assert verdict["certified"] is True


def test_bad_vector_is_a_parse_error(capsys, pmf_dir):
    code, _, _ = run(capsys, "region", pmf_dir / "p_ind.json", "--member", "0,1")
    assert code == 2


def test_negative_rate_is_a_validation_error(capsys, pmf_dir):
    code, _, _ = run(capsys, "rates", pmf_dir / "p_ind.json", "--tuple", "1,1,1,-1,1")
    assert code == 3


def test_synthesis_curve_csv(capsys, pmf_dir, tmp_path):
    out_file = tmp_path / "synth.csv"
    code, _, _ = run(capsys, "curve", pmf_dir / "p_eq.json", "--kind", "synth", "--t-grid", "0:0.5:1",
                     "--restarts", "2", "--csv", "--out", out_file, "--timings")
    assert code == 0
    lines = out_file.read_text().splitlines()
    manifest = json.loads(lines[0][2:])
    assert manifest["command"] == "curve"
    assert "curve" in manifest["stages"]
    assert lines[1] == "t,value,raw,cleanup,status"
    assert len(lines) == 5


def test_parse_t_grid():
    assert parse_t_grid("0:0.25:1") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_t_grid("0.1,0.3") == [0.1, 0.3]
    with pytest.raises(ParseError):
        parse_t_grid("0:0:1")
    with pytest.raises(ParseError):
        parse_t_grid("a,b")
