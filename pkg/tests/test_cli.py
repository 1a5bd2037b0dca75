"""CLI contract: exit codes, determinism, round-trips, output formats."""

import csv
import json
import subprocess
import sys

import pytest

from coagfrag.cli import main, parse_zeta
from coagfrag.errors import ConfigError


def run_cli(args):
    return main(args)


class TestParseZeta:
    def test_forms(self):
        assert parse_zeta("zero").kind == "zero"
        assert parse_zeta("const:2.5").b == 2.5
        assert parse_zeta("const:0").kind == "zero"
        assert parse_zeta("gamma:2").shape == 2.0
        spec = parse_zeta("empirical:1,0.25;3,0.75")
        assert spec.values == (1.0, 3.0)
        shifted = parse_zeta("const:1+gamma:2")
        assert shifted.kind == "plus_gamma" and shifted.shape == 2.0

    def test_bad(self):
        with pytest.raises(ConfigError):
            parse_zeta("weird:3")


class TestSample:
    def test_deterministic_files(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        args = ["sample", "--family", "pa_zeta", "--alpha", "0.5", "--zeta", "gamma:2",
                "--n", "20", "--n-atoms", "50", "--seed", "3"]
        assert run_cli(args + ["--out", str(a)]) == 0
        assert run_cli(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        lines = a.read_text().strip().splitlines()
        assert len(lines) == 20
        row = json.loads(lines[0])
        assert set(row) == {"freqs", "dust_bound"}

    def test_zero_zeta_route(self, tmp_path):
        out = tmp_path / "z.jsonl"
        assert run_cli(["sample", "--family", "pa_zeta", "--alpha", "0.5",
                        "--zeta", "const:0", "--n", "5", "--n-atoms", "40",
                        "--seed", "1", "--out", str(out)]) == 0
        rows = [json.loads(l) for l in out.read_text().splitlines()]
        for r in rows:
            assert sum(r["freqs"]) <= 1.0 + 1e-9

    def test_missing_required_flag_is_config_error(self):
        assert run_cli(["sample", "--family", "pd", "--alpha", "0.5", "--n", "1"]) == 2

    def test_config_file_with_flag_precedence(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"family": "stable", "alpha": 0.5, "n": 7}))
        out = tmp_path / "o.jsonl"
        # flag --n 3 overrides the file's n 7
        assert run_cli(["sample", "--family", "stable", "--alpha", "0.5",
                        "--config", str(cfg), "--n", "3", "--out", str(out)]) == 0
        assert len(out.read_text().strip().splitlines()) == 3

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"bogus": 1}))
        assert run_cli(["sample", "--family", "stable", "--alpha", "0.5",
                        "--config", str(cfg)]) == 2


class TestVerify:
    def test_two_sample_roundtrip_identical(self, tmp_path):
        a = tmp_path / "a.jsonl"
        args = ["sample", "--family", "pd", "--alpha", "0.5", "--theta", "1",
                "--n", "300", "--n-atoms", "200", "--seed", "5", "--out", str(a)]
        assert run_cli(args) == 0
        rep = tmp_path / "rep.json"
        code = run_cli(["verify", "--two-sample", str(a), str(a), "--stats", "P1,P2",
                        "--alpha", "0.5", "--out", str(rep)])
        assert code == 0
        payload = json.loads(rep.read_text())
        assert payload["passed"] is True
        for r in payload["reports"]:
            assert r["ks_stat"] == 0.0

    def test_two_sample_different_laws_fail(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run_cli(["sample", "--family", "pd", "--alpha", "0.5", "--theta", "1",
                 "--n", "400", "--n-atoms", "200", "--seed", "5", "--out", str(a)])
        run_cli(["sample", "--family", "pd", "--alpha", "0.3", "--theta", "1",
                 "--n", "400", "--n-atoms", "200", "--seed", "6", "--out", str(b)])
        code = run_cli(["verify", "--two-sample", str(a), str(b), "--stats", "P1",
                        "--alpha", "0.5", "--out", str(tmp_path / "r.json")])
        assert code == 4

    def test_diagram_small_run_and_csv(self, tmp_path):
        rep = tmp_path / "rep.json"
        csv_path = tmp_path / "rep.csv"
        code = run_cli(["verify", "--diagram", "recursion", "--alpha", "0.5",
                        "--zeta", "gamma:1", "--n-replicas", "4000", "--n-seeds", "2",
                        "--seed", "7", "--out", str(rep), "--csv", str(csv_path)])
        assert code == 0
        payload = json.loads(rep.read_text())
        assert payload["passed"] is True
        assert "version" in payload and "resolved_config" in payload
        with open(csv_path) as fh:
            rows = list(csv.DictReader(fh))
        assert rows and set(rows[0]) >= {"diagram_id", "statistic", "p_value", "seed"}

    def test_negative_control_exits_nonzero(self, tmp_path):
        code = run_cli(["verify", "--diagram", "pitman_pd", "--alpha", "0.6",
                        "--delta", "0.5", "--theta", "1",
                        "--negative-control", "frag_wrong_theta",
                        "--n-replicas", "3000", "--n-atoms", "500", "--n-seeds", "2",
                        "--seed", "7", "--out", str(tmp_path / "r.json")])
        assert code == 4

    def test_config_error_exit(self, tmp_path):
        code = run_cli(["verify", "--diagram", "pitman_general", "--alpha", "0.5",
                        "--out", str(tmp_path / "r.json")])
        assert code == 2


class TestDensity:
    def test_columns_and_nonnegativity(self, tmp_path):
        out = tmp_path / "d.csv"
        code = run_cli(["density", "--alpha", "0.5", "--grid", "0.1:10:25",
                        "--total", "1.0", "--out", str(out)])
        assert code == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 25
        for row in rows:
            assert float(row["stable_density"]) >= 0.0
            assert float(row["cond_mix_weight"]) >= 0.0

    def test_half_index_matches_closed_form(self, tmp_path):
        import math
        out = tmp_path / "d.csv"
        run_cli(["density", "--alpha", "0.5", "--grid", "0.5:2:3", "--out", str(out)])
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            t = float(row["x"])
            closed = t ** -1.5 * math.exp(-1 / (4 * t)) / (2 * math.sqrt(math.pi))
            assert float(row["stable_density"]) == pytest.approx(closed, rel=1e-8)

    def test_pkmix_column(self, tmp_path):
        out = tmp_path / "d.csv"
        code = run_cli(["density", "--alpha", "0.6", "--delta", "0.5",
                        "--zeta", "const:1", "--v-value", "0.8",
                        "--grid", "0.2:3:10", "--out", str(out)])
        assert code == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert all(float(r["pkmix_unnorm"]) >= 0 for r in rows)

    def test_bad_grid(self, tmp_path):
        assert run_cli(["density", "--alpha", "0.5", "--grid", "0:1:10",
                        "--out", str(tmp_path / "d.csv")]) == 2


class TestEntryPoint:
    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "coagfrag.cli", "list-diagrams"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "pitman_pd" in proc.stdout
