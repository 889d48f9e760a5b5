"""CLI behaviour: outputs, provenance, determinism, exit codes."""
import json

import pytest

from helmdisc import cli
from helmdisc.errors import FalsificationError


def run(argv):
    return cli.main(argv)


class TestSolve:
    def test_modal_json(self, tmp_path):
        out = tmp_path / "solve.json"
        rc = run(["solve", "--ni", "3", "--k", "1.5", "--mode", "0",
                  "--source", "modal-j", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["norms"]["weighted_energy"] > 0
        assert doc["provenance"]["tool"].startswith("helmdisc")

    def test_zero_source_zero_norms(self, tmp_path):
        out = tmp_path / "z.json"
        rc = run(["solve", "--k", "2.0", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["norms"]["weighted_energy"] == 0

    def test_modes_csv(self, tmp_path):
        out = tmp_path / "s.json"
        modes = tmp_path / "m.csv"
        rc = run(["solve", "--ni", "2", "--k", "1.0", "--mode", "3",
                  "--source", "modal-j", "--beta", "0.7",
                  "--out", str(out), "--modes-out", str(modes)])
        assert rc == 0
        lines = modes.read_text().splitlines()
        assert lines[0].startswith("# helmdisc")
        header = [ln for ln in lines if not ln.startswith("#")][0]
        assert header.split(",")[0] == "nu"

    def test_malformed_flag_exit_2_no_output(self, tmp_path, capsys):
        out = tmp_path / "never.json"
        with pytest.raises(SystemExit) as exc:
            run(["solve", "--badflag", "1", "--out", str(out)])
        assert exc.value.code == 2
        assert not out.exists()

    def test_invalid_params_exit_2(self, tmp_path):
        out = tmp_path / "never.json"
        rc = run(["solve", "--ni", "-3", "--out", str(out)])
        assert rc == 2
        assert not out.exists()


class TestResonancesCmd:
    def test_csv_columns(self, tmp_path):
        out = tmp_path / "r.csv"
        rc = run(["resonances", "--ni", "100", "--numin", "14", "--numax", "14",
                  "--mmax", "1", "--out", str(out)])
        assert rc == 0
        lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert lines[0] == "nu,m,re_k,im_k,residual,verified,newton_iters"
        row = lines[1].split(",")
        assert abs(float(row[2]) - 1.77945199481921) < 1e-10


class TestCertifyCmd:
    def test_json_report(self, tmp_path):
        out = tmp_path / "c.json"
        rc = run(["certify", "--ni", "0.5", "--ai", "2", "--k", "5",
                  "--mode", "0", "--source", "modal-j", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["bound"]["certifying"] is True
        assert doc["bound"]["margin"] > 0

    def test_sweep_csv(self, tmp_path):
        out = tmp_path / "sweep.csv"
        rc = run(["certify", "--ni", "0.5", "--ai", "2", "--mode", "0",
                  "--source", "modal-j", "--sweep", "1,2,4", "--out", str(out)])
        assert rc == 0
        lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert lines[0] == "k,lhs,rhs,margin"
        assert len(lines) == 4

    def test_falsification_exit_4(self, tmp_path, monkeypatch):
        def boom(*a, **kw):
            raise FalsificationError("forced")
        monkeypatch.setattr(cli.ct, "certify", boom)
        rc = run(["certify", "--ni", "0.5", "--k", "2", "--mode", "0",
                  "--source", "modal-j", "--out", str(tmp_path / "x.json")])
        assert rc == 4


class TestIdentityCmd:
    def test_deterministic_and_green(self, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        rc = run(["identity-check", "--trials", "20", "--seed", "7", "--out", str(a)])
        assert rc == 0
        rc = run(["identity-check", "--trials", "20", "--seed", "7", "--out", str(b)])
        assert rc == 0
        assert a.read_bytes() == b.read_bytes()
        doc = json.loads(a.read_text())
        assert doc["violations"] == []
        assert doc["identity_suite"]["morawetz_4_2"]["max_rel_residual"] < 1e-11


class TestBlowupCmd:
    def test_columns(self, tmp_path):
        out = tmp_path / "b.csv"
        rc = run(["blowup", "--ni", "3", "--numin", "0", "--numax", "3",
                  "--out", str(out)])
        assert rc == 0
        lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert lines[0] == ("nu,k,l2_int_weighted,h1_int,l2_ext_weighted,"
                            "h1_ext,combined")
        assert len(lines) == 5


class TestFieldCmd:
    def test_csv_grid(self, tmp_path):
        out = tmp_path / "f.csv"
        rc = run(["field", "--ni", "4", "--k", "2.0", "--angle", "0.5",
                  "--source", "plane", "--res", "12", "--out", str(out)])
        assert rc == 0
        lines = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert lines[0] == "x,y,re_u,im_u,abs_u"
        assert len(lines) == 1 + 12 * 12

    def test_pgm(self, tmp_path):
        out = tmp_path / "f.pgm"
        rc = run(["field", "--ni", "4", "--k", "2.0", "--source", "plane",
                  "--res", "10", "--format", "pgm", "--out", str(out)])
        assert rc == 0
        blob = out.read_bytes()
        assert blob.startswith(b"P5\n")
        assert b"255\n" in blob
        w_h = [t for t in blob.split(b"\n") if t and not t.startswith(b"#")][1]
        assert w_h == b"10 10"
        assert blob.endswith(bytes(0 for _ in range(0)) ) or len(blob) > 100


class TestConfigFile:
    def test_config_and_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("ni = 3.0\nk = 1.5\nmode = 0\nsource = modal-j\n")
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        rc = run(["solve", "--config", str(cfg), "--out", str(out1)])
        assert rc == 0
        rc = run(["solve", "--config", str(cfg), "--k", "2.5", "--out", str(out2)])
        assert rc == 0
        d1 = json.loads(out1.read_text())
        d2 = json.loads(out2.read_text())
        assert d1["provenance"]["k"] == 1.5
        assert d2["provenance"]["k"] == 2.5      # flag overrides file
        assert d1["norms"]["weighted_energy"] != d2["norms"]["weighted_energy"]

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("nay = 3.0\n")
        rc = run(["solve", "--config", str(cfg)])
        assert rc == 2

    def test_determinism_bit_identical(self, tmp_path):
        outs = []
        for name in ("r1.csv", "r2.csv"):
            out = tmp_path / name
            rc = run(["resonances", "--ni", "3", "--numin", "5", "--numax", "6",
                      "--mmax", "1", "--seed", "11", "--out", str(out)])
            assert rc == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
