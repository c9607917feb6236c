import json
import os
import subprocess
import sys

from hclab.cli import main
from hclab.reporting import load_json


def run_cli(*argv):
    return main(list(argv))


class TestSpecInvocations:
    def test_certify_rolewicz(self, capsys):
        assert run_cli("certify", "--op", "rolewicz:2.0", "--K", "10") == 0
        assert "PASS" in capsys.readouterr().out

    def test_battery_identity_fails(self, tmp_path):
        code = run_cli(
            "battery", "--op", "identity", "--samples", "6",
            "--json", str(tmp_path / "r.json"),
        )
        assert code == 1

    def test_oracle_rolewicz_prints_hit(self, capsys):
        code = run_cli(
            "oracle", "--op", "rolewicz:2.0", "--U", "e1:0.1", "--V", "e2:0.1",
            "--nmax", "16",
        )
        assert code == 0
        assert "n=4" in capsys.readouterr().out


class TestUsageErrors:
    def test_unknown_operator(self, capsys):
        assert run_cli("certify", "--op", "wat:1") == 2
        assert "known ids" in capsys.readouterr().err

    def test_bad_ball_literal(self, capsys):
        assert run_cli("oracle", "--op", "identity", "--U", "nonsense", "--V", "e1:0.1") == 2

    def test_missing_subcommand(self):
        assert run_cli() == 2

    def test_negative_threads(self):
        assert run_cli("--threads", "0", "zoo") == 2

    def test_missing_v_ball(self):
        assert run_cli("oracle", "--op", "identity", "--U", "e1:0.1") == 2


class TestZoo:
    def test_listing(self, capsys):
        assert run_cli("zoo") == 0
        out = capsys.readouterr().out
        for op_id in ("identity", "rolewicz", "salas", "maclane"):
            assert op_id in out

    def test_json_listing(self, tmp_path):
        path = tmp_path / "zoo.json"
        assert run_cli("zoo", "--json", str(path)) == 0
        doc = load_json(path)
        assert doc["schema"] == 1
        assert len(doc["operators"]) >= 5


class TestReports:
    def test_oracle_report_round_trip(self, tmp_path):
        path = tmp_path / "oracle.json"
        csv_path = tmp_path / "scan.csv"
        code = run_cli(
            "oracle", "--op", "rolewicz:2.0", "--U", "e1:0.1", "--V", "e2:0.1",
            "--nmax", "16", "--json", str(path), "--csv", str(csv_path),
        )
        assert code == 0
        doc = load_json(path)
        assert doc["kind"] == "first-hit"
        assert doc["n"] == 4
        assert doc["feasible"] is True
        rows = csv_path.read_text().strip().splitlines()
        assert rows[0].startswith("n,")
        assert len(rows) == 1 + len(doc["scanned"])

    def test_battery_report_bytes_reproducible(self, tmp_path):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        for path in (p1, p2):
            assert run_cli(
                "battery", "--op", "rolewicz:2.0", "--samples", "5",
                "--seed", "13", "--json", str(path),
            ) == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_battery_verdicts_round_trip(self, tmp_path):
        path = tmp_path / "battery.json"
        run_cli("battery", "--op", "rolewicz:0.5", "--samples", "5", "--json", str(path))
        doc = load_json(path)
        assert doc["verdicts"] == {name: "fail" for name in doc["verdicts"]}
        assert doc["consistent"] is True
        assert doc["overall"] == "fail"

    def test_certify_csv_and_plot(self, tmp_path):
        json_path = tmp_path / "cert.json"
        csv_path = tmp_path / "cert.csv"
        plot_path = tmp_path / "cert.png"
        code = run_cli(
            "certify", "--op", "rolewicz:2.0", "--K", "8",
            "--json", str(json_path), "--csv", str(csv_path), "--plot", str(plot_path),
        )
        assert code == 0
        assert json_path.exists() and csv_path.exists()
        assert plot_path.exists() and plot_path.stat().st_size > 1000
        doc = load_json(json_path)
        assert doc["verdict"] == "pass"

    def test_oracle_plot(self, tmp_path):
        plot_path = tmp_path / "scan.png"
        run_cli(
            "oracle", "--op", "rolewicz:2.0", "--U", "e1:0.1", "--V", "e2:0.1",
            "--nmax", "8", "--plot", str(plot_path),
        )
        assert plot_path.exists() and plot_path.stat().st_size > 1000

    def test_battery_plot(self, tmp_path):
        plot_path = tmp_path / "battery.png"
        run_cli(
            "battery", "--op", "identity", "--samples", "4", "--plot", str(plot_path),
        )
        assert plot_path.exists() and plot_path.stat().st_size > 1000

    def test_witness_report_and_plot(self, tmp_path):
        json_path = tmp_path / "witness.json"
        plot_path = tmp_path / "witness.png"
        code = run_cli(
            "witness", "--op", "rolewicz:2.0", "--eps", "0.5", "--seed", "4",
            "--json", str(json_path), "--plot", str(plot_path),
        )
        assert code == 0
        doc = load_json(json_path)
        assert doc["success"] is True
        assert doc["residual_a"] < 0.5 and doc["residual_b"] < 0.5
        assert plot_path.exists()

    def test_witness_failure_exit(self):
        assert run_cli("witness", "--op", "rolewicz:0.5", "--eps", "0.2", "--seed", "4") == 1

    def test_prop212_reports(self, tmp_path):
        json_path = tmp_path / "seq.json"
        code = run_cli(
            "prop212", "--op", "rolewicz:2.0", "--samples", "6",
            "--json", str(json_path), "--csv", str(tmp_path / "seq.csv"),
        )
        assert code == 0
        doc = load_json(json_path)
        assert doc["verdicts"]["sequence_and_decay"] == "pass"
        assert doc["verdicts"]["eventual"] == "pass"
        assert doc["agree"] is True


class TestBallLiterals:
    def test_zero_center(self, capsys):
        code = run_cli(
            "oracle", "--op", "rolewicz:2.0", "--U", "e1:0.3", "--V", "e2:0.3",
            "--W", "0:0.3", "--mode", "through-zero", "--nmax", "16", "--d", "24",
        )
        assert code == 0

    def test_vector_file(self, tmp_path, capsys):
        vec = tmp_path / "center.json"
        vec.write_text(json.dumps([[1.0, 0.0], [0.0, 0.5]]))
        code = run_cli(
            "oracle", "--op", "identity", "--U", f"@{vec}:2.0", "--V", "e1:1.0", "--n", "1",
        )
        assert code == 0

    def test_single_exponent_query(self, capsys):
        code = run_cli(
            "oracle", "--op", "rolewicz:2.0", "--U", "e1:0.1", "--V", "e2:0.1",
            "--n", "3", "--d", "8",
        )
        assert code == 1
        assert "infeasible" in capsys.readouterr().out

    def test_forward_backward_mode(self):
        code = run_cli(
            "oracle", "--op", "rolewicz:2.0", "--U", "e1:0.3", "--W", "0:0.3",
            "--mode", "forward-backward", "--nmax", "16", "--d", "24",
        )
        assert code == 0


class TestSeedResolution:
    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        p1, p2, p3 = (tmp_path / f"{i}.json" for i in range(3))
        monkeypatch.setenv("HCLAB_SEED", "21")
        run_cli("battery", "--op", "identity", "--samples", "4", "--json", str(p1))
        run_cli("battery", "--op", "identity", "--samples", "4", "--json", str(p2))
        monkeypatch.setenv("HCLAB_SEED", "22")
        run_cli("battery", "--op", "identity", "--samples", "4", "--json", str(p3))
        assert p1.read_bytes() == p2.read_bytes()
        assert p1.read_bytes() != p3.read_bytes()

    def test_flag_overrides_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HCLAB_SEED", "21")
        path = tmp_path / "r.json"
        run_cli("battery", "--op", "identity", "--samples", "4", "--seed", "5",
                "--json", str(path))
        assert load_json(path)["config"]["rng_seed"] == 5

    def test_config_file_layer(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"ball_samples": 4, "rng_seed": 33, "n_max": 24}))
        out = tmp_path / "r.json"
        code = run_cli("battery", "--op", "identity", "--config", str(cfg_path),
                       "--json", str(out))
        assert code == 1
        doc = load_json(out)
        assert doc["config"]["rng_seed"] == 33
        assert doc["config"]["n_max"] == 24
        assert doc["config"]["ball_samples"] == 4


class TestConsoleScript:
    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "hclab.cli", "zoo"],
            capture_output=True, text=True,
            env={**os.environ, "MPLBACKEND": "Agg"},
        )
        assert proc.returncode == 0
        assert "rolewicz" in proc.stdout
