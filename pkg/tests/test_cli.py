import json

import pytest

from scatterbits.cli import EXIT_CONFIG, EXIT_OK, EXIT_TIMEOUT, main


class TestRunCommand:
    def test_happy_path_writes_outputs(self, tmp_path, capsys):
        out = tmp_path / "batch"
        code = main(["run", "--protocol", "dp2", "--n", "2,4", "--trials", "3",
                     "--mode", "weak-local", "--seed", "9", "--out", str(out)])
        assert code == EXIT_OK
        assert (tmp_path / "batch.csv").exists()
        summary = json.loads((tmp_path / "batch.summary.json").read_text())
        assert set(summary["per_n"]) == {"2", "4"}

    def test_stdout_when_no_out(self, capsys):
        code = main(["run", "--n", "2", "--trials", "2", "--mode", "weak-local"])
        assert code == EXIT_OK
        captured = capsys.readouterr().out
        assert captured.startswith("protocol,n,mode,policy,seed,")
        assert '"per_n"' in captured

    def test_unknown_protocol_is_config_error(self, capsys):
        code = main(["run", "--protocol", "bogus", "--n", "2"])
        assert code == EXIT_CONFIG
        assert "protocol" in capsys.readouterr().err

    def test_incompatible_mode_is_config_error(self, capsys):
        code = main(["run", "--protocol", "clement-global", "--n", "4",
                     "--mode", "none"])
        assert code == EXIT_CONFIG
        assert "strong-global" in capsys.readouterr().err

    def test_bad_n_list_is_config_error(self, capsys):
        assert main(["run", "--n", "2;4"]) == EXIT_CONFIG

    def test_timeout_exit_code(self, tmp_path):
        code = main(["run", "--n", "32", "--trials", "1", "--mode", "weak-local",
                     "--max-rounds", "1", "--out", str(tmp_path / "t")])
        assert code == EXIT_TIMEOUT

    def test_deterministic_across_invocations(self, tmp_path):
        args = ["run", "--n", "4", "--trials", "4", "--mode", "weak-local",
                "--seed", "5"]
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(args + ["--out", str(a)]) == EXIT_OK
        assert main(args + ["--out", str(b)]) == EXIT_OK
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestConfigFile:
    def test_config_file_supplies_values(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("# sample\nprotocol = dp2\nn = 2\ntrials = 2\n"
                       "mode = weak-local\nseed = 11\n")
        code = main(["run", "--config", str(cfg)])
        assert code == EXIT_OK
        rows = [line for line in capsys.readouterr().out.splitlines()
                if line.startswith("dp2,2,")]
        assert len(rows) == 2

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("protocol = bogus\nn = 2\nmode = weak-local\n")
        code = main(["run", "--config", str(cfg), "--protocol", "dp2"])
        assert code == EXIT_OK

    def test_malformed_line_is_config_error(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("protocol dp2\n")
        assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG
        assert "line 1" in capsys.readouterr().err


class TestLemmaReportCommand:
    def test_passing_matrix(self, tmp_path, capsys):
        json_out = tmp_path / "matrix.json"
        code = main(["lemma-report", "--max-n", "3", "--max-k", "40",
                     "--json-out", str(json_out)])
        assert code == EXIT_OK
        table = capsys.readouterr().out
        assert "overall: PASS" in table
        payload = json.loads(json_out.read_text())
        assert payload["all_passed"] is True
        assert all(cell["method"] == "exact" for cell in payload["cells"])

    def test_out_of_range_is_config_error(self, capsys):
        assert main(["lemma-report", "--max-n", "99", "--max-k", "4"]) == EXIT_CONFIG
