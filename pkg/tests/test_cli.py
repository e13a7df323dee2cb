import json

import pytest

from backscatter_sim.cli import main, write_atomic


def files(path):
    return sorted(p for p in path.iterdir() if not p.name.startswith("."))


class TestValidate:
    def test_shipped_preset(self, capsys):
        assert main(["validate", "fig7-outdoor-24.json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["nodes"][2]["profile"]["name"] == "LoRea-2.4"

    def test_file(self, tmp_path, minimal_doc, capsys):
        f = tmp_path / "s.json"
        f.write_text(json.dumps(minimal_doc), encoding="utf-8")
        assert main(["validate", str(f)]) == 0

    def test_invalid_names_file_and_path(self, tmp_path, minimal_doc, capsys):
        minimal_doc["nodes"][0]["tx_power_dbm"] = "x"
        f = tmp_path / "bad.json"
        f.write_text(json.dumps(minimal_doc), encoding="utf-8")
        assert main(["validate", str(f)]) == 1
        err = capsys.readouterr().err
        assert "validate" in err and "bad.json" in err and "nodes[0].tx_power_dbm" in err

    def test_bad_override_path(self, capsys):
        assert main(["validate", "fig13-unison", "--set", "nodes.nobody.position.0=1"]) == 1
        assert "nodes.nobody" in capsys.readouterr().err

    def test_malformed_set(self, capsys):
        assert main(["validate", "fig13-unison", "--set", "novalue"]) == 1

    def test_broken_json(self, tmp_path, capsys):
        f = tmp_path / "x.json"
        f.write_text("{", encoding="utf-8")
        assert main(["validate", str(f)]) == 1


class TestRun:
    def test_same_seed_same_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "fig13-unison", "--seed", "42", "--out", str(a)]) == 0
        assert main(["run", "fig13-unison", "--seed", "42", "--out", str(b)]) == 0
        fa, fb = files(a), files(b)
        assert [p.suffix for p in fa] == [".csv", ".json"]
        assert all(p.name.endswith("-42" + p.suffix) for p in fa)
        assert [p.read_bytes() for p in fa] == [p.read_bytes() for p in fb]

    def test_override_equals_edited_file(self, tmp_path):
        from backscatter_sim.scenario import read_preset

        doc = read_preset("fig13-unison")
        doc["nodes"][7]["tx_power_dbm"] = 10.0
        f = tmp_path / "edited.json"
        f.write_text(json.dumps(doc), encoding="utf-8")
        main(["run", str(f), "--seed", "3", "--out", str(tmp_path / "x"), "--format", "json"])
        main(["run", "fig13-unison", "--seed", "3", "--set", "nodes.wifi.tx_power_dbm=10",
              "--out", str(tmp_path / "y"), "--format", "json"])
        assert files(tmp_path / "x")[0].read_bytes() == files(tmp_path / "y")[0].read_bytes()

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BACKSCATTER_SIM_OUTPUT_DIR", str(tmp_path))
        assert main(["run", "fig13-unison", "--format", "csv"]) == 0
        assert len(files(tmp_path)) == 1


class TestExperiment:
    def test_unison_csv(self, tmp_path):
        assert main(["experiment", "fig13-unison", "--format", "csv", "--out", str(tmp_path)]) == 0
        (f,) = files(tmp_path)
        ids = {line.split(",")[1] for line in f.read_text(encoding="utf-8").splitlines()[1:]}
        assert ids == {"rx1", "rx2", "rx3", "aggregate"}

    def test_summary_json(self, tmp_path):
        assert main(["experiment", "fig3-mono-bi", "--format", "json", "--out", str(tmp_path)]) == 0
        body = json.loads(files(tmp_path)[0].read_text(encoding="utf-8"))
        assert body["summary"]["verdicts"]["minimum_at_midpoint"] is True


class TestSweep:
    def test_grid(self, tmp_path):
        rc = main(["sweep", "fig4-outdoor-24", "--parameter", "nodes.rx.position.0",
                   "--grid", "100:300:100", "--replications", "1", "--out", str(tmp_path)])
        assert rc == 0
        summary = json.loads(files(tmp_path)[1].read_text(encoding="utf-8"))
        assert summary["max_range"] == 200.0

    def test_needs_one_grid_form(self, capsys):
        assert main(["sweep", "fig4-outdoor-24", "--parameter", "nodes.rx.position.0"]) == 1

    def test_runtime_error_is_2(self, tmp_path, capsys):
        rc = main(["sweep", "fig4-outdoor-24", "--parameter", "nodes.rx.position.0", "--values", "50",
                   "--receiver", "ghost", "--out", str(tmp_path)])
        assert rc == 2
        assert "sweep" in capsys.readouterr().err


def test_list_presets(capsys):
    assert main(["list-presets"]) == 0
    out = capsys.readouterr().out
    assert "fig13-unison (also: fig12-unison)" in out


def test_atomic_write_replaces(tmp_path):
    p = tmp_path / "r.csv"
    write_atomic(p, "one")
    write_atomic(p, "two")
    assert p.read_text(encoding="utf-8") == "two"
    assert files(tmp_path) == [p]
