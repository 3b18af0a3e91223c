import csv
import json
import math
import subprocess
import sys

import pytest

from monophoton import cli
from monophoton.config import ConfigError, load, parse, parse_angle, parse_angles, validate


def write_config(tmp_path, body, name="run.toml"):
    path = tmp_path / name
    path.write_text(body)
    return path


def teleport_toml(out, trials=2000, fmt="json"):
    return f"""
experiment = "teleport"
seed = 7
trials = {trials}

[qubit]
a_re = 0.7071067811865476
a_im = 0.0
b_re = 0.7071067811865476
b_im = 0.0

[output]
path = "{out}"
format = "{fmt}"
"""


def scan_toml(out, values='["rad:0", "deg:60", "deg:90", "deg:180"]', trials=20000, fmt="csv"):
    return f"""
experiment = "bell-scan"
seed = 11
trials = {trials}

[phases]
phi_a = {values}
phi_b = {values}
pairing = "zip"

[output]
path = "{out}"
format = "{fmt}"
"""


def raw_teleport(tmp_path, **changes):
    raw = {
        "experiment": "teleport", "seed": 1, "trials": 10,
        "qubit": {"a_re": 1.0, "a_im": 0.0, "b_re": 0.0, "b_im": 0.0},
        "output": {"path": str(tmp_path / "out"), "format": "json"},
    }
    raw.update(changes)
    return raw


class TestValidate:
    def test_missing_qubit_block(self, tmp_path):
        raw = raw_teleport(tmp_path)
        del raw["qubit"]
        problems = validate(raw)
        assert len(problems) == 1 and "qubit" in problems[0]

    def test_zero_trials(self, tmp_path):
        problems = validate(raw_teleport(tmp_path, trials=0))
        assert len(problems) == 1 and "trials" in problems[0]

    def test_clean_bell_scan(self, tmp_path):
        raw = load(write_config(tmp_path, scan_toml(tmp_path / "out")))
        assert validate(raw) == []

    def test_missing_seed(self, tmp_path):
        raw = raw_teleport(tmp_path)
        del raw["seed"]
        assert any("seed" in p for p in validate(raw))

    def test_unnormalized_qubit(self, tmp_path):
        raw = raw_teleport(tmp_path, qubit={"a_re": 1.0, "a_im": 0.0, "b_re": 1.0, "b_im": 0.0})
        assert len(validate(raw)) == 1

    def test_bad_format(self, tmp_path):
        raw = raw_teleport(tmp_path, output={"path": str(tmp_path), "format": "xml"})
        assert len(validate(raw)) == 1

    def test_parse_raises_with_all_problems(self, tmp_path):
        raw = raw_teleport(tmp_path, trials=0, seed=-1)
        with pytest.raises(ConfigError) as info:
            parse(raw)
        assert len(info.value.violations) == 2

    def test_validate_is_pure(self, tmp_path):
        raw = raw_teleport(tmp_path)
        before = json.dumps(raw, sort_keys=True)
        validate(raw)
        assert json.dumps(raw, sort_keys=True) == before
        assert not (tmp_path / "out").exists()

    def test_validate_command_exit_codes(self, tmp_path, capsys):
        good = write_config(tmp_path, scan_toml(tmp_path / "out"), "good.toml")
        bad = write_config(tmp_path, teleport_toml(tmp_path / "out").replace("trials = 2000", "trials = 0"), "bad.toml")
        assert cli.main(["validate", str(good)]) == 0
        assert cli.main(["validate", str(bad)]) == 2
        assert "trials" in capsys.readouterr().out


class TestAngles:
    def test_units(self):
        assert parse_angle("deg:60") == pytest.approx(math.pi / 3)
        assert parse_angle("rad:1.5") == 1.5
        assert parse_angle(2) == 2.0

    def test_range(self):
        got = parse_angles({"start": "deg:0", "stop": "deg:360", "num": 37})
        assert len(got) == 37 and got[-1] == pytest.approx(2 * math.pi)

    def test_garbage(self):
        with pytest.raises(ValueError):
            parse_angle("grad:3")


class TestRun:
    def test_teleport_summary(self, tmp_path, capsys):
        cfg = write_config(tmp_path, teleport_toml(tmp_path / "out", trials=20000))
        assert cli.main(["run", str(cfg)]) == 0
        doc = json.loads((tmp_path / "out" / "teleport.json").read_text())
        summary = doc["summary"]
        assert abs(summary["success_fraction"] - 0.5) < 5 * math.sqrt(0.25 / 20000)
        assert summary["mean_success_fidelity"] == 1.0
        assert len(doc["records"]) == 20000
        first = doc["records"][0]
        assert {"outcome", "correction_applied", "bob_state", "fidelity_to_target", "trial_seed"} <= set(first)

    def test_scan_csv(self, tmp_path):
        cfg = write_config(tmp_path, scan_toml(tmp_path / "out"))
        assert cli.run(cfg) == 0
        text = (tmp_path / "out" / "bell_scan.csv").read_bytes()
        assert b"\r\n" not in text
        rows = list(csv.reader(text.decode().splitlines()))
        assert tuple(rows[0]) == cli.SCAN_FIELDS
        margins = [float(r[cli.SCAN_FIELDS.index("margin")]) for r in rows[1:]]
        assert [m < 0 for m in margins] == [False, True, False, False]
        assert json.loads((tmp_path / "out" / "summary.json").read_text())["n_violated"] == 1

    def test_floats_use_seventeen_digits(self, tmp_path):
        cfg = write_config(tmp_path, scan_toml(tmp_path / "out", trials=100))
        cli.run(cfg)
        rows = list(csv.DictReader((tmp_path / "out" / "bell_scan.csv").read_text().splitlines()))
        assert float(rows[1]["phi_a"]) == math.radians(60)
        assert rows[1]["phi_a"] == format(math.radians(60), ".17g")

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_byte_identical_reruns(self, tmp_path, fmt):
        outs = []
        for k in range(2):
            cfg = write_config(tmp_path, teleport_toml(tmp_path / f"o{k}", trials=500, fmt=fmt), f"c{k}.toml")
            assert cli.run(cfg) == 0
            outs.append(sorted((p.name, p.read_bytes()) for p in (tmp_path / f"o{k}").iterdir()))
        assert outs[0] == outs[1]

    def test_entangle_dump_state(self, tmp_path):
        body = f"""
experiment = "entangle"
seed = 3
trials = 100
[output]
path = "{tmp_path / 'out'}"
format = "json"
"""
        cfg = write_config(tmp_path, body)
        assert cli.main(["run", str(cfg), "--dump-state"]) == 0
        state = json.loads((tmp_path / "out" / "state.json").read_text())
        amps = state["amplitudes"]
        assert len(amps) == 2
        for a in amps:
            assert a["re"] == pytest.approx(1 / math.sqrt(2), abs=1e-15)
            assert a["im"] == 0.0

    def test_output_override(self, tmp_path):
        cfg = write_config(tmp_path, teleport_toml(tmp_path / "ignored", trials=50))
        assert cli.main(["run", str(cfg), "--output", str(tmp_path / "here")]) == 0
        assert (tmp_path / "here" / "teleport.json").exists()
        assert not (tmp_path / "ignored").exists()

    def test_teleport_entangled(self, tmp_path):
        body = f"""
experiment = "teleport-entangled"
seed = 5
trials = 2000
[bs]
t_re = 0.6
t_im = 0.0
r_re = 0.0
r_im = 0.8
[output]
path = "{tmp_path / 'out'}"
format = "json"
"""
        assert cli.run(write_config(tmp_path, body)) == 0
        summary = json.loads((tmp_path / "out" / "teleport_entangled.json").read_text())["summary"]
        assert summary["mean_success_fidelity"] == 1.0

    def test_mz_single(self, tmp_path):
        body = f"""
experiment = "mz-single"
seed = 1
trials = 1000
[phases]
phi_a = "deg:60"
phi_b = 0.0
[output]
path = "{tmp_path / 'out'}"
format = "csv"
"""
        assert cli.run(write_config(tmp_path, body)) == 0
        rows = list(csv.DictReader((tmp_path / "out" / "mz_single.csv").read_text().splitlines()))
        assert float(rows[0]["p_analytic"]) == pytest.approx(0.25, abs=1e-15)


class TestExitCodes:
    def test_bad_config(self, tmp_path):
        cfg = write_config(tmp_path, teleport_toml(tmp_path / "out").replace("[qubit]", "[qbit]"))
        assert cli.run(cfg) == 2

    def test_unreadable_file(self, tmp_path):
        assert cli.run(tmp_path / "missing.toml") == 2

    def test_malformed_toml(self, tmp_path):
        assert cli.run(write_config(tmp_path, "experiment = = 3")) == 2

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        cfg = write_config(tmp_path, teleport_toml(blocker / "sub"))
        assert validate(load(cfg))
        assert cli.run(cfg) == 2

    def test_invariant_breach(self, tmp_path, monkeypatch):
        monkeypatch.setattr(cli, "mz_simulated_probability", lambda a, b: 0.5)
        cfg = write_config(tmp_path, scan_toml(tmp_path / "out", trials=10))
        assert cli.run(cfg) == 3

    def test_module_entry_point(self, tmp_path):
        cfg = write_config(tmp_path, scan_toml(tmp_path / "out", trials=10))
        out = subprocess.run([sys.executable, "-m", "monophoton", "validate", str(cfg)],
                             capture_output=True, text=True)
        assert out.returncode == 0 and out.stdout == ""
