import json
import subprocess
import sys

import pytest

from keyfitts.cli import run

FLAWLESS_USER = {
    "model": "generic",
    "key_width": 130.0,
    "mt_noise_sd": 0.02,
    "miss_rate": 0.0,
    "seed": 5,
    "noise": "uniform",
}


@pytest.fixture
def user_file(tmp_path):
    path = tmp_path / "user.json"
    path.write_text(json.dumps(FLAWLESS_USER))
    return path


@pytest.fixture
def prompts_file(tmp_path):
    from keyfitts.corpus import bundled_phrases

    path = tmp_path / "prompts.txt"
    path.write_text("\n".join(bundled_phrases("fixture10")) + "\n")
    return path


def test_characterize_simulate_produces_full_model(tmp_path, user_file):
    out = tmp_path / "model.json"
    log = tmp_path / "log.ndjson"
    code = run([
        "characterize", "--simulate", str(user_file), "--seed", "3",
        "--out", str(out), "--log-out", str(log),
    ])
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["bins"]) == 16
    assert all(b["fitted"] for b in doc["bins"])
    assert log.exists()


def test_characterize_replay_is_byte_deterministic(tmp_path, user_file):
    log = tmp_path / "log.ndjson"
    run([
        "characterize", "--simulate", str(user_file), "--seed", "4",
        "--out", str(tmp_path / "m0.json"), "--log-out", str(log),
    ])
    for name in ("m1.json", "m2.json"):
        assert run(["characterize", "--replay", str(log), "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "m1.json").read_bytes() == (tmp_path / "m2.json").read_bytes()
    assert (tmp_path / "m1.json").read_bytes() == (tmp_path / "m0.json").read_bytes()


def test_generate_all_kinds_and_energy_ordering(tmp_path, prompts_file):
    qwerty = tmp_path / "qwerty.json"
    generic = tmp_path / "generic.json"
    assert run(["generate", "--kind", "qwerty", "--out", str(qwerty)]) == 0
    assert run([
        "generate", "--kind", "generic", "--corpus", str(prompts_file),
        "--seed", "1", "--out", str(generic), "--restarts", "4",
    ]) == 0

    import io
    from contextlib import redirect_stdout

    def energy(path):
        buf = io.StringIO()
        with redirect_stdout(buf):
            assert run(["energy", "--layout", str(path), "--corpus", str(prompts_file)]) == 0
        return float(buf.getvalue().strip().splitlines()[-1])

    assert energy(generic) < energy(qwerty)


def test_generate_deterministic_bytes(tmp_path, prompts_file):
    args = [
        "generate", "--kind", "generic", "--corpus", str(prompts_file),
        "--seed", "9", "--restarts", "3",
    ]
    run(args + ["--out", str(tmp_path / "a.json")])
    run(args + ["--out", str(tmp_path / "b.json")])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_generate_flip_round_trip(tmp_path, prompts_file):
    base = tmp_path / "base.json"
    flipped = tmp_path / "flip.json"
    run(["generate", "--kind", "qwerty", "--out", str(base)])
    run(["generate", "--kind", "qwerty", "--flip", "--out", str(flipped)])
    a = json.loads(base.read_text())
    b = json.loads(flipped.read_text())
    rows_a = {k["char"]: k["row"] for k in a["keys"]}
    rows_b = {k["char"]: k["row"] for k in b["keys"]}
    assert rows_b["Q"] == 2 and rows_a["Q"] == 0


def test_oracle_qap_fixture_agreement(tmp_path, capsys):
    inst = {
        "n": 3,
        "m": 3,
        "flow": [[0, 5, 1], [5, 0, 1], [1, 1, 0]],
        "cost": [[0, 1, 4], [1, 0, 4], [4, 4, 0]],
    }
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(inst))
    assert run(["oracle", "qap", "--instance", str(path)]) == 0
    out = capsys.readouterr().out
    assert "faq_objective=26.0" in out
    assert "brute_force_objective=26.0" in out


def test_evaluate_writes_csv(tmp_path, user_file, prompts_file, capsys):
    layout = tmp_path / "qwerty.json"
    run(["generate", "--kind", "qwerty", "--out", str(layout)])
    report = tmp_path / "report.csv"
    code = run([
        "evaluate", "--layouts", str(layout), "--user", str(user_file),
        "--prompts", str(prompts_file), "--out", str(report),
    ])
    assert code == 0
    lines = report.read_text().strip().splitlines()
    assert lines[0].startswith("layout,user,n_trials,accuracy_pct")
    assert len(lines) == 2
    assert "wpm" in capsys.readouterr().out


def test_missing_file_gives_runtime_exit(tmp_path):
    assert run(["energy", "--layout", "nope.json", "--corpus", "nope.txt"]) == 1


def test_usage_error_exit_code(tmp_path):
    with pytest.raises(SystemExit) as err:
        run(["generate", "--kind", "dvorak", "--out", str(tmp_path / "x.json")])
    assert err.value.code == 2


def test_no_partial_output_on_failure(tmp_path):
    out = tmp_path / "model.json"
    code = run(["characterize", "--replay", "missing.ndjson", "--out", str(out)])
    assert code == 1
    assert not out.exists()
    assert not list(tmp_path.glob("*.tmp"))


def test_help_for_every_subcommand():
    for cmd in ("characterize", "generate", "energy", "evaluate", "oracle", "serve"):
        with pytest.raises(SystemExit) as err:
            run([cmd, "--help"])
        assert err.value.code == 0


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "keyfitts.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "characterize" in proc.stdout
