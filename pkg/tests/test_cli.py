"""Command-line front end: output layout and exit statuses."""

import json

import pytest

from braidsearch.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_nf_positive(capsys):
    code, out, _ = run(capsys, "nf", "N=3", "1", "2", "1")
    assert code == 0
    assert out == "strands: 3\nr: 0\nfactors: [3,2,1]\nl_G: 3\nl_RG: 3\n"


def test_nf_inverse_generator(capsys):
    code, out, _ = run(capsys, "nf", "N=3 -1")
    assert code == 0
    assert "r: 1\n" in out and "l_G: 5\n" in out and "l_RG: 1\n" in out


def test_nf_parse_error(capsys):
    code, _, err = run(capsys, "nf", "N=3", "1", "0")
    assert code == 2
    assert "line 1, column 7" in err


def test_nf_file(tmp_path, capsys):
    f = tmp_path / "w.txt"
    f.write_text("N=3 1 2 1\n\nN=4 3 -5\n")
    code, _, err = run(capsys, "nf", "--file", str(f))
    assert code == 2 and "line 3" in err


def test_len(capsys):
    code, out, _ = run(capsys, "len", "N=3 -1")
    assert code == 0 and out.strip() == "l_G: 5  l_RG: 1"
    _, out, _ = run(capsys, "len", "--length-fn", "rg", "N=3 -1")
    assert out.strip() == "1"


def test_gen_is_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    code, _, err = run(capsys, "gen", "--seed", "17", "-o", str(a))
    assert code == 0 and "seed: 17" in err
    run(capsys, "gen", "--seed", "17", "-o", str(b))
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "strands = 81" in text and "[secret]" in text
    assert len(text.split("[generators]")[1].split("[bases]")[0].split()) > 20 * 10


def test_gen_prints_random_seed(capsys):
    code, out, err = run(capsys, "gen", "--strands", "5", "--m", "2", "--n", "2", "--no-secret")
    assert code == 0 and err.startswith("seed: ")
    assert "[secret]" not in out and "[conjugates]" in out


def test_attack_empty_secret(tmp_path, capsys):
    f = tmp_path / "i.txt"
    run(capsys, "gen", "--strands", "6", "--secret-len", "0", "--seed", "1", "-o", str(f))
    code, out, _ = run(capsys, "attack", str(f))
    assert code == 0
    assert "success: yes" in out and "spelling: -" in out


def test_attack_failure_exit_status(tmp_path, capsys):
    f = tmp_path / "i.txt"
    run(capsys, "gen", "--strands", "8", "--m", "4", "--secret-len", "6", "--seed", "2", "-o", str(f))
    code, out, _ = run(capsys, "attack", str(f), "--max-steps", "1")
    assert code == 1 and "success: no" in out and "steps: 1" in out


def test_attack_trace_first_letter(tmp_path, capsys):
    f, trace = tmp_path / "i.txt", tmp_path / "trace.csv"
    run(capsys, "gen", "--strands", "8", "--m", "4", "--secret-len", "3", "--seed", "5", "-o", str(f))
    run(capsys, "attack", str(f), "--peel", "first-letter", "--lookahead", "2", "--trace", str(trace))
    rows = trace.read_text().splitlines()[1:]
    assert len(rows) == 3
    assert all(len(r.split(",")[2].split()) == 1 for r in rows)


def test_attack_bad_file(tmp_path, capsys):
    f = tmp_path / "bad.txt"
    f.write_text("[generators]\nN=3 1\n")
    code, _, err = run(capsys, "attack", str(f))
    assert code == 2 and "missing section" in err
    code, _, _ = run(capsys, "attack", str(tmp_path / "nope.txt"))
    assert code == 2


def test_experiment_unknown_preset(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "table1", "--preset", "huge"])
    assert exc.value.code == 2
    assert "desk" in capsys.readouterr().err


def test_experiment_unknown_name(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "table9"])
    assert exc.value.code == 2


def test_experiment_writes_csv_and_metadata(tmp_path, capsys, monkeypatch):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"grid": {"strands": [6], "secret_len": [2]}, "trials": 5, "seed": 99}))
    monkeypatch.setenv("BRAIDSEARCH_OUT", str(tmp_path / "env_out"))
    code, _, err = run(capsys, "experiment", "table3", "--spec", str(spec), "--trials", "4", "--workers", "1",
                       "--no-prune")
    assert code == 0 and "seed: 99" in err
    csv_text = (tmp_path / "env_out" / "table3.csv").read_text()
    meta = json.loads((tmp_path / "env_out" / "table3.meta.json").read_text())
    assert meta["effective_config"]["trials"] == 4
    assert meta["effective_config"]["options"]["attack"]["prune"] is False
    assert meta["effective_config"]["grid"]["strands"] == [6]
    assert csv_text.count("\n") == 1 + 2

    out2 = tmp_path / "again"
    run(capsys, "experiment", "table3", "--spec", str(spec), "--trials", "4", "--workers", "2", "--no-prune",
        "--out", str(out2))
    assert (out2 / "table3.csv").read_text() == csv_text


def test_experiment_flag_seed_beats_spec_file(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"grid": {"strands": [5], "secret_len": [2]}, "trials": 2, "seed": 99}))
    code, _, err = run(capsys, "experiment", "table3", "--spec", str(spec), "--seed", "7", "--out", str(tmp_path))
    assert code == 0 and "seed: 7" in err


def test_experiment_bad_spec_file(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text("{not json")
    code, _, err = run(capsys, "experiment", "table1", "--spec", str(spec))
    assert code == 2 and "line 1" in err
