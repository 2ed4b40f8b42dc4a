import json
import subprocess
import sys
from pathlib import Path

import pytest

from stepcheck.cli import main

ROOT = Path(__file__).resolve().parents[1]
SEC23 = str(ROOT / "fixtures" / "sec23.json")
SEC23_P = str(ROOT / "fixtures" / "sec23_coarsening.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_generate(capsys):
    code, out, _ = run(capsys, "generate", "torus:6,6")
    assert code == 0 and out["n"] == 36 and len(out["edges"]) == 72


def test_density(capsys):
    code, out, _ = run(capsys, "density", "-H", "c4_plus", "-W", SEC23)
    assert code == 0 and out["decimal6"] == "0.007453" and out["t"] == "18631407/2500000000"
    code, out, _ = run(capsys, "density", "-H", "c4_plus", "-W", SEC23, "--method", "enumerate")
    assert out["decimal6"] == "0.007453"


def test_step(capsys, tmp_path):
    code, out, _ = run(capsys, "step", "-W", SEC23, "-P", SEC23_P)
    assert code == 0 and out["measures"] == ["2/5", "3/5"]
    stepped = tmp_path / "w.json"
    stepped.write_text(json.dumps(out))
    code, out, _ = run(capsys, "density", "-H", "c4_plus", "-W", str(stepped))
    assert out["decimal6"] == "0.007461"


def test_checks(capsys):
    code, out, _ = run(capsys, "check-degree", "-H", "c4_plus")
    assert code == 0 and out["witness"] == ["2", "-1", "0"]
    code, out, _ = run(capsys, "check-degree", "-H", "cycle:6")
    assert code == 1 and out["psd"]
    code, out, _ = run(capsys, "check-thm1", "-H", "path:3", "-G", "path:3", "--distinguished",
                       '{"u0": 1, "us": [0, 2]}', "--convention", "ordered")
    assert code == 1 and out["matrix"]["entries"] == [["2", "2"], ["2", "2"]]
    code, out, _ = run(capsys, "check-thm2", "-H", "cycle:4", "-G", "cycle:4", "--distinguished",
                       '{"u0": 0, "us": [1, 3], "Us": [[0, 2], [0, 2]]}', "--convention", "ordered")
    assert code == 1 and out["matrix"]["entries"] == [["8", "8"], ["8", "8"]]


def test_check_lemma5(capsys):
    code, out, _ = run(capsys, "check-lemma5", "-H", "torus:6,6", "--u0", "0", "--u1", "6", "--u2", "1")
    assert code == 0 and out["refuted"] and len(out["pairs"]) == 6
    code, out, _ = run(capsys, "check-lemma5", "-H", "torus:4,4")
    assert code == 1 and not out["refuted"]
    code, out, err = run(capsys, "check-lemma5", "-H", "c4_plus")
    assert code == 2 and "transitivity" in err


def test_certify_and_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "certify", "-H", "c4_plus")
    assert code == 0 and out["method"] == "degree"
    path = tmp_path / "cert.json"
    path.write_text(json.dumps(out))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0 and out["verdict"] == "accept"
    data = json.loads(path.read_text())
    data["witness"]["value"] = "4"
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", str(bad))
    assert code == 1 and "witness not negative" in out["reasons"]
    junk = tmp_path / "junk.json"
    junk.write_text("{}")
    code, _, err = run(capsys, "verify", str(junk))
    assert code == 2 and "malformed" in err


def test_certify_explicit_and_inconclusive(capsys):
    code, out, _ = run(capsys, "certify", "-H", "c4_plus", "--strategy", "explicit", "-W", SEC23, "-P", SEC23_P)
    assert code == 0 and out["method"] == "explicit"
    code, out, _ = run(capsys, "certify", "-H", "hypercube:3", "--strategy", "degree,lemma5")
    assert code == 1 and out["verdict"] == "inconclusive"


def test_certify_thm2_target_file(capsys, tmp_path):
    target = tmp_path / "k33.json"
    code, g, _ = run(capsys, "generate", "k:3,3")
    target.write_text(json.dumps(g))
    code, out, _ = run(capsys, "certify", "-H", "path:2*path:3", "--strategy", "thm2", "-G", str(target),
                       "--distinguished", '{"u0": 3, "us": [0, 1], "Us": [[3, 4], [3, 4, 5]]}', "--meta", "off")
    assert code == 0 and out["method"] == "thm2" and out["witness"]["vector"] == ["2", "-5"]


def test_usage_errors(capsys):
    assert run(capsys, "density", "-H", "nope", "-W", SEC23)[0] == 2
    assert run(capsys, "density", "-H", "c4_plus", "-W", "{not json")[0] == 2
    assert run(capsys, "density", "-H", "c4_plus", "-W", '{"measures": ["1/2"], "blocks": [["1"]]}')[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "density", "-H", "c4_plus")[0] == 2
    assert run(capsys, "density", "-H", "c4_plus", "-W", SEC23, "--term-cap", "0")[0] == 2
    assert run(capsys, "verify", "/nonexistent/cert.json")[0] == 2


def test_caps(capsys):
    code, out, _ = run(capsys, "density", "-H", "torus:6,6", "-W", SEC23, "--term-cap", "10")
    assert code == 3 and out["error"] == "resource limit"
    code, out, _ = run(capsys, "check-lemma5", "-H", "torus:6,6", "--max-nodes", "1")
    assert code == 3


def test_time_limit(capsys):
    code, out, _ = run(capsys, "density", "-H", "hypercube:4", "-W", SEC23, "--method", "enumerate",
                       "--time-limit", "0.2")
    assert code == 3 and "time limit" in out["detail"]


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("STEPCHECK_THREADS", "lots")
    assert run(capsys, "generate", "cycle:4")[0] == 2
    monkeypatch.setenv("STEPCHECK_THREADS", "4")
    code, out, _ = run(capsys, "certify", "-H", "c4_plus")
    assert out["meta"]["threads"] == 4


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "stepcheck.cli", "density", "-H", "c4_plus", "-W", SEC23],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["decimal6"] == "0.007453"
