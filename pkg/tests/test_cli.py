from __future__ import annotations

import json

import pytest

from treelike.cli import EXIT_BUDGET, EXIT_FALSE, EXIT_OK, EXIT_USAGE, main
from treelike.appendix import reference_set


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out), out


def test_build_examples(capsys):
    code, env, out = run_json(capsys, "build", "F*(F+F)")
    assert code == EXIT_OK and env["payload"]["vertices"] == 34
    assert out == json.dumps(env, sort_keys=True, indent=2) + "\n"
    assert run_json(capsys, "build", "petersen")[1]["payload"]["vertices"] == 10
    assert run_json(capsys, "build", "((L,L),(L,L))")[1]["payload"]["vertices"] == 46
    frag = run_json(capsys, "build", "F+F")[1]["payload"]
    assert frag["fragment"] and frag["loose"] == 5


def test_usage_errors(capsys):
    assert main(["build", "F*(F+"]) == EXIT_USAGE
    assert main(["snark-verify", "F+F"]) == EXIT_USAGE
    assert main(["phi-c", "(L,L)", "--structural"]) == EXIT_USAGE
    with pytest.raises(SystemExit) as err:
        main(["nonsense"])
    assert err.value.code == 2
    capsys.readouterr()


def test_patterns_text_and_json(capsys):
    code, out = run(capsys, "patterns", "F")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] == "# fragment=F count=42" and len(lines) == 43
    code, env, _ = run_json(capsys, "patterns", "(F+F)", "--json")
    assert env["payload"]["count"] == 18


def test_patterns_jobs_and_seed_do_not_change_output(capsys):
    _, a = run(capsys, "patterns", "F+F", "--jobs", "1")
    _, b = run(capsys, "patterns", "F+F", "--jobs", "3", "--seed", "99")
    _, c = run(capsys, "patterns", "F+F", "--method", "matchings", "--jobs", "2")
    assert a == b == c


def test_patterns_budget(capsys):
    code, out = run(capsys, "patterns", "F+F", "--max-nodes", "1")
    assert code == EXIT_BUDGET and "status=incomplete" in out.splitlines()[0]
    code, _ = run(capsys, "patterns", "F+F", "--method", "matchings", "--max-matchings", "2")
    assert code == EXIT_BUDGET


def test_appendix_check_small_fragments(capsys):
    code, env, _ = run_json(capsys, "appendix-check", "--fragments", "F", "F+F", "F+(F+F)")
    assert code == EXIT_OK and env["status"] == "match"
    fact = env["payload"]["inclusions"][0]
    assert fact["rule"] == "i" and fact["holds"] and fact["strict"]


def test_appendix_check_reports_corrupted_line(tmp_path, capsys):
    ref = reference_set("F+F")
    lines = ref.to_text().splitlines()
    dropped = lines[1]
    foreign = next(q for q in reference_set("F").patterns if q not in ref)
    lines[1] = " ".join(foreign)
    path = tmp_path / "ff.txt"
    path.write_text("\n".join(lines) + "\n")
    code, env, _ = run_json(capsys, "appendix-check", "--fragments", "F+F", "--reference", str(path))
    assert code == EXIT_FALSE and env["status"] == "mismatch"
    report = env["payload"]["fragments"][0]
    assert dropped in report["extra"] and " ".join(foreign) in report["missing"]
    path.write_text("# fragment=(F+F)\nA A A A D\n")
    assert main(["appendix-check", "--fragments", "F+F", "--reference", str(path)]) == EXIT_USAGE
    capsys.readouterr()


def test_snark_verify_and_replay(tmp_path, capsys):
    out = tmp_path / "s.json"
    assert main(["snark-verify", "windmill1", "--out", str(out)]) == EXIT_OK
    assert main(["verify", str(out)]) == EXIT_OK
    assert main(["snark-verify", "halin:(L,L,L)"]) == EXIT_FALSE
    capsys.readouterr()


def test_excessive_and_budget(capsys):
    code, env, _ = run_json(capsys, "excessive", "petersen")
    assert code == EXIT_OK and env["status"] == "5"
    code, env, _ = run_json(capsys, "excessive", "(L,L,L)", "--max-matchings", "3")
    assert code == EXIT_BUDGET and env["status"] == "incomplete"


def test_certify_and_replay_ei5(tmp_path, capsys):
    out = tmp_path / "ei5.json"
    assert main(["certify-ei5", "((L,L),(L,L),L)", "--skip-base", "--out", str(out)]) == EXIT_OK
    assert main(["verify", str(out), "--kind", "ei5"]) == EXIT_OK
    capsys.readouterr()


def test_flow_commands(tmp_path, capsys):
    code, env, _ = run_json(capsys, "flow", "petersen", "--p", "9", "--q", "2")
    assert code == EXIT_FALSE and env["status"] == "none"
    out = tmp_path / "f.json"
    assert main(["flow", "halin:(L,L,L)", "--p", "4", "--q", "1", "--out", str(out)]) == EXIT_OK
    assert main(["verify", str(out)]) == EXIT_OK
    out2 = tmp_path / "abs.json"
    assert main(["flow", "petersen", "--p", "4", "--q", "1", "--out", str(out2)]) == EXIT_FALSE
    assert main(["verify", str(out2)]) == EXIT_OK
    capsys.readouterr()


def test_phi_c_commands(tmp_path, capsys):
    code, env, _ = run_json(capsys, "phi-c", "petersen")
    assert env["payload"]["phi_c"] == "5"
    code, env, _ = run_json(capsys, "phi-c", "petersen", "--q-max", "2")
    assert code == EXIT_OK and env["status"] == "refuted"
    code, env, _ = run_json(capsys, "phi-c", "halin:(L,L,L)", "--q-max", "1")
    assert code == EXIT_FALSE and env["status"] == "flow-found"
    out = tmp_path / "st.json"
    assert main(["phi-c", "(L,L,L)", "--structural", "--out", str(out)]) == EXIT_OK
    assert main(["verify", str(out)]) == EXIT_OK
    capsys.readouterr()


def test_phi_c_budget(capsys):
    code, env, _ = run_json(capsys, "phi-c", "petersen", "--q-max", "2", "--max-states", "3")
    assert code == EXIT_BUDGET and env["status"] == "incomplete"


def test_time_limit(capsys):
    code, env, _ = run_json(capsys, "phi-c", "(L,L,L)", "--q-max", "2", "--time-limit", "0.5")
    assert code == EXIT_BUDGET and env["status"] == "incomplete"


def test_cdc_and_tampering(tmp_path, capsys):
    out = tmp_path / "c.json"
    assert main(["cdc", "((L,L),L,L)", "--out", str(out)]) == EXIT_OK
    assert main(["verify", str(out)]) == EXIT_OK
    env = json.loads(out.read_text())
    env["payload"]["cycles"][0] = env["payload"]["cycles"][0][1:]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(env))
    assert main(["verify", str(bad)]) == EXIT_FALSE
    assert main(["cdc", "petersen"]) == EXIT_OK
    assert main(["cdc", "petersen", "--cdc-k", "4"]) == EXIT_FALSE
    assert main(["cdc", "petersen", "--max-nodes", "3"]) == EXIT_BUDGET
    capsys.readouterr()


def test_cdc_jobs_identical(capsys):
    _, a = run(capsys, "cdc", "((L,L),(L,L),L)", "--jobs", "1")
    _, b = run(capsys, "cdc", "((L,L),(L,L),L)", "--jobs", "8")
    assert a == b


def test_iso(capsys):
    assert main(["iso", "windmill1", "hagglund34"]) == EXIT_OK
    assert main(["iso", "petersen", "windmill1"]) == EXIT_FALSE
    capsys.readouterr()


def test_verify_rejects_bad_files(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    assert main(["verify", str(p)]) == EXIT_USAGE
    p.write_text(json.dumps({"kind": "mystery", "payload": {}}))
    assert main(["verify", str(p)]) == EXIT_FALSE
    capsys.readouterr()
