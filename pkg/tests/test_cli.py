import json
from fractions import Fraction

import pytest

from entrocone.cli import main
from entrocone.polyhedra import ConeH
from entrocone.shannon import JointDistribution, elemental_inequalities

XY = ("X", "Y")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def gamma_xy(tmp_path):
    path = tmp_path / "gamma.json"
    cone = ConeH.from_inequalities(elemental_inequalities(XY), XY)
    path.write_text(json.dumps(cone.to_json()))
    return str(path)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_elemental(capsys):
    code, out, err = run(capsys, "elemental", "3")
    assert code == 0 and len(out.splitlines()) == 9
    manifest = json.loads(err.strip().splitlines()[-1])
    assert manifest["command"] == "elemental" and manifest["exit_code"] == 0
    code, out, _ = run(capsys, "--format", "json", "elemental", "4")
    assert json.loads(out)["count"] == 28


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0 and "imm (1 parameter)" in out
    code, out, _ = run(capsys, "catalog", "chsh")
    assert out.strip() == "-1*H(A0) -1*H(B0) +1*H(A0,B0) +1*H(A1,B0) +1*H(A0,B1) -1*H(A1,B1) >= 0"
    assert run(capsys, "catalog", "nope")[0] == 1


def test_translate_chsh(capsys):
    code, out, _ = run(capsys, "translate", "chsh_entropic")
    assert code == 0
    assert out.strip() == "+1*H(A0) +1*H(B0) -1*H(A0,B0) -1*H(A1,B0) -1*H(A0,B1) +1*H(A1,B1) >= 0"


def test_evaluate_violation_exit_code(capsys):
    code, out, _ = run(capsys, "evaluate", "imm", "3", "--box", "mix(pm3,pc)")
    assert code == 2 and "value 2 (violated)" in out
    code, out, _ = run(capsys, "evaluate", "chsh", "--box", "pc")
    assert code == 0 and "satisfied" in out


def test_evaluate_bounded_needs_budget(capsys):
    code, _, err = run(capsys, "evaluate", "bimm", "2", "--box", "mix(pm2,pc)")
    assert code == 1 and "budget" in err
    code, out, _ = run(capsys, "evaluate", "bimm", "2", "--box", "mix(pm2,pc)", "--budget", "2")
    assert code == 0


def test_evaluate_distribution_file(capsys, tmp_path):
    d = JointDistribution([("X", 2), ("Y", 2)], {(0, 0): Fraction(1, 2), (1, 1): Fraction(1, 2)})
    dist = write(tmp_path, "d.json", json.dumps(d.to_json()))
    ineq = write(tmp_path, "q.txt", "+1*H(X) +1*H(Y) -1*H(X,Y) <= 0\n")
    code, out, _ = run(capsys, "evaluate", ineq, "--dist", dist)
    assert code == 2 and "value 1" in out


def test_prove(capsys, tmp_path, gamma_xy):
    good = write(tmp_path, "good.txt", "+1*H(X,Y) >= 0\n")
    code, out, _ = run(capsys, "prove", gamma_xy, good)
    assert code == 0 and "implied" in out
    bad = write(tmp_path, "bad.txt", "+1*H(X) +1*H(Y) -1*H(X,Y) <= 0\n")
    code, out, _ = run(capsys, "prove", gamma_xy, bad)
    assert code == 2 and "not implied" in out


def test_rays_and_facets(capsys, tmp_path, gamma_xy):
    code, out, _ = run(capsys, "--format", "json", "rays", gamma_xy)
    assert code == 0 and len(json.loads(out)["directions"]) == 3
    facet = write(tmp_path, "f.txt", "+1*H(X) +1*H(Y) -1*H(X,Y) >= 0\n")
    assert run(capsys, "facets", gamma_xy, facet)[0] == 0
    loose = write(tmp_path, "l.txt", "+1*H(X) +1*H(Y) >= 0\n")
    code, out, _ = run(capsys, "facets", gamma_xy, loose)
    assert code == 2 and "face_dim=0" in out


def test_project_bell22_is_deterministic(capsys):
    code, first, _ = run(capsys, "project", "bell22", "--workers", "1")
    assert code == 0
    nontrivial = [line for line in first.splitlines() if line.endswith("nontrivial")]
    assert len(nontrivial) == 1
    _, second, _ = run(capsys, "project", "bell22", "--workers", "2")
    assert first == second


def test_project_pieces_json(capsys):
    code, out, _ = run(capsys, "--format", "json", "project", "bell22", "--strategy", "pieces",
                       "--budget", "C")
    classes = json.loads(out)["classes"]
    nontrivial = [c["representative"] for c in classes if not c["trivial"]]
    # entropic CHSH plus two classes bounded by C
    assert code == 0 and len(nontrivial) == 3
    assert sum(r.endswith("C") for r in nontrivial) == 2


def test_resource_cap_reports_counters(capsys, tmp_path):
    manifest = tmp_path / "m.json"
    code, _, err = run(capsys, "--manifest", str(manifest), "project", "bell22", "--max-ineqs", "5")
    assert code == 1 and "resource limit" in err
    data = json.loads(manifest.read_text())
    assert data["parameters"]["counters"]["max_ineqs"] == 5
    assert set(data) >= {"command", "parameters", "input_hashes", "version", "wall_time_s",
                         "max_intermediate_inequalities", "lp_calls", "exit_code"}


def test_errors_exit_one(capsys, tmp_path):
    broken = write(tmp_path, "broken.txt", "+1*H(X) >= 0\n+1*H(Y) => 0\n")
    code, _, err = run(capsys, "translate", broken)
    assert code == 1 and "line 2" in err
    assert run(capsys, "translate", "no_such_family")[0] == 1
    with pytest.raises(SystemExit) as exc:
        main(["project"])
    assert exc.value.code == 1
    capsys.readouterr()


def test_input_hash_recorded(capsys, tmp_path, gamma_xy):
    good = write(tmp_path, "good.txt", "+1*H(X,Y) >= 0\n")
    _, _, err = run(capsys, "prove", gamma_xy, good)
    manifest = json.loads(err.strip().splitlines()[-1])
    assert set(manifest["input_hashes"]) == {gamma_xy, good}
