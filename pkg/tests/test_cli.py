import json

import pytest

from kmkit.cli import main


@pytest.fixture()
def files(tmp_path):
    paths = {}
    for name, matrix in (
        ("a1", [[2]]),
        ("a2", [[2, -1], [-1, 2]]),
        ("gen", [[2, -3], [-3, 2]]),
        ("aff", [[2, -2], [-2, 2]]),
        ("rank3", [[2, -2, -2], [-2, 2, -2], [-2, -2, 2]]),
        ("bad", [[2, -1], [0, 2]]),
    ):
        p = tmp_path / ("%s.json" % name)
        p.write_text(json.dumps({"matrix": matrix}))
        paths[name] = str(p)
    star = tmp_path / "star4.json"
    star.write_text(json.dumps({"faces": [[0, 1], [0, 2], [0, 3], [0, 4]]}))
    paths["star4"] = str(star)
    paths["dir"] = tmp_path
    return paths


def run(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    doc = json.loads(out.read_text()) if out.exists() else None
    return code, doc


def test_roots_a2(files):
    code, doc = run(
        ["roots", "--gcm", files["a2"], "--height", "10"], files["dir"]
    )
    assert code == 0
    assert doc["result"]["count"] == 3
    assert doc["schema"] == 1 and doc["config"]["height"] == 10


def test_mult_affine(files):
    code, doc = run(["mult", "--gcm", files["aff"], "--height", "4"], files["dir"])
    assert code == 0
    assert doc["result"]["dims_by_height"] == [2, 1, 2, 1]


def test_overrestricted_false_is_exit_zero(files):
    code, doc = run(
        ["overrestricted", "--gcm", files["a1"], "--prime", "3"], files["dir"]
    )
    assert code == 0  # the query succeeded; the answer is false
    assert doc["result"]["over_restricted"] is False
    assert doc["result"]["witness"] == {"root": [1], "power": 2}


def test_geodesic_probe_consistent(files):
    code, doc = run(
        [
            "geodesic",
            "probe",
            "--tree",
            files["star4"],
            "--dim",
            "3",
            "--seed",
            "7",
        ],
        files["dir"],
    )
    assert code == 0
    assert doc["result"]["verdict"] == "CONSISTENT"
    assert doc["config"]["seed"] == 7


def test_geodesic_generate_then_validate(files, tmp_path):
    code, doc = run(
        ["geodesic", "generate", "--tree", files["star4"], "--dim", "2", "--seed", "3"],
        files["dir"],
        "gen.json",
    )
    assert code == 0
    system = tmp_path / "system.json"
    system.write_text(json.dumps(doc["result"]))
    code, doc = run(
        ["geodesic", "validate", "--system", str(system)], files["dir"], "val.json"
    )
    assert code == 0 and doc["result"]["valid"] is True


def test_invalid_gcm_exit_1(files):
    code, doc = run(["gcm", "validate", "--gcm", files["bad"]], files["dir"])
    assert code == 1
    assert doc["result"]["detail"]["axiom"] == "zero-symmetry"


def test_unsupported_building_exit_4(files, capsys):
    code = main(["building", "ball", "--gcm", files["rank3"], "--q", "2", "--radius", "1"])
    assert code == 4


def test_window_exceeded_exit_2(files, capsys):
    code = main(["mult", "--gcm", files["aff"], "--height", "64"])
    assert code == 2


def test_adjoint_eq1_sweep(files):
    code, doc = run(
        ["adjoint", "check-eq1", "--gcm", files["a1"], "--prime", "5"], files["dir"]
    )
    assert code == 0
    assert doc["result"]["cases_failed"] == 0
    assert doc["result"]["cases_total"] == 30  # 2 signed roots x 5 x 3


def test_adjoint_eq1_boundary_exit_3(files):
    code, doc = run(
        ["adjoint", "check-eq1", "--gcm", files["a2"], "--prime", "2"], files["dir"]
    )
    assert code == 3
    assert doc["result"]["cases_failed"] > 0
    assert doc["result"]["witnesses"]


def test_building_panels(files):
    code, doc = run(
        ["building", "panels", "--gcm", files["gen"], "--q", "2", "--radius", "2"],
        files["dir"],
    )
    assert code == 0
    r = doc["result"]
    assert r["chambers"] == 13 and r["panel_sizes"] == [3]
    assert r["parabolic_index"] == {"1": 3, "2": 3}


def test_davis_coxeter_and_tsv(files, tmp_path):
    out = tmp_path / "davis.json"
    tsv = tmp_path / "davis.tsv"
    code = main(
        [
            "davis",
            "coxeter",
            "--gcm",
            files["a2"],
            "--length",
            "3",
            "--out",
            str(out),
            "--tsv",
            str(tsv),
        ]
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["result"]["vertices"]) == 13
    assert tsv.read_text().strip()


def test_homology_command(files):
    code, doc = run(
        ["homology", "--complex", files["star4"], "--dim", "1", "--ring", "Q"],
        files["dir"],
    )
    assert code == 0
    ranks = [h["rank"] for h in doc["result"]["homology"]]
    assert ranks == [1, 0]


def test_reports_byte_identical(files, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    args = ["group", "verify", "--gcm", files["a2"], "--prime", "5", "--words", "50", "--seed", "5"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_env_fallback(files, tmp_path, monkeypatch):
    monkeypatch.setenv("KMKIT_SEED", "21")
    code, doc = run(
        ["geodesic", "probe", "--tree", files["star4"], "--dim", "2"], files["dir"]
    )
    assert code == 0 and doc["config"]["seed"] == 21


def test_algebra_dump_field_config_echo(files):
    code, doc = run(
        [
            "algebra",
            "dump",
            "--gcm",
            files["a1"],
            "--height",
            "1",
            "--ring",
            "F",
            "--prime",
            "2",
            "--degree",
            "2",
        ],
        files["dir"],
    )
    assert code == 0
    assert doc["config"]["ring"] == {"p": 2, "m": 2, "modulus": [1, 1, 1]}
    assert doc["result"]["ring"] == {"p": 2, "m": 2, "modulus": [1, 1, 1]}
