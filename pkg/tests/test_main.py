import json

import pytest

from bethe_rc.errors import CensusIntegrityError, CensusReadError
from bethe_rc.main import main
from bethe_rc.storage import file_hash, load_census

SOLVE_FOUR_SITES = [
    "solve", "--n", "4", "--ell", "2",
    "--seed-grid=-3,3,0.1", "--random-restarts", "16", "--no-escalate",
]


@pytest.fixture(name="run")
def run_fixture(capsys):
    """Run the CLI and return (exit status, stdout, stderr)"""
    def run(*argv):
        status = main(list(argv))
        captured = capsys.readouterr()
        return status, captured.out, captured.err

    return run


@pytest.fixture(name="census_path")
def census_path_fixture(run, tmp_path):
    path = tmp_path / "n4_ell2.json"
    status, _, _ = run("--out", str(path), *SOLVE_FOUR_SITES)
    assert status == 0
    return path


# Enumeration
def test_enum_counts(run):
    status, out, _ = run("--json", "enum", "--n", "12", "--ell", "6", "--content", "3,2,1")
    assert status == 0
    data = json.loads(out)
    assert data["count"] == 21
    assert data["configurations"][0]["vacancy"] == [0, 2, 6]
    assert sum(data["by_content"].values()) == 132


def test_enum_text_output(run):
    status, out, _ = run("enum", "--n", "2", "--ell", "1", "--diagrams")
    assert status == 0
    assert out.startswith("N=2 ell=1: 1 rigged configurations")


def test_enum_writes_out_file(run, tmp_path):
    path = tmp_path / "enum.json"
    status, _, _ = run("--out", str(path), "enum", "--n", "25", "--ell", "2")
    assert status == 0
    assert json.loads(path.read_text())["count"] == 275


# Usage errors
def test_empty_sector_is_a_usage_error(run):
    status, _, err = run("enum", "--n", "4", "--ell", "0")
    assert status == 64
    assert "usage error" in err


def test_unknown_command_is_a_usage_error(run):
    status, _, _ = run("bogus")
    assert status == 64


def test_bad_content_is_a_usage_error(run):
    status, _, _ = run("enum", "--n", "12", "--ell", "6", "--content", "3,a")
    assert status == 64


def test_bad_seed_grid_is_a_usage_error(run):
    status, _, _ = run("solve", "--n", "4", "--ell", "2", "--seed-grid", "1,2")
    assert status == 64


def test_json_errors_go_to_stderr(run):
    status, out, err = run("--json", "verify", "--n", "20", "--ell", "2")
    assert status == 1
    assert out == ""
    error = json.loads(err)
    assert error["status"] == 1
    assert error["title"] == "size cap exceeded"


# Solve, classify, verify and report on one census
def test_solve_embeds_manifest(census_path):
    census, document = load_census(census_path)
    assert census.counts["physical"] == 2
    assert document.manifest is not None
    assert document.manifest.content_sha256


def test_tampered_census_is_rejected(census_path):
    data = json.loads(census_path.read_text())
    data["solutions"][0]["residual"] = 1.0
    census_path.write_text(json.dumps(data))
    with pytest.raises(CensusIntegrityError):
        load_census(census_path)


def test_classify(run, census_path):
    status, out, _ = run("--json", "classify", "--census", str(census_path), "--check-keys")
    assert status == 0
    document = json.loads(out)
    assert document["key_convention_agrees"] is True
    assigned = [entry["rc"] for entry in document["entries"] if entry["rc"] is not None]
    assert sorted(rc["nu"] for rc in assigned) == [[1, 1], [2]]


def test_verify(run, census_path):
    status, out, _ = run("--json", "verify", "--n", "4", "--ell", "2", "--census", str(census_path))
    assert status == 0
    report = json.loads(out)
    assert report["passed"]
    assert report["checks"]["explicit_singular_vector"]


def test_report(run, census_path):
    status, out, _ = run("report", "--census", str(census_path))
    assert status == 0
    assert "content (2)" in out
    assert "content (1,1)" in out


# Quintic
def test_quintic(run):
    status, out, _ = run("--json", "quintic")
    assert status == 0
    rows = json.loads(out)["solutions"]
    assert len(rows) == 5
    assert all(row["physical"] for row in rows)
    assert min(r["sqrt_xi"][0] for r in rows if r["xi"] > 0) == pytest.approx(0.178978221719006, abs=1e-12)


def test_bad_coefficients_are_a_usage_error(run):
    status, _, _ = run("quintic", "--coeffs", "1,x,2")
    assert status == 64


# Reading and writing census files
def test_missing_census_is_reported(run, tmp_path):
    status, out, err = run("--json", "classify", "--census", str(tmp_path / "absent.json"))
    assert status == 1
    assert out == ""
    assert json.loads(err)["title"] == "census could not be read"


def test_malformed_census_is_reported(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"n": 4}')
    with pytest.raises(CensusReadError):
        load_census(path)
    path.write_text("not json")
    with pytest.raises(CensusReadError):
        load_census(path)


def test_solve_and_classify_are_reproducible(run, census_path, tmp_path):
    again = tmp_path / "again.json"
    assert run("--out", str(again), *SOLVE_FOUR_SITES)[0] == 0
    assert load_census(again)[1].manifest.content_sha256 == load_census(census_path)[1].manifest.content_sha256

    first, second = tmp_path / "first.json", tmp_path / "second.json"
    assert run("--out", str(first), "classify", "--census", str(census_path))[0] == 0
    assert run("--out", str(second), "classify", "--census", str(again))[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_manifest_records_inputs_and_outputs(run, census_path, tmp_path):
    out, manifest = tmp_path / "assignment.json", tmp_path / "manifest.json"
    status, _, _ = run(
        "--out", str(out), "--manifest", str(manifest), "classify", "--census", str(census_path)
    )
    assert status == 0
    data = json.loads(manifest.read_text())
    assert data["input_hashes"] == {str(census_path): file_hash(census_path)}
    assert data["output_hashes"] == {str(out): file_hash(out)}
    assert data["command_line"][:2] == ["bethe-rc", "--out"]
    assert data["config"]["seed_grid"] == [-3.0, 3.0, 0.1]


def test_solve_manifest_records_the_census(run, tmp_path):
    out, manifest = tmp_path / "census.json", tmp_path / "manifest.json"
    status, _, _ = run("--out", str(out), "--manifest", str(manifest), *SOLVE_FOUR_SITES)
    assert status == 0
    data = json.loads(manifest.read_text())
    assert data["input_hashes"] == {}
    assert data["output_hashes"] == {str(out): file_hash(out)}
    assert load_census(out)[1].manifest.command_line[0] == "bethe-rc"


def test_center_key_is_stored_with_the_census(run, tmp_path):
    path = tmp_path / "center.json"
    status, _, _ = run("--out", str(path), *SOLVE_FOUR_SITES, "--center-key")
    assert status == 0
    assert load_census(path)[1].config.use_center_key is True
    status, out, _ = run("--json", "classify", "--census", str(path))
    assert status == 0
    assigned = [entry["rc"] for entry in json.loads(out)["entries"] if entry["rc"] is not None]
    assert len(assigned) == 2
