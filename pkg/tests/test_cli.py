from __future__ import annotations

import json
import subprocess
import sys

import pytest

from sicov.cli import main

from conftest import FIXTURES, REPO

COMMIT = "8cd6d44657a57ff949c22a0dce31bf0a16096a2d"


def porcelain(text: str) -> dict:
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def extract(tmp_path, *extra, diff=FIXTURES / "commit.diff"):
    return main(["extract", "--repo", str(REPO), "--diff", str(diff), "--out", str(tmp_path), "--porcelain", *extra])


# -- extract ------------------------------------------------------------------


def test_extract_fixture_commit(tmp_path, capsys):
    assert extract(tmp_path, "--total-functions", "41") == 0
    out = porcelain(capsys.readouterr().out)
    assert out["commit"] == COMMIT
    assert out["entries"] == "4" and out["unmangleable"] == "1" and out["files"] == "3"
    assert float(out["ifr"]) == pytest.approx(4 / 41)
    listed = (tmp_path / f"{COMMIT}.list").read_bytes()
    assert listed == (FIXTURES / "commit.expected.list").read_bytes()
    doc = json.loads((tmp_path / f"{COMMIT}.sic.json").read_text())
    assert doc["files"] == ["src/game/player.cpp", "src/math/vec.cpp", "src/physics/collide.cpp"]


def test_extract_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert extract(a) == 0 and extract(b) == 0
    for suffix in (".list", ".sic.json"):
        assert (a / f"{COMMIT}{suffix}").read_bytes() == (b / f"{COMMIT}{suffix}").read_bytes()


def test_empty_diff_gives_skip_only_list(tmp_path, capsys):
    empty = tmp_path / "empty.diff"
    empty.write_text("")
    assert extract(tmp_path, "--commit-id", "abc123", diff=empty) == 0
    assert (tmp_path / "abc123.list").read_text() == "# sicov profile list commit=abc123\ndefault:skip\n"


def test_missing_file_is_a_precondition_failure(tmp_path, capsys):
    diff = tmp_path / "ghost.diff"
    diff.write_text("--- a/src/ghost.cpp\n+++ b/src/ghost.cpp\n@@ -1 +1 @@\n-a\n+b\n")
    assert extract(tmp_path, diff=diff) == 3
    assert "src/ghost.cpp" in capsys.readouterr().err


def test_malformed_diff_and_scan_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.diff"
    bad.write_text("--- a/x.cpp\n+++ b/x.cpp\n@@ -1,2 +1,2 @@\n-a\n+b\n")
    assert extract(tmp_path, diff=bad) == 2

    repo = tmp_path / "repo"
    repo.mkdir()
    (repo / "u.cpp").write_text("void f() {\n")
    diff = tmp_path / "u.diff"
    diff.write_text("--- /dev/null\n+++ b/u.cpp\n@@ -0,0 +1 @@\n+void f() {\n")
    code = main(["extract", "--repo", str(repo), "--diff", str(diff), "--out", str(tmp_path)])
    assert code == 2
    assert "u.cpp" in capsys.readouterr().err


def test_non_source_files_are_ignored(tmp_path, capsys):
    diff = tmp_path / "doc.diff"
    diff.write_text("--- a/README.md\n+++ b/README.md\n@@ -1 +1 @@\n-a\n+b\n")
    assert extract(tmp_path, "--commit-id", "docs", diff=diff) == 0
    assert porcelain(capsys.readouterr().out)["files"] == "0"


def test_compdb_entries_required_and_recorded(tmp_path, capsys):
    entries = [
        {"directory": str(REPO), "file": f"src/{p}", "arguments": ["c++", "-Iinclude", "-DFIXTURE=1", "-std=c++17", "-c", f"src/{p}"]}
        for p in ("game/player.cpp", "math/vec.cpp", "physics/collide.cpp")
    ]
    db = tmp_path / "compile_commands.json"
    db.write_text(json.dumps(entries))
    assert extract(tmp_path, "--compdb", str(db)) == 0
    doc = json.loads((tmp_path / f"{COMMIT}.sic.json").read_text())
    assert doc["frontend"]["src/math/vec.cpp"]["defines"] == ["FIXTURE=1"]

    db.write_text(json.dumps(entries[:2]))
    capsys.readouterr()
    assert extract(tmp_path, "--compdb", str(db)) == 3
    assert "physics/collide.cpp" in capsys.readouterr().err


def test_commit_via_vcs_command(tmp_path, capsys):
    cfg = tmp_path / "sicov.conf"
    cfg.write_text(f"vcs_command=cat {FIXTURES / 'commit.diff'}\n")
    code = main(["extract", "--repo", str(REPO), "--commit", "HEAD", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / f"{COMMIT}.list").exists()


# -- estimate -----------------------------------------------------------------


@pytest.mark.parametrize("argv,key,expected", [
    (["--mode", "fe", "--ifr", "0.0078"], "t_cpu", 2.0),
    (["--mode", "ir", "--ifr", "0.00715"], "t_cpu", 2.0),
    (["--files", "1"], "per", 0.0833),
    (["--ifr-cap", "0.01", "--per-commit-ifr", "5e-6"], "commit_budget", 2000),
    (["--budget", "2.0", "--per-commit-ifr", "1.11e-5"], "commit_budget", 703),
    (["--mode", "ir", "--fps", "full"], "fps_ratio", 0.369),
])
def test_estimate_examples(capsys, argv, key, expected):
    assert main(["estimate", "--porcelain", *argv]) == 0
    out = porcelain(capsys.readouterr().out)
    assert float(out[key]) == pytest.approx(expected, abs=0.01)


def test_estimate_per_is_exact(capsys):
    main(["estimate", "--porcelain", "--files", "1"])
    assert porcelain(capsys.readouterr().out)["per"] == "0.0833"


@pytest.mark.parametrize("argv", [[], ["--ifr", "0.1", "--files", "2"], ["--files", "1", "--per-commit-ifr", "1e-5"], ["--mode", "pgo", "--ifr", "0.1"]])
def test_estimate_usage_errors(capsys, argv):
    assert main(["estimate", *argv]) == 64


def test_estimate_domain_error_is_usage(capsys):
    assert main(["estimate", "--ifr", "1.5"]) == 64
    assert main(["estimate", "--budget", "1.0"]) == 64


def test_estimate_uses_config_coefficients(tmp_path, capsys):
    cfg = tmp_path / "m.conf"
    cfg.write_text("slope_fe=100\n")
    assert main(["estimate", "--porcelain", "--config", str(cfg), "--ifr", "0.01"]) == 0
    out = porcelain(capsys.readouterr().out)
    assert out["slope"] == "100" and float(out["t_cpu"]) == pytest.approx(2.0)


def test_estimate_plot(tmp_path, capsys):
    png = tmp_path / "tcpu.png"
    assert main(["estimate", "--ifr", "0.0078", "--plot", str(png)]) == 0
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


# -- report -------------------------------------------------------------------


def ingest(store, sic, *extra, build_id="fixture-build-1"):
    return main(["report", "ingest", "--sic", str(sic), "--records", str(FIXTURES / "commit.records"),
                 "--build-id", build_id, "--store", str(store), "--porcelain", *extra])


def test_ingest_show_conflict_force_merge(tmp_path, capsys):
    extract(tmp_path)
    sic = tmp_path / f"{COMMIT}.sic.json"
    store = tmp_path / "store"
    capsys.readouterr()

    assert ingest(store, sic) == 0
    assert float(porcelain(capsys.readouterr().out)["commit_coverage"]) == 0.5
    assert ingest(store, sic) == 4
    assert "fixture-build-1" in capsys.readouterr().err
    assert ingest(store, sic, "--force") == 0
    assert ingest(store, sic, "--merge") == 0
    capsys.readouterr()

    assert main(["report", "show", "--build-id", "fixture-build-1", "--store", str(store), "--porcelain"]) == 0
    out = porcelain(capsys.readouterr().out)
    expected = json.loads((FIXTURES / "commit.expected.json").read_text())
    assert float(out["commit_coverage"]) == expected["commit_coverage"]
    hits = {out[f"target.{i}.pattern"]: int(out[f"target.{i}.hits"]) for i in range(int(out["total_targets"]))}
    assert hits == {k: 2 * v for k, v in expected["per_target_hits"].items()}


def test_show_unknown_build_is_not_found(tmp_path, capsys):
    assert main(["report", "show", "--build-id", "nope", "--store", str(tmp_path)]) == 5


def test_store_from_environment(tmp_path, capsys, monkeypatch):
    extract(tmp_path)
    monkeypatch.setenv("SICOV_STORE", str(tmp_path / "env-store"))
    code = main(["report", "ingest", "--sic", str(tmp_path / f"{COMMIT}.sic.json"),
                 "--records", str(FIXTURES / "commit.records"), "--build-id", "b1"])
    assert code == 0
    assert (tmp_path / "env-store" / "b1.json").exists()


def test_bad_records_exit_2(tmp_path, capsys):
    extract(tmp_path)
    bad = tmp_path / "bad.records"
    bad.write_text("_Z1fv -3\n")
    code = main(["report", "ingest", "--sic", str(tmp_path / f"{COMMIT}.sic.json"), "--records", str(bad),
                 "--build-id", "b", "--store", str(tmp_path / "s")])
    assert code == 2
    assert "line 1" in capsys.readouterr().err


def test_force_and_merge_are_exclusive(tmp_path, capsys):
    code = main(["report", "ingest", "--sic", "x", "--records", "y", "--build-id", "b", "--force", "--merge"])
    assert code == 64
    assert main(["--help"]) == 0


def test_report_plot_and_human_output(tmp_path, capsys):
    extract(tmp_path)
    ingest(tmp_path / "s", tmp_path / f"{COMMIT}.sic.json")
    capsys.readouterr()
    png = tmp_path / "hits.png"
    assert main(["report", "show", "--build-id", "fixture-build-1", "--store", str(tmp_path / "s"), "--plot", str(png)]) == 0
    text = capsys.readouterr().out
    assert "commit_coverage:" in text and "math::length" in text
    assert png.read_bytes()[:4] == b"\x89PNG"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sicov", "estimate", "--porcelain", "--files", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert float(porcelain(proc.stdout)["per"]) == pytest.approx(0.2499)
    proc = subprocess.run([sys.executable, "-m", "sicov", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 64
