"""Run registry and digest helpers."""
import hashlib
import re

from config.settings import PROJECT_ROOT, Settings, settings
from database.sqlite_db import RunRegistry, get_registry
from shared.utils import digest_files, format_count, generate_id, sha256_file


def test_run_lifecycle(tmp_path):
    registry = RunRegistry(tmp_path / "runs.db")
    run_id = registry.start_run("sweep", tmp_path / "out", seed=3, jobs=2, tool_version="1.0.0")
    run = registry.get_run(run_id)
    assert run.status == "running" and run.jobs == 2 and run.finished_at is None

    registry.finish_run(run_id, "ok", manifest_digest="abc")
    run = registry.get_run(run_id)
    assert run.status == "ok"
    assert run.manifest_digest == "abc"
    assert run.finished_at is not None


def test_list_runs_newest_first_and_filtered(tmp_path):
    registry = RunRegistry(tmp_path / "runs.db")
    first = registry.start_run("fit", tmp_path)
    second = registry.start_run("sweep", tmp_path)
    third = registry.start_run("fit", tmp_path)
    assert [r.id for r in registry.list_runs()] == [third, second, first]
    assert [r.id for r in registry.list_runs(command="fit")] == [third, first]
    assert len(registry.list_runs(limit=1)) == 1


def test_finish_unknown_run(tmp_path):
    assert RunRegistry(tmp_path / "runs.db").finish_run("RUN-missing", "ok") is None


def test_get_registry_follows_settings():
    registry = get_registry()
    assert registry.db_path == settings.run_registry_path
    assert get_registry() is registry


def test_generate_id():
    assert re.fullmatch(r"RUN-\d{14}-[0-9A-F]{8}", generate_id())
    assert generate_id("X").startswith("X-")


def test_digests(tmp_path):
    (tmp_path / "b.txt").write_bytes(b"beta")
    (tmp_path / "a.txt").write_bytes(b"alpha")
    assert sha256_file(tmp_path / "a.txt") == hashlib.sha256(b"alpha").hexdigest()
    digests = digest_files([tmp_path / "b.txt", tmp_path / "a.txt"])
    assert list(digests) == ["a.txt", "b.txt"]
    nested = digest_files([tmp_path / "a.txt"], root=tmp_path.parent)
    assert list(nested) == [f"{tmp_path.name}/a.txt"]


def test_format_count():
    assert format_count(110592) == "110,592"


def test_default_registry_lives_outside_the_project(monkeypatch):
    monkeypatch.delenv("DSE_RUN_REGISTRY_PATH", raising=False)
    path = Settings(_env_file=None).run_registry_path
    assert PROJECT_ROOT not in path.parents
    assert path.name == "runs.db"
