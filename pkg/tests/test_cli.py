import json

import pytest
from click.testing import CliRunner

from nexus.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def invoke(runner, data_dir, *args):
    return runner.invoke(main, ["--data-dir", str(data_dir), *args])


@pytest.fixture()
def bootstrapped(runner, fixture_dir, tmp_path):
    data_dir = tmp_path / "cli-data"
    result = invoke(runner, data_dir, "bootstrap", "--fixtures", fixture_dir)
    assert result.exit_code == 0, result.output
    return data_dir


class TestBasics:
    def test_unknown_subcommand_exits_2_with_usage_on_stderr(self, runner, tmp_path):
        result = invoke(runner, tmp_path, "frobnicate")
        assert result.exit_code == 2
        assert "Usage" in result.stderr or "No such command" in result.stderr

    def test_fixtures_generation(self, runner, tmp_path):
        result = invoke(runner, tmp_path / "d", "fixtures", "--out",
                        str(tmp_path / "fx"), "--seed", "7")
        assert result.exit_code == 0
        manifest = json.loads(result.output)
        assert manifest["seed"] == 7
        assert (tmp_path / "fx" / "manifest.json").exists()

    def test_bootstrap_reports_loads(self, runner, fixture_dir, tmp_path):
        result = invoke(runner, tmp_path / "d", "bootstrap", "--fixtures", fixture_dir)
        assert result.exit_code == 0
        loaded = json.loads(result.output)
        assert loaded["repositories"] == 4
        assert loaded["thesaurus"] > 0


class TestIngestSearchAsk:
    def test_ingest_file_then_search_then_ask(self, runner, fixture_dir, bootstrapped):
        result = invoke(runner, bootstrapped, "ingest", "--repo", "yv",
                        "--profile", f"{fixture_dir}/profiles/yv.json",
                        "--input", f"{fixture_dir}/yv-terezin.xml")
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["created"] == 9
        search = invoke(runner, bootstrapped, "search", "Transportliste", "--lang", "en,de,cs")
        assert search.exit_code == 0
        hits = json.loads(search.output)["hits"]
        assert any(h["unitGlobalId"].startswith("yv/") for h in hits)
        ask = invoke(runner, bootstrapped, "ask",
                     "Where can I find transport lists?", "--lang", "en")
        assert ask.exit_code == 0
        ranked = json.loads(ask.output)["ranked"]
        assert ranked and ranked[0]["repositoryEhriId"] == "2798"

    def test_ingest_from_harvest_url(self, runner, fixture_dir, bootstrapped):
        from nexus.fixtures import mock_harvest_server
        server = mock_harvest_server(f"{fixture_dir}/jmp-terezin.xml", page_size=1)
        try:
            result = invoke(runner, bootstrapped, "ingest", "--repo", "jmp",
                            "--profile", f"{fixture_dir}/profiles/jmp.json",
                            "--input", server.url)
            assert result.exit_code == 0, result.output
            assert json.loads(result.output)["created"] == 20
        finally:
            server.close()

    def test_unknown_repo_is_domain_error_exit_1(self, runner, fixture_dir, bootstrapped):
        result = invoke(runner, bootstrapped, "ingest", "--repo", "ghost",
                        "--profile", f"{fixture_dir}/profiles/yv.json",
                        "--input", f"{fixture_dir}/yv-terezin.xml")
        assert result.exit_code == 1
        assert "unknown-repository" in result.stderr


class TestVocabCommands:
    def test_lookup_and_expand(self, runner, bootstrapped):
        lookup = invoke(runner, bootstrapped, "vocab", "lookup", "Tagesbefehl")
        assert lookup.exit_code == 0
        assert json.loads(lookup.output) == ["kw-daily-bulletin"]
        expand = invoke(runner, bootstrapped, "vocab", "expand", "ghetto",
                        "--lang", "en,de,cs")
        assert expand.exit_code == 0
        expansion = json.loads(expand.output)
        assert "ghetto theresienstadt" in expansion["expandedTerms"]


class TestGuideCommands:
    def test_build_suggest_and_confirm(self, runner, fixture_dir, bootstrapped):
        for code, suffix in [("jmp", "jmp-terezin.xml"), ("yv", "yv-terezin.xml"),
                             ("bt", "bt-files.csv"), ("tm", "tm-items.csv")]:
            result = invoke(runner, bootstrapped, "ingest", "--repo", code,
                            "--profile", f"{fixture_dir}/profiles/{code}.json",
                            "--input", f"{fixture_dir}/{suffix}")
            assert result.exit_code == 0, result.output
        build = invoke(runner, bootstrapped, "guide", "build",
                       "--config", f"{fixture_dir}/guide-terezin.json")
        assert build.exit_code == 0, build.output
        assert json.loads(build.output)["unitCount"] == 73
        suggest = invoke(runner, bootstrapped, "guide", "suggest-copies",
                         "--config", f"{fixture_dir}/guide-terezin.json",
                         "--threshold", "0.85", "--confirm", "--source", "review")
        assert suggest.exit_code == 0, suggest.output
        body = json.loads(suggest.output)
        assert len(body["confirmed"]) == len(body["candidates"]) >= 8
        # copies persisted: a fresh CLI process (new portal) still sees them
        again = invoke(runner, bootstrapped, "guide", "suggest-copies",
                       "--config", f"{fixture_dir}/guide-terezin.json",
                       "--threshold", "0.85")
        assert json.loads(again.output)["candidates"] == []

    def test_map_and_timeline(self, runner, fixture_dir, bootstrapped):
        result = invoke(runner, bootstrapped, "guide", "map",
                        "--config", f"{fixture_dir}/guide-terezin.json")
        assert result.exit_code == 0
        assert json.loads(result.output)["type"] == "FeatureCollection"
        timeline = invoke(runner, bootstrapped, "guide", "timeline",
                          "--config", f"{fixture_dir}/guide-terezin.json",
                          "--from", "1945-01", "--to", "1945-12")
        assert timeline.exit_code == 0
        assert "ev-liberation" in [e["eventId"] for e in json.loads(timeline.output)]


class TestExportValidate:
    def test_export_then_validate_round_trip(self, runner, fixture_dir, bootstrapped, tmp_path):
        invoke(runner, bootstrapped, "ingest", "--repo", "tm",
               "--profile", f"{fixture_dir}/profiles/tm.json",
               "--input", f"{fixture_dir}/tm-items.csv")
        out = tmp_path / "g.snap"
        export = invoke(runner, bootstrapped, "export", "--out", str(out))
        assert export.exit_code == 0, export.output
        validate = invoke(runner, bootstrapped, "validate", str(out))
        assert validate.exit_code == 0, validate.output
        body = json.loads(validate.output)
        assert body["problems"] == []
        assert body["nodes"] > 0

    def test_validate_corrupt_snapshot_exits_1(self, runner, bootstrapped, tmp_path):
        bad = tmp_path / "bad.snap"
        bad.write_text("nexus-graph v1\nN\tunit\n", encoding="utf-8")
        result = invoke(runner, bootstrapped, "validate", str(bad))
        assert result.exit_code == 1
        assert "malformed-snapshot" in result.stderr

    def test_serve_with_bad_config_exits_2(self, runner, tmp_path):
        missing = tmp_path / "absent.json"
        result = invoke(runner, tmp_path / "d", "serve", "--config", str(missing))
        assert result.exit_code == 2
