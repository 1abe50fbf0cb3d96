import json
from pathlib import Path

import requests

from nexus.fixtures import (
    FixtureManifest,
    MockHarvestServer,
    generate_fixtures,
    mock_harvest_server,
    records_from_nested_file,
)
from nexus.ingest import load_profile, parse_nested, parse_table
from nexus.vocab import load_thesaurus_file


class TestDeterminism:
    def test_same_seed_gives_byte_identical_corpus(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        generate_fixtures(str(a), seed=42)
        generate_fixtures(str(b), seed=42)
        names = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
        assert names == sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_different_seed_changes_some_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        generate_fixtures(str(a), seed=1)
        generate_fixtures(str(b), seed=2)
        assert (a / "bt-files.csv").read_bytes() != (b / "bt-files.csv").read_bytes()


class TestManifest:
    def test_counts_match_parser_results(self, fixture_dir):
        manifest = FixtureManifest.load(f"{fixture_dir}/manifest.json")
        base = Path(fixture_dir)
        for name, profile_name in [("jmp-terezin", "jmp"), ("yv-terezin", "yv")]:
            entry = manifest.entry(name)
            profile = load_profile(str(base / f"profiles/{profile_name}.json"))
            units = parse_nested((base / entry.path).read_bytes(), profile)
            assert len(units) == entry.expected_counts["units"]
            assert sum(1 for u in units if u.parent is None) == entry.expected_counts["trees"]
            assert max(u.global_id.count("/") + 1 for u in units) \
                == entry.expected_counts["maxLevels"]
        for name, profile_name in [("bt-files", "bt"), ("tm-items", "tm")]:
            entry = manifest.entry(name)
            profile = load_profile(str(base / f"profiles/{profile_name}.json"))
            units = parse_table((base / entry.path).read_bytes(), profile)
            assert len(units) == entry.expected_counts["units"]
        thesaurus = load_thesaurus_file(str(base / "thesaurus.tsv"))
        assert len(thesaurus) == manifest.entry("thesaurus").expected_counts["concepts"]
        pair_lines = [l for l in (base / "concordance.tsv").read_text().splitlines() if l]
        assert len(pair_lines) == manifest.entry("concordance").expected_counts["pairs"]

    def test_jmp_contains_depth_ten_path(self, fixture_dir):
        entry = FixtureManifest.load(f"{fixture_dir}/manifest.json").entry("jmp-terezin")
        assert entry.expected_counts["maxLevels"] == 10

    def test_copy_groups_reference_parsable_units(self, fixture_dir):
        manifest = FixtureManifest.load(f"{fixture_dir}/manifest.json")
        base = Path(fixture_dir)
        local_paths = {
            "jmp": {u.global_id for u in parse_nested(
                (base / "jmp-terezin.xml").read_bytes(),
                load_profile(str(base / "profiles/jmp.json")))},
            "yv": {u.global_id for u in parse_nested(
                (base / "yv-terezin.xml").read_bytes(),
                load_profile(str(base / "profiles/yv.json")))},
            "bt": {u.global_id for u in parse_table(
                (base / "bt-files.csv").read_bytes(),
                load_profile(str(base / "profiles/bt.json")))},
            "tm": {u.global_id for u in parse_table(
                (base / "tm-items.csv").read_bytes(),
                load_profile(str(base / "profiles/tm.json")))},
        }
        assert len(manifest.copy_groups) >= 3
        for group in manifest.copy_groups:
            repos = set()
            for code, path in group["members"]:
                assert path in local_paths[code], (code, path)
                repos.add(code)
            assert len(repos) >= 2  # cross-archive by construction


class TestMockServer:
    def test_pagination_and_request_log(self, fixture_dir, tmp_path):
        # synthetic 25-record feed exercises three pages
        records = []
        for i in range(25):
            payload = (f"<unit><id>u{i}</id><title>T{i}</title><level>file</level>"
                       f"<date>1944</date></unit>").encode()
            records.append((f"u{i}", f"2013-02-{i + 1:02d}T00:00:00Z", payload))
        server = MockHarvestServer(records, page_size=10)
        try:
            from nexus.ingest import RetryPolicy, harvest
            got = harvest(server.url, retry=RetryPolicy(1, 0))
            assert len(got) == 25
            assert len([e for e in server.log if e.get("verb") == "ListRecords"]) == 3
        finally:
            server.close()

    def test_from_filter_excluding_everything_gives_single_empty_page(self, fixture_dir):
        server = mock_harvest_server(f"{fixture_dir}/jmp-terezin.xml", page_size=10)
        try:
            response = requests.get(server.url, params={
                "verb": "ListRecords", "from": "2099-01-01T00:00:00Z"})
            assert b"<record identifier" not in response.content
            assert b"resumptionToken" not in response.content
        finally:
            server.close()

    def test_get_record_roundtrip(self, fixture_dir):
        records = records_from_nested_file(f"{fixture_dir}/jmp-terezin.xml")
        server = MockHarvestServer(records, page_size=10)
        try:
            response = requests.get(server.url, params={
                "verb": "GetRecord", "identifier": records[0][0]})
            assert records[0][0].encode() in response.content
        finally:
            server.close()
