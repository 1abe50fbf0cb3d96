#!/usr/bin/env python3
"""Capture frozen API responses for the explorer frontend's contract tests.

Runs the full fixture scenario against a real service and saves the JSON
responses the UI tests replay through their fetch stub. Re-run whenever the
API contract changes, then re-run the frontend tests.

Usage: python scripts/freeze_api_fixtures.py [--out frontend/test/fixtures]
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path
from urllib.parse import urlencode

import requests

from nexus.fixtures import generate_fixtures, mock_harvest_server
from nexus.guide import GuideConfig
from nexus.portal import Portal, ServiceConfig
from nexus.service import PortalHTTPServer

BULLETIN = "jmp/terezin/bulletins/tb-440501"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="frontend/test/fixtures")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    base = Path(tempfile.mkdtemp(prefix="nexus-freeze-"))
    fixture_dir = base / "fixtures"
    generate_fixtures(str(fixture_dir), seed=42)
    config = ServiceConfig(
        data_directory=str(base / "data"),
        thesaurus_files=[str(fixture_dir / "thesaurus.tsv")],
        concordance_files=[str(fixture_dir / "concordance.tsv")],
        persons_files=[str(fixture_dir / "persons.jsonl")],
        places_files=[str(fixture_dir / "places.jsonl")],
        events_files=[str(fixture_dir / "events.jsonl")],
        repositories_files=[str(fixture_dir / "repositories.jsonl")],
    )
    portal = Portal.open(config)
    http = PortalHTTPServer(portal)
    http.start_background()
    api = f"{http.url}/api/v1"
    harvester = mock_harvest_server(str(fixture_dir / "jmp-terezin.xml"), page_size=5)
    captured: dict[str, object] = {}
    try:
        requests.post(f"{api}/ingest", files={
            "repo": (None, "jmp"),
            "profile": ("jmp.json", (fixture_dir / "profiles/jmp.json").read_bytes()),
            "url": (None, harvester.url)})
        for code, name in [("yv", "yv-terezin.xml"), ("bt", "bt-files.csv"),
                           ("tm", "tm-items.csv")]:
            requests.post(f"{api}/ingest", files={
                "repo": (None, code),
                "profile": (f"{code}.json",
                            (fixture_dir / f"profiles/{code}.json").read_bytes()),
                "data": (name, (fixture_dir / name).read_bytes())})
        portal.build_guide(GuideConfig.load(str(fixture_dir / "guide-terezin.json")))
        for candidate in portal.suggest_copies("terezin", 0.85):
            portal.confirm_copy("terezin", candidate.unit_a, candidate.unit_b, "frozen corpus")

        def grab(path: str, params: dict | None = None) -> None:
            """Store the response under the request's path?query key."""
            key = f"/api/v1{path}"
            if params:
                key += "?" + urlencode(sorted(params.items()))
            captured[key] = requests.get(f"{api}{path}", params=params).json()

        grab("/health")
        grab("/repositories")
        grab("/search", {"q": "Tagesbefehl", "lang": "en,de,cs"})
        grab("/search", {"facets": "repository:1203", "lang": "en,de,cs",
                         "q": "Tagesbefehl"})
        # facet pairs in the UI's canonical order: alphabetical by facet name
        grab("/search", {"facets": "level:file,repository:1203", "lang": "en,de,cs",
                         "q": "Tagesbefehl"})
        grab("/search", {"lang": "en,de,cs", "q": "denní rozkaz"})
        grab("/search", {"lang": "en", "q": "nothingmatchesthis"})
        grab(f"/units/{BULLETIN}")
        grab("/units/jmp/terezin")
        grab("/units/tm/tm-0003")
        grab("/guide/terezin")
        grab("/guide/terezin/map")
        grab("/guide/terezin/timeline", {"from": "1941", "to": "1946"})
        grab("/guide/terezin/timeline", {"from": "1945-01", "to": "1945-12"})
        grab("/guide/terezin/persons/per-scheck")
    finally:
        harvester.close()
        http.shutdown()

    target = out / "responses.json"
    target.write_text(json.dumps(captured, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
                      encoding="utf-8")
    print(f"froze {len(captured)} responses into {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
