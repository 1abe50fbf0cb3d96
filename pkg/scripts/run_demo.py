#!/usr/bin/env python3
"""End-to-end demo of the portal over the synthetic four-archive corpus.

Generates fixtures, starts the HTTP service on an ephemeral port, ingests
one archive through the mock harvest endpoint and three through file import,
then walks the research surfaces: expanded search, helpdesk routing, the
guide map and timeline, and cross-archive copy confirmation.

Usage: python scripts/run_demo.py [--seed 42] [--keep DIR]
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

import requests

from nexus.fixtures import generate_fixtures, mock_harvest_server
from nexus.guide import GuideConfig
from nexus.portal import Portal, ServiceConfig
from nexus.service import PortalHTTPServer


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--keep", default=None,
                        help="Directory to keep fixtures and data in (default: temp)")
    args = parser.parse_args()

    base = Path(args.keep) if args.keep else Path(tempfile.mkdtemp(prefix="nexus-demo-"))
    fixture_dir = base / "fixtures"
    manifest = generate_fixtures(str(fixture_dir), seed=args.seed)
    print(f"fixtures: {fixture_dir} ({len(manifest.entries)} files)")

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
    print(f"service:  {http.url}")

    harvester = mock_harvest_server(str(fixture_dir / "jmp-terezin.xml"), page_size=1)
    try:
        print("\n== ingest ==")
        report = requests.post(f"{api}/ingest", files={
            "repo": (None, "jmp"),
            "profile": ("jmp.json", (fixture_dir / "profiles/jmp.json").read_bytes()),
            "url": (None, harvester.url),
        }).json()
        print(f"jmp (harvested): created={report['created']} rejected={len(report['rejected'])}")
        for code, name in [("yv", "yv-terezin.xml"), ("bt", "bt-files.csv"),
                           ("tm", "tm-items.csv")]:
            report = requests.post(f"{api}/ingest", files={
                "repo": (None, code),
                "profile": (f"{code}.json",
                            (fixture_dir / f"profiles/{code}.json").read_bytes()),
                "data": (name, (fixture_dir / name).read_bytes()),
            }).json()
            print(f"{code} (file):      created={report['created']} "
                  f"rejected={len(report['rejected'])}")
        print("health:", requests.get(f"{api}/health").json())

        print("\n== multilingual search: 'Tagesbefehl' ==")
        result = requests.get(f"{api}/search",
                              params={"q": "Tagesbefehl", "lang": "en,de,cs"}).json()
        print(f"totalHits={result['totalHits']} "
              f"repositories={result['facetCounts']['repository']}")
        for hit in result["hits"][:5]:
            print(f"  {hit['score']:.3f}  {hit['unitGlobalId']}")
        print("expansion:", ", ".join(result["appliedExpansion"]["expandedTerms"]))

        print("\n== helpdesk ==")
        answer = requests.post(f"{api}/helpdesk/ask", json={
            "question": "Where can I find transport lists from Theresienstadt?",
            "languages": ["en"]}).json()
        for entry in answer["ranked"]:
            print(f"  {entry['score']:.3f}  {entry['repositoryEhriId']}  {entry['contact']}")

        print("\n== guide ==")
        portal.build_guide(GuideConfig.load(str(fixture_dir / "guide-terezin.json")))
        guide_view = requests.get(f"{api}/guide/terezin").json()
        print("access paths:", guide_view["stats"])
        feature_collection = requests.get(f"{api}/guide/terezin/map").json()
        for feature in feature_collection["features"]:
            print(f"  map {feature['id']}: {feature['properties']['linkedUnitCount']} units")
        timeline = requests.get(f"{api}/guide/terezin/timeline",
                                params={"from": "1941", "to": "1946"}).json()
        print("timeline:", [e["eventId"] for e in timeline])

        print("\n== copies ==")
        candidates = portal.suggest_copies("terezin", 0.85)
        for candidate in candidates:
            portal.confirm_copy("terezin", candidate.unit_a, candidate.unit_b, "demo run")
            print(f"  confirmed {candidate.unit_a} <-> {candidate.unit_b}"
                  f" ({candidate.similarity:.2f})")
        unit = requests.get(f"{api}/units/jmp/terezin/bulletins/tb-440501").json()
        print("daily bulletin copies:",
              [c["unitGlobalId"] for c in unit["copies"]])

        portal.save()
        print(f"\nsnapshot written under {config.data_directory}")
        return 0
    finally:
        harvester.close()
        http.shutdown()


if __name__ == "__main__":
    sys.exit(main())
