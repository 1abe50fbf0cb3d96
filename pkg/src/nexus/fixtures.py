"""Deterministic desk-scale fixture corpus and mock harvest endpoint.

Four synthetic archive exports mirror the divergent cataloguing shapes the
portal has to harmonize: one deeply nested finding aid (up to ten levels),
one two-level subcollection/file export, one flat file-level table, and one
item-level table. Shared motifs (a daily bulletin, a transport list, a
department activity report) are planted across archives with identical
normalized titles so copy detection has known ground truth. All content is
synthetic; names and shapes are period-plausible catalogue text, not real
archival records.
"""

from __future__ import annotations

import csv
import io
import json
import random
import threading
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import date, timedelta
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from nexus.core import DateSpan, DocumentaryUnit
from nexus.errors import DomainError
from nexus.ingest import canonical_profile, profile_to_dict, serialize_units

FIXTURE_KINDS = frozenset(
    {"nested-xml", "delimited-table", "thesaurus", "concordance", "places",
     "events", "profile", "persons", "repositories", "guide-config"}
)


@dataclass
class ManifestEntry:
    name: str
    kind: str
    path: str
    expected_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "path": self.path,
                "expectedCounts": self.expected_counts}


@dataclass
class FixtureManifest:
    seed: int
    entries: list[ManifestEntry] = field(default_factory=list)
    copy_groups: list[dict] = field(default_factory=list)

    def entry(self, name: str) -> ManifestEntry:
        for entry in self.entries:
            if entry.name == name:
                return entry
        raise DomainError("unknown-fixture", f"no fixture entry {name!r}", name=name)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "entries": [e.to_dict() for e in self.entries],
            "copyGroups": self.copy_groups,
        }

    @classmethod
    def load(cls, path: str) -> "FixtureManifest":
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
        manifest = cls(seed=raw["seed"])
        manifest.entries = [
            ManifestEntry(e["name"], e["kind"], e["path"], dict(e.get("expectedCounts", {})))
            for e in raw["entries"]
        ]
        manifest.copy_groups = list(raw.get("copyGroups", []))
        return manifest


def _unit(path: str, local: str, level: str, title: str, parent: Optional[str] = None,
          dates: Optional[list[str]] = None, langs: Optional[list[str]] = None,
          scope: str = "", extent: str = "", keywords: Optional[list[str]] = None,
          places: Optional[list[str]] = None, persons: Optional[list[str]] = None,
          departments: Optional[list[str]] = None, system: str = "") -> DocumentaryUnit:
    return DocumentaryUnit(
        global_id=path,
        local_id=local,
        level=level,
        title=title,
        parent=parent,
        dates_of_creation=[DateSpan.from_text(d) for d in (dates or [])],
        language_of_material=list(langs or []),
        language_of_description="en",
        scope_content=scope,
        extent=extent,
        keywords=list(keywords or []),
        places=list(places or []),
        persons=list(persons or []),
        departments=list(departments or []),
        source_system=system,
    )


_SCOPE_POOL = (
    "Administrative records kept by the self-administration office.",
    "Documents collected from former prisoners after the war.",
    "Inventory prepared during the postwar documentation effort.",
    "Materials describing daily life and work assignments in the ghetto.",
    "Copies assembled for the subject-oriented reference files.",
    "Records relating to transports, housing and provisioning.",
)

_EXTENT_POOL = ("1 folder", "2 folders", "3 folders", "12 pages", "1 box", "5 sheets")


def _jmp_units(rng: random.Random) -> list[DocumentaryUnit]:
    """Deep nested finding aid: one ten-level chain plus sibling series."""
    sys_id = "jmp-catalog"

    def pick_scope() -> str:
        return rng.choice(_SCOPE_POOL)

    units: list[DocumentaryUnit] = []
    chain = [
        ("terezin", "fonds", "Terezín Collection", None),
        ("selfadmin", "subfonds", "Records of the Jewish self-administration", "terezin"),
        ("technical", "series", "Technical Department", "terezin/selfadmin"),
        ("drawings", "subseries", "Drawing office", "terezin/selfadmin/technical"),
        ("graphics", "subseries", "Graphic documentation unit",
         "terezin/selfadmin/technical/drawings"),
        ("artworks", "file", "Artwork documentation files",
         "terezin/selfadmin/technical/drawings/graphics"),
        ("sketches", "file", "Sketch folders 1942-1944",
         "terezin/selfadmin/technical/drawings/graphics/artworks"),
        ("folder-04", "file", "Folder 4, hidden sketches",
         "terezin/selfadmin/technical/drawings/graphics/artworks/sketches"),
        ("sheet-11", "item", "Sheet 11, barracks interior",
         "terezin/selfadmin/technical/drawings/graphics/artworks/sketches/folder-04"),
        ("sheet-11v", "item", "Sheet 11 verso, pencil study",
         "terezin/selfadmin/technical/drawings/graphics/artworks/sketches/folder-04/sheet-11"),
    ]
    for local, level, title, parent in chain:
        path = f"{parent}/{local}" if parent else local
        unit = _unit(path, local, level, title, parent, dates=["1941/1945"],
                     scope=pick_scope(), extent=rng.choice(_EXTENT_POOL), system=sys_id)
        units.append(unit)
    units[0].language_of_material = ["de", "cs"]
    units[2].departments = ["dep-technical"]
    units[5].keywords = ["kw-artwork"]
    units[5].dates_of_creation = [DateSpan.from_text("1942/1944")]
    units[8].dates_of_creation = [DateSpan.from_text("ca. 1943")]
    units[9].dates_of_creation = [DateSpan.from_text("ca. 1943")]

    bulletins = [
        _unit("terezin/bulletins", "bulletins", "series",
              "Daily bulletins (Tagesbefehle) of the self-administration", "terezin",
              dates=["1941/1945"], langs=["de"], scope=pick_scope(), extent="4 boxes",
              keywords=["kw-daily-bulletin"], departments=["dep-admin"], system=sys_id),
        _unit("terezin/bulletins/tb-440501", "tb-440501", "file", "Tagesbefehl 1.5.1944",
              "terezin/bulletins", dates=["1944-05-01"], langs=["de"],
              scope="Order of the day no. 312 issued by the self-administration.",
              extent="2 sheets", keywords=["kw-daily-bulletin"], places=["pl-magdeburg"],
              departments=["dep-admin"], system=sys_id),
        _unit("terezin/bulletins/tb-431120", "tb-431120", "file", "Tagesbefehl 20.11.1943",
              "terezin/bulletins", dates=["1943-11-20"], langs=["de"], scope=pick_scope(),
              extent="2 sheets", keywords=["kw-daily-bulletin"], departments=["dep-admin"],
              system=sys_id),
        _unit("terezin/bulletins/tb-440623", "tb-440623", "file", "Tagesbefehl 23.6.1944",
              "terezin/bulletins", dates=["1944-06-23"], langs=["de"], scope=pick_scope(),
              extent="2 sheets", keywords=["kw-daily-bulletin"], departments=["dep-admin"],
              system=sys_id),
    ]
    docproject = [
        _unit("terezin/docproject", "docproject", "subfonds",
              "Documentation Project (Dokumentační akce)", "terezin", dates=["1945/1946"],
              langs=["cs"], scope="Postwar collecting initiative records.", extent="6 boxes",
              keywords=["kw-testimony"], persons=["per-scheck"], system=sys_id),
        _unit("terezin/docproject/dp-testimonies", "dp-testimonies", "file",
              "Testimonies of liberated prisoners", "terezin/docproject",
              dates=["1945-05/1946-12"], langs=["cs"], scope=pick_scope(), extent="3 boxes",
              keywords=["kw-testimony"], persons=["per-scheck"], system=sys_id),
        _unit("terezin/docproject/dp-report-technical", "dp-report-technical", "file",
              "Zpráva o činnosti technického oddělení 1943", "terezin/docproject",
              dates=["1943"], langs=["cs"], scope=pick_scope(), extent="1 folder",
              departments=["dep-technical"], system=sys_id),
    ]
    herrmann = [
        _unit("herrmann", "herrmann", "fonds", "Heřman collection", None,
              dates=["1942/1945"], langs=["cs", "de"],
              scope="Documentation of cultural life collected inside the ghetto.",
              extent="2 boxes", persons=["per-herrmann"], system=sys_id),
        _unit("herrmann/her-theatre", "her-theatre", "file",
              "Theatre and recitation programmes", "herrmann", dates=["1942/1944"],
              langs=["cs", "de"], scope=pick_scope(), extent="1 folder",
              keywords=["kw-artwork"], persons=["per-herrmann"], system=sys_id),
        _unit("herrmann/her-photos", "her-photos", "file",
              "Photographs taken shortly after liberation", "herrmann", dates=["1945-05"],
              langs=["cs"], scope=pick_scope(), extent="40 prints", system=sys_id),
    ]
    return units + bulletins + docproject + herrmann


def _yv_units() -> list[tuple[dict, list[dict]]]:
    """Two-level export: subcollections containing files (raw field dicts,
    serialized with Yad-Vashem-style tag names)."""
    o64_files = [
        {"unitid": "o64-1", "unittitle": "Tagesbefehl 1.5.1944", "lvl": "file",
         "unitdate": "1944-05-01", "lang": "de",
         "abstract": "Copy of the daily bulletin issued on 1 May 1944.",
         "subject": ["kw-daily-bulletin"], "location": ["pl-magdeburg"]},
        {"unitid": "o64-2", "unittitle": "Transport lists 1942-1944", "lvl": "file",
         "unitdate": "1942/1944", "lang": "de",
         "abstract": "Transport lists saved from the central registry.",
         "subject": ["kw-transport-list"], "name": ["per-weisz"]},
        {"unitid": "o64-3", "unittitle": "Transportliste Em, 1. Oktober 1944", "lvl": "file",
         "unitdate": "1944-10-01", "lang": "de",
         "abstract": "List for transport Em with handwritten corrections.",
         "subject": ["kw-transport-list"]},
        {"unitid": "o64-4", "unittitle": "Albums of the Council of Elders departments",
         "lvl": "file", "unitdate": "1943/1944", "lang": "de",
         "abstract": "Albums describing the activity of the departments.",
         "dept": ["dep-admin"], "name": ["per-weisz"]},
        {"unitid": "o64-5", "unittitle": "Memoirs and personal documents", "lvl": "file",
         "unitdate": "1945/1960", "lang": "he",
         "abstract": "Personal papers donated by former prisoners.",
         "subject": ["kw-testimony"]},
    ]
    o7_files = [
        {"unitid": "o7-1", "unittitle": "Testimonies collected 1945-1946", "lvl": "file",
         "unitdate": "1945/1946", "lang": "cs",
         "abstract": "Testimony files from the postwar documentation initiative.",
         "subject": ["kw-testimony"], "name": ["per-scheck"]},
        {"unitid": "o7-2", "unittitle": "Documentation Project correspondence", "lvl": "file",
         "unitdate": "1945/1946", "lang": "cs",
         "abstract": "Letters concerning the collecting initiative.",
         "name": ["per-scheck"]},
    ]
    o64 = {"unitid": "o64", "unittitle": "Theresienstadt Collection O.64",
           "lvl": "subcollection", "unitdate": "1941/1979", "lang": "de",
           "abstract": "Main Theresienstadt holdings including transport lists."}
    o7 = {"unitid": "o7", "unittitle": "Documentation Project files O.7",
          "lvl": "subcollection", "unitdate": "1945/1946", "lang": "cs",
          "abstract": "Files transferred from the postwar documentation initiative."}
    return [(o64, o64_files), (o7, o7_files)]


def _yv_xml(trees: list[tuple[dict, list[dict]]]) -> bytes:
    root = ET.Element("units")
    root.set("system", "yv-export")

    def fill(element: ET.Element, record: dict) -> None:
        for tag in ("unitid", "unittitle", "lvl", "unitdate", "lang", "abstract"):
            if record.get(tag):
                sub = ET.SubElement(element, tag)
                sub.text = record[tag]
        for tag in ("subject", "location", "name", "dept"):
            for value in record.get(tag, []):
                sub = ET.SubElement(element, tag)
                sub.text = value

    for parent_record, children in trees:
        parent_el = ET.SubElement(root, "unit")
        fill(parent_el, parent_record)
        for child in children:
            child_el = ET.SubElement(parent_el, "unit")
            fill(child_el, child)
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)


_BT_HEADER = ["code", "title", "date", "language", "summary", "keywords",
              "places", "persons", "department", "extent"]


def _bt_rows(rng: random.Random) -> list[list[str]]:
    rows = [
        ["bt-101", "Children newspaper, issue 12", "1.3.1944", "cs",
         "Hand-copied children newspaper produced in the youth home.",
         "kw-newspaper", "", "", "dep-youth", "1 issue"],
        ["bt-102", "Children newspaper, issue 13", "15.4.1944", "cs",
         "Hand-copied children newspaper produced in the youth home.",
         "kw-newspaper", "", "", "dep-youth", "1 issue"],
        ["bt-120", "Tagesbefehl 1.5.1944", "1.5.1944", "de",
         "Copy of the daily bulletin kept in a subject file.",
         "kw-daily-bulletin", "pl-magdeburg", "", "dep-admin", "2 sheets"],
        ["bt-077", "Zpráva o činnosti technického oddělení 1943", "1943", "cs",
         "Subject file with a copied activity report.",
         "", "", "", "dep-technical", "1 folder"],
        ["bt-130", "Artwork by members of the drawing office", "12.8.1943", "de",
         "Original drawings donated by survivors.",
         "kw-artwork", "", "", "dep-technical", "9 sheets"],
        ["bt-131", "Scheck correspondence about collecting", "20.10.1945", "cs",
         "Letters on gathering documents for the documentation initiative.",
         "kw-testimony", "", "per-scheck", "", "1 folder"],
    ]
    themes = [
        ("Subject file: housing in the barracks", "kw-testimony", "pl-dresden", ""),
        ("Subject file: provisioning and kitchens", "", "", "dep-admin"),
        ("Subject file: medical care", "", "", "dep-health"),
        ("Subject file: youth homes", "kw-testimony", "", "dep-youth"),
        ("Subject file: cultural evenings", "kw-artwork", "", "dep-culture"),
        ("Testimony of a former prisoner", "kw-testimony", "", ""),
        ("Memoir pages donated by a member", "kw-testimony", "", ""),
    ]
    day = 1
    for i in range(14):
        title, keyword, place, department = themes[i % len(themes)]
        rows.append([
            f"bt-{200 + i}",
            f"{title}, volume {i // len(themes) + 1}",
            f"{day}.6.194{5 + i % 2}",
            rng.choice(["cs", "de", "he"]),
            rng.choice(_SCOPE_POOL),
            keyword, place, "", department,
            rng.choice(_EXTENT_POOL),
        ])
        day += 2
    return rows


_TM_HEADER = ["inv_no", "item_title", "created", "lang", "note", "subjects", "sites", "people"]


def _tm_rows(rng: random.Random) -> list[list[str]]:
    rows = [
        ["tm-0001", "Tagesbefehl 1.5.1944", "1944-05-01", "de",
         "Single bulletin sheet found in Terezín after the war.",
         "kw-daily-bulletin", "pl-terezin", ""],
        ["tm-0002", "Transportliste Em, 1. Oktober 1944", "1944-10-01", "de",
         "Carbon copy of the transport list.", "kw-transport-list", "", ""],
        ["tm-0003", "Deník Egona Redlicha", "1942-01-01/1944-10-22", "cs",
         "Diary found in Terezín decades after the liberation.",
         "kw-testimony", "pl-terezin", "per-redlich"],
        ["tm-0004", "Propaganda film stills", "1944", "de",
         "Stills from the propaganda filming in the beautified ghetto.",
         "kw-artwork", "pl-terezin", ""],
        ["tm-0005", "Founding order, typescript copy", "1941-11-24", "de",
         "Copy of the order establishing the ghetto administration.",
         "", "pl-small-fortress", ""],
    ]
    motifs = [
        ("Testimony record", "kw-testimony", "", ""),
        ("Drawing, interior of the barracks", "kw-artwork", "pl-dresden", ""),
        ("Card from the prisoner card file", "kw-card-file", "", ""),
        ("Found document, work assignment slip", "", "pl-magdeburg", ""),
        ("Letter smuggled out of the ghetto", "", "", ""),
        ("Photograph taken after liberation", "", "pl-terezin", ""),
    ]
    for i in range(19):
        title, keyword, site, person = motifs[i % len(motifs)]
        year = 1942 + (i % 4)
        rows.append([
            f"tm-{100 + i:04d}",
            f"{title} no. {i + 1}",
            f"{year}-{(i % 12) + 1:02d}",
            rng.choice(["cs", "de"]),
            rng.choice(_SCOPE_POOL),
            keyword, site, person,
        ])
    return rows


_THESAURUS_ROWS = [
    # concept id, field, language, value
    ("kw-root", "prefLabel", "en", "Principal keywords"),
    ("kw-root", "prefLabel", "de", "Hauptschlagwörter"),
    ("kw-root", "prefLabel", "cs", "Hlavní hesla"),
    ("kw-root", "narrower", "-", "kw-ghetto"),
    ("kw-root", "narrower", "-", "kw-daily-bulletin"),
    ("kw-root", "narrower", "-", "kw-transport-list"),
    ("kw-root", "narrower", "-", "kw-artwork"),
    ("kw-root", "narrower", "-", "kw-newspaper"),
    ("kw-root", "narrower", "-", "kw-testimony"),
    ("kw-root", "narrower", "-", "kw-card-file"),
    ("kw-ghetto", "prefLabel", "en", "ghetto"),
    ("kw-ghetto", "prefLabel", "de", "Ghetto"),
    ("kw-ghetto", "prefLabel", "cs", "ghetto"),
    ("kw-ghetto", "narrower", "-", "kw-terezin-ghetto"),
    ("kw-terezin-ghetto", "prefLabel", "en", "Theresienstadt ghetto"),
    ("kw-terezin-ghetto", "prefLabel", "cs", "ghetto Terezín"),
    ("kw-terezin-ghetto", "prefLabel", "de", "Ghetto Theresienstadt"),
    ("kw-terezin-ghetto", "altLabel", "cs", "Terezín"),
    ("kw-terezin-ghetto", "altLabel", "de", "Theresienstadt"),
    ("kw-terezin-ghetto", "definition", "en",
     "The ghetto operating in the fortress town of Terezín, 1941-1945."),
    ("kw-daily-bulletin", "prefLabel", "en", "daily bulletin"),
    ("kw-daily-bulletin", "prefLabel", "de", "Tagesbefehl"),
    ("kw-daily-bulletin", "prefLabel", "cs", "denní rozkaz"),
    ("kw-daily-bulletin", "altLabel", "en", "order of the day"),
    ("kw-transport-list", "prefLabel", "en", "transport lists"),
    ("kw-transport-list", "prefLabel", "de", "Transportliste"),
    ("kw-transport-list", "prefLabel", "cs", "transportní listina"),
    ("kw-transport-list", "altLabel", "en", "transport list"),
    ("kw-artwork", "prefLabel", "en", "artwork"),
    ("kw-artwork", "prefLabel", "de", "Kunstwerk"),
    ("kw-artwork", "prefLabel", "cs", "výtvarné dílo"),
    ("kw-newspaper", "prefLabel", "en", "children newspapers"),
    ("kw-newspaper", "prefLabel", "de", "Kinderzeitschriften"),
    ("kw-newspaper", "prefLabel", "cs", "dětské časopisy"),
    ("kw-testimony", "prefLabel", "en", "testimony"),
    ("kw-testimony", "prefLabel", "de", "Zeugenaussage"),
    ("kw-testimony", "prefLabel", "cs", "svědectví"),
    ("kw-testimony", "altLabel", "en", "testimonies"),
    ("kw-card-file", "prefLabel", "en", "card file"),
    ("kw-card-file", "prefLabel", "de", "Kartei"),
    ("kw-card-file", "prefLabel", "cs", "kartotéka"),
    ("dep-root", "prefLabel", "en", "Council of Elders departments"),
    ("dep-root", "prefLabel", "de", "Abteilungen des Ältestenrates"),
    ("dep-root", "prefLabel", "cs", "oddělení Rady starších"),
    ("dep-root", "narrower", "-", "dep-technical"),
    ("dep-root", "narrower", "-", "dep-health"),
    ("dep-root", "narrower", "-", "dep-youth"),
    ("dep-root", "narrower", "-", "dep-culture"),
    ("dep-root", "narrower", "-", "dep-admin"),
    ("dep-technical", "prefLabel", "en", "Technical Department"),
    ("dep-technical", "prefLabel", "de", "Technische Abteilung"),
    ("dep-technical", "prefLabel", "cs", "technické oddělení"),
    ("dep-health", "prefLabel", "en", "Health Services"),
    ("dep-health", "prefLabel", "de", "Gesundheitswesen"),
    ("dep-health", "prefLabel", "cs", "zdravotnictví"),
    ("dep-youth", "prefLabel", "en", "Youth Welfare"),
    ("dep-youth", "prefLabel", "de", "Jugendfürsorge"),
    ("dep-youth", "prefLabel", "cs", "péče o mládež"),
    ("dep-culture", "prefLabel", "en", "Leisure Activities"),
    ("dep-culture", "prefLabel", "de", "Freizeitgestaltung"),
    ("dep-culture", "prefLabel", "cs", "volnočasové aktivity"),
    ("dep-admin", "prefLabel", "en", "Internal Administration"),
    ("dep-admin", "prefLabel", "de", "Innere Verwaltung"),
    ("dep-admin", "prefLabel", "cs", "vnitřní správa"),
]

_CONCORDANCE_ROWS = [
    ("JMP", "p-001", "per-scheck"),
    ("BT", "4711", "per-scheck"),
    ("TII", "t-99", "per-scheck"),
    ("JMP", "p-002", "per-herrmann"),
    ("TII", "t-12", "per-herrmann"),
    ("JMP", "p-003", "per-redlich"),
    ("TII", "t-31", "per-redlich"),
    ("TII", "t-44", "per-adler"),
    ("BT", "5302", "per-weisz"),
]

_PERSONS = [
    {
        "personId": "per-scheck",
        "names": [
            {"text": "Zeev Scheck", "lang": "en", "type": "primary"},
            {"text": "Zeev Šek", "lang": "cs", "type": "variant"},
        ],
        "lifeDates": "1920/1978",
        "biography": "Organizer of the postwar documentation initiative that collected "
                     "testimonies, documents and artwork about the ghetto.",
    },
    {
        "personId": "per-herrmann",
        "names": [
            {"text": "Karel Herrmann", "lang": "cs", "type": "primary"},
            {"text": "Karel Heřman", "lang": "cs", "type": "variant"},
        ],
        "lifeDates": "1905/1985",
        "biography": "Collected documentation of cultural life inside the ghetto.",
    },
    {
        "personId": "per-redlich",
        "names": [{"text": "Egon Redlich", "lang": "cs", "type": "primary"}],
        "lifeDates": "1916/1944",
        "biography": "Youth welfare worker whose diary was found in Terezín long after "
                     "the war.",
    },
    {
        "personId": "per-adler",
        "names": [{"text": "H. G. Adler", "lang": "de", "type": "primary"}],
        "lifeDates": "1910/1988",
        "biography": "Worked in the postwar museum documentation and later wrote an "
                     "influential monograph about the ghetto.",
    },
    {
        "personId": "per-weisz",
        "names": [{"text": "Hermann Weisz", "lang": "de", "type": "primary"}],
        "lifeDates": "1904/1979",
        "biography": "Preserved transport lists and departmental albums that later "
                     "reached the memorial archives.",
    },
]

_PLACES = [
    {
        "placeId": "pl-terezin",
        "names": {"cs": ["Terezín"], "de": ["Theresienstadt"], "en": ["Terezin"]},
        "latitude": 50.5110, "longitude": 14.1507,
        "geometry": "polygon",
        "polygon": [[50.5165, 14.1420], [50.5165, 14.1600], [50.5060, 14.1600],
                    [50.5060, 14.1420], [50.5165, 14.1420]],
    },
    {
        "placeId": "pl-magdeburg",
        "names": {"de": ["Magdeburger Kaserne"], "en": ["Magdeburg Barracks"],
                  "cs": ["Magdeburská kasárna"]},
        "latitude": 50.5097, "longitude": 14.1524, "geometry": "point",
        "within": "pl-terezin",
    },
    {
        "placeId": "pl-dresden",
        "names": {"de": ["Dresdner Kaserne"], "en": ["Dresden Barracks"],
                  "cs": ["Drážďanská kasárna"]},
        "latitude": 50.5131, "longitude": 14.1489, "geometry": "point",
        "within": "pl-terezin",
    },
    {
        "placeId": "pl-small-fortress",
        "names": {"en": ["Small Fortress"], "cs": ["Malá pevnost"], "de": ["Kleine Festung"]},
        "latitude": 50.5138, "longitude": 14.1651, "geometry": "point",
    },
    {
        "placeId": "pl-crematorium",
        "names": {"en": ["Crematorium"], "cs": ["Krematorium"], "de": ["Krematorium"]},
        "latitude": 50.5053, "longitude": 14.1543, "geometry": "point",
        "within": "pl-terezin",
    },
]

_EVENTS = [
    {
        "eventId": "ev-ghetto-established",
        "label": {"en": "First construction transport arrives",
                  "cs": "Příjezd prvního transportu", "de": "Ankunft des Aufbaukommandos"},
        "when": "1941-11-24", "kind": "point",
        "linkedUnits": ["tm/tm-0005"], "persons": [],
    },
    {
        "eventId": "ev-red-cross-visit",
        "label": {"en": "Red Cross delegation visit", "cs": "Návštěva delegace Červeného kříže",
                  "de": "Besuch der Rotkreuz-Delegation"},
        "when": "1944-06-23", "kind": "point",
        "linkedUnits": ["jmp/terezin/bulletins/tb-440623"], "persons": [],
    },
    {
        "eventId": "ev-propaganda-film",
        "label": {"en": "Propaganda film shot in the ghetto", "cs": "Natáčení propagandistického filmu",
                  "de": "Dreharbeiten zum Propagandafilm"},
        "when": "1944", "kind": "point",
        "linkedUnits": ["tm/tm-0004"], "persons": [],
    },
    {
        "eventId": "ev-liberation",
        "label": {"en": "Liberation of the ghetto", "cs": "Osvobození ghetta",
                  "de": "Befreiung des Ghettos"},
        "when": "1945-05", "kind": "point",
        "linkedUnits": ["jmp/herrmann/her-photos", "jmp/terezin/docproject/dp-testimonies"],
        "persons": [],
    },
    {
        "eventId": "ev-documentation-project",
        "label": {"en": "Postwar documentation initiative", "cs": "Dokumentační akce",
                  "de": "Dokumentationsaktion"},
        "when": "1945-05/1946-12", "kind": "period",
        "linkedUnits": ["jmp/terezin/docproject", "yv/o7"], "persons": ["per-scheck"],
    },
]

_REPOSITORIES = [
    {
        "ehriId": "1203", "code": "jmp",
        "authorizedFormOfName": "Jewish Museum in Prague",
        "otherNames": ["Židovské muzeum v Praze"],
        "country": "CZ", "address": "U Staré školy 1, Prague, Czech Republic",
        "contact": "archive@jmp.example.org", "descriptionStatus": "published",
        "holdingsSummary": "Hierarchical Terezín collection built around the postwar "
                           "documentation initiative: self-administration records, daily "
                           "bulletins, artwork documentation and testimonies.",
        "harvestCapable": True, "harvestEndpoint": "http://127.0.0.1:0/harvest",
    },
    {
        "ehriId": "2798", "code": "yv",
        "authorizedFormOfName": "Yad Vashem",
        "otherNames": ["יד ושם"],
        "country": "IL", "address": "Jerusalem, Israel",
        "contact": "reference@yv.example.org", "descriptionStatus": "published",
        "holdingsSummary": "Theresienstadt subcollections with transport lists, "
                           "departmental albums and personal documents catalogued at the "
                           "file level.",
        "harvestCapable": False,
    },
    {
        "ehriId": "3115", "code": "bt",
        "authorizedFormOfName": "Beit Theresienstadt",
        "otherNames": ["Beit Terezín"],
        "country": "IL", "address": "Givat Haim Ihud, Israel",
        "contact": "archive@bt.example.org", "descriptionStatus": "draft",
        "holdingsSummary": "Subject-oriented files described at the file level only: "
                           "children newspapers, artwork and member donations.",
        "harvestCapable": False,
    },
    {
        "ehriId": "4406", "code": "tm",
        "authorizedFormOfName": "Terezín Memorial",
        "otherNames": ["Památník Terezín"],
        "country": "CZ", "address": "Principova alej 304, Terezín, Czech Republic",
        "contact": "documentation@tm.example.org", "descriptionStatus": "published",
        "holdingsSummary": "Museum database of separate items: found documents, drawings, "
                           "diaries and the prisoner card file.",
        "harvestCapable": False,
    },
]

COPY_GROUPS = [
    {
        "title": "Tagesbefehl 1.5.1944",
        "members": [["jmp", "terezin/bulletins/tb-440501"], ["yv", "o64/o64-1"],
                    ["bt", "bt-120"], ["tm", "tm-0001"]],
    },
    {
        "title": "Transportliste Em, 1. Oktober 1944",
        "members": [["yv", "o64/o64-3"], ["tm", "tm-0002"]],
    },
    {
        "title": "Zpráva o činnosti technického oddělení 1943",
        "members": [["jmp", "terezin/docproject/dp-report-technical"], ["bt", "bt-077"]],
    },
]

_GUIDE_CONFIG = {
    "guideId": "terezin",
    "repositories": ["jmp", "yv", "bt", "tm"],
    "rootUnits": [],
    "keywordTreeRoot": "kw-root",
    "departmentTreeRoot": "dep-root",
    "places": ["pl-terezin", "pl-magdeburg", "pl-dresden", "pl-small-fortress",
               "pl-crematorium"],
    "events": ["ev-ghetto-established", "ev-red-cross-visit", "ev-propaganda-film",
               "ev-liberation", "ev-documentation-project"],
    "biographies": ["per-scheck", "per-herrmann", "per-redlich", "per-adler", "per-weisz"],
}


def _profile_dicts() -> dict[str, dict]:
    jmp = profile_to_dict(canonical_profile())
    jmp["profileId"] = "jmp-nested"
    yv = {
        "profileId": "yv-nested",
        "sourceKind": "nested-xml",
        "idRule": {"paths": ["unitid"], "separator": "-"},
        "levelRule": {"kind": "field", "source": "lvl"},
        "fieldRules": [
            {"source": "unittitle", "target": "title", "transform": "copy"},
            {"source": "unitdate", "target": "datesOfCreation", "transform": "dateParse",
             "pattern": "iso"},
            {"source": "lang", "target": "languageOfMaterial", "transform": "copy"},
            {"source": "abstract", "target": "scopeContent", "transform": "copy"},
            {"source": "subject", "target": "keywords", "transform": "copy"},
            {"source": "location", "target": "places", "transform": "copy"},
            {"source": "name", "target": "persons", "transform": "copy"},
            {"source": "dept", "target": "departments", "transform": "copy"},
            {"target": "sourceSystem", "transform": "constant", "value": "yv-export"},
        ],
    }
    bt = {
        "profileId": "bt-table",
        "sourceKind": "delimited-table",
        "delimiter": ";",
        "idRule": {"paths": ["code"], "separator": "-"},
        "levelRule": {"kind": "constant", "value": "file"},
        "fieldRules": [
            {"source": "title", "target": "title", "transform": "copy"},
            {"source": "date", "target": "datesOfCreation", "transform": "dateParse",
             "pattern": "%d.%m.%Y"},
            {"source": "language", "target": "languageOfMaterial", "transform": "splitList",
             "separator": ","},
            {"source": "summary", "target": "scopeContent", "transform": "copy"},
            {"source": "keywords", "target": "keywords", "transform": "splitList",
             "separator": ","},
            {"source": "places", "target": "places", "transform": "splitList", "separator": ","},
            {"source": "persons", "target": "persons", "transform": "splitList",
             "separator": ","},
            {"source": "department", "target": "departments", "transform": "splitList",
             "separator": ","},
            {"source": "extent", "target": "extent", "transform": "copy"},
            {"target": "sourceSystem", "transform": "constant", "value": "bt-word-inventory"},
        ],
    }
    tm = {
        "profileId": "tm-table",
        "sourceKind": "delimited-table",
        "idRule": {"paths": ["inv_no"], "separator": "-"},
        "levelRule": {"kind": "constant", "value": "item"},
        "fieldRules": [
            {"source": "item_title", "target": "title", "transform": "copy"},
            {"source": "created", "target": "datesOfCreation", "transform": "dateParse",
             "pattern": "iso"},
            {"source": "lang", "target": "languageOfMaterial", "transform": "copy"},
            {"source": "note", "target": "scopeContent", "transform": "copy"},
            {"source": "subjects", "target": "keywords", "transform": "splitList",
             "separator": ";"},
            {"source": "sites", "target": "places", "transform": "splitList", "separator": ";"},
            {"source": "people", "target": "persons", "transform": "splitList",
             "separator": ";"},
            {"target": "sourceSystem", "transform": "constant", "value": "tm-database"},
        ],
    }
    return {"jmp": jmp, "yv": yv, "bt": bt, "tm": tm}


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def _write_jsonl(path: Path, records: list[dict]) -> None:
    lines = [json.dumps(r, ensure_ascii=False, sort_keys=True) for r in records]
    _write_text(path, "\n".join(lines) + "\n")


def _csv_text(header: list[str], rows: list[list[str]], delimiter: str) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def generate_fixtures(out_dir: str, seed: int = 42) -> FixtureManifest:
    """Write the whole corpus into out_dir, deterministically for a seed, and
    return the self-describing manifest (also saved as manifest.json)."""
    base = Path(out_dir)
    try:
        base.mkdir(parents=True, exist_ok=True)
        (base / "profiles").mkdir(exist_ok=True)
    except OSError as exc:
        raise DomainError("io-failure", f"cannot create fixture directory: {exc}") from exc
    rng = random.Random(seed)
    manifest = FixtureManifest(seed=seed)

    jmp_units = _jmp_units(rng)
    _write_text(base / "jmp-terezin.xml",
                serialize_units(jmp_units, "jmp-catalog").decode("utf-8") + "\n")
    jmp_max_levels = 1 + max(u.global_id.count("/") for u in jmp_units)
    manifest.entries.append(ManifestEntry(
        "jmp-terezin", "nested-xml", "jmp-terezin.xml",
        {"units": len(jmp_units), "trees": sum(1 for u in jmp_units if u.parent is None),
         "maxLevels": jmp_max_levels}))

    yv_trees = _yv_units()
    _write_text(base / "yv-terezin.xml", _yv_xml(yv_trees).decode("utf-8") + "\n")
    yv_count = sum(1 + len(children) for _, children in yv_trees)
    manifest.entries.append(ManifestEntry(
        "yv-terezin", "nested-xml", "yv-terezin.xml",
        {"units": yv_count, "trees": len(yv_trees), "maxLevels": 2}))

    bt_rows = _bt_rows(rng)
    _write_text(base / "bt-files.csv", _csv_text(_BT_HEADER, bt_rows, ";"))
    manifest.entries.append(ManifestEntry(
        "bt-files", "delimited-table", "bt-files.csv",
        {"units": len(bt_rows), "maxLevels": 1}))

    tm_rows = _tm_rows(rng)
    _write_text(base / "tm-items.csv", _csv_text(_TM_HEADER, tm_rows, ","))
    manifest.entries.append(ManifestEntry(
        "tm-items", "delimited-table", "tm-items.csv",
        {"units": len(tm_rows), "maxLevels": 1}))

    thesaurus_text = "\n".join("\t".join(row) for row in _THESAURUS_ROWS) + "\n"
    _write_text(base / "thesaurus.tsv", thesaurus_text)
    manifest.entries.append(ManifestEntry(
        "thesaurus", "thesaurus", "thesaurus.tsv",
        {"concepts": len({row[0] for row in _THESAURUS_ROWS})}))

    concordance_text = "\n".join("\t".join(row) for row in _CONCORDANCE_ROWS) + "\n"
    _write_text(base / "concordance.tsv", concordance_text)
    manifest.entries.append(ManifestEntry(
        "concordance", "concordance", "concordance.tsv", {"pairs": len(_CONCORDANCE_ROWS)}))

    _write_jsonl(base / "persons.jsonl", _PERSONS)
    manifest.entries.append(ManifestEntry("persons", "persons", "persons.jsonl",
                                          {"persons": len(_PERSONS)}))
    _write_jsonl(base / "places.jsonl", _PLACES)
    manifest.entries.append(ManifestEntry("places", "places", "places.jsonl",
                                          {"places": len(_PLACES)}))
    _write_jsonl(base / "events.jsonl", _EVENTS)
    manifest.entries.append(ManifestEntry("events", "events", "events.jsonl",
                                          {"events": len(_EVENTS)}))
    _write_jsonl(base / "repositories.jsonl", _REPOSITORIES)
    manifest.entries.append(ManifestEntry("repositories", "repositories", "repositories.jsonl",
                                          {"repositories": len(_REPOSITORIES)}))

    for code, profile in _profile_dicts().items():
        path = f"profiles/{code}.json"
        _write_text(base / path, json.dumps(profile, indent=2, ensure_ascii=False,
                                            sort_keys=True) + "\n")
        manifest.entries.append(ManifestEntry(f"profile-{code}", "profile", path, {}))

    _write_text(base / "guide-terezin.json",
                json.dumps(_GUIDE_CONFIG, indent=2, ensure_ascii=False, sort_keys=True) + "\n")
    manifest.entries.append(ManifestEntry("guide-terezin", "guide-config",
                                          "guide-terezin.json", {}))

    manifest.copy_groups = json.loads(json.dumps(COPY_GROUPS))
    _write_text(base / "manifest.json",
                json.dumps(manifest.to_dict(), indent=2, ensure_ascii=False, sort_keys=True) + "\n")
    return manifest


# -- mock harvest endpoint -------------------------------------------------------


def records_from_nested_file(path: str) -> list[tuple[str, str, bytes]]:
    """One harvest record per top-level unit tree of a nested export; the
    identifier is the tree's root id and the datestamp steps one day per
    record from a fixed epoch."""
    tree = ET.parse(path)
    records = []
    epoch = date(2013, 1, 1)
    for i, element in enumerate(el for el in tree.getroot() if el.tag == "unit"):
        identifier = ""
        for child in element:
            if child.tag in ("id", "unitid"):
                identifier = (child.text or "").strip()
                break
        stamp = (epoch + timedelta(days=i)).isoformat() + "T00:00:00Z"
        records.append((identifier or f"record-{i}", stamp,
                        ET.tostring(element, encoding="utf-8")))
    return records


class MockHarvestServer:
    """Serves the harvest protocol subset over a fixed record list, with a
    request log for test assertions and optional fault injection."""

    def __init__(self, records: list[tuple[str, str, bytes]], page_size: int = 10):
        self.records = records
        self.page_size = page_size
        self.log: list[dict] = []
        self.fault_page: Optional[int] = None  # serve corrupt bytes for this page
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args) -> None:  # silence default stderr noise
                return

            def do_GET(self) -> None:  # noqa: N802 - http.server API
                parsed = urlparse(self.path)
                params = {k: v[0] for k, v in parse_qs(parsed.query).items()}
                outer.log.append(params)
                body, status = outer.respond(params)
                self.send_response(status)
                self.send_header("Content-Type", "application/xml; charset=utf-8")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/harvest"

    def close(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    # -- protocol ---------------------------------------------------------

    def respond(self, params: dict) -> tuple[bytes, int]:
        verb = params.get("verb", "")
        if verb == "GetRecord":
            return self._get_record(params.get("identifier", ""))
        if verb != "ListRecords":
            return self._error("badVerb", f"unsupported verb {verb!r}"), 200
        matching = self.records
        from_stamp = params.get("from")
        if from_stamp:
            matching = [r for r in matching if r[1] >= from_stamp]
        offset = 0
        token = params.get("resumptionToken")
        if token is not None:
            if not token.startswith("tok-") or not token[4:].isdigit():
                return self._error("badResumptionToken", f"bad token {token!r}"), 200
            offset = int(token[4:])
            if offset >= len(matching):
                return self._error("badResumptionToken", "token beyond record count"), 200
        page_number = offset // self.page_size + 1
        if self.fault_page is not None and page_number == self.fault_page:
            return b"<harvest><records><record identifier=", 200
        page = matching[offset : offset + self.page_size]
        root = ET.Element("harvest")
        records_el = ET.SubElement(root, "records")
        for identifier, datestamp, payload in page:
            record_el = ET.SubElement(records_el, "record")
            record_el.set("identifier", identifier)
            record_el.set("datestamp", datestamp)
            record_el.append(ET.fromstring(payload))
        next_offset = offset + self.page_size
        if next_offset < len(matching):
            token_el = ET.SubElement(root, "resumptionToken")
            token_el.text = f"tok-{next_offset}"
        return ET.tostring(root, encoding="utf-8", xml_declaration=True), 200

    def _get_record(self, identifier: str) -> tuple[bytes, int]:
        for record_id, datestamp, payload in self.records:
            if record_id == identifier:
                root = ET.Element("harvest")
                records_el = ET.SubElement(root, "records")
                record_el = ET.SubElement(records_el, "record")
                record_el.set("identifier", record_id)
                record_el.set("datestamp", datestamp)
                record_el.append(ET.fromstring(payload))
                return ET.tostring(root, encoding="utf-8", xml_declaration=True), 200
        return self._error("idDoesNotExist", f"no record {identifier!r}"), 200

    @staticmethod
    def _error(code: str, message: str) -> bytes:
        root = ET.Element("harvest")
        error_el = ET.SubElement(root, "error")
        error_el.set("code", code)
        error_el.text = message
        return ET.tostring(root, encoding="utf-8", xml_declaration=True)


def mock_harvest_server(nested_xml_path: str, page_size: int = 10) -> MockHarvestServer:
    """Start a mock endpoint over a nested fixture export."""
    return MockHarvestServer(records_from_nested_file(nested_xml_path), page_size)
