"""Bring heterogeneous archive exports into the canonical model.

Partner exports arrive as nested XML (hierarchical finding aids) or flat
delimited tables (item catalogues); a declarative mapping profile turns
either into DocumentaryUnit values. A small harvest-protocol client covers
endpoints that serve their exports over HTTP, and import_batch lands units
in the registry idempotently, preserving user contributions on re-import.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Optional

import requests

from nexus.core import DateSpan, DocumentaryUnit, ValidationReport, validate_unit
from nexus.errors import DomainError
from nexus.graph import Graph
from nexus.vocab import AuthorityStore, Thesaurus

SCALAR_TARGETS = frozenset(
    {"title", "languageOfDescription", "scopeContent", "extent", "provenanceNote", "sourceSystem"}
)
LIST_TARGETS = frozenset(
    {"datesOfCreation", "languageOfMaterial", "keywords", "places", "persons", "departments"}
)

# Level assigned by nesting depth when an export carries no level field.
LEVEL_LADDER = ("fonds", "subfonds", "series", "subseries", "file", "item")


@dataclass
class FieldRule:
    target: str
    transform: str = "copy"  # copy | splitList | dateParse | constant | concat
    source: Optional[str] = None
    separator: str = ","
    pattern: str = "iso"
    value: str = ""
    paths: list[str] = field(default_factory=list)


@dataclass
class MappingProfile:
    profile_id: str
    source_kind: str  # "nested-xml" | "delimited-table"
    id_rule_paths: list[str]
    id_rule_separator: str = "-"
    level_rule: dict = field(default_factory=lambda: {"kind": "nesting"})
    parent_source: Optional[str] = None  # tables only
    field_rules: list[FieldRule] = field(default_factory=list)
    delimiter: str = ","

    def validate(self) -> None:
        if self.source_kind not in ("nested-xml", "delimited-table"):
            raise DomainError("invalid-profile", f"unknown sourceKind {self.source_kind!r}")
        if not self.id_rule_paths:
            raise DomainError("invalid-profile", "idRule must name at least one source path")
        kind = self.level_rule.get("kind")
        if kind not in ("nesting", "field", "constant"):
            raise DomainError("invalid-profile", f"unknown levelRule kind {kind!r}")
        if kind == "constant" and not self.level_rule.get("value"):
            raise DomainError("invalid-profile", "constant levelRule needs a value")
        if kind == "field" and not self.level_rule.get("source"):
            raise DomainError("invalid-profile", "field levelRule needs a source")
        seen_scalar: set[str] = set()
        for rule in self.field_rules:
            if rule.target in SCALAR_TARGETS:
                if rule.target in seen_scalar:
                    raise DomainError("invalid-profile",
                                      f"more than one rule for scalar target {rule.target!r}")
                seen_scalar.add(rule.target)
            elif rule.target not in LIST_TARGETS:
                raise DomainError("invalid-profile", f"unknown target {rule.target!r}")
            if rule.transform not in ("copy", "splitList", "dateParse", "constant", "concat"):
                raise DomainError("invalid-profile", f"unknown transform {rule.transform!r}")
            if rule.transform == "concat" and not rule.paths:
                raise DomainError("invalid-profile", "concat transform needs paths")
            if rule.transform not in ("constant", "concat") and not rule.source:
                raise DomainError("invalid-profile",
                                  f"transform {rule.transform!r} needs a source")

    def sourced_paths(self) -> set[str]:
        paths = set(self.id_rule_paths)
        if self.level_rule.get("kind") == "field":
            paths.add(self.level_rule["source"])
        if self.parent_source:
            paths.add(self.parent_source)
        for rule in self.field_rules:
            if rule.source:
                paths.add(rule.source)
            paths.update(rule.paths)
        return paths


def load_profile(path: str) -> MappingProfile:
    """Read a mapping profile from its JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise DomainError("io-failure", f"cannot read profile: {exc}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise DomainError("invalid-profile", f"profile is not valid JSON: {exc}", path=path) from exc
    return profile_from_dict(raw)


def profile_from_dict(raw: dict) -> MappingProfile:
    rules = [
        FieldRule(
            target=r["target"],
            transform=r.get("transform", "copy"),
            source=r.get("source"),
            separator=r.get("separator", ","),
            pattern=r.get("pattern", "iso"),
            value=r.get("value", ""),
            paths=list(r.get("paths", [])),
        )
        for r in raw.get("fieldRules", [])
    ]
    id_rule = raw.get("idRule", {})
    profile = MappingProfile(
        profile_id=raw.get("profileId", ""),
        source_kind=raw.get("sourceKind", ""),
        id_rule_paths=list(id_rule.get("paths", [])),
        id_rule_separator=id_rule.get("separator", "-"),
        level_rule=dict(raw.get("levelRule", {"kind": "nesting"})),
        parent_source=raw.get("parentRule", {}).get("source"),
        field_rules=rules,
        delimiter=raw.get("delimiter", ","),
    )
    profile.validate()
    return profile


def profile_to_dict(profile: MappingProfile) -> dict:
    out: dict = {
        "profileId": profile.profile_id,
        "sourceKind": profile.source_kind,
        "idRule": {"paths": profile.id_rule_paths, "separator": profile.id_rule_separator},
        "levelRule": profile.level_rule,
        "fieldRules": [],
    }
    if profile.parent_source:
        out["parentRule"] = {"source": profile.parent_source}
    if profile.delimiter != ",":
        out["delimiter"] = profile.delimiter
    for rule in profile.field_rules:
        entry: dict = {"target": rule.target, "transform": rule.transform}
        if rule.source:
            entry["source"] = rule.source
        if rule.transform == "splitList":
            entry["separator"] = rule.separator
        if rule.transform == "dateParse":
            entry["pattern"] = rule.pattern
        if rule.transform == "constant":
            entry["value"] = rule.value
        if rule.transform == "concat":
            entry["paths"] = rule.paths
            entry["separator"] = rule.separator
        out["fieldRules"].append(entry)
    return out


# -- record mapping ----------------------------------------------------------


def _parse_date_text(raw: str, pattern: str) -> DateSpan:
    if pattern == "iso":
        return DateSpan.from_text(raw)
    parsed = time.strptime(raw.strip(), pattern)
    return DateSpan(f"{parsed.tm_year:04d}-{parsed.tm_mon:02d}-{parsed.tm_mday:02d}")


def _apply_rules(record: dict[str, list[str]], profile: MappingProfile,
                 unit: DocumentaryUnit) -> None:
    """Apply every field rule of the profile to one source record."""
    for rule in profile.field_rules:
        if rule.transform == "constant":
            values = [rule.value]
        elif rule.transform == "concat":
            parts = [record.get(p, [""])[0] for p in rule.paths]
            values = [rule.separator.join(p for p in parts if p)]
        else:
            values = [v for v in record.get(rule.source or "", []) if v.strip()]
            if rule.transform == "splitList":
                values = [part.strip() for v in values for part in v.split(rule.separator)
                          if part.strip()]
        if not values:
            continue
        if rule.target == "datesOfCreation":
            for raw in values:
                if raw.strip().lower() == "undated":
                    continue  # _is_undated already flagged the unit
                try:
                    unit.dates_of_creation.append(_parse_date_text(raw, rule.pattern))
                except ValueError:
                    unit.unparsed_dates.append(raw)
                    note = f"date kept verbatim: {raw}"
                    unit.provenance_note = (
                        f"{unit.provenance_note}\n{note}".strip("\n") if unit.provenance_note else note
                    )
        elif rule.target in LIST_TARGETS:
            target_list: list = getattr(unit, _FIELD_ATTR[rule.target])
            for v in values:
                if v not in target_list:
                    target_list.append(v)
        else:
            setattr(unit, _FIELD_ATTR[rule.target], values[0])


_FIELD_ATTR = {
    "title": "title",
    "languageOfDescription": "language_of_description",
    "scopeContent": "scope_content",
    "extent": "extent",
    "provenanceNote": "provenance_note",
    "sourceSystem": "source_system",
    "datesOfCreation": "dates_of_creation",
    "languageOfMaterial": "language_of_material",
    "keywords": "keywords",
    "places": "places",
    "persons": "persons",
    "departments": "departments",
}


def _record_id(record: dict[str, list[str]], profile: MappingProfile) -> str:
    parts = [record.get(p, [""])[0].strip() for p in profile.id_rule_paths]
    return profile.id_rule_separator.join(p for p in parts if p)


def _record_level(record: dict[str, list[str]], profile: MappingProfile, depth: int) -> str:
    rule = profile.level_rule
    if rule["kind"] == "constant":
        return rule["value"]
    if rule["kind"] == "field":
        values = record.get(rule["source"], [])
        return values[0].strip() if values and values[0].strip() else ""
    return LEVEL_LADDER[min(depth, len(LEVEL_LADDER) - 1)]


# -- parsers -------------------------------------------------------------------


def parse_nested(data: bytes, profile: MappingProfile) -> list[DocumentaryUnit]:
    """Parse a nested exchange document into unit trees.

    Returns trees flattened in document order (every parent precedes its
    children); parent links and path ids come from element nesting. The
    global_id field holds the source-local path until import qualifies it
    with the repository code.
    """
    if profile.source_kind != "nested-xml":
        raise DomainError("profile-mismatch",
                          f"profile {profile.profile_id!r} is not for nested-xml input")
    try:
        root = ET.fromstring(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise DomainError("malformed-input", f"input is not UTF-8: {exc}") from exc
    except ET.ParseError as exc:
        raise DomainError("malformed-input", f"bad markup at {exc.position}: {exc.msg}",
                          position=list(exc.position)) from exc
    unit_elements = [el for el in root.iter("unit")]
    seen_paths = {child.tag for el in unit_elements for child in el if child.tag != "unit"}
    _check_profile_fit(profile, seen_paths, bool(unit_elements))
    units: list[DocumentaryUnit] = []

    def walk(element: ET.Element, parent_path: Optional[str], depth: int) -> None:
        record: dict[str, list[str]] = {}
        for child in element:
            if child.tag == "unit":
                continue
            record.setdefault(child.tag, []).append((child.text or "").strip())
        local = _record_id(record, profile)
        if not local:
            raise DomainError("missing-id", f"unit at depth {depth} has no id value",
                              parent=parent_path)
        path = f"{parent_path}/{local}" if parent_path else local
        unit = DocumentaryUnit(global_id=path, local_id=local,
                               level=_record_level(record, profile, depth),
                               parent=parent_path)
        unit.undated = _is_undated(record)
        _apply_rules(record, profile, unit)
        units.append(unit)
        for child in element:
            if child.tag == "unit":
                walk(child, path, depth + 1)

    for element in root:
        if element.tag == "unit":
            walk(element, None, 0)
    return units


def parse_table(data: bytes, profile: MappingProfile) -> list[DocumentaryUnit]:
    """Parse a delimited table with a header row into units, one per row."""
    if profile.source_kind != "delimited-table":
        raise DomainError("profile-mismatch",
                          f"profile {profile.profile_id!r} is not for delimited-table input")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DomainError("malformed-input", f"input is not UTF-8: {exc}") from exc
    reader = csv.reader(io.StringIO(text), delimiter=profile.delimiter)
    rows = list(reader)
    if not rows:
        return []
    header = rows[0]
    data_rows = [row for row in rows[1:] if any(cell.strip() for cell in row)]
    _check_profile_fit(profile, set(header), bool(data_rows))
    units: list[DocumentaryUnit] = []
    for number, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DomainError("malformed-row",
                              f"row {number} has {len(row)} cells, header has {len(header)}",
                              row=number)
        record = {name: [value] for name, value in zip(header, row)}
        local = _record_id(record, profile)
        if not local:
            raise DomainError("missing-id", f"row {number} has no id value", row=number)
        parent = None
        if profile.parent_source:
            parent_values = record.get(profile.parent_source, [""])
            parent = parent_values[0].strip() or None
        path = f"{parent}/{local}" if parent else local
        unit = DocumentaryUnit(global_id=path, local_id=local,
                               level=_record_level(record, profile, 0),
                               parent=parent)
        unit.undated = _is_undated(record)
        _apply_rules(record, profile, unit)
        units.append(unit)
    return units


def _is_undated(record: dict[str, list[str]]) -> bool:
    return any(v.strip().lower() == "undated" for values in record.values() for v in values)


def _check_profile_fit(profile: MappingProfile, seen_paths: set[str], any_records: bool) -> None:
    """The profile fits when its id paths (and level field, if any) occur in
    the input and at least one field-rule source does."""
    if not any_records:
        return
    required = set(profile.id_rule_paths)
    if profile.level_rule.get("kind") == "field":
        required.add(profile.level_rule["source"])
    missing_required = sorted(required - seen_paths)
    if missing_required:
        raise DomainError("profile-mismatch",
                          "required source paths absent from every record: "
                          + ", ".join(missing_required),
                          missing=missing_required)
    rule_sources = {r.source for r in profile.field_rules if r.source}
    if rule_sources and not (rule_sources & seen_paths):
        raise DomainError("profile-mismatch",
                          "no field-rule source path occurs in the input",
                          missing=sorted(rule_sources))


# -- canonical exchange serialization ------------------------------------------

EXCHANGE_FIELD_TAGS = (
    ("title", "title"),
    ("language_of_description", "description-language"),
    ("scope_content", "scope"),
    ("extent", "extent"),
    ("provenance_note", "provenance"),
    ("source_system", "source-system"),
)
EXCHANGE_LIST_TAGS = (
    ("language_of_material", "language"),
    ("keywords", "keyword"),
    ("places", "place"),
    ("persons", "person"),
    ("departments", "department"),
)


def canonical_profile() -> MappingProfile:
    """The profile matching serialize_units output; round-trip safe."""
    return MappingProfile(
        profile_id="exchange-canonical",
        source_kind="nested-xml",
        id_rule_paths=["id"],
        level_rule={"kind": "field", "source": "level"},
        field_rules=[
            FieldRule("title", "copy", "title"),
            FieldRule("datesOfCreation", "dateParse", "date", pattern="iso"),
            FieldRule("languageOfMaterial", "copy", "language"),
            FieldRule("languageOfDescription", "copy", "description-language"),
            FieldRule("scopeContent", "copy", "scope"),
            FieldRule("extent", "copy", "extent"),
            FieldRule("keywords", "copy", "keyword"),
            FieldRule("places", "copy", "place"),
            FieldRule("persons", "copy", "person"),
            FieldRule("departments", "copy", "department"),
            FieldRule("provenanceNote", "copy", "provenance"),
            FieldRule("sourceSystem", "copy", "source-system"),
        ],
    )


def serialize_units(units: list[DocumentaryUnit], system: str = "") -> bytes:
    """Write unit trees to the canonical exchange form (inverse of
    parse_nested with the canonical profile)."""
    root = ET.Element("units")
    if system:
        root.set("system", system)
    by_path = {}
    for unit in units:
        element = ET.Element("unit")
        sub = ET.SubElement(element, "id")
        sub.text = unit.local_id
        level = ET.SubElement(element, "level")
        level.text = unit.level
        for span in unit.dates_of_creation:
            date_el = ET.SubElement(element, "date")
            date_el.text = span.to_text()
        if unit.undated and not unit.dates_of_creation:
            date_el = ET.SubElement(element, "date")
            date_el.text = "undated"
        for attr, tag in EXCHANGE_FIELD_TAGS:
            value = getattr(unit, attr)
            if value:
                sub = ET.SubElement(element, tag)
                sub.text = value
        for attr, tag in EXCHANGE_LIST_TAGS:
            for value in getattr(unit, attr):
                sub = ET.SubElement(element, tag)
                sub.text = value
        by_path[unit.global_id] = element
        if unit.parent and unit.parent in by_path:
            by_path[unit.parent].append(element)
        else:
            root.append(element)
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True)


# -- harvest client -------------------------------------------------------------


@dataclass
class HarvestRecord:
    identifier: str
    datestamp: str
    payload: bytes


@dataclass
class RetryPolicy:
    attempts: int = 3
    backoff_seconds: float = 0.2


def _harvest_get(url: str, params: dict, retry: RetryPolicy, page: int) -> bytes:
    last_error: Optional[Exception] = None
    for attempt in range(max(1, retry.attempts)):
        try:
            response = requests.get(url, params=params, timeout=30)
        except requests.RequestException as exc:
            last_error = exc
            if attempt + 1 < retry.attempts:
                time.sleep(retry.backoff_seconds * (attempt + 1))
            continue
        if response.status_code != 200:
            raise DomainError("protocol-error",
                              f"page {page}: unexpected status {response.status_code}",
                              page=page, status=response.status_code)
        return response.content
    raise DomainError("network-failure", f"page {page}: {last_error}", page=page)


def _parse_harvest_page(content: bytes, page: int) -> tuple[list[HarvestRecord], Optional[str]]:
    try:
        root = ET.fromstring(content)
    except ET.ParseError as exc:
        raise DomainError("protocol-error", f"page {page}: bad markup: {exc.msg}",
                          page=page) from exc
    if root.tag != "harvest":
        raise DomainError("protocol-error", f"page {page}: unexpected root {root.tag!r}", page=page)
    error = root.find("error")
    if error is not None:
        code = error.get("code", "")
        if code == "badResumptionToken":
            raise DomainError("bad-resumption-token",
                              f"page {page}: {error.text or 'token rejected'}", page=page)
        raise DomainError("protocol-error", f"page {page}: server error {code!r}", page=page)
    records = []
    for element in root.iter("record"):
        identifier = element.get("identifier", "")
        datestamp = element.get("datestamp", "")
        unit = element.find("unit")
        if not identifier or unit is None:
            raise DomainError("protocol-error", f"page {page}: incomplete record", page=page)
        records.append(HarvestRecord(identifier, datestamp, ET.tostring(unit, encoding="utf-8")))
    token_el = root.find("resumptionToken")
    token = token_el.text if token_el is not None and token_el.text else None
    return records, token


def harvest(endpoint: str, from_timestamp: Optional[str] = None,
            retry: Optional[RetryPolicy] = None) -> list[HarvestRecord]:
    """Fetch every record with datestamp >= from_timestamp, following
    resumption tokens to exhaustion."""
    retry = retry or RetryPolicy()
    records: list[HarvestRecord] = []
    token: Optional[str] = None
    page = 1
    while True:
        params: dict = {"verb": "ListRecords"}
        if token is not None:
            params["resumptionToken"] = token
        elif from_timestamp:
            params["from"] = from_timestamp
        content = _harvest_get(endpoint, params, retry, page)
        page_records, token = _parse_harvest_page(content, page)
        records.extend(page_records)
        if token is None:
            return records
        page += 1


def get_record(endpoint: str, identifier: str,
               retry: Optional[RetryPolicy] = None) -> HarvestRecord:
    """Fetch one record by identifier."""
    retry = retry or RetryPolicy()
    content = _harvest_get(endpoint, {"verb": "GetRecord", "identifier": identifier}, retry, 1)
    records, _ = _parse_harvest_page(content, 1)
    if len(records) != 1:
        raise DomainError("protocol-error",
                          f"expected one record for {identifier!r}, got {len(records)}")
    return records[0]


# -- batch import ---------------------------------------------------------------


@dataclass
class ImportReport:
    created: int = 0
    updated: int = 0
    unchanged: int = 0
    rejected: list[tuple[str, ValidationReport]] = field(default_factory=list)
    warnings: list[tuple[str, str, str]] = field(default_factory=list)  # (ref, code, message)
    batch_checksum: str = ""

    @property
    def total(self) -> int:
        return self.created + self.updated + self.unchanged + len(self.rejected)

    def to_dict(self) -> dict:
        return {
            "created": self.created,
            "updated": self.updated,
            "unchanged": self.unchanged,
            "rejected": [
                {"sourceRef": ref, "report": report.to_dict()} for ref, report in self.rejected
            ],
            "warnings": [
                {"sourceRef": ref, "code": code, "message": message}
                for ref, code, message in self.warnings
            ],
            "batchChecksum": self.batch_checksum,
        }


def unit_source_properties(unit: DocumentaryUnit) -> dict:
    """The canonical node property payload for a unit, before promotions."""
    return {
        "localId": unit.local_id,
        "level": unit.level,
        "title": unit.title,
        "datesOfCreation": [s.to_text() for s in unit.dates_of_creation],
        "languageOfMaterial": list(unit.language_of_material),
        "languageOfDescription": unit.language_of_description,
        "scopeContent": unit.scope_content,
        "extent": unit.extent,
        "keywords": list(unit.keywords),
        "places": list(unit.places),
        "persons": list(unit.persons),
        "departments": list(unit.departments),
        "provenanceNoteSource": unit.provenance_note,
        "sourceSystem": unit.source_system,
        "unparsedDates": list(unit.unparsed_dates),
        "undated": unit.undated,
    }


def compose_unit_properties(source: dict, prior: Optional[dict],
                            store: Optional[AuthorityStore]) -> dict:
    """Merge source properties with promotions carried on the prior node and
    resolve person/place display labels for indexing."""
    merged = dict(source)
    prior = prior or {}
    for marker_key, value_key in (
        ("promotedKeywords", "keywords"),
        ("promotedPersons", "persons"),
        ("promotedPlaces", "places"),
    ):
        markers = [str(m) for m in prior.get(marker_key, [])]
        merged[marker_key] = markers
        values = list(merged[value_key])
        for marker in markers:
            promoted_value = marker.split("|", 1)[1]
            if promoted_value not in values:
                values.append(promoted_value)
        merged[value_key] = values
    notes = [str(n) for n in prior.get("promotedNotes", [])]
    merged["promotedNotes"] = notes
    note_lines = [merged["provenanceNoteSource"]] if merged["provenanceNoteSource"] else []
    for note in notes:
        ann_id, author, text = note.split("|", 2)
        note_lines.append(f"[{ann_id} by {author}] {text}")
    merged["provenanceNote"] = "\n".join(note_lines)
    person_labels: list[str] = []
    place_labels: list[str] = []
    if store is not None:
        for person_id in merged["persons"]:
            person = store.persons.get(str(person_id))
            if person is not None:
                person_labels.extend(person.all_names())
        for place_id in merged["places"]:
            place = store.places.get(str(place_id))
            if place is not None:
                place_labels.extend(place.all_names())
    merged["personLabels"] = person_labels
    merged["placeLabels"] = place_labels
    return merged


def _reconcile_edges(graph: Graph, unit_id: str, label: str, wanted: list[str],
                     report: ImportReport, ref: str) -> None:
    wanted_existing = []
    for target in wanted:
        if graph.has_node(target):
            wanted_existing.append(target)
        else:
            report.warnings.append(
                (ref, "unresolved-reference", f"{label} target {target!r} is not in the registry"))
    current = {n.id for n in graph.neighbors(unit_id, label, "out")}
    for stale in current - set(wanted_existing):
        graph.remove_edge(unit_id, label, stale)
    for target in wanted_existing:
        if target not in current:
            graph.add_edge(unit_id, label, target)


def find_repository_by_code(graph: Graph, code: str):
    for node in graph.nodes("repository"):
        if node.properties.get("code") == code:
            return node
    return None


def import_batch(units: list[DocumentaryUnit], repository_code: str, graph: Graph,
                 thesaurus: Optional[Thesaurus] = None,
                 store: Optional[AuthorityStore] = None) -> ImportReport:
    """Upsert parsed unit trees under a repository.

    Units failing validation are quarantined together with their subtrees;
    nothing of a rejected subtree lands in the graph. Promoted annotation
    content and existing copy links on updated units are preserved.
    """
    repo_node = find_repository_by_code(graph, repository_code)
    if repo_node is None:
        raise DomainError("unknown-repository", f"no repository with code {repository_code!r}",
                          repository=repository_code)
    report = ImportReport()
    payload = [unit_source_properties(u) | {"path": u.global_id} for u in units]
    report.batch_checksum = hashlib.sha256(
        json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
    ).hexdigest()

    # Parents must be handled before children so subtree rejection is exact.
    order = _topological(units)
    rejected_paths: set[str] = set()
    for unit in order:
        ref = unit.global_id
        global_id = f"{repository_code}/{unit.global_id}"
        parent_global = f"{repository_code}/{unit.parent}" if unit.parent else None
        if unit.parent and unit.parent in rejected_paths:
            failed = ValidationReport(global_id)
            failed.add("error", "ancestor-rejected",
                       f"parent {unit.parent!r} was rejected in this batch")
            report.rejected.append((ref, failed))
            rejected_paths.add(unit.global_id)
            continue
        qualified = DocumentaryUnit(
            global_id=global_id, local_id=unit.local_id, level=unit.level, title=unit.title,
            dates_of_creation=unit.dates_of_creation,
            language_of_material=unit.language_of_material,
            language_of_description=unit.language_of_description,
            scope_content=unit.scope_content, extent=unit.extent, keywords=unit.keywords,
            places=unit.places, persons=unit.persons, departments=unit.departments,
            parent=parent_global, provenance_note=unit.provenance_note,
            source_system=unit.source_system, unparsed_dates=unit.unparsed_dates,
            undated=unit.undated,
        )
        validation = validate_unit(qualified)
        if validation.has_errors:
            report.rejected.append((ref, validation))
            rejected_paths.add(unit.global_id)
            continue
        if parent_global and not graph.has_node(parent_global):
            failed = ValidationReport(global_id)
            failed.add("error", "unknown-parent",
                       f"parent {parent_global!r} is neither in this batch nor in the registry")
            report.rejected.append((ref, failed))
            rejected_paths.add(unit.global_id)
            continue
        prior = graph.node(global_id).properties if graph.has_node(global_id) else None
        merged = compose_unit_properties(unit_source_properties(qualified), prior, store)
        if prior is None:
            graph.upsert_node("unit", global_id, merged)
            report.created += 1
        elif _canonical_props(prior) == _canonical_props(merged):
            report.unchanged += 1
        else:
            node = graph.node(global_id)
            node.properties.clear()
            node.properties.update(merged)
            report.updated += 1
            if merged["promotedKeywords"] or merged["promotedPersons"] or merged["promotedPlaces"] \
                    or merged["promotedNotes"]:
                report.warnings.append(
                    (ref, "promoted-content-preserved",
                     "update kept content promoted from annotations"))
        graph.add_edge(global_id, "heldBy", repo_node.id)
        current_parents = [n.id for n in graph.neighbors(global_id, "partOf", "out")]
        if current_parents and current_parents != [parent_global]:
            graph.remove_edge(global_id, "partOf", current_parents[0])
            current_parents = []
        if parent_global and not current_parents:
            graph.add_edge(global_id, "partOf", parent_global)
        concept_targets = [k for k in merged["keywords"]]
        _reconcile_edges(graph, global_id, "subject", concept_targets, report, ref)
        _reconcile_edges(graph, global_id, "aboutPerson", list(merged["persons"]), report, ref)
        _reconcile_edges(graph, global_id, "aboutPlace", list(merged["places"]), report, ref)
        _reconcile_edges(graph, global_id, "memberOfDepartment", list(merged["departments"]),
                         report, ref)
        for raw in qualified.unparsed_dates:
            report.warnings.append((ref, "unparsed-date", f"date kept verbatim: {raw!r}"))
    return report


def _canonical_props(properties: dict) -> str:
    return json.dumps(properties, sort_keys=True, ensure_ascii=False)


def _topological(units: list[DocumentaryUnit]) -> list[DocumentaryUnit]:
    """Stable order with every parent before its children."""
    by_path = {u.global_id: u for u in units}
    placed: set[str] = set()
    out: list[DocumentaryUnit] = []

    def place(unit: DocumentaryUnit, trail: set[str]) -> None:
        if unit.global_id in placed or unit.global_id in trail:
            return
        if unit.parent and unit.parent in by_path and unit.parent not in placed:
            place(by_path[unit.parent], trail | {unit.global_id})
        if unit.global_id not in placed:
            placed.add(unit.global_id)
            out.append(unit)

    for unit in units:
        place(unit, set())
    return out
