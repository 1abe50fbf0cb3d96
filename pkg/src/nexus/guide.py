"""Research guide over a themed sub-corpus: multiple access paths, no single
narrative.

A guide scopes a set of repositories, then exposes the same units through a
keyword tree, a department tree, a place map with coordinates, a timeline,
and short biographies. Cross-archive duplicate descriptions are surfaced as
copy candidates (trigram similarity over normalized titles) and only become
copyOf links after explicit confirmation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from nexus.core import DateSpan, date_floor
from nexus.errors import DomainError
from nexus.graph import Graph
from nexus.vocab import AuthorityStore, Thesaurus, normalize

_PRECISION_RANK = {"year": 0, "month": 1, "day": 2}


@dataclass
class Event:
    event_id: str
    label: dict[str, str] = field(default_factory=dict)  # lang -> text
    when: Optional[DateSpan] = None
    kind: str = "point"  # "point" | "period"
    linked_units: list[str] = field(default_factory=list)
    persons: list[str] = field(default_factory=list)

    def problems(self) -> list[str]:
        out = []
        if self.when is None:
            out.append("event has no date")
        elif self.kind == "period" and self.when.end is None:
            out.append("period event has no end date")
        elif self.when.problems():
            out.extend(self.when.problems())
        if self.kind not in ("point", "period"):
            out.append(f"unknown event kind {self.kind!r}")
        return out

    def sort_key(self) -> tuple:
        assert self.when is not None
        return (date_floor(self.when.start), _PRECISION_RANK[self.when.start_precision],
                self.event_id)

    def to_dict(self) -> dict:
        return {
            "eventId": self.event_id,
            "label": self.label,
            "when": self.when.to_text() if self.when else None,
            "kind": self.kind,
            "linkedUnits": self.linked_units,
            "persons": self.persons,
        }


@dataclass
class CopyAssertion:
    unit_a: str
    unit_b: str
    basis: str  # "asserted:<source>" | "suggested:<score>"
    status: str  # "candidate" | "confirmed"
    similarity: float = 0.0

    @property
    def pair(self) -> tuple[str, str]:
        return tuple(sorted((self.unit_a, self.unit_b)))  # type: ignore[return-value]

    def to_dict(self) -> dict:
        return {
            "unitA": self.unit_a,
            "unitB": self.unit_b,
            "basis": self.basis,
            "status": self.status,
            "similarity": self.similarity,
        }


@dataclass
class GuideConfig:
    guide_id: str
    repositories: list[str] = field(default_factory=list)  # repository codes
    root_units: list[str] = field(default_factory=list)
    keyword_tree_root: str = ""
    department_tree_root: str = ""
    places: list[str] = field(default_factory=list)
    events: list[str] = field(default_factory=list)
    biographies: list[str] = field(default_factory=list)

    @classmethod
    def load(cls, path: str) -> "GuideConfig":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                raw = json.load(handle)
        except OSError as exc:
            raise DomainError("io-failure", f"cannot read guide config: {exc}", path=path) from exc
        except json.JSONDecodeError as exc:
            raise DomainError("invalid-config", f"guide config is not valid JSON: {exc}",
                              path=path) from exc
        return cls(
            guide_id=raw.get("guideId", ""),
            repositories=list(raw.get("repositories", [])),
            root_units=list(raw.get("rootUnits", [])),
            keyword_tree_root=raw.get("keywordTreeRoot", ""),
            department_tree_root=raw.get("departmentTreeRoot", ""),
            places=list(raw.get("places", [])),
            events=list(raw.get("events", [])),
            biographies=list(raw.get("biographies", [])),
        )


@dataclass
class Guide:
    guide_id: str
    repository_ids: list[str]  # registry node ids
    repository_codes: list[str]
    keyword_tree_root: str
    department_tree_root: str
    place_ids: list[str]
    event_ids: list[str]
    biography_ids: list[str]
    unit_ids: set[str] = field(default_factory=set)
    candidates: dict[tuple[str, str], CopyAssertion] = field(default_factory=dict)
    stats: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "guideId": self.guide_id,
            "repositories": self.repository_codes,
            "keywordTreeRoot": self.keyword_tree_root,
            "departmentTreeRoot": self.department_tree_root,
            "places": self.place_ids,
            "events": self.event_ids,
            "biographies": self.biography_ids,
            "unitCount": len(self.unit_ids),
            "stats": self.stats,
        }


def load_events_into_graph(graph: Graph, events: list[Event]) -> None:
    """Intended unit/person links are kept as node properties too, so links
    to units imported later can be re-applied (see relink_events)."""
    for event in events:
        problems = event.problems()
        if problems:
            raise DomainError("bad-event", f"event {event.event_id!r}: " + "; ".join(problems),
                              event=event.event_id)
        graph.upsert_node("event", event.event_id, {
            "label": [f"{lang}|{text}" for lang, text in sorted(event.label.items())],
            "when": event.when.to_text() if event.when else "",
            "kind": event.kind,
            "linkedUnits": list(event.linked_units),
            "linkedPersons": list(event.persons),
        })
    relink_events(graph)


def relink_events(graph: Graph) -> None:
    """Create describedBy/aboutPerson edges for every event link whose target
    exists; idempotent, run after imports."""
    for node in graph.nodes("event"):
        for unit_id in node.properties.get("linkedUnits", []):
            if graph.has_node(str(unit_id)):
                graph.add_edge(node.id, "describedBy", str(unit_id))
        for person_id in node.properties.get("linkedPersons", []):
            if graph.has_node(str(person_id)):
                graph.add_edge(node.id, "aboutPerson", str(person_id))


def event_from_node(node) -> Event:
    label = {}
    for packed in node.properties.get("label", []):
        lang, text = str(packed).split("|", 1)
        label[lang] = text
    when_text = str(node.properties.get("when", ""))
    return Event(
        event_id=node.id,
        label=label,
        when=DateSpan.from_text(when_text) if when_text else None,
        kind=str(node.properties.get("kind", "point")),
    )


def build_guide(config: GuideConfig, graph: Graph, thesaurus: Thesaurus,
                store: AuthorityStore) -> Guide:
    """Assemble and validate a guide; every referenced entity must exist and
    the per-access-path unit statistics are reported on the result."""
    missing: list[str] = []
    repo_ids: list[str] = []
    for code in config.repositories:
        found = None
        for node in graph.nodes("repository"):
            if node.properties.get("code") == code or node.id == code:
                found = node.id
                break
        if found is None:
            missing.append(f"repository:{code}")
        else:
            repo_ids.append(found)
    for concept_id in filter(None, [config.keyword_tree_root, config.department_tree_root]):
        if concept_id not in thesaurus.concepts:
            missing.append(f"concept:{concept_id}")
    for place_id in config.places:
        if place_id not in store.places:
            missing.append(f"place:{place_id}")
    for event_id in config.events:
        if not graph.has_node(event_id) or graph.node(event_id).kind != "event":
            missing.append(f"event:{event_id}")
    for person_id in config.biographies:
        resolved = store.aliases.get(person_id, person_id)
        if resolved not in store.persons:
            missing.append(f"person:{person_id}")
    for unit_id in config.root_units:
        if not graph.has_node(unit_id):
            missing.append(f"unit:{unit_id}")
    if missing:
        raise DomainError("unknown-reference",
                          "guide references missing entities: " + ", ".join(sorted(missing)),
                          missing=sorted(missing))

    unit_ids: set[str] = set()
    for repo_id in repo_ids:
        unit_ids.update(n.id for n in graph.neighbors(repo_id, "heldBy", "in"))
    if config.root_units:
        allowed: set[str] = set()
        for root in config.root_units:
            allowed.add(root)
            allowed |= graph.closure(root, "partOf", "in")
        unit_ids &= allowed

    guide = Guide(
        guide_id=config.guide_id,
        repository_ids=repo_ids,
        repository_codes=list(config.repositories),
        keyword_tree_root=config.keyword_tree_root,
        department_tree_root=config.department_tree_root,
        place_ids=list(config.places),
        event_ids=list(config.events),
        biography_ids=[store.aliases.get(p, p) for p in config.biographies],
        unit_ids=unit_ids,
    )
    guide.stats = access_path_stats(guide, graph, thesaurus)
    return guide


def _tree_concepts(thesaurus: Thesaurus, root: str) -> set[str]:
    if not root:
        return set()
    return {root} | thesaurus.narrower_closure(root)


def access_path_stats(guide: Guide, graph: Graph, thesaurus: Thesaurus) -> dict[str, int]:
    """How many scope units each access path reaches."""
    keyword_concepts = _tree_concepts(thesaurus, guide.keyword_tree_root)
    department_concepts = _tree_concepts(thesaurus, guide.department_tree_root)
    counts = {"keyword": 0, "department": 0, "map": 0, "timeline": 0, "person": 0}
    timeline_units: set[str] = set()
    for event_id in guide.event_ids:
        timeline_units.update(n.id for n in graph.neighbors(event_id, "describedBy", "out"))
    for unit_id in sorted(guide.unit_ids):
        subjects = {n.id for n in graph.neighbors(unit_id, "subject", "out")}
        departments = {n.id for n in graph.neighbors(unit_id, "memberOfDepartment", "out")}
        place_links = {n.id for n in graph.neighbors(unit_id, "aboutPlace", "out")}
        place_links |= {n.id for n in graph.neighbors(unit_id, "locatedAt", "out")}
        person_links = {n.id for n in graph.neighbors(unit_id, "aboutPerson", "out")}
        if subjects & keyword_concepts:
            counts["keyword"] += 1
        if departments & department_concepts or subjects & department_concepts:
            counts["department"] += 1
        if place_links & set(guide.place_ids):
            counts["map"] += 1
        if unit_id in timeline_units:
            counts["timeline"] += 1
        if person_links & set(guide.biography_ids):
            counts["person"] += 1
    return counts


def map_features(guide: Guide, graph: Graph, store: AuthorityStore) -> dict:
    """Geographic feature collection for the guide's places (WGS84).

    Each feature reports how many scope units link to the place; units with
    no place link are not dropped silently: the collection carries placed and
    unplaced totals (distinct units, so the two add up to the scope size).
    """
    features = []
    placed_units: set[str] = set()
    place_set = set(guide.place_ids)
    for place_id in sorted(guide.place_ids):
        place = store.places[place_id]
        linked: set[str] = set()
        for direction_label in ("aboutPlace", "locatedAt"):
            linked.update(
                n.id for n in graph.neighbors(place_id, direction_label, "in")
                if n.id in guide.unit_ids
            )
        placed_units |= linked
        if place.geometry == "polygon":
            geometry = {
                "type": "Polygon",
                "coordinates": [[[lon, lat] for lat, lon in place.polygon]],
            }
        else:
            geometry = {"type": "Point", "coordinates": [place.longitude, place.latitude]}
        features.append({
            "type": "Feature",
            "id": place_id,
            "geometry": geometry,
            "properties": {
                "names": place.names,
                "linkedUnitCount": len(linked),
                "linkedUnits": sorted(linked),
            },
        })
    return {
        "type": "FeatureCollection",
        "features": features,
        "placedUnits": len(placed_units),
        "unplacedUnits": len(guide.unit_ids - placed_units),
    }


def timeline_query(guide: Guide, graph: Graph, from_text: str, to_text: str) -> list[Event]:
    """Events overlapping [from, to], ordered by start, then precision
    (coarser first), then event id."""
    try:
        window = DateSpan(from_text.strip(), to_text.strip())
    except Exception as exc:  # noqa: BLE001 - surface as a domain error
        raise DomainError("invalid-range", f"bad range: {exc}") from exc
    problems = window.problems()
    if problems:
        raise DomainError("invalid-range", "; ".join(problems))
    out = []
    for event_id in guide.event_ids:
        event = event_from_node(graph.node(event_id))
        event.linked_units = [n.id for n in graph.neighbors(event_id, "describedBy", "out")]
        event.persons = [n.id for n in graph.neighbors(event_id, "aboutPerson", "out")]
        if event.when is not None and event.when.overlaps(window):
            out.append(event)
    out.sort(key=Event.sort_key)
    return out


def title_trigrams(title: str) -> set[str]:
    norm = normalize(title)
    if not norm:
        return set()
    if len(norm) < 3:
        return {norm}
    return {norm[i : i + 3] for i in range(len(norm) - 2)}


def title_similarity(title_a: str, title_b: str,
                     dates_a: list[DateSpan], dates_b: list[DateSpan]) -> float:
    """Trigram Jaccard over normalized titles, +0.1 when creation dates
    overlap, capped at 1.0. Symmetric by construction."""
    grams_a, grams_b = title_trigrams(title_a), title_trigrams(title_b)
    if not grams_a or not grams_b:
        return 0.0
    jaccard = len(grams_a & grams_b) / len(grams_a | grams_b)
    if any(a.overlaps(b) for a in dates_a for b in dates_b):
        jaccard = min(1.0, jaccard + 0.1)
    return jaccard


def _unit_spans(graph: Graph, unit_id: str) -> list[DateSpan]:
    spans = []
    for text in graph.node(unit_id).properties.get("datesOfCreation", []):
        try:
            spans.append(DateSpan.from_text(str(text)))
        except ValueError:
            continue
    return spans


def suggest_copies(guide: Guide, graph: Graph, threshold: float = 0.85) -> list[CopyAssertion]:
    """Candidate copy assertions for every cross-repository unit pair in
    scope scoring at or above the threshold; already-confirmed links are
    skipped. Candidates are remembered on the guide for confirmation."""
    if not 0.0 < threshold <= 1.0:
        raise DomainError("bad-threshold", f"threshold must be in (0, 1], got {threshold}")
    by_repo: dict[str, list[str]] = {}
    for unit_id in sorted(guide.unit_ids):
        repos = [n.id for n in graph.neighbors(unit_id, "heldBy", "out")]
        if repos:
            by_repo.setdefault(repos[0], []).append(unit_id)
    repo_ids = sorted(by_repo)
    found: list[CopyAssertion] = []
    for i, repo_a in enumerate(repo_ids):
        for repo_b in repo_ids[i + 1 :]:
            for unit_a in by_repo[repo_a]:
                title_a = str(graph.node(unit_a).properties.get("title", ""))
                spans_a = _unit_spans(graph, unit_a)
                for unit_b in by_repo[repo_b]:
                    if graph.has_edge(*_copy_edge_key(unit_a, unit_b)):
                        continue
                    title_b = str(graph.node(unit_b).properties.get("title", ""))
                    similarity = title_similarity(title_a, title_b, spans_a,
                                                  _unit_spans(graph, unit_b))
                    if similarity >= threshold:
                        assertion = CopyAssertion(
                            unit_a=min(unit_a, unit_b),
                            unit_b=max(unit_a, unit_b),
                            basis=f"suggested:{similarity:.4f}",
                            status="candidate",
                            similarity=similarity,
                        )
                        guide.candidates[assertion.pair] = assertion
                        found.append(assertion)
    found.sort(key=lambda a: (-a.similarity, a.unit_a, a.unit_b))
    return found


def _copy_edge_key(unit_a: str, unit_b: str) -> tuple[str, str, str]:
    first, second = sorted((unit_a, unit_b))
    return first, "copyOf", second


def confirm_copy(guide: Guide, graph: Graph, unit_a: str, unit_b: str,
                 source_text: str = "") -> CopyAssertion:
    """Promote a candidate to a confirmed copy link (idempotent); the copyOf
    edge is stored once and traversed symmetrically."""
    pair = tuple(sorted((unit_a, unit_b)))
    src, label, dst = _copy_edge_key(unit_a, unit_b)
    if graph.has_edge(src, label, dst):
        existing = guide.candidates.get(pair)
        if existing is not None:
            existing.status = "confirmed"
            return existing
        properties = graph.edge(src, label, dst).properties
        return CopyAssertion(src, dst, str(properties.get("basis", "asserted:")), "confirmed", 1.0)
    assertion = guide.candidates.get(pair)
    if assertion is None:
        raise DomainError("unknown-assertion",
                          f"no candidate for ({unit_a!r}, {unit_b!r}); run suggest_copies first",
                          pair=list(pair))
    assertion.status = "confirmed"
    if source_text:
        assertion.basis = f"asserted:{source_text}"
    graph.add_edge(src, label, dst, {"basis": assertion.basis})
    return assertion


def copies_of(graph: Graph, unit_id: str) -> list[str]:
    """Unit ids linked to this one by confirmed copy links (either side)."""
    return [n.id for n in graph.neighbors(unit_id, "copyOf", "both")]


def biography(guide: Guide, graph: Graph, store: AuthorityStore, person_id: str) -> dict:
    """An authority record with the scope units and events that mention it."""
    resolved = store.aliases.get(person_id, person_id)
    if resolved not in guide.biography_ids or resolved not in store.persons:
        raise DomainError("unknown-person", f"person {person_id!r} is not in this guide",
                          person=person_id)
    person = store.persons[resolved]
    linked_units = sorted(
        n.id for n in graph.neighbors(resolved, "aboutPerson", "in")
        if n.id in guide.unit_ids
    )
    events = sorted(
        n.id for n in graph.neighbors(resolved, "aboutPerson", "in") if n.kind == "event"
    )
    return {
        "person": {
            "personId": person.person_id,
            "names": person.names,
            "lifeDates": person.life_dates.to_text() if person.life_dates else None,
            "biography": person.biography,
            "concordance": sorted(f"{db}|{lid}" for db, lid in person.concordance),
        },
        "linkedUnits": linked_units,
        "events": events,
    }
