"""Application wiring: configuration, state assembly, and orchestration.

A Portal owns the registry graph plus the derived read models (thesaurus,
authorities, search index, helpdesk knowledge base, guides). Mutations
serialize through one lock and bump a version counter; the index and KB are
rebuilt after write batches and swapped in whole, so readers never see a
half-applied import.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from nexus import annotations as annotations_mod
from nexus import guide as guide_mod
from nexus import helpdesk as helpdesk_mod
from nexus import ingest as ingest_mod
from nexus import search as search_mod
from nexus import vocab as vocab_mod
from nexus.core import DateSpan, Repository, validate_repository
from nexus.errors import DomainError
from nexus.graph import Graph


@dataclass
class ServiceConfig:
    listen_address: str = "127.0.0.1:8423"
    data_directory: str = "nexus-data"
    snapshot_file: str = "graph.snap"
    thesaurus_files: list[str] = field(default_factory=list)
    concordance_files: list[str] = field(default_factory=list)
    persons_files: list[str] = field(default_factory=list)
    places_files: list[str] = field(default_factory=list)
    events_files: list[str] = field(default_factory=list)
    repositories_files: list[str] = field(default_factory=list)
    stopword_files: list[str] = field(default_factory=list)
    harvest_attempts: int = 3
    harvest_backoff_seconds: float = 0.2
    page_size_default: int = 20
    page_size_max: int = 200

    def snapshot_path(self) -> Path:
        return Path(self.data_directory) / self.snapshot_file

    def validate(self) -> None:
        if self.page_size_default > self.page_size_max:
            raise DomainError("config-invalid",
                              f"pageSizeDefault {self.page_size_default} exceeds "
                              f"pageSizeMax {self.page_size_max}")
        if self.page_size_default < 1:
            raise DomainError("config-invalid", "pageSizeDefault must be positive")
        host, _, port = self.listen_address.rpartition(":")
        if not host or not port.isdigit():
            raise DomainError("config-invalid",
                              f"listenAddress {self.listen_address!r} is not host:port")
        for name in ("thesaurus_files", "concordance_files", "persons_files",
                     "places_files", "events_files", "repositories_files",
                     "stopword_files"):
            for file_path in getattr(self, name):
                if not Path(file_path).exists():
                    raise DomainError("config-invalid", f"{name} entry not found: {file_path}")

    @classmethod
    def load(cls, path: str) -> "ServiceConfig":
        try:
            with open(path, "r", encoding="utf-8") as handle:
                raw = json.load(handle)
        except OSError as exc:
            raise DomainError("config-invalid", f"cannot read config: {exc}", path=path) from exc
        except json.JSONDecodeError as exc:
            raise DomainError("config-invalid", f"config is not valid JSON: {exc}",
                              path=path) from exc
        config = cls(
            listen_address=raw.get("listenAddress", cls.listen_address),
            data_directory=raw.get("dataDirectory", cls.data_directory),
            snapshot_file=raw.get("snapshotFile", cls.snapshot_file),
            thesaurus_files=list(raw.get("thesaurusFiles", [])),
            concordance_files=list(raw.get("concordanceFiles", [])),
            persons_files=list(raw.get("personsFiles", [])),
            places_files=list(raw.get("placesFiles", [])),
            events_files=list(raw.get("eventsFiles", [])),
            repositories_files=list(raw.get("repositoriesFiles", [])),
            stopword_files=list(raw.get("stopwordFiles", [])),
            harvest_attempts=int(raw.get("harvestRetry", {}).get("attempts", 3)),
            harvest_backoff_seconds=float(raw.get("harvestRetry", {}).get("backoffSeconds", 0.2)),
            page_size_default=int(raw.get("pageSizeDefault", 20)),
            page_size_max=int(raw.get("pageSizeMax", 200)),
        )
        config.validate()
        return config


class Portal:
    """The assembled application: registry plus derived read models."""

    def __init__(self, config: Optional[ServiceConfig] = None):
        self.config = config or ServiceConfig()
        self.graph = Graph()
        self.thesaurus = vocab_mod.Thesaurus()
        self.store = vocab_mod.AuthorityStore()
        self.index = search_mod.SearchIndex()
        self.kb: Optional[helpdesk_mod.KnowledgeBase] = None
        self.annotations = annotations_mod.AnnotationService(self.graph)
        self.guides: dict[str, guide_mod.Guide] = {}
        self.stopwords = dict(helpdesk_mod.DEFAULT_STOPWORDS)
        self.version = 0
        self.lock = threading.RLock()

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def open(cls, config: ServiceConfig) -> "Portal":
        """Load the snapshot (when present), restore derived state from it,
        then merge any configured source files and rebuild read models."""
        portal = cls(config)
        snapshot = config.snapshot_path()
        if snapshot.exists():
            portal.graph = Graph.load(str(snapshot))
            portal.annotations = annotations_mod.AnnotationService(portal.graph)
            portal.thesaurus = vocab_mod.thesaurus_from_graph(portal.graph)
            vocab_mod.persons_from_graph(portal.graph, portal.store)
            vocab_mod.places_from_graph(portal.graph, portal.store)
        for path in config.stopword_files:
            portal.load_stopword_file(path)
        for path in config.thesaurus_files:
            portal.load_thesaurus_file(path)
        for path in config.persons_files:
            portal.load_persons_file(path)
        for path in config.concordance_files:
            portal.load_concordance_file(path)
        for path in config.places_files:
            portal.load_places_file(path)
        for path in config.repositories_files:
            portal.load_repositories_file(path)
        for path in config.events_files:
            portal.load_events_file(path)
        portal.rebuild()
        return portal

    def save(self) -> int:
        with self.lock:
            path = self.config.snapshot_path()
            path.parent.mkdir(parents=True, exist_ok=True)
            self.sync_vocab_nodes()
            return self.graph.snapshot(str(path))

    def sync_vocab_nodes(self) -> None:
        vocab_mod.sync_thesaurus(self.graph, self.thesaurus)
        for person in self.store.persons.values():
            vocab_mod.sync_person_node(self.graph, person)
        for place in self.store.places.values():
            vocab_mod.sync_place_node(self.graph, place)

    def rebuild(self) -> None:
        """Re-apply pending event links, then rebuild the search index and
        helpdesk KB from the current graph and publish them atomically."""
        with self.lock:
            guide_mod.relink_events(self.graph)
            index = search_mod.build_index(self.graph, self.thesaurus)
            kb = helpdesk_mod.build_kb(self.graph, self.thesaurus, self.stopwords)
            self.index = index
            self.kb = kb

    def _bump(self) -> None:
        self.version += 1

    # -- vocabulary and authority loading ------------------------------------

    def load_stopword_file(self, path: str) -> None:
        """One word per line; the file stem is the language code."""
        lang = Path(path).stem
        try:
            with open(path, "r", encoding="utf-8") as handle:
                words = frozenset(line.strip() for line in handle if line.strip())
        except OSError as exc:
            raise DomainError("io-failure", f"cannot read stopwords: {exc}", path=path) from exc
        self.stopwords[lang] = words

    def load_thesaurus_file(self, path: str) -> int:
        with self.lock:
            before = len(self.thesaurus)
            vocab_mod.load_thesaurus_file(path, self.thesaurus)
            vocab_mod.sync_thesaurus(self.graph, self.thesaurus)
            self._bump()
            return len(self.thesaurus) - before

    def load_concordance_file(self, path: str) -> int:
        with self.lock:
            count = self.store.load_concordance(path)
            for person in self.store.persons.values():
                vocab_mod.sync_person_node(self.graph, person)
            self._bump()
            return count

    def load_persons_file(self, path: str) -> int:
        with self.lock:
            count = 0
            for record in _read_jsonl(path):
                person = vocab_mod.PersonAuthority(
                    person_id=record["personId"],
                    names=list(record.get("names", [])),
                    life_dates=(DateSpan.from_text(record["lifeDates"])
                                if record.get("lifeDates") else None),
                    biography=record.get("biography", ""),
                    concordance={(db, lid) for db, lid in record.get("concordance", [])},
                )
                self.store.add_person(person)
                vocab_mod.sync_person_node(self.graph, person)
                count += 1
            self._bump()
            return count

    def load_places_file(self, path: str) -> int:
        with self.lock:
            count = 0
            for record in _read_jsonl(path):
                place = vocab_mod.PlaceAuthority(
                    place_id=record["placeId"],
                    names={lang: list(names) for lang, names in record.get("names", {}).items()},
                    latitude=float(record.get("latitude", 0.0)),
                    longitude=float(record.get("longitude", 0.0)),
                    geometry=record.get("geometry", "point"),
                    polygon=[(float(lat), float(lon)) for lat, lon in record.get("polygon", [])],
                    within_place=record.get("within"),
                )
                self.store.add_place(place)
                count += 1
            # second pass so within targets exist before locatedAt edges
            for record in _read_jsonl(path):
                vocab_mod.sync_place_node(self.graph, self.store.places[record["placeId"]])
            self._bump()
            return count

    def load_events_file(self, path: str) -> int:
        with self.lock:
            events = []
            for record in _read_jsonl(path):
                events.append(guide_mod.Event(
                    event_id=record["eventId"],
                    label=dict(record.get("label", {})),
                    when=DateSpan.from_text(record["when"]) if record.get("when") else None,
                    kind=record.get("kind", "point"),
                    linked_units=list(record.get("linkedUnits", [])),
                    persons=list(record.get("persons", [])),
                ))
            guide_mod.load_events_into_graph(self.graph, events)
            self._bump()
            return len(events)

    def load_repositories_file(self, path: str) -> int:
        with self.lock:
            count = 0
            for record in _read_jsonl(path):
                repo = Repository(
                    ehri_id=record["ehriId"],
                    authorized_form_of_name=record.get("authorizedFormOfName", ""),
                    country=record.get("country", ""),
                    other_names=list(record.get("otherNames", [])),
                    address=record.get("address", ""),
                    contact=record.get("contact", ""),
                    description_status=record.get("descriptionStatus", "draft"),
                    holdings_summary=record.get("holdingsSummary", ""),
                    harvest_endpoint=record.get("harvestEndpoint"),
                    harvest_capable=bool(record.get("harvestCapable", False)),
                )
                self.register_repository(repo, code=record.get("code", repo.ehri_id),
                                         replace=True)
                count += 1
            return count

    # -- repositories ---------------------------------------------------------

    def register_repository(self, repo: Repository, code: Optional[str] = None,
                            replace: bool = False) -> str:
        """Add an institution record; a second submission of the same id is
        rejected unless replace is set (file reloads use replace)."""
        report = validate_repository(repo)
        if report.has_errors:
            raise DomainError("invalid-repository",
                              "; ".join(i.message for i in report.issues),
                              issues=[i.code for i in report.issues])
        with self.lock:
            if self.graph.has_node(repo.ehri_id) and not replace:
                raise DomainError("duplicate-id",
                                  f"repository {repo.ehri_id!r} already registered",
                                  id=repo.ehri_id)
            self.graph.upsert_node("repository", repo.ehri_id, {
                "code": code or repo.ehri_id,
                "authorizedFormOfName": repo.authorized_form_of_name,
                "otherNames": list(repo.other_names),
                "country": repo.country,
                "address": repo.address,
                "contact": repo.contact,
                "descriptionStatus": repo.description_status,
                "holdingsSummary": repo.holdings_summary,
                "harvestCapable": repo.harvest_capable,
                "harvestEndpoint": repo.harvest_endpoint or "",
            })
            self._bump()
            return repo.ehri_id

    def repositories(self) -> list[dict]:
        out = []
        for node in self.graph.nodes("repository"):
            entry = dict(node.properties)
            entry["ehriId"] = node.id
            entry["unitCount"] = len(self.graph.neighbors(node.id, "heldBy", "in"))
            out.append(entry)
        return out

    # -- ingestion ---------------------------------------------------------------

    def ingest_file(self, repo_code: str, profile_path: str,
                    input_path: str) -> ingest_mod.ImportReport:
        profile = ingest_mod.load_profile(profile_path)
        with open(input_path, "rb") as handle:
            data = handle.read()
        return self.ingest_bytes(repo_code, profile, data)

    def ingest_bytes(self, repo_code: str, profile: ingest_mod.MappingProfile,
                     data: bytes) -> ingest_mod.ImportReport:
        if profile.source_kind == "nested-xml":
            units = ingest_mod.parse_nested(data, profile)
        else:
            units = ingest_mod.parse_table(data, profile)
        return self.import_units(units, repo_code)

    def ingest_harvest(self, repo_code: str, profile: ingest_mod.MappingProfile,
                       endpoint: str,
                       from_timestamp: Optional[str] = None) -> ingest_mod.ImportReport:
        retry = ingest_mod.RetryPolicy(self.config.harvest_attempts,
                                       self.config.harvest_backoff_seconds)
        records = ingest_mod.harvest(endpoint, from_timestamp, retry)
        units: list = []
        for record in records:
            units.extend(ingest_mod.parse_nested(b"<units>" + record.payload + b"</units>",
                                                 profile))
        return self.import_units(units, repo_code)

    def import_units(self, units, repo_code: str) -> ingest_mod.ImportReport:
        with self.lock:
            report = ingest_mod.import_batch(units, repo_code, self.graph,
                                             self.thesaurus, self.store)
            self._bump()
            self.rebuild()
            return report

    # -- reads ---------------------------------------------------------------------

    def search(self, query: str, languages: Optional[list[str]] = None,
               filters: Optional[dict[str, list[str]]] = None, page: int = 1,
               page_size: Optional[int] = None) -> search_mod.SearchResult:
        size = page_size or self.config.page_size_default
        if size > self.config.page_size_max:
            raise DomainError("invalid-page",
                              f"page size {size} exceeds maximum {self.config.page_size_max}")
        with self.lock:
            return search_mod.run_search(self.index, self.thesaurus, query, languages,
                                         filters, page, size)

    def ask(self, question: str, languages: Optional[list[str]] = None) -> helpdesk_mod.RoutingAnswer:
        with self.lock:
            if self.kb is None:
                raise DomainError("kb-not-built", "no knowledge base yet")
            return helpdesk_mod.route(self.kb, self.thesaurus, question, languages)

    def unit_view(self, global_id: str) -> dict:
        with self.lock:
            node = self.graph.node(global_id)
            if node.kind != "unit":
                raise DomainError("unknown-id", f"{global_id!r} is not a unit", id=global_id)
            breadcrumb: list[str] = []
            current = global_id
            while True:
                parents = [n.id for n in self.graph.neighbors(current, "partOf", "out")]
                if not parents:
                    break
                breadcrumb.insert(0, parents[0])
                current = parents[0]
            repos = self.graph.neighbors(global_id, "heldBy", "out")
            repository = None
            if repos:
                repository = {
                    "ehriId": repos[0].id,
                    "code": repos[0].properties.get("code", repos[0].id),
                    "name": repos[0].properties.get("authorizedFormOfName", ""),
                }
            copies = []
            for copy_id in guide_mod.copies_of(self.graph, global_id):
                copy_repos = self.graph.neighbors(copy_id, "heldBy", "out")
                copies.append({
                    "unitGlobalId": copy_id,
                    "repository": copy_repos[0].properties.get("code", copy_repos[0].id)
                    if copy_repos else None,
                })
            return {
                "globalId": global_id,
                "properties": dict(node.properties),
                "repository": repository,
                "breadcrumb": breadcrumb,
                "children": [n.id for n in self.graph.neighbors(global_id, "partOf", "in")],
                "annotations": [a.to_dict() for a in self.annotations.list_for(global_id)],
                "copies": copies,
            }

    def health(self) -> dict:
        with self.lock:
            return {
                "status": "ok",
                "version": self.version,
                "nodes": self.graph.node_count(),
                "edges": self.graph.edge_count(),
                "documents": self.index.stats.documents,
                "repositories": sum(1 for _ in self.graph.nodes("repository")),
            }

    # -- annotations ------------------------------------------------------------------

    def annotate(self, target_id: str, body_type: str, body_value: str, author: str,
                 body_url: str = "") -> annotations_mod.Annotation:
        with self.lock:
            annotation = self.annotations.create(target_id, body_type, body_value, author,
                                                 body_url)
            self._bump()
            return annotation

    def moderate(self, annotation_id: str, decision: str, moderator: str,
                 note: str = "") -> annotations_mod.Annotation:
        with self.lock:
            annotation = self.annotations.moderate(annotation_id, decision, moderator, note)
            self._bump()
            if decision == "accept":
                self.rebuild()  # promoted keywords must become searchable
            return annotation

    # -- guides ------------------------------------------------------------------------

    def build_guide(self, config: guide_mod.GuideConfig) -> guide_mod.Guide:
        with self.lock:
            built = guide_mod.build_guide(config, self.graph, self.thesaurus, self.store)
            self.guides[built.guide_id] = built
            self._bump()
            return built

    def get_guide(self, guide_id: str) -> guide_mod.Guide:
        found = self.guides.get(guide_id)
        if found is None:
            raise DomainError("unknown-guide", f"no guide {guide_id!r}", id=guide_id)
        return found

    def suggest_copies(self, guide_id: str, threshold: float = 0.85):
        with self.lock:
            return guide_mod.suggest_copies(self.get_guide(guide_id), self.graph, threshold)

    def confirm_copy(self, guide_id: str, unit_a: str, unit_b: str, source_text: str = ""):
        with self.lock:
            assertion = guide_mod.confirm_copy(self.get_guide(guide_id), self.graph,
                                               unit_a, unit_b, source_text)
            self._bump()
            return assertion


def _read_jsonl(path: str) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return [json.loads(line) for line in handle if line.strip()]
    except OSError as exc:
        raise DomainError("io-failure", f"cannot read {path}: {exc}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise DomainError("malformed-file", f"{path} is not JSON lines: {exc}", path=path) from exc
