"""Multilingual terminological database: thesaurus, authorities, expansion.

Catalogue text arrives in Czech, German, English and transliterations, so
matching folds case, diacritics, and whitespace. Query expansion translates
a term into every label of the matched concepts plus their narrower closure,
with a trace explaining where each expanded term came from.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Optional

from nexus.core import DateSpan
from nexus.errors import DomainError
from nexus.graph import Graph

_WS_RE = re.compile(r"\s+")
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def normalize(text: str) -> str:
    """Case-fold, strip combining marks, collapse whitespace.

    Decomposition runs before and after the fold: compatibility characters
    must decompose before folding (and folding can emit decomposable
    sequences), otherwise normalize would not be idempotent.

    "Terezín" and "TEREZIN" normalize to the same string.
    """
    decomposed = unicodedata.normalize("NFKD", text)
    folded = unicodedata.normalize("NFKD", decomposed.casefold())
    stripped = "".join(ch for ch in folded if not unicodedata.combining(ch))
    return _WS_RE.sub(" ", stripped).strip()


def tokenize(text: str) -> list[str]:
    """Normalized word tokens of a text."""
    return _TOKEN_RE.findall(normalize(text))


def candidate_terms(text: str, max_ngram: int = 3) -> list[str]:
    """Lookup candidates for free text: tokens plus short token n-grams,
    so multi-word thesaurus labels ("transport lists") can match inside a
    longer query. Order preserved, duplicates dropped."""
    tokens = tokenize(text)
    seen: set[str] = set()
    out: list[str] = []
    for n in range(1, max_ngram + 1):
        for i in range(len(tokens) - n + 1):
            term = " ".join(tokens[i : i + n])
            if term not in seen:
                seen.add(term)
                out.append(term)
    return out


@dataclass
class Concept:
    """A thesaurus term with multilingual labels and narrower children."""

    concept_id: str
    pref_label: dict[str, str] = field(default_factory=dict)
    alt_labels: dict[str, list[str]] = field(default_factory=dict)
    definition: dict[str, str] = field(default_factory=dict)
    narrower: list[str] = field(default_factory=list)

    def labels(self, languages: Optional[Iterable[str]] = None) -> list[str]:
        """All labels, restricted to the given languages when provided."""
        wanted = set(languages) if languages else None
        out = []
        for lang, label in sorted(self.pref_label.items()):
            if wanted is None or lang in wanted:
                out.append(label)
        for lang, labels in sorted(self.alt_labels.items()):
            if wanted is None or lang in wanted:
                out.extend(labels)
        return out


@dataclass
class PersonAuthority:
    person_id: str
    names: list[dict] = field(default_factory=list)  # {text, lang, type}
    life_dates: Optional[DateSpan] = None
    biography: str = ""
    concordance: set[tuple[str, str]] = field(default_factory=set)

    def primary_name(self) -> str:
        for name in self.names:
            if name.get("type") == "primary":
                return name["text"]
        return self.names[0]["text"] if self.names else self.person_id

    def all_names(self) -> list[str]:
        return [n["text"] for n in self.names]


@dataclass
class PlaceAuthority:
    place_id: str
    names: dict[str, list[str]] = field(default_factory=dict)  # lang -> names
    latitude: float = 0.0
    longitude: float = 0.0
    geometry: str = "point"  # "point" | "polygon"
    polygon: list[tuple[float, float]] = field(default_factory=list)
    within_place: Optional[str] = None

    def all_names(self) -> list[str]:
        out = []
        for lang in sorted(self.names):
            out.extend(self.names[lang])
        return out

    def problems(self) -> list[str]:
        out = []
        if not (-90.0 <= self.latitude <= 90.0):
            out.append(f"latitude {self.latitude} out of range")
        if not (-180.0 <= self.longitude <= 180.0):
            out.append(f"longitude {self.longitude} out of range")
        if self.geometry == "polygon":
            if len(self.polygon) < 3:
                out.append("polygon needs at least 3 vertices")
            elif self.polygon[0] != self.polygon[-1]:
                out.append("polygon is not closed")
        elif self.geometry != "point":
            out.append(f"unknown geometry {self.geometry!r}")
        return out


@dataclass
class TraceEntry:
    """Why one expanded term is in the result."""

    expanded_term: str
    via: str  # "original" | "prefLabel" | "altLabel" | "narrower-closure"
    source_term: str
    concept_id: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "expandedTerm": self.expanded_term,
            "via": self.via,
            "sourceTerm": self.source_term,
            "conceptId": self.concept_id,
        }


@dataclass
class ExpandedQuery:
    original_terms: list[str]
    matched_concepts: set[str] = field(default_factory=set)
    expanded_terms: set[str] = field(default_factory=set)
    trace: list[TraceEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "originalTerms": self.original_terms,
            "matchedConcepts": sorted(self.matched_concepts),
            "expandedTerms": sorted(self.expanded_terms),
            "trace": [t.to_dict() for t in self.trace],
        }


class Thesaurus:
    """Concept store with label lookup and narrower-closure expansion."""

    def __init__(self) -> None:
        self.concepts: dict[str, Concept] = {}
        # (language, normalized label) -> concept ids; None language = any
        self._label_index: dict[tuple[Optional[str], str], set[str]] = {}

    def __len__(self) -> int:
        return len(self.concepts)

    def add(self, concept: Concept) -> None:
        self.concepts[concept.concept_id] = concept

    def _index_label(self, concept_id: str, lang: str, label: str) -> None:
        norm = normalize(label)
        if not norm:
            return
        self._label_index.setdefault((lang, norm), set()).add(concept_id)
        self._label_index.setdefault((None, norm), set()).add(concept_id)

    def validate(self) -> None:
        """Check hierarchy consistency; raises on the first violation."""
        for concept in self.concepts.values():
            if not concept.pref_label:
                raise DomainError("malformed-file",
                                  f"concept {concept.concept_id!r} has no prefLabel",
                                  concept=concept.concept_id)
            for child in concept.narrower:
                if child not in self.concepts:
                    raise DomainError("malformed-file",
                                      f"concept {concept.concept_id!r} names unknown narrower {child!r}",
                                      concept=concept.concept_id, narrower=child)
        cycle = self._find_cycle()
        if cycle:
            raise DomainError("cycle-detected",
                              "narrower hierarchy has a cycle: " + " -> ".join(cycle),
                              cycle=cycle)

    def _find_cycle(self) -> Optional[list[str]]:
        WHITE, GRAY, BLACK = 0, 1, 2
        state = {cid: WHITE for cid in self.concepts}
        stack: list[str] = []

        def visit(cid: str) -> Optional[list[str]]:
            state[cid] = GRAY
            stack.append(cid)
            for child in self.concepts[cid].narrower:
                if state[child] == GRAY:
                    return stack[stack.index(child):] + [child]
                if state[child] == WHITE:
                    found = visit(child)
                    if found:
                        return found
            stack.pop()
            state[cid] = BLACK
            return None

        for cid in sorted(self.concepts):
            if state[cid] == WHITE:
                found = visit(cid)
                if found:
                    return found
        return None

    def reindex(self) -> None:
        self._label_index.clear()
        for concept in self.concepts.values():
            for lang, label in concept.pref_label.items():
                self._index_label(concept.concept_id, lang, label)
            for lang, labels in concept.alt_labels.items():
                for label in labels:
                    self._index_label(concept.concept_id, lang, label)

    def broader_of(self, concept_id: str) -> list[str]:
        """Derived inverse of narrower."""
        return sorted(cid for cid, c in self.concepts.items() if concept_id in c.narrower)

    def lookup(self, term: str, language: Optional[str] = None) -> set[str]:
        """Concepts whose pref or alt label equals the normalized term."""
        return set(self._label_index.get((language, normalize(term)), set()))

    def narrower_closure(self, concept_id: str, max_depth: Optional[int] = None) -> set[str]:
        """Transitive narrower descendants, cycle-guarded, excluding the start."""
        seen: set[str] = set()
        frontier = [concept_id]
        depth = 0
        while frontier and (max_depth is None or depth < max_depth):
            depth += 1
            nxt = []
            for cid in frontier:
                for child in self.concepts.get(cid, Concept(cid)).narrower:
                    if child != concept_id and child not in seen:
                        seen.add(child)
                        nxt.append(child)
            frontier = nxt
        return seen

    def match_via(self, concept: Concept, norm_term: str) -> str:
        """Whether a normalized term hit the pref or an alt label."""
        for label in concept.pref_label.values():
            if normalize(label) == norm_term:
                return "prefLabel"
        return "altLabel"

    def _collect_concept(self, result: ExpandedQuery, concept_id: str, term: str,
                         language_list: Optional[list[str]],
                         max_depth: Optional[int]) -> None:
        concept = self.concepts[concept_id]
        result.matched_concepts.add(concept_id)
        via = self.match_via(concept, normalize(term))
        for label in concept.labels(language_list):
            expanded = normalize(label)
            if expanded and expanded not in result.expanded_terms:
                result.expanded_terms.add(expanded)
                result.trace.append(TraceEntry(expanded, via, term, concept_id))
        for child_id in sorted(self.narrower_closure(concept_id, max_depth)):
            child = self.concepts[child_id]
            for label in child.labels(language_list):
                expanded = normalize(label)
                if expanded and expanded not in result.expanded_terms:
                    result.expanded_terms.add(expanded)
                    result.trace.append(TraceEntry(expanded, "narrower-closure", term, child_id))

    def expand_query(self, terms: Iterable[str], languages: Optional[Iterable[str]] = None,
                     max_depth: Optional[int] = None) -> ExpandedQuery:
        """Translate and expand terms via the thesaurus.

        Every matched concept contributes its labels in the requested
        languages (all languages when none given), plus the labels of its
        transitive narrower closure. The normalized original terms are always
        included, and the trace explains every expanded term.
        """
        language_list = list(languages) if languages else None
        result = ExpandedQuery(original_terms=list(terms))
        for term in result.original_terms:
            norm = normalize(term)
            if not norm:
                continue
            if norm not in result.expanded_terms:
                result.expanded_terms.add(norm)
                result.trace.append(TraceEntry(norm, "original", term))
            for concept_id in sorted(self.lookup(term)):
                self._collect_concept(result, concept_id, term, language_list, max_depth)
        return result

    def expand_text(self, text: str, languages: Optional[Iterable[str]] = None,
                    max_depth: Optional[int] = None) -> ExpandedQuery:
        """Expand free text: concepts are matched against the text's tokens
        and short token n-grams (so labels inside a longer question still
        hit), but only the full normalized text plus matched-concept labels
        enter the expanded set; loose single tokens do not."""
        language_list = list(languages) if languages else None
        result = ExpandedQuery(original_terms=[text])
        norm = normalize(text)
        if norm:
            result.expanded_terms.add(norm)
            result.trace.append(TraceEntry(norm, "original", text))
        for term in candidate_terms(text):
            for concept_id in sorted(self.lookup(term)):
                self._collect_concept(result, concept_id, term, language_list, max_depth)
        return result

    def expand_bag(self, tokens: list[str], languages: Optional[Iterable[str]] = None,
                   max_depth: Optional[int] = None) -> ExpandedQuery:
        """Order-invariant expansion over a token bag: a concept matches when
        every token of one of its labels occurs among the given tokens, so
        reordering the question can never change the result."""
        language_list = list(languages) if languages else None
        result = ExpandedQuery(original_terms=list(tokens))
        token_set = {normalize(t) for t in tokens} - {""}
        for token in sorted(token_set):
            if token not in result.expanded_terms:
                result.expanded_terms.add(token)
                result.trace.append(TraceEntry(token, "original", token))
        for concept_id in sorted(self.concepts):
            concept = self.concepts[concept_id]
            for label in concept.labels(None):
                label_tokens = set(tokenize(label))
                if label_tokens and label_tokens <= token_set:
                    self._collect_concept(result, concept_id, label, language_list, max_depth)
                    break
        return result


def load_thesaurus_file(path: str, thesaurus: Optional[Thesaurus] = None) -> Thesaurus:
    """Load the line-oriented thesaurus format:

        concept-id <TAB> field <TAB> language <TAB> value

    field is prefLabel, altLabel, or definition (language = code), or
    narrower (language column "-", value = child concept id). Blank lines and
    lines starting with "#" are skipped.
    """
    if thesaurus is None:
        thesaurus = Thesaurus()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise DomainError("io-failure", f"cannot read thesaurus: {exc}", path=path) from exc
    for number, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise DomainError("malformed-file", f"line {number}: expected 4 tab-separated fields",
                              path=path, line=number)
        concept_id, kind, lang, value = fields
        concept = thesaurus.concepts.get(concept_id)
        if concept is None:
            concept = Concept(concept_id)
            thesaurus.add(concept)
        if kind == "prefLabel":
            concept.pref_label[lang] = value
        elif kind == "altLabel":
            labels = concept.alt_labels.setdefault(lang, [])
            if value not in labels:
                labels.append(value)
        elif kind == "definition":
            concept.definition[lang] = value
        elif kind == "narrower":
            if value not in concept.narrower:
                concept.narrower.append(value)
        else:
            raise DomainError("malformed-file", f"line {number}: unknown field {kind!r}",
                              path=path, line=number)
    thesaurus.validate()
    thesaurus.reindex()
    return thesaurus


class AuthorityStore:
    """Person and place authorities plus the cross-database concordance."""

    def __init__(self) -> None:
        self.persons: dict[str, PersonAuthority] = {}
        self.places: dict[str, PlaceAuthority] = {}
        self._pairs: dict[tuple[str, str], str] = {}
        self.aliases: dict[str, str] = {}  # absorbed person id -> survivor

    # -- persons -----------------------------------------------------------

    def add_person(self, person: PersonAuthority) -> None:
        for pair in person.concordance:
            owner = self._pairs.get(pair)
            if owner is not None and owner != person.person_id:
                raise DomainError("ambiguous-concordance",
                                  f"pair {pair!r} already belongs to {owner!r}",
                                  pair=list(pair), owner=owner)
        self.persons[person.person_id] = person
        for pair in person.concordance:
            self._pairs[pair] = person.person_id

    def load_concordance(self, path: str) -> int:
        """Load `databaseCode<TAB>localId<TAB>personId` rows; each pair may
        belong to exactly one person. Returns the number of pairs loaded."""
        try:
            with open(path, "r", encoding="utf-8") as handle:
                lines = handle.readlines()
        except OSError as exc:
            raise DomainError("io-failure", f"cannot read concordance: {exc}", path=path) from exc
        staged: dict[tuple[str, str], str] = {}
        for number, line in enumerate(lines, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise DomainError("malformed-file", f"line {number}: expected 3 tab-separated fields",
                                  path=path, line=number)
            db_code, local_id, person_id = fields
            pair = (db_code, local_id)
            existing = staged.get(pair, self._pairs.get(pair))
            if existing is not None and existing != person_id:
                raise DomainError("ambiguous-concordance",
                                  f"line {number}: pair {pair!r} assigned to both "
                                  f"{existing!r} and {person_id!r}",
                                  pair=list(pair), line=number)
            staged[pair] = person_id
        for (db_code, local_id), person_id in staged.items():
            person = self.persons.get(person_id)
            if person is None:
                person = PersonAuthority(person_id)
                self.persons[person_id] = person
            person.concordance.add((db_code, local_id))
            self._pairs[(db_code, local_id)] = person_id
        return len(staged)

    def resolve_person(self, database_code: str, local_id: str) -> PersonAuthority:
        person_id = self._pairs.get((database_code, local_id))
        if person_id is None:
            raise DomainError("unknown-pair",
                              f"no person for ({database_code!r}, {local_id!r})",
                              databaseCode=database_code, localId=local_id)
        return self.persons[person_id]

    def merge_persons(self, id_a: str, id_b: str, graph: Optional[Graph] = None) -> PersonAuthority:
        """Fold two authorities into one (the lower id survives); concordance
        pairs and names are unioned, graph references re-pointed, and the
        absorbed id kept as a sameAs alias."""
        if id_a == id_b:
            raise DomainError("identical-ids", f"cannot merge {id_a!r} with itself")
        for pid in (id_a, id_b):
            if pid not in self.persons:
                raise DomainError("unknown-id", f"no person {pid!r}", id=pid)
        survivor_id, absorbed_id = sorted((id_a, id_b))
        survivor = self.persons[survivor_id]
        absorbed = self.persons.pop(absorbed_id)
        existing_names = {(n["text"], n.get("lang", ""), n.get("type", "")) for n in survivor.names}
        for name in absorbed.names:
            key = (name["text"], name.get("lang", ""), name.get("type", ""))
            if key not in existing_names:
                demoted = dict(name)
                if demoted.get("type") == "primary":
                    demoted["type"] = "variant"
                survivor.names.append(demoted)
                existing_names.add(key)
        for pair in absorbed.concordance:
            survivor.concordance.add(pair)
            self._pairs[pair] = survivor_id
        if not survivor.biography:
            survivor.biography = absorbed.biography
        if survivor.life_dates is None:
            survivor.life_dates = absorbed.life_dates
        self.aliases[absorbed_id] = survivor_id
        if graph is not None and graph.has_node(absorbed_id):
            _repoint_node(graph, absorbed_id, survivor_id)
            graph.node(absorbed_id).properties["aliasOf"] = survivor_id
            sync_person_node(graph, survivor)
        return survivor

    # -- places ------------------------------------------------------------

    def add_place(self, place: PlaceAuthority) -> None:
        problems = place.problems()
        if problems:
            raise DomainError("bad-place", f"place {place.place_id!r}: " + "; ".join(problems),
                              place=place.place_id)
        self.places[place.place_id] = place


def _repoint_node(graph: Graph, old_id: str, new_id: str) -> None:
    """Move every non-sameAs edge touching old_id onto new_id, then link the
    two with sameAs so the alias stays discoverable."""
    moved = []
    for edge in list(graph.edges()):
        if edge.label == "sameAs":
            continue
        if edge.src == old_id or edge.dst == old_id:
            moved.append(edge)
    for edge in moved:
        graph.remove_edge(edge.src, edge.label, edge.dst)
        src = new_id if edge.src == old_id else edge.src
        dst = new_id if edge.dst == old_id else edge.dst
        if src != dst:
            graph.add_edge(src, edge.label, dst, edge.properties)
    graph.add_edge(new_id, "sameAs", old_id, {})


# -- graph mirroring ---------------------------------------------------------
#
# Concepts and authorities are mirrored as registry nodes so units can link
# to them and so a snapshot restores the full terminology. Multilingual
# labels are flattened to "lang|text" strings (properties hold only scalars
# and lists of scalars).


def _pack(lang: str, *parts: str) -> str:
    return "|".join((lang,) + parts)


def sync_concept_node(graph: Graph, concept: Concept) -> None:
    properties = {
        "prefLabel": [_pack(l, t) for l, t in sorted(concept.pref_label.items())],
        "altLabel": [_pack(l, t) for l, labels in sorted(concept.alt_labels.items()) for t in labels],
        "definition": [_pack(l, t) for l, t in sorted(concept.definition.items())],
    }
    graph.upsert_node("concept", concept.concept_id, properties)


def sync_thesaurus(graph: Graph, thesaurus: Thesaurus) -> None:
    for concept in thesaurus.concepts.values():
        sync_concept_node(graph, concept)
    for concept in thesaurus.concepts.values():
        for child in concept.narrower:
            graph.add_edge(concept.concept_id, "narrower", child)


def thesaurus_from_graph(graph: Graph) -> Thesaurus:
    thesaurus = Thesaurus()
    for node in graph.nodes("concept"):
        concept = Concept(node.id)
        for packed in node.properties.get("prefLabel", []):
            lang, text = packed.split("|", 1)
            concept.pref_label[lang] = text
        for packed in node.properties.get("altLabel", []):
            lang, text = packed.split("|", 1)
            concept.alt_labels.setdefault(lang, []).append(text)
        for packed in node.properties.get("definition", []):
            lang, text = packed.split("|", 1)
            concept.definition[lang] = text
        thesaurus.add(concept)
    for node in graph.nodes("concept"):
        children = [n.id for n in graph.neighbors(node.id, "narrower", "out")]
        thesaurus.concepts[node.id].narrower = children
    thesaurus.reindex()
    return thesaurus


def sync_person_node(graph: Graph, person: PersonAuthority) -> None:
    properties = {
        "name": [_pack(n.get("lang", ""), n.get("type", "variant"), n["text"]) for n in person.names],
        "biography": person.biography,
        "concordance": sorted(f"{db}|{lid}" for db, lid in person.concordance),
    }
    if person.life_dates is not None:
        properties["lifeDates"] = person.life_dates.to_text()
    graph.upsert_node("authority-person", person.person_id, properties)


def persons_from_graph(graph: Graph, store: AuthorityStore) -> None:
    for node in graph.nodes("authority-person"):
        if "aliasOf" in node.properties:
            store.aliases[node.id] = str(node.properties["aliasOf"])
            continue
        person = PersonAuthority(node.id)
        for packed in node.properties.get("name", []):
            lang, name_type, text = packed.split("|", 2)
            person.names.append({"text": text, "lang": lang, "type": name_type})
        person.biography = str(node.properties.get("biography", ""))
        if "lifeDates" in node.properties:
            person.life_dates = DateSpan.from_text(str(node.properties["lifeDates"]))
        for packed in node.properties.get("concordance", []):
            db, lid = packed.split("|", 1)
            person.concordance.add((db, lid))
        store.add_person(person)


def sync_place_node(graph: Graph, place: PlaceAuthority) -> None:
    properties = {
        "name": [_pack(lang, t) for lang, names in sorted(place.names.items()) for t in names],
        "latitude": place.latitude,
        "longitude": place.longitude,
        "geometry": place.geometry,
        "polygon": [f"{lat},{lon}" for lat, lon in place.polygon],
    }
    graph.upsert_node("authority-place", place.place_id, properties)
    if place.within_place and graph.has_node(place.within_place):
        graph.add_edge(place.place_id, "locatedAt", place.within_place)


def places_from_graph(graph: Graph, store: AuthorityStore) -> None:
    for node in graph.nodes("authority-place"):
        place = PlaceAuthority(node.id)
        for packed in node.properties.get("name", []):
            lang, text = packed.split("|", 1)
            place.names.setdefault(lang, []).append(text)
        place.latitude = float(node.properties.get("latitude", 0.0))
        place.longitude = float(node.properties.get("longitude", 0.0))
        place.geometry = str(node.properties.get("geometry", "point"))
        place.polygon = [
            (float(lat), float(lon))
            for lat, lon in (pair.split(",") for pair in node.properties.get("polygon", []))
        ]
        parents = [n.id for n in graph.neighbors(node.id, "locatedAt", "out")]
        place.within_place = parents[0] if parents else None
        store.add_place(place)
