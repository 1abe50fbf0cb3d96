"""Indexing and ranked, faceted retrieval over the registry.

Documents are unit nodes; fields carry fixed weights (title 3.0, keywords
2.0, scope 1.0, person/place labels 2.0). Scoring is the cosine between
query and document vectors where a document term weighs

    idf(t) * sum over fields f of fieldWeight(f) * (1 + ln tf(f, t))

with idf(t) = ln((N + 1) / (df(t) + 1)). The query side uses weight
(1 + ln tf) * idf with no field factor. Scores land in [0, 1] and ties
break by ascending unit id, so rankings are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from nexus.errors import DomainError
from nexus.graph import Graph
from nexus.vocab import ExpandedQuery, Thesaurus, tokenize

FIELD_WEIGHTS = {
    "title": 3.0,
    "keywords": 2.0,
    "scopeContent": 1.0,
    "authorities": 2.0,  # person and place labels
}

FACET_NAMES = ("repository", "country", "level", "languageOfMaterial", "dateBucket")


@dataclass
class IndexDocument:
    unit_global_id: str
    field_tokens: dict[str, list[str]] = field(default_factory=dict)
    facets: dict[str, list[str]] = field(default_factory=dict)


@dataclass
class IndexStats:
    documents: int
    terms: int

    def to_dict(self) -> dict:
        return {"documents": self.documents, "terms": self.terms}


@dataclass
class Hit:
    unit_global_id: str
    score: float
    matched_terms: list[str]

    def to_dict(self) -> dict:
        return {
            "unitGlobalId": self.unit_global_id,
            "score": self.score,
            "matchedTerms": self.matched_terms,
        }


@dataclass
class SearchResult:
    hits: list[Hit]
    facet_counts: dict[str, dict[str, int]]
    total_hits: int
    applied_expansion: ExpandedQuery
    page: int
    page_size: int

    def to_dict(self) -> dict:
        return {
            "hits": [h.to_dict() for h in self.hits],
            "facetCounts": self.facet_counts,
            "totalHits": self.total_hits,
            "appliedExpansion": self.applied_expansion.to_dict(),
            "page": self.page,
            "pageSize": self.page_size,
        }


def decade_bucket(year: int) -> str:
    return f"{year // 10 * 10}s"


class SearchIndex:
    """Immutable once built; rebuilt from a published graph version."""

    def __init__(self) -> None:
        self.documents: dict[str, IndexDocument] = {}
        self._doc_vectors: dict[str, dict[str, float]] = {}
        self._doc_norms: dict[str, float] = {}
        self._postings: dict[str, set[str]] = {}
        self._df: dict[str, int] = {}
        self._n = 0

    @property
    def stats(self) -> IndexStats:
        return IndexStats(documents=self._n, terms=len(self._df))

    def idf(self, term: str) -> float:
        return math.log((self._n + 1) / (self._df.get(term, 0) + 1))

    def add_document(self, doc: IndexDocument) -> None:
        self.documents[doc.unit_global_id] = doc

    def finalize(self) -> None:
        """Compute document frequencies, vectors, and norms."""
        self._n = len(self.documents)
        self._df.clear()
        self._postings.clear()
        for doc_id, doc in self.documents.items():
            terms = {t for tokens in doc.field_tokens.values() for t in tokens}
            for term in terms:
                self._df[term] = self._df.get(term, 0) + 1
                self._postings.setdefault(term, set()).add(doc_id)
        self._doc_vectors.clear()
        self._doc_norms.clear()
        for doc_id, doc in self.documents.items():
            vector: dict[str, float] = {}
            for field_name, tokens in doc.field_tokens.items():
                weight = FIELD_WEIGHTS[field_name]
                counts: dict[str, int] = {}
                for token in tokens:
                    counts[token] = counts.get(token, 0) + 1
                for term, tf in counts.items():
                    vector[term] = vector.get(term, 0.0) + weight * (1.0 + math.log(tf))
            for term in vector:
                vector[term] *= self.idf(term)
            self._doc_vectors[doc_id] = vector
            self._doc_norms[doc_id] = math.sqrt(sum(w * w for w in vector.values()))

    def query_vector(self, query_tokens: Iterable[str]) -> dict[str, float]:
        counts: dict[str, int] = {}
        for token in query_tokens:
            counts[token] = counts.get(token, 0) + 1
        return {term: (1.0 + math.log(tf)) * self.idf(term) for term, tf in counts.items()}

    def score(self, doc_id: str, expanded_terms: Iterable[str]) -> float:
        """Cosine similarity of one document against an expanded term set.

        Multi-word terms are split; the query vector is built over the
        distinct tokens (each weighing idf, since tf = 1).
        """
        vector = self.query_vector(expanded_tokens(expanded_terms))
        return self._cosine(doc_id, vector)

    def _cosine(self, doc_id: str, query_vector: dict[str, float]) -> float:
        doc_vector = self._doc_vectors.get(doc_id, {})
        doc_norm = self._doc_norms.get(doc_id, 0.0)
        query_norm = math.sqrt(sum(w * w for w in query_vector.values()))
        if doc_norm == 0.0 or query_norm == 0.0:
            return 0.0
        dot = sum(w * doc_vector.get(term, 0.0) for term, w in query_vector.items())
        return dot / (doc_norm * query_norm)

    def containing(self, term: str) -> set[str]:
        """Documents containing the expanded term: every token of the term
        must occur in the document (bag containment, no positions)."""
        tokens = [t for t in term.split(" ") if t]
        if not tokens:
            return set()
        docs = self._postings.get(tokens[0], set())
        for token in tokens[1:]:
            docs = docs & self._postings.get(token, set())
            if not docs:
                break
        return set(docs)

    def search(self, expansion: ExpandedQuery, filters: Optional[dict[str, list[str]]] = None,
               page: int = 1, page_size: int = 20) -> SearchResult:
        """Rank every document containing at least one expanded term and
        satisfying all facet filters; facet counts cover the full candidate
        set, not just the returned page."""
        if page < 1 or page_size < 1:
            raise DomainError("invalid-page", f"page {page}, size {page_size}")
        filters = filters or {}
        for name in filters:
            if name not in FACET_NAMES:
                raise DomainError("invalid-facet", f"unknown facet {name!r}", facet=name)
        term_docs = {term: self.containing(term) for term in sorted(expansion.expanded_terms)}
        candidates: set[str] = set()
        for docs in term_docs.values():
            candidates |= docs
        for name, allowed in filters.items():
            allowed_set = set(allowed)
            candidates = {
                doc_id for doc_id in candidates
                if allowed_set & set(self.documents[doc_id].facets.get(name, []))
            }
        query_tokens = expanded_tokens(expansion.expanded_terms)
        query_vector = self.query_vector(query_tokens)
        scored: list[Hit] = []
        for doc_id in candidates:
            matched = sorted(term for term, docs in term_docs.items() if doc_id in docs)
            scored.append(Hit(doc_id, self._cosine(doc_id, query_vector), matched))
        scored.sort(key=lambda h: (-h.score, h.unit_global_id))
        facet_counts: dict[str, dict[str, int]] = {name: {} for name in FACET_NAMES}
        for doc_id in candidates:
            for name in FACET_NAMES:
                for value in self.documents[doc_id].facets.get(name, []):
                    bucket = facet_counts[name]
                    bucket[value] = bucket.get(value, 0) + 1
        start = (page - 1) * page_size
        return SearchResult(
            hits=scored[start : start + page_size],
            facet_counts=facet_counts,
            total_hits=len(scored),
            applied_expansion=expansion,
            page=page,
            page_size=page_size,
        )


def build_index(graph: Graph, thesaurus: Thesaurus) -> SearchIndex:
    """Index every unit node of the given graph version.

    Keyword concepts contribute all their labels (every language), and the
    same for linked person/place authorities, so a query in any catalogue
    language can reach the document.
    """
    index = SearchIndex()
    repo_country: dict[str, str] = {}
    for node in graph.nodes("repository"):
        repo_country[node.id] = str(node.properties.get("country", ""))
    for node in graph.nodes("unit"):
        props = node.properties
        title_tokens = tokenize(str(props.get("title", "")))
        scope_tokens = tokenize(str(props.get("scopeContent", "")))
        keyword_tokens: list[str] = []
        for concept_id in props.get("keywords", []):
            concept = thesaurus.concepts.get(str(concept_id))
            if concept is None:
                continue
            for label in concept.labels():
                keyword_tokens.extend(tokenize(label))
        authority_tokens: list[str] = []
        for label_list_prop in ("personLabels", "placeLabels"):
            for label in props.get(label_list_prop, []):
                authority_tokens.extend(tokenize(str(label)))
        field_tokens = {}
        if title_tokens:
            field_tokens["title"] = title_tokens
        if keyword_tokens:
            field_tokens["keywords"] = keyword_tokens
        if scope_tokens:
            field_tokens["scopeContent"] = scope_tokens
        if authority_tokens:
            field_tokens["authorities"] = authority_tokens

        repo_ids = [n.id for n in graph.neighbors(node.id, "heldBy", "out")]
        facets: dict[str, list[str]] = {}
        if repo_ids:
            facets["repository"] = repo_ids
            countries = sorted({repo_country.get(r, "") for r in repo_ids} - {""})
            if countries:
                facets["country"] = countries
        level = str(props.get("level", ""))
        if level:
            facets["level"] = [level]
        languages = [str(v) for v in props.get("languageOfMaterial", [])]
        if languages:
            facets["languageOfMaterial"] = sorted(set(languages))
        earliest = earliest_year(props.get("datesOfCreation", []))
        if earliest is not None:
            facets["dateBucket"] = [decade_bucket(earliest)]
        index.add_document(IndexDocument(node.id, field_tokens, facets))
    index.finalize()
    return index


def expanded_tokens(expanded_terms: Iterable[str]) -> list[str]:
    """Distinct word tokens across an expanded term set, sorted."""
    return sorted({token for term in expanded_terms for token in term.split(" ") if token})


def earliest_year(date_texts: Iterable[object]) -> Optional[int]:
    years = []
    for text in date_texts:
        raw = str(text)
        if raw.lower().startswith("ca."):
            raw = raw[3:].strip()
        start = raw.split("/", 1)[0]
        if len(start) >= 4 and start[:4].isdigit():
            years.append(int(start[:4]))
    return min(years) if years else None


def run_search(index: SearchIndex, thesaurus: Thesaurus, query_text: str,
               languages: Optional[list[str]] = None,
               filters: Optional[dict[str, list[str]]] = None,
               page: int = 1, page_size: int = 20) -> SearchResult:
    """Expand the query text against the thesaurus, then rank and facet."""
    expansion = thesaurus.expand_text(query_text, languages)
    return index.search(expansion, filters, page, page_size)
