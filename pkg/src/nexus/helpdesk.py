"""Route free-text researcher questions to suitable institutions.

Each repository with holdings gets a profile vector built from its summary,
its units' titles, keyword labels, and person/place labels, weighted with
the same tf-idf scheme the search index uses (N = number of profiles).
A question is normalized, stopword-filtered, thesaurus-expanded, and ranked
against every profile by cosine similarity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from nexus.errors import DomainError
from nexus.graph import Graph
from nexus.vocab import ExpandedQuery, Thesaurus, tokenize

DEFAULT_STOPWORDS: dict[str, frozenset[str]] = {
    "en": frozenset(
        "a an and are can do for from how i in is it of on or the to what where which who with".split()
    ),
    "de": frozenset("der die das und ist im in zu von aus wo wie was fur mit den dem ein eine".split()),
    "cs": frozenset("a v na je z do o kde jak co s k pro ze".split()),
}


@dataclass
class InstitutionProfile:
    repository_ehri_id: str
    profile_text: str
    term_vector: dict[str, float] = field(default_factory=dict)
    contact: str = ""

    @property
    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.term_vector.values()))


@dataclass
class RoutedInstitution:
    repository_ehri_id: str
    score: float
    matched_terms: list[str]
    contact: str

    def to_dict(self) -> dict:
        return {
            "repositoryEhriId": self.repository_ehri_id,
            "score": self.score,
            "matchedTerms": self.matched_terms,
            "contact": self.contact,
        }


@dataclass
class RoutingAnswer:
    ranked: list[RoutedInstitution]
    question_trace: ExpandedQuery

    def to_dict(self) -> dict:
        return {
            "ranked": [r.to_dict() for r in self.ranked],
            "questionTrace": self.question_trace.to_dict(),
        }


class KnowledgeBase:
    """Immutable per build; one profile per repository holding units.

    With a single profile every present term has df = N and idf would be 0
    everywhere, making the KB unable to score anything; in that degenerate
    case idf falls back to 1 (pure tf), so the lone institution still ranks.
    """

    def __init__(self, profiles: dict[str, InstitutionProfile],
                 stopwords: Optional[dict[str, frozenset[str]]] = None):
        self.profiles = profiles
        self.stopwords = stopwords or DEFAULT_STOPWORDS
        self._df: dict[str, int] = {}
        for profile in profiles.values():
            for term in profile.term_vector:
                self._df[term] = self._df.get(term, 0) + 1

    def __len__(self) -> int:
        return len(self.profiles)

    def idf(self, term: str) -> float:
        n = len(self.profiles)
        if n == 1:
            return 1.0
        return math.log((n + 1) / (self._df.get(term, 0) + 1))


def profile_text_for(graph: Graph, repo_id: str, thesaurus: Thesaurus) -> str:
    """Concatenate what the institution holds: summary, unit titles, keyword
    labels, and person/place labels."""
    repo = graph.node(repo_id)
    pieces = [str(repo.properties.get("holdingsSummary", ""))]
    for unit in graph.neighbors(repo_id, "heldBy", "in"):
        props = unit.properties
        pieces.append(str(props.get("title", "")))
        for concept_id in props.get("keywords", []):
            concept = thesaurus.concepts.get(str(concept_id))
            if concept is not None:
                pieces.extend(concept.labels())
        pieces.extend(str(v) for v in props.get("personLabels", []))
        pieces.extend(str(v) for v in props.get("placeLabels", []))
    return "\n".join(p for p in pieces if p)


def build_kb(graph: Graph, thesaurus: Thesaurus,
             stopwords: Optional[dict[str, frozenset[str]]] = None) -> KnowledgeBase:
    """One profile per repository with at least one unit; weights follow the
    search formula with N = number of such repositories."""
    texts: dict[str, str] = {}
    contacts: dict[str, str] = {}
    for repo in graph.nodes("repository"):
        units = graph.neighbors(repo.id, "heldBy", "in")
        if not units:
            continue
        texts[repo.id] = profile_text_for(graph, repo.id, thesaurus)
        contact = str(repo.properties.get("contact", ""))
        address = str(repo.properties.get("address", ""))
        contacts[repo.id] = contact if contact else address
    n = len(texts)
    token_counts: dict[str, dict[str, int]] = {}
    df: dict[str, int] = {}
    for repo_id, text in texts.items():
        counts: dict[str, int] = {}
        for token in tokenize(text):
            counts[token] = counts.get(token, 0) + 1
        token_counts[repo_id] = counts
        for term in counts:
            df[term] = df.get(term, 0) + 1
    profiles: dict[str, InstitutionProfile] = {}
    for repo_id, counts in token_counts.items():
        vector = {
            term: (1.0 + math.log(tf))
            * (1.0 if n == 1 else math.log((n + 1) / (df[term] + 1)))
            for term, tf in counts.items()
        }
        profiles[repo_id] = InstitutionProfile(repo_id, texts[repo_id], vector, contacts[repo_id])
    return KnowledgeBase(profiles, stopwords)


def question_tokens(question: str, languages: Iterable[str],
                    stopwords: dict[str, frozenset[str]]) -> list[str]:
    """Normalized tokens of the question minus the stopwords of the
    requested languages."""
    stop: set[str] = set()
    for lang in languages:
        stop |= stopwords.get(lang, frozenset())
    return [t for t in tokenize(question) if t not in stop]


def route(kb: KnowledgeBase, thesaurus: Thesaurus, question: str,
          languages: Optional[list[str]] = None) -> RoutingAnswer:
    """Rank every institution with a positive cosine score against the
    expanded question; deterministic order (score desc, id asc)."""
    if kb is None or not kb.profiles:
        raise DomainError("kb-not-built", "the knowledge base is empty or missing")
    languages = languages or ["en"]
    tokens = question_tokens(question, languages, kb.stopwords)
    if not tokens:
        raise DomainError("empty-question", "question is empty after normalization")
    expansion = thesaurus.expand_bag(tokens, languages)
    # Question tokens keep their frequency; expansion labels add their tokens once.
    bag = list(tokens)
    present = set(tokens)
    for term in sorted(expansion.expanded_terms):
        for token in term.split(" "):
            if token and token not in present:
                present.add(token)
                bag.append(token)
    counts: dict[str, int] = {}
    for token in sorted(bag):  # canonical order: scores are bit-stable under reordering
        counts[token] = counts.get(token, 0) + 1
    query_vector = {
        term: (1.0 + math.log(tf)) * kb.idf(term) for term, tf in counts.items()
    }
    query_norm = math.sqrt(sum(w * w for w in query_vector.values()))
    ranked: list[RoutedInstitution] = []
    for repo_id in sorted(kb.profiles):
        profile = kb.profiles[repo_id]
        if profile.norm == 0.0 or query_norm == 0.0:
            continue
        dot = sum(w * profile.term_vector.get(term, 0.0) for term, w in query_vector.items())
        score = dot / (profile.norm * query_norm)
        if score > 0.0:
            matched = sorted(set(query_vector) & set(profile.term_vector))
            ranked.append(RoutedInstitution(repo_id, score, matched, profile.contact))
    ranked.sort(key=lambda r: (-r.score, r.repository_ehri_id))
    return RoutingAnswer(ranked, expansion)
