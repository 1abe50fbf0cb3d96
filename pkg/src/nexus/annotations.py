"""User-contributed annotations with a moderation workflow.

Researchers attach notes, thesaurus links, authority links, collection links,
or publication citations to any described entity. A contribution starts as
proposed; a moderator either rejects it or accepts it, at which point link
bodies are promoted into the target's authoritative description with a
provenance marker so later re-harvests can tell promoted content apart from
partner data.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

from nexus.errors import DomainError
from nexus.graph import Graph

BODY_TYPES = frozenset(
    {"textualNote", "conceptLink", "authorityLink", "collectionLink", "publicationLink"}
)

_TERMINAL = frozenset({"accepted", "rejected"})


@dataclass
class Annotation:
    annotation_id: str
    target_id: str
    body_type: str
    body_value: str  # note text, linked id, or citation
    body_url: str  # publicationLink only
    author: str
    created: str
    state: str
    moderator_note: str = ""

    def to_dict(self) -> dict:
        body: dict = {"type": self.body_type, "value": self.body_value}
        if self.body_url:
            body["url"] = self.body_url
        return {
            "annotationId": self.annotation_id,
            "targetId": self.target_id,
            "body": body,
            "author": self.author,
            "created": self.created,
            "state": self.state,
            "moderatorNote": self.moderator_note,
        }


def _annotation_from_node(node) -> Annotation:
    p = node.properties
    return Annotation(
        annotation_id=node.id,
        target_id=str(p.get("targetId", "")),
        body_type=str(p.get("bodyType", "")),
        body_value=str(p.get("bodyValue", "")),
        body_url=str(p.get("bodyUrl", "")),
        author=str(p.get("author", "")),
        created=str(p.get("created", "")),
        state=str(p.get("state", "proposed")),
        moderator_note=str(p.get("moderatorNote", "")),
    )


class AnnotationService:
    """Creates, lists, and moderates annotations stored as registry nodes."""

    def __init__(self, graph: Graph):
        self.graph = graph

    def _next_id(self) -> str:
        numbers = [
            int(node.id.split("-")[-1])
            for node in self.graph.nodes("annotation")
            if node.id.startswith("ann-") and node.id.split("-")[-1].isdigit()
        ]
        return f"ann-{(max(numbers) + 1 if numbers else 1):06d}"

    def create(self, target_id: str, body_type: str, body_value: str, author: str,
               body_url: str = "", created: Optional[str] = None) -> Annotation:
        """Store a proposed annotation and its annotates edge. Link bodies
        must reference existing entities."""
        if not self.graph.has_node(target_id):
            raise DomainError("unknown-target", f"no node {target_id!r} to annotate",
                              target=target_id)
        if body_type not in BODY_TYPES:
            raise DomainError("unknown-body-type", f"unknown body type {body_type!r}")
        if body_type in ("conceptLink", "authorityLink", "collectionLink"):
            if not self.graph.has_node(body_value):
                raise DomainError("unknown-link-target",
                                  f"link target {body_value!r} is not in the registry",
                                  linkTarget=body_value)
            kind = self.graph.node(body_value).kind
            expected = {
                "conceptLink": {"concept"},
                "authorityLink": {"authority-person", "authority-place", "authority-corporate"},
                "collectionLink": {"unit"},
            }[body_type]
            if kind not in expected:
                raise DomainError("unknown-link-target",
                                  f"{body_value!r} has kind {kind!r}, which {body_type} cannot link",
                                  linkTarget=body_value, kind=kind)
        if body_type == "publicationLink" and not body_value.strip():
            raise DomainError("missing-citation", "publicationLink needs a citation text")
        annotation_id = self._next_id()
        created = created or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")
        self.graph.upsert_node("annotation", annotation_id, {
            "targetId": target_id,
            "bodyType": body_type,
            "bodyValue": body_value,
            "bodyUrl": body_url,
            "author": author,
            "created": created,
            "state": "proposed",
            "moderatorNote": "",
        })
        self.graph.add_edge(annotation_id, "annotates", target_id)
        if body_type == "publicationLink":
            publication_id = self._publication_node(body_value, body_url)
            if self.graph.node(target_id).kind == "unit":
                self.graph.add_edge(target_id, "citedBy", publication_id)
        return _annotation_from_node(self.graph.node(annotation_id))

    def _publication_node(self, citation: str, url: str) -> str:
        digest = hashlib.sha256(citation.strip().encode("utf-8")).hexdigest()[:12]
        publication_id = f"pub-{digest}"
        self.graph.upsert_node("guide-entity", publication_id, {
            "entityType": "publication",
            "citation": citation,
            "url": url,
        })
        return publication_id

    def get(self, annotation_id: str) -> Annotation:
        if not self.graph.has_node(annotation_id) \
                or self.graph.node(annotation_id).kind != "annotation":
            raise DomainError("unknown-annotation", f"no annotation {annotation_id!r}",
                              id=annotation_id)
        return _annotation_from_node(self.graph.node(annotation_id))

    def moderate(self, annotation_id: str, decision: str, moderator: str,
                 note: str = "") -> Annotation:
        """Accept or reject a proposed annotation. Accepting a link body
        promotes it onto the target unit with an annotation provenance
        marker; accepted and rejected are terminal states."""
        annotation = self.get(annotation_id)
        if annotation.state in _TERMINAL:
            raise DomainError("already-moderated",
                              f"annotation {annotation_id!r} is already {annotation.state}",
                              state=annotation.state)
        if decision not in ("accept", "reject"):
            raise DomainError("bad-decision", f"decision must be accept or reject, got {decision!r}")
        node = self.graph.node(annotation_id)
        node.properties["moderatorNote"] = f"{moderator}: {note}" if note else moderator
        if decision == "reject":
            node.properties["state"] = "rejected"
            return _annotation_from_node(node)
        node.properties["state"] = "accepted"
        target = self.graph.node(annotation.target_id)
        if target.kind == "unit":
            self._materialize(annotation, target)
        return _annotation_from_node(node)

    def _materialize(self, annotation: Annotation, target) -> None:
        props = target.properties
        if annotation.body_type == "conceptLink":
            self._promote(target, "keywords", "promotedKeywords", annotation, "subject")
        elif annotation.body_type == "authorityLink":
            kind = self.graph.node(annotation.body_value).kind
            if kind == "authority-person":
                self._promote(target, "persons", "promotedPersons", annotation, "aboutPerson")
            elif kind == "authority-place":
                self._promote(target, "places", "promotedPlaces", annotation, "aboutPlace")
        elif annotation.body_type == "textualNote":
            notes = [str(n) for n in props.get("promotedNotes", [])]
            marker = f"{annotation.annotation_id}|{annotation.author}|{annotation.body_value}"
            if marker not in notes:
                notes.append(marker)
                props["promotedNotes"] = notes
                line = f"[{annotation.annotation_id} by {annotation.author}] {annotation.body_value}"
                existing = str(props.get("provenanceNote", ""))
                props["provenanceNote"] = f"{existing}\n{line}".strip("\n")

    def _promote(self, target, value_key: str, marker_key: str, annotation: Annotation,
                 edge_label: str) -> None:
        """Idempotent promotion: a duplicate link neither duplicates the value
        nor the marker."""
        props = target.properties
        values = [str(v) for v in props.get(value_key, [])]
        if annotation.body_value not in values:
            values.append(annotation.body_value)
            props[value_key] = values
        markers = [str(m) for m in props.get(marker_key, [])]
        marker = f"{annotation.annotation_id}|{annotation.body_value}"
        if not any(m.split("|", 1)[1] == annotation.body_value for m in markers):
            markers.append(marker)
            props[marker_key] = markers
        self.graph.add_edge(target.id, edge_label, annotation.body_value)

    def list_for(self, target_id: str, state: Optional[str] = None) -> list[Annotation]:
        """Annotations on a target, oldest first."""
        if not self.graph.has_node(target_id):
            raise DomainError("unknown-target", f"no node {target_id!r}", target=target_id)
        found = [
            _annotation_from_node(node)
            for node in self.graph.neighbors(target_id, "annotates", "in")
        ]
        if state is not None:
            found = [a for a in found if a.state == state]
        found.sort(key=lambda a: (a.created, a.annotation_id))
        return found
