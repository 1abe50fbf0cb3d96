"""Schema-flexible property graph: the metadata registry.

Nodes carry a closed kind, a unique id, and a flat property map (scalars or
lists of scalars). Edges are typed; partOf edges form a forest, enforced at
insert time so the hierarchy invariants are always true. Snapshots are a
canonical line-delimited text format that is bit-exact across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

from nexus.errors import DomainError

SNAPSHOT_HEADER = "nexus-graph v1"

NODE_KINDS = frozenset(
    {
        "unit",
        "repository",
        "concept",
        "authority-person",
        "authority-place",
        "authority-corporate",
        "annotation",
        "guide-entity",
        "event",
    }
)

EDGE_LABELS = frozenset(
    {
        "partOf",
        "heldBy",
        "describedBy",
        "subject",
        "aboutPerson",
        "aboutPlace",
        "copyOf",
        "sameAs",
        "annotates",
        "citedBy",
        "locatedAt",
        "memberOfDepartment",
        "narrower",
    }
)

# Labels whose edges are stored once but traversed in both directions.
SYMMETRIC_LABELS = frozenset({"sameAs", "copyOf"})

Properties = dict[str, object]


@dataclass
class Node:
    id: str
    kind: str
    properties: Properties = field(default_factory=dict)


@dataclass
class Edge:
    src: str
    label: str
    dst: str
    properties: Properties = field(default_factory=dict)


def _check_properties(properties: Properties) -> None:
    for key, value in properties.items():
        if isinstance(value, (str, int, float, bool)) or value is None:
            continue
        if isinstance(value, list) and all(
            isinstance(v, (str, int, float, bool)) for v in value
        ):
            continue
        raise DomainError(
            "bad-property",
            f"property {key!r} must be a scalar or a list of scalars",
            key=key,
        )


class Graph:
    """In-memory property graph with typed edges and canonical snapshots."""

    def __init__(self) -> None:
        self._nodes: dict[str, Node] = {}
        self._edges: dict[tuple[str, str, str], Edge] = {}
        self._out: dict[str, dict[str, set[str]]] = {}
        self._in: dict[str, dict[str, set[str]]] = {}

    # -- nodes ------------------------------------------------------------

    def upsert_node(self, kind: str, node_id: str, properties: Optional[Properties] = None) -> Node:
        """Create the node or merge properties into it (new keys added,
        existing keys overwritten). Changing a node's kind is an error."""
        if not node_id:
            raise DomainError("missing-id", "node id must be non-empty")
        if kind not in NODE_KINDS:
            raise DomainError("unknown-kind", f"unknown node kind {kind!r}", kind=kind)
        properties = dict(properties or {})
        _check_properties(properties)
        node = self._nodes.get(node_id)
        if node is None:
            node = Node(node_id, kind, properties)
            self._nodes[node_id] = node
            self._out[node_id] = {}
            self._in[node_id] = {}
        else:
            if node.kind != kind:
                raise DomainError(
                    "kind-conflict",
                    f"node {node_id!r} already exists with kind {node.kind!r}, not {kind!r}",
                    id=node_id,
                    existing=node.kind,
                )
            node.properties.update(properties)
        return node

    def has_node(self, node_id: str) -> bool:
        return node_id in self._nodes

    def node(self, node_id: str) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise DomainError("unknown-id", f"no node {node_id!r}", id=node_id) from None

    def nodes(self, kind: Optional[str] = None) -> Iterator[Node]:
        """All nodes in ascending id order, optionally restricted to a kind."""
        for node_id in sorted(self._nodes):
            node = self._nodes[node_id]
            if kind is None or node.kind == kind:
                yield node

    def node_count(self) -> int:
        return len(self._nodes)

    # -- edges ------------------------------------------------------------

    def add_edge(self, src: str, label: str, dst: str, properties: Optional[Properties] = None) -> Edge:
        """Store an edge; a duplicate (src, label, dst) is a no-op returning
        the existing edge. partOf edges keep the forest shape: at most one
        parent per node, and no cycles (checked by an ancestor walk)."""
        if label not in EDGE_LABELS:
            raise DomainError("unknown-label", f"unknown edge label {label!r}", label=label)
        for endpoint in (src, dst):
            if endpoint not in self._nodes:
                raise DomainError("missing-endpoint", f"edge endpoint {endpoint!r} does not exist",
                                  endpoint=endpoint)
        key = (src, label, dst)
        existing = self._edges.get(key)
        if existing is not None:
            return existing
        if label == "partOf":
            parents = self._out[src].get("partOf")
            if parents:
                raise DomainError("partOf-second-parent",
                                  f"{src!r} already has a parent", id=src)
            if src == dst or src in self._ancestors(dst):
                raise DomainError("partOf-cycle",
                                  f"edge {src!r} -> {dst!r} would close a partOf cycle",
                                  src=src, dst=dst)
        properties = dict(properties or {})
        _check_properties(properties)
        edge = Edge(src, label, dst, properties)
        self._edges[key] = edge
        self._out[src].setdefault(label, set()).add(dst)
        self._in[dst].setdefault(label, set()).add(src)
        return edge

    def remove_edge(self, src: str, label: str, dst: str) -> None:
        key = (src, label, dst)
        if key not in self._edges:
            return
        del self._edges[key]
        self._out[src][label].discard(dst)
        self._in[dst][label].discard(src)

    def has_edge(self, src: str, label: str, dst: str) -> bool:
        return (src, label, dst) in self._edges

    def edge(self, src: str, label: str, dst: str) -> Edge:
        try:
            return self._edges[(src, label, dst)]
        except KeyError:
            raise DomainError("unknown-edge", f"no edge {src!r} -{label}-> {dst!r}") from None

    def edges(self) -> Iterator[Edge]:
        """All edges in ascending (src, label, dst) order."""
        for key in sorted(self._edges):
            yield self._edges[key]

    def edge_count(self) -> int:
        return len(self._edges)

    def _ancestors(self, node_id: str) -> set[str]:
        """Transitive partOf ancestors (with a guard against stored cycles)."""
        seen: set[str] = set()
        current = node_id
        while True:
            parents = self._out.get(current, {}).get("partOf", ())
            if not parents:
                return seen
            current = next(iter(parents))
            if current in seen:
                return seen
            seen.add(current)

    # -- traversal ---------------------------------------------------------

    def _adjacent(self, node_id: str, label: str, direction: str) -> set[str]:
        out = self._out[node_id].get(label, set())
        inn = self._in[node_id].get(label, set())
        if label in SYMMETRIC_LABELS:
            return out | inn
        if direction == "out":
            return set(out)
        if direction == "in":
            return set(inn)
        if direction == "both":
            return out | inn
        raise DomainError("bad-direction", f"unknown direction {direction!r}")

    def neighbors(self, node_id: str, label: str, direction: str = "out") -> list[Node]:
        """Adjacent nodes via label in the given direction, ascending id."""
        if node_id not in self._nodes:
            raise DomainError("unknown-id", f"no node {node_id!r}", id=node_id)
        return [self._nodes[i] for i in sorted(self._adjacent(node_id, label, direction))]

    def closure(self, node_id: str, label: str, direction: str = "out",
                max_depth: Optional[int] = None) -> set[str]:
        """Transitive closure by breadth-first traversal, excluding the start
        node; bounded by max_depth edges when given."""
        if node_id not in self._nodes:
            raise DomainError("unknown-id", f"no node {node_id!r}", id=node_id)
        seen: set[str] = set()
        frontier = [node_id]
        depth = 0
        while frontier and (max_depth is None or depth < max_depth):
            depth += 1
            nxt: list[str] = []
            for current in frontier:
                for adjacent in self._adjacent(current, label, direction):
                    if adjacent != node_id and adjacent not in seen:
                        seen.add(adjacent)
                        nxt.append(adjacent)
            frontier = nxt
        return seen

    def depth(self, node_id: str, label: str = "partOf") -> int:
        """Hops from the node to the root of its tree following outgoing
        label edges; a root has depth 0."""
        if node_id not in self._nodes:
            raise DomainError("unknown-id", f"no node {node_id!r}", id=node_id)
        return len(self._ancestors(node_id))

    # -- persistence ---------------------------------------------------------

    def snapshot(self, path: str) -> int:
        """Write the canonical snapshot; returns the record count written."""
        records = 0
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(SNAPSHOT_HEADER + "\n")
                for node in self.nodes():
                    handle.write("N\t%s\t%s\t%s\n" % (node.kind, node.id, _canonical(node.properties)))
                    records += 1
                for edge in self.edges():
                    handle.write("E\t%s\t%s\t%s\t%s\n"
                                 % (edge.src, edge.label, edge.dst, _canonical(edge.properties)))
                    records += 1
        except OSError as exc:
            raise DomainError("io-failure", f"cannot write snapshot: {exc}", path=path) from exc
        return records

    @classmethod
    def load(cls, path: str) -> "Graph":
        """Reconstruct a graph from a snapshot file."""
        graph = cls()
        try:
            with open(path, "r", encoding="utf-8", newline="\n") as handle:
                lines = handle.read().split("\n")
        except OSError as exc:
            raise DomainError("io-failure", f"cannot read snapshot: {exc}", path=path) from exc
        if not lines or lines[0] != SNAPSHOT_HEADER:
            raise DomainError("malformed-snapshot", "missing or wrong header", line=1)
        if lines and lines[-1] == "":
            lines = lines[:-1]
        for number, line in enumerate(lines[1:], start=2):
            fields = line.split("\t")
            try:
                if fields[0] == "N" and len(fields) == 4:
                    _, kind, node_id, props = fields
                    graph.upsert_node(kind, node_id, json.loads(props))
                elif fields[0] == "E" and len(fields) == 5:
                    _, src, label, dst, props = fields
                    graph.add_edge(src, label, dst, json.loads(props))
                else:
                    raise DomainError("malformed-snapshot", f"unrecognized record {fields[0]!r}",
                                      line=number)
            except DomainError as exc:
                raise DomainError("malformed-snapshot", f"line {number}: {exc.message}",
                                  line=number) from exc
            except (json.JSONDecodeError, ValueError) as exc:
                raise DomainError("malformed-snapshot", f"line {number}: bad properties ({exc})",
                                  line=number) from exc
        return graph

    # -- equality and checks ---------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        mine = {(n.id, n.kind, _canonical(n.properties)) for n in self._nodes.values()}
        theirs = {(n.id, n.kind, _canonical(n.properties)) for n in other._nodes.values()}
        if mine != theirs:
            return False
        mine_e = {(e.src, e.label, e.dst, _canonical(e.properties)) for e in self._edges.values()}
        theirs_e = {(e.src, e.label, e.dst, _canonical(e.properties)) for e in other._edges.values()}
        return mine_e == theirs_e

    def check_invariants(self) -> list[str]:
        """Full-scan structural check: endpoint resolution, partOf out-degree,
        and partOf acyclicity. Returns human-readable violations (empty list
        when the graph is consistent)."""
        problems: list[str] = []
        for edge in self._edges.values():
            for endpoint in (edge.src, edge.dst):
                if endpoint not in self._nodes:
                    problems.append(f"dangling endpoint {endpoint!r} on {edge.src}-{edge.label}->{edge.dst}")
        parents: dict[str, list[str]] = {}
        for src, label, dst in self._edges:
            if label == "partOf":
                parents.setdefault(src, []).append(dst)
        for src, targets in parents.items():
            if len(targets) > 1:
                problems.append(f"{src!r} has {len(targets)} partOf parents")
        # cycle scan over the parent map
        state: dict[str, int] = {}
        for start in parents:
            if state.get(start):
                continue
            chain = []
            current: Optional[str] = start
            while current is not None and state.get(current) != 2:
                if state.get(current) == 1:
                    problems.append(f"partOf cycle through {current!r}")
                    break
                state[current] = 1
                chain.append(current)
                nxt = parents.get(current, [])
                current = nxt[0] if nxt else None
            for visited in chain:
                state[visited] = 2
        return problems


def _canonical(properties: Properties) -> str:
    return json.dumps(properties, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def load_snapshot(path: str) -> Graph:
    return Graph.load(path)
