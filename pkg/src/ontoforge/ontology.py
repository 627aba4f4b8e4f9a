"""Turn a concept tree into a lightweight ontology and serialize it."""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

from .cluster import OUTLIER
from .exceptions import EmptyInputError

UNNAMED = "unnamed"
BASE_IRI = "http://example.org/ontoforge#"


def concept_id(members, kind="concept"):
    digest = hashlib.sha1(("\n".join([kind, *sorted(members)])).encode("utf-8")).hexdigest()
    return f"c{digest[:12]}"


@dataclass(frozen=True)
class Concept:
    id: str
    label: str
    member_terms: frozenset
    level: int
    kind: str = "concept"  # "concept" or "outlier"

    def to_dict(self):
        return {"id": self.id, "label": self.label, "level": self.level, "kind": self.kind,
                "members": sorted(self.member_terms)}


@dataclass
class OntologyGraph:
    concepts: dict = field(default_factory=dict)  # id -> Concept
    edges: set = field(default_factory=set)  # (parent id, child id, relation)
    attachments: dict = field(default_factory=dict)  # term -> concept id

    @property
    def term_nodes(self):
        return set(self.attachments)

    def roots(self):
        children = {c for _, c, _ in self.edges}
        return sorted(cid for cid in self.concepts if cid not in children)

    def children_of(self, cid):
        return sorted(c for p, c, _ in self.edges if p == cid)

    def __eq__(self, other):
        if not isinstance(other, OntologyGraph):
            return NotImplemented
        return (self.concepts == other.concepts and self.edges == other.edges
                and self.attachments == other.attachments)

    def to_dict(self):
        return {
            "concepts": [self.concepts[k].to_dict() for k in sorted(self.concepts)],
            "edges": [{"parent": p, "child": c, "relation": r} for p, c, r in sorted(self.edges)],
            "terms": [{"term": t, "concept": self.attachments[t]} for t in sorted(self.attachments)],
        }


def assemble_ontology(root):
    """One concept per tree node, plus one flagged concept per outlier set.

    A node's concept keeps the members that were not ejected as outliers;
    those move to the flagged child concept. Terms are attached to the leaf
    or outlier concept that finally holds them.
    """
    if root is None or not root.members:
        raise EmptyInputError("cannot build an ontology from an empty cluster tree")
    g = OntologyGraph()
    counter = [0]

    def visit(node, level, parent):
        members = node.members - node.outliers
        cid = concept_id(members)
        if node.medoid:
            label = node.medoid
        else:
            counter[0] += 1
            label = f"concept-{counter[0]}"
        g.concepts[cid] = Concept(cid, label, frozenset(members), level)
        if parent is not None:
            g.edges.add((parent, cid, UNNAMED))
        if not node.children:
            for t in members:
                g.attachments[t] = cid
        for child in sorted(node.children, key=lambda n: n.id):
            visit(child, level + 1, cid)
        if node.outliers:
            oid = concept_id(node.outliers, OUTLIER)
            g.concepts[oid] = Concept(oid, f"outliers-of-{cid}", frozenset(node.outliers),
                                      level + 1, OUTLIER)
            g.edges.add((cid, oid, UNNAMED))
            for t in node.outliers:
                g.attachments[t] = oid

    visit(root, 0, None)
    return g


def export_json(g):
    return json.dumps(g.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def import_json(text):
    g = OntologyGraph()
    try:
        data = json.loads(text)
        for c in data["concepts"]:
            g.concepts[c["id"]] = Concept(c["id"], c["label"], frozenset(c["members"]),
                                          int(c["level"]), c.get("kind", "concept"))
        for e in data["edges"]:
            g.edges.add((e["parent"], e["child"], e.get("relation", UNNAMED)))
        for t in data["terms"]:
            g.attachments[t["term"]] = t["concept"]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed ontology JSON: {exc!r}") from exc
    return g


def _dot_quote(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(g):
    lines = ["digraph ontology {", "  rankdir=BT;"]
    for cid in sorted(g.concepts):
        c = g.concepts[cid]
        shape = "box, style=dashed" if c.kind == OUTLIER else "box"
        lines.append(f"  {_dot_quote(cid)} [label={_dot_quote(c.label)}, shape={shape}];")
    for term in sorted(g.attachments):
        lines.append(f"  {_dot_quote('term:' + term)} [label={_dot_quote(term)}, shape=ellipse];")
    for p, c, r in sorted(g.edges):
        lines.append(f"  {_dot_quote(c)} -> {_dot_quote(p)} [label={_dot_quote(r)}];")
    for term in sorted(g.attachments):
        lines.append(f"  {_dot_quote('term:' + term)} -> {_dot_quote(g.attachments[term])} [style=dotted];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _ttl_literal(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_turtle(g):
    lines = [
        f"@prefix : <{BASE_IRI}> .",
        "@prefix owl: <http://www.w3.org/2002/07/owl#> .",
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .",
        "@prefix skos: <http://www.w3.org/2004/02/skos/core#> .",
        "",
    ]
    parents = {}
    for p, c, _ in g.edges:
        parents.setdefault(c, []).append(p)
    for cid in sorted(g.concepts):
        c = g.concepts[cid]
        stmts = ["a owl:Class", f"rdfs:label {_ttl_literal(c.label)}"]
        for p in sorted(parents.get(cid, ())):
            stmts.append(f"rdfs:subClassOf :{p}")
        for t in sorted(t for t, a in g.attachments.items() if a == cid):
            stmts.append(f"skos:altLabel {_ttl_literal(t)}")
        lines.append(f":{cid} " + " ;\n    ".join(stmts) + " .")
        lines.append("")
    return "\n".join(lines)


_DOT_EDGE = re.compile(r'^\s*"([^"]+)" -> "([^"]+)" \[label="([^"]*)"\];$')


def parse_dot_edges(text):
    """(parent, child, relation) triples of the concept edges in a DOT export."""
    out = set()
    for line in text.splitlines():
        m = _DOT_EDGE.match(line)
        if m:
            child, parent, rel = m.groups()
            out.add((parent, child, rel))
    return out


def parse_turtle_edges(text):
    """Concept ids and subclass edges from a Turtle export."""
    concepts, edges, current = set(), set(), None
    for line in text.splitlines():
        head = re.match(r"^:(\w+) a owl:Class", line)
        if head:
            current = head.group(1)
            concepts.add(current)
        sub = re.search(r"rdfs:subClassOf :(\w+)", line)
        if sub and current:
            edges.add((sub.group(1), current, UNNAMED))
    return concepts, edges
