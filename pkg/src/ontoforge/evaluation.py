"""Term recognition metrics and ontology evaluation against a benchmark."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from ._text import normalize_label
from .exceptions import MetricUnavailableError, UsageError


# Expert-judged precision reported for the hazard-identification domain.
# Reference only; nothing here asserts against it.
REFERENCE_PRECISION_BANDS = {"th": (0.6, 0.7), "ot": (0.6, 0.7), "cw": (0.1, 0.3), "ncv": (0.1, 0.3)}


@dataclass(frozen=True)
class ContingencyTable:
    tp: int
    fp: int
    fn: int | None = None
    tn: int | None = None

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def complete(self):
        return self.fn is not None and self.tn is not None

    @property
    def total(self):
        if not self.complete:
            raise MetricUnavailableError("FN/TN unavailable: |TC| cannot be derived")
        return self.tp + self.fp + self.fn + self.tn

    def validate(self, n_candidates):
        """Check TP+FP+FN+TN equals the number of candidates."""
        if self.total != n_candidates:
            raise ValueError(f"TP+FP+FN+TN = {self.total}, expected |TC| = {n_candidates}")
        return self


def precision(t):
    denom = t.tp + t.fp
    if denom == 0:
        raise MetricUnavailableError("precision undefined with TP+FP = 0")
    return t.tp / denom


def recall(t):
    if t.fn is None:
        raise MetricUnavailableError("recall needs FN, which is unavailable")
    denom = t.tp + t.fn
    if denom == 0:
        raise MetricUnavailableError("recall undefined with TP+FN = 0")
    return t.tp / denom


def f1(t):
    p, r = precision(t), recall(t)
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def accuracy(t):
    if not t.complete:
        raise MetricUnavailableError("accuracy needs FN and TN, which are unavailable")
    if t.total == 0:
        raise MetricUnavailableError("accuracy undefined for an empty table")
    return (t.tp + t.tn) / t.total


def precision_at_n(ranked_terms, relevant, n):
    """Fraction of the top *n* terms found in the *relevant* set."""
    top = list(ranked_terms)[:n]
    rel = {normalize_label(r) for r in relevant}
    tp = sum(1 for t in top if normalize_label(t) in rel)
    return ContingencyTable(tp, len(top) - tp)


@dataclass(frozen=True)
class BenchmarkConcept:
    id: str
    label: str
    synonyms: tuple = ()
    seed_terms: tuple = ()

    def names(self):
        return {normalize_label(x) for x in (self.label, *self.synonyms)}


@dataclass(frozen=True)
class BenchmarkConceptSet:
    concepts: tuple
    excluded: tuple = ()  # (id, reason)

    def __post_init__(self):
        ids = [c.id for c in self.concepts] + [e[0] for e in self.excluded]
        if len(ids) != len(set(ids)):
            raise ValueError("benchmark concept ids must be unique")

    def __len__(self):
        return len(self.concepts)

    def vocabulary(self):
        out = set()
        for c in self.concepts:
            out.update((c.label, *c.synonyms, *c.seed_terms))
        return out


def parse_benchmark(obj):
    concepts, excluded = [], []
    for c in obj.get("concepts", []):
        concepts.append(BenchmarkConcept(c["id"], c["label"], tuple(c.get("synonyms", [])),
                                         tuple(c.get("seed_terms", []))))
    for e in obj.get("excluded", []):
        excluded.append((e["id"], e.get("reason", "")))
    return BenchmarkConceptSet(tuple(concepts), tuple(excluded))


def load_benchmark(path):
    with open(path, encoding="utf-8") as fh:
        return parse_benchmark(json.load(fh))


def load_bundled_benchmark():
    """The shipped hazard-identification benchmark: 16 compared concepts, 5 excluded."""
    text = resources.files("ontoforge").joinpath("data/hazid_benchmark.json").read_text("utf-8")
    return parse_benchmark(json.loads(text))


@dataclass(frozen=True)
class DiscoveredConcept:
    id: str
    label: str
    members: frozenset = frozenset()


def discovered_from_ontology(g):
    """Concepts of an ontology graph, leaving out outlier sets."""
    return [DiscoveredConcept(c.id, c.label, c.member_terms)
            for cid, c in sorted(g.concepts.items()) if c.kind != "outlier"]


@dataclass(frozen=True)
class Match:
    benchmark_id: str
    concept_id: str
    kind: str  # "label" or "member-overlap"
    overlap: float


def match_concepts(discovered, benchmark, tau=0.5):
    """Best discovered concept for each benchmark concept, if any.

    Label equality beats member overlap. Among overlap matches the larger
    fraction wins, then the smaller (more specific) concept, then the id.
    """
    matches, missed = [], []
    disc = [(d, normalize_label(d.label), {normalize_label(m) for m in d.members}) for d in discovered]
    for m in benchmark.concepts:
        names = m.names()
        seeds = {normalize_label(s) for s in m.seed_terms}
        best = None
        for d, label, members in disc:
            frac = len(seeds & members) / len(seeds) if seeds else 0.0
            if label in names:
                key = (0, -frac, len(members), d.id)
                kind = "label"
            elif seeds and frac >= tau:
                key = (1, -frac, len(members), d.id)
                kind = "member-overlap"
            else:
                continue
            if best is None or key < best[0]:
                best = (key, Match(m.id, d.id, kind, frac))
        if best is None:
            missed.append(m.id)
        else:
            matches.append(best[1])
    return matches, missed


def lexical_overlap(discovered, benchmark, tau=0.5):
    """Return ``(LO, matches)`` with LO as an exact fraction."""
    if len(benchmark) == 0:
        raise UsageError("benchmark concept set is empty")
    matches, _ = match_concepts(discovered, benchmark, tau)
    return Fraction(len(matches), len(benchmark)), matches


def ontological_loss(discovered, benchmark, tau=0.5):
    if len(benchmark) == 0:
        raise UsageError("benchmark concept set is empty")
    _, missed = match_concepts(discovered, benchmark, tau)
    return Fraction(len(missed), len(benchmark))


@dataclass
class EvalReport:
    measure: str
    precision_at_n: float | None
    n: int | None
    lexical_overlap: Fraction
    ontological_loss: Fraction
    matched: list = field(default_factory=list)
    missed: list = field(default_factory=list)

    def to_dict(self):
        return {
            "measure": self.measure,
            "n": self.n,
            "precision_at_n": None if self.precision_at_n is None else round(self.precision_at_n, 12),
            "LO": round(float(self.lexical_overlap), 12),
            "LO_fraction": f"{self.lexical_overlap.numerator}/{self.lexical_overlap.denominator}",
            "OL": round(float(self.ontological_loss), 12),
            "OL_fraction": f"{self.ontological_loss.numerator}/{self.ontological_loss.denominator}",
            "matched": [{"benchmark": m.benchmark_id, "concept": m.concept_id, "kind": m.kind,
                         "overlap": round(m.overlap, 12)} for m in self.matched],
            "missed": list(self.missed),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def evaluate_ontology(g, benchmark, measure="th", ranked_terms=None, n=None, tau=0.5):
    discovered = discovered_from_ontology(g)
    matches, missed = match_concepts(discovered, benchmark, tau)
    if len(benchmark) == 0:
        raise UsageError("benchmark concept set is empty")
    p = None
    if ranked_terms is not None and n:
        table = precision_at_n(ranked_terms, benchmark.vocabulary(), n)
        p = precision(table) if table.tp + table.fp else None
    return EvalReport(measure, p, n, Fraction(len(matches), len(benchmark)),
                      Fraction(len(missed), len(benchmark)), matches, missed)


def decile_summary(ranked):
    """Mean f_d and f_dbar over ten contiguous rank blocks."""
    fd = np.array([e.f_d for e in ranked.entries], dtype=float)
    fdbar = np.array([e.f_dbar for e in ranked.entries], dtype=float)
    out = []
    for k, (a, b) in enumerate(zip(np.array_split(fd, 10), np.array_split(fdbar, 10)), 1):
        out.append((k, len(a), float(a.mean()) if len(a) else None,
                    float(b.mean()) if len(b) else None))
    return out


def frequency_distribution_report(ranked):
    """CSV of the ranking followed by a per-decile summary block."""
    if len(ranked) == 0:
        raise UsageError("ranked list is empty")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "term", "score", "f_d", "f_dbar"])
    for i, e in enumerate(ranked.entries, 1):
        w.writerow([i, e.term, f"{e.score:.12g}", e.f_d, e.f_dbar])
    w.writerow([])
    w.writerow(["decile", "count", "mean_f_d", "mean_f_dbar"])
    for k, n, md, mdbar in decile_summary(ranked):
        w.writerow([k, n, "" if md is None else f"{md:.6g}", "" if mdbar is None else f"{mdbar:.6g}"])
    return buf.getvalue()
