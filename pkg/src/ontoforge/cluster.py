"""Featureless term distances and tree-traversing-ant clustering."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array

from .exceptions import EmptyInputError, ProviderInconsistencyError, UsageError

LEAF = "leaf"
INTERNAL = "internal"
OUTLIER = "outlier"


class HitCountProvider(Protocol):
    N: int

    def hits(self, x: str) -> int: ...

    def pair_hits(self, x: str, y: str) -> int: ...


class SnapshotProvider:
    """Serve hit counts from a :class:`~ontoforge.corpus.HitCountSnapshot`."""

    def __init__(self, snapshot):
        self.snapshot = snapshot
        self.N = snapshot.N

    def hits(self, x):
        return self.snapshot.hits(x)

    def pair_hits(self, x, y):
        return self.snapshot.pair_hits(x, y)


def ngd_distance(x, y, provider):
    """Normalised Google Distance clamped to [0, 1]."""
    fx, fy = provider.hits(x), provider.hits(y)
    fxy = fx if x == y else provider.pair_hits(x, y)
    if fx <= 0 or fy <= 0 or fxy <= 0:
        return 1.0
    if x == y:
        return 0.0
    n = provider.N
    if n <= max(fx, fy):
        raise ProviderInconsistencyError(
            f"universe size N={n} must exceed the hit counts of {x!r} ({fx}) and {y!r} ({fy})")
    if fxy > min(fx, fy):
        raise ProviderInconsistencyError(
            f"pair count for ({x!r}, {y!r}) = {fxy} exceeds a unigram count")
    lx, ly = math.log(fx), math.log(fy)
    raw = (max(lx, ly) - math.log(fxy)) / (math.log(n) - min(lx, ly))
    return min(1.0, max(0.0, raw))


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    terms: tuple
    d: np.ndarray

    def __post_init__(self):
        d = check_array(self.d, dtype=np.float64, ensure_min_samples=0, ensure_min_features=0)
        n = len(self.terms)
        if d.shape != (n, n):
            raise ValueError(f"matrix shape {d.shape} does not match {n} terms")
        if len(set(self.terms)) != n:
            raise ValueError("terms must be distinct")
        if n and (not np.allclose(d, d.T, atol=1e-12) or np.any(np.diag(d) != 0)
                  or d.min() < 0 or d.max() > 1):
            raise ValueError("distance matrix must be symmetric in [0, 1] with zero diagonal")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "terms", tuple(self.terms))

    def __len__(self):
        return len(self.terms)

    def to_tsv(self):
        lines = []
        for i, a in enumerate(self.terms):
            for j in range(i + 1, len(self.terms)):
                lines.append(f"{a}\t{self.terms[j]}\t{self.d[i, j]:.12g}")
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_tsv(cls, text, terms=None):
        values = {}
        seen = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"distance line {lineno}: expected 3 columns")
            a, b, v = parts
            values[(a, b)] = values[(b, a)] = float(v)
            seen.extend((a, b))
        terms = list(terms) if terms is not None else sorted(set(seen))
        pos = {t: i for i, t in enumerate(terms)}
        d = np.zeros((len(terms), len(terms)))
        for (a, b), v in values.items():
            if a in pos and b in pos:
                d[pos[a], pos[b]] = v
        return cls(tuple(terms), d)


def build_distance_matrix(terms, provider):
    terms = list(terms)
    if len(set(terms)) != len(terms):
        raise UsageError("terms must be distinct")
    n = len(terms)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            try:
                d[i, j] = d[j, i] = ngd_distance(terms[i], terms[j], provider)
            except ProviderInconsistencyError as exc:
                raise ProviderInconsistencyError(f"pair ({terms[i]!r}, {terms[j]!r}): {exc}") from exc
    return DistanceMatrix(tuple(terms), d)


@dataclass
class ClusterNode:
    id: str
    members: frozenset
    children: list = field(default_factory=list)
    outliers: frozenset = frozenset()
    medoid: str | None = None
    kind: str = LEAF
    # objective after seeding and after every refinement pass
    refine_history: list = field(default_factory=list, repr=False, compare=False)

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def leaves(self):
        return [n for n in self.walk() if n.kind == LEAF]

    def to_dict(self):
        return {
            "id": self.id,
            "kind": self.kind,
            "medoid": self.medoid,
            "members": sorted(self.members),
            "outliers": sorted(self.outliers),
            "children": [c.to_dict() for c in self.children],
        }

    @classmethod
    def from_dict(cls, d):
        children = [cls.from_dict(c) for c in d.get("children", [])]
        kind = d.get("kind") or (INTERNAL if children else LEAF)
        return cls(d["id"], frozenset(d["members"]), children, frozenset(d.get("outliers", [])),
                   d.get("medoid"), kind)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


class _Dist:
    def __init__(self, matrix):
        self.pos = {t: i for i, t in enumerate(matrix.terms)}
        self.d = matrix.d

    def __call__(self, a, b):
        return self.d[self.pos[a], self.pos[b]]

    def mean_to(self, x, group):
        others = [g for g in group if g != x]
        if not others:
            return math.nan
        return float(np.mean([self(x, g) for g in others]))

    def mean_pairwise(self, group):
        g = sorted(group)
        if len(g) < 2:
            return 0.0
        idx = [self.pos[t] for t in g]
        sub = self.d[np.ix_(idx, idx)]
        return float(sub[np.triu_indices(len(g), 1)].mean())


def _objective(dist, groups):
    total = 0.0
    for g in groups:
        for x in g:
            m = dist.mean_to(x, g)
            total += 0.0 if math.isnan(m) else m
    return total


def _medoid(dist, members):
    return min(sorted(members), key=lambda m: (sum(dist(m, o) for o in members), m))


def _split(dist, members, passes, rng):
    """Farthest-pair seeding, nearest-seed assignment, then ant refinement."""
    ordered = sorted(members)
    best, seeds = -1.0, None
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            v = dist(a, b)
            if v > best:
                best, seeds = v, (a, b)
    groups = [{seeds[0]}, {seeds[1]}]
    for m in ordered:
        if m in seeds:
            continue
        groups[0 if dist(m, seeds[0]) <= dist(m, seeds[1]) else 1].add(m)
    history = [_objective(dist, groups)]
    for _ in range(passes):
        visit = list(ordered)
        rng.shuffle(visit)
        moved = False
        for x in visit:
            src = 0 if x in groups[0] else 1
            dst = 1 - src
            if len(groups[src]) == 1:
                continue
            here = dist.mean_to(x, groups[src])
            there = float(np.mean([dist(x, g) for g in groups[dst]]))
            if there >= here:
                continue
            before = _objective(dist, groups)
            groups[src].discard(x)
            groups[dst].add(x)
            if _objective(dist, groups) < before - 1e-12:
                moved = True
            else:
                groups[dst].discard(x)
                groups[src].add(x)
        history.append(_objective(dist, groups))
        if not moved:
            break
    return groups, history


def isolate_outliers(node, theta_out, dist):
    """Move members far from every child into the node's outlier set.

    A member's affinity to its own child is the mean distance to the other
    members of that child; a singleton child gives no evidence and is
    ignored.
    """
    if not node.children:
        return node
    child_sets = [set(c.members) for c in node.children]
    ejected = set()
    for x in sorted(node.members - node.outliers):
        means = []
        for g in child_sets:
            if x in g:
                m = dist.mean_to(x, g)
            else:
                m = float(np.mean([dist(x, y) for y in g])) if g else math.nan
            if not math.isnan(m):
                means.append(m)
        if means and min(means) >= theta_out:
            ejected.add(x)
    if not ejected:
        return node
    kept = []
    for c, g in zip(node.children, child_sets):
        rest = frozenset(g - ejected)
        if rest:
            c.members = rest
            kept.append(c)
    node.children = kept
    node.outliers = frozenset(node.outliers | ejected)
    return node


def _build(dist, members, node_id, params, seed):
    node = ClusterNode(node_id, frozenset(members))
    max_leaf, theta_split, theta_out, passes = params
    if len(members) <= max_leaf or dist.mean_pairwise(members) <= theta_split:
        node.kind = LEAF
        return node
    rng = random.Random(f"{seed}:{node_id}")
    groups, history = _split(dist, members, passes, rng)
    node.kind = INTERNAL
    node.refine_history = history
    node.children = [ClusterNode(f"{node_id}.{i}", frozenset(g)) for i, g in enumerate(groups)]
    isolate_outliers(node, theta_out, dist)
    node.children = [_build(dist, c.members, c.id, params, seed) for c in node.children]
    return node


def label_concepts(root, dist):
    for node in root.walk():
        if node.members:
            node.medoid = _medoid(dist, node.members)
    return root


def tta_cluster(matrix, max_leaf=4, theta_split=0.35, theta_out=0.75, passes=3, seed=0):
    """Cluster the terms of *matrix* into a labelled binary concept tree."""
    if len(matrix) == 0:
        raise EmptyInputError("cannot cluster an empty distance matrix")
    if not 0 < theta_split < theta_out <= 1:
        raise UsageError("need 0 < theta_split < theta_out <= 1")
    if max_leaf < 1 or passes < 0:
        raise UsageError("max_leaf must be >= 1 and passes >= 0")
    dist = _Dist(matrix)
    root = _build(dist, set(matrix.terms), "n0", (max_leaf, theta_split, theta_out, passes), seed)
    return label_concepts(root, dist)


class TTAClustering(ClusterMixin, BaseEstimator):
    """Tree-traversing-ant clustering over a precomputed distance matrix.

    ``fit`` accepts a :class:`DistanceMatrix` or a square array together
    with ``terms``. After fitting, ``tree_`` holds the concept tree and
    ``labels_`` the leaf index of every term, ``-1`` for outliers.
    """

    def __init__(self, max_leaf=4, theta_split=0.35, theta_out=0.75, passes=3, random_state=0):
        self.max_leaf = max_leaf
        self.theta_split = theta_split
        self.theta_out = theta_out
        self.passes = passes
        self.random_state = random_state

    def fit(self, X, y=None, terms=None):
        if not isinstance(X, DistanceMatrix):
            X = check_array(X, dtype=np.float64)
            if terms is None:
                terms = [str(i) for i in range(X.shape[0])]
            X = DistanceMatrix(tuple(terms), X)
        self.matrix_ = X
        self.tree_ = tta_cluster(X, self.max_leaf, self.theta_split, self.theta_out,
                                 self.passes, self.random_state)
        leaf_of = {}
        for i, leaf in enumerate(sorted(self.tree_.leaves(), key=lambda n: n.id)):
            for m in leaf.members:
                leaf_of[m] = i
        self.labels_ = np.array([leaf_of.get(t, -1) for t in X.terms], dtype=int)
        self.n_leaves_ = len(self.tree_.leaves())
        return self
