"""Corpus ingestion, tokenization and frequency indices."""
from __future__ import annotations

import json
import logging
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ._text import TOKEN_RE, singularize
from .exceptions import (
    EmptyCorpusError,
    IngestError,
    SnapshotParseError,
    SnapshotValidationError,
)

logger = logging.getLogger(__name__)

DOMAIN = "domain"
CONTRASTIVE = "contrastive"
CORPUS_TAGS = (DOMAIN, CONTRASTIVE)

PLAIN = "plain"
CONLLU = "conllu"
_SUFFIX_KIND = {".txt": PLAIN, ".conllu": CONLLU}

PAIR_SEP = "||"

_PARAGRAPH_RE = re.compile(r"\n[ \t]*\n")
_SENTENCE_RE = re.compile(r"(?<=[.?!])\s+(?=[A-Z])")


@dataclass(frozen=True)
class Document:
    id: str
    corpus_tag: str
    text: str
    source_kind: str = PLAIN

    def __post_init__(self):
        if self.corpus_tag not in CORPUS_TAGS:
            raise ValueError(f"unknown corpus tag {self.corpus_tag!r}")
        if self.source_kind not in (PLAIN, CONLLU):
            raise ValueError(f"unknown source kind {self.source_kind!r}")

    def to_dict(self):
        return {"id": self.id, "corpus_tag": self.corpus_tag,
                "source_kind": self.source_kind, "text": self.text}

    @classmethod
    def from_dict(cls, d):
        return cls(d["id"], d["corpus_tag"], d["text"], d.get("source_kind", PLAIN))


class IngestResult(list):
    """List of documents that also remembers which files were skipped."""

    def __init__(self, docs=(), skipped=()):
        super().__init__(docs)
        self.skipped = list(skipped)

    @property
    def skipped_count(self):
        return len(self.skipped)


def ingest_directory(path, tag):
    """Read every ``.txt`` and ``.conllu`` file below *path*.

    Document ids are the relative path without extension, using ``/``.
    """
    if tag not in CORPUS_TAGS:
        raise IngestError(f"unknown corpus tag {tag!r}")
    root = Path(path)
    if not root.is_dir():
        raise IngestError(f"cannot read corpus directory {root}")
    docs, skipped = [], []
    seen = {}
    for file in sorted(p for p in root.rglob("*") if p.is_file()):
        rel = file.relative_to(root)
        kind = _SUFFIX_KIND.get(file.suffix.lower())
        if kind is None:
            skipped.append(rel.as_posix())
            continue
        doc_id = rel.with_suffix("").as_posix()
        if doc_id in seen:
            raise IngestError(f"duplicate document id {doc_id!r} ({seen[doc_id]} and {rel})")
        seen[doc_id] = rel.as_posix()
        try:
            text = file.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise IngestError(f"cannot read {file}: {exc}") from exc
        if kind == PLAIN and not text.strip():
            skipped.append(rel.as_posix())
            continue
        docs.append(Document(doc_id, tag, text, kind))
    if skipped:
        logger.warning("skipped %d file(s) in %s", len(skipped), root)
    if not docs:
        raise EmptyCorpusError(f"no documents found in {root}")
    docs.sort(key=lambda d: d.id)
    return IngestResult(docs, skipped)


def split_sentences(text):
    """Split on blank lines and on ``.?!`` followed by whitespace and a capital."""
    out = []
    for para in _PARAGRAPH_RE.split(text):
        out.extend(s for s in _SENTENCE_RE.split(para) if s.strip())
    return out


def tokenize(text):
    """Return a list of sentences, each a list of tokens in original case."""
    sentences = []
    for chunk in split_sentences(text):
        toks = TOKEN_RE.findall(chunk)
        if toks:
            sentences.append(toks)
    return sentences


def tokenize_spans(text):
    """Like :func:`tokenize` but yields ``(start, end, token)`` triples."""
    sentences = []
    for para in _iter_spans(text, _PARAGRAPH_RE):
        for start, sent in _iter_spans_in(para, _SENTENCE_RE):
            toks = [(start + m.start(), start + m.end(), m.group())
                    for m in TOKEN_RE.finditer(sent)]
            if toks:
                sentences.append(toks)
    return sentences


def _iter_spans(text, sep):
    pos = 0
    for m in sep.finditer(text):
        yield (pos, text[pos:m.start()])
        pos = m.end()
    yield (pos, text[pos:])


def _iter_spans_in(span, sep):
    base, text = span
    for start, piece in _iter_spans(text, sep):
        yield base + start, piece


def document_sentences(doc):
    """Original-case token sentences for a document of either kind."""
    if doc.source_kind == CONLLU:
        from .frames import parse_conllu

        out = []
        for sent in parse_conllu(doc.text, source=doc.id):
            toks = [t.form for t in sent if TOKEN_RE.fullmatch(t.form)]
            if toks:
                out.append(toks)
        return out
    return tokenize(doc.text)


@dataclass(frozen=True, eq=False)
class FrequencyIndex:
    """Immutable token and window co-occurrence counts over one corpus."""

    unigram_counts: dict
    pair_window_counts: dict
    doc_frequency: dict
    total_tokens: int
    total_docs: int
    window: int = 5
    # lowercased token sentences per document, in document-id order
    doc_sentences: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def unigram(self, word):
        return self.unigram_counts.get(word.lower(), 0)

    def pair(self, a, b):
        a, b = a.lower(), b.lower()
        if a == b:
            return 0
        return self.pair_window_counts.get((a, b) if a < b else (b, a), 0)

    def sentences(self):
        for doc in self.doc_sentences:
            yield from doc

    def sequence_count(self, words):
        """Contiguous occurrences of an exact lowercased token sequence."""
        words = tuple(w.lower() for w in words)
        if not words:
            return 0
        return self._ngrams(len(words), None).get(words, 0)

    def phrase_count(self, words, head_pos=-1):
        """Occurrences of a normalized phrase.

        Corpus n-grams have the word at *head_pos* singularized before
        comparison, so ``chemicals`` counts toward ``chemical``.
        """
        words = tuple(w.lower() for w in words)
        if not words:
            return 0
        n = len(words)
        head_pos = head_pos % n
        return self._ngrams(n, head_pos).get(words, 0)

    def _ngrams(self, n, head_pos):
        key = (n, head_pos)
        table = self._cache.get(key)
        if table is None:
            table = Counter()
            for sent in self.sentences():
                for i in range(len(sent) - n + 1):
                    gram = sent[i:i + n]
                    if head_pos is not None:
                        gram = gram[:head_pos] + (singularize(gram[head_pos]),) + gram[head_pos + 1:]
                    table[gram] += 1
            self._cache[key] = table
        return table

    def document_phrase_frequency(self, words, head_pos=-1):
        """Number of documents containing the normalized phrase at least once."""
        return len(self.documents_containing(words, head_pos))

    def documents_containing(self, words, head_pos=-1):
        words = tuple(w.lower() for w in words)
        n = len(words)
        key = ("docs", n, head_pos % n if n else 0)
        table = self._cache.get(key)
        if table is None:
            hp = key[2]
            table = {}
            for d, doc in enumerate(self.doc_sentences):
                for sent in doc:
                    for i in range(len(sent) - n + 1):
                        gram = sent[i:i + n]
                        gram = gram[:hp] + (singularize(gram[hp]),) + gram[hp + 1:]
                        table.setdefault(gram, set()).add(d)
            self._cache[key] = table
        return frozenset(table.get(words, ()))

    def to_dict(self):
        return {
            "window": self.window,
            "total_tokens": self.total_tokens,
            "total_docs": self.total_docs,
            "unigram": self.unigram_counts,
            "pair": {f"{a}{PAIR_SEP}{b}": c for (a, b), c in self.pair_window_counts.items()},
            "doc_frequency": self.doc_frequency,
        }

    def __eq__(self, other):
        if not isinstance(other, FrequencyIndex):
            return NotImplemented
        return self.to_dict() == other.to_dict() and self.doc_sentences == other.doc_sentences

    __hash__ = None


def _count_document(doc, window):
    sentences = tuple(tuple(t.lower() for t in s) for s in document_sentences(doc))
    uni, pairs = Counter(), Counter()
    for sent in sentences:
        uni.update(sent)
        for i, a in enumerate(sent):
            partners = set(sent[i + 1:i + 1 + window])
            partners.discard(a)
            for b in partners:
                pairs[(a, b) if a < b else (b, a)] += 1
    return sentences, uni, pairs


def build_frequency_index(docs, window=5, n_jobs=1):
    """Build a :class:`FrequencyIndex` over *docs*.

    A pair ``(a, b)`` is counted once per token position of ``a`` (or ``b``)
    that has the other word among its next *window* tokens in the same
    sentence, so no pair count can exceed the token total.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    docs = sorted(docs, key=lambda d: d.id)
    if n_jobs == 1:
        parts = [_count_document(d, window) for d in docs]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs if n_jobs > 0 else None) as pool:
            parts = list(pool.map(lambda d: _count_document(d, window), docs))
    uni, pairs, dfreq = Counter(), Counter(), Counter()
    for _, u, p in parts:
        uni.update(u)
        pairs.update(p)
        dfreq.update(u.keys())
    return FrequencyIndex(
        unigram_counts=dict(sorted(uni.items())),
        pair_window_counts=dict(sorted(pairs.items())),
        doc_frequency=dict(sorted(dfreq.items())),
        total_tokens=sum(uni.values()),
        total_docs=len(docs),
        window=window,
        doc_sentences=tuple(s for s, _, _ in parts),
    )


def casing_counts(docs):
    """Tally surface casings per lowercase word, skipping sentence-initial tokens."""
    counts = {}
    for doc in docs:
        for sent in document_sentences(doc):
            for tok in sent[1:]:
                counts.setdefault(tok.lower(), Counter())[tok] += 1
    return counts


@dataclass(frozen=True)
class HitCountSnapshot:
    N: int
    unigram: dict
    pair: dict  # keyed by lexicographically sorted (x, y) tuples

    def hits(self, x):
        return self.unigram.get(x, 0)

    def pair_hits(self, x, y):
        if x == y:
            return self.unigram.get(x, 0)
        return self.pair.get((x, y) if x < y else (y, x), 0)

    def validate(self):
        bad = []
        for x, c in self.unigram.items():
            if c < 0 or c > self.N:
                bad.append(x)
        for (x, y), c in self.pair.items():
            if c < 0 or c > min(self.unigram.get(x, 0), self.unigram.get(y, 0)):
                bad.append(f"{x}{PAIR_SEP}{y}")
        if self.N < 0:
            bad.append("N")
        if bad:
            raise SnapshotValidationError(
                "snapshot invariant violated for: " + ", ".join(bad), bad)
        return self

    def to_json_obj(self):
        return {
            "N": self.N,
            "unigram": dict(sorted(self.unigram.items())),
            "pair": {f"{x}{PAIR_SEP}{y}": c for (x, y), c in sorted(self.pair.items())},
        }


def parse_hit_count_snapshot(obj):
    if not isinstance(obj, dict):
        raise SnapshotParseError("snapshot must be a JSON object")
    for key in ("N", "unigram", "pair"):
        if key not in obj:
            raise SnapshotParseError(f"snapshot is missing {key!r}")
    if not isinstance(obj["N"], int) or isinstance(obj["N"], bool):
        raise SnapshotParseError("N must be an integer")
    if not isinstance(obj["unigram"], dict) or not isinstance(obj["pair"], dict):
        raise SnapshotParseError("unigram and pair must be objects")
    unigram = {}
    for k, v in obj["unigram"].items():
        if not isinstance(v, int):
            raise SnapshotParseError(f"unigram count for {k!r} is not an integer")
        unigram[k] = v
    pair = {}
    for k, v in obj["pair"].items():
        parts = k.split(PAIR_SEP)
        if len(parts) != 2 or not isinstance(v, int):
            raise SnapshotParseError(f"bad pair entry {k!r}")
        x, y = sorted(parts)
        pair[(x, y)] = v
    return HitCountSnapshot(obj["N"], unigram, pair).validate()


def load_hit_count_snapshot(path):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SnapshotParseError(f"{path}: {exc}") from exc
    return parse_hit_count_snapshot(obj)


def snapshot_from_index(index, phrases):
    """Document-frequency snapshot for *phrases* with ``N = total_docs``.

    Used when no hit-count file is configured.
    """
    doc_sets = {p: index.documents_containing(p.split()) for p in phrases}
    unigram = {p: len(s) for p, s in sorted(doc_sets.items())}
    pair = {}
    ordered = sorted(doc_sets)
    for i, x in enumerate(ordered):
        for y in ordered[i + 1:]:
            c = len(doc_sets[x] & doc_sets[y])
            if c:
                pair[(x, y)] = c
    return HitCountSnapshot(index.total_docs, unigram, pair).validate()
