"""Noun-phrase chunking and ternary frame extraction from dependency parses."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

from sklearn.base import BaseEstimator, TransformerMixin

from ._text import DETERMINERS, singularize
from .corpus import CONLLU, build_frequency_index
from .exceptions import ConlluError, UndefinedEvidenceError, UsageError

NOMINAL = frozenset({"NOUN", "PROPN"})
MODIFIER = frozenset({"DET", "ADJ", "NUM", "NOUN", "PROPN"})
JOINERS = frozenset({"ADP", "CCONJ"})
RULES = ("R1", "R2", "R3", "R4")
OU_EPSILON = 1e-6


@dataclass(frozen=True)
class ParseToken:
    index: int
    form: str
    lemma: str
    upos: str
    head: int
    deprel: str

    @property
    def base_rel(self):
        return self.deprel.split(":")[0]


def parse_conllu(text, source="<string>"):
    """Parse CoNLL-U text into sentences of :class:`ParseToken`.

    Multiword-token ranges (``1-2``) and empty nodes (``1.1``) are skipped.
    """
    sentences, current, start_line = [], [], None

    def close():
        if current:
            _check_tree(current, source, start_line)
            sentences.append(list(current))
            current.clear()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            close()
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"{source}: expected 10 columns, got {len(cols)}", lineno)
        tid = cols[0]
        if "-" in tid or "." in tid:
            continue
        try:
            index = int(tid)
        except ValueError:
            raise ConlluError(f"{source}: non-numeric token id {tid!r}", lineno) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise ConlluError(f"{source}: non-numeric head {cols[6]!r}", lineno) from None
        if not current:
            start_line = lineno
        lemma = cols[2] if cols[2] != "_" else cols[1]
        current.append(ParseToken(index, cols[1], lemma, cols[3], head, cols[7]))
    close()
    return sentences


def _check_tree(tokens, source, line):
    n = len(tokens)
    if [t.index for t in tokens] != list(range(1, n + 1)):
        raise ConlluError(f"{source}: token ids are not 1..{n}", line)
    for t in tokens:
        if not 0 <= t.head <= n:
            raise ConlluError(f"{source}: head {t.head} out of range", line)
    if sum(t.head == 0 for t in tokens) != 1:
        raise ConlluError(f"{source}: sentence must have exactly one root", line)


def load_conllu(doc):
    if doc.source_kind != CONLLU:
        raise UsageError(f"{doc.id} is not a CoNLL-U document")
    return parse_conllu(doc.text, source=doc.id)


@dataclass(frozen=True)
class MergeDecision:
    left: str
    connector: str
    right: str
    ou: float
    joint_count: int
    merged: bool


@dataclass(frozen=True)
class NounPhrase:
    tokens: tuple
    head_index: int
    merges: tuple = ()

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("noun phrase span is empty")
        head = self.head_token
        if head.upos not in NOMINAL:
            raise ValueError(f"head {head.form!r} is not a noun")

    @property
    def start(self):
        return self.tokens[0].index

    @property
    def end(self):
        return self.tokens[-1].index

    @property
    def head_token(self):
        for t in self.tokens:
            if t.index == self.head_index:
                return t
        raise ValueError("head index outside span")

    @property
    def text(self):
        return " ".join(t.form for t in self.tokens)

    def content_tokens(self):
        toks = list(self.tokens)
        while len(toks) > 1 and toks[0].form.lower() in DETERMINERS:
            toks.pop(0)
        return toks

    @property
    def normalized(self):
        return normalize_phrase(self)

    @property
    def head_position(self):
        """Index of the head word within the normalized phrase."""
        return [t.index for t in self.content_tokens()].index(self.head_index)


def normalize_phrase(np):
    """Lowercase, drop leading articles and singularize the head noun.

    Strings are treated as phrases whose head is the last word.
    """
    if isinstance(np, str):
        words = np.lower().split()
        while len(words) > 1 and words[0] in DETERMINERS:
            words.pop(0)
        if words:
            words[-1] = singularize(words[-1])
        return " ".join(words)
    toks = np.content_tokens()
    words = [singularize(t.form) if t.index == np.head_index else t.form.lower() for t in toks]
    return " ".join(" ".join(words).split())


def uh_score(f_a, f_b, f_ab, total):
    """Mutual information plus log2 joint frequency; ``-inf`` when never joined."""
    if f_ab <= 0 or f_a <= 0 or f_b <= 0 or total <= 0:
        return -math.inf
    mi = math.log2((f_ab / total) / ((f_a / total) * (f_b / total)))
    return mi + math.log2(f_ab + 1)


def ou_score(f_a, f_b, f_ab, eps=OU_EPSILON):
    """Log-odds that two constituents form a unit."""
    if f_a <= 0 or f_b <= 0:
        raise UndefinedEvidenceError("constituent frequency is zero")
    e1, e2 = f_ab / f_a, f_ab / f_b
    if e1 <= 0 or e2 <= 0:
        return -math.inf
    return math.log(e1 / (1 - e1 + eps)) + math.log(e2 / (1 - e2 + eps))


def unithood(a, b, index):
    """UH over head-word window statistics of two noun phrases."""
    ha, hb = a.head_token.form.lower(), b.head_token.form.lower()
    return uh_score(index.unigram(ha), index.unigram(hb), index.pair(ha, hb), index.total_tokens)


def _forms(tokens):
    return [t.form.lower() for t in tokens]


def odds_of_unithood(a, b, index, connector=()):
    """OU from contiguous sequence counts.

    ``f(a)`` and ``f(b)`` count each phrase without leading articles,
    ``f(ab)`` counts the whole span ``a connector b``. A joint occurrence
    contains both parts, so the evidence ratios stay within [0, 1].
    """
    fa = index.sequence_count(_forms(a.content_tokens()))
    fb = index.sequence_count(_forms(b.content_tokens()))
    joint = _forms(a.content_tokens()) + [c.lower() for c in connector] + _forms(b.tokens)
    return ou_score(fa, fb, index.sequence_count(joint))


def _base_chunks(sentence):
    chunks, run = [], []

    def flush():
        nouns = [i for i, t in enumerate(run) if t.upos in NOMINAL]
        if nouns:
            span = tuple(run[:nouns[-1] + 1])
            chunks.append(NounPhrase(span, span[-1].index))
        run.clear()

    for tok in sentence:
        if tok.upos in MODIFIER:
            if tok.upos == "DET" and run:
                flush()
            run.append(tok)
        else:
            flush()
    flush()
    return chunks


def _span_head(tokens):
    inside = {t.index for t in tokens}
    for t in tokens:
        if t.upos in NOMINAL and t.head not in inside:
            return t.index
    return [t for t in tokens if t.upos in NOMINAL][-1].index


def chunk_noun_phrases(sentence, index, threshold=0.0, min_joint_count=2, decisions=None):
    """Base noun chunks, joined across a single preposition or conjunction
    when the odds of unithood reach *threshold*.

    A join also needs the joined span to occur at least *min_joint_count*
    times, so one-off sequences are never promoted to units. Every join
    considered is appended to *decisions* when a list is given.
    """
    base = _base_chunks(sentence)
    by_index = {t.index: t for t in sentence}
    out = []
    for chunk in base:
        if out:
            prev = out[-1]
            gap = chunk.start - prev.end
            conn = by_index.get(prev.end + 1)
            if gap == 2 and conn is not None and conn.upos in JOINERS:
                joint_seq = _forms(prev.content_tokens()) + [conn.form.lower()] + _forms(chunk.tokens)
                joint = index.sequence_count(joint_seq)
                try:
                    ou = odds_of_unithood(prev, chunk, index, (conn.form,))
                except UndefinedEvidenceError:
                    ou = -math.inf
                merged = ou >= threshold and joint >= min_joint_count
                decision = MergeDecision(prev.text, conn.form, chunk.text, ou, joint, merged)
                if decisions is not None:
                    decisions.append(decision)
                if merged:
                    span = prev.tokens + (conn,) + chunk.tokens
                    out[-1] = NounPhrase(span, _span_head(span), prev.merges + chunk.merges + (decision,))
                    continue
        out.append(chunk)
    return out


@dataclass(frozen=True)
class TernaryFrame:
    arg1: NounPhrase
    connector: str
    arg2: NounPhrase
    source: tuple
    rule_id: str

    def __post_init__(self):
        if not self.connector:
            raise ValueError("connector must not be empty")
        if (self.arg1.start, self.arg1.end) == (self.arg2.start, self.arg2.end):
            raise ValueError("frame arguments must be distinct spans")
        if self.rule_id not in RULES:
            raise ValueError(f"unknown rule {self.rule_id!r}")

    def to_record(self):
        return {
            "arg1": self.arg1.normalized,
            "connector": self.connector,
            "arg2": self.arg2.normalized,
            "doc": self.source[0],
            "sent": self.source[1],
            "rule": self.rule_id,
            "arg1_head": self.arg1.head_position,
            "arg2_head": self.arg2.head_position,
        }


@dataclass(frozen=True)
class FrameRecord:
    """A frame as read back from JSON Lines: arguments are normalized strings."""

    arg1: str
    connector: str
    arg2: str
    doc: str
    sent: int
    rule: str
    arg1_head: int = -1
    arg2_head: int = -1

    @classmethod
    def from_frame(cls, frame):
        return cls(**frame.to_record())

    def to_record(self):
        return {"arg1": self.arg1, "connector": self.connector, "arg2": self.arg2,
                "doc": self.doc, "sent": self.sent, "rule": self.rule,
                "arg1_head": self.arg1_head, "arg2_head": self.arg2_head}


def frames_to_jsonl(frames):
    lines = []
    for f in frames:
        rec = f.to_record()
        lines.append(json.dumps(rec, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def read_frames_jsonl(text):
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out.append(FrameRecord(
                rec["arg1"], rec["connector"], rec["arg2"], rec["doc"], int(rec["sent"]),
                rec["rule"], int(rec.get("arg1_head", -1)), int(rec.get("arg2_head", -1))))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"frames line {lineno}: {exc}") from exc
    return out


def _is_acronym_of(short, phrase):
    letters = short.form.strip("()")
    if not (letters.isupper() and 2 <= len(letters) <= 8):
        return False
    initials = "".join(t.form[0] for t in phrase.content_tokens() if t.form[:1].isalpha())
    return initials.upper() == letters.upper()


def _children(sentence):
    kids = {t.index: [] for t in sentence}
    kids[0] = []
    for t in sentence:
        kids[t.head].append(t)
    return kids


def _case_marker(tok, kids):
    marks = [c for c in kids[tok.index] if c.base_rel == "case"]
    return "_".join(c.lemma.lower() for c in sorted(marks, key=lambda c: c.index))


def extract_frames(sentence, chunks, source=("", 0)):
    """Apply the four frame rules to one parsed sentence.

    R1 subject-verb-object, R2 verb with prepositional complement (for the
    subject and, when present, the object), R3 noun modified by a
    prepositional phrase, R4 copula or apposition. A parenthesised acronym
    in apposition to the phrase it abbreviates yields no frame.
    """
    owner = {}
    for c in chunks:
        for t in c.tokens:
            owner[t.index] = c
    kids = _children(sentence)
    found = []

    def emit(a, conn, b, rule):
        if a is None or b is None or a is b:
            return
        found.append(TernaryFrame(a, conn, b, tuple(source), rule))

    for tok in sentence:
        deps = kids[tok.index]
        subj = next((owner.get(c.index) for c in deps if c.base_rel == "nsubj"), None)
        if tok.upos in ("VERB", "AUX") and subj is not None:
            verb = tok.lemma.lower()
            obj = next((owner.get(c.index) for c in deps if c.base_rel == "obj"), None)
            if obj is not None:
                emit(subj, verb, obj, "R1")
            for c in deps:
                if c.base_rel == "obl" and c.index in owner:
                    prep = _case_marker(c, kids)
                    if prep:
                        emit(subj, f"{verb}_{prep}", owner[c.index], "R2")
                        if obj is not None:
                            emit(obj, f"{verb}_{prep}", owner[c.index], "R2")
        if tok.index in owner:
            for c in deps:
                if c.base_rel == "nmod" and c.index in owner:
                    prep = _case_marker(c, kids)
                    if prep:
                        emit(owner[tok.index], prep, owner[c.index], "R3")
                elif c.base_rel == "appos" and c.index in owner:
                    if not _is_acronym_of(c, owner[tok.index]):
                        emit(owner[tok.index], "be", owner[c.index], "R4")
            if subj is not None and any(c.base_rel == "cop" for c in deps):
                emit(subj, "be", owner[tok.index], "R4")

    unique = {}
    for f in found:
        key = (f.arg1.start, f.arg1.end, f.connector, f.arg2.start, f.arg2.end)
        unique.setdefault(key, f)
    return sorted(unique.values(),
                  key=lambda f: (f.arg1.start, f.rule_id, f.arg2.start, f.connector))


def sample_frames(frames, k, seed):
    """Uniform sample of *k* frames without replacement, kept in input order."""
    if k is None or k >= len(frames):
        return list(frames)
    if k < 1:
        raise UsageError("sample size must be >= 1")
    picked = sorted(random.Random(seed).sample(range(len(frames)), k))
    return [frames[i] for i in picked]


class FrameExtractor(BaseEstimator, TransformerMixin):
    """Chunk and extract ternary frames from CoNLL-U documents.

    ``fit`` builds the domain frequency index used for unithood decisions
    unless one is passed in as *index*.
    """

    def __init__(self, index=None, ou_threshold=0.0, min_joint_count=2, window=5):
        self.index = index
        self.ou_threshold = ou_threshold
        self.min_joint_count = min_joint_count
        self.window = window

    def fit(self, docs, y=None):
        self.index_ = self.index if self.index is not None else build_frequency_index(list(docs), self.window)
        return self

    def chunk(self, sentence, decisions=None):
        return chunk_noun_phrases(sentence, self.index_, self.ou_threshold,
                                  self.min_joint_count, decisions)

    def transform(self, docs):
        frames = []
        for doc in sorted(docs, key=lambda d: d.id):
            if doc.source_kind != CONLLU:
                continue
            for s, sent in enumerate(load_conllu(doc), 1):
                frames.extend(extract_frames(sent, self.chunk(sent), (doc.id, s)))
        return frames
