"""Integrated scoring for spelling, abbreviation and casing noise.

Each suspicious token gets a set of replacement candidates. Every
candidate is scored as a weighted sum of four pieces of evidence: edit
similarity, abbreviation-dictionary weight, fit with the surrounding
words, and how often the corpus uses that exact casing. The default
weights are a reconstruction and can be changed.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .corpus import PLAIN, build_frequency_index, casing_counts, tokenize_spans
from .exceptions import UsageError

SPELLING = "spelling"
ABBREVIATION = "abbreviation"
CASING = "casing"
NOISE_CLASSES = (SPELLING, ABBREVIATION, CASING)

DEFAULT_WEIGHTS = {"edit": 0.4, "abbrev": 0.2, "context": 0.3, "case": 0.1}


def edit_distance(a, b):
    """Unit-cost Levenshtein distance (Wagner-Fischer, two rows)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


@dataclass
class AbbreviationDictionary:
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, expansions in self.entries.items():
            if not expansions:
                raise ValueError(f"abbreviation {key!r} has no expansion")
            for exp, w in expansions:
                if not 0.0 <= w <= 1.0:
                    raise ValueError(f"weight {w} for {key!r} -> {exp!r} outside [0, 1]")

    def __contains__(self, token):
        return token.lower() in self.entries

    def expansions(self, token):
        return list(self.entries.get(token.lower(), ()))

    def weight(self, token, expansion):
        for exp, w in self.entries.get(token.lower(), ()):
            if exp == expansion:
                return w
        return 0.0


def parse_abbreviations(text):
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"abbreviation line {lineno}: expected 3 tab-separated fields")
        abbrev, expansion, weight = parts
        entries.setdefault(abbrev.strip().lower(), []).append((expansion.strip(), float(weight)))
    return AbbreviationDictionary(entries)


def load_abbreviations(path):
    with open(path, encoding="utf-8") as fh:
        return parse_abbreviations(fh.read())


@dataclass(frozen=True)
class ReplacementCandidate:
    surface: str
    edit_sim: float
    abbrev_evidence: float
    context_fit: float
    case_prior: float
    score: float


@dataclass(frozen=True)
class FlaggedToken:
    sentence: int
    position: int  # index within the sentence
    offset: int  # token index within the document
    start: int  # character span in the document text
    end: int
    text: str
    noise_class: str


@dataclass
class CleaningReport:
    replacements: list = field(default_factory=list)
    unresolved: list = field(default_factory=list)
    counts: Counter = field(default_factory=Counter)

    def to_jsonl(self):
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.replacements)

    def merge(self, other):
        self.replacements.extend(other.replacements)
        self.unresolved.extend(other.unresolved)
        self.counts.update(other.counts)
        return self


def _majority_case(casing, lower):
    forms = casing.get(lower)
    if not forms:
        return None
    return min(forms.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def detect_noise_tokens(doc, lexicon, abbrevs=None, casing=None):
    """Flag tokens that look like spelling errors, abbreviations or bad casing.

    Sentence-initial tokens are never flagged for casing.
    """
    if not lexicon:
        raise UsageError("lexicon must not be empty")
    casing = casing or {}
    flags = []
    offset = 0
    for s, sent in enumerate(tokenize_spans(doc.text)):
        for p, (start, end, tok) in enumerate(sent):
            low = tok.lower()
            kind = None
            if abbrevs is not None and low in abbrevs:
                kind = ABBREVIATION
            elif low not in lexicon:
                if not any(ch.isdigit() for ch in tok):
                    kind = SPELLING
            elif p > 0:
                majority = _majority_case(casing, low)
                if majority is not None and tok != majority:
                    kind = CASING
            if kind is not None:
                flags.append(FlaggedToken(s, p, offset + p, start, end, tok, kind))
        offset += len(sent)
    return flags


def _case_share(casing, surface):
    shares = []
    for word in surface.split():
        forms = casing.get(word.lower())
        total = sum(forms.values()) if forms else 0
        shares.append(forms[word] / total if total else 0.0)
    return sum(shares) / len(shares) if shares else 0.0


def issac_score(token, window, candidates, index, abbrevs=None, casing=None,
                weights=None):
    """Score replacement *candidates* for *token* given its neighbour *window*.

    Edit similarity is computed case-insensitively, which leaves casing
    decisions to the context and case-prior evidence.
    """
    if not candidates:
        raise UsageError("candidates must not be empty")
    w = {**DEFAULT_WEIGHTS, **(weights or {})}
    casing = casing or {}
    window = [x.lower() for x in window]
    scored = []
    for cand in dict.fromkeys(candidates):
        edit_sim = 1.0 / (1 + edit_distance(token.lower(), cand.lower()))
        abbrev = abbrevs.weight(token, cand) if abbrevs is not None else 0.0
        head = cand.split()[-1].lower()
        fit = (sum(1 for x in window if index.pair(x, head) > 0) / len(window)) if window else 0.0
        prior = _case_share(casing, cand)
        score = w["edit"] * edit_sim + w["abbrev"] * abbrev + w["context"] * fit + w["case"] * prior
        scored.append(ReplacementCandidate(cand, edit_sim, abbrev, fit, prior, score))
    scored.sort(key=lambda c: (-c.score, c.surface))
    return scored


def generate_candidates(flag, lexicon, abbrevs=None, casing=None, max_distance=2):
    low = flag.text.lower()
    out = []
    if flag.noise_class == CASING:
        out.extend(sorted((casing or {}).get(low, ())))
    else:
        out.extend(w for w in sorted(lexicon)
                   if w != low and abs(len(w) - len(low)) <= max_distance
                   and edit_distance(low, w) <= max_distance)
    if abbrevs is not None:
        out.extend(exp for exp, _ in abbrevs.expansions(low))
    return out


def _match_case(original, chosen, sentence_initial):
    if sentence_initial and original[:1].isupper() and chosen[:1].islower():
        return chosen[:1].upper() + chosen[1:]
    return chosen


def clean_document(doc, lexicon, index, abbrevs=None, casing=None, weights=None,
                   threshold=0.5, max_distance=2):
    """Replace each flagged token by its best candidate when it scores >= *threshold*.

    Returns the cleaned document and a :class:`CleaningReport`.
    """
    if doc.source_kind != PLAIN:
        raise UsageError(f"{doc.id}: only plain documents can be cleaned")
    report = CleaningReport()
    flags = detect_noise_tokens(doc, lexicon, abbrevs, casing)
    if not flags:
        return doc, report
    sentences = tokenize_spans(doc.text)
    edits = []
    for flag in flags:
        sent = [t for _, _, t in sentences[flag.sentence]]
        window = sent[max(0, flag.position - 2):flag.position] + sent[flag.position + 1:flag.position + 3]
        cands = generate_candidates(flag, lexicon, abbrevs, casing, max_distance)
        best = issac_score(flag.text, window, cands, index, abbrevs, casing, weights)[0] if cands else None
        if best is None or best.score < threshold:
            report.unresolved.append({
                "doc": doc.id, "offset": flag.offset, "original": flag.text,
                "class": flag.noise_class,
                "best": best.surface if best else None,
                "score": round(best.score, 6) if best else None,
            })
            continue
        chosen = _match_case(flag.text, best.surface, flag.position == 0)
        if chosen == flag.text:
            continue
        edits.append((flag.start, flag.end, chosen))
        report.replacements.append({
            "doc": doc.id, "offset": flag.offset, "original": flag.text,
            "chosen": chosen, "score": round(best.score, 6), "class": flag.noise_class,
        })
        report.counts[flag.noise_class] += 1
    text = doc.text
    for start, end, chosen in reversed(edits):
        text = text[:start] + chosen + text[end:]
    return replace(doc, text=text), report


class TextCleaner(BaseEstimator, TransformerMixin):
    """Learn a lexicon and corpus statistics, then clean plain documents.

    Parameters
    ----------
    abbreviations : AbbreviationDictionary or None
    wordlist : iterable of str, optional
        Extra words always accepted as correctly spelled.
    min_count : int
        Corpus frequency a word needs to enter the lexicon.
    threshold : float
        Minimum candidate score for a replacement.
    weights : dict, optional
        Overrides for the ``edit``/``abbrev``/``context``/``case`` weights.
    window : int
        Co-occurrence window of the fitted index. The default matches the
        two words on each side that form a suspect's context.
    """

    def __init__(self, abbreviations=None, wordlist=None, min_count=2, threshold=0.5,
                 weights=None, window=2, max_distance=2):
        self.abbreviations = abbreviations
        self.wordlist = wordlist
        self.min_count = min_count
        self.threshold = threshold
        self.weights = weights
        self.window = window
        self.max_distance = max_distance

    def fit(self, docs, y=None):
        docs = list(docs)
        self.index_ = build_frequency_index(docs, window=self.window)
        lexicon = {w for w, c in self.index_.unigram_counts.items() if c >= self.min_count}
        lexicon.update(w.lower() for w in (self.wordlist or ()))
        if not lexicon:
            raise UsageError("cannot derive a lexicon from the given documents")
        self.lexicon_ = frozenset(lexicon)
        self.casing_ = casing_counts(docs)
        return self

    def clean(self, doc):
        if not hasattr(self, "lexicon_"):
            raise NotFittedError("TextCleaner is not fitted yet")
        return clean_document(doc, self.lexicon_, self.index_, self.abbreviations,
                              self.casing_, self.weights, self.threshold, self.max_distance)

    def transform(self, docs):
        self.report_ = CleaningReport()
        out = []
        for doc in docs:
            if doc.source_kind != PLAIN:
                out.append(doc)
                continue
            cleaned, rep = self.clean(doc)
            self.report_.merge(rep)
            out.append(cleaned)
        return out
