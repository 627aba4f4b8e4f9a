"""Term candidates, contrastive statistics and the four termhood measures."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._text import singularize
from .exceptions import InconsistentTotalsError, UsageError
from .frames import FrameRecord

MEASURES = ("th", "ot", "cw", "ncv")


@dataclass(frozen=True, order=True)
class TermCandidate:
    normalized: str
    head_pos: int = -1

    @property
    def words(self):
        return tuple(self.normalized.split())

    @property
    def length(self):
        return len(self.words)

    @property
    def head(self):
        return self.words[self.head_pos]

    @property
    def modifiers(self):
        hp = self.head_pos % self.length
        return tuple(w for i, w in enumerate(self.words) if i != hp)

    @classmethod
    def from_text(cls, text, head_pos=-1):
        return cls(" ".join(text.lower().split()), head_pos)


@dataclass(frozen=True)
class TermStats:
    f_d: int
    f_dbar: int
    context_words: frozenset = frozenset()
    context_counts: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Totals:
    """Occurrence mass per corpus: candidate phrases and all word tokens."""

    F_d: int
    F_dbar: int
    W_d: int
    W_dbar: int


@dataclass(frozen=True)
class RankedEntry:
    candidate: TermCandidate
    score: float
    f_d: int
    f_dbar: int

    @property
    def term(self):
        return self.candidate.normalized


@dataclass(frozen=True)
class RankedTermList:
    measure: str
    entries: tuple

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def terms(self):
        return [e.term for e in self.entries]


def _as_records(frames):
    for f in frames:
        yield f if isinstance(f, FrameRecord) else FrameRecord.from_frame(f)


def collect_candidates(frames):
    """Distinct normalized frame arguments, sorted."""
    heads = {}
    for rec in _as_records(frames):
        for text, hp in ((rec.arg1, rec.arg1_head), (rec.arg2, rec.arg2_head)):
            heads.setdefault(text, Counter())[hp] += 1
    out = []
    for text, hc in heads.items():
        hp = min(hc.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        n = len(text.split())
        out.append(TermCandidate(text, hp % n if n else -1))
    return sorted(out)


def context_counts(candidate, frames):
    """Count connector tokens and other-argument heads around *candidate*."""
    counts = Counter()
    for rec in _as_records(frames):
        for mine, other, other_hp in ((rec.arg1, rec.arg2, rec.arg2_head),
                                      (rec.arg2, rec.arg1, rec.arg1_head)):
            if mine != candidate.normalized:
                continue
            words = set(rec.connector.lower().split("_"))
            other_words = other.split()
            if other_words:
                words.add(other_words[other_hp])
            counts.update(words)
    return counts


def word_frequency(index, word):
    return index.phrase_count((singularize(word),), 0)


def compute_stats(c, domain_index, contrastive_index, frames=(), contexts=None):
    counts = contexts if contexts is not None else context_counts(c, frames)
    return TermStats(
        f_d=domain_index.phrase_count(c.words, c.head_pos),
        f_dbar=contrastive_index.phrase_count(c.words, c.head_pos),
        context_words=frozenset(counts),
        context_counts=dict(sorted(counts.items())),
    )


def _dt(f_d, f_dbar):
    return math.log2((f_d + 1) / (f_dbar + 1) + 1)


def _dp(f_d, f_dbar):
    return math.log10(f_d + 10) * _dt(f_d, f_dbar)


def _mean(values):
    values = list(values)
    return sum(values) / len(values) if values else 0.0


def score_th(c, stats, word_stats, alpha=0.5, beta=0.25):
    """Domain prevalence of the phrase plus modifier and context evidence."""
    mods = _mean(_dp(*word_stats.get(m, (0, 0))) for m in c.modifiers)
    ctx = _mean(_dt(*word_stats.get(w, (0, 0))) for w in sorted(stats.context_words))
    return _dp(stats.f_d, stats.f_dbar) + alpha * mods + beta * ctx


def _log_odds_ratio(f_d, f_dbar, F_d, F_dbar):
    if f_d > F_d or f_dbar > F_dbar:
        raise InconsistentTotalsError(
            f"frequency exceeds its corpus total ({f_d}>{F_d} or {f_dbar}>{F_dbar})")
    odds_d = (f_d + 0.5) / (F_d - f_d + 0.5)
    odds_dbar = (f_dbar + 0.5) / (F_dbar - f_dbar + 0.5)
    return math.log(odds_d / odds_dbar)


def score_ot(c, stats, word_stats, totals):
    """Log odds of occurring in the domain rather than the contrastive corpus.

    Word-level odds for modifiers and context use token totals.
    """
    base = _log_odds_ratio(stats.f_d, stats.f_dbar, totals.F_d, totals.F_dbar)
    mods = _mean(_log_odds_ratio(*word_stats.get(m, (0, 0)), totals.W_d, totals.W_dbar)
                 for m in c.modifiers)
    ctx = _mean(_log_odds_ratio(*word_stats.get(w, (0, 0)), totals.W_d, totals.W_dbar)
                for w in sorted(stats.context_words))
    return base + mods + ctx


def _cw_simple(f_d, f_all, F_all):
    return math.log(f_d + 1) * math.log(F_all / (f_all + 1) + 1)


def score_cw(c, stats, word_stats, totals):
    if c.length == 1:
        return _cw_simple(stats.f_d, stats.f_d + stats.f_dbar, totals.F_d + totals.F_dbar)
    hd, hdbar = word_stats.get(c.head, (0, 0))
    return stats.f_d * _cw_simple(hd, hd + hdbar, totals.W_d + totals.W_dbar)


def score_ncv(c, stats, container_freqs, ctx_stats, n_candidates):
    """NC-value; contrastive counts play no part."""
    weight = math.log2(c.length + 1)
    if container_freqs:
        cval = weight * (stats.f_d - _mean(container_freqs))
    else:
        cval = weight * stats.f_d
    if n_candidates <= 0:
        return 0.8 * cval
    ctx = sum(n * ctx_stats.get(w, 0) / n_candidates for w, n in stats.context_counts.items())
    return 0.8 * cval + 0.2 * ctx


def nesting_map(candidates):
    """Map each candidate to the candidates that properly contain it."""
    out = {c.normalized: [] for c in candidates}
    seqs = [(c.normalized, c.words) for c in candidates]
    for inner, iw in seqs:
        n = len(iw)
        for outer, ow in seqs:
            if len(ow) <= n:
                continue
            if any(ow[i:i + n] == iw for i in range(len(ow) - n + 1)):
                out[inner].append(outer)
    return {k: sorted(v) for k, v in out.items()}


@dataclass
class TermInputs:
    stats: dict
    word_stats: dict
    totals: Totals
    nesting: dict
    ctx_stats: dict
    alpha: float = 0.5
    beta: float = 0.25

    @property
    def n_candidates(self):
        return len(self.stats)


def prepare_inputs(candidates, domain_index, contrastive_index, frames, alpha=0.5, beta=0.25):
    records = list(_as_records(frames))
    by_term = {}
    for rec in records:
        by_term.setdefault(rec.arg1, []).append(rec)
        if rec.arg2 != rec.arg1:
            by_term.setdefault(rec.arg2, []).append(rec)
    stats = {}
    for c in candidates:
        ctx = context_counts(c, by_term.get(c.normalized, ()))
        stats[c.normalized] = compute_stats(c, domain_index, contrastive_index, contexts=ctx)
    words = set()
    for c in candidates:
        words.update(c.modifiers)
        words.add(c.head)
        words.update(stats[c.normalized].context_words)
    word_stats = {w: (word_frequency(domain_index, w), word_frequency(contrastive_index, w))
                  for w in sorted(words)}
    totals = Totals(
        F_d=sum(s.f_d for s in stats.values()),
        F_dbar=sum(s.f_dbar for s in stats.values()),
        W_d=max(domain_index.total_tokens, max((f for f, _ in word_stats.values()), default=0)),
        W_dbar=max(contrastive_index.total_tokens, max((f for _, f in word_stats.values()), default=0)),
    )
    ctx_sets = {}
    for term, s in stats.items():
        for w in s.context_words:
            ctx_sets.setdefault(w, set()).add(term)
    ctx_stats = {w: len(ts) for w, ts in sorted(ctx_sets.items())}
    return TermInputs(stats, word_stats, totals, nesting_map(candidates), ctx_stats, alpha, beta)


def score(c, measure, inputs):
    s = inputs.stats[c.normalized]
    if measure == "th":
        return score_th(c, s, inputs.word_stats, inputs.alpha, inputs.beta)
    if measure == "ot":
        return score_ot(c, s, inputs.word_stats, inputs.totals)
    if measure == "cw":
        return score_cw(c, s, inputs.word_stats, inputs.totals)
    if measure == "ncv":
        containers = [inputs.stats[b].f_d for b in inputs.nesting.get(c.normalized, ())]
        return score_ncv(c, s, containers, inputs.ctx_stats, inputs.n_candidates)
    raise UsageError(f"unknown measure {measure!r}; expected one of {', '.join(MEASURES)}")


def rank_terms(candidates, measure, inputs):
    measure = measure.lower()
    if measure not in MEASURES:
        raise UsageError(f"unknown measure {measure!r}; expected one of {', '.join(MEASURES)}")
    entries = []
    for c in set(candidates):
        s = inputs.stats[c.normalized]
        entries.append(RankedEntry(c, score(c, measure, inputs), s.f_d, s.f_dbar))
    entries.sort(key=lambda e: (-e.score, e.term, e.candidate.head_pos))
    return RankedTermList(measure, tuple(entries))


def select_top_n(ranked, n):
    if n is None or n <= 0:
        raise UsageError("n must be >= 1")
    return [e.candidate for e in ranked.entries[:n]]


def format_score(x):
    return f"{x:.12g}"


def ranked_to_tsv(ranked):
    lines = [f"{i}\t{e.term}\t{format_score(e.score)}\t{e.f_d}\t{e.f_dbar}"
             for i, e in enumerate(ranked.entries, 1)]
    return "".join(line + "\n" for line in lines)


def read_ranked_tsv(text, measure):
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ValueError(f"ranked list line {lineno}: expected 5 columns")
        _, term, sc, fd, fdbar = parts
        entries.append(RankedEntry(TermCandidate(term), float(sc), int(fd), int(fdbar)))
    return RankedTermList(measure, tuple(entries))


class TermRecognizer(BaseEstimator, TransformerMixin):
    """Rank frame arguments by termhood and keep the top ``top_n``.

    Parameters
    ----------
    domain_index, contrastive_index : FrequencyIndex
    measure : {"th", "ot", "cw", "ncv"}
    top_n : int or None
        ``transform`` returns every ranked term when None.
    alpha, beta : float
        Modifier and context weights of TH.
    """

    def __init__(self, domain_index=None, contrastive_index=None, measure="th", top_n=None,
                 alpha=0.5, beta=0.25):
        self.domain_index = domain_index
        self.contrastive_index = contrastive_index
        self.measure = measure
        self.top_n = top_n
        self.alpha = alpha
        self.beta = beta

    def fit(self, frames, y=None):
        if self.domain_index is None or self.contrastive_index is None:
            raise UsageError("both domain_index and contrastive_index are required")
        if self.measure not in MEASURES:
            raise UsageError(f"unknown measure {self.measure!r}")
        if self.top_n is not None and self.top_n <= 0:
            raise UsageError("top_n must be >= 1")
        frames = list(frames)
        self.candidates_ = collect_candidates(frames)
        self.inputs_ = prepare_inputs(self.candidates_, self.domain_index, self.contrastive_index,
                                      frames, self.alpha, self.beta)
        self.ranking_ = rank_terms(self.candidates_, self.measure, self.inputs_)
        return self

    def rank(self, measure):
        if not hasattr(self, "inputs_"):
            raise NotFittedError("TermRecognizer is not fitted yet")
        return rank_terms(self.candidates_, measure, self.inputs_)

    def transform(self, frames=None):
        if not hasattr(self, "ranking_"):
            raise NotFittedError("TermRecognizer is not fitted yet")
        n = self.top_n or len(self.ranking_)
        return [c.normalized for c in select_top_n(self.ranking_, n)] if len(self.ranking_) else []
