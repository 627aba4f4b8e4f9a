import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ontoforge.corpus import Document, build_frequency_index
from ontoforge.exceptions import ConlluError, UndefinedEvidenceError, UsageError
from ontoforge.frames import (FrameExtractor, FrameRecord, MergeDecision, NounPhrase, ParseToken,
                              chunk_noun_phrases, extract_frames, frames_to_jsonl, load_conllu,
                              normalize_phrase, odds_of_unithood, ou_score, parse_conllu,
                              read_frames_jsonl, sample_frames, uh_score)
from ontoforge.termhood import collect_candidates

from .conftest import EXAMPLE_SENTENCE

EXAMPLE_CANDIDATES = {"team", "several hazardous chemical", "new process", "process hazards analysis"}


def row(i, form, upos, head, rel, lemma=None):
    return "\t".join([str(i), form, lemma or form.lower(), upos, "_", "_", str(head), rel, "_", "_"])


def conllu(*rows):
    return "\n".join(rows) + "\n\n"


COPULA = conllu(row(1, "Risk", "NOUN", 4, "nsubj"), row(2, "is", "AUX", 4, "cop", "be"),
                row(3, "a", "DET", 4, "det"), row(4, "hazard", "NOUN", 0, "root"))
INTRANSITIVE = conllu(row(1, "The", "DET", 2, "det"), row(2, "team", "NOUN", 3, "nsubj"),
                      row(3, "met", "VERB", 0, "root", "meet"))


@pytest.fixture(scope="module")
def example_sentence():
    return parse_conllu(EXAMPLE_SENTENCE.read_text(), "example")[0]


class TestParse:
    def test_three_rows(self):
        sents = parse_conllu(INTRANSITIVE)
        assert len(sents) == 1 and len(sents[0]) == 3
        assert sents[0][1] == ParseToken(2, "team", "team", "NOUN", 3, "nsubj")

    def test_bad_head_reports_line(self):
        text = "# c\n" + row(1, "a", "DET", 0, "root") + "\n" + row(2, "b", "NOUN", "x", "dep") + "\n"
        with pytest.raises(ConlluError) as info:
            parse_conllu(text)
        assert info.value.line == 3

    def test_two_blocks(self):
        assert len(parse_conllu(COPULA + INTRANSITIVE)) == 2

    def test_column_count(self):
        with pytest.raises(ConlluError):
            parse_conllu("1\ta\tb\n")

    def test_ranges_and_empty_nodes_skipped(self):
        text = conllu("1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_", row(1, "do", "AUX", 0, "root"),
                      row(2, "n't", "PART", 1, "advmod"), "1.1\tx\tx\tX\t_\t_\t_\t_\t_\t_")
        assert [t.form for t in parse_conllu(text)[0]] == ["do", "n't"]

    def test_two_roots(self):
        with pytest.raises(ConlluError):
            parse_conllu(conllu(row(1, "a", "NOUN", 0, "root"), row(2, "b", "NOUN", 0, "root")))

    def test_load_requires_conllu(self):
        with pytest.raises(UsageError):
            load_conllu(Document("x", "domain", "text"))


class TestUnithoodScores:
    def test_uh_oracle(self):
        expected = math.log2((10 / 1000) / ((10 / 1000) * (10 / 1000))) + math.log2(11)
        assert uh_score(10, 10, 10, 1000) == pytest.approx(expected)
        assert uh_score(10, 10, 10, 1000) == pytest.approx(10.10, abs=0.01)

    def test_uh_sentinel(self):
        assert uh_score(10, 10, 0, 1000) == -math.inf

    @given(st.integers(1, 50), st.integers(1, 50), st.integers(1, 50))
    def test_uh_monotone_in_joint(self, fa, fb, fab):
        assert uh_score(fa, fb, 2 * fab, 10_000) > uh_score(fa, fb, fab, 10_000)

    def test_ou_always_together(self):
        assert ou_score(10, 10, 10) > 0
        assert ou_score(10, 10, 10) == pytest.approx(2 * math.log(1 / 1e-6), rel=1e-6)

    def test_ou_oracle(self):
        term = math.log(0.01 / (1 - 0.01 + 1e-6))
        assert ou_score(100, 100, 1) == pytest.approx(2 * term)
        assert term == pytest.approx(math.log(0.0101), abs=1e-3)
        assert ou_score(100, 100, 1) < 0

    def test_ou_undefined(self):
        with pytest.raises(UndefinedEvidenceError):
            ou_score(0, 5, 0)

    def test_ou_never_joined(self):
        assert ou_score(5, 5, 0) == -math.inf


def tok(i, form, upos="NOUN", head=0, rel="root"):
    return ParseToken(i, form, form.lower(), upos, head, rel)


class TestNormalize:
    def test_chemicals(self):
        np_ = NounPhrase((tok(1, "several", "ADJ"), tok(2, "hazardous", "ADJ"), tok(3, "chemicals")), 3)
        assert normalize_phrase(np_) == "several hazardous chemical"

    def test_the_team(self):
        assert normalize_phrase(NounPhrase((tok(1, "The", "DET"), tok(2, "team")), 2)) == "team"

    def test_non_head_plural_kept(self):
        np_ = NounPhrase((tok(1, "Process", "PROPN"), tok(2, "Hazards", "PROPN"),
                          tok(3, "Analysis", "PROPN")), 3)
        assert normalize_phrase(np_) == "process hazards analysis"

    def test_string_form(self):
        assert normalize_phrase("The  new processes") == "new process"

    def test_head_must_be_nominal(self):
        with pytest.raises(ValueError):
            NounPhrase((tok(1, "big", "ADJ"),), 1)


class TestChunking:
    def test_example_sentence_chunks(self, example_sentence, domain_index):
        chunks = chunk_noun_phrases(example_sentence, domain_index)
        assert [c.normalized for c in chunks] == ["team", "several hazardous chemical", "new process",
                                                  "process hazards analysis", "pha"]

    def test_no_nouns(self, domain_index):
        sent = parse_conllu(conllu(row(1, "It", "PRON", 2, "nsubj"), row(2, "rained", "VERB", 0, "root")))[0]
        assert chunk_noun_phrases(sent, domain_index) == []

    def test_merge_against_tiny_index(self):
        docs = [Document("d", "domain", "hazard and operability study. " * 3 + "hazard here. study there.")]
        idx = build_frequency_index(docs)
        sent = parse_conllu(conllu(row(1, "hazard", "NOUN", 0, "root"), row(2, "and", "CCONJ", 3, "cc"),
                                   row(3, "operability", "NOUN", 4, "compound"),
                                   row(4, "study", "NOUN", 1, "conj")))[0]
        decisions = []
        chunks = chunk_noun_phrases(sent, idx, decisions=decisions)
        assert [c.text for c in chunks] == ["hazard and operability study"]
        assert decisions[0].merged and decisions[0].joint_count == 3
        # a high enough threshold blocks the join
        assert len(chunk_noun_phrases(sent, idx, threshold=50.0)) == 2

    def test_min_joint_count_guard(self):
        docs = [Document("d", "domain", "fire and explosion")]
        idx = build_frequency_index(docs)
        sent = parse_conllu(conllu(row(1, "fire", "NOUN", 0, "root"), row(2, "and", "CCONJ", 3, "cc"),
                                   row(3, "explosion", "NOUN", 1, "conj")))[0]
        decisions = []
        assert len(chunk_noun_phrases(sent, idx, decisions=decisions)) == 2
        assert decisions[0].ou > 0 and not decisions[0].merged

    def test_odds_uses_sequences(self):
        idx = build_frequency_index([Document("d", "domain", "fault tree. fault tree. tree house.")])
        a = NounPhrase((tok(1, "fault"),), 1)
        b = NounPhrase((tok(3, "tree"),), 3)
        # f(fault)=2, f(tree)=3, f(fault tree)=2
        e1, e2 = 2 / 2, 2 / 3
        expected = math.log(e1 / (1 - e1 + 1e-6)) + math.log(e2 / (1 - e2 + 1e-6))
        assert odds_of_unithood(a, b, idx) == pytest.approx(expected)


class TestFixtureUnithood:
    def test_hazop_is_one_phrase(self, domain_docs, domain_index):
        hits = []
        for d in domain_docs:
            if d.source_kind != "conllu":
                continue
            for s in load_conllu(d):
                for c in chunk_noun_phrases(s, domain_index):
                    if c.normalized.startswith("hazard and"):
                        hits.append(c.normalized)
        assert "hazard and operability study" in hits
        assert "hazard and risk" not in hits

    def test_hazard_and_risk_split(self, domain_docs, domain_index):
        seen = 0
        for d in domain_docs:
            if d.source_kind != "conllu":
                continue
            for s in load_conllu(d):
                forms = [t.form.lower() for t in s]
                for i in range(len(forms) - 2):
                    if forms[i:i + 3] == ["hazard", "and", "risk"]:
                        seen += 1
                        texts = [c.normalized for c in chunk_noun_phrases(s, domain_index)]
                        assert "hazard" in texts and "risk" in texts
        assert seen >= 2


class TestExtraction:
    def test_example_sentence_frames(self, example_sentence, domain_index):
        frames = extract_frames(example_sentence, chunk_noun_phrases(example_sentence, domain_index), ("example", 1))
        got = [(f.arg1.normalized, f.connector, f.arg2.normalized, f.rule_id) for f in frames]
        assert got == [
            ("team", "identify", "several hazardous chemical", "R1"),
            ("team", "identify_through", "process hazards analysis", "R2"),
            ("several hazardous chemical", "identify_through", "process hazards analysis", "R2"),
            ("several hazardous chemical", "in", "new process", "R3"),
        ]
        assert {c.normalized for c in collect_candidates(frames)} == EXAMPLE_CANDIDATES

    def test_copula(self, domain_index):
        sent = parse_conllu(COPULA)[0]
        frames = extract_frames(sent, chunk_noun_phrases(sent, domain_index))
        assert [(f.arg1.normalized, f.connector, f.arg2.normalized) for f in frames] == [("risk", "be", "hazard")]

    def test_intransitive(self, domain_index):
        sent = parse_conllu(INTRANSITIVE)[0]
        assert extract_frames(sent, chunk_noun_phrases(sent, domain_index)) == []

    def test_passive_subject(self, domain_index):
        sent = parse_conllu(conllu(row(1, "Hazards", "NOUN", 3, "nsubj:pass"), row(2, "were", "AUX", 3, "aux:pass"),
                                   row(3, "found", "VERB", 0, "root", "find"), row(4, "in", "ADP", 6, "case"),
                                   row(5, "the", "DET", 6, "det"), row(6, "plant", "NOUN", 3, "obl")))[0]
        frames = extract_frames(sent, chunk_noun_phrases(sent, domain_index))
        assert [(f.arg1.normalized, f.connector, f.arg2.normalized) for f in frames] == [("hazard", "find_in", "plant")]

    def test_non_acronym_apposition(self, domain_index):
        sent = parse_conllu(conllu(row(1, "Smith", "PROPN", 0, "root"), row(2, ",", "PUNCT", 4, "punct"),
                                   row(3, "the", "DET", 4, "det"), row(4, "engineer", "NOUN", 1, "appos")))[0]
        frames = extract_frames(sent, chunk_noun_phrases(sent, domain_index))
        assert [(f.arg1.normalized, f.connector, f.arg2.normalized, f.rule_id) for f in frames] == [
            ("smith", "be", "engineer", "R4")]

    def test_frame_jsonl_round_trip(self, example_sentence, domain_index):
        frames = extract_frames(example_sentence, chunk_noun_phrases(example_sentence, domain_index), ("example", 1))
        records = read_frames_jsonl(frames_to_jsonl(frames))
        assert records == [FrameRecord.from_frame(f) for f in frames]
        assert records[0].arg1_head == 0 and records[1].arg2_head == 2
        assert frames_to_jsonl(records) == frames_to_jsonl(frames)

    def test_bad_jsonl(self):
        with pytest.raises(ValueError):
            read_frames_jsonl('{"arg1": "x"}\n')


class TestExtractor:
    def test_example_sentence_document(self, domain_index):
        doc = Document("example", "domain", EXAMPLE_SENTENCE.read_text(), "conllu")
        frames = FrameExtractor(index=domain_index).fit([doc]).transform([doc])
        assert len(frames) == 4
        assert {c.normalized for c in collect_candidates(frames)} == EXAMPLE_CANDIDATES

    def test_skips_plain(self, domain_index):
        ex = FrameExtractor(index=domain_index).fit([])
        assert ex.transform([Document("p", "domain", "The team met.")]) == []

    def test_get_params(self):
        assert FrameExtractor(ou_threshold=1.5).get_params()["ou_threshold"] == 1.5

    def test_invariants_on_fixture(self, domain_docs, domain_index):
        ex = FrameExtractor(index=domain_index).fit(domain_docs)
        for d in domain_docs:
            if d.source_kind != "conllu":
                continue
            for s in load_conllu(d):
                decisions = []
                chunks = ex.chunk(s, decisions)
                spans = [(c.start, c.end) for c in chunks]
                assert spans == sorted(spans)
                assert all(a[1] < b[0] for a, b in zip(spans, spans[1:]))
                merged = [m for c in chunks for m in c.merges]
                assert all(isinstance(m, MergeDecision) and m.merged and m.ou >= 0 for m in merged)
                assert all(len(c.merges) == c.text.count(" and ") + c.text.count(" of ")
                           for c in chunks if c.merges)
                frames = extract_frames(s, chunks)
                ids = {id(c) for c in chunks}
                assert all(id(f.arg1) in ids and id(f.arg2) in ids for f in frames)
                assert frames == extract_frames(s, ex.chunk(s))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 50))
def test_sampling_deterministic(seed, k):
    items = list(range(80))
    a = sample_frames(items, k, seed)
    assert a == sample_frames(items, k, seed)
    assert len(a) == k and a == sorted(a)
