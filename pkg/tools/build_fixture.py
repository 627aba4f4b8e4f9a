"""Regenerate the bundled mini-corpus under tests/fixtures/minicorpus.

Domain documents are CoNLL-U parses built from sentence templates, so the
dependency structure is known exactly. Contrastive documents are plain
news-style text. Output is fully determined by SEED.

    python tools/build_fixture.py [target_dir]
"""
import json
import random
import shutil
import sys
from pathlib import Path

SEED = 20081
ROOT = Path(__file__).resolve().parents[1]
EXAMPLE_SENTENCE = ROOT / "tests" / "fixtures" / "example_sentence.conllu"

ADJECTIVES = {"hazardous", "new", "several", "human", "minimal", "top", "what-if", "chemical",
              "critical", "initiating", "preliminary", "safe", "large", "main", "small"}
JOINERS = {"and", "of"}

FAMILIES = {
    "quantitative": ["fta", "eta", "fmea", "hra"],
    "qualitative": ["hazop", "whatif", "checklists", "pha"],
}

CONCEPTS = {
    "hazop": dict(label="hazard and operability study", synonyms=["hazop"],
                  seeds=["Hazard and Operability Study", "guide word", "design intent"],
                  kind="technique"),
    "fmea": dict(label="failure modes and effects analysis", synonyms=["fmea"],
                 seeds=["failure modes and effects analysis", "failure mode", "component failure"],
                 kind="method"),
    "fta": dict(label="fault tree analysis", synonyms=["fta"],
                seeds=["fault tree", "top event", "minimal cut set"], kind="model"),
    "eta": dict(label="event tree analysis", synonyms=["eta"],
                seeds=["event tree", "initiating event", "accident sequence"], kind="model"),
    "checklists": dict(label="checklists", synonyms=["checklist"],
                       seeds=["checklist", "fire protection", "pressure system design"],
                       kind="record"),
    "hra": dict(label="human reliability analysis", synonyms=["hra"],
                seeds=["human error", "human error rate prediction", "error probability"],
                kind="measure"),
    "whatif": dict(label="what-if analysis", synonyms=[],
                   seeds=["what-if question", "brainstorming session", "process deviation"],
                   kind="technique"),
    "pha": dict(label="process hazards analysis", synonyms=["pha", "process hazard analysis"],
                seeds=["Process Hazards Analysis", "hazardous chemicals", "new process"],
                kind="method"),
    "indices": dict(label="hazard indices", synonyms=["hazard index"],
                    seeds=["fire and explosion index", "chemical exposure index", "mortality index"],
                    kind="measure", rare=True),
    "audits": dict(label="safety audits", synonyms=["safety audit"],
                   seeds=["safety audit", "audit protocol", "compliance check"],
                   kind="record", rare=True),
}

SUBJECTS = ["the team", "the engineers", "the analyst", "the operators", "the consultants"]
VERBS = [("identified", "identify"), ("reviewed", "review"), ("applied", "apply"),
         ("examined", "examine"), ("documented", "document"), ("assessed", "assess"),
         ("used", "use"), ("updated", "update")]
PLACES = ["the plant", "the reactor", "the facility", "the storage area", "the pipeline"]
PREPS = ["through", "for", "during", "at"]
INTRANSITIVE = [("met", "meet"), ("continued", "continue"), ("agreed", "agree")]


class Sentence:
    def __init__(self):
        self.rows = []

    def add(self, form, lemma, upos, head=0, rel="dep"):
        self.rows.append([len(self.rows) + 1, form, lemma, upos, head, rel])
        return len(self.rows)

    def set(self, idx, head, rel):
        self.rows[idx - 1][4] = head
        self.rows[idx - 1][5] = rel

    def np(self, phrase, det=None):
        """Add a noun phrase; returns the index of its head token."""
        words = phrase.split()
        segments, joins = [[]], []
        for w in words:
            if w.lower() in JOINERS and segments[-1]:
                joins.append(w)
                segments.append([])
            else:
                segments[-1].append(w)
        det_idx = self.add(det, det.lower(), "DET") if det else None
        seg_heads, join_idx = [], []
        for k, seg in enumerate(segments):
            idxs = []
            for w in seg:
                if w.lower() in ADJECTIVES and w is not seg[-1]:
                    upos = "ADJ"
                else:
                    upos = "PROPN" if w[0].isupper() else "NOUN"
                lemma = w if upos == "PROPN" else _lemma(w) if w is seg[-1] else w.lower()
                idxs.append((self.add(w, lemma, upos), upos))
            head = idxs[-1][0]
            for i, upos in idxs[:-1]:
                self.set(i, head, "amod" if upos == "ADJ" else "compound")
            seg_heads.append(head)
            if k < len(joins):
                join_idx.append(self.add(joins[k], joins[k].lower(),
                                         "CCONJ" if joins[k].lower() == "and" else "ADP"))
        if joins and joins[0].lower() == "of":
            np_head = seg_heads[0]
            for h, j in zip(seg_heads[1:], join_idx):
                self.set(h, np_head, "nmod")
                self.set(j, h, "case")
        else:
            np_head = seg_heads[-1]
            for h, j, nxt in zip(seg_heads[:-1], join_idx, seg_heads[1:]):
                self.set(h, np_head, "compound")
                self.set(j, nxt, "cc")
        if det_idx:
            self.set(det_idx, np_head, "det")
        return np_head

    def np_spec(self, spec):
        det, phrase = _split_det(spec)
        return self.np(phrase, det)

    def render(self, sent_id):
        forms = [r[1] for r in self.rows]
        forms[0] = forms[0][0].upper() + forms[0][1:]
        self.rows[0][1] = forms[0]
        text = " ".join(forms).replace(" .", ".")
        lines = [f"# sent_id = {sent_id}", f"# text = {text}"]
        for idx, form, lemma, upos, head, rel in self.rows:
            if head == 0:
                rel = "root"
            lines.append("\t".join(map(str, [idx, form, lemma, upos, "_", "_", head, rel, "_", "_"])))
        return "\n".join(lines) + "\n"


def _lemma(w):
    w = w.lower()
    if w.endswith("ies"):
        return w[:-3] + "y"
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("s") and not w.endswith(("ss", "is", "us")):
        return w[:-1]
    return w


def _split_det(spec):
    first, _, rest = spec.partition(" ")
    if first.lower() in ("the", "a", "an") and rest:
        return first, rest
    return None, spec


def with_det(rng, phrase):
    if _split_det(phrase)[0]:
        return phrase
    if phrase[0].isupper():
        return "the " + phrase if rng.random() < 0.5 else phrase
    if phrase.endswith("s") and not phrase.endswith(("ss", "is")):
        return phrase if rng.random() < 0.5 else "the " + phrase
    return rng.choice(["the ", "a ", "the "]) + phrase


def s_transitive(subj, verb, obj):
    s = Sentence()
    sh = s.np_spec(subj)
    v = s.add(verb[0], verb[1], "VERB")
    oh = s.np_spec(obj)
    p = s.add(".", ".", "PUNCT")
    s.set(sh, v, "nsubj")
    s.set(oh, v, "obj")
    s.set(p, v, "punct")
    return s


def s_oblique(subj, verb, obj, prep, pobj):
    s = Sentence()
    sh = s.np_spec(subj)
    v = s.add(verb[0], verb[1], "VERB")
    oh = s.np_spec(obj)
    c = s.add(prep, prep, "ADP")
    ph = s.np_spec(pobj)
    p = s.add(".", ".", "PUNCT")
    s.set(sh, v, "nsubj")
    s.set(oh, v, "obj")
    s.set(c, ph, "case")
    s.set(ph, v, "obl")
    s.set(p, v, "punct")
    return s


def s_nominal_pp(subj, verb, obj, prep, nobj):
    s = Sentence()
    sh = s.np_spec(subj)
    v = s.add(verb[0], verb[1], "VERB")
    oh = s.np_spec(obj)
    c = s.add(prep, prep, "ADP")
    nh = s.np_spec(nobj)
    p = s.add(".", ".", "PUNCT")
    s.set(sh, v, "nsubj")
    s.set(oh, v, "obj")
    s.set(c, nh, "case")
    s.set(nh, oh, "nmod")
    s.set(p, v, "punct")
    return s


def s_copula(np1, np2):
    s = Sentence()
    h1 = s.np_spec(np1)
    cop = s.add("is", "be", "AUX")
    h2 = s.np_spec(np2)
    p = s.add(".", ".", "PUNCT")
    s.set(h1, h2, "nsubj")
    s.set(cop, h2, "cop")
    s.set(p, h2, "punct")
    return s


def s_intransitive(subj, verb):
    s = Sentence()
    sh = s.np_spec(subj)
    v = s.add(verb[0], verb[1], "VERB")
    p = s.add(".", ".", "PUNCT")
    s.set(sh, v, "nsubj")
    s.set(p, v, "punct")
    return s


def seed_sentence(rng, seed, partner):
    subj = rng.choice(SUBJECTS)
    verb = rng.choice(VERBS)
    form = rng.random()
    if form < 0.35:
        return s_transitive(subj, verb, with_det(rng, seed))
    if form < 0.6:
        return s_oblique(subj, verb, with_det(rng, seed), rng.choice(PREPS), with_det(rng, partner))
    if form < 0.85:
        return s_nominal_pp(subj, verb, with_det(rng, seed), "of", with_det(rng, partner))
    return s_copula(with_det(rng, seed), "a " + rng.choice(["useful", "main", "critical"]) + " "
                    + rng.choice(["tool", "input", "element"]))


def generic_sentence(rng):
    subj = rng.choice(SUBJECTS)
    form = rng.random()
    if form < 0.3:
        return s_oblique(subj, rng.choice(VERBS), rng.choice(["a hazard", "the hazard", "the risk"]),
                         "in", rng.choice(PLACES))
    if form < 0.55:
        return s_transitive(subj, rng.choice(VERBS), rng.choice(["the hazards", "a risk", "the risks"]))
    if form < 0.7:
        return s_intransitive(subj, rng.choice(INTRANSITIVE))
    if form < 0.85:
        return s_oblique(subj, rng.choice(VERBS), "hazard and risk", "at", rng.choice(PLACES))
    return s_transitive(subj, rng.choice(VERBS), rng.choice(["the report", "the plant", "the operators"]))


def concept_document(rng, key, sibling):
    info = CONCEPTS[key]
    seeds = info["seeds"]
    sents = []
    for seed in seeds:
        for _ in range(2):
            partner = rng.choice([x for x in seeds if x != seed] + PLACES)
            sents.append(seed_sentence(rng, seed, partner))
    sib = CONCEPTS[sibling]["seeds"]
    sents.append(seed_sentence(rng, rng.choice(sib), rng.choice(PLACES)))
    if key == "hazop":
        sents.append(s_nominal_pp(rng.choice(SUBJECTS), ("conducted", "conduct"),
                                  "a Hazard and Operability Study", "of", rng.choice(PLACES)))
    if key == "pha":
        sents.append(s_transitive(rng.choice(SUBJECTS), rng.choice(VERBS), "several hazardous chemicals"))
    for _ in range(rng.randint(2, 3)):
        sents.append(generic_sentence(rng))
    rng.shuffle(sents)
    return sents


def rare_document(rng, key):
    seeds = CONCEPTS[key]["seeds"]
    return [s_transitive(rng.choice(SUBJECTS), rng.choice(VERBS), with_det(rng, seed)) for seed in seeds] + [
        generic_sentence(rng)]


NEWS = [
    "The team won the match on {day} after a late goal.",
    "The team said the new coach would arrive next week.",
    "The company reported a strong quarter and raised its forecast.",
    "Analysts said the risk of a slowdown remained high.",
    "The market index rose sharply after the report.",
    "The team captain praised the fans after the event.",
    "Officials opened a review of the new process for permits.",
    "The design of the new stadium drew criticism from residents.",
    "A power plant near the city will close next year.",
    "The company blamed a software error for the outage.",
    "Investors asked a question about the session on {day}.",
    "The team plans to improve the system before the season.",
    "Consumer protection groups welcomed the decision.",
    "The study found that the risk of injury fell last year.",
    "A fire destroyed a warehouse on {day}, officials said.",
    "The review team will publish its analysis next month.",
    "The event attracted a large crowd despite the rain.",
    "A small hazard on the road delayed traffic for hours.",
    "The company hired a new team to manage the plant.",
    "The report described the new process as a major change.",
    "The team lost the final on {day} in front of a home crowd.",
    "Researchers said the analysis of the data took two years.",
    "The team manager declined to comment on the report.",
    "Engineers at the plant walked out over pay on {day}.",
    "The engineers said the new bridge design was a useful tool for the city.",
    "Operators of the pipeline said the storage area was full.",
    "The operators of the airline cut fares for the team.",
    "Consultants said the facility would reopen after the review.",
    "The consultants advised the company to sell the facility.",
    "A reactor at the power plant was shut down on {day}.",
    "The analyst said the company was a main element of the index.",
    "Each analyst expects the plant to reopen within weeks.",
    "The storage area at the port was flooded by the storm.",
    "Operators said a key input for the pipeline was delayed.",
    "The engineers and operators met the team at the facility.",
    "The analysts said the risks to the company were rising.",
]
DAYS = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]


def news_document(rng):
    n = rng.randint(5, 8)
    return " ".join(rng.choice(NEWS).format(day=rng.choice(DAYS)) for _ in range(n)) + "\n"


NOISY = [
    "teh team reviewed the fault tree at the plant. The engineers found a hazzard in the reactor. "
    "The PHA covered the new process.\n",
    "The analyst documented the HAZARD in the storage area. The operators updated teh checklist. "
    "The team used the event tree for the reactor.\n",
    "The consultants examined the risk in the pipeline. The team identified a hazzard in the plant.\n"
    "\nThe engineers applied the checklist at the facility.\n",
    "The operators reviewed the risks. The analyst assessed the human error in teh plant.\n",
]

ABBREVIATIONS = """# abbreviation<TAB>expansion<TAB>weight
pha\tprocess hazards analysis\t0.9
hazop\thazard and operability study\t0.9
fmea\tfailure modes and effects analysis\t0.9
fta\tfault tree analysis\t0.8
hra\thuman reliability analysis\t0.8
eta\tevent tree analysis\t0.7
"""


def build(target):
    rng = random.Random(SEED)
    if target.exists():
        shutil.rmtree(target)
    dom = target / "domain"
    con = target / "contrastive"
    dom.mkdir(parents=True)
    con.mkdir(parents=True)

    family_of = {k: fam for fam, ks in FAMILIES.items() for k in ks}
    n = 0
    for key in sorted(family_of):
        sibs = [k for k in FAMILIES[family_of[key]] if k != key]
        for i in range(6):
            sents = concept_document(rng, key, sibs[i % len(sibs)])
            body = "".join(s.render(f"{key}-{i}-{j}") + "\n" for j, s in enumerate(sents, 1))
            (dom / f"{key}_{i:02d}.conllu").write_text(f"# newdoc id = {key}_{i:02d}\n" + body)
            n += 1
    for key in ("indices", "audits"):
        sents = rare_document(rng, key)
        body = "".join(s.render(f"{key}-0-{j}") + "\n" for j, s in enumerate(sents, 1))
        (dom / f"{key}_00.conllu").write_text(body)
        n += 1
    shutil.copy(EXAMPLE_SENTENCE, dom / "example_sentence.conllu")
    for i, text in enumerate(NOISY):
        (dom / f"notes_{i:02d}.txt").write_text(text)
    for i in range(220):
        (con / f"news_{i:03d}.txt").write_text(news_document(rng))

    bench = {"concepts": [], "excluded": []}
    for key in sorted(CONCEPTS):
        info = CONCEPTS[key]
        bench["concepts"].append({"id": key, "label": info["label"], "synonyms": info["synonyms"],
                                  "seed_terms": [s.lower() for s in info["seeds"]]})
    bench["excluded"].append({"id": "pilot_plants", "reason": "no related terms in the fixture corpus"})
    (target / "benchmark.json").write_text(json.dumps(bench, indent=2) + "\n")
    (target / "abbreviations.tsv").write_text(ABBREVIATIONS)
    config = {
        "domain_dir": "domain",
        "contrastive_dir": "contrastive",
        "abbrev_path": "abbreviations.tsv",
        "benchmark_path": "benchmark.json",
        "window": 5,
        "sample_frames": None,
        "top_n": 36,
        "measure": "th",
        "cluster": {"max_leaf": 4, "theta_split": 0.35, "theta_out": 0.95, "passes": 3},
        "seed": 7,
        "clean": False,
        "out_dir": "out",
    }
    (target / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    print(f"wrote {n + 1 + len(NOISY)} domain and 220 contrastive documents to {target}")


if __name__ == "__main__":
    build(Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "tests" / "fixtures" / "minicorpus")
