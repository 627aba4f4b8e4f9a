"""Command line pipeline: one subcommand per phase plus ``run-all``.

Phases communicate only through files under ``out_dir`` so each stage can be
rerun and inspected on its own.
"""

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import __version__
from .cleaning import CleaningReport, TextCleaner, load_abbreviations
from .cluster import ClusterNode, DistanceMatrix, SnapshotProvider, build_distance_matrix, tta_cluster
from .corpus import (PLAIN, Document, build_frequency_index, ingest_directory, load_hit_count_snapshot,
                     snapshot_from_index)
from .evaluation import evaluate_ontology, frequency_distribution_report, load_benchmark
from .exceptions import ConfigError, DependencyError, OntoforgeError
from .frames import FrameExtractor, frames_to_jsonl, read_frames_jsonl, sample_frames
from .ontology import assemble_ontology, export_dot, export_json, export_turtle, import_json
from .termhood import MEASURES, TermRecognizer, ranked_to_tsv, read_ranked_tsv

log = logging.getLogger("ontoforge")

ENV_OUT = "ONTOFORGE_OUT"
PHASES = ("ingest", "clean", "frames", "terms", "cluster", "ontology", "eval")

DOMAIN_DOCS = "domain_docs.jsonl"
CONTRASTIVE_DOCS = "contrastive_docs.jsonl"
CLEAN_DOCS = "domain_docs.clean.jsonl"
CLEAN_REPORT = "cleaning_report.jsonl"
FRAMES = "frames.jsonl"
TOP_TERMS = "top_terms.txt"
DISTANCES = "distances.tsv"
TREE = "cluster_tree.json"
ONTOLOGY_JSON = "ontology.json"
EVAL_REPORT = "eval_report.json"
FREQ_REPORT = "freq_distribution.csv"
MANIFEST = "manifest.json"

_CLUSTER_DEFAULTS = {"max_leaf": 4, "theta_split": 0.35, "theta_out": 0.75, "passes": 3}


def terms_file(measure):
    return f"terms_{measure}.tsv"


@dataclass
class PipelineConfig:
    domain_dir: str
    contrastive_dir: str
    abbrev_path: str | None = None
    snapshot_path: str | None = None
    benchmark_path: str | None = None
    window: int = 5
    sample_frames: int | None = None
    top_n: int = 50
    measure: str = "th"
    cluster: dict = field(default_factory=lambda: dict(_CLUSTER_DEFAULTS))
    seed: int = 0
    out_dir: str = "out"
    clean: bool = False
    tau: float = 0.5

    @classmethod
    def from_dict(cls, obj, base_dir="."):
        """Build and validate a config; relative paths resolve against *base_dir*."""
        if not isinstance(obj, dict):
            raise ConfigError(["config must be a JSON object"])
        known = {f.name for f in fields(cls)}
        problems = [f"unknown key {k!r}" for k in sorted(set(obj) - known)]
        problems += [f"{k}: required" for k in ("domain_dir", "contrastive_dir") if k not in obj]
        if problems:
            raise ConfigError(problems)
        obj = dict(obj)
        cluster = dict(_CLUSTER_DEFAULTS)
        if isinstance(obj.get("cluster"), dict):
            unknown = sorted(set(obj["cluster"]) - set(cluster))
            if unknown:
                raise ConfigError([f"cluster.{k}: unknown key" for k in unknown])
            cluster.update(obj["cluster"])
            obj["cluster"] = cluster
        base = Path(base_dir)
        for key in ("domain_dir", "contrastive_dir", "abbrev_path", "snapshot_path",
                    "benchmark_path", "out_dir"):
            if isinstance(obj.get(key), str):
                obj[key] = str((base / obj[key]).resolve())
        cfg = cls(**obj)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError([f"cannot read config {path}: {exc.strerror}"]) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
        return cls.from_dict(obj, path.parent)

    def validate(self):
        p = []

        def is_int(v):
            return isinstance(v, int) and not isinstance(v, bool)

        def is_num(v):
            return isinstance(v, (int, float)) and not isinstance(v, bool)

        for key in ("domain_dir", "contrastive_dir"):
            v = getattr(self, key)
            if not isinstance(v, str) or not Path(v).is_dir():
                p.append(f"{key}: directory not found ({v!r})")
        for key in ("abbrev_path", "snapshot_path", "benchmark_path"):
            v = getattr(self, key)
            if v is not None and (not isinstance(v, str) or not Path(v).is_file()):
                p.append(f"{key}: file not found ({v!r})")
        if not is_int(self.window) or self.window < 1:
            p.append("window: must be an integer >= 1")
        if self.sample_frames is not None and (not is_int(self.sample_frames) or self.sample_frames < 1):
            p.append("sample_frames: must be null or an integer >= 1")
        if not is_int(self.top_n) or self.top_n < 1:
            p.append("top_n: must be an integer >= 1")
        if self.measure not in MEASURES:
            p.append(f"measure: must be one of {', '.join(MEASURES)}")
        if not is_int(self.seed):
            p.append("seed: must be an integer")
        if not isinstance(self.out_dir, str) or not self.out_dir:
            p.append("out_dir: must be a non-empty path")
        if not isinstance(self.clean, bool):
            p.append("clean: must be true or false")
        if not is_num(self.tau) or not 0 < self.tau <= 1:
            p.append("tau: must be in (0, 1]")
        c = self.cluster
        if not isinstance(c, dict):
            p.append("cluster: must be an object")
        else:
            if not is_int(c.get("max_leaf")) or c["max_leaf"] < 1:
                p.append("cluster.max_leaf: must be an integer >= 1")
            if not is_int(c.get("passes")) or c["passes"] < 0:
                p.append("cluster.passes: must be an integer >= 0")
            for key in ("theta_split", "theta_out"):
                v = c.get(key)
                if not is_num(v) or not 0 <= v <= 1:
                    p.append(f"cluster.{key}: must be in [0, 1]")
        if p:
            raise ConfigError(p)
        return self

    def to_dict(self):
        return asdict(self)


@dataclass
class RunManifest:
    config: dict
    tool_version: str = __version__
    phases: dict = field(default_factory=dict)

    @classmethod
    def load_or_new(cls, out_dir, config):
        path = Path(out_dir) / MANIFEST
        phases = {}
        if path.is_file():
            try:
                phases = json.loads(path.read_text(encoding="utf-8")).get("phases", {})
            except (json.JSONDecodeError, AttributeError):
                phases = {}
        return cls(config.to_dict(), __version__, phases)

    def record(self, phase, status, inputs, outputs, seconds):
        self.phases[phase] = {"status": status, "inputs": inputs, "outputs": outputs,
                              "seconds": round(seconds, 6)}

    def to_json(self):
        obj = {"tool_version": self.tool_version, "config": self.config, "phases": self.phases}
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"

    def write(self, out_dir):
        (Path(out_dir) / MANIFEST).write_text(self.to_json(), encoding="utf-8")


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


class _Phase:
    """Bookkeeping for one phase: required inputs, written outputs, timing."""

    def __init__(self, config, name):
        self.config = config
        self.name = name
        self.out = Path(config.out_dir)
        self.inputs = {}
        self.outputs = {}
        self.t0 = time.perf_counter()

    def need(self, name):
        path = self.out / name
        if not path.is_file():
            raise DependencyError(name)
        self.inputs[name] = sha256_file(path)
        return path

    def need_external(self, path):
        self.inputs[str(path)] = sha256_file(path)
        return Path(path)

    def write(self, name, text):
        path = self.out / name
        path.write_text(text, encoding="utf-8")
        self.outputs[name] = sha256_file(path)
        return path

    def finish(self, status="ok"):
        manifest = RunManifest.load_or_new(self.out, self.config)
        manifest.record(self.name, status, self.inputs, self.outputs, time.perf_counter() - self.t0)
        manifest.write(self.out)
        return status


def _docs_to_jsonl(docs):
    return "".join(json.dumps(d.to_dict(), sort_keys=True, ensure_ascii=False) + "\n" for d in docs)


def _read_docs(path):
    docs = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if line.strip():
            try:
                docs.append(Document.from_dict(json.loads(line)))
            except (KeyError, ValueError, TypeError) as exc:
                raise OntoforgeError(f"{path.name} line {lineno}: {exc}") from exc
    return docs


def _domain_docs(ph):
    return _read_docs(ph.need(CLEAN_DOCS if ph.config.clean else DOMAIN_DOCS))


def cmd_ingest(config):
    ph = _Phase(config, "ingest")
    dom = ingest_directory(config.domain_dir, "domain")
    con = ingest_directory(config.contrastive_dir, "contrastive")
    ph.write(DOMAIN_DOCS, _docs_to_jsonl(dom))
    ph.write(CONTRASTIVE_DOCS, _docs_to_jsonl(con))
    print(f"ingest: {len(dom)} domain, {len(con)} contrastive documents "
          f"({dom.skipped_count + con.skipped_count} skipped)")
    return ph.finish()


def cmd_clean(config):
    ph = _Phase(config, "clean")
    docs = _read_docs(ph.need(DOMAIN_DOCS))
    if not config.clean:
        print("clean: skipped (disabled in config)")
        return ph.finish("skipped")
    abbrevs = load_abbreviations(ph.need_external(config.abbrev_path)) if config.abbrev_path else None
    # Parsed documents come from edited sources and bypass cleaning, so they
    # are the reference the lexicon and casing statistics are learned from.
    reference = [d for d in docs if d.source_kind != PLAIN] or docs
    cleaner = TextCleaner(abbreviations=abbrevs).fit(reference)
    cleaned = cleaner.transform(docs)
    report = getattr(cleaner, "report_", CleaningReport())
    ph.write(CLEAN_DOCS, _docs_to_jsonl(cleaned))
    ph.write(CLEAN_REPORT, report.to_jsonl())
    print(f"clean: {len(report.replacements)} replacements, {len(report.unresolved)} unresolved")
    return ph.finish()


def cmd_frames(config):
    ph = _Phase(config, "frames")
    docs = _domain_docs(ph)
    index = build_frequency_index(docs, window=config.window)
    frames = FrameExtractor(index=index, window=config.window).fit(docs).transform(docs)
    total = len(frames)
    frames = sample_frames(frames, config.sample_frames, config.seed)
    ph.write(FRAMES, frames_to_jsonl(frames))
    print(f"frames: {len(frames)} of {total} frames written")
    return ph.finish()


def cmd_terms(config):
    ph = _Phase(config, "terms")
    frames = read_frames_jsonl(ph.need(FRAMES).read_text(encoding="utf-8"))
    docs = _domain_docs(ph)
    contrastive = _read_docs(ph.need(CONTRASTIVE_DOCS))
    di = build_frequency_index(docs, window=config.window)
    ci = build_frequency_index(contrastive, window=config.window)
    rec = TermRecognizer(di, ci, measure=config.measure, top_n=config.top_n).fit(frames)
    for m in MEASURES:
        ph.write(terms_file(m), ranked_to_tsv(rec.rank(m)))
    top = rec.transform(frames)
    ph.write(TOP_TERMS, "".join(t + "\n" for t in top))
    print(f"terms: {len(rec.candidates_)} candidates, top {len(top)} by {config.measure}")
    return ph.finish()


def cmd_cluster(config):
    ph = _Phase(config, "cluster")
    terms = [t for t in ph.need(TOP_TERMS).read_text(encoding="utf-8").splitlines() if t]
    if config.snapshot_path:
        snapshot = load_hit_count_snapshot(ph.need_external(config.snapshot_path))
    else:
        snapshot = snapshot_from_index(build_frequency_index(_domain_docs(ph), config.window), terms)
    matrix = build_distance_matrix(terms, SnapshotProvider(snapshot))
    ph.write(DISTANCES, matrix.to_tsv())
    c = config.cluster
    tree = tta_cluster(matrix, c["max_leaf"], c["theta_split"], c["theta_out"], c["passes"],
                       config.seed)
    ph.write(TREE, tree.to_json())
    leaves = sum(1 for n in tree.walk() if n.kind == "leaf")
    print(f"cluster: {len(terms)} terms, {leaves} leaf clusters")
    return ph.finish()


def cmd_ontology(config):
    ph = _Phase(config, "ontology")
    tree = ClusterNode.from_dict(json.loads(ph.need(TREE).read_text(encoding="utf-8")))
    g = assemble_ontology(tree)
    ph.write(ONTOLOGY_JSON, export_json(g))
    ph.write("ontology.dot", export_dot(g))
    ph.write("ontology.ttl", export_turtle(g))
    print(f"ontology: {len(g.concepts)} concepts, {len(g.edges)} edges")
    return ph.finish()


def cmd_eval(config):
    ph = _Phase(config, "eval")
    if not config.benchmark_path:
        raise ConfigError(["benchmark_path: required for eval"])
    g = import_json(ph.need(ONTOLOGY_JSON).read_text(encoding="utf-8"))
    ranked = read_ranked_tsv(ph.need(terms_file(config.measure)).read_text(encoding="utf-8"),
                             config.measure)
    benchmark = load_benchmark(ph.need_external(config.benchmark_path))
    report = evaluate_ontology(g, benchmark, config.measure, ranked.terms(), config.top_n,
                               config.tau)
    ph.write(EVAL_REPORT, report.to_json())
    if len(ranked):
        ph.write(FREQ_REPORT, frequency_distribution_report(ranked))
    lo = report.lexical_overlap
    print(f"eval: LO {lo.numerator}/{lo.denominator} = {float(lo):.4f}")
    return ph.finish()


COMMANDS = {"ingest": cmd_ingest, "clean": cmd_clean, "frames": cmd_frames, "terms": cmd_terms,
            "cluster": cmd_cluster, "ontology": cmd_ontology, "eval": cmd_eval}


def cmd_run_all(config):
    for name in PHASES:
        if name == "eval" and not config.benchmark_path:
            print("eval: skipped (no benchmark_path)")
            _Phase(config, "eval").finish("skipped")
            continue
        COMMANDS[name](config)
    return "ok"


def build_parser():
    parser = argparse.ArgumentParser(prog="ontoforge",
                                     description="Build a lightweight domain ontology from text.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="pipeline config JSON")
    common.add_argument("--seed", type=int)
    common.add_argument("--measure", choices=MEASURES)
    common.add_argument("--top-n", type=int, dest="top_n")
    common.add_argument("--sample-frames", type=int, dest="sample_frames")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*PHASES, "run-all"):
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(args, environ=None):
    """Load the config file and apply environment and flag overrides."""
    environ = os.environ if environ is None else environ
    cfg = PipelineConfig.load(args.config)
    if environ.get(ENV_OUT):
        cfg.out_dir = str(Path(environ[ENV_OUT]).resolve())
    for key in ("seed", "measure", "top_n", "sample_frames"):
        value = getattr(args, key)
        if value is not None:
            setattr(cfg, key, value)
    if args.out_dir:
        cfg.out_dir = str(Path(args.out_dir).resolve())
    return cfg.validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        if args.command == "run-all":
            cmd_run_all(cfg)
        else:
            COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DependencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OntoforgeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
