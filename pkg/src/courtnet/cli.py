"""Command line pipeline driver.

Subcommands cover each stage (synth, ingest, segment, extract, networks,
rank, communities, flowgraph) plus `run`, which executes the whole pipeline
in memory and writes every artifact with a manifest. Stages communicate
through files in the output directory, so they can run in separate
invocations.

Exit codes: 0 success, 1 configuration error, 2 missing or unreadable input.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import corpus as corpus_mod
from . import networks as networks_mod
from . import ranking as ranking_mod
from . import segmenter as segmenter_mod
from .errors import (
    CourtnetError,
    EmptyCorpus,
    EmptyDocument,
    EncodingError,
    InvalidMix,
    InvalidThreshold,
    MissingConclusion,
    OutOfOrderMarkers,
    UnreadableFile,
)
from .extract import (
    ExtractionRecord,
    Outcome,
    classify_outcome,
    extract_articles,
    extract_lawyers,
    read_extracted,
    rejection_rate,
    write_extracted,
)
from .networks import CaseResult, NetworkParams

logger = logging.getLogger(__name__)

_JSON_KW = dict(ensure_ascii=False, sort_keys=True, separators=(",", ":"))


@dataclass
class PipelineConfig:
    input_dir: str | None = None    # directory of .txt/.rtf sources
    corpus_file: str | None = None  # pre-built corpus.jsonl, wins over input_dir
    jurisdiction: str = "generic"   # label stamped on ingested documents
    profile: str = "generic"        # built-in keyword profile name
    profile_file: str | None = None  # JSON profile path, wins over `profile`
    jaro_threshold: float = 0.8     # flow-graph contraction threshold
    a: float = 2.0
    b: float = 1.0
    min_cases: int = 2
    collab_min: int = 2
    k: int = 3
    damping: float = 0.85
    tol: float = 1e-10
    max_iter: int = 10000
    seed: int = 7
    n_docs: int = 100
    mix: dict[str, float] = field(default_factory=lambda: {"douai": 0.5, "agen": 0.5})
    output_dir: str = "out"
    workers: int = 4


def default_config() -> PipelineConfig:
    return PipelineConfig()


def config_to_json(cfg: PipelineConfig) -> str:
    return json.dumps(dataclasses.asdict(cfg), indent=2, sort_keys=True)


def load_config_file(path: str | Path) -> PipelineConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UnreadableFile(f"config file {path}: {exc}") from exc
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return PipelineConfig(**data)


def validate_config(cfg: PipelineConfig) -> None:
    if not cfg.a > 0 or not cfg.b > 0:
        raise ValueError(f"a and b must be positive, got a={cfg.a}, b={cfg.b}")
    if cfg.min_cases < 0 or cfg.collab_min < 0:
        raise ValueError("min_cases and collab_min must be non-negative")
    if cfg.k < 1:
        raise ValueError(f"k must be at least 1, got {cfg.k}")
    if not 0.0 < cfg.damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {cfg.damping}")
    if cfg.tol <= 0:
        raise ValueError(f"tol must be positive, got {cfg.tol}")
    if cfg.max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {cfg.max_iter}")
    if not 0.0 <= cfg.jaro_threshold <= 1.0:
        raise ValueError(f"jaro_threshold must be in [0, 1], got {cfg.jaro_threshold}")
    if cfg.n_docs < 1:
        raise ValueError(f"n_docs must be at least 1, got {cfg.n_docs}")
    if cfg.workers < 1:
        raise ValueError(f"workers must be at least 1, got {cfg.workers}")
    if cfg.profile_file is None and cfg.profile not in segmenter_mod.PROFILES:
        raise ValueError(
            f"unknown profile {cfg.profile!r}; built-ins: {sorted(segmenter_mod.PROFILES)}"
        )


def _resolve_profile(cfg: PipelineConfig) -> segmenter_mod.KeywordProfile:
    if cfg.profile_file:
        return segmenter_mod.load_profile(cfg.profile_file)
    return segmenter_mod.get_profile(cfg.profile)


def _out(cfg: PipelineConfig, name: str) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise UnreadableFile(f"missing input {path}; run the '{producer}' stage first")
    return path


def _load_corpus(cfg: PipelineConfig) -> list[corpus_mod.Document]:
    if cfg.corpus_file:
        path = Path(cfg.corpus_file)
        if not path.exists():
            raise UnreadableFile(f"corpus file not found: {path}")
        docs = corpus_mod.read_corpus(path)
    else:
        path = _require(_out(cfg, "corpus.jsonl"), "ingest or synth")
        docs = corpus_mod.read_corpus(path)
    if not docs:
        raise EmptyCorpus(f"{path}: corpus is empty")
    return docs


# ---------------------------------------------------------------------------
# Stage implementations


def cmd_synth(cfg: PipelineConfig) -> int:
    docs, truth = corpus_mod.generate_synthetic_corpus(
        seed=cfg.seed, n_docs=cfg.n_docs, mix=cfg.mix
    )
    corpus_mod.write_corpus(_out(cfg, "corpus.jsonl"), docs)
    corpus_mod.write_truth(_out(cfg, "truth.jsonl"), truth)
    logger.info("wrote %d synthetic documents", len(docs))
    return 0


def cmd_ingest(cfg: PipelineConfig) -> int:
    if not cfg.input_dir:
        raise ValueError("ingest needs input_dir")
    root = Path(cfg.input_dir)
    if not root.is_dir():
        raise UnreadableFile(f"input directory not found: {root}")
    docs = []
    skipped = 0
    for path in sorted(root.rglob("*")):
        if path.suffix.lower() not in (".txt", ".rtf") or not path.is_file():
            continue
        try:
            docs.append(corpus_mod.ingest(path, cfg.jurisdiction))
        except (EmptyDocument, EncodingError, UnreadableFile) as exc:
            skipped += 1
            logger.warning("skipping %s: %s", path, exc)
    if not docs:
        raise EmptyCorpus(f"no ingestable documents under {root}")
    docs, dropped = corpus_mod.dedupe_documents(docs)
    corpus_mod.write_corpus(_out(cfg, "corpus.jsonl"), docs)
    logger.info(
        "ingested %d documents (%d unreadable skipped, %d duplicates dropped)",
        len(docs), skipped, dropped,
    )
    return 0


def _segment_corpus(cfg, docs):
    """Segment every document; returns ({doc_id: SegmentedJudgment}, failures)."""
    profile = _resolve_profile(cfg)

    def work(doc):
        try:
            return doc.doc_id, segmenter_mod.segment(doc, profile), None
        except (MissingConclusion, OutOfOrderMarkers) as exc:
            return doc.doc_id, None, str(exc)

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        outcomes = list(pool.map(work, docs))
    segmented = {}
    failures = []
    for doc_id, seg, error in outcomes:
        if seg is None:
            failures.append((doc_id, error))
            logger.warning("segmentation failed: %s", error)
        else:
            segmented[doc_id] = seg
    return segmented, failures


def _write_segments(path: Path, segmented: dict[str, segmenter_mod.SegmentedJudgment]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id in sorted(segmented):
            seg = segmented[doc_id]
            fh.write(json.dumps({
                "doc_id": doc_id,
                "segments": [
                    {"name": s.name, "start": s.start, "end": s.end}
                    for s in seg.segments
                ],
            }, **_JSON_KW) + "\n")


def _read_segments(path: Path) -> dict[str, segmenter_mod.SegmentedJudgment]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            data = json.loads(line)
            out[data["doc_id"]] = segmenter_mod.SegmentedJudgment(
                doc_id=data["doc_id"],
                segments=[
                    segmenter_mod.Segment(s["name"], s["start"], s["end"])
                    for s in data["segments"]
                ],
            )
    return out


def cmd_segment(cfg: PipelineConfig) -> int:
    docs = _load_corpus(cfg)
    segmented, failures = _segment_corpus(cfg, docs)
    _write_segments(_out(cfg, "segments.jsonl"), segmented)
    logger.info("segmented %d documents, %d failures", len(segmented), len(failures))
    return 0


def _extract_one(doc, seg) -> ExtractionRecord:
    appellant, appellee = extract_lawyers(seg, doc)
    articles = extract_articles(doc.text)
    outcome, confirm, reverse = classify_outcome(seg.slice(doc.text, "conclusion"))
    return ExtractionRecord(
        doc_id=doc.doc_id,
        appellant_lawyers=tuple(appellant),
        appellee_lawyers=tuple(appellee),
        articles=frozenset(articles),
        outcome=outcome,
        confirm_count=confirm,
        reverse_count=reverse,
    )


def _extract_records(cfg, docs, segmented) -> list[ExtractionRecord]:
    todo = [(doc, segmented[doc.doc_id]) for doc in docs if doc.doc_id in segmented]

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        records = list(pool.map(lambda pair: _extract_one(*pair), todo))
    return sorted(records, key=lambda r: r.doc_id)


def cmd_extract(cfg: PipelineConfig) -> int:
    docs = _load_corpus(cfg)
    segmented = _read_segments(_require(_out(cfg, "segments.jsonl"), "segment"))
    records = _extract_records(cfg, docs, segmented)
    write_extracted(_out(cfg, "extracted.jsonl"), records)
    logger.info("extracted %d records", len(records))
    return 0


def _case_results(records) -> tuple[list[CaseResult], dict[str, str]]:
    """CaseResults for every record with counsel, plus display-name map."""
    results = []
    display: dict[str, str] = {}
    for rec in sorted(records, key=lambda r: r.doc_id):
        for name in rec.appellant_lawyers + rec.appellee_lawyers:
            display.setdefault(name.canonical, name.display)
        if not (rec.appellant_lawyers or rec.appellee_lawyers):
            continue
        results.append(CaseResult(
            doc_id=rec.doc_id,
            appellant_lawyers=tuple(n.canonical for n in rec.appellant_lawyers),
            appellee_lawyers=tuple(n.canonical for n in rec.appellee_lawyers),
            outcome=rec.outcome,
        ))
    return results, display


def _network_params(cfg: PipelineConfig) -> NetworkParams:
    return NetworkParams(
        a=cfg.a, b=cfg.b, min_cases=cfg.min_cases, collab_min=cfg.collab_min
    )


def _build_networks(cfg, records):
    params = _network_params(cfg)
    results, display = _case_results(records)
    determined = [r for r in results if r.outcome is not Outcome.UNDETERMINED]
    opposing = networks_mod.build_opposing_network(determined, params)
    collab = networks_mod.build_collaboration_network(determined, params)
    articles = {rec.doc_id: rec.articles for rec in records}
    outcomes = {rec.doc_id: rec.outcome for rec in records}
    cases = networks_mod.build_case_graph(articles, outcomes, cfg.k)
    return opposing, collab, cases, results, display


def cmd_networks(cfg: PipelineConfig) -> int:
    records = read_extracted(_require(_out(cfg, "extracted.jsonl"), "extract"))
    opposing, collab, cases, _, _ = _build_networks(cfg, records)
    networks_mod.write_opposing_graphml(_out(cfg, "opposing.graphml"), opposing)
    networks_mod.write_opposing_dot(_out(cfg, "opposing.dot"), opposing)
    networks_mod.write_collaboration_graphml(_out(cfg, "collaboration.graphml"), collab)
    networks_mod.write_collaboration_dot(_out(cfg, "collaboration.dot"), collab)
    networks_mod.write_case_graphml(_out(cfg, f"cases_k{cfg.k}.graphml"), cases)
    networks_mod.write_case_dot(_out(cfg, f"cases_k{cfg.k}.dot"), cases)
    logger.info(
        "networks: opposing %d/%d, collaboration %d/%d, cases %d/%d",
        len(opposing.nodes), len(opposing.edges),
        len(collab.nodes), len(collab.edges),
        len(cases.nodes), len(cases.edges),
    )
    return 0


def _write_rankings(cfg, records, opposing, display) -> list:
    results, _ = _case_results(records)
    if opposing.nodes:
        rows = ranking_mod.rank_table(
            results, opposing,
            damping=cfg.damping, tol=cfg.tol, max_iter=cfg.max_iter,
            display=display,
        )
    else:
        rows = []
    ranking_mod.write_rankings_csv(_out(cfg, "rankings.csv"), rows)
    return rows


def cmd_rank(cfg: PipelineConfig) -> int:
    records = read_extracted(_require(_out(cfg, "extracted.jsonl"), "extract"))
    opposing = networks_mod.read_opposing_graphml(
        _require(_out(cfg, "opposing.graphml"), "networks")
    )
    _, display = _case_results(records)
    rows = _write_rankings(cfg, records, opposing, display)
    logger.info("ranked %d lawyers", len(rows))
    return 0


def cmd_communities(cfg: PipelineConfig) -> int:
    cases = networks_mod.read_case_graphml(
        _require(_out(cfg, f"cases_k{cfg.k}.graphml"), "networks"), k=cfg.k
    )
    partition = networks_mod.detect_communities(cases)
    networks_mod.write_communities_csv(
        _out(cfg, "communities.csv"), partition, cases.nodes
    )
    logger.info("found %d communities", len(partition.sizes))
    return 0


def cmd_flowgraph(cfg: PipelineConfig) -> int:
    docs = _load_corpus(cfg)
    by_jur: dict[str, list] = {}
    for doc in docs:
        by_jur.setdefault(doc.jurisdiction, []).append(doc)
    for jur in sorted(by_jur):
        graph = segmenter_mod.build_flow_graph(by_jur[jur], cfg.jaro_threshold)
        segmenter_mod.write_flow_graphml(_out(cfg, f"flow_{jur}.graphml"), graph)
        segmenter_mod.write_flow_dot(_out(cfg, f"flow_{jur}.dot"), graph)
        logger.info(
            "flow graph %s: %d nodes, %d edges", jur, len(graph.nodes), len(graph.edges)
        )
    return 0


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Full pipeline over a corpus; returns the manifest dictionary."""
    ingested_from_dir = False
    if cfg.corpus_file:
        path = Path(cfg.corpus_file)
        if not path.exists():
            raise UnreadableFile(f"corpus file not found: {path}")
        docs = corpus_mod.read_corpus(path)
    elif cfg.input_dir:
        root = Path(cfg.input_dir)
        if not root.is_dir():
            raise UnreadableFile(f"input directory not found: {root}")
        docs = []
        for path in sorted(root.rglob("*")):
            if path.suffix.lower() not in (".txt", ".rtf") or not path.is_file():
                continue
            try:
                docs.append(corpus_mod.ingest(path, cfg.jurisdiction))
            except (EmptyDocument, EncodingError, UnreadableFile) as exc:
                logger.warning("skipping %s: %s", path, exc)
        ingested_from_dir = True
    else:
        raise ValueError("run needs corpus_file or input_dir")
    if not docs:
        raise EmptyCorpus("no documents to process")

    docs, duplicates = corpus_mod.dedupe_documents(docs)
    if ingested_from_dir:
        corpus_mod.write_corpus(_out(cfg, "corpus.jsonl"), docs)

    segmented, failures = _segment_corpus(cfg, docs)
    _write_segments(_out(cfg, "segments.jsonl"), segmented)

    records = _extract_records(cfg, docs, segmented)
    write_extracted(_out(cfg, "extracted.jsonl"), records)

    opposing, collab, cases, results, display = _build_networks(cfg, records)
    partition = networks_mod.detect_communities(cases)

    networks_mod.write_opposing_graphml(_out(cfg, "opposing.graphml"), opposing)
    networks_mod.write_opposing_dot(_out(cfg, "opposing.dot"), opposing)
    networks_mod.write_collaboration_graphml(_out(cfg, "collaboration.graphml"), collab)
    networks_mod.write_collaboration_dot(_out(cfg, "collaboration.dot"), collab)
    networks_mod.write_case_graphml(
        _out(cfg, f"cases_k{cfg.k}.graphml"), cases, communities=partition.assignment
    )
    networks_mod.write_case_dot(_out(cfg, f"cases_k{cfg.k}.dot"), cases)
    networks_mod.write_communities_csv(
        _out(cfg, "communities.csv"), partition, cases.nodes
    )

    rows = _write_rankings(cfg, records, opposing, display)

    outcome_counts = {o.value: 0 for o in Outcome}
    for rec in records:
        outcome_counts[rec.outcome.value] += 1
    try:
        rate = rejection_rate(rec.outcome for rec in records)
    except CourtnetError:
        rate = None
    skipped_no_lawyers = sum(
        1 for rec in records
        if not (rec.appellant_lawyers or rec.appellee_lawyers)
    )

    manifest = {
        "config": dataclasses.asdict(cfg),
        "counts": {
            "docs_ingested": len(docs),
            "duplicates_dropped": duplicates,
            "segmentation_failures": len(failures),
            "docs_extracted": len(records),
            "docs_skipped_no_lawyers": skipped_no_lawyers,
            "outcomes": outcome_counts,
            "rejection_rate": rate,
            "lawyers_seen": len(display),
            "lawyers_ranked": len(rows),
            "opposing_nodes": len(opposing.nodes),
            "opposing_edges": len(opposing.edges),
            "collaboration_nodes": len(collab.nodes),
            "collaboration_edges": len(collab.edges),
            "case_nodes": len(cases.nodes),
            "case_edges": len(cases.edges),
            "communities": len(partition.sizes),
        },
    }
    (_out(cfg, "run_manifest.json")).write_text(
        json.dumps(manifest, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return manifest


def cmd_run(cfg: PipelineConfig) -> int:
    manifest = run_pipeline(cfg)
    counts = manifest["counts"]
    logger.info(
        "pipeline done: %d docs, %d ranked lawyers, %d communities",
        counts["docs_ingested"], counts["lawyers_ranked"], counts["communities"],
    )
    return 0


# ---------------------------------------------------------------------------
# Argument handling

COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "segment": cmd_segment,
    "extract": cmd_extract,
    "networks": cmd_networks,
    "rank": cmd_rank,
    "communities": cmd_communities,
    "flowgraph": cmd_flowgraph,
    "run": cmd_run,
}

# CLI flags that override config fields, per command
_PROFILE_FIELDS = ["profile", "profile_file"]
_PARAM_FIELDS = [
    "a", "b", "min_cases", "collab_min", "k",
    "damping", "tol", "max_iter", "workers",
]


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors (config errors, per contract)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="courtnet", description=__doc__)
    parser.add_argument(
        "--print-default-config", action="store_true",
        help="print the default configuration as JSON and exit",
    )
    parser.add_argument("--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command")

    def add(name, help_, fields):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--output-dir", dest="output_dir")
        for f in fields:
            flag = "--" + f.replace("_", "-")
            if f in ("min_cases", "collab_min", "k", "max_iter", "workers",
                     "seed", "n_docs"):
                p.add_argument(flag, dest=f, type=int)
            elif f in ("a", "b", "damping", "tol", "jaro_threshold"):
                p.add_argument(flag, dest=f, type=float)
            elif f == "mix":
                p.add_argument(flag, dest=f, type=json.loads,
                               help='JSON object, e.g. \'{"douai":0.5,"agen":0.5}\'')
            else:
                p.add_argument(flag, dest=f)
        return p

    add("synth", "generate a synthetic corpus with ground truth",
        ["seed", "n_docs", "mix"])
    add("ingest", "read .txt/.rtf sources into corpus.jsonl",
        ["input_dir", "jurisdiction"])
    add("segment", "cut corpus documents into segments",
        ["corpus_file"] + _PROFILE_FIELDS + ["workers"])
    add("extract", "extract lawyers, articles and outcomes",
        ["corpus_file", "workers"])
    add("networks", "build opposing, collaboration and case graphs",
        _PARAM_FIELDS)
    add("rank", "compute the lawyer ranking table",
        ["damping", "tol", "max_iter"])
    add("communities", "detect communities on the case graph",
        ["k"])
    add("flowgraph", "build per-jurisdiction sentence flow graphs",
        ["corpus_file", "jaro_threshold"])
    add("run", "run the whole pipeline and write all artifacts",
        ["input_dir", "corpus_file", "jurisdiction", "jaro_threshold"]
        + _PROFILE_FIELDS + _PARAM_FIELDS + ["seed", "n_docs", "mix"])
    return parser


def _make_config(args: argparse.Namespace) -> PipelineConfig:
    cfg = (
        load_config_file(args.config)
        if getattr(args, "config", None)
        else default_config()
    )
    for f in dataclasses.fields(PipelineConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.print_default_config:
        print(config_to_json(default_config()))
        return 0
    if not args.command:
        print("courtnet: a subcommand is required (see --help)", file=sys.stderr)
        return 1
    try:
        cfg = _make_config(args)
        validate_config(cfg)
        return COMMANDS[args.command](cfg)
    except (UnreadableFile, EmptyCorpus) as exc:
        print(f"courtnet: input error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"courtnet: input error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, InvalidMix, InvalidThreshold) as exc:
        print(f"courtnet: config error: {exc}", file=sys.stderr)
        return 1
    except CourtnetError as exc:
        print(f"courtnet: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
