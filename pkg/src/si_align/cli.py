"""Command-line pipeline: align, filter, split, curate, and benchmark.

Every subcommand reads a declarative JSON config (flags win over the file),
writes its artifacts atomically under the output directory, and emits a
machine-readable run manifest with input paths, a parameter hash, and
artifact checksums. Runs are idempotent: identical inputs produce
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import align as al
from . import corpus as cm
from . import curation as cu
from . import embeddings as em
from . import inter as fi
from . import intra as fa
from . import recovery as rv
from . import splitter as sp
from . import synth as sb
from .corpus import ParseError, ValidationError

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

STAGE_COARSE = "coarse"
STAGE_INTRA = "intra"
STAGE_INTER = "inter"


class _Parser(argparse.ArgumentParser):
    # usage problems are validation errors (exit 1), not I/O errors (exit 2)
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


@dataclasses.dataclass
class PipelineConfig:
    out_dir: Path
    corpus: Path | None = None
    gold_dir: Path | None = None
    refs_dir: Path | None = None
    scores_path: Path | None = None
    allowlist: Path | None = None
    dev_ids: tuple[str, ...] = ()
    test_ids: tuple[str, ...] = ()
    embedding: dict = dataclasses.field(default_factory=dict)
    align_params: al.AlignParams = al.AlignParams()
    intra_params: fa.IntraFilterParams = fa.IntraFilterParams()
    inter_params: fi.InterFilterParams = fi.InterFilterParams()
    per_talk_inter: dict[str, fi.InterFilterParams] = dataclasses.field(default_factory=dict)
    noise: sb.NoiseParams = sb.NoiseParams()
    synth_talks: int = 5
    synth_sentences: int = 40
    synth_vocab: int = 200
    synth_seed: int = 7
    epsilons: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    bench_omission_rates: tuple[float, ...] = (0.0, 0.1, 0.2, 0.3)
    bench_talks: int = 20
    jobs: int = 1


_ALIGN_FLAG_MAP = {
    "prune_cost": "prune_cost_threshold",
    "max_src_span": "max_src_span",
    "max_tgt_span": "max_tgt_span",
    "skip_penalty": "skip_penalty",
}
_INTER_FLAGS = ("alpha_min", "gamma_min", "gamma_max", "eta_min")


def _dataclass_from(cls, obj: dict, context: str):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(obj) - fields
    if unknown:
        raise ValidationError(f"{context}: unknown keys {sorted(unknown)}")
    return cls(**obj)


def load_config(path: Path | None, args) -> PipelineConfig:
    """Merge config file and CLI flags; flags win."""
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid config JSON: {exc}", path=path) from exc
    base = Path(path).parent if path is not None else Path(".")

    def respath(key):
        value = raw.get(key)
        return (base / value) if value is not None else None

    align_obj = dict(raw.get("align", {}))
    inter_obj = dict(raw.get("inter", {}))
    per_talk_raw = inter_obj.pop("per_talk", {})
    intra_obj = dict(raw.get("intra", {}))
    if "content_pos" in intra_obj:
        intra_obj["content_pos"] = frozenset(cm.Pos(p) for p in intra_obj["content_pos"])
    if "coverage_pos" in inter_obj:
        inter_obj["coverage_pos"] = frozenset(cm.Pos(p) for p in inter_obj["coverage_pos"])

    for flag, field_name in _ALIGN_FLAG_MAP.items():
        value = getattr(args, flag, None)
        if value is not None:
            align_obj[field_name] = value
    for flag in _INTER_FLAGS:
        value = getattr(args, flag, None)
        if value is not None:
            inter_obj[flag] = value

    inter_params = _dataclass_from(fi.InterFilterParams, inter_obj, "inter")
    per_talk = {}
    for talk_id, overrides in per_talk_raw.items():
        merged = {**inter_obj, **overrides}
        if "coverage_pos" in merged and not isinstance(merged["coverage_pos"], frozenset):
            merged["coverage_pos"] = frozenset(cm.Pos(p) for p in merged["coverage_pos"])
        per_talk[talk_id] = _dataclass_from(fi.InterFilterParams, merged, f"inter.per_talk.{talk_id}")

    synth_obj = raw.get("synth", {})
    noise_obj = dict(raw.get("noise", {}))
    if getattr(args, "seed", None) is not None:
        synth_obj = {**synth_obj, "seed": args.seed}
        noise_obj["rng_seed"] = args.seed

    em.EmbeddingProviderSpec.from_dict(raw.get("embedding", {}))  # validate early

    out_dir = getattr(args, "out_dir", None) or raw.get("out_dir") or "out"
    cfg = PipelineConfig(
        out_dir=(base / out_dir) if not Path(out_dir).is_absolute() else Path(out_dir),
        corpus=respath("corpus"),
        gold_dir=respath("gold_dir"),
        refs_dir=respath("refs_dir"),
        scores_path=respath("scores_path"),
        allowlist=respath("allowlist"),
        dev_ids=tuple(raw.get("dev_ids", ())),
        test_ids=tuple(raw.get("test_ids", ())),
        embedding=raw.get("embedding", {}),
        align_params=_dataclass_from(al.AlignParams, align_obj, "align"),
        intra_params=_dataclass_from(fa.IntraFilterParams, intra_obj, "intra"),
        inter_params=inter_params,
        per_talk_inter=per_talk,
        noise=_dataclass_from(sb.NoiseParams, noise_obj, "noise"),
        synth_talks=int(synth_obj.get("talks", 5)),
        synth_sentences=int(synth_obj.get("sentences", 40)),
        synth_vocab=int(synth_obj.get("vocab_size", 200)),
        synth_seed=int(synth_obj.get("seed", 7)),
        epsilons=tuple(raw.get("epsilons", PipelineConfig.epsilons)),
        bench_omission_rates=tuple(raw.get("bench_omission_rates",
                                           PipelineConfig.bench_omission_rates)),
        bench_talks=int(raw.get("bench_talks", 20)),
        jobs=getattr(args, "jobs", None) or int(raw.get("jobs", 1)),
    )
    return cfg


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


class RunManifest:
    """Records inputs, parameter hash, and artifact checksums for one run."""

    def __init__(self, command: str, cfg: PipelineConfig):
        self.command = command
        self.out_dir = cfg.out_dir
        cfg_obj = dataclasses.asdict(cfg)
        canon = json.dumps(cfg_obj, sort_keys=True, default=_json_default)
        self.params_hash = hashlib.sha256(canon.encode("utf-8")).hexdigest()
        self.inputs: list[str] = []
        self.artifacts: dict[str, str] = {}

    def add_input(self, path) -> None:
        if path is not None:
            self.inputs.append(str(path))

    def write_artifact(self, path: Path, text: str) -> None:
        atomic_write_text(path, text)
        digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        self.artifacts[str(path.relative_to(self.out_dir))] = digest

    def save(self) -> Path:
        obj = {
            "command": self.command,
            "params_hash": self.params_hash,
            "inputs": sorted(set(self.inputs)),
            "artifacts": dict(sorted(self.artifacts.items())),
        }
        path = self.out_dir / "manifests" / f"{self.command}.json"
        atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
        return path


def _json_default(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, frozenset):
        return sorted(v.value if hasattr(v, "value") else v for v in value)
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"not JSON serializable: {value!r}")


def _links_jsonl(talk_id: str, links) -> str:
    rows = []
    for link in links:
        rows.append(json.dumps({
            "talk_id": talk_id,
            "src_start": link.src_start, "src_len": link.src_len,
            "tgt_start": link.tgt_start, "tgt_len": link.tgt_len,
            "cost": link.cost, "dropped": link.dropped, "drop_reason": link.drop_reason,
        }, ensure_ascii=False, sort_keys=True))
    return "".join(r + "\n" for r in rows)


def load_corpus(cfg: PipelineConfig) -> list[cm.DocumentPair]:
    if cfg.corpus is None:
        raise ValidationError("config needs a 'corpus' path for this command")
    obj = json.loads(Path(cfg.corpus).read_text(encoding="utf-8"))
    base = Path(cfg.corpus).parent
    docs = []
    for rel in obj["talks"]:
        manifest = cm.read_manifest(base / rel)
        docs.append(cm.load_document_pair(manifest))
    ids = [d.talk_id for d in docs]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate talk_id in corpus")
    return docs


def _ranks(cfg: PipelineConfig) -> dict[str, cm.Rank]:
    return {d.talk_id: d.interpreter_rank for d in load_corpus(cfg)}


def build_table(doc: cm.DocumentPair, cfg: PipelineConfig) -> em.EmbeddingTable:
    spec = em.EmbeddingProviderSpec.from_dict(cfg.embedding)
    base = Path(cfg.corpus).parent if cfg.corpus is not None else None
    return em.table_for(doc, spec, cfg.align_params.max_src_span,
                        cfg.align_params.max_tgt_span, base_dir=base)


def _align_one(doc: cm.DocumentPair, cfg: PipelineConfig) -> al.AlignmentSet:
    table = build_table(doc, cfg)
    aligned = al.dp_align(doc, table, cfg.align_params)
    return al.prune(aligned, cfg.align_params.prune_cost_threshold)


def _map_talks(fn, docs, cfg: PipelineConfig):
    """Talk-level parallelism; results returned in input order."""
    if cfg.jobs <= 1 or len(docs) <= 1:
        return [fn(d, cfg) for d in docs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        futures = [pool.submit(fn, d, cfg) for d in docs]
        return [f.result() for f in futures]


def cmd_synth(cfg: PipelineConfig) -> int:
    manifest = RunManifest("synth", cfg)
    talks = sb.generate_corpus(cfg.synth_seed, cfg.synth_talks, cfg.synth_sentences,
                               cfg.noise, cfg.synth_vocab)
    out = cfg.out_dir
    rels = []
    for talk in talks:
        talk_dir = out / "talks" / talk.doc.talk_id
        manifest_path = cm.write_document_pair(talk.doc, talk_dir)
        rels.append(str(manifest_path.relative_to(out)))
        for name in ("source_units.txt", "target_units.txt",
                     "source_tags.tsv", "target_tags.tsv", "manifest.json"):
            text = (talk_dir / name).read_text(encoding="utf-8")
            manifest.artifacts[str((talk_dir / name).relative_to(out))] = \
                hashlib.sha256(text.encode("utf-8")).hexdigest()
        manifest.write_artifact(out / "gold" / f"{talk.doc.talk_id}.gold.jsonl",
                                _links_jsonl(talk.doc.talk_id, talk.gold.links))
        manifest.write_artifact(
            out / "gold" / f"{talk.doc.talk_id}.provenance.json",
            json.dumps(list(talk.provenance), ensure_ascii=False) + "\n")
        ref = sb.build_reference(talk.doc, cfg.align_params.max_src_span)
        ref_rows = []
        for (start, length) in sorted(ref.entries):
            entry = ref.entries[(start, length)]
            ref_rows.append(json.dumps({
                "talk_id": ref.talk_id, "src_start": start, "src_len": length,
                "text": entry.text,
                "tokens": [[t.surface, t.pos.value] for t in entry.tokens],
            }, ensure_ascii=False, sort_keys=True))
        manifest.write_artifact(out / "refs" / f"{talk.doc.talk_id}.refs.jsonl",
                                "".join(r + "\n" for r in ref_rows))
    manifest.write_artifact(
        out / "corpus.json",
        json.dumps({"talks": rels}, indent=2, sort_keys=True) + "\n")
    manifest.write_artifact(
        out / "allowlist.txt",
        "".join(t.doc.talk_id + "\n" for t in talks))
    manifest.save()
    log.info("synthesized %d talks into %s", len(talks), out)
    return EXIT_OK


def cmd_align(cfg: PipelineConfig) -> int:
    manifest = RunManifest("align", cfg)
    manifest.add_input(cfg.corpus)
    docs = load_corpus(cfg)
    results = _map_talks(_align_one, docs, cfg)
    for doc, aset in zip(docs, results):
        manifest.write_artifact(cfg.out_dir / STAGE_COARSE / f"{doc.talk_id}.jsonl",
                                _links_jsonl(doc.talk_id, aset.links))
    manifest.save()
    return EXIT_OK


def _read_stage(cfg: PipelineConfig, stage: str, talk_id: str) -> al.AlignmentSet:
    path = cfg.out_dir / stage / f"{talk_id}.jsonl"
    aset = al.read_alignment_jsonl(path)
    if aset.talk_id in ("", None):
        aset = dataclasses.replace(aset, talk_id=talk_id)
    return aset


def cmd_validate(cfg: PipelineConfig) -> int:
    manifest = RunManifest("validate", cfg)
    manifest.add_input(cfg.corpus)
    if cfg.gold_dir is None:
        raise ValidationError("config needs 'gold_dir' for validate")
    docs = load_corpus(cfg)
    reports = []
    for doc in docs:
        gold_path = cfg.gold_dir / f"{doc.talk_id}.gold.jsonl"
        manifest.add_input(gold_path)
        gold = al.read_alignment_jsonl(gold_path)
        auto = _read_stage(cfg, STAGE_COARSE, doc.talk_id)
        report = rv.recovery_accuracy(auto, gold, doc, list(cfg.epsilons))
        reports.append(report)
        obj = {
            "talk_id": report.talk_id,
            "per_sentence": [[i, s] for i, s in report.per_sentence],
            "accuracy_at": {repr(e): a for e, a in sorted(report.accuracy_at.items())},
        }
        manifest.write_artifact(
            cfg.out_dir / "reports" / f"{doc.talk_id}.recovery.json",
            json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n")
    epsilons = sorted({e for r in reports for e in r.accuracy_at})
    lines = ["talk_id\tn_links\t" + "\t".join(f"acc@{e:g}" for e in epsilons)]
    for r in reports:
        cells = [f"{r.accuracy_at.get(e, 0.0):.4f}" for e in epsilons]
        lines.append(f"{r.talk_id}\t{len(r.per_sentence)}\t" + "\t".join(cells))
    manifest.write_artifact(cfg.out_dir / "reports" / "recovery.tsv",
                            "\n".join(lines) + "\n")
    manifest.save()
    return EXIT_OK


def cmd_filter_intra(cfg: PipelineConfig) -> int:
    manifest = RunManifest("filter-intra", cfg)
    manifest.add_input(cfg.corpus)
    docs = load_corpus(cfg)
    for doc in docs:
        coarse = _read_stage(cfg, STAGE_COARSE, doc.talk_id)
        results = fa.apply_intra_filter(coarse.kept(), doc, cfg.intra_params)
        out_links = [r.pair for r in results]
        manifest.write_artifact(cfg.out_dir / STAGE_INTRA / f"{doc.talk_id}.jsonl",
                                _links_jsonl(doc.talk_id, out_links))
        trim_rows = []
        for original, r in zip(coarse.kept(), results):
            trim_rows.append(json.dumps({
                "talk_id": doc.talk_id,
                "src_start": original.src_start, "src_len": original.src_len,
                "tgt_start": original.tgt_start, "tgt_len": original.tgt_len,
                "new_tgt_start": r.pair.tgt_start, "new_tgt_len": r.pair.tgt_len,
                "trims": list(r.trims), "flagged": r.flagged,
            }, ensure_ascii=False, sort_keys=True))
        manifest.write_artifact(cfg.out_dir / STAGE_INTRA / f"{doc.talk_id}.trims.jsonl",
                                "".join(t + "\n" for t in trim_rows))
    manifest.save()
    return EXIT_OK


def cmd_filter_inter(cfg: PipelineConfig) -> int:
    manifest = RunManifest("filter-inter", cfg)
    manifest.add_input(cfg.corpus)
    if cfg.refs_dir is None:
        raise ValidationError("config needs 'refs_dir' for filter-inter")
    scorer = None
    if cfg.scores_path is not None:
        manifest.add_input(cfg.scores_path)
        scorer = fi.read_external_scores(cfg.scores_path)
    docs = load_corpus(cfg)
    for doc in docs:
        ref_path = cfg.refs_dir / f"{doc.talk_id}.refs.jsonl"
        manifest.add_input(ref_path)
        ref = fi.read_reference_jsonl(ref_path, talk_id=doc.talk_id)
        intra = _read_stage(cfg, STAGE_INTRA, doc.talk_id)
        trims = _read_trims(cfg, doc.talk_id)
        params = cfg.per_talk_inter.get(doc.talk_id, cfg.inter_params)
        kept, decisions = fi.apply_inter_filter(
            intra.kept(), doc, ref, params, scorer=scorer, trims_by_pair=trims)
        manifest.write_artifact(cfg.out_dir / STAGE_INTER / f"{doc.talk_id}.jsonl",
                                _links_jsonl(doc.talk_id, kept))
        rows = []
        for d in decisions:
            rows.append(json.dumps({
                "talk_id": d.talk_id,
                "src_start": d.src_start, "src_len": d.src_len,
                "tgt_start": d.tgt_start, "tgt_len": d.tgt_len,
                "alpha": d.alpha, "gamma": d.gamma, "eta": d.eta,
                "trims": list(d.trims), "verdict": d.verdict, "reasons": list(d.reasons),
            }, ensure_ascii=False, sort_keys=True))
        manifest.write_artifact(cfg.out_dir / "decisions" / f"{doc.talk_id}.jsonl",
                                "".join(r + "\n" for r in rows))
    manifest.save()
    return EXIT_OK


def _read_trims(cfg: PipelineConfig, talk_id: str) -> dict:
    path = cfg.out_dir / STAGE_INTRA / f"{talk_id}.trims.jsonl"
    trims = {}
    if not path.exists():
        return trims
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            if not raw.strip():
                continue
            obj = json.loads(raw)
            key = (obj["src_start"], obj["src_len"], obj["new_tgt_start"], obj["new_tgt_len"])
            trims[key] = tuple(obj["trims"])
    return trims


def cmd_split(cfg: PipelineConfig) -> int:
    manifest = RunManifest("split", cfg)
    manifest.add_input(cfg.corpus)
    if cfg.allowlist is None:
        raise ValidationError("config needs 'allowlist' for split")
    manifest.add_input(cfg.allowlist)
    talk_ids = [d.talk_id for d in load_corpus(cfg)]
    allow = sp.read_allowlist(cfg.allowlist)
    split = sp.make_split(talk_ids, allow, cfg.dev_ids, cfg.test_ids,
                          allowlist_source=str(cfg.allowlist))
    obj = {
        "train_ids": sorted(split.train_ids),
        "dev_ids": sorted(split.dev_ids),
        "test_ids": sorted(split.test_ids),
        "allowlist_id_source": Path(split.allowlist_id_source).name,
    }
    manifest.write_artifact(cfg.out_dir / "split.json",
                            json.dumps(obj, indent=2, sort_keys=True) + "\n")
    manifest.save()
    return EXIT_OK


def cmd_stats(cfg: PipelineConfig) -> int:
    manifest = RunManifest("stats", cfg)
    manifest.add_input(cfg.corpus)
    docs = load_corpus(cfg)
    ranks = {d.talk_id: d.interpreter_rank for d in docs}
    pair_counts: dict[str, dict[str, int]] = {}
    for stage in (STAGE_COARSE, STAGE_INTRA, STAGE_INTER):
        counts = {}
        for doc in docs:
            path = cfg.out_dir / stage / f"{doc.talk_id}.jsonl"
            if not path.exists():
                continue
            aset = al.read_alignment_jsonl(path)
            counts[doc.talk_id] = sum(
                1 for l in aset.kept() if not l.src_empty and not l.tgt_empty)
        if counts:
            pair_counts[stage] = counts
    table = sp.corpus_stats(pair_counts, ranks)
    manifest.write_artifact(cfg.out_dir / "stats.tsv", table.as_tsv())
    manifest.write_artifact(cfg.out_dir / "stats.txt", table.as_text())
    manifest.save()
    return EXIT_OK


def cmd_export_anno(cfg: PipelineConfig, stage: str) -> int:
    manifest = RunManifest("export-anno", cfg)
    manifest.add_input(cfg.corpus)
    docs = load_corpus(cfg)
    by_talk = {}
    for doc in docs:
        aset = _read_stage(cfg, stage, doc.talk_id)
        pairs = [l for l in aset.kept() if not l.src_empty and not l.tgt_empty]
        by_talk[doc.talk_id] = (pairs, doc)
    records = cu.export_annotations(by_talk)
    lines = ["\t".join(cu.HEADER)]
    for r in records:
        lines.append("\t".join((
            r.talk_id, str(r.src_start), str(r.src_len), str(r.tgt_start), str(r.tgt_len),
            r.source_text, r.target_text, "", "", "",
        )))
    manifest.write_artifact(cfg.out_dir / "annotations.tsv", "\n".join(lines) + "\n")
    manifest.save()
    return EXIT_OK


def cmd_import_anno(cfg: PipelineConfig, anno_path: Path) -> int:
    manifest = RunManifest("import-anno", cfg)
    manifest.add_input(anno_path)
    docs = None
    if cfg.corpus is not None:
        docs = {d.talk_id: d for d in load_corpus(cfg)}
        manifest.add_input(cfg.corpus)
    kept, label_counts = cu.import_annotations(anno_path, docs)
    rows = []
    for c in kept:
        rows.append(json.dumps({
            "talk_id": c.talk_id,
            "src_start": c.pair.src_start, "src_len": c.pair.src_len,
            "tgt_start": c.pair.tgt_start, "tgt_len": c.pair.tgt_len,
            "source_text": c.source_text, "target_text": c.target_text,
        }, ensure_ascii=False, sort_keys=True))
    manifest.write_artifact(cfg.out_dir / "curated.jsonl",
                            "".join(r + "\n" for r in rows))
    counts_obj = {f"{a or 'unset'}/{m or 'unset'}": n
                  for (a, m), n in sorted(label_counts.items())}
    manifest.write_artifact(cfg.out_dir / "curation_counts.json",
                            json.dumps(counts_obj, indent=2, sort_keys=True) + "\n")
    manifest.save()
    return EXIT_OK


def cmd_bench(cfg: PipelineConfig) -> int:
    manifest = RunManifest("bench", cfg)
    lines = ["omission_rate\tmistranslation_rate\tsplit_rate\tmerge_rate\tfiller_rate"
             "\ttalks\tprecision\trecall\tf1"]
    for om in cfg.bench_omission_rates:
        noise = dataclasses.replace(cfg.noise, omission_rate=om)
        triple = sb.run_bench_setting(cfg.synth_seed, cfg.bench_talks,
                                      cfg.synth_sentences, noise, cfg.synth_vocab,
                                      params=cfg.align_params)
        lines.append("\t".join((
            f"{noise.omission_rate:g}", f"{noise.mistranslation_rate:g}",
            f"{noise.split_rate:g}", f"{noise.merge_rate:g}", f"{noise.filler_rate:g}",
            str(cfg.bench_talks),
            f"{triple.precision:.4f}", f"{triple.recall:.4f}", f"{triple.f1:.4f}",
        )))
    manifest.write_artifact(cfg.out_dir / "bench.tsv", "\n".join(lines) + "\n")
    manifest.save()
    print("\n".join(lines))
    return EXIT_OK


def cmd_pipeline(cfg: PipelineConfig) -> int:
    for step in (cmd_align, cmd_filter_intra, cmd_filter_inter, cmd_split, cmd_stats):
        code = step(cfg)
        if code != EXIT_OK:
            return code
    return EXIT_OK


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON config file")
    common.add_argument("--out-dir", default=None, help="output directory")
    common.add_argument("--jobs", type=int, default=None, help="talk-level parallelism")
    common.add_argument("--seed", type=int, default=None, help="override synth/bench seed")
    common.add_argument("--alpha-min", dest="alpha_min", type=float, default=None)
    common.add_argument("--gamma-min", dest="gamma_min", type=float, default=None)
    common.add_argument("--gamma-max", dest="gamma_max", type=float, default=None)
    common.add_argument("--eta-min", dest="eta_min", type=float, default=None)
    common.add_argument("--prune-cost", dest="prune_cost", type=float, default=None)
    common.add_argument("--max-src-span", dest="max_src_span", type=int, default=None)
    common.add_argument("--max-tgt-span", dest="max_tgt_span", type=int, default=None)
    common.add_argument("--skip-penalty", dest="skip_penalty", type=float, default=None)

    parser = _Parser(prog="si-align",
                     description="SI corpus alignment and filtering pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("align", "validate", "filter-intra", "filter-inter",
                 "split", "stats", "bench", "pipeline"):
        sub.add_parser(name, parents=[common])
    p_synth = sub.add_parser("synth", parents=[common])
    p_synth.add_argument("--talks", type=int, default=None)
    p_synth.add_argument("--sentences", type=int, default=None)
    p_synth.add_argument("--vocab-size", type=int, default=None)
    p_export = sub.add_parser("export-anno", parents=[common])
    p_export.add_argument("--stage", choices=(STAGE_COARSE, STAGE_INTRA, STAGE_INTER),
                          default=STAGE_INTER)
    p_import = sub.add_parser("import-anno", parents=[common])
    p_import.add_argument("annotations", type=Path)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("SI_ALIGN_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config, args)
        if args.command == "synth":
            if args.talks is not None:
                cfg.synth_talks = args.talks
            if args.sentences is not None:
                cfg.synth_sentences = args.sentences
            if args.vocab_size is not None:
                cfg.synth_vocab = args.vocab_size
            return cmd_synth(cfg)
        if args.command == "align":
            return cmd_align(cfg)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "filter-intra":
            return cmd_filter_intra(cfg)
        if args.command == "filter-inter":
            return cmd_filter_inter(cfg)
        if args.command == "split":
            return cmd_split(cfg)
        if args.command == "stats":
            return cmd_stats(cfg)
        if args.command == "export-anno":
            return cmd_export_anno(cfg, args.stage)
        if args.command == "import-anno":
            return cmd_import_anno(cfg, args.annotations)
        if args.command == "bench":
            return cmd_bench(cfg)
        return cmd_pipeline(cfg)
    except (ParseError, FileNotFoundError, em.MissingWindowError,
            fi.MissingReferenceError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, sp.ContaminationError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
