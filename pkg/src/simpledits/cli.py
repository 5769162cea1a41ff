"""Command line pipeline driver.

Subcommands mirror the pipeline stages: ``synth`` builds ground-truth
corpora, ``ingest`` normalizes a dump into the JSONL fixture format,
``extract`` pulls lexical edit instances out of fixtures, ``count``
folds instances into a mergeable count store, ``rank`` produces
candidate lists by any of the four methods, and ``eval`` builds blind
judging batches and scores returned judgments.

Exit codes: 0 on success, 1 for usage problems (bad flags, bad
parameter values), 2 for data problems (missing or malformed
artifacts). Shared knobs resolve flag > config file > built-in
default; the config file holds one ``key=value`` per line.
"""

from __future__ import annotations

import argparse
import multiprocessing
import os
import sys
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, Sequence

from .candidates import Method, SimplificationCandidate, read_candidates_path, \
    write_candidates_path
from .edit_model import ModelConfig, rank_edit_model
from .evaluate import (FULL_SCALE_REFERENCE, FULL_SCALE_REFERENCE_KAPPA,
                       LabelError, MissingJudgmentError, build_evaluation_batch,
                       dictionary_overlap, fleiss_kappa, load_dictionary,
                       precision_at_k, read_batch, read_judgments,
                       records_from_judgments, verdicts_from_records,
                       write_batch)
from .extract import (TAU_ALIGN, TAU_IDENTICAL, LexicalEditInstance,
                      extract_from_sequence, read_instances, write_instances)
from .ingest import (Corpus, DumpParseError, ParseStats, VersionSequence,
                     filter_textual_changes, iter_sequences, write_fixture)
from .metadata import (TrustedCommentMatcher, baseline_frequent,
                       baseline_random, pmi_rank, select_trusted)
from .store import (EditInstanceStore, StoreFormatError, accumulate,
                    collect_source_vocabulary, load_store_path, merge,
                    save_store_path)
from .synth import demo_spec, generate, write_ground_truth


class CliUsageError(Exception):
    """Bad invocation; maps to exit code 1."""


class CliDataError(Exception):
    """Missing or malformed artifact; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we reserve 2 for data
        raise CliUsageError(message)


_DEFAULTS = {
    "alpha": 1.0,
    "min_pair_freq": 2,
    "min_phrase_freq": 101,
    "top_k": 100,
    "seed_patterns": ("simpl",),
    "rng_seed": 0,
    "workers": 1,
    "tau_align": TAU_ALIGN,
    "tau_identical": TAU_IDENTICAL,
}


@dataclass(frozen=True)
class Settings:
    alpha: float
    min_pair_freq: int
    min_phrase_freq: int
    top_k: int
    seed_patterns: tuple[str, ...]
    rng_seed: int
    workers: int
    tau_align: float
    tau_identical: float


def _load_config(path: str) -> dict[str, str]:
    if not os.path.exists(path):
        raise CliDataError(f"missing config file: {path}")
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise CliDataError(f"{path}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in _DEFAULTS:
                raise CliDataError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value.strip()
    return values


def _split_patterns(value: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in value.split(",") if p.strip())


def _resolve(args: argparse.Namespace) -> Settings:
    config = _load_config(args.config) if getattr(args, "config", None) else {}

    def pick(key, cast):
        flag = getattr(args, key, None)
        if flag is not None:
            return flag
        if key in config:
            try:
                return cast(config[key])
            except ValueError as exc:
                raise CliDataError(f"config key {key!r}: {exc}") from exc
        return _DEFAULTS[key]

    settings = Settings(
        alpha=pick("alpha", float),
        min_pair_freq=pick("min_pair_freq", int),
        min_phrase_freq=pick("min_phrase_freq", int),
        top_k=pick("top_k", int),
        seed_patterns=tuple(pick("seed_patterns", _split_patterns)),
        rng_seed=pick("rng_seed", int),
        workers=pick("workers", int),
        tau_align=pick("tau_align", float),
        tau_identical=pick("tau_identical", float),
    )
    if settings.workers < 1:
        raise CliUsageError("--workers must be at least 1")
    if settings.min_pair_freq < 1 or settings.min_phrase_freq < 1:
        raise CliUsageError("frequency floors must be at least 1")
    if settings.top_k < 1:
        raise CliUsageError("--top-k must be at least 1")
    if not 0.0 <= settings.alpha <= 1.0:
        raise CliUsageError(f"--alpha must be in [0, 1], got {settings.alpha}")
    return settings


def _require(path: str) -> str:
    if not os.path.exists(path):
        raise CliDataError(f"missing artifact: {path}")
    return path


def _say(message: str) -> None:
    print(message)


# --- parallel workers; top level so the fork pickle stays cheap ------------


def _extract_one(payload: tuple[VersionSequence, float, float],
                 ) -> list[LexicalEditInstance]:
    seq, tau_align, tau_identical = payload
    groups = extract_from_sequence(seq, tau_align, tau_identical)
    return [inst for _, instances in groups for inst in instances]


def _count_chunk(payload: tuple[frozenset,
                                list[tuple[VersionSequence,
                                           list[LexicalEditInstance]]]],
                 ) -> EditInstanceStore:
    vocabulary, work = payload
    store = EditInstanceStore(vocabulary)
    for seq, instances in work:
        accumulate(store, seq, instances)
    return store


def _chunked(items: list, n_chunks: int) -> list[list]:
    size = max(1, -(-len(items) // n_chunks))
    return [items[i:i + size] for i in range(0, len(items), size)]


# --- subcommands ------------------------------------------------------------


def _cmd_synth(args: argparse.Namespace) -> int:
    settings = _resolve(args)
    try:
        spec = demo_spec(topics_per_corpus=args.topics,
                         revisions_per_topic=args.revisions,
                         rng_seed=settings.rng_seed, alpha=settings.alpha,
                         distractors=args.distractors, n_phrases=args.phrases)
    except ValueError as exc:
        raise CliUsageError(str(exc)) from exc
    complex_seqs, simple_seqs, truth = generate(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    for name, seqs in (("complex.jsonl", complex_seqs),
                       ("simple.jsonl", simple_seqs)):
        with open(os.path.join(args.out_dir, name), "w", encoding="utf-8") as out:
            write_fixture(seqs, out)
    with open(os.path.join(args.out_dir, "ground_truth.tsv"), "w",
              encoding="utf-8") as out:
        write_ground_truth(truth, out)
    _say(f"synth: {spec.topics_per_corpus} topics per corpus, "
         f"{len(spec.phrases)} planted phrases -> {args.out_dir}")
    return 0


def _cmd_ingest(args: argparse.Namespace) -> int:
    _require(args.input)
    stats = ParseStats()
    rows = 0
    with open(args.out, "w", encoding="utf-8") as out:
        def filtered() -> Iterator[VersionSequence]:
            for seq in iter_sequences(args.input, Corpus(args.corpus), stats):
                yield filter_textual_changes(seq)
        rows = write_fixture(filtered(), out)
    _say(f"ingest: {stats.pages_emitted} pages kept, "
         f"{stats.pages_skipped} skipped, {stats.revisions} revisions read, "
         f"{rows} kept after change filtering -> {args.out}")
    return 0


def _iter_inputs(args: argparse.Namespace) -> Iterator[tuple[str, Corpus]]:
    for path in args.complex or ():
        yield _require(path), Corpus.COMPLEX
    for path in args.simple or ():
        yield _require(path), Corpus.SIMPLE


def _cmd_extract(args: argparse.Namespace) -> int:
    settings = _resolve(args)
    inputs = list(_iter_inputs(args))
    if not inputs:
        raise CliUsageError("extract needs at least one --complex or --simple input")

    def payloads() -> Iterator[tuple[VersionSequence, float, float]]:
        for path, corpus in inputs:
            for seq in iter_sequences(path, corpus):
                yield (filter_textual_changes(seq),
                       settings.tau_align, settings.tau_identical)

    n_instances = 0
    n_seqs = 0
    with open(args.out, "w", encoding="utf-8") as out:
        if settings.workers == 1:
            results: Iterable[list[LexicalEditInstance]] = map(_extract_one, payloads())
        else:
            pool = multiprocessing.Pool(settings.workers)
            results = pool.imap(_extract_one, payloads(), chunksize=16)
        try:
            for instances in results:
                n_seqs += 1
                n_instances += write_instances(instances, out)
        finally:
            if settings.workers > 1:
                pool.close()
                pool.join()
    _say(f"extract: {n_instances} instances from {n_seqs} sequences -> {args.out}")
    return 0


def _cmd_count(args: argparse.Namespace) -> int:
    settings = _resolve(args)
    inputs = list(_iter_inputs(args))
    if not inputs:
        raise CliUsageError("count needs at least one --complex or --simple input")

    instances: list[LexicalEditInstance] = []
    for path in args.instances:
        with open(_require(path), "r", encoding="utf-8") as handle:
            instances.extend(read_instances(handle))
    vocabulary = frozenset(collect_source_vocabulary(instances))

    by_article: dict[tuple[Corpus, str], list[LexicalEditInstance]] = {}
    for inst in instances:
        by_article.setdefault((inst.corpus, inst.article_id), []).append(inst)

    work = []
    for path, corpus in inputs:
        for seq in iter_sequences(path, corpus):
            work.append((seq, by_article.get((corpus, seq.article_id), [])))

    if settings.workers == 1:
        store = EditInstanceStore(vocabulary)
        for seq, seq_instances in work:
            accumulate(store, seq, seq_instances)
    else:
        chunks = [(vocabulary, chunk)
                  for chunk in _chunked(work, settings.workers)]
        with multiprocessing.Pool(settings.workers) as pool:
            shards = list(pool.imap(_count_chunk, chunks))
        store = reduce(merge, shards, EditInstanceStore(vocabulary))
    save_store_path(store, args.out)
    articles = {corpus.value: store.corpus(corpus).articles for corpus in Corpus}
    _say(f"count: {len(instances)} instances over {articles['complex']} complex "
         f"and {articles['simple']} simple articles, "
         f"{len(vocabulary)} source phrases -> {args.out}")
    return 0


def _read_simple_instances(paths: Sequence[str]) -> list[LexicalEditInstance]:
    instances: list[LexicalEditInstance] = []
    for path in paths:
        with open(_require(path), "r", encoding="utf-8") as handle:
            instances.extend(inst for inst in read_instances(handle)
                             if inst.corpus is Corpus.SIMPLE)
    return instances


def _cmd_rank(args: argparse.Namespace) -> int:
    settings = _resolve(args)
    method = Method(args.method.replace("-", "_"))
    meta = {"method": method.value, "top_k": settings.top_k}

    if method is Method.EDIT_MODEL:
        if not args.store:
            raise CliUsageError("rank --method edit-model needs --store")
        config = ModelConfig(alpha=settings.alpha,
                             min_pair_freq=settings.min_pair_freq,
                             min_phrase_freq=settings.min_phrase_freq,
                             top_k=settings.top_k,
                             phrase_freq_kind=args.phrase_freq_kind)
        cands = rank_edit_model(load_store_path(_require(args.store)), config)
        meta.update(alpha=settings.alpha, min_pair_freq=settings.min_pair_freq,
                    min_phrase_freq=settings.min_phrase_freq,
                    phrase_freq_kind=args.phrase_freq_kind)
    else:
        if not args.instances:
            raise CliUsageError(f"rank --method {args.method} needs --instances")
        instances = _read_simple_instances(args.instances)
        if method is Method.SIMPL:
            try:
                matcher = TrustedCommentMatcher(settings.seed_patterns)
            except ValueError as exc:
                raise CliUsageError(str(exc)) from exc
            trusted = select_trusted(instances, matcher)
            cands = pmi_rank(trusted)[:settings.top_k]
            meta.update(patterns=",".join(settings.seed_patterns),
                        trusted=len(trusted))
        elif method is Method.FREQUENT:
            cands = baseline_frequent(instances, settings.top_k)
        else:
            cands = baseline_random(instances, settings.top_k,
                                    settings.rng_seed, weighted=args.weighted)
            meta.update(rng_seed=settings.rng_seed, weighted=args.weighted)

    meta["total_candidates"] = len(cands)
    write_candidates_path(cands, args.out, meta)
    _say(f"rank: {len(cands)} candidates via {method.value} -> {args.out}")
    return 0


def _load_ranked(paths: Sequence[str],
                 ) -> dict[str, list[SimplificationCandidate]]:
    ranked: dict[str, list[SimplificationCandidate]] = {}
    for path in paths:
        try:
            cands, meta = read_candidates_path(_require(path))
        except ValueError as exc:
            raise CliDataError(f"{path}: {exc}") from exc
        if not cands:
            raise CliDataError(f"no candidates in {path}")
        method = meta.get("method", cands[0].method.value)
        ranked.setdefault(method, []).extend(cands)
    return ranked


def _load_dictionary_arg(args: argparse.Namespace):
    if not args.dictionary:
        return None
    with open(_require(args.dictionary), "r", encoding="utf-8") as handle:
        if args.simple_words:
            with open(_require(args.simple_words), "r", encoding="utf-8") as words:
                return load_dictionary(handle, words)
        return load_dictionary(handle)


def _cmd_eval_batch(args: argparse.Namespace) -> int:
    settings = _resolve(args)
    ranked = _load_ranked(args.ranked)
    dictionary = _load_dictionary_arg(args)
    items = build_evaluation_batch(ranked, dictionary=dictionary,
                                   dictionary_sample=args.dictionary_sample,
                                   rng_seed=settings.rng_seed)
    with open(args.out, "w", encoding="utf-8") as out:
        write_batch(items, out)
    _say(f"eval batch: {len(items)} pairs from "
         f"{', '.join(sorted(ranked))} -> {args.out}")
    return 0


def _cmd_eval_report(args: argparse.Namespace) -> int:
    settings = _resolve(args)
    with open(_require(args.batch), "r", encoding="utf-8") as handle:
        items = read_batch(handle)
    with open(_require(args.judgments), "r", encoding="utf-8") as handle:
        judgments = read_judgments(handle)

    groups = sorted({g for votes in judgments.values() for _, _, g in votes})
    lines = ["== agreement =="]
    for group in groups:
        records = records_from_judgments(items, judgments, group)
        try:
            kappa = fleiss_kappa(records)
            lines.append(f"group {group}: kappa {kappa:.2f} over {len(records)} pairs")
        except ValueError as exc:
            lines.append(f"group {group}: kappa not computable ({exc})")

    # Precision verdicts come from the native judges when that group
    # exists, otherwise from everyone pooled.
    verdict_group = "native" if "native" in groups else None
    records = records_from_judgments(items, judgments, verdict_group)
    verdicts = verdicts_from_records(records)

    ranked = _load_ranked(args.ranked)
    dictionary = _load_dictionary_arg(args)
    lines.append("== precision ==")
    for method in sorted(ranked):
        cands = ranked[method][:settings.top_k]
        try:
            result = precision_at_k(cands, verdicts, settings.top_k)
        except MissingJudgmentError as exc:
            raise CliDataError(f"method {method}: {exc.args[0]}") from exc
        except ValueError as exc:
            lines.append(f"{method}: not scorable ({exc})")
            continue
        line = (f"{method}: {result.rendered} "
                f"[{result.correct}/{result.counted} of top {len(cands)}]")
        if dictionary is not None:
            novel = dictionary_overlap(cands, dictionary, verdicts)
            line += f", {int(novel * 100)}% of correct pairs novel"
        lines.append(line)

    lines.append("== full-scale reference ==")
    for name, rendered, note in FULL_SCALE_REFERENCE:
        suffix = f"  ({note})" if note else ""
        lines.append(f"{name}: {rendered}{suffix}")
    kappa_text = ", ".join(f"{name} {value:.2f}"
                           for name, value in FULL_SCALE_REFERENCE_KAPPA)
    lines.append(f"agreement: {kappa_text}")

    report = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as out:
            out.write(report)
        _say(f"eval report -> {args.out}")
    else:
        sys.stdout.write(report)
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--alpha", type=float)
    common.add_argument("--min-pair-freq", type=int, dest="min_pair_freq")
    common.add_argument("--min-phrase-freq", type=int, dest="min_phrase_freq")
    common.add_argument("--top-k", type=int, dest="top_k")
    common.add_argument("--seed-pattern", action="append", dest="seed_patterns",
                        help="trusted comment substring; repeatable")
    common.add_argument("--rng-seed", type=int, dest="rng_seed")
    common.add_argument("--workers", type=int)
    common.add_argument("--tau-align", type=float, dest="tau_align")
    common.add_argument("--tau-identical", type=float, dest="tau_identical")

    parser = _Parser(prog="simpledits",
                     description="Mine simplification rewrites from paired wikis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common],
                       help="generate ground-truth corpora")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--topics", type=int, default=50)
    p.add_argument("--revisions", type=int, default=3)
    p.add_argument("--phrases", type=int, default=None,
                   help="use only the first N planted phrases")
    p.add_argument("--distractors", action="store_true")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", parents=[common],
                       help="normalize a dump into the JSONL fixture format")
    p.add_argument("--input", required=True)
    p.add_argument("--corpus", required=True,
                   choices=[c.value for c in Corpus])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("extract", parents=[common],
                       help="extract lexical edit instances")
    p.add_argument("--complex", action="append", default=[],
                   help="complex-wiki fixture; repeatable")
    p.add_argument("--simple", action="append", default=[],
                   help="simple-wiki fixture; repeatable")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("count", parents=[common],
                       help="fold instances into a count store")
    p.add_argument("--complex", action="append", default=[])
    p.add_argument("--simple", action="append", default=[])
    p.add_argument("--instances", action="append", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("rank", parents=[common],
                       help="rank simplification candidates")
    p.add_argument("--method", required=True,
                   choices=["edit-model", "simpl", "frequent", "random"])
    p.add_argument("--store", help="count store (edit-model)")
    p.add_argument("--instances", action="append",
                   help="instance files (simpl, frequent, random)")
    p.add_argument("--weighted", action="store_true",
                   help="random: sample the occurrence multiset")
    p.add_argument("--phrase-freq-kind", choices=["topics", "instances"],
                   default="topics", dest="phrase_freq_kind")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("eval", help="judging batches and score reports")
    evalsub = p.add_subparsers(dest="eval_command", required=True)

    b = evalsub.add_parser("batch", parents=[common],
                           help="build a blind judging batch")
    b.add_argument("--ranked", action="append", required=True,
                   help="candidate file; repeatable")
    b.add_argument("--dictionary")
    b.add_argument("--simple-words", dest="simple_words")
    b.add_argument("--dictionary-sample", type=int, default=0,
                   dest="dictionary_sample")
    b.add_argument("--out", required=True)
    b.set_defaults(func=_cmd_eval_batch)

    r = evalsub.add_parser("report", parents=[common],
                           help="score judgments against candidate lists")
    r.add_argument("--batch", required=True)
    r.add_argument("--judgments", required=True)
    r.add_argument("--ranked", action="append", required=True)
    r.add_argument("--dictionary")
    r.add_argument("--simple-words", dest="simple_words")
    r.add_argument("--out")
    r.set_defaults(func=_cmd_eval_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliUsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except CliDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DumpParseError, StoreFormatError, LabelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: missing artifact: {exc.filename}", file=sys.stderr)
        return 2


def run() -> None:
    raise SystemExit(main())
