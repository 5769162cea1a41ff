"""Aggregated edit counts over both corpora.

Counting is topic-level where the estimators need it to be: an article
(version sequence) contributes at most one count to ``topics_containing``
and ``topics_modifying`` per phrase, while ``pair_count`` keeps every
instance occurrence. Containment is counted for phrases in the store's
vocabulary, which callers build first from all extracted instances
(both corpora), so run :func:`collect_source_vocabulary` before
:func:`accumulate`.

Snapshots are sorted four-column TSV, ``corpus<TAB>kind<TAB>key<TAB>count``,
so shards diff cleanly. Pair keys join the two phrases with ``" => "``,
which cannot occur inside a phrase (tokens never glue ``=`` to ``>``).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .extract import LexicalEditInstance, tokenize
from .ingest import Corpus, VersionSequence

_PAIR_SEP = " => "


class StoreFormatError(ValueError):
    """Snapshot rows that do not parse or violate count invariants."""


@dataclass
class CorpusCounts:
    articles: int = 0
    topics_containing: Counter = field(default_factory=Counter)
    topics_modifying: Counter = field(default_factory=Counter)
    pair_count: Counter = field(default_factory=Counter)
    source_total: Counter = field(default_factory=Counter)

    def merged(self, other: "CorpusCounts") -> "CorpusCounts":
        return CorpusCounts(
            articles=self.articles + other.articles,
            topics_containing=self.topics_containing + other.topics_containing,
            topics_modifying=self.topics_modifying + other.topics_modifying,
            pair_count=self.pair_count + other.pair_count,
            source_total=self.source_total + other.source_total,
        )


class EditInstanceStore:
    """Mergeable per-corpus counts keyed by normalized phrase strings."""

    def __init__(self, vocabulary: Iterable[str] = ()):
        self.vocabulary = frozenset(vocabulary)
        self.counts: dict[Corpus, CorpusCounts] = {
            Corpus.COMPLEX: CorpusCounts(),
            Corpus.SIMPLE: CorpusCounts(),
        }
        self._index: dict[str, list[tuple[str, ...]]] | None = None

    def corpus(self, corpus: Corpus) -> CorpusCounts:
        return self.counts[corpus]

    def phrase_index(self) -> dict[str, list[tuple[str, ...]]]:
        # first token -> phrase token tuples, for the containment scan
        if self._index is None:
            index: dict[str, list[tuple[str, ...]]] = {}
            for key in self.vocabulary:
                tokens = tuple(key.split())
                index.setdefault(tokens[0], []).append(tokens)
            self._index = index
        return self._index

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_index"] = None  # rebuilt lazily; keeps pickles small
        return state


def collect_source_vocabulary(instances: Iterable[LexicalEditInstance]) -> set[str]:
    """Pass one: every phrase that appears as an edit source anywhere."""
    return {inst.source_key for inst in instances}


def _contained_phrases(store: EditInstanceStore, seq: VersionSequence) -> set[str]:
    index = store.phrase_index()
    want = len(store.vocabulary)
    found: set[str] = set()
    for rev in seq.revisions:
        tokens = [t.lower() for t in tokenize(rev.text)]
        for pos, tok in enumerate(tokens):
            for phrase in index.get(tok, ()):
                if len(found) == want:
                    return found
                end = pos + len(phrase)
                if end <= len(tokens) and tuple(tokens[pos:end]) == phrase:
                    found.add(" ".join(phrase))
        if len(found) == want:
            break
    return found


def accumulate(store: EditInstanceStore, seq: VersionSequence,
               instances: Iterable[LexicalEditInstance]) -> EditInstanceStore:
    """Fold one article's extracted instances into the store.

    Containment is scanned over every revision's token stream at word
    boundaries. Instance sources must already be in the vocabulary; a
    miss means the vocabulary pass skipped this input.
    """
    instances = list(instances)
    counts = store.corpus(seq.corpus)
    counts.articles += 1

    sources = {inst.source_key for inst in instances}
    stray = sources - store.vocabulary
    if stray:
        raise ValueError(f"instance sources missing from vocabulary: {sorted(stray)[:3]}")
    for key in sources:
        counts.topics_modifying[key] += 1
    for inst in instances:
        counts.pair_count[(inst.source_key, inst.target_key)] += 1
        counts.source_total[inst.source_key] += 1
    for key in _contained_phrases(store, seq):
        counts.topics_containing[key] += 1
    return store


def merge(left: EditInstanceStore, right: EditInstanceStore) -> EditInstanceStore:
    """Pointwise sum of two shards; commutative and associative."""
    out = EditInstanceStore(left.vocabulary | right.vocabulary)
    for corpus in Corpus:
        out.counts[corpus] = left.corpus(corpus).merged(right.corpus(corpus))
    return out


# --- persistence -----------------------------------------------------------


def save_store(store: EditInstanceStore, handle) -> None:
    rows: list[tuple[str, str, str, int]] = []
    for corpus in Corpus:
        counts = store.corpus(corpus)
        rows.append((corpus.value, "articles", "*", counts.articles))
        rows.extend((corpus.value, "containing", k, c)
                    for k, c in counts.topics_containing.items())
        rows.extend((corpus.value, "modifying", k, c)
                    for k, c in counts.topics_modifying.items())
        rows.extend((corpus.value, "pair", f"{a}{_PAIR_SEP}{b}", c)
                    for (a, b), c in counts.pair_count.items())
    rows.sort()
    for row in rows:
        handle.write("\t".join((*row[:3], str(row[3]))) + "\n")


def load_store(handle) -> EditInstanceStore:
    """Read a snapshot back, validating counts as it goes.

    ``source_total`` is recomputed from pair rows and the vocabulary is
    recovered as the set of pair sources, which loses nothing: every
    vocabulary phrase was the source of at least one instance.
    """
    store = EditInstanceStore()
    for lineno, line in enumerate(handle, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise StoreFormatError(f"line {lineno}: expected 4 columns, got {len(parts)}")
        corpus_tag, kind, key, raw_count = parts
        try:
            corpus = Corpus(corpus_tag)
        except ValueError as exc:
            raise StoreFormatError(f"line {lineno}: unknown corpus {corpus_tag!r}") from exc
        try:
            count = int(raw_count)
        except ValueError as exc:
            raise StoreFormatError(f"line {lineno}: bad count {raw_count!r}") from exc
        if count < 0:
            raise StoreFormatError(f"line {lineno}: negative count {count}")
        counts = store.corpus(corpus)
        if kind == "articles":
            counts.articles += count
        elif kind == "containing":
            counts.topics_containing[key] += count
        elif kind == "modifying":
            counts.topics_modifying[key] += count
        elif kind == "pair":
            if _PAIR_SEP not in key:
                raise StoreFormatError(f"line {lineno}: pair key lacks separator: {key!r}")
            src, tgt = key.split(_PAIR_SEP, 1)
            counts.pair_count[(src, tgt)] += count
            counts.source_total[src] += count
        else:
            raise StoreFormatError(f"line {lineno}: unknown kind {kind!r}")

    vocabulary: set[str] = set()
    for corpus in Corpus:
        vocabulary.update(src for src, _ in store.corpus(corpus).pair_count)
    store.vocabulary = frozenset(vocabulary)

    for corpus in Corpus:
        counts = store.corpus(corpus)
        for key, modifying in counts.topics_modifying.items():
            if modifying > counts.topics_containing.get(key, 0):
                raise StoreFormatError(
                    f"{corpus.value}: phrase {key!r} modified in {modifying} topics "
                    f"but contained in {counts.topics_containing.get(key, 0)}")
        if counts.articles:
            top = max(counts.topics_containing.values(), default=0)
            if top > counts.articles:
                raise StoreFormatError(
                    f"{corpus.value}: containment count {top} exceeds "
                    f"{counts.articles} articles")
    return store


def save_store_path(store: EditInstanceStore, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        save_store(store, handle)


def load_store_path(path: str) -> EditInstanceStore:
    with open(path, "r", encoding="utf-8") as handle:
        return load_store(handle)
