"""Lexical edit extraction from adjacent revision pairs.

For each pair of adjacent revisions the two texts are split into
sentences, sentences are aligned by tf-idf cosine similarity, and each
aligned (but not identical) pair is diffed down to its longest differing
token segment. Segments of one to five tokens on both sides become
candidate lexical edits; pure insertions, pure deletions and longer
rewrites are discarded.
"""

from __future__ import annotations

import json
import math
import re
import string
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .ingest import Corpus, VersionSequence

TAU_ALIGN = 0.5
TAU_IDENTICAL = 1.0
MAX_PHRASE_TOKENS = 5

_PUNCT = set(string.punctuation)

# words whose trailing period does not end a sentence
_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "prof", "rev", "gen", "sen", "st", "sr", "jr",
    "vs", "etc", "e.g", "i.e", "cf", "al", "inc", "ltd", "co", "corp",
    "dept", "est", "fig", "approx", "u.s", "u.k", "u.n",
}


def tokenize(text: str) -> list[str]:
    """Split on whitespace, peeling leading and trailing punctuation
    characters off into their own tokens."""
    tokens: list[str] = []
    for chunk in text.split():
        lead: list[str] = []
        while chunk and chunk[0] in _PUNCT:
            lead.append(chunk[0])
            chunk = chunk[1:]
        trail: list[str] = []
        while chunk and chunk[-1] in _PUNCT:
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


@dataclass(frozen=True)
class Sentence:
    """Tokenized sentence; ``lower`` is the comparison form."""

    tokens: tuple[str, ...]
    lower: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("sentence must carry at least one token")
        object.__setattr__(self, "lower", tuple(t.lower() for t in self.tokens))


_BOUNDARY_RE = re.compile(r"[.!?]+")
_LAST_WORD_RE = re.compile(r"(\S+)\Z")


def _ends_with_abbreviation(prefix: str) -> bool:
    m = _LAST_WORD_RE.search(prefix)
    if not m:
        return False
    word = m.group(1).rstrip(".").lstrip("(\"'")
    if not word:
        return False
    if len(word) == 1 and word.isalpha():
        return True  # initials such as "J."
    return word.lower() in _ABBREVIATIONS


def split_sentences(text: str) -> list[Sentence]:
    """Deterministic sentence segmentation.

    A run of ``.``, ``!`` or ``?`` ends a sentence when followed by
    whitespace and a capital letter, or by end of text; a trailing period
    on a known abbreviation or a single initial does not. Token content
    is preserved: concatenating the returned sentences' tokens equals
    tokenize(text).
    """
    sentences: list[Sentence] = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        end = m.end()
        rest = text[end:]
        stripped = rest.lstrip()
        if stripped:
            if len(stripped) == len(rest):
                continue  # no whitespace after the punctuation
            if not stripped[0].isupper():
                continue
        if "." in m.group(0) and "!" not in m.group(0) and "?" not in m.group(0) \
                and _ends_with_abbreviation(text[:m.start()]):
            continue
        toks = tokenize(text[start:end])
        if toks:
            sentences.append(Sentence(tokens=tuple(toks)))
            start = end
    toks = tokenize(text[start:])
    if toks:
        sentences.append(Sentence(tokens=tuple(toks)))
    return sentences


def _idf_table(docs: Sequence[tuple[str, ...]]) -> dict[str, float]:
    n_docs = len(docs)
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc))
    # +1 keeps ubiquitous terms from zeroing whole vectors
    return {t: 1.0 + math.log(n_docs / c) for t, c in df.items()}


def _tfidf(tokens: tuple[str, ...], idf: dict[str, float]) -> tuple[dict[str, float], float]:
    vec = {t: c * idf[t] for t, c in Counter(tokens).items()}
    norm = math.sqrt(sum(w * w for w in vec.values()))
    return vec, norm


def _cosine(va: dict[str, float], na: float, vb: dict[str, float], nb: float) -> float:
    if len(va) > len(vb):
        va, vb = vb, va
    dot = sum(w * vb.get(t, 0.0) for t, w in va.items())
    if dot <= 0.0:
        return 0.0
    return min(1.0, dot / (na * nb))


def align_sentences(old_sentences: Sequence[Sentence],
                    new_sentences: Sequence[Sentence],
                    tau_align: float = TAU_ALIGN) -> list[tuple[int, int, float]]:
    """Match sentences across two versions, greedy best-first.

    Exactly equal sentences (case-folded) pair up first at similarity
    1.0, lowest indices first. Remaining pairs are scored by cosine
    similarity of tf-idf vectors, document frequencies taken over the
    union of both versions' sentences, and accepted best-first while both
    sides are unused. Pairs under ``tau_align`` stay unmatched. Returns
    (old_index, new_index, similarity) sorted by old index.
    """
    if not old_sentences or not new_sentences:
        return []
    matches: list[tuple[int, int, float]] = []
    used_old: set[int] = set()
    used_new: set[int] = set()

    by_tokens: dict[tuple[str, ...], list[int]] = defaultdict(list)
    for j, sent in enumerate(new_sentences):
        by_tokens[sent.lower].append(j)
    for stack in by_tokens.values():
        stack.reverse()  # so pop() yields the lowest new index
    for i, sent in enumerate(old_sentences):
        stack = by_tokens.get(sent.lower)
        if stack:
            j = stack.pop()
            used_old.add(i)
            used_new.add(j)
            matches.append((i, j, 1.0))

    rem_old = [i for i in range(len(old_sentences)) if i not in used_old]
    rem_new = [j for j in range(len(new_sentences)) if j not in used_new]
    if rem_old and rem_new:
        docs = [s.lower for s in old_sentences] + [s.lower for s in new_sentences]
        idf = _idf_table(docs)
        old_vecs = {i: _tfidf(old_sentences[i].lower, idf) for i in rem_old}
        new_vecs = {j: _tfidf(new_sentences[j].lower, idf) for j in rem_new}
        scored: list[tuple[float, int, int]] = []
        for i in rem_old:
            va, na = old_vecs[i]
            for j in rem_new:
                vb, nb = new_vecs[j]
                sim = _cosine(va, na, vb, nb)
                if sim >= tau_align:
                    scored.append((-sim, i, j))
        scored.sort()
        for neg_sim, i, j in scored:
            if i in used_old or j in used_new:
                continue
            used_old.add(i)
            used_new.add(j)
            matches.append((i, j, -neg_sim))

    matches.sort(key=lambda m: (m[0], m[1]))
    return matches


@dataclass(frozen=True)
class LexicalEditInstance:
    """One observed rewrite of a short phrase, with provenance."""

    source_phrase: tuple[str, ...]
    target_phrase: tuple[str, ...]
    article_id: str
    revision_index: int
    corpus: Corpus
    comment: str | None = None

    def __post_init__(self) -> None:
        for side, phrase in (("source", self.source_phrase), ("target", self.target_phrase)):
            if not 1 <= len(phrase) <= MAX_PHRASE_TOKENS:
                raise ValueError(f"{side} phrase must be 1..{MAX_PHRASE_TOKENS} tokens, "
                                 f"got {len(phrase)}")
        if self.source_key == self.target_key:
            raise ValueError(f"source and target coincide: {self.source_key!r}")

    @property
    def source_key(self) -> str:
        return " ".join(t.lower() for t in self.source_phrase)

    @property
    def target_key(self) -> str:
        return " ".join(t.lower() for t in self.target_phrase)


def extract_edit_instance(old_sentence: Sentence, new_sentence: Sentence,
                          article_id: str = "", revision_index: int = 0,
                          corpus: Corpus = Corpus.SIMPLE,
                          comment: str | None = None,
                          max_tokens: int = MAX_PHRASE_TOKENS) -> LexicalEditInstance | None:
    """Diff an aligned sentence pair down to one candidate edit.

    Strips the longest common token prefix, then the longest common
    suffix of what remains (comparison is case-folded; emitted phrases
    keep each side's surface form). The differing middle becomes an
    instance when both sides hold 1..max_tokens tokens; otherwise None.
    """
    lo, ln = old_sentence.lower, new_sentence.lower
    if lo == ln:
        return None
    limit = min(len(lo), len(ln))
    p = 0
    while p < limit and lo[p] == ln[p]:
        p += 1
    s = 0
    while s < limit - p and lo[len(lo) - 1 - s] == ln[len(ln) - 1 - s]:
        s += 1
    source = old_sentence.tokens[p:len(lo) - s]
    target = new_sentence.tokens[p:len(ln) - s]
    if not source or not target:
        return None  # pure insertion or deletion
    if len(source) > max_tokens or len(target) > max_tokens:
        return None
    return LexicalEditInstance(
        source_phrase=source, target_phrase=target, article_id=article_id,
        revision_index=revision_index, corpus=corpus, comment=comment)


def extract_from_sequence(seq: VersionSequence,
                          tau_align: float = TAU_ALIGN,
                          tau_identical: float = TAU_IDENTICAL,
                          max_tokens: int = MAX_PHRASE_TOKENS,
                          ) -> list[tuple[int, list[LexicalEditInstance]]]:
    """Extract edits from every adjacent revision pair of a sequence.

    Returns one (revision_index, instances) group per revision after the
    first; instances carry the newer revision's comment so metadata
    methods can pair edits with edit summaries. Expects a sequence
    already run through filter_textual_changes (unfiltered input merely
    yields empty groups for unchanged revisions).
    """
    groups: list[tuple[int, list[LexicalEditInstance]]] = []
    prev = split_sentences(seq.revisions[0].text)
    for rev in seq.revisions[1:]:
        cur = split_sentences(rev.text)
        instances: list[LexicalEditInstance] = []
        for i, j, sim in align_sentences(prev, cur, tau_align):
            if sim >= tau_identical or prev[i].lower == cur[j].lower:
                continue
            inst = extract_edit_instance(
                prev[i], cur[j], article_id=seq.article_id,
                revision_index=rev.revision_index, corpus=seq.corpus,
                comment=rev.comment, max_tokens=max_tokens)
            if inst is not None:
                instances.append(inst)
        groups.append((rev.revision_index, instances))
        prev = cur
    return groups


# --- instance interchange -------------------------------------------------


def write_instances(instances: Iterable[LexicalEditInstance], handle) -> int:
    """One JSON object per instance; A and a keep surface casing."""
    rows = 0
    for inst in instances:
        handle.write(json.dumps({
            "corpus": inst.corpus.value,
            "article_id": inst.article_id,
            "revision_index": inst.revision_index,
            "comment": inst.comment,
            "A": " ".join(inst.source_phrase),
            "a": " ".join(inst.target_phrase),
        }, ensure_ascii=False) + "\n")
        rows += 1
    return rows


def read_instances(handle) -> Iterator[LexicalEditInstance]:
    for lineno, line in enumerate(handle, start=1):
        if not line.strip():
            continue
        row = json.loads(line)
        try:
            yield LexicalEditInstance(
                source_phrase=tuple(str(row["A"]).split()),
                target_phrase=tuple(str(row["a"]).split()),
                article_id=str(row["article_id"]),
                revision_index=int(row["revision_index"]),
                corpus=Corpus(row["corpus"]),
                comment=row.get("comment"),
            )
        except (KeyError, ValueError) as exc:
            raise ValueError(f"bad instance row on line {lineno}: {exc}") from exc
