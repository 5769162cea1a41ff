"""Human judgment collection and scoring.

Judges see candidate pairs in random order and random orientation and
label each with one of five raw labels. Labels collapse to a three-way
space relative to the shown orientation: a "simpler" vote on a pair
shown forward, like a "more complex" vote on a pair shown reversed,
asserts the candidate simplifies; "equal" and "unrelated" deny it;
"?" abstains. A pair's verdict is the strict majority of its collapsed
votes, with majority abstention kept as UNSURE and everything else
without a strict majority discarded as NO_MAJORITY.

precision@K counts SIMPLIFICATION verdicts among the top K candidates
over a denominator that drops the discarded pairs, rendered the way the
results are conventionally quoted: ``77% (-0-1)`` means 0 pairs lacked
a majority and 1 was unsure.

File formats (TSV): judgments are ``pair_id<TAB>judge_id<TAB>label`` with
an optional fourth column naming the judge group (e.g. native); batch
manifests are ``pair_id<TAB>A<TAB>a<TAB>orientation<TAB>methods``;
dictionaries are ``complex<TAB>simple`` pairs.
"""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .candidates import SimplificationCandidate
from .extract import tokenize

# Precision@100 reported for the full multi-year dump runs, quoted in
# report footers for context; a desk-scale corpus cannot reproduce them.
FULL_SCALE_REFERENCE = (
    ("dictionary baseline", "86% (-0-0)", "2000 pairs"),
    ("edit_model", "77% (-0-1)", "1079 pairs, 62% of correct pairs novel"),
    ("simpl", "66% (-0-0)", "2970 pairs, 71% of correct pairs novel"),
    ("frequent", "17% (-1-7)", ""),
    ("random", "17% (-1-4)", ""),
)
FULL_SCALE_REFERENCE_KAPPA = (("native", 0.69), ("non_native", 0.49))


class LabelError(ValueError):
    """Unknown raw label or malformed judgment row."""


class RawLabel(str, Enum):
    SIMPLER = "simpler"
    MORE_COMPLEX = "more_complex"
    EQUAL = "equal"
    UNRELATED = "unrelated"
    UNSURE = "unsure"


_LABEL_ALIASES = {
    "simpler": RawLabel.SIMPLER,
    "more_complex": RawLabel.MORE_COMPLEX,
    "more complex": RawLabel.MORE_COMPLEX,
    "more-complex": RawLabel.MORE_COMPLEX,
    "complex": RawLabel.MORE_COMPLEX,
    "equal": RawLabel.EQUAL,
    "unrelated": RawLabel.UNRELATED,
    "unsure": RawLabel.UNSURE,
    "?": RawLabel.UNSURE,
}


def parse_raw_label(text: str) -> RawLabel:
    label = _LABEL_ALIASES.get(text.strip().lower())
    if label is None:
        raise LabelError(f"unknown label {text!r}")
    return label


class Orientation(str, Enum):
    FORWARD = "forward"    # shown as A -> a
    REVERSED = "reversed"  # shown as a -> A


class CollapsedLabel(str, Enum):
    SIMPLIFICATION = "simplification"
    NOT_SIMPLIFICATION = "not_simplification"
    UNSURE = "unsure"


class Verdict(str, Enum):
    SIMPLIFICATION = "simplification"
    NOT_SIMPLIFICATION = "not_simplification"
    UNSURE = "unsure"
    NO_MAJORITY = "no_majority"


COLLAPSED_LABELS = (CollapsedLabel.SIMPLIFICATION,
                    CollapsedLabel.NOT_SIMPLIFICATION,
                    CollapsedLabel.UNSURE)


def collapse_label(raw: RawLabel, orientation: Orientation) -> CollapsedLabel:
    """Fold a raw vote into the orientation-independent three-way space.

    "Simpler" affirms the candidate when the pair was shown forward;
    "more complex" affirms it when shown reversed (the judge saw the
    swapped pair get harder, i.e. the original direction simplifies).
    """
    if raw is RawLabel.UNSURE:
        return CollapsedLabel.UNSURE
    if raw is RawLabel.SIMPLER and orientation is Orientation.FORWARD:
        return CollapsedLabel.SIMPLIFICATION
    if raw is RawLabel.MORE_COMPLEX and orientation is Orientation.REVERSED:
        return CollapsedLabel.SIMPLIFICATION
    return CollapsedLabel.NOT_SIMPLIFICATION


@dataclass(frozen=True)
class AnnotationRecord:
    """All votes one judge group cast on one displayed pair."""

    pair: tuple[str, str]  # in candidate (A, a) order, not display order
    orientation: Orientation
    labels: tuple[tuple[str, RawLabel], ...]  # (judge_id, label)

    def __post_init__(self) -> None:
        if not self.labels:
            raise ValueError(f"pair {self.pair}: no labels")

    def collapsed(self) -> list[CollapsedLabel]:
        return [collapse_label(label, self.orientation) for _, label in self.labels]


@dataclass(frozen=True)
class JudgedPair:
    pair: tuple[str, str]
    verdict: Verdict


def majority_verdict(record: AnnotationRecord) -> JudgedPair:
    """Strict majority of collapsed votes; abstaining majority stays
    UNSURE, anything short of a strict majority is NO_MAJORITY."""
    votes = Counter(record.collapsed())
    label, top = votes.most_common(1)[0]
    if top * 2 <= len(record.labels):
        return JudgedPair(record.pair, Verdict.NO_MAJORITY)
    return JudgedPair(record.pair, Verdict(label.value))


@dataclass(frozen=True)
class PrecisionResult:
    correct: int
    counted: int          # K minus discarded pairs
    no_majority: int
    unsure: int

    @property
    def precision(self) -> float:
        return self.correct / self.counted

    @property
    def rendered(self) -> str:
        # percentage truncated, discards shown the conventional way
        return f"{int(self.precision * 100)}% (-{self.no_majority}-{self.unsure})"


class MissingJudgmentError(KeyError):
    pass


def precision_at_k(cands: Sequence[SimplificationCandidate],
                   verdicts: Mapping[tuple[str, str], Verdict],
                   k: int) -> PrecisionResult:
    """Score the top k candidates against pair verdicts.

    Every counted candidate must have a verdict. NO_MAJORITY and UNSURE
    pairs are discarded from the denominator; discarding all of them is
    an error rather than a NaN.
    """
    top = cands[:k]
    correct = no_majority = unsure = 0
    for cand in top:
        pair = (cand.source, cand.target)
        verdict = verdicts.get(pair)
        if verdict is None:
            raise MissingJudgmentError(f"pair {pair!r} has no judgment")
        if verdict is Verdict.NO_MAJORITY:
            no_majority += 1
        elif verdict is Verdict.UNSURE:
            unsure += 1
        elif verdict is Verdict.SIMPLIFICATION:
            correct += 1
    counted = len(top) - no_majority - unsure
    if counted <= 0:
        raise ValueError(f"all {len(top)} judged pairs were discarded")
    return PrecisionResult(correct=correct, counted=counted,
                           no_majority=no_majority, unsure=unsure)


def fleiss_kappa_table(table: Sequence[Sequence[int]]) -> float:
    """Fleiss' kappa from an items x categories count table.

    Every item must carry the same number of votes n >= 2. Perfect
    agreement returns exactly 1.0 (including the all-one-category case
    where chance agreement saturates).
    """
    if not table:
        raise ValueError("empty table")
    n = sum(table[0])
    if n < 2:
        raise ValueError(f"need at least 2 votes per item, got {n}")
    for i, row in enumerate(table):
        if sum(row) != n:
            raise ValueError(f"item {i} carries {sum(row)} votes, expected {n}")
    n_items = len(table)
    category_totals = [sum(row[j] for row in table) for j in range(len(table[0]))]
    p_chance = sum((t / (n_items * n)) ** 2 for t in category_totals)
    p_observed = sum((sum(c * c for c in row) - n) / (n * (n - 1)) for row in table) / n_items
    if p_observed >= 1.0:
        return 1.0
    return (p_observed - p_chance) / (1.0 - p_chance)


def fleiss_kappa(records: Sequence[AnnotationRecord],
                 categories: Sequence[CollapsedLabel] = COLLAPSED_LABELS) -> float:
    """Agreement over collapsed labels for one judge group."""
    index = {cat: i for i, cat in enumerate(categories)}
    table = []
    for record in records:
        row = [0] * len(categories)
        for label in record.collapsed():
            row[index[label]] += 1
        table.append(row)
    return fleiss_kappa_table(table)


# --- dictionary comparison --------------------------------------------------


def _normalize_phrase(text: str) -> str:
    return " ".join(t.lower() for t in tokenize(text))


@dataclass(frozen=True)
class TransformationDictionary:
    """External complex->simple pairs plus an optional simple-word list."""

    pairs: frozenset[tuple[str, str]]
    simple_words: frozenset[str] = frozenset()

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, str]],
                  simple_words: Iterable[str] = ()) -> "TransformationDictionary":
        return cls(
            pairs=frozenset((_normalize_phrase(a), _normalize_phrase(b))
                            for a, b in rows),
            simple_words=frozenset(_normalize_phrase(w) for w in simple_words))

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return (_normalize_phrase(pair[0]), _normalize_phrase(pair[1])) in self.pairs


def load_dictionary(handle, simple_words_handle=None) -> TransformationDictionary:
    rows = []
    for lineno, line in enumerate(handle, start=1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"dictionary line {lineno}: expected 2 columns")
        rows.append((parts[0], parts[1]))
    words = []
    if simple_words_handle is not None:
        words = [w.strip() for w in simple_words_handle if w.strip()]
    return TransformationDictionary.from_rows(rows, words)


def dictionary_overlap(cands: Sequence[SimplificationCandidate],
                       dictionary: TransformationDictionary,
                       verdicts: Mapping[tuple[str, str], Verdict]) -> float:
    """Fraction of judged-correct candidates the dictionary lacks.

    1.0 means every correct pair is novel; candidates without verdicts
    are ignored; no correct pairs at all yields 0.0.
    """
    correct = [cand for cand in cands
               if verdicts.get((cand.source, cand.target)) is Verdict.SIMPLIFICATION]
    if not correct:
        return 0.0
    novel = sum(1 for cand in correct if (cand.source, cand.target) not in dictionary)
    return novel / len(correct)


# --- evaluation batches -------------------------------------------------------


@dataclass(frozen=True)
class BatchItem:
    pair_id: str
    source: str
    target: str
    orientation: Orientation
    methods: tuple[str, ...]  # provenance, sorted; "dictionary" for samples

    @property
    def shown(self) -> tuple[str, str]:
        if self.orientation is Orientation.FORWARD:
            return (self.source, self.target)
        return (self.target, self.source)


def build_evaluation_batch(ranked: Mapping[str, Sequence[SimplificationCandidate]],
                           dictionary: TransformationDictionary | None = None,
                           dictionary_sample: int = 0,
                           rng_seed: int = 0) -> list[BatchItem]:
    """Union the per-method lists into one blind judging batch.

    Pairs proposed by several methods appear once with merged
    provenance. Presentation order is shuffled and each pair's shown
    orientation is a fair coin, all driven by rng_seed.
    """
    provenance: dict[tuple[str, str], set[str]] = defaultdict(set)
    for method, cands in ranked.items():
        for cand in cands:
            provenance[(cand.source, cand.target)].add(method)
    if dictionary_sample and dictionary is not None:
        rng = random.Random(f"{rng_seed}/dictionary")
        population = sorted(dictionary.pairs)
        for pair in rng.sample(population, min(dictionary_sample, len(population))):
            provenance[pair].add("dictionary")

    rng = random.Random(f"{rng_seed}/batch")
    pairs = sorted(provenance)
    rng.shuffle(pairs)
    width = max(4, len(str(len(pairs))))
    items = []
    for i, pair in enumerate(pairs, start=1):
        orientation = Orientation.FORWARD if rng.random() < 0.5 else Orientation.REVERSED
        items.append(BatchItem(
            pair_id=f"q{i:0{width}d}", source=pair[0], target=pair[1],
            orientation=orientation, methods=tuple(sorted(provenance[pair]))))
    return items


def write_batch(items: Sequence[BatchItem], handle) -> None:
    handle.write("pair_id\tA\ta\torientation\tmethods\n")
    for item in items:
        handle.write("\t".join((item.pair_id, item.source, item.target,
                                item.orientation.value, ",".join(item.methods))) + "\n")


def read_batch(handle) -> list[BatchItem]:
    items = []
    for lineno, line in enumerate(handle, start=1):
        line = line.rstrip("\n")
        if not line or line.startswith("pair_id\t"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ValueError(f"batch line {lineno}: expected 5 columns")
        items.append(BatchItem(
            pair_id=parts[0], source=parts[1], target=parts[2],
            orientation=Orientation(parts[3]),
            methods=tuple(m for m in parts[4].split(",") if m)))
    return items


def read_judgments(handle) -> dict[str, list[tuple[str, RawLabel, str]]]:
    """pair_id -> [(judge_id, label, group)]; group defaults to "all"."""
    out: dict[str, list[tuple[str, RawLabel, str]]] = defaultdict(list)
    for lineno, line in enumerate(handle, start=1):
        line = line.rstrip("\n")
        if not line or line.startswith("#") or line.startswith("pair_id\t"):
            continue
        parts = line.split("\t")
        if len(parts) not in (3, 4):
            raise LabelError(f"judgment line {lineno}: expected 3 or 4 columns")
        group = parts[3] if len(parts) == 4 else "all"
        out[parts[0]].append((parts[1], parse_raw_label(parts[2]), group))
    return dict(out)


def records_from_judgments(items: Sequence[BatchItem],
                           judgments: Mapping[str, Sequence[tuple[str, RawLabel, str]]],
                           group: str | None = None) -> list[AnnotationRecord]:
    """Join batch items with their votes, optionally one judge group."""
    records = []
    for item in items:
        votes = judgments.get(item.pair_id, ())
        labels = tuple((judge, label) for judge, label, g in votes
                       if group is None or g == group)
        if labels:
            records.append(AnnotationRecord(pair=(item.source, item.target),
                                            orientation=item.orientation,
                                            labels=labels))
    return records


def verdicts_from_records(records: Sequence[AnnotationRecord],
                          ) -> dict[tuple[str, str], Verdict]:
    return {record.pair: majority_verdict(record).verdict for record in records}
