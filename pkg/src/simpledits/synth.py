"""Synthetic two-wiki corpora with known ground truth.

Every generated topic contains one host sentence per planted phrase
(plus optional distractor sentences), so phrase containment is total by
construction and the per-topic edit fractions converge to the planted
rates. Per topic, each phrase draws at most one operation: on the
complex wiki a fix with probability fix_rate; on the simple wiki a fix
with probability alpha * fix_rate or a simplification with probability
simplify_rate (mutually exclusive). Each operation lands on one
uniformly chosen revision slot and replaces the phrase with a target
drawn from the planted distribution; fix slots get mundane edit
comments, simplification slots get comments that mention simplifying.

Host sentences pad each phrase with filler words that are unique within
the article, which keeps the edited sentence pair unambiguous for the
aligner. Generation is a pure function of the spec, so the same seed is
byte-identical, and per-topic derived seeds keep it embarrassingly
parallel.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .ingest import Corpus, Revision, VersionSequence

_SIMPLIFY_COMMENTS = ("simplify wording", "Simplified the sentence",
                      "simplify", "make this simpler")
_FIX_COMMENTS = ("fix typo", "copyedit", "grammar fix", "corrected term")
_NOOP_COMMENTS = ("formatting", "minor cleanup", "category maintenance")

_SYLLABLES = ("ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du",
              "fa", "fe", "fi", "fo", "fu", "ga", "ge", "gi", "go", "gu",
              "ka", "ke", "ki", "ko", "ku", "la", "le", "li", "lo", "lu",
              "ma", "me", "mi", "mo", "mu", "na", "ne", "ni", "no", "nu",
              "pa", "pe", "pi", "po", "pu", "ra", "re", "ri", "ro", "ru",
              "sa", "se", "si", "so", "su", "ta", "te", "ti", "to", "tu",
              "va", "ve", "vi", "vo", "vu", "za", "ze", "zi", "zo", "zu")
# 70^2 = 4900 nonsense filler words, none of them English
_FILLER_POOL = tuple(a + b for a, b in itertools.product(_SYLLABLES, _SYLLABLES))
_FILLERS_PER_SENTENCE = 10


@dataclass(frozen=True)
class PhrasePlan:
    """Planted behaviour of one source phrase."""

    phrase: str
    fix_rate: float                      # complex-wiki per-topic edit chance
    simplify_rate: float                 # simple-wiki per-topic simplification chance
    fix_targets: dict[str, float]
    simplify_targets: dict[str, float]

    def __post_init__(self) -> None:
        if not 1 <= len(self.phrase.split()) <= 5:
            raise ValueError(f"phrase {self.phrase!r} must be 1..5 tokens")
        for name, rate in (("fix_rate", self.fix_rate),
                           ("simplify_rate", self.simplify_rate)):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{self.phrase!r}: {name} {rate} outside [0, 1]")
        if self.fix_rate + self.simplify_rate > 1.0 + 1e-12:
            raise ValueError(f"{self.phrase!r}: operation rates sum past 1")
        for name, dist in (("fix_targets", self.fix_targets),
                           ("simplify_targets", self.simplify_targets)):
            if not dist:
                raise ValueError(f"{self.phrase!r}: {name} is empty")
            if abs(sum(dist.values()) - 1.0) > 1e-9:
                raise ValueError(f"{self.phrase!r}: {name} must sum to 1")
            for target, weight in dist.items():
                if weight < 0:
                    raise ValueError(f"{self.phrase!r}: negative weight on {target!r}")
                if not 1 <= len(target.split()) <= 5:
                    raise ValueError(f"target {target!r} must be 1..5 tokens")
                if target == self.phrase:
                    raise ValueError(f"{self.phrase!r}: target equals the phrase")

    @property
    def modal_simplification(self) -> str:
        return min(self.simplify_targets, key=lambda t: (-self.simplify_targets[t], t))


@dataclass(frozen=True)
class GeneratorSpec:
    phrases: tuple[PhrasePlan, ...]
    topics_per_corpus: int = 50
    revisions_per_topic: int = 3  # edit slots after the initial revision
    rng_seed: int = 0
    alpha: float = 1.0
    distractors: bool = False

    def __post_init__(self) -> None:
        if not self.phrases:
            raise ValueError("spec needs at least one phrase")
        seen = set()
        for plan in self.phrases:
            if plan.phrase in seen:
                raise ValueError(f"duplicate phrase {plan.phrase!r}")
            seen.add(plan.phrase)
        if self.topics_per_corpus < 1:
            raise ValueError("topics_per_corpus must be positive")
        if self.revisions_per_topic < 1:
            raise ValueError("revisions_per_topic must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        for plan in self.phrases:
            if self.alpha * plan.fix_rate + plan.simplify_rate > 1.0 + 1e-12:
                raise ValueError(f"{plan.phrase!r}: simple-wiki rates sum past 1")


@dataclass(frozen=True)
class PhraseTruth:
    """Ground truth row written next to the generated corpora."""

    phrase: str
    fix_rate: float
    simplify_rate: float
    modal_simplification: str
    fix_targets: dict[str, float]
    simplify_targets: dict[str, float]


def _weighted_choice(rng: random.Random, dist: dict[str, float]) -> str:
    targets = sorted(dist)
    weights = [dist[t] for t in targets]
    return rng.choices(targets, weights=weights, k=1)[0]


def _host_sentence(phrase: str, fillers: Sequence[str]) -> str:
    return (f"The {phrase} marker stays near the "
            + " ".join(fillers) + " area.")


def _distractor_sentence(fillers: Sequence[str]) -> str:
    return "Records mention the " + " ".join(fillers) + " field."


def _generate_topic(spec: GeneratorSpec, corpus: Corpus, topic: int) -> VersionSequence:
    rng = random.Random(f"{spec.rng_seed}/{corpus.value}/{topic}")
    n_phrases = len(spec.phrases)
    n_distract = 2 if spec.distractors else 0
    need = (n_phrases + n_distract) * _FILLERS_PER_SENTENCE + spec.revisions_per_topic
    fillers = rng.sample(_FILLER_POOL, need)

    sentences = []
    for i, plan in enumerate(spec.phrases):
        start = i * _FILLERS_PER_SENTENCE
        sentences.append(_host_sentence(
            plan.phrase, fillers[start:start + _FILLERS_PER_SENTENCE]))
    for d in range(n_distract):
        start = (n_phrases + d) * _FILLERS_PER_SENTENCE
        sentences.append(_distractor_sentence(
            fillers[start:start + _FILLERS_PER_SENTENCE]))
    spare = fillers[(n_phrases + n_distract) * _FILLERS_PER_SENTENCE:]

    # slot -> list of (sentence index, replacement op) applied at that slot
    schedule: dict[int, list[tuple[int, str, str, str]]] = {}
    for i, plan in enumerate(spec.phrases):
        roll = rng.random()
        if corpus is Corpus.COMPLEX:
            op = "fix" if roll < plan.fix_rate else None
        else:
            fix_band = spec.alpha * plan.fix_rate
            if roll < fix_band:
                op = "fix"
            elif roll < fix_band + plan.simplify_rate:
                op = "simplify"
            else:
                op = None
        if op is None:
            continue
        dist = plan.fix_targets if op == "fix" else plan.simplify_targets
        target = _weighted_choice(rng, dist)
        slot = rng.randint(1, spec.revisions_per_topic)
        schedule.setdefault(slot, []).append((i, op, plan.phrase, target))
    if spec.distractors:
        for d in range(n_distract):
            if rng.random() < 0.5:
                slot = rng.randint(1, spec.revisions_per_topic)
                sent_idx = n_phrases + d
                old_word = fillers[sent_idx * _FILLERS_PER_SENTENCE + 3]
                schedule.setdefault(slot, []).append(
                    (sent_idx, "fix", old_word, spare[slot - 1]))

    article_id = f"{corpus.value[0]}{topic:06d}"
    title = f"Synthetic topic {corpus.value} {topic}"
    current = list(sentences)
    revisions = [Revision(article_id=article_id, revision_index=0,
                          text=" ".join(current), comment="created page")]
    for slot in range(1, spec.revisions_per_topic + 1):
        ops = schedule.get(slot, [])
        for sent_idx, _, old, new in ops:
            current[sent_idx] = current[sent_idx].replace(old, new, 1)
        if any(op == "simplify" for _, op, _, _ in ops):
            comment = rng.choice(_SIMPLIFY_COMMENTS)
        elif ops:
            comment = rng.choice(_FIX_COMMENTS)
        else:
            comment = rng.choice(_NOOP_COMMENTS)
        revisions.append(Revision(article_id=article_id, revision_index=slot,
                                  text=" ".join(current), comment=comment))
    return VersionSequence(article_id=article_id, title=title, corpus=corpus,
                           revisions=tuple(revisions))


def generate(spec: GeneratorSpec) -> tuple[list[VersionSequence],
                                           list[VersionSequence],
                                           list[PhraseTruth]]:
    """Build both corpora and the ground truth table."""
    complex_seqs = [_generate_topic(spec, Corpus.COMPLEX, t)
                    for t in range(spec.topics_per_corpus)]
    simple_seqs = [_generate_topic(spec, Corpus.SIMPLE, t)
                   for t in range(spec.topics_per_corpus)]
    truth = [PhraseTruth(phrase=plan.phrase, fix_rate=plan.fix_rate,
                         simplify_rate=plan.simplify_rate,
                         modal_simplification=plan.modal_simplification,
                         fix_targets=dict(plan.fix_targets),
                         simplify_targets=dict(plan.simplify_targets))
             for plan in spec.phrases]
    return complex_seqs, simple_seqs, truth


def _format_dist(dist: dict[str, float]) -> str:
    return "|".join(f"{t}:{dist[t]:g}" for t in sorted(dist))


def write_ground_truth(truth: Iterable[PhraseTruth], handle) -> None:
    handle.write("phrase\tfix_rate\tsimplify_rate\tmodal_simplification"
                 "\tfix_targets\tsimplify_targets\n")
    for row in truth:
        handle.write("\t".join((
            row.phrase, f"{row.fix_rate:g}", f"{row.simplify_rate:g}",
            row.modal_simplification, _format_dist(row.fix_targets),
            _format_dist(row.simplify_targets))) + "\n")


def read_ground_truth(handle) -> list[PhraseTruth]:
    rows = []
    for line in handle:
        line = line.rstrip("\n")
        if not line or line.startswith("phrase\t"):
            continue
        phrase, fix_rate, simplify_rate, modal, fix_d, simp_d = line.split("\t")

        def parse_dist(text: str) -> dict[str, float]:
            out = {}
            for part in text.split("|"):
                target, _, weight = part.rpartition(":")
                out[target] = float(weight)
            return out

        rows.append(PhraseTruth(
            phrase=phrase, fix_rate=float(fix_rate),
            simplify_rate=float(simplify_rate), modal_simplification=modal,
            fix_targets=parse_dist(fix_d), simplify_targets=parse_dist(simp_d)))
    return rows


# Default vocabulary for demos and pipeline tests; simplify rates cover
# {0, 0.1, 0.3, 0.6} and every phrase keeps a positive fix rate so it
# stays estimable on both wikis.
_DEFAULT_PLANS: tuple[PhrasePlan, ...] = (
    PhrasePlan("approximately", 0.15, 0.6, {"roughly": 1.0},
               {"about": 0.75, "around": 0.25}),
    PhrasePlan("indigenous", 0.10, 0.6, {"aboriginal": 1.0}, {"native": 1.0}),
    PhrasePlan("annually", 0.12, 0.6, {"per annum": 1.0},
               {"every year": 0.7, "each year": 0.3}),
    PhrasePlan("utilize", 0.20, 0.3, {"employ": 1.0}, {"use": 1.0}),
    PhrasePlan("purchase", 0.15, 0.3, {"procure": 1.0},
               {"buy": 0.8, "get": 0.2}),
    PhrasePlan("demonstrate", 0.10, 0.3, {"exhibit": 1.0}, {"show": 1.0}),
    PhrasePlan("collaborate", 0.18, 0.1, {"cooperate": 1.0},
               {"work together": 1.0}),
    PhrasePlan("concealed", 0.12, 0.1, {"obscured": 1.0}, {"hidden": 1.0}),
    PhrasePlan("magnitude", 0.25, 0.0, {"scale": 1.0}, {"size": 1.0}),
    PhrasePlan("paradigm", 0.30, 0.0, {"framework": 1.0}, {"model": 1.0}),
)


def demo_spec(topics_per_corpus: int = 50, revisions_per_topic: int = 3,
              rng_seed: int = 0, alpha: float = 1.0,
              distractors: bool = False, n_phrases: int | None = None,
              ) -> GeneratorSpec:
    plans = _DEFAULT_PLANS if n_phrases is None else _DEFAULT_PLANS[:n_phrases]
    return GeneratorSpec(phrases=plans, topics_per_corpus=topics_per_corpus,
                         revisions_per_topic=revisions_per_topic,
                         rng_seed=rng_seed, alpha=alpha, distractors=distractors)
