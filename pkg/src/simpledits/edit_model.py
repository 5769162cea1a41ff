"""Probabilistic ranking of rewrites by how likely they simplify.

The model treats every observed rewrite of a phrase A in the simple-
language wiki as produced by one of two visible operations, a quality
fix or a simplification (vandalism is assumed absent and no-ops never
surface as rewrites). Fixes happen on both wikis; simplifications only
on the simple one. So the per-topic fraction of articles that rewrite A
on the complex wiki estimates the fix rate, a damping factor ``alpha``
carries it over to the simple wiki, and whatever rewrite rate remains
above that on the simple wiki is attributed to simplification:

    simplify_prob(A) = max(0, frac_simple(A) - alpha * frac_complex(A))

Conditioned on the operation, target distributions follow the same
subtraction. The overall rewrite distribution observed on the simple
wiki is a mixture of the fix distribution (estimated on the complex
wiki) and the unknown simplification distribution, which is recovered
by solving the mixture per target:

    simplify_given(a | A) = (rewrite(a | A) - fix_prob(A) * fix_given(a | A))
                            / simplify_prob(A)

The raw solution can leave [0, 1] on sparse counts; ranking uses it
clamped, without renormalizing, so reported per-pair values stay
conservative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .candidates import Method, SimplificationCandidate
from .ingest import Corpus
from .store import EditInstanceStore


class PhraseUnseenError(ValueError):
    """Phrase has no containment evidence in the requested corpus."""


class SimplifyUndefinedError(ValueError):
    """simplify_prob is zero, the conditional mixture cannot be solved."""


@dataclass(frozen=True)
class ModelConfig:
    alpha: float = 1.0
    min_pair_freq: int = 2       # rewrite occurrences required, per corpus
    min_phrase_freq: int = 101   # phrase frequency required, per corpus
    top_k: int = 100
    phrase_freq_kind: str = "topics"  # or "instances": count rewrites, not topics

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.min_pair_freq < 1 or self.min_phrase_freq < 1:
            raise ValueError("frequency floors must be at least 1")
        if self.top_k < 1:
            raise ValueError("top_k must be positive")
        if self.phrase_freq_kind not in ("topics", "instances"):
            raise ValueError(f"unknown phrase_freq_kind {self.phrase_freq_kind!r}")


@dataclass(frozen=True)
class EditModelEstimates:
    """Every estimated quantity for one phrase."""

    phrase: str
    frac_complex: float
    frac_simple: float
    fix_prob: float       # chance a simple-wiki topic fix-edits the phrase
    simplify_prob: float  # chance a simple-wiki topic simplifies the phrase
    rewrite_probs: dict[str, float]        # target dist over all simple-wiki rewrites
    fix_rewrite_probs: dict[str, float]    # target dist of complex-wiki rewrites
    simplify_rewrite_raw: dict[str, float]
    simplify_rewrite_probs: dict[str, float]  # raw, clamped into [0, 1]


def topic_fraction(store: EditInstanceStore, corpus: Corpus, phrase: str) -> float:
    """Fraction of phrase-containing topics that rewrote the phrase."""
    counts = store.corpus(corpus)
    containing = counts.topics_containing.get(phrase, 0)
    if containing <= 0:
        raise PhraseUnseenError(f"{phrase!r} unseen in {corpus.value} corpus")
    return counts.topics_modifying.get(phrase, 0) / containing


def estimate_simplify_prob(frac_complex: float, frac_simple: float,
                           alpha: float = 1.0) -> float:
    return max(0.0, frac_simple - alpha * frac_complex)


def _conditional(counts, phrase: str) -> dict[str, float]:
    total = counts.source_total.get(phrase, 0)
    if total <= 0:
        return {}
    return {tgt: n / total for (src, tgt), n in counts.pair_count.items()
            if src == phrase}


def estimate_fix_conditional(store: EditInstanceStore, phrase: str) -> dict[str, float]:
    """Target distribution of the phrase's complex-wiki rewrites.

    Empty when the complex wiki never rewrote the phrase; callers treat
    that as zero fix evidence for every target.
    """
    return _conditional(store.corpus(Corpus.COMPLEX), phrase)


def estimate_any_conditional(store: EditInstanceStore, phrase: str) -> dict[str, float]:
    """Target distribution over all simple-wiki rewrites of the phrase."""
    return _conditional(store.corpus(Corpus.SIMPLE), phrase)


def estimate_simplify_conditional(rewrite_probs: Mapping[str, float],
                                  fix_prob: float,
                                  fix_rewrite_probs: Mapping[str, float],
                                  simplify_prob: float,
                                  ) -> tuple[dict[str, float], dict[str, float]]:
    """Solve the mixture for the simplification target distribution.

    Returns (raw, clamped) over the union of both supports. Raw values
    satisfy rewrite = fix_prob * fix_given + simplify_prob * raw exactly;
    clamped values are what ranking reports.
    """
    if simplify_prob <= 0.0:
        raise SimplifyUndefinedError("simplify probability is 0, conditional undefined")
    raw: dict[str, float] = {}
    clamped: dict[str, float] = {}
    for target in set(rewrite_probs) | set(fix_rewrite_probs):
        value = (rewrite_probs.get(target, 0.0)
                 - fix_prob * fix_rewrite_probs.get(target, 0.0)) / simplify_prob
        raw[target] = value
        clamped[target] = min(1.0, max(0.0, value))
    return raw, clamped


def compute_estimates(store: EditInstanceStore, phrase: str,
                      alpha: float = 1.0) -> EditModelEstimates:
    """All per-phrase estimates in one pass.

    Needs containment evidence in both corpora and simplify_prob > 0;
    raises PhraseUnseenError or SimplifyUndefinedError otherwise.
    """
    frac_complex = topic_fraction(store, Corpus.COMPLEX, phrase)
    frac_simple = topic_fraction(store, Corpus.SIMPLE, phrase)
    fix_prob = alpha * frac_complex
    simplify_prob = estimate_simplify_prob(frac_complex, frac_simple, alpha)
    rewrite_probs = estimate_any_conditional(store, phrase)
    fix_rewrite_probs = estimate_fix_conditional(store, phrase)
    raw, clamped = estimate_simplify_conditional(
        rewrite_probs, fix_prob, fix_rewrite_probs, simplify_prob)
    return EditModelEstimates(
        phrase=phrase, frac_complex=frac_complex, frac_simple=frac_simple,
        fix_prob=fix_prob, simplify_prob=simplify_prob,
        rewrite_probs=rewrite_probs, fix_rewrite_probs=fix_rewrite_probs,
        simplify_rewrite_raw=raw, simplify_rewrite_probs=clamped)


def _phrase_freq(counts, phrase: str, kind: str) -> int:
    if kind == "instances":
        return counts.source_total.get(phrase, 0)
    return counts.topics_containing.get(phrase, 0)


def eligible_phrases(store: EditInstanceStore, config: ModelConfig) -> list[str]:
    """Phrases frequent enough on BOTH wikis to estimate reliably."""
    out = []
    for phrase in sorted(store.vocabulary):
        ok = True
        for corpus in Corpus:
            counts = store.corpus(corpus)
            if counts.source_total.get(phrase, 0) < config.min_pair_freq:
                ok = False
                break
            if _phrase_freq(counts, phrase, config.phrase_freq_kind) < config.min_phrase_freq:
                ok = False
                break
        if ok:
            out.append(phrase)
    return out


def rank_edit_model(store: EditInstanceStore,
                    config: ModelConfig = ModelConfig()) -> list[SimplificationCandidate]:
    """Rank eligible phrases by simplify_prob, one best target each.

    The emitted target maximizes the clamped simplification conditional;
    ties fall back to the higher overall rewrite probability, then to
    lexicographic order. Phrases whose simplify_prob is zero are
    undefined under the mixture and are skipped.
    """
    ranked: list[tuple[float, str, SimplificationCandidate]] = []
    for phrase in eligible_phrases(store, config):
        try:
            est = compute_estimates(store, phrase, config.alpha)
        except (PhraseUnseenError, SimplifyUndefinedError):
            continue
        if not est.rewrite_probs:
            continue
        best = min(est.rewrite_probs,
                   key=lambda t: (-est.simplify_rewrite_probs[t],
                                  -est.rewrite_probs[t], t))
        ranked.append((est.simplify_prob, phrase, SimplificationCandidate(
            source=phrase, target=best, score=est.simplify_prob,
            method=Method.EDIT_MODEL,
            pair_score=est.simplify_rewrite_probs[best])))
    ranked.sort(key=lambda item: (-item[0], item[1]))
    return [cand for _, _, cand in ranked[:config.top_k]]
