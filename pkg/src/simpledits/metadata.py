"""Comment-trusted ranking and the two sanity baselines.

Editors on the simple-language wiki often say what they did: revision
comments containing "simpl" (simplify, simplified, simpler, ...) mark
edits that were meant as simplifications. Instances from such trusted
revisions are ranked by pointwise mutual information between source and
target, which rewards pairs that select each other over promiscuous
phrases that rewrite every which way.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .candidates import Method, SimplificationCandidate
from .extract import LexicalEditInstance


@dataclass(frozen=True)
class TrustedCommentMatcher:
    """Case-insensitive substring match inside any comment word.

    Pattern bodies are stored without glob stars, so "*simpl*" and
    "simpl" configure the same matcher.
    """

    patterns: tuple[str, ...] = ("simpl",)

    def __post_init__(self) -> None:
        bodies = tuple(p.strip("*").lower() for p in self.patterns)
        if not bodies or any(not b for b in bodies):
            raise ValueError("matcher needs at least one non-empty pattern")
        object.__setattr__(self, "_bodies", bodies)

    def matches(self, comment: str | None) -> bool:
        if not comment:
            return False
        words = comment.lower().split()
        return any(body in word for body in self._bodies for word in words)


def select_trusted(instances: Iterable[LexicalEditInstance],
                   matcher: TrustedCommentMatcher = TrustedCommentMatcher(),
                   ) -> list[LexicalEditInstance]:
    """Keep instances whose revision comment matches; order preserved."""
    return [inst for inst in instances if matcher.matches(inst.comment)]


def pmi_rank(instances: Sequence[LexicalEditInstance]) -> list[SimplificationCandidate]:
    """Rank distinct trusted pairs by PMI over the trusted multiset.

    With N the multiset size, score(A, a) = log(p(A,a) / (p(A,*) p(*,a))).
    Ties break toward the higher joint count, then lexicographic order.
    pair_score carries the joint count.
    """
    joint: Counter[tuple[str, str]] = Counter()
    src_marginal: Counter[str] = Counter()
    tgt_marginal: Counter[str] = Counter()
    for inst in instances:
        pair = (inst.source_key, inst.target_key)
        joint[pair] += 1
        src_marginal[pair[0]] += 1
        tgt_marginal[pair[1]] += 1
    n = sum(joint.values())
    scored = []
    for (src, tgt), count in joint.items():
        pmi = math.log((count * n) / (src_marginal[src] * tgt_marginal[tgt]))
        scored.append((-pmi, -count, src, tgt, pmi, count))
    scored.sort()
    return [SimplificationCandidate(source=src, target=tgt, score=pmi,
                                    method=Method.SIMPL, pair_score=float(count))
            for _, _, src, tgt, pmi, count in scored]


def baseline_frequent(instances: Sequence[LexicalEditInstance],
                      k: int) -> list[SimplificationCandidate]:
    """Top-k distinct pairs by occurrence count, ties lexicographic."""
    counts: Counter[tuple[str, str]] = Counter()
    for inst in instances:
        counts[(inst.source_key, inst.target_key)] += 1
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return [SimplificationCandidate(source=src, target=tgt, score=float(count),
                                    method=Method.FREQUENT)
            for (src, tgt), count in ordered[:k]]


def baseline_random(instances: Sequence[LexicalEditInstance], k: int,
                    rng_seed: int, weighted: bool = False,
                    ) -> list[SimplificationCandidate]:
    """Uniform sample of distinct pairs, deterministic in the seed.

    Asking for more than the population returns the whole population
    shuffled. With ``weighted`` the draw goes through the occurrence
    multiset instead, so frequent pairs surface more often.
    """
    rng = random.Random(rng_seed)
    if weighted:
        occurrences = sorted((inst.source_key, inst.target_key) for inst in instances)
        rng.shuffle(occurrences)
        picked: list[tuple[str, str]] = []
        seen: set[tuple[str, str]] = set()
        for pair in occurrences:
            if pair in seen:
                continue
            seen.add(pair)
            picked.append(pair)
            if len(picked) == k:
                break
    else:
        population = sorted({(inst.source_key, inst.target_key) for inst in instances})
        picked = rng.sample(population, min(k, len(population)))
    return [SimplificationCandidate(source=src, target=tgt, score=0.0,
                                    method=Method.RANDOM)
            for src, tgt in picked]
