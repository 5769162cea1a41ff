"""Ranked simplification candidates and their TSV interchange.

All ranking methods emit the same shape, one row per candidate pair:
``rank<TAB>A<TAB>a<TAB>score<TAB>pair_score<TAB>method``. The score column
holds the method's ranking score (the per-phrase simplification
probability for the edit model, PMI for comment-trusted ranking, raw
counts for the frequency baseline); pair_score carries a per-pair detail
where the method has one. A leading ``#`` comment line records run
parameters such as the total candidate count before truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence


class Method(str, Enum):
    EDIT_MODEL = "edit_model"
    SIMPL = "simpl"
    FREQUENT = "frequent"
    RANDOM = "random"


@dataclass(frozen=True)
class SimplificationCandidate:
    """One proposed rewrite, phrases in normalized (lowercase) form."""

    source: str
    target: str
    score: float
    method: Method
    pair_score: float | None = None

    def __post_init__(self) -> None:
        if not self.source or not self.target:
            raise ValueError("candidate phrases must be non-empty")
        if self.source == self.target:
            raise ValueError(f"candidate maps {self.source!r} to itself")
        if not math.isfinite(self.score):
            raise ValueError(f"non-finite score for {self.source!r}")


_HEADER = ("rank", "A", "a", "score", "pair_score", "method")


def write_candidates(cands: Sequence[SimplificationCandidate], handle,
                     meta: dict | None = None) -> None:
    if meta:
        pairs = " ".join(f"{k}={v}" for k, v in sorted(meta.items()))
        handle.write(f"# {pairs}\n")
    handle.write("\t".join(_HEADER) + "\n")
    for rank, cand in enumerate(cands, start=1):
        pair = "" if cand.pair_score is None else repr(cand.pair_score)
        handle.write("\t".join((str(rank), cand.source, cand.target,
                                repr(cand.score), pair, cand.method.value)) + "\n")


def read_candidates(handle) -> tuple[list[SimplificationCandidate], dict]:
    meta: dict = {}
    cands: list[SimplificationCandidate] = []
    header_seen = False
    for lineno, line in enumerate(handle, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                if "=" in token:
                    k, v = token.split("=", 1)
                    meta[k] = v
            continue
        parts = line.split("\t")
        if len(parts) != len(_HEADER):
            raise ValueError(f"line {lineno}: expected {len(_HEADER)} columns")
        if not header_seen:
            if parts[0] != "rank":
                raise ValueError(f"line {lineno}: missing header row")
            header_seen = True
            continue
        _, source, target, score, pair_score, method = parts
        cands.append(SimplificationCandidate(
            source=source, target=target, score=float(score),
            method=Method(method),
            pair_score=float(pair_score) if pair_score else None))
    return cands, meta


def write_candidates_path(cands: Sequence[SimplificationCandidate], path: str,
                          meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        write_candidates(cands, handle, meta)


def read_candidates_path(path: str) -> tuple[list[SimplificationCandidate], dict]:
    with open(path, "r", encoding="utf-8") as handle:
        return read_candidates(handle)
