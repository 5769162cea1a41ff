"""Mine lexical simplifications from paired wiki revision histories.

The pipeline reads revision dumps of a standard and a simplified wiki,
extracts short lexical rewrites from aligned sentence pairs, folds them
into mergeable per-corpus counts, and scores each source phrase with an
edit-mixture model that separates simplification from ordinary copy
editing. Comment-seeded PMI ranking and two baselines share the same
candidate format, and the evaluate module turns human judgments of the
blinded candidates into precision and agreement numbers.
"""

from .candidates import Method, SimplificationCandidate
from .edit_model import (EditModelEstimates, ModelConfig, compute_estimates,
                         estimate_simplify_prob, rank_edit_model,
                         topic_fraction)
from .extract import (LexicalEditInstance, Sentence, align_sentences,
                      extract_edit_instance, extract_from_sequence,
                      split_sentences, tokenize)
from .evaluate import (AnnotationRecord, Orientation, RawLabel,
                       TransformationDictionary, Verdict,
                       build_evaluation_batch, collapse_label,
                       dictionary_overlap, fleiss_kappa, majority_verdict,
                       precision_at_k)
from .ingest import (Corpus, DumpParseError, ParseStats, Revision,
                     VersionSequence, filter_textual_changes, iter_sequences,
                     parse_dump, strip_markup)
from .metadata import (TrustedCommentMatcher, baseline_frequent,
                       baseline_random, pmi_rank, select_trusted)
from .store import (EditInstanceStore, accumulate, collect_source_vocabulary,
                    load_store_path, merge, save_store_path)
from .synth import GeneratorSpec, PhrasePlan, demo_spec, generate

__version__ = "0.1.0"

__all__ = [
    "AnnotationRecord", "Corpus", "DumpParseError", "EditInstanceStore",
    "EditModelEstimates", "GeneratorSpec", "LexicalEditInstance", "Method",
    "ModelConfig", "Orientation", "ParseStats", "PhrasePlan", "RawLabel",
    "Revision", "Sentence", "SimplificationCandidate",
    "TransformationDictionary", "TrustedCommentMatcher", "Verdict",
    "VersionSequence", "accumulate", "align_sentences",
    "baseline_frequent", "baseline_random", "build_evaluation_batch",
    "collapse_label", "collect_source_vocabulary", "compute_estimates",
    "demo_spec", "dictionary_overlap", "estimate_simplify_prob",
    "extract_edit_instance", "extract_from_sequence",
    "filter_textual_changes", "fleiss_kappa", "generate", "iter_sequences",
    "load_store_path", "majority_verdict", "merge", "parse_dump", "pmi_rank",
    "precision_at_k", "rank_edit_model", "save_store_path", "select_trusted",
    "split_sentences", "strip_markup", "tokenize", "topic_fraction",
]
