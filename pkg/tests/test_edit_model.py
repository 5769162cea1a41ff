"""Edit-mixture estimation and ranking."""

import random

import pytest

from _synthetic import random_store
from simpledits.edit_model import (ModelConfig, PhraseUnseenError,
                                   SimplifyUndefinedError, compute_estimates,
                                   eligible_phrases, estimate_fix_conditional,
                                   estimate_simplify_conditional,
                                   estimate_simplify_prob, rank_edit_model,
                                   topic_fraction)
from simpledits.ingest import Corpus
from simpledits.store import EditInstanceStore


def _store(complex_counts=None, simple_counts=None, vocabulary=("pa",)):
    """Tiny store builder; counts = (articles, containing, modifying, pairs)."""
    store = EditInstanceStore(vocabulary)
    for corpus, spec in ((Corpus.COMPLEX, complex_counts),
                         (Corpus.SIMPLE, simple_counts)):
        if spec is None:
            continue
        counts = store.corpus(corpus)
        counts.articles = spec.get("articles", 100)
        for phrase, n in spec.get("containing", {}).items():
            counts.topics_containing[phrase] = n
        for phrase, n in spec.get("modifying", {}).items():
            counts.topics_modifying[phrase] = n
        for (src, tgt), n in spec.get("pairs", {}).items():
            counts.pair_count[(src, tgt)] = n
            counts.source_total[src] += n
    return store


# --- point estimates -------------------------------------------------------


def test_topic_fraction_worked_values():
    store = _store(simple_counts={"containing": {"pa": 4}, "modifying": {"pa": 1}})
    assert topic_fraction(store, Corpus.SIMPLE, "pa") == 0.25

    store = _store(simple_counts={"containing": {"pa": 4}})
    assert topic_fraction(store, Corpus.SIMPLE, "pa") == 0.0

    with pytest.raises(PhraseUnseenError):
        topic_fraction(store, Corpus.COMPLEX, "pa")
    with pytest.raises(PhraseUnseenError):
        topic_fraction(store, Corpus.SIMPLE, "unknown")


def test_simplify_prob_subtraction_and_clamp():
    assert estimate_simplify_prob(0.2, 0.5) == pytest.approx(0.3)
    assert estimate_simplify_prob(0.5, 0.2) == 0.0
    assert estimate_simplify_prob(0.2, 0.5, alpha=0.5) == pytest.approx(0.4)
    assert estimate_simplify_prob(0.2, 0.5, alpha=0.0) == pytest.approx(0.5)


def test_fix_conditional_worked_values():
    store = _store(complex_counts={
        "containing": {"pa": 10}, "modifying": {"pa": 4},
        "pairs": {("pa", "x"): 3, ("pa", "y"): 1}})
    assert estimate_fix_conditional(store, "pa") == {"x": 0.75, "y": 0.25}

    store = _store(complex_counts={
        "containing": {"pa": 10}, "modifying": {"pa": 1},
        "pairs": {("pa", "x"): 1}})
    assert estimate_fix_conditional(store, "pa") == {"x": 1.0}

    assert estimate_fix_conditional(_store(), "pa") == {}


def test_simplify_conditional_worked_example():
    raw, clamped = estimate_simplify_conditional(
        rewrite_probs={"about": 0.8, "roughly": 0.2},
        fix_prob=0.25,
        fix_rewrite_probs={"roughly": 0.8, "about": 0.2},
        simplify_prob=0.5)
    assert raw["about"] == pytest.approx((0.8 - 0.25 * 0.2) / 0.5)  # 1.5
    assert raw["roughly"] == pytest.approx(0.0)
    assert clamped["about"] == 1.0  # clamped, not renormalized
    assert clamped["roughly"] == 0.0


def test_simplify_conditional_union_support():
    # a target rewritten only on the complex wiki gets negative raw mass
    raw, clamped = estimate_simplify_conditional(
        rewrite_probs={"x": 1.0}, fix_prob=0.5,
        fix_rewrite_probs={"z": 1.0}, simplify_prob=0.5)
    assert raw["z"] == pytest.approx(-1.0)
    assert clamped["z"] == 0.0
    assert set(raw) == {"x", "z"}


def test_simplify_conditional_undefined_at_zero():
    with pytest.raises(SimplifyUndefinedError):
        estimate_simplify_conditional({"x": 1.0}, 0.3, {}, 0.0)


def test_zero_fix_evidence_branch():
    # complex wiki contains the phrase but never rewrites it
    store = _store(
        complex_counts={"containing": {"pa": 10}},
        simple_counts={"containing": {"pa": 10}, "modifying": {"pa": 5},
                       "pairs": {("pa", "x"): 3, ("pa", "y"): 2}})
    est = compute_estimates(store, "pa")
    assert est.fix_prob == 0.0
    assert est.fix_rewrite_probs == {}
    assert est.simplify_prob == pytest.approx(0.5)
    assert est.simplify_rewrite_raw["x"] == pytest.approx(0.6 / 0.5)
    assert est.simplify_rewrite_probs["x"] == 1.0


def test_compute_estimates_requires_both_corpora():
    store = _store(simple_counts={"containing": {"pa": 5}, "modifying": {"pa": 2},
                                  "pairs": {("pa", "x"): 2}})
    with pytest.raises(PhraseUnseenError):
        compute_estimates(store, "pa")


# --- properties over randomized stores ---------------------------------------


def _estimable_phrases(store):
    for phrase in sorted(store.vocabulary):
        try:
            yield phrase, compute_estimates(store, phrase)
        except (PhraseUnseenError, SimplifyUndefinedError):
            continue


def test_mixture_identity_on_randomized_stores():
    rng = random.Random(101)
    checked = 0
    for _ in range(40):
        store = random_store(rng)
        for phrase, est in _estimable_phrases(store):
            support = set(est.rewrite_probs) | set(est.fix_rewrite_probs)
            for target in support:
                reconstructed = (est.fix_prob * est.fix_rewrite_probs.get(target, 0.0)
                                 + est.simplify_prob * est.simplify_rewrite_raw[target])
                assert abs(reconstructed - est.rewrite_probs.get(target, 0.0)) < 1e-9
                checked += 1
    assert checked > 200


def test_distribution_sums_on_randomized_stores():
    rng = random.Random(103)
    for _ in range(40):
        store = random_store(rng)
        for phrase, est in _estimable_phrases(store):
            if est.rewrite_probs:
                assert abs(sum(est.rewrite_probs.values()) - 1.0) < 1e-12
            if est.fix_rewrite_probs:
                assert abs(sum(est.fix_rewrite_probs.values()) - 1.0) < 1e-12
            assert 0.0 <= est.simplify_prob <= 1.0
            assert 0.0 <= est.fix_prob <= 1.0
            for value in est.simplify_rewrite_probs.values():
                assert 0.0 <= value <= 1.0


def test_simplify_prob_monotone_in_simple_modifications():
    def build(modifying):
        return _store(
            complex_counts={"containing": {"pa": 20}, "modifying": {"pa": 2},
                            "pairs": {("pa", "x"): 2}},
            simple_counts={"containing": {"pa": 20}, "modifying": {"pa": modifying},
                           "pairs": {("pa", "x"): modifying}})
    probs = [compute_estimates(build(m), "pa").simplify_prob
             for m in (4, 8, 12, 16)]
    assert probs == sorted(probs)
    assert probs[0] < probs[-1]


def test_simplify_prob_non_increasing_in_alpha():
    store = _store(
        complex_counts={"containing": {"pa": 20}, "modifying": {"pa": 4},
                        "pairs": {("pa", "x"): 4}},
        simple_counts={"containing": {"pa": 20}, "modifying": {"pa": 10},
                       "pairs": {("pa", "x"): 10}})
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    probs = [compute_estimates(store, "pa", alpha=a).simplify_prob for a in grid]
    assert all(a >= b for a, b in zip(probs, probs[1:]))
    assert probs[0] == pytest.approx(0.5)   # alpha 0: all rewrites count
    assert probs[-1] == pytest.approx(0.3)  # alpha 1: fix rate subtracted


# --- eligibility ----------------------------------------------------------------


def test_eligibility_requires_floors_in_both_corpora():
    store = _store(
        complex_counts={"containing": {"pa": 150, "pb": 150},
                        "modifying": {"pa": 2, "pb": 2},
                        "pairs": {("pa", "x"): 2, ("pb", "x"): 1}},
        simple_counts={"containing": {"pa": 150, "pb": 150},
                       "modifying": {"pa": 3, "pb": 3},
                       "pairs": {("pa", "x"): 3, ("pb", "x"): 3}},
        vocabulary=("pa", "pb"))
    config = ModelConfig(min_pair_freq=2, min_phrase_freq=101)
    # pb fails the complex-side pair floor (1 < 2)
    assert eligible_phrases(store, config) == ["pa"]

    config = ModelConfig(min_pair_freq=2, min_phrase_freq=151)
    assert eligible_phrases(store, config) == []


def test_eligibility_phrase_freq_kinds():
    store = _store(
        complex_counts={"containing": {"pa": 2}, "modifying": {"pa": 2},
                        "pairs": {("pa", "x"): 5}},
        simple_counts={"containing": {"pa": 2}, "modifying": {"pa": 2},
                       "pairs": {("pa", "x"): 5}})
    by_topics = ModelConfig(min_pair_freq=1, min_phrase_freq=3,
                            phrase_freq_kind="topics")
    by_instances = ModelConfig(min_pair_freq=1, min_phrase_freq=3,
                               phrase_freq_kind="instances")
    assert eligible_phrases(store, by_topics) == []
    assert eligible_phrases(store, by_instances) == ["pa"]


def test_model_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(alpha=1.5)
    with pytest.raises(ValueError):
        ModelConfig(min_pair_freq=0)
    with pytest.raises(ValueError):
        ModelConfig(top_k=0)
    with pytest.raises(ValueError):
        ModelConfig(phrase_freq_kind="bogus")


# --- ranking ---------------------------------------------------------------------


def _rank_store():
    # pa and pb tie on simplify_prob; pc exercises target tie-breaking
    return _store(
        complex_counts={
            "articles": 40,
            "containing": {"pa": 10, "pb": 10, "pc": 10, "pd": 10},
            "modifying": {"pa": 2, "pb": 2, "pc": 2, "pd": 2},
            "pairs": {("pa", "x"): 2, ("pb", "x"): 2, ("pc", "z"): 2,
                      ("pd", "x"): 2}},
        simple_counts={
            "articles": 40,
            "containing": {"pa": 10, "pb": 10, "pc": 10, "pd": 10},
            "modifying": {"pa": 6, "pb": 6, "pc": 3, "pd": 4},
            "pairs": {("pa", "x"): 4, ("pb", "x"): 4,
                      ("pc", "x"): 3, ("pc", "y"): 1,
                      ("pd", "x"): 4}},
        vocabulary=("pa", "pb", "pc", "pd"))


def test_rank_orders_and_breaks_ties():
    config = ModelConfig(min_pair_freq=2, min_phrase_freq=1)
    cands = rank_edit_model(_rank_store(), config)
    assert [c.source for c in cands] == ["pa", "pb", "pd", "pc"]
    # pa == pb on score, lexicographic phrase order decides
    assert cands[0].score == pytest.approx(cands[1].score)
    assert cands[0].score == pytest.approx(0.4)
    # pc: x and y both clamp to 1, x wins on higher rewrite probability
    pc = cands[3]
    assert pc.target == "x"
    assert pc.pair_score == 1.0
    assert pc.score == pytest.approx(0.1)


def test_rank_target_tie_falls_back_to_lexicographic():
    store = _store(
        complex_counts={"containing": {"pa": 10}, "modifying": {"pa": 2},
                        "pairs": {("pa", "z"): 2}},
        simple_counts={"containing": {"pa": 10}, "modifying": {"pa": 3},
                       "pairs": {("pa", "y"): 2, ("pa", "x"): 2}})
    config = ModelConfig(min_pair_freq=2, min_phrase_freq=1)
    (cand,) = rank_edit_model(store, config)
    assert cand.target == "x"


def test_rank_skips_zero_simplify_phrases_and_honors_top_k():
    store = _rank_store()
    # push pd's complex fix rate to its simple rewrite rate: no margin left
    store.corpus(Corpus.COMPLEX).topics_modifying["pd"] = 4
    config = ModelConfig(min_pair_freq=2, min_phrase_freq=1)
    cands = rank_edit_model(store, config)
    assert [c.source for c in cands] == ["pa", "pb", "pc"]

    config = ModelConfig(min_pair_freq=2, min_phrase_freq=1, top_k=2)
    assert [c.source for c in rank_edit_model(store, config)] == ["pa", "pb"]


def test_rank_is_deterministic():
    config = ModelConfig(min_pair_freq=1, min_phrase_freq=1)
    rng = random.Random(107)
    for _ in range(10):
        store = random_store(rng)
        assert rank_edit_model(store, config) == rank_edit_model(store, config)
