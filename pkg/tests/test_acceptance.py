"""Package acceptance checks.

Each test prints one PASS or FAIL line naming the property it covers,
so a verbose run reads as a checklist. The sizes and tolerances are the
contract: estimator identities hold to 1e-9, distribution sums to
1e-12, end-to-end recovery of planted rates to +/-0.05, and the two
large randomized sweeps carry hard wall-clock ceilings.
"""

import contextlib
import os
import random
import time
from fractions import Fraction
from functools import cmp_to_key

from _synthetic import random_store
from simpledits.candidates import Method, SimplificationCandidate, \
    read_candidates_path
from simpledits.cli import main
from simpledits.edit_model import (ModelConfig, PhraseUnseenError,
                                   SimplifyUndefinedError, compute_estimates,
                                   estimate_simplify_prob, rank_edit_model,
                                   topic_fraction)
from simpledits.evaluate import (AnnotationRecord, Orientation, RawLabel,
                                 Verdict, fleiss_kappa, fleiss_kappa_table,
                                 precision_at_k)
from simpledits.extract import (LexicalEditInstance, Sentence,
                                extract_edit_instance, extract_from_sequence,
                                read_instances)
from simpledits.ingest import Corpus, filter_textual_changes
from simpledits.metadata import TrustedCommentMatcher, pmi_rank, select_trusted
from simpledits.store import (EditInstanceStore, accumulate,
                              collect_source_vocabulary)
from simpledits.synth import demo_spec, generate

_EXCERPT = os.path.join(os.path.dirname(__file__), "data", "wiki_excerpt.xml")


@contextlib.contextmanager
def _criterion(label):
    try:
        yield
    except BaseException:
        print(f"FAIL {label}", flush=True)
        raise
    print(f"PASS {label}", flush=True)


def _estimable(store):
    for phrase in sorted(store.vocabulary):
        try:
            yield compute_estimates(store, phrase)
        except (PhraseUnseenError, SimplifyUndefinedError):
            continue


def test_mixture_identity_on_200_randomized_stores():
    with _criterion("mixture identity over 200 randomized stores, 1e-9"):
        started = time.perf_counter()
        rng = random.Random(2024)
        checked = 0
        for _ in range(200):
            store = random_store(rng)
            for est in _estimable(store):
                support = set(est.rewrite_probs) | set(est.fix_rewrite_probs)
                for target in support:
                    rebuilt = (est.fix_prob
                               * est.fix_rewrite_probs.get(target, 0.0)
                               + est.simplify_prob
                               * est.simplify_rewrite_raw[target])
                    observed = est.rewrite_probs.get(target, 0.0)
                    assert abs(rebuilt - observed) < 1e-9
                    checked += 1
        elapsed = time.perf_counter() - started
        assert checked > 1000
        assert elapsed < 10.0, f"identity sweep took {elapsed:.1f}s"


def test_planted_rates_recovered_end_to_end():
    label = "planted rates within 0.05 end to end, 1000 topics per corpus"
    with _criterion(label):
        started = time.perf_counter()
        spec = demo_spec(topics_per_corpus=1000, rng_seed=0)
        complex_seqs, simple_seqs, truth = generate(spec)

        per_seq = []
        instances = []
        for seqs in (complex_seqs, simple_seqs):
            for seq in seqs:
                insts = [inst
                         for _, group in extract_from_sequence(
                             filter_textual_changes(seq))
                         for inst in group]
                per_seq.append((seq, insts))
                instances.extend(insts)

        store = EditInstanceStore(
            frozenset(collect_source_vocabulary(instances)))
        for seq, insts in per_seq:
            accumulate(store, seq, insts)

        for item in truth:
            f_complex = topic_fraction(store, Corpus.COMPLEX, item.phrase)
            f_simple = topic_fraction(store, Corpus.SIMPLE, item.phrase)
            estimate = estimate_simplify_prob(f_complex, f_simple, spec.alpha)
            assert abs(estimate - item.simplify_rate) <= 0.05, \
                f"{item.phrase}: {estimate:.3f} vs {item.simplify_rate}"

        best = {c.source: c.target for c in rank_edit_model(store, ModelConfig())}
        for item in truth:
            if item.simplify_rate >= 0.3:
                assert best[item.phrase] == item.modal_simplification, \
                    f"{item.phrase}: {best[item.phrase]!r}"

        elapsed = time.perf_counter() - started
        assert elapsed < 60.0, f"end-to-end recovery took {elapsed:.1f}s"


def test_exact_span_recovery_on_injected_substitutions():
    with _criterion("exact span recovery over 10000 injected substitutions"):
        rng = random.Random(4093)
        vocab = ["red", "blue", "stone", "river", "cloud", "metal", "paper",
                 "glass", "north", "south", "field", "amber"]
        span_vocab = ["one", "two", "three", "four", "five", "six", "seven",
                      "eight", "nine", "ten", "eleven", "twelve"]
        for _ in range(10000):
            prefix = [rng.choice(vocab) for _ in range(rng.randint(1, 6))]
            suffix = [rng.choice(vocab) for _ in range(rng.randint(1, 6))]
            k_src = rng.randint(1, 5)
            k_tgt = rng.randint(1, 5)
            source = rng.sample(span_vocab, k_src)
            target = rng.sample([w for w in span_vocab if w not in source],
                                k_tgt)
            old = Sentence(tokens=tuple(prefix + source + suffix))
            new = Sentence(tokens=tuple(prefix + target + suffix))
            inst = extract_edit_instance(old, new)
            assert inst is not None
            assert list(inst.source_phrase) == source
            assert list(inst.target_phrase) == target
            cut = len(prefix)
            assert (old.tokens[:cut] + inst.source_phrase
                    + old.tokens[cut + k_src:]) == old.tokens
            assert (new.tokens[:cut] + inst.target_phrase
                    + new.tokens[cut + k_tgt:]) == new.tokens


def _pmi_oracle_order(spec):
    src = {}
    tgt = {}
    for (a, b), c in spec.items():
        src[a] = src.get(a, 0) + c
        tgt[b] = tgt.get(b, 0) + c

    def compare(p, q):
        (a1, b1), c1 = p
        (a2, b2), c2 = q
        lhs = c1 * src[a2] * tgt[b2]
        rhs = c2 * src[a1] * tgt[b1]
        if lhs != rhs:
            return -1 if lhs > rhs else 1
        if c1 != c2:
            return -1 if c1 > c2 else 1
        return -1 if (a1, b1) < (a2, b2) else 1

    return [pair for pair, _ in sorted(spec.items(), key=cmp_to_key(compare))]


def test_pmi_order_matches_exact_arithmetic():
    with _criterion("pmi ordering matches exact arithmetic on 50 fixtures"):
        rng = random.Random(811)
        matcher = TrustedCommentMatcher()
        sources = [f"s{i}" for i in range(9)]
        targets = [f"t{i}" for i in range(9)]
        for _ in range(50):
            spec = {}
            budget = 100
            # two pairs with identical counts and marginals: an exact tie
            spec[("tie_a", "tie_x")] = 2
            spec[("tie_b", "tie_y")] = 2
            budget -= 4
            while budget > 0:
                pair = (rng.choice(sources), rng.choice(targets))
                take = min(budget, rng.randint(1, 4))
                spec[pair] = spec.get(pair, 0) + take
                budget -= take
            assert sum(spec.values()) <= 100

            instances = []
            for (source, target), count in sorted(spec.items()):
                instances.extend(
                    LexicalEditInstance(tuple(source.split()),
                                        tuple(target.split()),
                                        "a1", 1, Corpus.SIMPLE,
                                        comment="simplify wording")
                    for _ in range(count))
            # noise the trust filter has to drop before ranking
            instances.append(LexicalEditInstance(("noise",), ("junk",),
                                                 "a1", 1, Corpus.SIMPLE,
                                                 comment="fix typo"))
            ranked = pmi_rank(select_trusted(instances, matcher))
            assert [(c.source, c.target) for c in ranked] \
                == _pmi_oracle_order(spec)
            order = [(c.source, c.target) for c in ranked]
            assert order.index(("tie_a", "tie_x")) + 1 \
                == order.index(("tie_b", "tie_y"))


def test_conditional_distributions_normalize():
    with _criterion("conditional distributions sum to 1 within 1e-12"):
        rng = random.Random(6151)
        checked = 0
        for _ in range(100):
            store = random_store(rng)
            for est in _estimable(store):
                assert abs(sum(est.rewrite_probs.values()) - 1.0) < 1e-12
                if est.fix_rewrite_probs:
                    assert abs(sum(est.fix_rewrite_probs.values()) - 1.0) < 1e-12
                for value in (est.frac_complex, est.frac_simple,
                              est.fix_prob, est.simplify_prob,
                              *est.rewrite_probs.values(),
                              *est.fix_rewrite_probs.values(),
                              *est.simplify_rewrite_probs.values()):
                    assert 0.0 <= value <= 1.0
                checked += 1
        assert checked > 100


def _kappa_by_hand(table):
    n = sum(table[0])
    n_items = len(table)
    p_bar = sum(Fraction(sum(c * c for c in row) - n, n * (n - 1))
                for row in table) / n_items
    totals = [sum(row[j] for row in table) for j in range(len(table[0]))]
    p_expected = sum(Fraction(t, n_items * n) ** 2 for t in totals)
    if p_bar == 1:
        return 1.0
    return float((p_bar - p_expected) / (1 - p_expected))


def test_precision_rendering_and_agreement():
    with _criterion("precision rendering and rater agreement"):
        cands = [SimplificationCandidate(source=f"s{i}", target=f"t{i}",
                                         score=1.0, method=Method.EDIT_MODEL)
                 for i in range(100)]
        # 77 correct, 22 rejected, 1 unsure, none without a majority
        verdicts = {}
        for i, cand in enumerate(cands):
            if i < 77:
                verdict = Verdict.SIMPLIFICATION
            elif i < 99:
                verdict = Verdict.NOT_SIMPLIFICATION
            else:
                verdict = Verdict.UNSURE
            verdicts[(cand.source, cand.target)] = verdict
        result = precision_at_k(cands, verdicts, 100)
        assert (result.correct, result.counted) == (77, 99)
        assert result.rendered == "77% (-0-1)"

        unanimous = [
            AnnotationRecord(pair=(f"p{i}", "q"), orientation=Orientation.FORWARD,
                             labels=(("j1", label), ("j2", label), ("j3", label)))
            for i, label in enumerate([RawLabel.SIMPLER, RawLabel.EQUAL,
                                       RawLabel.SIMPLER, RawLabel.UNSURE] * 5)
        ]
        assert fleiss_kappa(unanimous) == 1.0

        # twenty items, three raters, three categories
        table = [
            [3, 0, 0], [0, 3, 0], [0, 0, 3], [2, 1, 0], [1, 2, 0],
            [0, 2, 1], [0, 1, 2], [1, 1, 1], [3, 0, 0], [2, 0, 1],
            [0, 3, 0], [1, 0, 2], [2, 1, 0], [0, 0, 3], [3, 0, 0],
            [1, 2, 0], [0, 1, 2], [2, 0, 1], [1, 1, 1], [0, 3, 0],
        ]
        assert abs(fleiss_kappa_table(table) - _kappa_by_hand(table)) < 1e-9


def test_parallel_counting_is_byte_identical(tmp_path):
    label = "count with 1 and 8 workers byte-identical on 5000 articles"
    with _criterion(label):
        d = str(tmp_path)
        assert main(["synth", "--out-dir", d, "--topics", "2500",
                     "--phrases", "4", "--rng-seed", "2"]) == 0
        assert main(["extract", "--workers", "4",
                     "--complex", f"{d}/complex.jsonl",
                     "--simple", f"{d}/simple.jsonl",
                     "--out", f"{d}/instances.jsonl"]) == 0
        for workers in ("1", "8"):
            assert main(["count", "--workers", workers,
                         "--complex", f"{d}/complex.jsonl",
                         "--simple", f"{d}/simple.jsonl",
                         "--instances", f"{d}/instances.jsonl",
                         "--out", f"{d}/store{workers}.tsv"]) == 0
        with open(f"{d}/store1.tsv", "rb") as a, \
                open(f"{d}/store8.tsv", "rb") as b:
            one, eight = a.read(), b.read()
        assert one and one == eight


def test_bundled_excerpt_parses_extracts_and_ranks(tmp_path):
    with _criterion("bundled wiki excerpt parses, extracts and ranks"):
        d = str(tmp_path)
        assert main(["ingest", "--input", _EXCERPT, "--corpus", "simple",
                     "--out", f"{d}/fixture.jsonl"]) == 0
        assert main(["extract", "--simple", f"{d}/fixture.jsonl",
                     "--out", f"{d}/instances.jsonl"]) == 0
        assert main(["rank", "--method", "simpl",
                     "--instances", f"{d}/instances.jsonl",
                     "--out", f"{d}/simpl.tsv"]) == 0
        assert main(["rank", "--method", "frequent",
                     "--instances", f"{d}/instances.jsonl",
                     "--out", f"{d}/frequent.tsv"]) == 0

        with open(f"{d}/fixture.jsonl", "r", encoding="utf-8") as handle:
            articles = {line.split('"article_id": "', 1)[1].split('"', 1)[0]
                        for line in handle if line.strip()}
        assert len(articles) == 50

        with open(f"{d}/instances.jsonl", "r", encoding="utf-8") as handle:
            instances = list(read_instances(handle))
        assert instances

        matcher = TrustedCommentMatcher()
        trusted_pairs = {(inst.source_key, inst.target_key)
                         for inst in instances if matcher.matches(inst.comment)}
        untrusted_only = {(inst.source_key, inst.target_key)
                          for inst in instances
                          if not matcher.matches(inst.comment)} - trusted_pairs

        ranked, _ = read_candidates_path(f"{d}/simpl.tsv")
        assert ranked
        pairs = {(c.source, c.target) for c in ranked}
        assert pairs <= trusted_pairs
        assert not pairs & untrusted_only

        frequent, _ = read_candidates_path(f"{d}/frequent.tsv")
        assert frequent
