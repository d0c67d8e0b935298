import random

import numpy as np
import pytest

import oracles
from conftest import random_partition_pair
from coref_meter.corpus import EntityPartition, Mention
from coref_meter.disagg import (
    DisaggReport,
    GapReport,
    disaggregate,
    generalization_gap,
    highlight,
    permutation_test,
    permutation_test_counts,
    permutation_test_result,
    typed_b3,
)
from coref_meter.mention_types import CorefType, TypedMention
from coref_meter.metrics import b3_score, combine, doc_count_matrix, document_counts

A, B, C, D = (Mention(i, i) for i in range(4))


def test_typed_b3_keeps_full_entity_context():
    gold = EntityPartition((frozenset({A, B, C}),))
    pred = EntityPartition((frozenset({A, B}), frozenset({C, D})))
    types = {A: TypedMention(A, frozenset({CorefType.COMPOUND}))}
    s = typed_b3(gold, pred, types, types, CorefType.COMPOUND)
    assert (s.recall, s.precision) == (2 / 3, 1.0)


def test_typed_b3_no_typed_mentions_is_degenerate():
    gold = EntityPartition((frozenset({A, B}),))
    s = typed_b3(gold, gold, {}, {}, CorefType.NESTED)
    assert s.f1 == 0.0 and s.degenerate == ("recall", "precision")


@pytest.mark.parametrize("seed", range(50))
def test_all_mentions_type_reduces_to_b3(seed):
    gold, pred = random_partition_pair(random.Random(seed))
    assert typed_b3(gold, pred, {}, {}, None) == b3_score(gold, pred)


def _report(pairs, tag=CorefType.ON_GENERIC):
    items, counts = [], []
    for i, (g, p) in enumerate(pairs):
        gt = {m: frozenset({tag}) for m in g.mentions if m.start % 2 == 0}
        pt = {m: frozenset({tag}) for m in p.mentions if m.start % 2 == 0}
        items.append((str(i), g, p, gt, pt))
        counts.append(document_counts(str(i), g, p))
    return disaggregate(items, combine(counts))


def test_gap_of_identical_reports_is_zero():
    rng = random.Random(1)
    r = _report([random_partition_pair(rng) for _ in range(6)])
    gap = generalization_gap(r, r)
    assert gap.agg == 0.0 and gap.conll_gap == 0.0
    assert all(v == 0.0 for v in gap.tgg.values())
    assert gap.highlighted == ()
    assert set(gap.incomparable) == {CorefType.NESTED, CorefType.COMPOUND, CorefType.COPULAR}


def test_gap_highlights_large_type_drop():
    P = lambda *cs: EntityPartition.from_clusters([[(m, m) for m in c] for c in cs])  # noqa: E731
    g = P([0, 2, 4], [1, 3, 5])
    # even-start (typed) mentions each pulled into a spurious pair
    bad = P([0, 6], [2, 8], [4, 10], [1, 3, 5])
    r_in, r_out = _report([(g, g)]), _report([(g, bad)])
    gap = generalization_gap(r_in, r_out, threshold=0.05)
    assert gap.agg == pytest.approx(1 - 4 / 7)
    assert gap.tgg[CorefType.ON_GENERIC] == pytest.approx(1 - 2 / 7)
    assert CorefType.ON_GENERIC in gap.highlighted
    assert generalization_gap(r_in, r_out, threshold=1.0).highlighted == ()


def test_disagg_json_round_trip():
    rng = random.Random(2)
    r = _report([random_partition_pair(rng) for _ in range(3)])
    again = DisaggReport.from_json(r.to_json())
    assert again.per_type == r.per_type
    assert isinstance(generalization_gap(r, again), GapReport)


def test_highlight_within_one_test_set():
    assert highlight(0.5, 0.7)
    assert not highlight(0.65, 0.7)


# --- permutation test ----------------------------------------------------------


def test_identical_lists_give_one():
    a = [0.3, 0.5, 0.9, 0.1]
    assert permutation_test(a, a, iterations=500, seed=3) == 1.0


def test_constant_shift_is_significant():
    a = [0.5 + 0.01 * i for i in range(20)]
    b = [x - 0.1 for x in a]
    assert permutation_test(a, b, 10000, seed=0) <= 0.001


def test_matches_exact_enumeration_on_ten_documents():
    rng = np.random.default_rng(5)
    a = rng.random(10)
    b = a + rng.normal(0.05, 0.1, 10)
    exact = oracles.sign_flip_exact(list(a - b))
    res = permutation_test_result(a, b, iterations=20000, seed=1)
    assert abs(res.p_value - exact) < 0.015
    assert res.observed == pytest.approx(abs(np.mean(a - b)))


def test_seed_reproducible_and_thread_invariant():
    rng = np.random.default_rng(0)
    a, b = rng.random(30), rng.random(30)
    ps = {permutation_test(a, b, 3500, seed=11, threads=t) for t in (1, 2, 8)}
    assert len(ps) == 1
    assert permutation_test_result(a, b, 3500, seed=11) == permutation_test_result(a, b, 3500, seed=11)


def test_bad_inputs():
    with pytest.raises(ValueError):
        permutation_test([1, 2], [1])
    with pytest.raises(ValueError):
        permutation_test([], [])
    with pytest.raises(ValueError):
        permutation_test([1], [2], iterations=0)


def test_corpus_f1_statistic():
    rng = random.Random(8)
    golds = [random_partition_pair(rng)[0] for _ in range(12)]
    good = [document_counts(str(i), g, g) for i, g in enumerate(golds)]
    noisy = [document_counts(str(i), g, random_partition_pair(rng)[1]) for i, g in enumerate(golds)]
    ma, mb = doc_count_matrix(good), doc_count_matrix(noisy)
    same = permutation_test_counts(ma, ma, 2000, seed=0)
    assert same.p_value == 1.0 and same.observed == 0.0
    diff = permutation_test_counts(ma, mb, 2000, seed=0)
    conll = lambda docs: combine(docs).conll_f1  # noqa: E731
    assert diff.observed == pytest.approx(abs(conll(good) - conll(noisy)), abs=1e-12)
    assert 0 < diff.p_value < 0.05
    for t in (2, 8):
        assert permutation_test_counts(ma, mb, 2000, seed=0, threads=t) == diff
