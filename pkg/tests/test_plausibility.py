import math
import random
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from build_fixtures import EDGES, SENSES, TRIPLES
from coref_meter.corpus import Triple
from coref_meter.corpus.hierarchy import build_hierarchy
from coref_meter.corpus.triples import TripleCounts
from coref_meter.errors import CorefMeterError, UnknownWordError
from coref_meter.plausibility import (
    ConceptDistribution,
    build_concept_distribution,
    exemplar_score,
    frequency_filter,
    generate_pairs,
    ngram_score,
    pado_score,
    pmi,
    pmi_from_counts,
    pmi_vectors,
    resnik,
    score_event,
)


def tc(rows):
    c = Counter()
    for s, v, o, n in rows:
        c[Triple(s, v, o)] += n
    return TripleCounts(c)


@pytest.fixture(scope="module")
def toy():
    return tc(TRIPLES), build_hierarchy(EDGES, SENSES)


# --- n-gram and PMI -------------------------------------------------------------


def test_ngram_hand_case():
    counts = tc([("a", "v", "y", 2), ("c", "v", "x", 3), ("c", "v", "y", 1)])
    assert ngram_score(counts, Triple("a", "v", "x")) == pytest.approx(1 / 6, abs=1e-15)


def test_ngram_bounds_and_unseen_verb():
    counts = tc([("a", "v", "x", 4)])
    assert ngram_score(counts, Triple("a", "v", "x")) == 1.0
    assert ngram_score(counts, Triple("a", "nope", "x")) == 0.0
    assert score_event("ngram", Triple("a", "nope", "x"), counts).flags == ("unseen-verb",)


def test_pmi_hand_case():
    assert pmi_from_counts(10, 10, 10, 100) == pytest.approx(math.log(10), abs=1e-12)
    assert pmi_from_counts(0, 10, 10, 100) is None


def test_pmi_independence_is_zero():
    rng = random.Random(0)
    for _ in range(1000):
        i, j, k, m = (rng.randint(1, 40) for _ in range(4))
        # c_x * c_y == c_xy * n exactly
        assert pmi_from_counts(i * j, i * k, j * m, k * m) == 0.0


def test_pmi_symmetric_on_random_tables():
    rng = random.Random(1)
    words = list("abcdef")
    for _ in range(1000):
        counts = tc([(rng.choice(words), rng.choice(words), rng.choice(words), rng.randint(1, 5)) for _ in range(6)])
        x, y = rng.choice(words), rng.choice(words)
        for rel in ("sv", "vo", "so"):
            assert pmi(counts, x, y, rel) == pmi(counts, y, x, rel)


def test_pmi_undefined_flag(toy):
    counts, _ = toy
    assert score_event("pmi", Triple("person", "drive", "apple"), counts).flags == ("undefined",)


# --- Resnik -----------------------------------------------------------------------


def test_resnik_two_concept_hand_case():
    dist = ConceptDistribution({"x": {"c1": 0.9, "c2": 0.1}}, {"c1": 0.5, "c2": 0.5})
    strength = 0.9 * math.log(1.8) + 0.1 * math.log(0.2)
    assert dist.selectional_strength("x") == pytest.approx(strength, abs=1e-12)
    assert round(strength, 3) == 0.368
    assoc = dist.selectional_association("x", "c1")
    assert assoc == pytest.approx(0.9 * math.log(1.8) / strength, abs=1e-12)
    assert round(assoc, 3) == 1.437


def test_selectional_association_sums_to_one():
    rng = np.random.default_rng(2)
    checked = 0
    for _ in range(1000):
        k = int(rng.integers(2, 8))
        cond, prior = rng.dirichlet(np.ones(k)), rng.dirichlet(np.ones(k))
        names = [f"c{i}" for i in range(k)]
        dist = ConceptDistribution({"x": dict(zip(names, cond))}, dict(zip(names, prior)))
        if dist.selectional_strength("x") > 0:
            total = math.fsum(dist.selectional_association("x", c) for c in names)
            assert abs(total - 1.0) < 1e-9
            checked += 1
    assert checked > 900


def test_uniform_divergence_is_flagged(toy):
    _, h = toy
    counts = tc([("a", "v", "apple", 1)])
    dist = build_concept_distribution(counts, h)
    assert dist.selectional_strength("v") == pytest.approx(0.0, abs=1e-15)
    s = score_event("resnik", Triple("a", "v", "apple"), counts, hierarchy=h, dist=dist)
    assert s.score == 0.0 and s.flags == ("uninformative-verb",)


def test_single_sense_count_propagates_along_chain(toy):
    _, h = toy
    dist = build_concept_distribution(tc([("a", "v", "bread", 2)]), h)
    assert dist.conditional["v"] == pytest.approx({"bread.n.01": 1 / 3, "food.n.01": 1 / 3, "entity.n.01": 1 / 3})


def test_two_senses_split_evenly(toy):
    _, h = toy
    dist = build_concept_distribution(tc([("a", "v", "fish", 2)]), h)
    f = {c: p * 7 for c, p in dist.conditional["v"].items()}
    assert f == pytest.approx(
        {"fish.n.01": 1, "fish.n.02": 1, "food.n.01": 1, "animal.n.01": 1, "organism.n.01": 1, "entity.n.01": 2}
    )


def test_concept_distribution_normalized_and_drops_unknown(toy):
    counts, h = toy
    dist = build_concept_distribution(counts.merge(tc([("a", "eat", "zzz", 1)])), h)
    for cond in dist.conditional.values():
        assert abs(math.fsum(cond.values()) - 1.0) < 1e-9
    assert abs(math.fsum(dist.prior.values()) - 1.0) < 1e-9
    assert dist.dropped_words == 1


def test_resnik_is_max_over_hypernyms(toy):
    counts, h = toy
    dist = build_concept_distribution(counts, h)
    val = resnik(dist, h, "eat", "apple")
    cands = h.ancestors("apple.n.01")
    assert val == max(dist.selectional_association("eat", c) for c in cands)
    with pytest.raises(UnknownWordError):
        resnik(dist, h, "eat", "zzz")
    s = score_event("resnik", Triple("x", "eat", "zzz"), counts, hierarchy=h, dist=dist)
    assert s.score is None and s.flags == ("unknown-word",)


# --- Pado -------------------------------------------------------------------------


def test_pado_hand_case():
    roles = {("y", "obj", "x"): 2, ("z", "obj", "x"): 2, ("w", "subj", "x"): 4}
    counts = TripleCounts({}, roles)
    assert pado_score(counts, "x", "y", "obj") == 0.25
    assert pado_score(counts, "x", "y", "agent") == 0.0


def test_pado_complete_table_sums_to_one(toy):
    counts, _ = toy
    for x in counts.position("v"):
        total = math.fsum(pado_score(counts, x, y, r) for (y, r, xx) in counts.role_counts if xx == x)
        assert abs(total - 1.0) < 1e-12
    assert score_event("pado", Triple("a", "eat", "apple"), counts, role="instr").flags == ("unseen-role",)


# --- exemplar ---------------------------------------------------------------------


def test_exemplar_cases():
    vecs = {"y": np.array([1.0, 0.0]), "z": np.array([0.0, 2.0]), "w": np.array([3.0, 0.0])}
    assert exemplar_score(vecs, {("x", "y"): 1}, "x", "y") == 1.0
    assert exemplar_score(vecs, {("x", "z"): 5}, "x", "y") == 0.0
    assert exemplar_score(vecs, {("x", "w"): 3, ("x", "z"): 1}, "x", "y") == 0.75
    assert exemplar_score(vecs, {}, "x", "y") is None
    with pytest.raises(UnknownWordError):
        exemplar_score(vecs, {("x", "y"): 1}, "x", "nope")


def test_exemplar_bounds_with_pmi_vectors(toy):
    counts, _ = toy
    vecs = pmi_vectors(counts, k=3)
    for t in counts.triples:
        s = score_event("exemplar", t, counts, vectors=vecs)
        assert s.score is None or -1.0 <= s.score <= 1.0


def test_unknown_model(toy):
    with pytest.raises(CorefMeterError):
        score_event("bert", Triple("a", "b", "c"), toy[0])


# --- pseudo-disambiguation pairs -------------------------------------------------------


def test_forced_subject_replacement():
    counts = tc([("a", "v", "o", 5), ("b", "w", "o", 1)])
    for p in generate_pairs(counts, seed=0, n=200):
        assert p.form in ("subject", "both")
        assert p.negative == Triple({"a": "b", "b": "a"}[p.positive.subject], p.positive.verb, "o")


def test_form_frequencies_uniform():
    rng = random.Random(3)
    rows = [(f"s{rng.randint(0, 9)}", f"v{rng.randint(0, 4)}", f"o{rng.randint(0, 9)}", rng.randint(1, 9)) for _ in range(60)]
    pairs = generate_pairs(tc(rows), seed=5, n=30000)
    forms = Counter(p.form for p in pairs)
    assert chisquare([forms["subject"], forms["object"], forms["both"]]).pvalue > 0.01
    assert all(p.positive != p.negative and p.positive.verb == p.negative.verb for p in pairs)


def test_pairs_reproducible_per_seed(toy):
    counts, _ = toy
    assert generate_pairs(counts, 9, 50) == generate_pairs(counts, 9, 50)
    assert generate_pairs(counts, 9, 50) != generate_pairs(counts, 10, 50)


def test_positive_drawn_by_triple_count():
    counts = tc([("a", "v", "o", 9), ("b", "v", "p", 1)])
    share = sum(p.positive.subject == "a" for p in generate_pairs(counts, 1, 5000)) / 5000
    assert abs(share - 0.9) < 0.02


def test_pair_errors():
    with pytest.raises(CorefMeterError, match="too small"):
        generate_pairs(tc([("a", "v", "o", 3)]), 0, 5)
    with pytest.raises(CorefMeterError, match="filter"):
        generate_pairs(tc([("a", "v", "o", 3), ("b", "v", "p", 1)]), 0, 5, min_count=10)


def test_frequency_filter():
    counts = tc([("a", "v", "o", 3), ("a", "w", "o", 2), ("b", "v", "p", 1)])
    kept = frequency_filter(counts, 2)
    assert set(kept.triples) == {Triple("a", "v", "o"), Triple("a", "w", "o")}
