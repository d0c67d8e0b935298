"""Count-based selectional-preference models and pseudo-disambiguation pairs.

Scores are raw maximum-likelihood estimates.  Unseen statistics give 0 (or
``None`` where the quantity is undefined) and :func:`score_event` attaches a
flag saying why.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus.hierarchy import Hierarchy
from .corpus.model import Triple
from .corpus.triples import TripleCounts
from .errors import CorefMeterError, ParseError, UnknownWordError

MODELS = ("ngram", "pmi", "resnik", "pado", "exemplar")


# --- n-gram and PMI ------------------------------------------------------------


def ngram_score(counts: TripleCounts, t: Triple) -> float:
    """P(s, o | v) ~ Count(s, v) * Count(v, o) / Count(v)^2."""
    s, v, o = t
    cv = counts.position("v").get(v, 0)
    if cv == 0:
        return 0.0
    return counts.pair("sv").get((s, v), 0) * counts.pair("vo").get((v, o), 0) / (cv * cv)


def pmi_from_counts(c_xy: int, c_x: int, c_y: int, n: int) -> Optional[float]:
    """log(P(x,y) / (P(x) P(y))) with every probability count/N; None if any count is 0."""
    if min(c_xy, c_x, c_y, n) <= 0:
        return None
    return math.log((c_xy * n) / (c_x * c_y))


def joint_count(counts: TripleCounts, x: str, y: str, relation: str) -> int:
    table = counts.pair(relation)
    if x == y:
        return table.get((x, x), 0)
    return table.get((x, y), 0) + table.get((y, x), 0)


def pmi(counts: TripleCounts, x: str, y: str, relation: str = "vo") -> Optional[float]:
    """Pointwise mutual information of two words in a syntactic relation.

    Marginals are whole-corpus unigram counts and N counts every word
    occurrence.  Symmetric in ``x`` and ``y``.
    """
    uni = counts.unigram
    return pmi_from_counts(joint_count(counts, x, y, relation), uni.get(x, 0), uni.get(y, 0), counts.n)


# --- Resnik ---------------------------------------------------------------------


@dataclass(frozen=True)
class ConceptDistribution:
    conditional: dict  # verb -> {concept: P(c|verb)}
    prior: dict  # concept -> P(c)
    dropped_words: int = 0

    def selectional_strength(self, verb: str) -> float:
        cond = self.conditional.get(verb)
        if not cond:
            return 0.0
        return math.fsum(p * math.log(p / self.prior[c]) for c, p in cond.items() if p > 0)

    def selectional_association(self, verb: str, concept: str) -> float:
        strength = self.selectional_strength(verb)
        if strength == 0:
            return 0.0
        p = self.conditional.get(verb, {}).get(concept, 0.0)
        if p == 0:
            return 0.0
        return p * math.log(p / self.prior[concept]) / strength


def build_concept_distribution(counts: TripleCounts, hierarchy: Hierarchy) -> ConceptDistribution:
    """Spread each (verb, object) count evenly over the object's senses and
    credit every sense and each of its ancestors with that share.

    The prior pools all object occurrences regardless of verb.
    """
    freq: dict[str, Counter] = {}
    dropped = set()
    for (v, o), c in sorted(counts.pair("vo").items()):
        senses = hierarchy.word_senses(o)
        if not senses:
            dropped.add(o)
            continue
        share = c / len(senses)
        f = freq.setdefault(v, Counter())
        for s in senses:
            for a in sorted(hierarchy.ancestors(s)):
                f[a] += share
    cond = {}
    prior_f: Counter = Counter()
    for v in sorted(freq):
        f = freq[v]
        total = math.fsum(f.values())
        cond[v] = {c: f[c] / total for c in sorted(f)}
        for c in sorted(f):
            prior_f[c] += f[c]
    ptotal = math.fsum(prior_f.values())
    prior = {c: prior_f[c] / ptotal for c in sorted(prior_f)}
    return ConceptDistribution(cond, prior, len(dropped))


def resnik(dist: ConceptDistribution, hierarchy: Hierarchy, x: str, y: str) -> float:
    """Maximum selectional association of verb ``x`` over every concept ``y`` IsA."""
    senses = hierarchy.word_senses(y)
    if not senses:
        raise UnknownWordError(f"{y!r} has no concept in the hierarchy")
    if dist.selectional_strength(x) == 0:
        return 0.0
    concepts = set()
    for s in senses:
        concepts |= hierarchy.ancestors(s)
    return max(dist.selectional_association(x, c) for c in sorted(concepts))


# --- Pado -----------------------------------------------------------------------


def pado_score(counts: TripleCounts, x: str, y: str, r: str) -> float:
    """P(y | r, x) * P(r | x), both maximum likelihood."""
    c_rx = counts.role_verb_counts.get((r, x), 0)
    c_x = counts.role_verb_totals.get(x, 0)
    if c_rx == 0 or c_x == 0:
        return 0.0
    return (counts.role_counts.get((y, r, x), 0) / c_rx) * (c_rx / c_x)


# --- exemplar --------------------------------------------------------------------


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def exemplar_score(
    vectors: Mapping[str, np.ndarray], seen: Mapping[tuple[str, str], float], x: str, y: str
) -> Optional[float]:
    """Frequency-weighted mean cosine between ``y`` and the words seen with ``x``.

    ``None`` when nothing was seen with ``x``.
    """
    exemplars = sorted((yy, w) for (xx, yy), w in seen.items() if xx == x and w > 0)
    if not exemplars:
        return None
    if y not in vectors:
        raise UnknownWordError(f"no vector for {y!r}")
    z = math.fsum(w for _, w in exemplars)
    vy = np.asarray(vectors[y], dtype=np.float64)
    total = 0.0
    for yy, w in exemplars:
        if yy not in vectors:
            raise UnknownWordError(f"no vector for exemplar {yy!r}")
        total += (w / z) * cosine(vy, np.asarray(vectors[yy], dtype=np.float64))
    return total


def seen_objects(counts: TripleCounts) -> dict[tuple[str, str], int]:
    return dict(counts.pair("vo"))


def pmi_vectors(counts: TripleCounts, k: int = 100, relation: str = "vo") -> dict[str, np.ndarray]:
    """Vectors of PMI with the ``k`` most frequent verbs; undefined entries are 0."""
    verbs = [v for v, _ in sorted(counts.position("v").items(), key=lambda kv: (-kv[1], kv[0]))[:k]]
    words = sorted(set(counts.position("o")) | set(counts.position("s")))
    out = {}
    for w in words:
        out[w] = np.array([pmi(counts, w, v, relation) or 0.0 for v in verbs], dtype=np.float64)
    return out


def parse_vectors(path) -> dict[str, np.ndarray]:
    """TSV rows ``word<TAB>x1<TAB>x2...`` of a fixed dimension."""
    out, dim = {}, None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            try:
                vec = np.array([float(x) for x in cols[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"bad vector value: {exc}", path, lineno) from exc
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ParseError(f"vector of dimension {len(vec)}, expected {dim}", path, lineno)
            out[cols[0]] = vec
    return out


# --- scoring with flags ----------------------------------------------------------


@dataclass(frozen=True)
class ModelScore:
    event: Triple
    model: str
    score: Optional[float]
    flags: tuple[str, ...] = ()

    def to_json(self):
        return {
            "event": list(self.event),
            "model": self.model,
            "score": self.score,
            "flags": list(self.flags),
        }


def score_event(
    model: str,
    t: Triple,
    counts: TripleCounts,
    hierarchy: Optional[Hierarchy] = None,
    dist: Optional[ConceptDistribution] = None,
    vectors: Optional[Mapping[str, np.ndarray]] = None,
    role: str = "obj",
) -> ModelScore:
    """Verb-object plausibility of ``t`` under one model, with a reason flag for fallbacks."""
    s, v, o = t
    flags: list[str] = []
    if model == "ngram":
        if counts.position("v").get(v, 0) == 0:
            flags.append("unseen-verb")
        val = ngram_score(counts, t)
    elif model == "pmi":
        val = pmi(counts, v, o, "vo")
        if val is None:
            flags.append("undefined")
    elif model == "resnik":
        if hierarchy is None or dist is None:
            raise CorefMeterError("resnik needs a hierarchy")
        if v not in dist.conditional:
            flags.append("unseen-verb")
            val = 0.0
        elif dist.selectional_strength(v) == 0:
            flags.append("uninformative-verb")
            val = 0.0
        else:
            try:
                val = resnik(dist, hierarchy, v, o)
            except UnknownWordError:
                flags.append("unknown-word")
                val = None
    elif model == "pado":
        if counts.role_verb_counts.get((role, v), 0) == 0:
            flags.append("unseen-role")
        val = pado_score(counts, v, o, role)
    elif model == "exemplar":
        if vectors is None:
            raise CorefMeterError("exemplar needs vectors")
        try:
            val = exemplar_score(vectors, seen_objects(counts), v, o)
        except UnknownWordError:
            flags.append("unknown-word")
            val = None
        else:
            if val is None:
                flags.append("undefined")
    else:
        raise CorefMeterError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    return ModelScore(Triple(s, v, o), model, val, tuple(flags))


# --- pseudo-disambiguation pairs -------------------------------------------------

FORMS = ("subject", "object", "both")


@dataclass(frozen=True)
class Pair:
    positive: Triple
    negative: Triple
    form: str


def _sampler(items: Sequence[tuple], rng: np.random.Generator):
    keys = [k for k, _ in items]
    cum = np.cumsum(np.array([c for _, c in items], dtype=np.float64))
    total = cum[-1]

    def draw():
        i = int(np.searchsorted(cum, rng.random() * total, side="right"))
        return keys[min(i, len(keys) - 1)]

    return draw


def frequency_filter(counts: TripleCounts, min_count: int) -> TripleCounts:
    """Keep triples whose subject and object each occur at least ``min_count``
    times in their position."""
    if min_count <= 1:
        return counts
    subj, obj = counts.position("s"), counts.position("o")
    return TripleCounts(
        {t: c for t, c in counts.triples.items() if subj[t.subject] >= min_count and obj[t.object] >= min_count}
    )


def generate_pairs(counts: TripleCounts, seed: int, n: int, min_count: int = 0) -> list[Pair]:
    """Attested events paired with random perturbations of themselves.

    The event is drawn by triple count; the perturbation replaces the
    subject, the object, or both, uniformly over the forms feasible for that
    event, with replacements drawn by positional frequency.  Draws equal to
    the original are resampled.
    """
    counts = frequency_filter(counts, min_count)
    if not counts.triples:
        raise CorefMeterError("no triples left after the frequency filter")
    subj = sorted(counts.position("s").items())
    obj = sorted(counts.position("o").items())
    can_s, can_o = len(subj) > 1, len(obj) > 1
    if not (can_s or can_o):
        raise CorefMeterError("vocabulary too small to perturb: one subject and one object")
    rng = np.random.default_rng(seed)
    draw_event = _sampler(sorted(counts.triples.items()), rng)
    draw_s = _sampler(subj, rng)
    draw_o = _sampler(obj, rng)
    feasible = [f for f in FORMS if (f != "object" or can_o) and (f != "subject" or can_s)]
    out = []
    for _ in range(n):
        e = draw_event()
        form = feasible[int(rng.integers(len(feasible)))]
        while True:
            s2 = draw_s() if form in ("subject", "both") else e.subject
            o2 = draw_o() if form in ("object", "both") else e.object
            neg = Triple(s2, e.verb, o2)
            if neg != e:
                break
        out.append(Pair(e, neg, form))
    return out


def score_many(events: Iterable[Triple], model: str, **kw) -> list[ModelScore]:
    return [score_event(model, t, **kw) for t in events]
