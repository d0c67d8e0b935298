"""Type-restricted B3, generalization gaps and paired permutation tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from . import _kernels
from .corpus.model import EntityPartition, Mention
from .metrics import CorefReport, MetricCounts, MetricScore, b3_counts
from .mention_types import CorefType, TypedMention
from .parallel import pmap

PERMUTATION_CHUNK = 1000
DEFAULT_HIGHLIGHT = 0.10
TIE_EPS = 1e-12


def _typed(types: Mapping, t: Optional[CorefType]) -> Optional[frozenset]:
    if t is None:
        return None
    out = []
    for m, v in types.items():
        ts = v.types if isinstance(v, TypedMention) else v
        if t in ts:
            out.append(m)
    return frozenset(out)


def typed_b3_counts(gold, pred, gold_types, pred_types, t, keep_singletons=False) -> MetricCounts:
    return b3_counts(gold, pred, keep_singletons, _typed(gold_types, t), _typed(pred_types, t))


def typed_b3(
    gold: EntityPartition,
    pred: EntityPartition,
    gold_types: Mapping[Mention, object],
    pred_types: Mapping[Mention, object],
    t: Optional[CorefType],
    keep_singletons: bool = False,
) -> MetricScore:
    """B3 averaged only over mentions of type ``t``.

    Recall averages over typed gold mentions, precision over typed predicted
    mentions; each mention's entity context stays the full entity.  ``t=None``
    means every mention qualifies.
    """
    return typed_b3_counts(gold, pred, gold_types, pred_types, t, keep_singletons).score()


@dataclass(frozen=True)
class TypedScore:
    score: MetricScore
    gold_count: int
    pred_count: int

    def to_json(self):
        return {**self.score.to_json(), "gold_mentions": self.gold_count, "predicted_mentions": self.pred_count}

    @classmethod
    def from_json(cls, d):
        return cls(MetricScore.from_json(d), d["gold_mentions"], d["predicted_mentions"])

    @property
    def degenerate(self) -> bool:
        return self.gold_count == 0 or self.pred_count == 0


@dataclass(frozen=True)
class DisaggReport:
    overall: CorefReport
    per_type: dict  # CorefType -> TypedScore
    dataset: str = ""

    def to_json(self) -> dict:
        return {
            "dataset": self.dataset,
            "overall": self.overall.to_json(),
            "per_type": {t.value: s.to_json() for t, s in sorted(self.per_type.items(), key=lambda x: x[0].value)},
        }

    @classmethod
    def from_json(cls, d: dict) -> "DisaggReport":
        return cls(
            CorefReport.from_json(d["overall"]),
            {CorefType(k): TypedScore.from_json(v) for k, v in d.get("per_type", {}).items()},
            d.get("dataset", ""),
        )


def disaggregate(
    docs: Sequence[tuple[str, EntityPartition, EntityPartition, Mapping, Mapping]],
    overall: CorefReport,
    dataset: str = "",
    keep_singletons: bool = False,
    threads: Optional[int] = None,
) -> DisaggReport:
    """Micro-averaged typed B3 over documents given as (doc_id, gold, pred, gold_types, pred_types)."""

    def per_doc(item):
        _, gold, pred, gt, pt = item
        return {t: typed_b3_counts(gold, pred, gt, pt, t, keep_singletons) for t in CorefType}

    parts = pmap(per_doc, docs, threads)
    per_type = {}
    for t in CorefType:
        total = MetricCounts()
        for p in parts:
            total = total + p[t]
        per_type[t] = TypedScore(total.score(), total.r_den, total.p_den)
    return DisaggReport(overall, per_type, dataset)


@dataclass(frozen=True)
class GapReport:
    agg: float
    tgg: dict  # CorefType -> float
    incomparable: tuple = ()
    highlighted: tuple = ()
    threshold: float = DEFAULT_HIGHLIGHT
    conll_gap: Optional[float] = None

    def to_json(self):
        return {
            "agg": self.agg,
            "conll_gap": self.conll_gap,
            "tgg": {t.value: v for t, v in sorted(self.tgg.items(), key=lambda x: x[0].value)},
            "incomparable": [t.value for t in self.incomparable],
            "highlighted": [t.value for t in self.highlighted],
            "highlight_threshold": self.threshold,
        }


def generalization_gap(
    in_domain: DisaggReport, out_domain: DisaggReport, threshold: float = DEFAULT_HIGHLIGHT
) -> GapReport:
    """Absolute in- vs out-of-domain B3 F1 differences, overall and per type.

    A type is highlighted when its gap differs from the overall gap by more
    than ``threshold`` (on the 0-1 scale).
    """
    agg = abs(in_domain.overall.b3.f1 - out_domain.overall.b3.f1)
    conll = abs(in_domain.overall.conll_f1 - out_domain.overall.conll_f1)
    tgg, bad, hot = {}, [], []
    for t in CorefType:
        a, b = in_domain.per_type.get(t), out_domain.per_type.get(t)
        if a is None or b is None or a.degenerate or b.degenerate:
            bad.append(t)
            continue
        tgg[t] = abs(a.score.f1 - b.score.f1)
        if abs(tgg[t] - agg) > threshold:
            hot.append(t)
    return GapReport(agg, tgg, tuple(bad), tuple(hot), threshold, conll)


def highlight(type_f1: float, overall_f1: float, threshold: float = DEFAULT_HIGHLIGHT) -> bool:
    """Within one test set: does a type's score fall away from the aggregate?"""
    return abs(overall_f1 - type_f1) > threshold


# --- permutation test -----------------------------------------------------------


def _flip_chunks(n: int, iterations: int, seed: int):
    """Fixed-size chunks, each with its own child seed, so results ignore thread count."""
    nchunks = -(-iterations // PERMUTATION_CHUNK)
    children = np.random.SeedSequence(seed).spawn(nchunks)
    for k, child in enumerate(children):
        size = min(PERMUTATION_CHUNK, iterations - k * PERMUTATION_CHUNK)
        yield k, size, child


def _run(stat_fn, n, iterations, seed, threads):
    identity = np.zeros((1, n), dtype=np.uint8)
    observed = float(stat_fn(identity)[0])

    def chunk(job):
        _, size, child = job
        flips = np.random.default_rng(child).integers(0, 2, size=(size, n), dtype=np.uint8)
        stats = stat_fn(flips)
        return int(np.count_nonzero(stats >= observed - TIE_EPS))

    hits = sum(pmap(chunk, list(_flip_chunks(n, iterations, seed)), threads))
    # the identity permutation always counts, so p > 0
    return (hits + 1) / (iterations + 1), observed


@dataclass(frozen=True)
class PermutationResult:
    p_value: float
    observed: float
    iterations: int
    seed: int

    def significant(self, alpha: float = 0.1) -> bool:
        return self.p_value < alpha


def permutation_test(
    scores_a: Sequence[float], scores_b: Sequence[float], iterations: int = 10000, seed: int = 0, threads=None
) -> float:
    """Two-sided paired sign-flip test on the mean difference."""
    return permutation_test_result(scores_a, scores_b, iterations, seed, threads).p_value


def permutation_test_result(scores_a, scores_b, iterations=10000, seed=0, threads=None) -> PermutationResult:
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired score lists differ in length: {a.shape} vs {b.shape}")
    if len(a) == 0:
        raise ValueError("need at least one paired score")
    if iterations < 1:
        raise ValueError("iterations must be positive")
    diffs = np.ascontiguousarray(a - b)
    p, obs = _run(lambda f: _kernels.flip_mean_stats(diffs, f), len(a), iterations, seed, threads)
    return PermutationResult(p, obs, iterations, seed)


def permutation_test_counts(
    counts_a: np.ndarray, counts_b: np.ndarray, iterations: int = 10000, seed: int = 0, threads=None
) -> PermutationResult:
    """Sign-flip test where the statistic is the corpus F1 difference.

    ``counts_*`` are (documents, metrics*4) arrays of per-document metric
    sums; a flip swaps one document's counts between the two systems and the
    micro F1 (averaged over metrics) is recomputed.
    """
    a = np.ascontiguousarray(counts_a, dtype=np.float64)
    b = np.ascontiguousarray(counts_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2 or a.shape[1] % 4 or a.shape[1] == 0:
        raise ValueError(f"count arrays must be matching (docs, 4k): {a.shape} vs {b.shape}")
    if a.shape[0] == 0:
        raise ValueError("need at least one document")
    p, obs = _run(lambda f: _kernels.flip_f1_stats(a, b, f), a.shape[0], iterations, seed, threads)
    return PermutationResult(p, obs, iterations, seed)


__all__ = [
    "DisaggReport",
    "GapReport",
    "PermutationResult",
    "TypedScore",
    "disaggregate",
    "generalization_gap",
    "highlight",
    "permutation_test",
    "permutation_test_counts",
    "permutation_test_result",
    "typed_b3",
    "typed_b3_counts",
]
