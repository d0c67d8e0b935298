"""MUC, B-cubed, CEAF-e and CoNLL F1.

Every metric is computed as four numbers (recall numerator/denominator,
precision numerator/denominator) so corpus scores can be micro-averaged by
summation.  Numerators are exact rationals; floats appear only when a score
is read out, which keeps results independent of summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .corpus.model import EntityPartition

METRICS = ("muc", "b3", "ceaf_e")
CEAF_PHI = "phi4"


def f1_score(recall: float, precision: float) -> float:
    if recall > 0 and precision > 0:
        return 2.0 * precision * recall / (precision + recall)
    return 0.0


@dataclass(frozen=True)
class MetricScore:
    recall: float
    precision: float
    f1: float
    degenerate: tuple[str, ...] = ()

    def to_json(self) -> dict:
        out = {"recall": self.recall, "precision": self.precision, "f1": self.f1}
        if self.degenerate:
            out["degenerate"] = list(self.degenerate)
        return out

    @classmethod
    def from_json(cls, d: dict) -> "MetricScore":
        return cls(d["recall"], d["precision"], d["f1"], tuple(d.get("degenerate", ())))


@dataclass(frozen=True)
class MetricCounts:
    r_num: Fraction = Fraction(0)
    r_den: int = 0
    p_num: Fraction = Fraction(0)
    p_den: int = 0

    def __add__(self, other: "MetricCounts") -> "MetricCounts":
        return MetricCounts(
            self.r_num + other.r_num, self.r_den + other.r_den, self.p_num + other.p_num, self.p_den + other.p_den
        )

    def score(self) -> MetricScore:
        flags = []
        if self.r_den == 0:
            flags.append("recall")
        if self.p_den == 0:
            flags.append("precision")
        r = float(self.r_num / self.r_den) if self.r_den else 0.0
        p = float(self.p_num / self.p_den) if self.p_den else 0.0
        return MetricScore(r, p, f1_score(r, p), tuple(flags))

    def as_floats(self) -> tuple[float, float, float, float]:
        return float(self.r_num), float(self.r_den), float(self.p_num), float(self.p_den)


def _prepare(gold: EntityPartition, pred: EntityPartition, keep_singletons: bool):
    if keep_singletons:
        return gold, pred
    return gold.without_singletons(), pred.without_singletons()


# --- MUC ----------------------------------------------------------------------


def _muc_side(key: EntityPartition, response: EntityPartition) -> tuple[int, int]:
    owner = response.entity_of()
    num = den = 0
    for ent in key.entities:
        if len(ent) < 2:
            continue
        parts = set()
        loose = 0
        for m in ent:
            r = owner.get(m)
            if r is None:
                loose += 1  # unpredicted mentions form their own part
            else:
                parts.add(r)
        num += len(ent) - (len(parts) + loose)
        den += len(ent) - 1
    return num, den


def muc_counts(gold: EntityPartition, pred: EntityPartition, keep_singletons: bool = False) -> MetricCounts:
    gold, pred = _prepare(gold, pred, keep_singletons)
    rn, rd = _muc_side(gold, pred)
    pn, pd = _muc_side(pred, gold)
    return MetricCounts(Fraction(rn), rd, Fraction(pn), pd)


def muc_score(gold: EntityPartition, pred: EntityPartition, keep_singletons: bool = False) -> MetricScore:
    """Link-based MUC.  Recall sums |S| - |p(S)| over gold entities over sum |S| - 1."""
    return muc_counts(gold, pred, keep_singletons).score()


# --- B-cubed ------------------------------------------------------------------


def _b3_side(key: EntityPartition, response: EntityPartition, only: Optional[frozenset] = None) -> tuple[Fraction, int]:
    owner = response.entity_of()
    num = Fraction(0)
    den = 0
    for ent in key.entities:
        size = len(ent)
        for m in ent:
            if only is not None and m not in only:
                continue
            den += 1
            r = owner.get(m)
            if r is not None:
                num += Fraction(len(ent & r), size)
    return num, den


def b3_counts(
    gold: EntityPartition,
    pred: EntityPartition,
    keep_singletons: bool = False,
    gold_only: Optional[frozenset] = None,
    pred_only: Optional[frozenset] = None,
) -> MetricCounts:
    """B-cubed sums.  ``gold_only``/``pred_only`` restrict which mentions are
    averaged over while leaving the entity contexts untouched."""
    gold, pred = _prepare(gold, pred, keep_singletons)
    rn, rd = _b3_side(gold, pred, gold_only)
    pn, pd = _b3_side(pred, gold, pred_only)
    return MetricCounts(rn, rd, pn, pd)


def b3_score(gold: EntityPartition, pred: EntityPartition, keep_singletons: bool = False) -> MetricScore:
    return b3_counts(gold, pred, keep_singletons).score()


# --- CEAF-e -------------------------------------------------------------------


def phi4(a: frozenset, b: frozenset) -> Fraction:
    return Fraction(2 * len(a & b), len(a) + len(b))


def ceaf_alignment(gold: EntityPartition, pred: EntityPartition) -> list[tuple[int, int]]:
    """Maximum-weight one-to-one entity alignment under phi4."""
    if not gold.entities or not pred.entities:
        return []
    sim = np.zeros((len(gold.entities), len(pred.entities)))
    pred_owner = pred.entity_of()
    index = {id(e): j for j, e in enumerate(pred.entities)}
    for i, g in enumerate(gold.entities):
        for m in g:
            p = pred_owner.get(m)
            if p is not None:
                j = index[id(p)]
                if sim[i, j] == 0:
                    sim[i, j] = float(phi4(g, p))
    rows, cols = linear_sum_assignment(sim, maximize=True)
    return [(int(i), int(j)) for i, j in zip(rows, cols) if sim[i, j] > 0]


def ceaf_e_counts(gold: EntityPartition, pred: EntityPartition, keep_singletons: bool = False) -> MetricCounts:
    gold, pred = _prepare(gold, pred, keep_singletons)
    total = sum(
        (phi4(gold.entities[i], pred.entities[j]) for i, j in ceaf_alignment(gold, pred)), Fraction(0)
    )
    return MetricCounts(total, len(gold.entities), total, len(pred.entities))


def ceaf_e_score(gold: EntityPartition, pred: EntityPartition, keep_singletons: bool = False) -> MetricScore:
    """Entity-based CEAF with the normalized phi4 similarity."""
    return ceaf_e_counts(gold, pred, keep_singletons).score()


# --- CoNLL report ---------------------------------------------------------------

COUNTERS = {"muc": muc_counts, "b3": b3_counts, "ceaf_e": ceaf_e_counts}


def conll_f1(report: "CorefReport") -> float:
    """Mean of the MUC, B3 and CEAF-e F1 scores (order independent)."""
    return math.fsum(report.scores[m].f1 for m in METRICS) / 3


@dataclass(frozen=True)
class DocCounts:
    doc_id: str
    counts: dict  # metric -> MetricCounts
    n_gold: int
    n_pred: int


def document_counts(
    doc_id: str, gold: EntityPartition, pred: EntityPartition, keep_singletons: bool = False
) -> DocCounts:
    g, p = _prepare(gold, pred, keep_singletons)
    counts = {m: COUNTERS[m](g, p, keep_singletons=True) for m in METRICS}
    return DocCounts(doc_id, counts, len(g.mentions), len(p.mentions))


@dataclass(frozen=True)
class CorefReport:
    scores: dict  # metric -> MetricScore
    n_gold_mentions: int
    n_pred_mentions: int
    n_documents: int = 1
    aggregation: str = "micro"
    keep_singletons: bool = False
    degenerate_documents: tuple[str, ...] = field(default=())

    @property
    def muc(self) -> MetricScore:
        return self.scores["muc"]

    @property
    def b3(self) -> MetricScore:
        return self.scores["b3"]

    @property
    def ceaf_e(self) -> MetricScore:
        return self.scores["ceaf_e"]

    @property
    def conll_f1(self) -> float:
        return conll_f1(self)

    def to_json(self) -> dict:
        return {
            "metrics": {m: self.scores[m].to_json() for m in METRICS},
            "conll_f1": self.conll_f1,
            "mentions": {"gold": self.n_gold_mentions, "predicted": self.n_pred_mentions},
            "documents": self.n_documents,
            "degenerate_documents": list(self.degenerate_documents),
            "settings": {
                "aggregation": self.aggregation,
                "keep_singletons": self.keep_singletons,
                "ceaf_similarity": CEAF_PHI,
            },
        }

    @classmethod
    def from_json(cls, d: dict) -> "CorefReport":
        s = d.get("settings", {})
        return cls(
            {m: MetricScore.from_json(d["metrics"][m]) for m in METRICS},
            d["mentions"]["gold"],
            d["mentions"]["predicted"],
            d.get("documents", 1),
            s.get("aggregation", "micro"),
            s.get("keep_singletons", False),
            tuple(d.get("degenerate_documents", ())),
        )


def combine(doc_counts: Sequence[DocCounts], macro: bool = False, keep_singletons: bool = False) -> CorefReport:
    degenerate = tuple(
        d.doc_id for d in doc_counts if any(c.r_den == 0 or c.p_den == 0 for c in d.counts.values())
    )
    n_gold = sum(d.n_gold for d in doc_counts)
    n_pred = sum(d.n_pred for d in doc_counts)
    scores = {}
    for m in METRICS:
        if macro:
            per = [d.counts[m].score() for d in doc_counts]
            if per:
                r = math.fsum(s.recall for s in per) / len(per)
                p = math.fsum(s.precision for s in per) / len(per)
                scores[m] = MetricScore(r, p, math.fsum(s.f1 for s in per) / len(per))
            else:
                scores[m] = MetricScore(0.0, 0.0, 0.0, ("recall", "precision"))
        else:
            total = MetricCounts()
            for d in doc_counts:
                total = total + d.counts[m]
            scores[m] = total.score()
    return CorefReport(scores, n_gold, n_pred, len(doc_counts), "macro" if macro else "micro", keep_singletons, degenerate)


def score_partitions(gold: EntityPartition, pred: EntityPartition, keep_singletons: bool = False) -> CorefReport:
    return combine([document_counts("", gold, pred, keep_singletons)], keep_singletons=keep_singletons)


def doc_count_matrix(doc_counts: Iterable[DocCounts], metrics: Sequence[str] = METRICS) -> np.ndarray:
    """(docs, metrics*4) float array used by the permutation kernels."""
    rows = [[x for m in metrics for x in d.counts[m].as_floats()] for d in doc_counts]
    return np.array(rows, dtype=np.float64).reshape(len(rows), 4 * len(metrics))
