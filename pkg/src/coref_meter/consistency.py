"""Consistency of plausibility scores along hypernym chains, ConceptMax, and AUC."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .corpus.grids import ScoreGrid
from .corpus.model import Triple
from .errors import CorefMeterError, ParseError
from .parallel import pmap

AXES = ("subject", "object", "both-paths")


def sequence_windows(seq: Sequence[float]) -> np.ndarray:
    """All consecutive (a[i-1], a[i], a[i+1]) triples of one sequence."""
    a = np.asarray(seq, dtype=np.float64)
    if len(a) < 3:
        return np.empty((0, 3))
    return np.ascontiguousarray(np.stack([a[:-2], a[1:-1], a[2:]], axis=1))


def abstraction_windows(grid, axis: str = "both-paths") -> np.ndarray:
    """Windows along the chains of a grid.

    ``object`` walks each row (subject abstraction fixed) along the object
    chain, ``subject`` walks each column along the subject chain, and
    ``both-paths`` gives rows then columns.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    scores = grid.scores if isinstance(grid, ScoreGrid) else np.asarray(grid, dtype=np.float64)
    parts = []
    if axis in ("object", "both-paths"):
        parts.extend(sequence_windows(row) for row in scores)
    if axis in ("subject", "both-paths"):
        parts.extend(sequence_windows(col) for col in scores.T)
    parts = [p for p in parts if len(p)]
    if not parts:
        return np.empty((0, 3))
    return np.ascontiguousarray(np.concatenate(parts))


def concavity_delta(a_prev: float, a: float, a_next: float) -> float:
    """Midpoint of the neighbours minus the middle value when that is positive, else 0."""
    d = 0.5 * ((a_prev - a) + (a_next - a))
    return d if d > 0.0 else 0.0


def ccd(windows) -> Optional[float]:
    """Mean divergence from concavity; None with no windows."""
    w = np.ascontiguousarray(windows, dtype=np.float64).reshape(-1, 3)
    if len(w) == 0:
        return None
    total, _ = _kernels.window_stats(w)
    return total / len(w)


def ler(windows) -> Optional[float]:
    """Share of windows whose middle value is a strict local extremum; None with no windows."""
    w = np.ascontiguousarray(windows, dtype=np.float64).reshape(-1, 3)
    if len(w) == 0:
        return None
    _, extrema = _kernels.window_stats(w)
    return extrema / len(w)


@dataclass(frozen=True)
class ConsistencyReport:
    ccd: Optional[float]
    ler: Optional[float]
    windows: int
    grids: int = 0
    grids_without_windows: int = 0

    def to_json(self):
        return {
            "ccd": self.ccd,
            "ler": self.ler,
            "windows": self.windows,
            "grids": self.grids,
            "grids_without_windows": self.grids_without_windows,
        }


def _report(stats: Sequence[tuple[float, int, int]], n_grids: int) -> ConsistencyReport:
    windows = sum(s[2] for s in stats)
    empty = sum(1 for s in stats if s[2] == 0)
    if windows == 0:
        return ConsistencyReport(None, None, 0, n_grids, empty)
    delta = math.fsum(s[0] for s in stats)
    extrema = sum(s[1] for s in stats)
    return ConsistencyReport(delta / windows, extrema / windows, windows, n_grids, empty)


def consistency_report(grids: Sequence, axis: str = "both-paths", threads=None) -> ConsistencyReport:
    """CCD and LER pooled over every window of every grid."""

    def per_grid(g):
        w = abstraction_windows(g, axis)
        if len(w) == 0:
            return 0.0, 0, 0
        total, extrema = _kernels.window_stats(w)
        return total, extrema, len(w)

    return _report(pmap(per_grid, grids, threads), len(grids))


def consistency_breakdown(grids: Sequence, threads=None) -> dict[str, ConsistencyReport]:
    return {axis: consistency_report(grids, axis, threads) for axis in AXES}


# --- ConceptMax ----------------------------------------------------------------------


def concept_max(grid, mode: str = "hard") -> float:
    """Event score as the hard max or LogSumExp over every abstraction cell."""
    scores = grid.scores if isinstance(grid, ScoreGrid) else np.asarray(grid, dtype=np.float64)
    if scores.size == 0:
        raise CorefMeterError("empty score grid")
    if mode == "hard":
        return float(scores.max())
    if mode == "soft":
        return float(logsumexp(scores))
    raise ValueError(f"mode must be 'hard' or 'soft', not {mode!r}")


def concept_max_transform(grid):
    """Each cell becomes the max over the cells of its own ancestors (i' <= i, j' <= j)."""
    scores = grid.scores if isinstance(grid, ScoreGrid) else np.asarray(grid, dtype=np.float64)
    out = np.maximum.accumulate(np.maximum.accumulate(scores, axis=0), axis=1)
    if isinstance(grid, ScoreGrid):
        return ScoreGrid(grid.event, grid.subject_chain, grid.object_chain, out, grid.count)
    return out


# --- AUC ------------------------------------------------------------------------------

PLAUSIBLE, IMPLAUSIBLE = "plausible", "implausible"
TWENTYQ_NEGATIVE = "never"
TWENTYQ_ANSWERS = ("always", "usually", "sometimes", "rarely", "never")


@dataclass(frozen=True)
class LabeledEvent:
    event: Triple
    label: str
    source: str = ""

    @property
    def positive(self) -> bool:
        return self.label == PLAUSIBLE


def auc_from_scores(pos: Sequence[float], neg: Sequence[float]) -> float:
    """P(random positive outscores random negative), ties counted half."""
    if len(pos) == 0 or len(neg) == 0:
        raise CorefMeterError("AUC needs both plausible and implausible events")
    p = np.sort(np.asarray(pos, dtype=np.float64))
    n = np.sort(np.asarray(neg, dtype=np.float64))
    halves = _kernels.auc_halves(np.ascontiguousarray(p), np.ascontiguousarray(n))
    return halves / (2 * len(p) * len(n))


def auc(events: Sequence[LabeledEvent], scores: Mapping[Triple, float]) -> float:
    missing = [e.event for e in events if e.event not in scores]
    if missing:
        raise CorefMeterError(f"no score for event {' '.join(missing[0])!r}")
    pos = [scores[e.event] for e in events if e.positive]
    neg = [scores[e.event] for e in events if not e.positive]
    if not pos or not neg:
        raise CorefMeterError("AUC needs both plausible and implausible events")
    return auc_from_scores(pos, neg)


def _triple(rec) -> Triple:
    ev = rec.get("event")
    if isinstance(ev, list) and len(ev) == 3:
        return Triple(*map(str, ev))
    return Triple(str(rec["subject"]), str(rec["verb"]), str(rec["object"]))


def normalize_label(raw) -> str:
    """Binary labels pass through; 20 Questions answers map 'never' to implausible."""
    if isinstance(raw, bool):
        return PLAUSIBLE if raw else IMPLAUSIBLE
    if isinstance(raw, (int, float)) and raw in (0, 1):
        return PLAUSIBLE if raw == 1 else IMPLAUSIBLE
    s = str(raw).strip().lower()
    if s in (PLAUSIBLE, IMPLAUSIBLE):
        return s
    if s in TWENTYQ_ANSWERS:
        return IMPLAUSIBLE if s == TWENTYQ_NEGATIVE else PLAUSIBLE
    raise ValueError(f"unrecognized label {raw!r}")


def read_labeled_events(path) -> list[LabeledEvent]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(LabeledEvent(_triple(rec), normalize_label(rec["label"]), str(rec.get("source", ""))))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ParseError(f"bad labeled event: {exc}", path, lineno) from exc
    return out


def read_event_scores(path) -> dict[Triple, float]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                t = _triple(rec)
                score = rec["score"]
                if score is None:
                    raise ValueError("null score")
                out[t] = float(score)
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ParseError(f"bad score record: {exc}", path, lineno) from exc
    return out


def iter_triples(events: Iterable[LabeledEvent]) -> list[Triple]:
    return [e.event for e in events]
