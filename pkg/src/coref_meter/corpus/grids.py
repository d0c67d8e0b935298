"""Plausibility score grids over (subject abstraction, object abstraction) pairs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from ..errors import ParseError, ValidationError
from .hierarchy import Hierarchy
from .model import Triple


@dataclass(frozen=True)
class ScoreGrid:
    """``scores[i, j]`` scores (subject_chain[i], verb, object_chain[j]).

    Chains run root -> leaf.
    """

    event: Triple
    subject_chain: tuple[str, ...]
    object_chain: tuple[str, ...]
    scores: np.ndarray
    count: int = 1

    def __post_init__(self):
        arr = np.array(self.scores, dtype=np.float64)
        if arr.ndim != 2 or arr.shape != (len(self.subject_chain), len(self.object_chain)):
            raise ValidationError(
                f"{self.event}: score matrix shape {arr.shape} does not match chains "
                f"{len(self.subject_chain)}x{len(self.object_chain)}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"{self.event}: non-finite score")
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.scores.shape

    def __eq__(self, other):
        return (
            isinstance(other, ScoreGrid)
            and self.event == other.event
            and self.subject_chain == other.subject_chain
            and self.object_chain == other.object_chain
            and self.count == other.count
            and np.array_equal(self.scores, other.scores)
        )

    __hash__ = None

    def to_json(self) -> dict:
        return {
            "event": list(self.event),
            "count": self.count,
            "subject_chain": list(self.subject_chain),
            "object_chain": list(self.object_chain),
            "scores": self.scores.tolist(),
        }


def _event(raw) -> tuple[Triple, int]:
    if isinstance(raw, dict):
        return Triple(raw["subject"], raw["verb"], raw["object"]), int(raw.get("count", 1))
    if isinstance(raw, list) and len(raw) == 3:
        return Triple(*map(str, raw)), 1
    raise ValueError(f"bad event {raw!r}")


def check_grid_hierarchy(grid: ScoreGrid, hierarchy: Hierarchy) -> None:
    for name, chain in (("subject", grid.subject_chain), ("object", grid.object_chain)):
        leaf = chain[-1] if chain else None
        if leaf is None or leaf not in hierarchy.depth:
            raise ValidationError(f"{grid.event}: {name} leaf {leaf!r} not in hierarchy")
        expect = hierarchy.chain(leaf)
        if tuple(chain) != expect:
            raise ValidationError(f"{grid.event}: {name} chain {list(chain)} is not the hypernym chain {list(expect)}")


def parse_score_grid(path, hierarchy: Optional[Hierarchy] = None) -> list[ScoreGrid]:
    """JSON lines with ``event``, ``subject_chain``, ``object_chain``, ``scores`` (row-major).

    When ``hierarchy`` is given every chain must equal that hierarchy's chain
    for its leaf.
    """
    path = Path(path)
    grids = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path, lineno, exc.colno) from exc
            try:
                event, count = _event(rec.get("event"))
                grid = ScoreGrid(
                    event, tuple(rec["subject_chain"]), tuple(rec["object_chain"]), rec["scores"], count
                )
                if hierarchy is not None:
                    check_grid_hierarchy(grid, hierarchy)
            except (KeyError, ValueError, TypeError, ValidationError) as exc:
                raise ParseError(str(exc), path, lineno) from exc
            grids.append(grid)
    return grids


def format_score_grids(grids: Iterable[ScoreGrid]) -> str:
    return "".join(json.dumps(g.to_json()) + "\n" for g in grids)


def write_score_grids(grids: Iterable[ScoreGrid], path) -> None:
    Path(path).write_text(format_score_grids(grids), encoding="utf-8")
