"""Subject-verb-object occurrence counts."""

from __future__ import annotations

import hashlib
from collections import Counter
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional

from ..errors import ParseError
from .model import Triple

TRIPLE_CAP = 1000


class TripleCounts:
    """Aggregated s-v-o counts with the marginals the plausibility models need.

    ``roles`` optionally holds role-conditioned counts keyed ``(word, role,
    verb)``.  When absent they are derived from the triples themselves with
    the syntactic positions ``subj`` and ``obj`` as roles.
    """

    def __init__(self, counts: Optional[Mapping[Triple, int]] = None, roles: Optional[Mapping[tuple, int]] = None):
        self.triples: dict[Triple, int] = {}
        for t, c in (counts or {}).items():
            if c < 0:
                raise ValueError(f"negative count for {t}")
            if c:
                self.triples[Triple(*t)] = int(c)
        self._roles = dict(roles) if roles is not None else None

    def __len__(self):
        return len(self.triples)

    def __eq__(self, other):
        return isinstance(other, TripleCounts) and self.triples == other.triples and self._roles == other._roles

    def __getitem__(self, t) -> int:
        return self.triples.get(Triple(*t), 0)

    @property
    def total(self) -> int:
        return sum(self.triples.values())

    def merge(self, other: "TripleCounts") -> "TripleCounts":
        out = Counter(self.triples)
        out.update(other.triples)
        roles = None
        if self._roles is not None or other._roles is not None:
            roles = Counter(self._roles or {})
            roles.update(other._roles or {})
        return TripleCounts(out, roles)

    def capped(self, cap: int = TRIPLE_CAP) -> "TripleCounts":
        return TripleCounts({t: min(c, cap) for t, c in self.triples.items()}, self._roles)

    def corpus_hash(self) -> str:
        h = hashlib.sha256()
        for t in sorted(self.triples):
            h.update(f"{t.subject}\t{t.verb}\t{t.object}\t{self.triples[t]}\n".encode())
        return h.hexdigest()

    # marginals ------------------------------------------------------------

    @cached_property
    def _marginals(self):
        sv, vo, so = Counter(), Counter(), Counter()
        subj, verb, obj, uni = Counter(), Counter(), Counter(), Counter()
        for (s, v, o), c in self.triples.items():
            sv[s, v] += c
            vo[v, o] += c
            so[s, o] += c
            subj[s] += c
            verb[v] += c
            obj[o] += c
            uni[s] += c
            uni[v] += c
            uni[o] += c
        return {"sv": sv, "vo": vo, "so": so, "s": subj, "v": verb, "o": obj, "unigram": uni}

    def pair(self, relation: str) -> Counter:
        """Joint counts for ``sv``, ``vo`` or ``so`` keyed by the ordered pair."""
        if relation not in ("sv", "vo", "so"):
            raise ValueError(f"unknown relation {relation!r}")
        return self._marginals[relation]

    def position(self, pos: str) -> Counter:
        """Counts of words in one position: ``s``, ``v`` or ``o``."""
        return self._marginals[pos]

    @property
    def unigram(self) -> Counter:
        return self._marginals["unigram"]

    @property
    def n(self) -> int:
        """Corpus size: every word occurrence in every position."""
        return 3 * self.total

    @cached_property
    def role_counts(self) -> dict[tuple[str, str, str], int]:
        if self._roles is not None:
            return dict(self._roles)
        roles: Counter = Counter()
        for (s, v, o), c in self.triples.items():
            roles[s, "subj", v] += c
            roles[o, "obj", v] += c
        return dict(roles)

    @cached_property
    def role_verb_counts(self) -> dict[tuple[str, str], int]:
        rx: Counter = Counter()
        for (_, r, x), c in self.role_counts.items():
            rx[r, x] += c
        return dict(rx)

    @cached_property
    def role_verb_totals(self) -> dict[str, int]:
        tot: Counter = Counter()
        for (_, x), c in self.role_verb_counts.items():
            tot[x] += c
        return dict(tot)


def _read_rows(path, ncols: int, what: str):
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != ncols:
                raise ParseError(f"{what} row needs {ncols} tab-separated fields, found {len(cols)}", path, lineno)
            for i, c in enumerate(cols[:-1]):
                if not c or any(ch.isspace() for ch in c):
                    raise ParseError(f"empty or whitespace-containing lemma {c!r}", path, lineno, i + 1)
            try:
                count = int(cols[-1])
            except ValueError:
                raise ParseError(f"non-integer count {cols[-1]!r}", path, lineno, ncols) from None
            if count < 0:
                raise ParseError(f"negative count {count}", path, lineno, ncols)
            yield tuple(cols[:-1]), count


def parse_triples(path, cap_per_triple: Optional[int] = None) -> TripleCounts:
    """Read ``s<TAB>v<TAB>o<TAB>count`` rows; duplicate rows are summed.

    With ``cap_per_triple`` every summed count is clamped to that value.
    """
    counts: Counter = Counter()
    for key, c in _read_rows(path, 4, "triple"):
        counts[Triple(*key)] += c
    tc = TripleCounts(counts)
    return tc.capped(cap_per_triple) if cap_per_triple is not None else tc


def parse_role_counts(path) -> dict[tuple[str, str, str], int]:
    """Read ``word<TAB>role<TAB>verb<TAB>count`` rows."""
    counts: Counter = Counter()
    for key, c in _read_rows(path, 4, "role"):
        counts[key] += c
    return dict(counts)


def format_triples(tc: TripleCounts) -> str:
    return "".join(f"{t.subject}\t{t.verb}\t{t.object}\t{tc.triples[t]}\n" for t in sorted(tc.triples))


def write_triples(tc: TripleCounts, path) -> None:
    Path(path).write_text(format_triples(tc), encoding="utf-8")


def merge_all(parts: Iterable[TripleCounts]) -> TripleCounts:
    out = TripleCounts()
    for p in parts:
        out = out.merge(p)
    return out
