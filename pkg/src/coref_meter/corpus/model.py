"""In-memory data model shared by every module.

All values are immutable once built so they can be handed to worker threads
without copying.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence

from ..errors import ValidationError


class Mention(NamedTuple):
    """Contiguous token span, inclusive on both ends, document-global indices."""

    start: int
    end: int

    def overlaps(self, other: "Mention") -> bool:
        return self.start <= other.end and other.start <= self.end

    def contains(self, other: "Mention") -> bool:
        return self.start <= other.start and other.end <= self.end

    @property
    def width(self) -> int:
        return self.end - self.start + 1


def make_mention(start: int, end: int) -> Mention:
    if start > end:
        raise ValidationError(f"mention start {start} > end {end}")
    return Mention(int(start), int(end))


@dataclass(frozen=True)
class EntityPartition:
    """A family of pairwise disjoint, non-empty mention sets."""

    entities: tuple[frozenset[Mention], ...] = ()

    def __post_init__(self):
        seen: set[Mention] = set()
        for ent in self.entities:
            if not ent:
                raise ValidationError("empty entity in partition")
            dup = seen.intersection(ent)
            if dup:
                raise ValidationError(f"mention {sorted(dup)[0]} occurs in two entities")
            seen.update(ent)

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[Sequence[int]]]) -> "EntityPartition":
        ents = []
        for cluster in clusters:
            ent = frozenset(make_mention(*span) for span in cluster)
            if ent:
                ents.append(ent)
        return cls(canonical_order(ents))

    @property
    def mentions(self) -> frozenset[Mention]:
        return frozenset(m for ent in self.entities for m in ent)

    def __len__(self) -> int:
        return len(self.entities)

    def __iter__(self) -> Iterator[frozenset[Mention]]:
        return iter(self.entities)

    def entity_of(self) -> dict[Mention, frozenset[Mention]]:
        return {m: ent for ent in self.entities for m in ent}

    def without_singletons(self) -> "EntityPartition":
        return EntityPartition(tuple(e for e in self.entities if len(e) > 1))

    def to_clusters(self) -> list[list[list[int]]]:
        return [[[m.start, m.end] for m in sorted(ent)] for ent in self.entities]


def canonical_order(entities: Iterable[frozenset[Mention]]) -> tuple[frozenset[Mention], ...]:
    """Order entities by their first mention so equal partitions compare equal."""
    return tuple(sorted(entities, key=lambda e: sorted(e)))


@dataclass(frozen=True)
class DepToken:
    """One CoNLL-U word line.  ``head`` is 1-based within the sentence, 0 for root."""

    id: int
    form: str
    lemma: str
    upos: str
    xpos: str
    feats: str
    head: int
    deprel: str
    deps: str = "_"
    misc: str = "_"

    @property
    def base_rel(self) -> str:
        return self.deprel.split(":", 1)[0]

    def has_feature(self, name: str, value: str) -> bool:
        if self.feats in ("", "_"):
            return False
        return f"{name}={value}" in self.feats.split("|")


@dataclass(frozen=True)
class DependencyTree:
    tokens: tuple[DepToken, ...]
    comments: tuple[str, ...] = ()
    # raw multiword / empty-node lines, keyed by the index of the word line they precede
    extra_lines: tuple[tuple[int, str], ...] = ()

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def forms(self) -> tuple[str, ...]:
        return tuple(t.form for t in self.tokens)

    def children(self, idx: int) -> list[DepToken]:
        """Dependents of 1-based token ``idx``."""
        return [t for t in self.tokens if t.head == idx]

    @property
    def root(self) -> int:
        return next(t.id for t in self.tokens if t.head == 0)


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[tuple[str, ...], ...]
    gold: EntityPartition = field(default_factory=EntityPartition)
    predicted: Optional[EntityPartition] = None
    speakers: Optional[tuple[Optional[str], ...]] = None
    genre: Optional[str] = None
    deps: Optional[tuple[DependencyTree, ...]] = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        n = self.n_tokens
        if self.speakers is not None and len(self.speakers) != n:
            raise ValidationError(f"{self.doc_id}: {len(self.speakers)} speakers for {n} tokens")
        for part in (self.gold, self.predicted):
            if part is None:
                continue
            for m in part.mentions:
                self._check_span(m)
        if self.deps is not None:
            if len(self.deps) != len(self.sentences):
                raise ValidationError(
                    f"{self.doc_id}: {len(self.deps)} dependency trees for {len(self.sentences)} sentences"
                )
            for i, (sent, tree) in enumerate(zip(self.sentences, self.deps)):
                if tuple(sent) != tree.forms:
                    raise ValidationError(f"{self.doc_id}: sentence {i} tokenization differs from its parse")

    def _check_span(self, m: Mention):
        if m.start < 0 or m.end >= self.n_tokens:
            raise ValidationError(f"{self.doc_id}: span {tuple(m)} outside document of {self.n_tokens} tokens")
        if self.sentence_of(m.start) != self.sentence_of(m.end):
            raise ValidationError(f"{self.doc_id}: span {tuple(m)} crosses a sentence boundary")

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    @property
    def offsets(self) -> tuple[int, ...]:
        """Document-global index of each sentence's first token."""
        out, acc = [], 0
        for s in self.sentences:
            out.append(acc)
            acc += len(s)
        return tuple(out)

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(t for s in self.sentences for t in s)

    def sentence_of(self, token: int) -> int:
        acc = 0
        for i, s in enumerate(self.sentences):
            acc += len(s)
            if token < acc:
                return i
        raise IndexError(token)

    def text(self, m: Mention) -> str:
        return " ".join(self.tokens[m.start : m.end + 1])

    def partition(self, side: str) -> Optional[EntityPartition]:
        if side == "gold":
            return self.gold
        if side == "predicted":
            return self.predicted
        raise ValueError(f"unknown partition side {side!r}")

    def with_deps(self, trees: Sequence[DependencyTree]) -> "Document":
        return replace(self, deps=tuple(trees))


class Triple(NamedTuple):
    subject: str
    verb: str
    object: str

    def __str__(self):
        return f"{self.subject} {self.verb} {self.object}"
