"""Contested coreference types of mentions, read off aligned dependency trees."""

from __future__ import annotations

import enum
import json
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import ParseError
from .corpus.model import DependencyTree, DepToken, Document, EntityPartition, Mention

log = logging.getLogger(__name__)


class CorefType(str, enum.Enum):
    NESTED = "Nested"
    ON_GENERIC = "OnGeneric"
    COMPOUND = "Compound"
    COPULAR = "Copular"


PLURAL_NOUN_TAGS = frozenset({"NNS", "NNPS"})
INDEFINITE_ARTICLES = frozenset({"a", "an"})


@dataclass(frozen=True)
class TypedMention:
    mention: Mention
    types: frozenset = frozenset()
    evidence: tuple[str, ...] = ()
    untyped_reason: Optional[str] = None

    @property
    def untyped(self) -> bool:
        return self.untyped_reason is not None

    def has(self, t: CorefType) -> bool:
        return t in self.types

    def to_json(self) -> dict:
        out = {
            "start": self.mention.start,
            "end": self.mention.end,
            "types": sorted(t.value for t in self.types),
            "evidence": list(self.evidence),
        }
        if self.untyped_reason is not None:
            out["untyped"] = self.untyped_reason
        return out

    @classmethod
    def from_json(cls, d: dict) -> "TypedMention":
        return cls(
            Mention(d["start"], d["end"]),
            frozenset(CorefType(t) for t in d.get("types", ())),
            tuple(d.get("evidence", ())),
            d.get("untyped"),
        )


@dataclass(frozen=True)
class HeadInfo:
    sentence: int
    offset: int  # document-global index of the sentence's first token
    tree: DependencyTree
    token: DepToken

    @property
    def global_index(self) -> int:
        return self.offset + self.token.id - 1


def mention_head(doc: Document, m: Mention) -> Optional[HeadInfo]:
    """Token inside the span whose head lies outside it; leftmost wins ties."""
    if doc.deps is None:
        return None
    si = doc.sentence_of(m.start)
    if si != doc.sentence_of(m.end):
        return None
    off = doc.offsets[si]
    tree = doc.deps[si]
    lo, hi = m.start - off + 1, m.end - off + 1
    for t in tree.tokens[lo - 1 : hi]:
        if not lo <= t.head <= hi:
            return HeadInfo(si, off, tree, t)
    return None  # unreachable for a valid tree


@dataclass
class TypingConfig:
    plural_tags: frozenset = PLURAL_NOUN_TAGS
    plural_feature: tuple[str, str] = ("Number", "Plur")
    articles: frozenset = INDEFINITE_ARTICLES


def _is_plural(tok: DepToken, cfg: TypingConfig) -> bool:
    return tok.xpos in cfg.plural_tags or tok.has_feature(*cfg.plural_feature)


def _on_generic(head: HeadInfo, cfg: TypingConfig) -> Optional[str]:
    dets = [c for c in head.tree.children(head.token.id) if c.base_rel == "det"]
    for d in dets:
        if d.lemma.lower() in cfg.articles or d.form.lower() in cfg.articles:
            return f"det:{d.form}@{head.offset + d.id - 1}"
    if not dets and _is_plural(head.token, cfg):
        tag = head.token.xpos if head.token.xpos in cfg.plural_tags else "Number=Plur"
        return f"plural:{tag}@{head.global_index}"
    return None


def _compound(head: HeadInfo) -> Optional[str]:
    if head.token.base_rel == "compound":
        return f"{head.token.deprel}->{head.offset + head.token.head - 1}"
    return None


def _copular(doc: Document, m: Mention, head: HeadInfo, others, heads) -> Optional[str]:
    for o in others:
        oh = heads.get(o)
        if oh is None or oh.sentence != head.sentence:
            continue
        a, b = head.token, oh.token
        linked = (a.base_rel == "nsubj" and a.head == b.id) or (b.base_rel == "nsubj" and b.head == a.id)
        if not linked:
            continue
        right = head if m.start > o.start else oh
        cops = [c for c in right.tree.children(right.token.id) if c.base_rel == "cop"]
        if cops:
            return f"nsubj:{o.start}-{o.end};cop@{right.offset + cops[0].id - 1}"
    return None


def classify_mention(
    doc: Document,
    partition: EntityPartition,
    m: Mention,
    config: Optional[TypingConfig] = None,
    _heads: Optional[dict] = None,
) -> TypedMention:
    cfg = config or TypingConfig()
    owner = partition.entity_of()
    if m not in owner:
        raise KeyError(f"{tuple(m)} is not in the partition")
    if doc.deps is None:
        return TypedMention(m, untyped_reason="no dependency parse")
    others = sorted(owner[m] - {m})
    heads = _heads if _heads is not None else {x: mention_head(doc, x) for x in owner[m]}
    head = heads.get(m)
    if head is None:
        return TypedMention(m, untyped_reason="mention not aligned to a parsed sentence")
    types, evidence = set(), []
    for o in others:
        if o.overlaps(m):
            types.add(CorefType.NESTED)
            evidence.append(f"overlap:{o.start}-{o.end}")
            break
    ev = _on_generic(head, cfg)
    if ev:
        types.add(CorefType.ON_GENERIC)
        evidence.append(ev)
    ev = _compound(head)
    if ev:
        types.add(CorefType.COMPOUND)
        evidence.append(ev)
    ev = _copular(doc, m, head, others, heads)
    if ev:
        types.add(CorefType.COPULAR)
        evidence.append(ev)
    return TypedMention(m, frozenset(types), tuple(evidence))


def type_partition(
    doc: Document, partition: EntityPartition, config: Optional[TypingConfig] = None
) -> dict[Mention, TypedMention]:
    heads = {m: mention_head(doc, m) for m in partition.mentions}
    return {m: classify_mention(doc, partition, m, config, heads) for m in sorted(partition.mentions)}


def type_counts(typed: Mapping[Mention, TypedMention]) -> dict[str, int]:
    c = Counter()
    for tm in typed.values():
        if tm.untyped:
            c["Untyped"] += 1
        for t in tm.types:
            c[t.value] += 1
    return dict(sorted(c.items()))


def determiner_edge_cases(doc: Document, partition: EntityPartition) -> Counter:
    """Heads with no ``det`` child but a possessive or quantifier dependent.

    These are treated literally (never OnGeneric via the article test); the
    counts let a corpus report how often that matters.
    """
    c: Counter = Counter()
    for m in partition.mentions:
        h = mention_head(doc, m)
        if h is None:
            continue
        kids = h.tree.children(h.token.id)
        if any(k.base_rel == "det" for k in kids):
            continue
        if any(k.deprel in ("nmod:poss", "det:poss") or k.base_rel == "poss" for k in kids):
            c["possessive"] += 1
        if any(k.base_rel == "nummod" or k.deprel in ("det:qmod", "amod:qmod") for k in kids):
            c["quantifier"] += 1
    return c


def types_to_jsonl(doc_id: str, side: str, typed: Mapping[Mention, TypedMention]) -> list[str]:
    out = []
    for m in sorted(typed):
        rec = {"doc_id": doc_id, "side": side}
        rec.update(typed[m].to_json())
        out.append(json.dumps(rec, sort_keys=True))
    return out


def read_types_jsonl(path) -> dict[tuple[str, str], dict[Mention, TypedMention]]:
    """Load ``classify`` output keyed by (doc_id, side)."""
    out: dict[tuple[str, str], dict[Mention, TypedMention]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                tm = TypedMention.from_json(rec)
                key = (str(rec["doc_id"]), rec.get("side", "gold"))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ParseError(f"bad type record: {exc}", path, lineno) from exc
            out.setdefault(key, {})[tm.mention] = tm
    return out
