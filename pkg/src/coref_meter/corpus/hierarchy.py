"""Lexical hierarchy (hypernym DAG) loaded from TSV edges and a sense map."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Optional

from ..errors import ParseError, ValidationError

log = logging.getLogger(__name__)


def default_lemma(concept: str) -> str:
    """``dog.n.01`` -> ``dog``; ids without dots are their own lemma."""
    return concept.split(".", 1)[0]


@dataclass(frozen=True)
class Hierarchy:
    """Rooted hypernym DAG.

    ``parents`` maps child -> parents.  Depths count the root as 1 and follow
    shortest paths.  Concepts shallower than ``min_depth`` are removed from
    chains *after* the chains are formed, so a surviving concept's chain keeps
    its original depth-ordered members minus the removed prefix.
    """

    parents: Mapping[str, tuple[str, ...]]
    root: str
    senses: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    lemmas: Mapping[str, str] = field(default_factory=dict)
    min_depth: int = 1

    @cached_property
    def all_concepts(self) -> frozenset[str]:
        cs = set(self.parents)
        for ps in self.parents.values():
            cs.update(ps)
        cs.add(self.root)
        return frozenset(cs)

    @cached_property
    def depth(self) -> dict[str, int]:
        children: dict[str, list[str]] = {}
        for c, ps in self.parents.items():
            for p in ps:
                children.setdefault(p, []).append(c)
        depth = {self.root: 1}
        queue = deque([self.root])
        while queue:
            c = queue.popleft()
            for ch in sorted(children.get(c, ())):
                if ch not in depth:
                    depth[ch] = depth[c] + 1
                    queue.append(ch)
        return depth

    @cached_property
    def concepts(self) -> frozenset[str]:
        """Concepts that survive the depth filter."""
        return frozenset(c for c, d in self.depth.items() if d >= self.min_depth)

    @cached_property
    def _full_chains(self) -> dict[str, tuple[str, ...]]:
        depth = self.depth
        chains: dict[str, tuple[str, ...]] = {self.root: (self.root,)}
        for c in sorted(depth, key=lambda x: (depth[x], x)):
            if c == self.root:
                continue
            # shortest chain: a parent one level up; ties go to the smallest id
            best = min((p for p in self.parents.get(c, ()) if depth.get(p) == depth[c] - 1))
            chains[c] = chains[best] + (c,)
        return chains

    def chain(self, concept: str) -> tuple[str, ...]:
        """Hypernym chain root -> ``concept`` with shallow concepts removed."""
        if concept not in self.depth:
            raise KeyError(concept)
        return tuple(c for c in self._full_chains[concept] if self.depth[c] >= self.min_depth)

    def parent(self, concept: str) -> Optional[str]:
        ch = self.chain(concept)
        return ch[-2] if len(ch) > 1 else None

    @cached_property
    def _ancestors(self) -> dict[str, frozenset[str]]:
        memo: dict[str, frozenset[str]] = {}
        depth = self.depth
        for c in sorted(depth, key=lambda x: (depth[x], x)):
            acc: set[str] = set()
            for p in self.parents.get(c, ()):
                if p in depth:
                    acc.add(p)
                    acc.update(memo.get(p, ()))
            memo[c] = frozenset(acc)
        return memo

    def ancestors(self, concept: str, include_self: bool = True) -> frozenset[str]:
        """Every surviving concept ``concept`` IsA, over all parent paths."""
        acc = set(self._ancestors[concept])
        if include_self:
            acc.add(concept)
        return frozenset(a for a in acc if self.depth[a] >= self.min_depth)

    def word_senses(self, word: str) -> tuple[str, ...]:
        return tuple(c for c in self.senses.get(word, ()) if c in self.concepts)

    def lemma(self, concept: str) -> str:
        return self.lemmas.get(concept) or default_lemma(concept)

    def filtered(self, min_depth: int) -> "Hierarchy":
        return Hierarchy(self.parents, self.root, self.senses, self.lemmas, min_depth)

    def restricted_to_lemmas(self, vocab: Iterable[str]) -> "Hierarchy":
        """Drop surviving concepts whose lemma is not in ``vocab`` (post chain formation)."""
        vocab = set(vocab)
        keep = {c for c in self.concepts if self.lemma(c) in vocab}
        return _LemmaFiltered(self.parents, self.root, self.senses, self.lemmas, self.min_depth, frozenset(keep))


@dataclass(frozen=True)
class _LemmaFiltered(Hierarchy):
    keep: frozenset = frozenset()

    @cached_property
    def concepts(self) -> frozenset[str]:
        return self.keep

    def chain(self, concept):
        return tuple(c for c in Hierarchy.chain(self, concept) if c in self.keep)

    def ancestors(self, concept, include_self=True):
        return frozenset(c for c in Hierarchy.ancestors(self, concept, include_self) if c in self.keep)


def build_hierarchy(
    edges: Iterable[tuple[str, str]],
    senses: Optional[Mapping[str, Iterable[str]]] = None,
    root: Optional[str] = None,
    min_depth: int = 1,
    lemmas: Optional[Mapping[str, str]] = None,
) -> Hierarchy:
    parents: dict[str, list[str]] = {}
    nodes: set[str] = set()
    for child, parent in edges:
        if child == parent:
            raise ValidationError(f"self loop on {child}")
        ps = parents.setdefault(child, [])
        if parent not in ps:
            ps.append(parent)
        nodes.update((child, parent))
    tops = sorted(n for n in nodes if not parents.get(n))
    if root is None:
        if len(tops) != 1:
            raise ValidationError(f"expected one root, found {len(tops)}: {tops[:5]}; pass an explicit root")
        root = tops[0]
    elif nodes and root not in nodes:
        raise ValidationError(f"root {root!r} not in hierarchy")
    h = Hierarchy({c: tuple(ps) for c, ps in parents.items()}, root, {}, dict(lemmas or {}), min_depth)
    depth = h.depth
    if root in parents:
        raise ValidationError(f"root {root!r} has parents")
    unreachable = sorted(nodes - set(depth))
    if unreachable:
        if len(tops) > 1:
            log.warning("%d concepts unreachable from root %s dropped", len(unreachable), root)
        else:
            raise ValidationError(f"cycle or unreachable concepts: {unreachable[:5]}")
    _check_acyclic(h.parents, depth)
    sense_map = {}
    for word, cs in (senses or {}).items():
        known = []
        for c in cs:
            if c in depth:
                known.append(c)
            else:
                log.warning("sense %s of %r is not in the hierarchy; dropped", c, word)
        if known:
            sense_map[word] = tuple(known)
    return Hierarchy(h.parents, root, sense_map, dict(lemmas or {}), min_depth)


def _check_acyclic(parents, reachable):
    state: dict[str, int] = {}
    for start in sorted(reachable):
        if state.get(start):
            continue
        stack = [(start, iter(parents.get(start, ())))]
        state[start] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
            elif state.get(nxt) == 1:
                raise ValidationError(f"cycle through {nxt}")
            elif not state.get(nxt):
                state[nxt] = 1
                stack.append((nxt, iter(parents.get(nxt, ()))))


def _rows(path, ncols_ok):
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) not in ncols_ok:
                raise ParseError(f"expected {'/'.join(map(str, ncols_ok))} fields, found {len(cols)}", path, lineno)
            for i, c in enumerate(cols):
                if not c.strip():
                    raise ParseError("empty field", path, lineno, i + 1)
            yield lineno, cols


def parse_hierarchy(edges_path, senses_path=None, min_depth: int = 1, root: Optional[str] = None) -> Hierarchy:
    """Load ``child<TAB>parent`` edges and ``word<TAB>concept`` senses.

    An optional third edges column gives the child's lemma.  Sense rows naming
    unknown concepts are dropped with a warning.
    """
    edges, lemmas = [], {}
    for _, cols in _rows(edges_path, (2, 3)):
        edges.append((cols[0], cols[1]))
        if len(cols) == 3:
            lemmas[cols[0]] = cols[2]
    senses: dict[str, list[str]] = {}
    if senses_path is not None:
        for _, cols in _rows(senses_path, (2,)):
            ss = senses.setdefault(cols[0], [])
            if cols[1] not in ss:
                ss.append(cols[1])
    try:
        return build_hierarchy(edges, senses, root=root, min_depth=min_depth, lemmas=lemmas)
    except ValidationError as exc:
        raise ParseError(str(exc), edges_path) from exc


def format_hierarchy(h: Hierarchy) -> tuple[str, str]:
    """Return (edges TSV, senses TSV)."""
    edge_lines = []
    for c in sorted(h.parents):
        for p in h.parents[c]:
            if c in h.lemmas:
                edge_lines.append(f"{c}\t{p}\t{h.lemmas[c]}\n")
            else:
                edge_lines.append(f"{c}\t{p}\n")
    sense_lines = [f"{w}\t{c}\n" for w in sorted(h.senses) for c in h.senses[w]]
    return "".join(edge_lines), "".join(sense_lines)


def write_hierarchy(h: Hierarchy, edges_path, senses_path) -> None:
    e, s = format_hierarchy(h)
    Path(edges_path).write_text(e, encoding="utf-8")
    Path(senses_path).write_text(s, encoding="utf-8")
