"""CoNLL-U dependency trees."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from ..errors import ParseError, ValidationError
from .model import DependencyTree, DepToken, Document


def _validate(tokens: Sequence[DepToken], path, line: int):
    n = len(tokens)
    roots = [t.id for t in tokens if t.head == 0]
    if len(roots) != 1:
        raise ParseError(f"sentence has {len(roots)} roots, expected exactly one", path, line)
    for t in tokens:
        if not 0 <= t.head <= n:
            raise ParseError(f"head {t.head} of token {t.id} out of range 0..{n}", path, line, 7)
    # follow heads from every token; a walk longer than n steps means a cycle
    for t in tokens:
        cur, steps = t.id, 0
        while cur != 0:
            cur = tokens[cur - 1].head
            steps += 1
            if steps > n:
                raise ParseError(f"cyclic heads involving token {t.id}", path, line, 7)


def parse_conllu(path) -> list[DependencyTree]:
    """One tree per blank-line separated block.

    Multiword-token (``1-2``) and empty-node (``1.1``) lines are kept aside for
    re-serialization but are not tree nodes.
    """
    path = Path(path)
    trees: list[DependencyTree] = []
    comments: list[str] = []
    tokens: list[DepToken] = []
    extra: list[tuple[int, str]] = []
    start_line = 1

    def flush(lineno):
        nonlocal comments, tokens, extra
        if tokens:
            _validate(tokens, path, start_line)
            trees.append(DependencyTree(tuple(tokens), tuple(comments), tuple(extra)))
        elif comments or extra:
            raise ParseError("sentence block without word lines", path, lineno)
        comments, tokens, extra = [], [], []

    lineno = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                flush(lineno)
                continue
            if not tokens and not comments and not extra:
                start_line = lineno
            if line.startswith("#"):
                comments.append(line)
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise ParseError(f"expected 10 tab-separated columns, found {len(cols)}", path, lineno)
            if "-" in cols[0] or "." in cols[0]:
                extra.append((len(tokens), line))
                continue
            try:
                tid = int(cols[0])
            except ValueError:
                raise ParseError(f"bad token id {cols[0]!r}", path, lineno, 1) from None
            if tid != len(tokens) + 1:
                raise ParseError(f"token id {tid} out of sequence", path, lineno, 1)
            try:
                head = int(cols[6])
            except ValueError:
                raise ParseError(f"bad head {cols[6]!r}", path, lineno, 7) from None
            tokens.append(DepToken(tid, cols[1], cols[2], cols[3], cols[4], cols[5], head, cols[7], cols[8], cols[9]))
    flush(lineno + 1)
    return trees


def format_conllu(trees: Iterable[DependencyTree]) -> str:
    out: list[str] = []
    for tree in trees:
        out.extend(tree.comments)
        extra = {}
        for idx, line in tree.extra_lines:
            extra.setdefault(idx, []).append(line)
        for i, t in enumerate(tree.tokens):
            out.extend(extra.get(i, ()))
            out.append(
                "\t".join(
                    [str(t.id), t.form, t.lemma, t.upos, t.xpos, t.feats, str(t.head), t.deprel, t.deps, t.misc]
                )
            )
        out.extend(extra.get(len(tree.tokens), ()))
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


def write_conllu(trees: Iterable[DependencyTree], path) -> None:
    Path(path).write_text(format_conllu(trees), encoding="utf-8")


def align_trees(docs: Sequence[Document], trees: Sequence[DependencyTree]) -> list[Document]:
    """Attach trees to documents, consuming them sentence by sentence in order.

    Tokenizations must be identical; anything else is rejected.
    """
    need = sum(len(d.sentences) for d in docs)
    if need != len(trees):
        raise ValidationError(f"{len(trees)} dependency trees for {need} sentences")
    out, pos = [], 0
    for doc in docs:
        k = len(doc.sentences)
        out.append(doc.with_deps(trees[pos : pos + k]))
        pos += k
    return out
