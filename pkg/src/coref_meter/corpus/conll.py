"""CoNLL-2012 coreference files and the equivalent JSON-lines document format."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Optional

from ..errors import ParseError, ValidationError
from .model import Document, EntityPartition, Mention, canonical_order

log = logging.getLogger(__name__)

BEGIN_RE = re.compile(r"^#begin document \((.*)\);?\s*(?:part\s+(\d+))?\s*$")
CLUSTER_RE = re.compile(r"^(\()?(\d+)(\))?$")
MIN_COLUMNS = 5


def _doc_id(name: str, part: Optional[str]) -> str:
    return name if part is None else f"{name}/part_{part}"


def _genre(name: str) -> Optional[str]:
    # OntoNotes ids look like "bc/cctv/00/cctv_0000"
    head = name.split("/", 1)[0]
    return head if "/" in name and head else None


class _DocBuilder:
    def __init__(self, path, name, part, line):
        self.path = path
        self.name = name
        self.part = part
        self.begin_line = line
        self.sentences: list[list[str]] = []
        self.current: list[str] = []
        self.speakers: list[Optional[str]] = []
        self.has_speakers = False
        self.ncols: Optional[int] = None
        self.open: dict[int, list[tuple[int, int]]] = {}  # cluster -> stack of (start, line)
        self.clusters: dict[int, list[Mention]] = {}
        self.warnings: list[str] = []
        self.n_tokens = 0

    def close_sentence(self):
        if self.current:
            self.sentences.append(self.current)
            self.current = []

    def add_row(self, cols: list[str], lineno: int):
        if self.ncols is None:
            self.ncols = len(cols)
        elif len(cols) != self.ncols:
            raise ParseError(
                f"expected {self.ncols} columns, found {len(cols)}", self.path, lineno, len(cols)
            )
        if len(cols) < MIN_COLUMNS:
            raise ParseError(f"need at least {MIN_COLUMNS} columns, found {len(cols)}", self.path, lineno)
        tok_index = self.n_tokens
        self.current.append(cols[3])
        if len(cols) >= 12:
            self.has_speakers = True
            spk = cols[9]
            self.speakers.append(None if spk in ("-", "_") else spk)
        else:
            self.speakers.append(None)
        self.n_tokens += 1
        self._coref(cols[-1], tok_index, lineno, len(cols))

    def _coref(self, field: str, tok: int, lineno: int, colno: int):
        if field in ("-", "_", ""):
            return
        for piece in field.split("|"):
            m = CLUSTER_RE.match(piece)
            if not m:
                raise ParseError(f"bad coreference entry {piece!r}", self.path, lineno, colno)
            opens, cid, closes = bool(m.group(1)), int(m.group(2)), bool(m.group(3))
            if opens and closes:
                self._add(cid, Mention(tok, tok), lineno)
            elif opens:
                self.open.setdefault(cid, []).append((tok, lineno))
            elif closes:
                stack = self.open.get(cid)
                if not stack:
                    raise ParseError(
                        f"cluster {cid} closed without being opened in {self.doc_id}", self.path, lineno, colno
                    )
                start, _ = stack.pop()
                self._add(cid, Mention(start, tok), lineno)
            else:
                raise ParseError(f"bare cluster id {piece!r}", self.path, lineno, colno)

    def _add(self, cid: int, m: Mention, lineno: int):
        ms = self.clusters.setdefault(cid, [])
        if m in ms:
            msg = f"{self.doc_id}: duplicate span {tuple(m)} in cluster {cid} (line {lineno}) dropped"
            log.warning(msg)
            self.warnings.append(msg)
            return
        ms.append(m)

    @property
    def doc_id(self):
        return _doc_id(self.name, self.part)

    def finish(self, lineno: int) -> tuple[str, list[list[str]], list[Optional[str]], list[list[Mention]], list[str]]:
        self.close_sentence()
        for cid, stack in self.open.items():
            if stack:
                raise ParseError(
                    f"cluster {cid} opened at line {stack[-1][1]} never closed in {self.doc_id}",
                    self.path,
                    lineno,
                )
        clusters = [self.clusters[c] for c in sorted(self.clusters)]
        return self.doc_id, self.sentences, self.speakers, clusters, self.warnings


def _build_document(path, lineno, doc_id, sentences, speakers, clusters, warnings, column, has_speakers):
    seen: dict[Mention, int] = {}
    for ci, ms in enumerate(clusters):
        for m in ms:
            if m in seen:
                raise ParseError(f"{doc_id}: span {tuple(m)} belongs to two clusters", path, lineno)
            seen[m] = ci
    part = EntityPartition(canonical_order(frozenset(ms) for ms in clusters if ms))
    kwargs = {"gold": part} if column == "gold" else {"gold": EntityPartition(), "predicted": part}
    try:
        return Document(
            doc_id=doc_id,
            sentences=tuple(tuple(s) for s in sentences),
            speakers=tuple(speakers) if has_speakers else None,
            genre=_genre(doc_id),
            warnings=tuple(warnings),
            **kwargs,
        )
    except ValidationError as exc:
        raise ParseError(str(exc), path, lineno) from exc


def parse_conll_coref(path, column: str = "gold") -> list[Document]:
    """Read a CoNLL-2012 ``*_conll`` file.

    The last column carries bracketed cluster ids (``(12``, ``12)``, ``(12)``).
    ``column`` says which partition of the resulting documents is filled.
    Singletons are kept; see :func:`EntityPartition.without_singletons`.
    """
    if column not in ("gold", "predicted"):
        raise ValueError(f"column must be 'gold' or 'predicted', not {column!r}")
    path = Path(path)
    docs: list[Document] = []
    builder: Optional[_DocBuilder] = None
    lineno = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if line.startswith("#begin document"):
                if builder is not None:
                    raise ParseError("nested #begin document", path, lineno)
                m = BEGIN_RE.match(line)
                if not m:
                    raise ParseError("malformed #begin document line", path, lineno)
                builder = _DocBuilder(path, m.group(1), m.group(2), lineno)
                continue
            if line.startswith("#end document"):
                if builder is None:
                    raise ParseError("#end document without #begin", path, lineno)
                docs.append(_finish(builder, path, lineno, column))
                builder = None
                continue
            if not line.strip():
                if builder is not None:
                    builder.close_sentence()
                continue
            if line.startswith("#"):
                continue
            if builder is None:
                raise ParseError("token row outside a document", path, lineno)
            builder.add_row(line.split(), lineno)
    if builder is not None:
        docs.append(_finish(builder, path, lineno, column))
    return docs


def _finish(builder, path, lineno, column):
    doc_id, sents, speakers, clusters, warnings = builder.finish(lineno)
    return _build_document(path, lineno, doc_id, sents, speakers, clusters, warnings, column, builder.has_speakers)


def _split_doc_id(doc_id: str) -> tuple[str, str]:
    m = re.match(r"^(.*)/part_(\d+)$", doc_id)
    return (m.group(1), m.group(2)) if m else (doc_id, "000")


def format_conll_coref(docs: Iterable[Document], column: str = "gold") -> str:
    """Serialize documents in the minimal 12-column CoNLL-2012 layout."""
    out: list[str] = []
    for doc in docs:
        part = doc.partition(column) or EntityPartition()
        opens: dict[int, list[tuple[int, int]]] = {}
        closes: dict[int, list[tuple[int, int]]] = {}
        for cid, ent in enumerate(part.entities):
            for m in ent:
                opens.setdefault(m.start, []).append((m.end, cid))
                closes.setdefault(m.end, []).append((m.start, cid))
        name, pnum = _split_doc_id(doc.doc_id)
        out.append(f"#begin document ({name}); part {pnum}")
        tok = 0
        for sent in doc.sentences:
            for i, word in enumerate(sent):
                pieces = []
                # longer spans open first and close last
                for end, cid in sorted(opens.get(tok, []), key=lambda x: -x[0]):
                    pieces.append(f"({cid})" if end == tok else f"({cid}")
                for start, cid in sorted(closes.get(tok, []), key=lambda x: -x[0]):
                    if start != tok:
                        pieces.append(f"{cid})")
                spk = "-" if doc.speakers is None or doc.speakers[tok] is None else doc.speakers[tok]
                coref = "|".join(pieces) or "-"
                out.append("\t".join([name, str(int(pnum)), str(i), word, "-", "-", "-", "-", "-", spk, "*", coref]))
                tok += 1
            out.append("")
        out.append("#end document")
    return "\n".join(out) + ("\n" if out else "")


def write_conll_coref(docs: Iterable[Document], path, column: str = "gold") -> None:
    Path(path).write_text(format_conll_coref(docs, column), encoding="utf-8")


# --- JSON lines ---------------------------------------------------------------


def _clusters_from_json(raw, doc_id, path, lineno, warnings) -> EntityPartition:
    clusters = []
    for cluster in raw:
        spans = []
        for span in cluster:
            if (
                isinstance(span, list)
                and len(span) == 2
                and all(isinstance(x, int) and not isinstance(x, bool) for x in span)
            ):
                spans.append(span)
            elif isinstance(span, list) and span and all(isinstance(x, list) for x in span):
                msg = f"{doc_id}: discontinuous mention {span} dropped"
                log.warning(msg)
                warnings.append(msg)
            else:
                raise ParseError(f"{doc_id}: bad span {span!r}", path, lineno)
        clusters.append(spans)
    try:
        return EntityPartition.from_clusters(clusters)
    except ValidationError as exc:
        raise ParseError(str(exc), path, lineno) from exc


def parse_jsonl_documents(path) -> list[Document]:
    """Read documents from JSON lines.

    Each record has ``doc_id``, ``sentences`` (nested token arrays) and
    ``clusters`` (lists of inclusive ``[start, end]`` pairs).  Optional keys:
    ``predicted_clusters``, ``speakers``, ``genre``.
    """
    path = Path(path)
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path, lineno, exc.colno) from exc
            for key in ("doc_id", "sentences"):
                if key not in rec:
                    raise ParseError(f"missing key {key!r}", path, lineno)
            doc_id = str(rec["doc_id"])
            warnings: list[str] = []
            gold = _clusters_from_json(rec.get("clusters", []), doc_id, path, lineno, warnings)
            pred = None
            if rec.get("predicted_clusters") is not None:
                pred = _clusters_from_json(rec["predicted_clusters"], doc_id, path, lineno, warnings)
            speakers = rec.get("speakers")
            try:
                docs.append(
                    Document(
                        doc_id=doc_id,
                        sentences=tuple(tuple(str(t) for t in s) for s in rec["sentences"]),
                        gold=gold,
                        predicted=pred,
                        speakers=None if speakers is None else tuple(speakers),
                        genre=rec.get("genre"),
                        warnings=tuple(warnings),
                    )
                )
            except ValidationError as exc:
                raise ParseError(str(exc), path, lineno) from exc
    return docs


def document_to_json(doc: Document) -> dict:
    rec = {"doc_id": doc.doc_id, "sentences": [list(s) for s in doc.sentences], "clusters": doc.gold.to_clusters()}
    if doc.predicted is not None:
        rec["predicted_clusters"] = doc.predicted.to_clusters()
    if doc.speakers is not None:
        rec["speakers"] = list(doc.speakers)
    if doc.genre is not None:
        rec["genre"] = doc.genre
    return rec


def write_jsonl_documents(docs: Iterable[Document], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(document_to_json(doc), ensure_ascii=False) + "\n")


def load_documents(path, column: str = "gold") -> list[Document]:
    """Dispatch on extension: ``.jsonl``/``.json`` are JSON lines, anything else CoNLL-2012."""
    suffix = Path(path).suffix.lower()
    if suffix in (".jsonl", ".json"):
        docs = parse_jsonl_documents(path)
        if column == "predicted":
            docs = [replace(d, gold=EntityPartition(), predicted=d.gold) if d.predicted is None else d for d in docs]
        return docs
    return parse_conll_coref(path, column)
