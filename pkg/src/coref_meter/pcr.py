"""Binary pronominal-coreference instances: extraction, scoring, ensembling, prompts."""

from __future__ import annotations

import hashlib
import json
import logging
import random
import re
import string
from collections import OrderedDict
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from scipy.stats import binomtest

from .corpus.model import Document, EntityPartition, Mention
from .errors import CorefMeterError, ParseError
from .mention_types import mention_head
from .parallel import pmap

log = logging.getLogger(__name__)

DEFAULT_PRONOUNS = (
    "she", "her", "he", "him", "them", "they", "it", "his",
    "hers", "its", "their", "theirs", "this", "that", "these", "those",
)  # fmt: skip

# other pronoun surfaces that never count as a nominal antecedent
_NON_NOMINAL = frozenset(
    DEFAULT_PRONOUNS
    + ("i", "me", "my", "mine", "you", "your", "yours", "we", "us", "our", "ours",
       "himself", "herself", "itself", "themselves", "myself", "yourself", "ourselves", "one")
)  # fmt: skip
NOMINAL_UPOS = frozenset({"NOUN", "PROPN"})
NOMINAL_XPOS_PREFIX = "NN"
CONTEXT_SENTENCES = 3
CI_LEVEL = 0.90


@dataclass(frozen=True)
class PCRInstance:
    """One binary choice.  Spans are inclusive and relative to ``context``."""

    instance_id: str
    context: tuple[str, ...]
    pronoun: tuple[int, int]
    candidates: tuple[tuple[int, int], tuple[int, int]]
    label: int
    doc_id: str = ""
    sentence: int = 0
    dataset: str = ""
    antecedent_first: Optional[bool] = None
    speakers: Optional[tuple[Optional[str], ...]] = None

    def span_text(self, span) -> str:
        return " ".join(self.context[span[0] : span[1] + 1])

    @property
    def pronoun_text(self) -> str:
        return self.span_text(self.pronoun)

    def to_json(self) -> dict:
        d = asdict(self)
        d["context"] = list(self.context)
        d["pronoun"] = list(self.pronoun)
        d["candidates"] = [list(c) for c in self.candidates]
        if self.speakers is None:
            del d["speakers"]
        else:
            d["speakers"] = list(self.speakers)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PCRInstance":
        cands = d["candidates"]
        if len(cands) != 2:
            raise ValueError("an instance needs exactly two candidates")
        label = int(d["label"])
        if label not in (1, 2):
            raise ValueError(f"label must be 1 or 2, not {label}")
        return cls(
            instance_id=str(d["instance_id"]),
            context=tuple(d["context"]),
            pronoun=tuple(d["pronoun"]),
            candidates=(tuple(cands[0]), tuple(cands[1])),
            label=label,
            doc_id=d.get("doc_id", ""),
            sentence=d.get("sentence", 0),
            dataset=d.get("dataset", ""),
            antecedent_first=d.get("antecedent_first"),
            speakers=None if d.get("speakers") is None else tuple(d["speakers"]),
        )


# --- extraction --------------------------------------------------------------


def _doc_rng(seed: int, doc_id: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}\x00{doc_id}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def is_nominal(doc: Document, m: Mention) -> bool:
    """Noun/proper-noun head when parsed; otherwise any span that is not a pronoun."""
    head = mention_head(doc, m)
    if head is not None:
        tok = head.token
        return tok.upos in NOMINAL_UPOS or (tok.xpos.startswith(NOMINAL_XPOS_PREFIX) and tok.upos != "PRON")
    return doc.text(m).lower() not in _NON_NOMINAL


@dataclass
class ExtractionStats:
    pronouns: int = 0
    no_antecedent: int = 0
    multiple_coreferring: int = 0
    non_nominal: int = 0
    no_distractor: int = 0
    emitted: int = 0
    skipped_documents: int = 0

    def merge(self, other: "ExtractionStats"):
        for k, v in asdict(other).items():
            setattr(self, k, getattr(self, k) + v)


def extract_document(
    doc: Document, pronouns: Sequence[str] = DEFAULT_PRONOUNS, seed: int = 0, dataset: str = ""
) -> tuple[list[PCRInstance], ExtractionStats]:
    stats = ExtractionStats()
    if not doc.sentences:
        log.warning("%s: no sentence boundaries; skipped", doc.doc_id)
        stats.skipped_documents = 1
        return [], stats
    pset = {p.lower() for p in pronouns}
    rng = _doc_rng(seed, doc.doc_id)
    owner = doc.gold.entity_of()
    offsets = doc.offsets
    tokens = doc.tokens
    out = []
    for x in sorted(doc.gold.mentions):
        if x.start != x.end or tokens[x.start].lower() not in pset:
            continue
        ent = owner[x]
        if len(ent) < 2:
            continue
        stats.pronouns += 1
        si = doc.sentence_of(x.start)
        first = max(0, si - (CONTEXT_SENTENCES - 1))
        ws = offsets[first]
        we = offsets[si] + len(doc.sentences[si]) - 1
        inside = lambda m: ws <= m.start and m.end <= we  # noqa: E731
        coref = [m for m in ent if m != x and inside(m)]
        if not coref:
            stats.no_antecedent += 1
            continue
        if len(coref) > 1:
            stats.multiple_coreferring += 1
            continue
        a = coref[0]
        if a.end >= x.start or not is_nominal(doc, a):
            stats.non_nominal += 1
            continue
        distractors = sorted(
            m for m in doc.gold.mentions if m not in ent and inside(m) and not m.overlaps(x) and not m.overlaps(a)
        )
        if not distractors:
            stats.no_distractor += 1
            continue
        b = distractors[rng.randrange(len(distractors))]
        ante_first = rng.random() < 0.5
        rel = lambda m: (m.start - ws, m.end - ws)  # noqa: E731
        cands = (rel(a), rel(b)) if ante_first else (rel(b), rel(a))
        out.append(
            PCRInstance(
                instance_id=f"{doc.doc_id}:{x.start}",
                context=tuple(tokens[ws : we + 1]),
                pronoun=rel(x),
                candidates=cands,
                label=1 if ante_first else 2,
                doc_id=doc.doc_id,
                sentence=si,
                dataset=dataset,
                antecedent_first=ante_first,
                speakers=None if doc.speakers is None else tuple(doc.speakers[ws : we + 1]),
            )
        )
        stats.emitted += 1
    return out, stats


def extract_instances(
    docs: Iterable[Document],
    pronouns: Sequence[str] = DEFAULT_PRONOUNS,
    seed: int = 0,
    dataset: str = "",
    threads: Optional[int] = None,
    stats: Optional[ExtractionStats] = None,
) -> list[PCRInstance]:
    """Build instances from gold partitions.

    The context is the pronoun's sentence plus the two before it.  A pronoun
    qualifies when exactly one coreferring mention is in the context, that
    mention is nominal and precedes the pronoun, and at least one
    non-coreferring mention is also present.  The distractor and candidate
    order come from a per-document stream derived from ``(seed, doc_id)``.
    """
    results = pmap(lambda d: extract_document(d, pronouns, seed, dataset), list(docs), threads)
    out = []
    for insts, st in results:
        out.extend(insts)
        if stats is not None:
            stats.merge(st)
    return out


# --- scoring -----------------------------------------------------------------


@dataclass(frozen=True)
class Accuracy:
    correct: int
    total: int
    ci_low: float
    ci_high: float

    @property
    def accuracy(self) -> float:
        return self.correct / self.total if self.total else 0.0

    def to_json(self):
        return {
            "accuracy": self.accuracy,
            "correct": self.correct,
            "total": self.total,
            "ci": [self.ci_low, self.ci_high],
            "ci_level": CI_LEVEL,
        }


def accuracy_with_ci(correct: int, total: int, level: float = CI_LEVEL) -> Accuracy:
    ci = binomtest(correct, total).proportion_ci(confidence_level=level, method="exact")
    return Accuracy(correct, total, float(ci.low), float(ci.high))


@dataclass(frozen=True)
class PCRScore:
    overall: Accuracy
    per_dataset: dict
    missing: int = 0

    @property
    def accuracy(self) -> float:
        return self.overall.accuracy

    def to_json(self):
        return {
            "overall": self.overall.to_json(),
            "per_dataset": {k: v.to_json() for k, v in sorted(self.per_dataset.items())},
            "missing_predictions": self.missing,
        }


def score_predictions(
    instances: Sequence[PCRInstance], predictions: Mapping[str, int], strict: bool = False
) -> PCRScore:
    """Accuracy with a 90% Clopper-Pearson interval, overall and per dataset.

    Missing predictions count as wrong under ``strict``, otherwise the
    instance is skipped.
    """
    if not instances:
        raise CorefMeterError("no instances")
    ids = {i.instance_id for i in instances}
    unknown = sorted(set(predictions) - ids)
    if unknown:
        raise CorefMeterError(f"prediction for unknown instance {unknown[0]!r}")
    tallies: dict[str, list[int]] = OrderedDict()
    missing = 0
    for inst in instances:
        pred = predictions.get(inst.instance_id)
        if pred is None:
            missing += 1
            if not strict:
                continue
        if pred is not None and pred not in (1, 2):
            raise CorefMeterError(f"{inst.instance_id}: prediction must be 1 or 2, not {pred!r}")
        t = tallies.setdefault(inst.dataset, [0, 0])
        t[0] += int(pred == inst.label)
        t[1] += 1
    correct = sum(t[0] for t in tallies.values())
    total = sum(t[1] for t in tallies.values())
    if total == 0:
        raise CorefMeterError("no instances with predictions")
    return PCRScore(
        accuracy_with_ci(correct, total),
        {k: accuracy_with_ci(*v) for k, v in tallies.items()},
        missing,
    )


# --- ensemble and the challenge-set assumption -------------------------------


def ensemble_select(instance, supervised_choice: int, lm_choice: int, predicted_cluster_size: int) -> int:
    """Trust the supervised system only when it links the pronoun into a cluster of more than two mentions."""
    if predicted_cluster_size < 1:
        raise ValueError("predicted cluster size must be at least 1")
    return supervised_choice if predicted_cluster_size > 2 else lm_choice


@dataclass(frozen=True)
class AssumptionCheck:
    u_theta_c: float
    u_phi_c: float
    u_theta_d: float
    u_phi_d: float
    status: str  # "holds" | "violated" | "indeterminate"

    @property
    def holds(self) -> Optional[bool]:
        return None if self.status == "indeterminate" else self.status == "holds"

    def to_json(self):
        return {**asdict(self), "holds": self.holds}


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def check_assumption(u_tc: float, u_pc: float, u_td: float, u_pd: float) -> AssumptionCheck:
    """Is the ordering of two systems on the challenge set preserved on the general task?"""
    for v in (u_tc, u_pc, u_td, u_pd):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"accuracy {v} outside [0, 1]")
    sc, sd = _sign(u_tc - u_pc), _sign(u_td - u_pd)
    if sc == 0 or sd == 0:
        status = "indeterminate"
    else:
        status = "holds" if sc == sd else "violated"
    return AssumptionCheck(u_tc, u_pc, u_td, u_pd, status)


# --- prompts -----------------------------------------------------------------

PLACEHOLDERS = frozenset({"context", "pronoun", "cand1", "cand2", "speaker"})


@dataclass(frozen=True)
class Feature:
    name: str
    target: str
    value: str

    def sentence(self) -> str:
        return f'The {self.name} of "{self.target}" is {self.value}.'


def template_fields(template: str) -> set[str]:
    names = set()
    for _, name, _, _ in string.Formatter().parse(template):
        if name is not None:
            names.add(name)
    return names


def render_context(inst: PCRInstance, speakers: bool = False) -> str:
    if not speakers or inst.speakers is None:
        return " ".join(inst.context)
    lines, run, cur = [], [], object()
    for tok, spk in zip(inst.context, inst.speakers):
        if spk != cur and run:
            lines.append(_speaker_line(cur, run))
            run = []
        cur = spk
        run.append(tok)
    if run:
        lines.append(_speaker_line(cur, run))
    return "\n".join(lines)


def _speaker_line(spk, toks):
    text = " ".join(toks)
    return f"{spk}: {text}" if spk else text


def format_prompt(
    inst: PCRInstance,
    template: str,
    features: Optional[Sequence[Feature]] = None,
    speakers: bool = False,
) -> str:
    """Fill ``template`` and prepend one verbalized sentence per feature."""
    unknown = template_fields(template) - PLACEHOLDERS
    if unknown:
        raise CorefMeterError(f"unknown template placeholder(s): {', '.join(sorted(unknown))}")
    spk = ""
    if inst.speakers is not None:
        spk = inst.speakers[inst.pronoun[0]] or ""
    body = template.format(
        context=render_context(inst, speakers),
        pronoun=inst.pronoun_text,
        cand1=inst.span_text(inst.candidates[0]),
        cand2=inst.span_text(inst.candidates[1]),
        speaker=spk,
    )
    lines = [f.sentence() for f in features or ()]
    lines.append(body)
    return "\n".join(lines)


# --- challenge-set loaders ---------------------------------------------------

TOKEN_RE = re.compile(r"\w+(?:['’]\w+)?|[^\w\s]")


def default_splitter(text: str) -> list[str]:
    return TOKEN_RE.findall(text)


def _find(tokens: Sequence[str], target: Sequence[str], after: int = 0) -> Optional[tuple[int, int]]:
    low = [t.lower() for t in tokens]
    tgt = [t.lower() for t in target]
    for i in range(after, len(low) - len(tgt) + 1):
        if low[i : i + len(tgt)] == tgt:
            return i, i + len(tgt) - 1
    return None


def load_challenge_jsonl(
    path, splitter: Callable[[str], list[str]] = default_splitter, dataset: Optional[str] = None
) -> list[PCRInstance]:
    """Normalize WSC-style records into instances.

    Records carry ``text``, ``pronoun``, ``candidates`` (two strings) and
    ``label`` (1 or 2); optional ``id``, ``pronoun_index`` (token position
    of the pronoun under ``splitter``) and ``dataset``.
    """
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                toks = splitter(rec["text"])
                ptoks = splitter(rec["pronoun"])
                if "pronoun_index" in rec:
                    p0 = int(rec["pronoun_index"])
                    pron = (p0, p0 + len(ptoks) - 1)
                else:
                    pron = _find(toks, ptoks)
                cands = [_find(toks, splitter(c)) for c in rec["candidates"]]
                label = int(rec["label"])
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ParseError(f"bad challenge record: {exc}", path, lineno) from exc
            if pron is None or None in cands or len(cands) != 2 or label not in (1, 2):
                raise ParseError("pronoun or candidate not found in text, or bad label", path, lineno)
            out.append(
                PCRInstance(
                    instance_id=str(rec.get("id", f"{path}:{lineno}")),
                    context=tuple(toks),
                    pronoun=pron,
                    candidates=(cands[0], cands[1]),
                    label=label,
                    dataset=rec.get("dataset", dataset or ""),
                )
            )
    return out


def read_instances(path) -> list[PCRInstance]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if line.strip():
                try:
                    out.append(PCRInstance.from_json(json.loads(line)))
                except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                    raise ParseError(f"bad instance: {exc}", path, lineno) from exc
    return out


def read_predictions(path, key: str = "choice") -> dict[str, dict]:
    """``instance_id`` -> record; every record must carry ``key``."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                iid = str(rec["instance_id"])
                rec[key] = int(rec[key])
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise ParseError(f"bad prediction: {exc}", path, lineno) from exc
            if iid in out:
                raise ParseError(f"duplicate prediction for {iid}", path, lineno)
            out[iid] = rec
    return out


@dataclass
class Provenance:
    seed: int
    pronouns: list = field(default_factory=lambda: list(DEFAULT_PRONOUNS))
    nominal_rule: str = "head UPOS in {NOUN, PROPN} or Penn NN*; unparsed spans: not a pronoun surface form"
