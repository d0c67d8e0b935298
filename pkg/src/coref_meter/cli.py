"""``coref-meter`` command line.

Exit status is 0 on success, 1 for bad input or usage, and 2 when an internal
invariant fails.  Reports go to ``--out`` (written atomically) or standard
output; logging goes to standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .consistency import (
    AXES,
    auc,
    concept_max,
    concept_max_transform,
    consistency_report,
    read_event_scores,
    read_labeled_events,
)
from .corpus import (
    Triple,
    align_trees,
    format_triples,
    load_documents,
    parse_conllu,
    parse_hierarchy,
    parse_role_counts,
    parse_score_grid,
    parse_triples,
)
from .corpus.triples import TripleCounts
from .disagg import (
    DEFAULT_HIGHLIGHT,
    DisaggReport,
    disaggregate,
    generalization_gap,
    permutation_test_counts,
    permutation_test_result,
)
from .errors import CorefMeterError, InvariantViolation
from .mention_types import read_types_jsonl, type_counts, type_partition, types_to_jsonl
from .metrics import METRICS, CorefReport, combine, doc_count_matrix, document_counts
from .parallel import ENV_THREADS, pmap, thread_count
from .pcr import (
    DEFAULT_PRONOUNS,
    ExtractionStats,
    Feature,
    Provenance,
    check_assumption,
    ensemble_select,
    extract_instances,
    format_prompt,
    read_instances,
    read_predictions,
    score_predictions,
)
from .plausibility import MODELS, build_concept_distribution, generate_pairs, parse_vectors, pmi_vectors, score_event
from .report import make_report, read_report, render, unwrap, write_atomic

log = logging.getLogger("coref_meter")


class UsageError(CorefMeterError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# --- shared helpers ------------------------------------------------------------


def _emit(args, text: str) -> None:
    if args.out:
        write_atomic(args.out, text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _emit_report(args, command: str, result) -> None:
    _emit(args, render(make_report(command, _config(args), result), args.format))


def _emit_lines(args, lines: Sequence[str]) -> None:
    _emit(args, "".join(line + "\n" for line in lines))


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _check_unit(name: str, x: Optional[float]) -> None:
    if x is not None and not (0.0 <= x <= 1.0 and math.isfinite(x)):
        raise InvariantViolation(f"{name} = {x!r} is outside [0, 1]")


def _check_coref(report: CorefReport) -> None:
    for m in METRICS:
        s = report.scores[m]
        for part in ("recall", "precision", "f1"):
            _check_unit(f"{m}.{part}", getattr(s, part))
    _check_unit("conll_f1", report.conll_f1)


def _pair_documents(gold_docs, pred_docs):
    """Match predicted documents to gold ones by id, keeping gold order."""
    by_id = {}
    for d in pred_docs:
        if d.doc_id in by_id:
            raise UsageError(f"duplicate predicted document {d.doc_id!r}")
        by_id[d.doc_id] = d
    out = []
    for g in gold_docs:
        p = by_id.pop(g.doc_id, None)
        if p is None:
            raise UsageError(f"no predicted document for {g.doc_id!r}")
        if p.tokens != g.tokens:
            raise UsageError(f"{g.doc_id!r}: gold and predicted tokens differ")
        out.append(replace(g, predicted=p.predicted if p.predicted is not None else p.gold))
    if by_id:
        raise UsageError(f"predicted document {sorted(by_id)[0]!r} has no gold counterpart")
    return out


def _load_scored_docs(gold_path, pred_path):
    gold = load_documents(gold_path, "gold")
    if pred_path:
        return _pair_documents(gold, load_documents(pred_path, "predicted"))
    missing = [d.doc_id for d in gold if d.predicted is None]
    if missing:
        raise UsageError(f"{missing[0]!r} has no predicted clusters; pass --pred")
    return gold


def _doc_counts(docs, keep_singletons, threads):
    return pmap(lambda d: document_counts(d.doc_id, d.gold, d.predicted, keep_singletons), docs, threads)


def _with_deps(docs, deps_path):
    return align_trees(docs, parse_conllu(deps_path)) if deps_path else docs


# --- coreference ---------------------------------------------------------------


def cmd_score(args):
    docs = _load_scored_docs(args.gold, args.pred)
    per_doc = _doc_counts(docs, args.keep_singletons, args.threads)
    report = combine(per_doc, macro=args.macro, keep_singletons=args.keep_singletons)
    _check_coref(report)
    result = report.to_json()
    if args.per_document:
        result["per_document"] = {
            d.doc_id: {m: d.counts[m].score().to_json() for m in METRICS} for d in per_doc
        }
    _emit_report(args, "score", result)


def cmd_classify(args):
    docs = _with_deps(load_documents(args.docs, "gold"), args.deps)
    if args.pred:
        docs = _pair_documents(docs, _with_deps(load_documents(args.pred, "predicted"), None))
    sides = ("gold", "predicted") if args.side == "both" else (args.side,)

    def per_doc(doc):
        lines, typed_all = [], []
        for side in sides:
            part = doc.partition(side)
            if part is None:
                raise UsageError(f"{doc.doc_id!r} has no {side} clusters")
            typed = type_partition(doc, part)
            typed_all.append(typed)
            lines.extend(types_to_jsonl(doc.doc_id, side, typed))
        return lines, typed_all

    results = pmap(per_doc, docs, args.threads)
    lines = [ln for r, _ in results for ln in r]
    for _, typed_all in results:
        for typed in typed_all:
            for k, v in type_counts(typed).items():
                log.debug("%s: %d", k, v)
    _emit_lines(args, lines)


def _types_for(docs, args):
    if args.types:
        table = read_types_jsonl(args.types)

        def lookup(doc, side):
            if (doc.doc_id, side) not in table:
                raise UsageError(f"no {side} types for {doc.doc_id!r} in {args.types}")
            return table[(doc.doc_id, side)]

        return lookup
    if not args.deps:
        raise UsageError("disagg needs --types or --deps")

    def classify(doc, side):
        return type_partition(doc, doc.partition(side))

    return classify


def cmd_disagg(args):
    docs = _load_scored_docs(args.gold, args.pred)
    docs = _with_deps(docs, args.deps if not args.types else None)
    lookup = _types_for(docs, args)
    items = pmap(
        lambda d: (d.doc_id, d.gold, d.predicted, lookup(d, "gold"), lookup(d, "predicted")), docs, args.threads
    )
    overall = combine(_doc_counts(docs, args.keep_singletons, args.threads), keep_singletons=args.keep_singletons)
    _check_coref(overall)
    report = disaggregate(items, overall, args.dataset or "", args.keep_singletons, args.threads)
    for t, s in report.per_type.items():
        _check_unit(f"{t.value}.f1", s.score.f1)
    _emit_report(args, "disagg", report.to_json())


def cmd_gap(args):
    try:
        a = DisaggReport.from_json(unwrap(read_report(args.in_report)))
        b = DisaggReport.from_json(unwrap(read_report(args.out_domain)))
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"not a disagg report: {exc}") from exc
    gap = generalization_gap(a, b, args.threshold)
    _emit_report(args, "gap", gap.to_json())


def _read_paired_scores(path) -> list[float]:
    text = Path(path).read_text(encoding="utf-8").strip()
    try:
        if text.startswith("["):
            vals = json.loads(text)
        else:
            vals = [float(x) for x in text.split()]
        return [float(v) for v in vals]
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{path}: expected a JSON list or whitespace-separated numbers ({exc})") from exc


def cmd_permtest(args):
    if args.scores_a or args.scores_b:
        if not (args.scores_a and args.scores_b):
            raise UsageError("--scores-a and --scores-b go together")
        a, b = _read_paired_scores(args.scores_a), _read_paired_scores(args.scores_b)
        if len(a) != len(b):
            raise UsageError(f"paired score lists differ in length: {len(a)} vs {len(b)}")
        res = permutation_test_result(a, b, args.iterations, args.seed, args.threads)
        stat = "mean-difference"
    else:
        if not (args.gold and args.pred_a and args.pred_b):
            raise UsageError("permtest needs --gold, --pred-a and --pred-b (or --scores-a/--scores-b)")
        gold = load_documents(args.gold, "gold")
        metrics = METRICS if args.metric == "conll" else (args.metric,)
        mats = []
        for p in (args.pred_a, args.pred_b):
            docs = _pair_documents(gold, load_documents(p, "predicted"))
            mats.append(doc_count_matrix(_doc_counts(docs, args.keep_singletons, args.threads), metrics))
        res = permutation_test_counts(mats[0], mats[1], args.iterations, args.seed, args.threads)
        stat = f"corpus-f1-difference:{args.metric}"
    if not 0.0 < res.p_value <= 1.0:
        raise InvariantViolation(f"p-value {res.p_value} outside (0, 1]")
    _emit_report(
        args,
        "permtest",
        {
            "statistic": stat,
            "observed": res.observed,
            "p_value": res.p_value,
            "iterations": res.iterations,
            "seed": res.seed,
            "alpha": args.alpha,
            "significant": res.significant(args.alpha),
        },
    )


# --- PCR -------------------------------------------------------------------------


def _read_pronouns(path) -> tuple[str, ...]:
    if not path:
        return DEFAULT_PRONOUNS
    words = [w.strip().lower() for w in Path(path).read_text(encoding="utf-8").split()]
    if not words:
        raise UsageError(f"{path}: empty pronoun list")
    return tuple(dict.fromkeys(words))


def cmd_pcr_extract(args):
    docs = _with_deps(load_documents(args.docs, "gold"), args.deps)
    stats = ExtractionStats()
    pronouns = _read_pronouns(args.pronouns)
    insts = extract_instances(docs, pronouns, args.seed, args.dataset or "", args.threads, stats)
    log.info("extracted %d instances (%s)", len(insts), stats)
    if args.stats:
        prov = Provenance(args.seed, list(pronouns))
        write_atomic(
            args.stats,
            json.dumps({"stats": stats.__dict__, "provenance": prov.__dict__}, indent=2, sort_keys=True) + "\n",
        )
    _emit_lines(args, [json.dumps(i.to_json(), sort_keys=True, ensure_ascii=False) for i in insts])


def cmd_pcr_score(args):
    insts = read_instances(args.instances)
    preds = {k: v[args.key] for k, v in read_predictions(args.predictions, args.key).items()}
    score = score_predictions(insts, preds, args.strict)
    _check_unit("accuracy", score.accuracy)
    _emit_report(args, "pcr score", score.to_json())


def cmd_pcr_ensemble(args):
    insts = read_instances(args.instances)
    sup = read_predictions(args.supervised)
    lm = read_predictions(args.lm)
    lines = []
    for inst in insts:
        iid = inst.instance_id
        if iid not in sup or iid not in lm:
            raise UsageError(f"{iid!r} lacks a supervised or LM prediction")
        size = sup[iid].get(args.size_key)
        if size is None:
            raise UsageError(f"{iid!r}: supervised record lacks {args.size_key!r}")
        choice = ensemble_select(inst, sup[iid]["choice"], lm[iid]["choice"], int(size))
        source = "supervised" if int(size) > 2 else "lm"
        lines.append(json.dumps({"instance_id": iid, "choice": choice, "source": source}, sort_keys=True))
    _emit_lines(args, lines)


def cmd_pcr_assume(args):
    vals = (args.u_tc, args.u_pc, args.u_td, args.u_pd)
    for name, v in zip(("u_tc", "u_pc", "u_td", "u_pd"), vals):
        if not 0.0 <= v <= 1.0:
            raise UsageError(f"{name} must be an accuracy in [0, 1], got {v}")
    _emit_report(args, "pcr assume", check_assumption(*vals).to_json())


def _read_features(path) -> dict[str, list[Feature]]:
    out: dict[str, list[Feature]] = {}
    if not path:
        return out
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.setdefault(str(rec["instance_id"]), []).append(
                    Feature(str(rec["name"]), str(rec["target"]), str(rec["value"]))
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise UsageError(f"{path} line {lineno}: bad feature record ({exc})") from exc
    return out


def cmd_pcr_prompt(args):
    if bool(args.template) == bool(args.template_file):
        raise UsageError("give exactly one of --template and --template-file")
    template = args.template or Path(args.template_file).read_text(encoding="utf-8").rstrip("\n")
    feats = _read_features(args.features)
    lines = []
    for inst in read_instances(args.instances):
        text = format_prompt(inst, template, feats.get(inst.instance_id), args.speakers)
        lines.append(json.dumps({"instance_id": inst.instance_id, "prompt": text}, sort_keys=True, ensure_ascii=False))
    _emit_lines(args, lines)


# --- plausibility ------------------------------------------------------------------


def _load_counts(args) -> TripleCounts:
    tc = parse_triples(args.counts, args.cap_per_triple)
    if getattr(args, "roles", None):
        tc = TripleCounts(tc.triples, parse_role_counts(args.roles))
    return tc


def cmd_plaus_build_counts(args):
    total = TripleCounts()
    for p in args.triples:
        total = total.merge(parse_triples(p))
    if args.cap_per_triple is not None:
        total = total.capped(args.cap_per_triple)
    log.info("%d distinct triples, %d total, sha256 %s", len(total), total.total, total.corpus_hash())
    _emit(args, format_triples(total))


def _read_events(path) -> list[Triple]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                try:
                    rec = json.loads(line)
                    ev = rec.get("event") or [rec["subject"], rec["verb"], rec["object"]]
                except (json.JSONDecodeError, KeyError) as exc:
                    raise UsageError(f"{path} line {lineno}: bad event ({exc})") from exc
            else:
                ev = line.split("\t")
            if len(ev) != 3:
                raise UsageError(f"{path} line {lineno}: an event needs subject, verb and object")
            out.append(Triple(*map(str, ev)))
    return out


def cmd_plaus_score(args):
    counts = _load_counts(args)
    events = _read_events(args.events)
    hierarchy = dist = vectors = None
    if args.model == "resnik":
        if not args.hierarchy:
            raise UsageError("--model resnik needs --hierarchy")
        hierarchy = parse_hierarchy(args.hierarchy, args.senses, args.min_depth, args.root)
        dist = build_concept_distribution(counts, hierarchy)
    if args.model == "exemplar":
        vectors = parse_vectors(args.vectors) if args.vectors else pmi_vectors(counts, args.pmi_dims)
    scores = pmap(
        lambda t: score_event(args.model, t, counts, hierarchy, dist, vectors, args.role), events, args.threads
    )
    _emit_lines(args, [json.dumps(s.to_json(), sort_keys=True) for s in scores])


def cmd_plaus_gen_pairs(args):
    counts = _load_counts(args)
    pairs = generate_pairs(counts, args.seed, args.n, args.min_count)
    _emit_lines(
        args,
        [
            json.dumps({"positive": list(p.positive), "negative": list(p.negative), "form": p.form}, sort_keys=True)
            for p in pairs
        ],
    )


# --- consistency and AUC --------------------------------------------------------------


def _load_grids(args):
    hierarchy = None
    if args.hierarchy:
        hierarchy = parse_hierarchy(args.hierarchy, args.senses, args.min_depth, args.root)
    grids = parse_score_grid(args.grids, hierarchy)
    if args.concept_max:
        grids = [concept_max_transform(g) for g in grids]
    return grids


def cmd_consistency(args):
    grids = _load_grids(args)
    per_axis = {axis: consistency_report(grids, axis, args.threads) for axis in AXES}
    pooled = per_axis["both-paths"]
    for r in per_axis.values():
        _check_unit("ler", r.ler)
        if r.ccd is not None and r.ccd < 0:
            raise InvariantViolation(f"negative CCD {r.ccd}")
    result = {
        "pooled": pooled.to_json(),
        "per_axis": {a: per_axis[a].to_json() for a in ("subject", "object")},
        "grids": len(grids),
        "concept_max_transform": bool(args.concept_max),
    }
    _emit_report(args, "consistency", result)


def cmd_auc(args):
    events = read_labeled_events(args.events)
    if bool(args.scores) == bool(args.grids):
        raise UsageError("give exactly one of --scores and --grids")
    if args.scores:
        scores = read_event_scores(args.scores)
    else:
        scores = {}
        for g in parse_score_grid(args.grids):
            scores[Triple(*g.event)] = concept_max(g, args.mode)
    value = auc(events, scores)
    _check_unit("auc", value)
    pos = sum(1 for e in events if e.positive)
    _emit_report(
        args,
        "auc",
        {"auc": value, "positives": pos, "negatives": len(events) - pos, "source": "scores" if args.scores else f"concept-max:{args.mode}"},
    )


# --- parser ----------------------------------------------------------------------------


def _common(fmt: bool = True) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", help="output file (default: standard output)")
    if fmt:
        p.add_argument("--format", choices=("json", "md"), default="json")
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (default: ${ENV_THREADS} or 1)")
    p.add_argument("--config", help="JSON or TOML file of option defaults")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _seeded(p):
    p.add_argument("--seed", type=int, default=0)


def _hierarchy_opts(p, required=False):
    p.add_argument("--hierarchy", required=required, help="hypernym edges TSV (child, parent[, lemma])")
    p.add_argument("--senses", help="word-to-concept TSV")
    p.add_argument("--min-depth", type=int, default=1)
    p.add_argument("--root")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coref-meter", description="Coreference and plausibility evaluation workbench.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    report, lines = _common(), _common(fmt=False)

    p = sub.add_parser("score", parents=[report], help="MUC, B3, CEAF_e and CoNLL F1")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred")
    p.add_argument("--keep-singletons", action="store_true")
    p.add_argument("--macro", action="store_true")
    p.add_argument("--per-document", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("classify", parents=[lines], help="type mentions from dependency parses")
    p.add_argument("--docs", required=True)
    p.add_argument("--deps", required=True)
    p.add_argument("--pred", help="predicted clusters for --side predicted/both")
    p.add_argument("--side", choices=("gold", "predicted", "both"), default="gold")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("disagg", parents=[report], help="B3 per coreference type")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred")
    p.add_argument("--types", help="output of classify --side both")
    p.add_argument("--deps", help="classify on the fly from this CoNLL-U file")
    p.add_argument("--dataset")
    p.add_argument("--keep-singletons", action="store_true")
    p.set_defaults(func=cmd_disagg)

    p = sub.add_parser("gap", parents=[report], help="generalization gaps between two disagg reports")
    p.add_argument("--in", dest="in_report", required=True)
    p.add_argument("--out-domain", required=True)
    p.add_argument("--threshold", type=float, default=DEFAULT_HIGHLIGHT)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("permtest", parents=[report], help="paired sign-flip permutation test")
    p.add_argument("--gold")
    p.add_argument("--pred-a")
    p.add_argument("--pred-b")
    p.add_argument("--metric", choices=("conll",) + METRICS, default="conll")
    p.add_argument("--scores-a")
    p.add_argument("--scores-b")
    p.add_argument("--iterations", type=int, default=10000)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--keep-singletons", action="store_true")
    _seeded(p)
    p.set_defaults(func=cmd_permtest)

    pcr = sub.add_parser("pcr", help="binary pronoun benchmark").add_subparsers(
        dest="pcr_command", required=True, parser_class=_Parser
    )
    p = pcr.add_parser("extract", parents=[lines])
    p.add_argument("--docs", required=True)
    p.add_argument("--deps")
    p.add_argument("--pronouns", help="file of pronoun strings")
    p.add_argument("--dataset")
    p.add_argument("--stats", help="write extraction counts here")
    _seeded(p)
    p.set_defaults(func=cmd_pcr_extract)
    p = pcr.add_parser("score", parents=[report])
    p.add_argument("--instances", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--key", default="choice")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_pcr_score)
    p = pcr.add_parser("ensemble", parents=[lines])
    p.add_argument("--instances", required=True)
    p.add_argument("--supervised", required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--size-key", default="cluster_size")
    p.set_defaults(func=cmd_pcr_ensemble)
    p = pcr.add_parser("assume", parents=[report])
    for name in ("u-tc", "u-pc", "u-td", "u-pd"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.set_defaults(func=cmd_pcr_assume)
    p = pcr.add_parser("prompt", parents=[lines])
    p.add_argument("--instances", required=True)
    p.add_argument("--template")
    p.add_argument("--template-file")
    p.add_argument("--features")
    p.add_argument("--speakers", action="store_true")
    p.set_defaults(func=cmd_pcr_prompt)

    plaus = sub.add_parser("plaus", help="selectional-preference models").add_subparsers(
        dest="plaus_command", required=True, parser_class=_Parser
    )
    p = plaus.add_parser("build-counts", parents=[lines])
    p.add_argument("--triples", nargs="+", required=True)
    p.add_argument("--cap-per-triple", type=int)
    p.set_defaults(func=cmd_plaus_build_counts)
    p = plaus.add_parser("score", parents=[lines])
    p.add_argument("--counts", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--roles", help="word, role, verb, count TSV")
    p.add_argument("--role", default="obj")
    p.add_argument("--vectors")
    p.add_argument("--pmi-dims", type=int, default=100)
    p.add_argument("--cap-per-triple", type=int)
    _hierarchy_opts(p)
    p.set_defaults(func=cmd_plaus_score)
    p = plaus.add_parser("gen-pairs", parents=[lines])
    p.add_argument("--counts", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--min-count", type=int, default=0)
    p.add_argument("--cap-per-triple", type=int)
    _seeded(p)
    p.set_defaults(func=cmd_plaus_gen_pairs)

    p = sub.add_parser("consistency", parents=[report], help="CCD and LER of score grids")
    p.add_argument("--grids", required=True)
    p.add_argument("--concept-max", action="store_true", help="apply the ConceptMax transform first")
    p.add_argument("--report", dest="format", choices=("json", "md"), default=argparse.SUPPRESS, help="alias of --format")
    _hierarchy_opts(p)
    p.set_defaults(func=cmd_consistency)

    p = sub.add_parser("auc", parents=[report], help="AUC of scores on labeled events")
    p.add_argument("--events", required=True)
    p.add_argument("--scores")
    p.add_argument("--grids", help="score events by ConceptMax over these grids")
    p.add_argument("--mode", choices=("hard", "soft"), default="hard")
    p.set_defaults(func=cmd_auc)
    return parser


# --- config files ------------------------------------------------------------------------


def _argv_value(argv: Sequence[str], flag: str) -> Optional[str]:
    for i, a in enumerate(argv):
        if a == flag and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith(flag + "="):
            return a.split("=", 1)[1]
    return None


def _load_config(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".toml"):
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        try:
            cfg = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"{path}: invalid TOML config ({exc})") from exc
    else:
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON config ({exc.msg})") from exc
    if not isinstance(cfg, dict):
        raise UsageError(f"{path}: config must be a mapping")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def _leaf_parser(parser: argparse.ArgumentParser, argv: Sequence[str]):
    """Follow subcommand words in ``argv`` down to the parser that will handle it."""
    node = parser
    for word in argv:
        if word.startswith("-"):
            continue
        subs = [a for a in node._actions if isinstance(a, argparse._SubParsersAction)]
        if not subs or word not in subs[0].choices:
            break
        node = subs[0].choices[word]
    return node


def _apply_config(parser, argv) -> None:
    path = _argv_value(argv, "--config")
    if not path:
        return
    cfg = _load_config(path)
    leaf = _leaf_parser(parser, argv)
    known = {a.dest: a for a in leaf._actions}
    unknown = sorted(set(cfg) - set(known))
    if unknown:
        raise UsageError(f"{path}: unknown option(s) for this command: {', '.join(unknown)}")
    for dest, value in cfg.items():
        known[dest].required = False
    leaf.set_defaults(**cfg)


# --- entry point ------------------------------------------------------------------------------


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (CorefMeterError, OSError) as exc:
        print(f"coref-meter: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.threads is not None and args.threads < 1:
        print("coref-meter: error: --threads must be at least 1", file=sys.stderr)
        return 1
    args.threads = thread_count(args.threads)
    try:
        args.func(args)
    except InvariantViolation as exc:
        print(f"coref-meter: internal invariant violated: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0
    except (CorefMeterError, OSError, ValueError) as exc:
        print(f"coref-meter: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
