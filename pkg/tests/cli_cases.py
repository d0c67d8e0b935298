"""One representative invocation per CLI subcommand, over the fixture corpus."""

import json
from pathlib import Path

from coref_meter.cli import run
from coref_meter.pcr import read_instances


def prepare(fixtures: Path, work: Path) -> list[tuple[str, list[str]]]:
    """Write the intermediate inputs some commands need and return ``(name, argv)`` cases."""
    F = lambda name: str(fixtures / name)  # noqa: E731
    W = lambda name: str(work / name)  # noqa: E731
    work.mkdir(parents=True, exist_ok=True)

    setup = [
        ["classify", "--docs", F("docs.conll"), "--deps", F("docs.conllu"), "--pred", F("pred.conll"), "--side", "both", "--out", W("types.jsonl")],
        ["disagg", "--gold", F("docs.conll"), "--pred", F("pred_perfect.conll"), "--deps", F("docs.conllu"),
         "--dataset", "in", "--out", W("in.json")],
        ["disagg", "--gold", F("docs.conll"), "--pred", F("pred.conll"), "--deps", F("docs.conllu"),
         "--dataset", "out", "--out", W("out.json")],
        ["pcr", "extract", "--docs", F("pcr_corpus.jsonl"), "--seed", "1", "--out", W("inst.jsonl")],
    ]
    for argv in setup:
        rc = run(argv)
        if rc != 0:
            raise RuntimeError(f"setup failed ({rc}): {argv}")

    insts = read_instances(W("inst.jsonl"))
    sup, lm = [], []
    for k, inst in enumerate(insts):
        size = 2 + k % 3
        sup.append({"instance_id": inst.instance_id, "choice": inst.label, "cluster_size": size})
        lm.append({"instance_id": inst.instance_id, "choice": 3 - inst.label if k % 2 else inst.label})
    (work / "sup.jsonl").write_text("".join(json.dumps(r) + "\n" for r in sup))
    (work / "lm.jsonl").write_text("".join(json.dumps(r) + "\n" for r in lm))
    feats = [{"instance_id": insts[0].instance_id, "name": "grammatical gender",
              "target": insts[0].span_text(insts[0].candidates[0]), "value": "male"}]
    (work / "feats.jsonl").write_text("".join(json.dumps(r) + "\n" for r in feats))
    (work / "a.txt").write_text(" ".join(str(0.5 + 0.01 * i) for i in range(12)) + "\n")
    (work / "b.txt").write_text(json.dumps([0.45 + 0.013 * i for i in range(12)]) + "\n")

    hier = ["--hierarchy", F("hierarchy_edges.tsv"), "--senses", F("senses.tsv")]
    cases = [
        ("score", ["score", "--gold", F("docs.conll"), "--pred", F("pred.conll"), "--per-document"]),
        ("classify", ["classify", "--docs", F("docs.conll"), "--deps", F("docs.conllu")]),
        ("disagg", ["disagg", "--gold", F("docs.conll"), "--pred", F("pred.conll"), "--types", W("types.jsonl")]),
        ("gap", ["gap", "--in", W("in.json"), "--out-domain", W("out.json")]),
        ("permtest", ["permtest", "--gold", F("docs.conll"), "--pred-a", F("pred.conll"),
                      "--pred-b", F("pred_perfect.conll"), "--iterations", "3000", "--seed", "3"]),
        ("permtest-mean", ["permtest", "--scores-a", W("a.txt"), "--scores-b", W("b.txt"),
                           "--iterations", "2500", "--seed", "4"]),
        ("pcr extract", ["pcr", "extract", "--docs", F("pcr_corpus.jsonl"), "--seed", "7"]),
        ("pcr score", ["pcr", "score", "--instances", W("inst.jsonl"), "--predictions", W("lm.jsonl")]),
        ("pcr ensemble", ["pcr", "ensemble", "--instances", W("inst.jsonl"), "--supervised", W("sup.jsonl"),
                          "--lm", W("lm.jsonl")]),
        ("pcr assume", ["pcr", "assume", "--u-tc", "0.9", "--u-pc", "0.7", "--u-td", "0.8", "--u-pd", "0.6"]),
        ("pcr prompt", ["pcr", "prompt", "--instances", W("inst.jsonl"), "--features", W("feats.jsonl"),
                        "--template", "{context}\nWho is {pronoun}: {cand1} or {cand2}?"]),
        ("plaus build-counts", ["plaus", "build-counts", "--triples", F("triples.tsv"), F("triples.tsv")]),
        ("plaus gen-pairs", ["plaus", "gen-pairs", "--counts", F("triples.tsv"), "--n", "50", "--seed", "2"]),
        ("consistency", ["consistency", "--grids", F("grids.jsonl")] + hier),
        ("consistency-cm", ["consistency", "--grids", F("grids.jsonl"), "--concept-max"]),
        ("auc", ["auc", "--events", F("events.jsonl"), "--scores", F("scores.jsonl")]),
        ("auc-grids", ["auc", "--events", F("events.jsonl"), "--grids", F("grids.jsonl"), "--mode", "soft"]),
    ]
    for model in ("ngram", "pmi", "resnik", "pado", "exemplar"):
        extra = hier if model == "resnik" else (["--pmi-dims", "3"] if model == "exemplar" else [])
        cases.append((f"plaus score {model}", ["plaus", "score", "--counts", F("triples.tsv"),
                                                "--events", F("events.jsonl"), "--model", model] + extra))
    return cases


def run_to_file(argv: list[str], out: Path, threads: int) -> bytes:
    rc = run(argv + ["--threads", str(threads), "--out", str(out)])
    if rc != 0:
        raise RuntimeError(f"exit {rc}: {argv}")
    return out.read_bytes()
