"""Versioned JSON reports, atomic file output and Markdown renders.

Markdown is always produced from the JSON payload, never from live objects,
so ``md`` output carries no information that ``json`` lacks.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Mapping, Optional

from . import __version__

TOOL = "coref-meter"
REPORT_VERSION = "1.0"

# Settings that affect scheduling or destination but never results.
UNHASHED = frozenset({"threads", "out", "format", "config", "verbose", "func", "command"})


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=str)


def config_hash(config: Mapping[str, Any]) -> str:
    kept = {k: v for k, v in config.items() if k not in UNHASHED}
    return hashlib.sha256(_canonical(kept).encode("utf-8")).hexdigest()


def make_report(command: str, config: Mapping[str, Any], result: Any) -> dict:
    kept = {k: v for k, v in sorted(config.items()) if k not in UNHASHED}
    return {
        "meta": {
            "tool": TOOL,
            "tool_version": __version__,
            "report_version": REPORT_VERSION,
            "command": command,
            "config": json.loads(_canonical(kept)),
            "config_hash": config_hash(config),
        },
        "result": result,
    }


def unwrap(doc: Mapping) -> Mapping:
    """Accept either a full report or a bare result payload."""
    if "meta" in doc and "result" in doc:
        return doc["result"]
    return doc


def dumps(report: Any) -> str:
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_atomic(path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def read_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# --- Markdown -------------------------------------------------------------------


def _pct(x: Optional[float]) -> str:
    return "n/a" if x is None else f"{100 * x:.1f}"


def _num(x: Optional[float], digits: int = 4) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, bool) or isinstance(x, int):
        return str(x)
    return f"{x:.{digits}f}"


def _table(header, rows) -> list[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    out.extend("| " + " | ".join(str(c) for c in r) + " |" for r in rows)
    return out


def _md_score(r) -> list[str]:
    rows = [
        [name, _pct(m["recall"]), _pct(m["precision"]), _pct(m["f1"])]
        for name, m in (("MUC", r["metrics"]["muc"]), ("B3", r["metrics"]["b3"]), ("CEAF_e", r["metrics"]["ceaf_e"]))
    ]
    rows.append(["CoNLL F1", "", "", _pct(r["conll_f1"])])
    lines = _table(["Metric", "R", "P", "F1"], rows)
    s = r["settings"]
    lines.append("")
    lines.append(
        f"{r['documents']} documents, {r['mentions']['gold']} gold and {r['mentions']['predicted']} predicted mentions; "
        f"{s['aggregation']} average; CEAF similarity {s['ceaf_similarity']}; "
        f"singletons {'kept' if s['keep_singletons'] else 'removed'}."
    )
    if r.get("degenerate_documents"):
        lines.append(f"Degenerate documents: {', '.join(r['degenerate_documents'])}")
    return lines


def _md_disagg(r) -> list[str]:
    o = r["overall"]
    rows = [["All mentions", _pct(o["metrics"]["b3"]["recall"]), _pct(o["metrics"]["b3"]["precision"]),
             _pct(o["metrics"]["b3"]["f1"]), o["mentions"]["gold"], o["mentions"]["predicted"]]]
    for t, s in r["per_type"].items():
        rows.append([t, _pct(s["recall"]), _pct(s["precision"]), _pct(s["f1"]), s["gold_mentions"], s["predicted_mentions"]])
    title = [f"Dataset: {r['dataset']}", ""] if r.get("dataset") else []
    return title + _table(["Type", "B3 R", "B3 P", "B3 F1", "|M|", "|M'|"], rows)


def _md_gap(r) -> list[str]:
    hot = set(r["highlighted"])
    rows = [["All mentions (AGG)", _pct(r["agg"]), ""]]
    for t, v in r["tgg"].items():
        rows.append([t, _pct(v), "**" if t in hot else ""])
    for t in r["incomparable"]:
        rows.append([t, "n/a", "no mentions on one side"])
    lines = _table(["Type", "Gap (F1 points)", "Flag"], rows)
    lines.append("")
    lines.append(f"`**` marks |TGG - AGG| above {_pct(r['highlight_threshold'])} points.")
    return lines


def _md_permtest(r) -> list[str]:
    return _table(
        ["Statistic", "Observed", "p-value", "Iterations", "Seed"],
        [[r["statistic"], _num(r["observed"]), _num(r["p_value"]), r["iterations"], r["seed"]]],
    )


def _md_pcr_score(r) -> list[str]:
    rows = []
    for name, a in r["per_dataset"].items():
        rows.append([name or "(unnamed)", _pct(a["accuracy"]), f"[{_pct(a['ci'][0])}, {_pct(a['ci'][1])}]", a["total"]])
    o = r["overall"]
    rows.append(["Overall", _pct(o["accuracy"]), f"[{_pct(o['ci'][0])}, {_pct(o['ci'][1])}]", o["total"]])
    return _table(["Dataset", "Accuracy", "90% CI", "n"], rows)


def _md_consistency(r) -> list[str]:
    rows = [["pooled", _num(r["pooled"]["ccd"]), _num(r["pooled"]["ler"]), r["pooled"]["windows"]]]
    for axis, s in r["per_axis"].items():
        rows.append([axis, _num(s["ccd"]), _num(s["ler"]), s["windows"]])
    return _table(["Windows", "CCD", "LER", "n"], rows)


def _md_generic(r) -> list[str]:
    if not isinstance(r, Mapping):
        return ["```", json.dumps(r, indent=2, sort_keys=True), "```"]
    rows = [[k, _canonical(v) if isinstance(v, (dict, list)) else _num(v) if isinstance(v, float) else v]
            for k, v in sorted(r.items())]
    return _table(["Field", "Value"], rows)


RENDERERS = {
    "score": _md_score,
    "disagg": _md_disagg,
    "gap": _md_gap,
    "permtest": _md_permtest,
    "pcr score": _md_pcr_score,
    "consistency": _md_consistency,
}


def render_markdown(report: Mapping) -> str:
    meta = report["meta"]
    body = RENDERERS.get(meta["command"], _md_generic)(report["result"])
    head = [
        f"# {TOOL} {meta['command']}",
        "",
        f"_tool {meta['tool_version']}, report {meta['report_version']}, config {meta['config_hash'][:12]}_",
        "",
    ]
    return "\n".join(head + body) + "\n"


def render(report: Mapping, fmt: str) -> str:
    if fmt == "md":
        return render_markdown(report)
    if fmt == "json":
        return dumps(report)
    raise ValueError(f"unknown format {fmt!r}")
