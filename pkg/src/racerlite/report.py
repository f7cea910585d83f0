"""Verdict rendering: schema-versioned JSON or plain text."""

from __future__ import annotations

import json
from typing import Dict, List

from .pipeline import Verdict
from .racedetect import AccessEvent, RaceReport

SCHEMA_VERSION = 1


def _access(r: RaceReport, e: AccessEvent, i: int) -> Dict[str, object]:
    w = r.witness
    return {
        "file": e.file,
        "line": e.line,
        "thread": e.thread,
        "kind": e.kind,
        "lockset_may": w.get("lockset_may", [[], []])[i],
        "lockset_must": w.get("lockset_must", [[], []])[i],
    }


def report_dict(v: Verdict, timings: bool = False) -> Dict[str, object]:
    out: Dict[str, object] = {
        "schema_version": SCHEMA_VERSION,
        "verdict": v.status,
        "races": [
            {
                "base": str(r.base),
                "class": r.classification,
                "accesses": [_access(r, r.first, 0), _access(r, r.second, 1)],
            }
            for r in v.reports
        ],
        "notes": list(v.diagnostics),
    }
    if timings:
        out["timings"] = {k: round(t, 6) for k, t in sorted(v.timings.items())}
    return out


def _text(v: Verdict, timings: bool) -> str:
    lines: List[str] = [f"verdict: {v.status}"]
    for r in v.reports:
        lines.append(f"{r.classification}-race on {r.base}:")
        for i, e in enumerate((r.first, r.second)):
            a = _access(r, e, i)
            may = ", ".join(a["lockset_may"]) or "-"
            lines.append(f"  {e.kind:5} {e.file}:{e.line} in {e.thread} (locks may: {may})")
    for n in v.diagnostics:
        lines.append(f"note: {n}")
    if timings:
        for k, t in sorted(v.timings.items()):
            lines.append(f"time {k}: {t:.3f}s")
    return "\n".join(lines) + "\n"


def emit_report(v: Verdict, fmt: str = "json", timings: bool = False) -> bytes:
    if fmt == "json":
        return (json.dumps(report_dict(v, timings), indent=2, sort_keys=False) + "\n").encode()
    if fmt == "text":
        return _text(v, timings).encode()
    raise ValueError(f"unknown report format {fmt!r}")
