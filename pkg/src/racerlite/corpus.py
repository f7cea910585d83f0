"""Corpus runner: analyse annotated programs and score verdicts.

Each corpus file starts with comment headers::

    // expect: race          (or race_free)
    // allow: unknown race   (verdicts that do not count as errors)
"""

from __future__ import annotations

import logging
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .pipeline import RunConfig, run

log = logging.getLogger(__name__)

_HEADER = re.compile(r"^\s*//\s*(expect|allow)\s*:\s*(.*?)\s*$")
VERDICTS = ("race", "race_free", "unknown")


@dataclass
class Expectation:
    expect: str
    allow: Tuple[str, ...] = ()


def read_expectation(path: Path) -> Optional[Expectation]:
    expect, allow = None, []
    for line in path.read_text(encoding="utf-8").splitlines()[:20]:
        m = _HEADER.match(line)
        if not m:
            continue
        if m.group(1) == "expect":
            expect = m.group(2).split()[0] if m.group(2) else None
        else:
            allow += m.group(2).split()
    if expect not in ("race", "race_free"):
        return None
    return Expectation(expect, tuple(a for a in allow if a in VERDICTS))


@dataclass
class Row:
    file: str
    expect: str
    verdict: str
    outcome: str  # TP | FP | TN | FN | unknown | error
    allowed: bool
    seconds: float
    must_races: int = 0
    error: str = ""


def classify(expect: str, verdict: str) -> str:
    if verdict in ("unknown", "error"):
        return verdict
    if expect == "race":
        return "TP" if verdict == "race" else "FN"
    return "TN" if verdict == "race_free" else "FP"


def _one(args) -> Row:
    path, exp, cfg = args
    t0 = time.perf_counter()
    try:
        v = run(cfg, Path(path))
        verdict, err, n = v.status, "", len(v.reports) if v.status == "race" else 0
    except Exception as exc:  # a crash is a scored outcome, not a runner failure
        verdict, err, n = "error", f"{type(exc).__name__}: {exc}", 0
    dt = time.perf_counter() - t0
    outcome = classify(exp.expect, verdict)
    allowed = outcome in ("TP", "TN", "unknown") or verdict in exp.allow
    return Row(str(path), exp.expect, verdict, outcome, allowed, dt, n, err)


@dataclass
class CorpusResult:
    rows: List[Row] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    def counts(self) -> Dict[str, int]:
        c = {k: 0 for k in ("TP", "FP", "TN", "FN", "unknown", "error")}
        for r in self.rows:
            c[r.outcome] += 1
        return c

    @property
    def failures(self) -> List[Row]:
        return [r for r in self.rows if not r.allowed]

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def table(self) -> str:
        lines = [f"{'file':40} {'expect':10} {'verdict':10} outcome"]
        for r in self.rows:
            mark = "" if r.allowed else "  <-- unexpected"
            lines.append(f"{Path(r.file).name:40} {r.expect:10} {r.verdict:10} {r.outcome}{mark}")
        c = self.counts()
        lines.append(" ".join(f"{k}={v}" for k, v in c.items()))
        for s in self.skipped:
            lines.append(f"skipped (no expectation header): {s}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) for r in self.rows], "counts": self.counts(), "skipped": self.skipped}


def run_corpus(directory, cfg: Optional[RunConfig] = None, jobs: int = 1) -> CorpusResult:
    cfg = cfg or RunConfig()
    res = CorpusResult()
    work = []
    for path in sorted(Path(directory).glob("*.c")):
        exp = read_expectation(path)
        if exp is None:
            log.warning("%s: no expectation header, skipped", path)
            res.skipped.append(str(path))
            continue
        work.append((str(path), exp, cfg))
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            res.rows = list(pool.map(_one, work))
    else:
        res.rows = [_one(w) for w in work]
    return res
