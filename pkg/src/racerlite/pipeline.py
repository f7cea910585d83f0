"""End-to-end driver: parse, transform, thread analysis, lockset and
active-threads analyses, race detection and the combined verdict."""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from .backends import BACKENDS, make_backend
from .backends.base import initial_globals
from .conc import ActiveThreadsAnalysis, LocksetAnalysis, run_active_threads_analysis, run_lockset_analysis
from .conc.lockset import LOCK_THRESHOLD
from .frontend import ConcurrencyConfig, IRProgram, SourceProgram, detect_active_waiting, make_extensive, parse_program, unfold_loops
from .racedetect import Detection, RaceReport, detect_races
from .threads import ThreadAnalysis, build_thread_analysis

log = logging.getLogger("racerlite")

MODES = ("under", "over", "combined")


@dataclass
class RunConfig:
    mode: str = "combined"
    backend: str = "interp"
    context_depth: int = 1
    unfold: int = 1
    threshold: int = LOCK_THRESHOLD
    config: Optional[str] = None  # concurrency configuration file
    format: str = "text"
    extensive: bool = True  # rewrite the program before an over-approximating run

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.context_depth < 0 or self.unfold < 0:
            raise ValueError("context depth and unfold count must be non-negative")
        if self.threshold < 1:
            raise ValueError("lock threshold must be at least 1")
        if self.format not in ("text", "json"):
            raise ValueError(f"unknown format {self.format!r}")

    def concurrency_config(self) -> ConcurrencyConfig:
        return ConcurrencyConfig.load(self.config) if self.config else ConcurrencyConfig.default()


@dataclass
class PhaseResult:
    """Everything one under- or over-approximating run produced."""

    mode: str
    program: IRProgram
    threads: ThreadAnalysis
    locksets: Dict[str, LocksetAnalysis]
    active: ActiveThreadsAnalysis
    detection: Detection


@dataclass
class Verdict:
    status: str  # race | race_free | unknown
    reports: List[RaceReport] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    phases: Dict[str, PhaseResult] = field(default_factory=dict)
    mode: str = "combined"
    backend: str = "interp"

    def __post_init__(self):
        if self.status == "race" and not self.reports:
            raise ValueError("a race verdict needs at least one report")


class _Timer:
    def __init__(self):
        self.timings: Dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            dt = time.perf_counter() - t0
            self.timings[name] = self.timings.get(name, 0.0) + dt
            log.info("phase %s: %.3fs", name, dt)


def analyse_mode(p: IRProgram, mode: str, cfg: RunConfig, timer: Optional[_Timer] = None) -> PhaseResult:
    """One under- or over-approximating run on an already parsed program."""
    timer = timer or _Timer()
    with timer.phase(f"{mode}:transform"):
        if mode == "under":
            q = unfold_loops(p, cfg.unfold)
        elif cfg.extensive:
            q = make_extensive(p)
        else:
            q = p
    backend = make_backend(cfg.backend, q, cfg.context_depth)
    with timer.phase(f"{mode}:threads"):
        ta = build_thread_analysis(q, initial_globals(q), mode, backend)
    with timer.phase(f"{mode}:conc"):
        ls = run_lockset_analysis(q, backend, ta.results, cfg.threshold)
        at = run_active_threads_analysis(q, backend, ta.results, ta.graph, ta.unique)
    with timer.phase(f"{mode}:races"):
        det = detect_races(ta, ls, at)
    return PhaseResult(mode, q, ta, ls, at, det)


def _source(src: Union[str, Path, SourceProgram], cfg: RunConfig) -> SourceProgram:
    if isinstance(src, SourceProgram):
        return src
    if isinstance(src, Path):
        return SourceProgram.from_paths([src], cfg.concurrency_config())
    return SourceProgram.from_text(src, config=cfg.concurrency_config())


def run(cfg: RunConfig, src: Union[str, Path, SourceProgram]) -> Verdict:
    """Analyse ``src``.  Parse and analysis errors propagate to the caller."""
    timer = _Timer()
    with timer.phase("parse"):
        p = parse_program(_source(src, cfg))
    v = Verdict("unknown", mode=cfg.mode, backend=cfg.backend)
    if detect_active_waiting(p):
        v.diagnostics.append("loop with an empty body (active waiting): not analysed")
        v.timings = timer.timings
        return v
    if cfg.mode in ("under", "combined"):
        under = analyse_mode(p, "under", cfg, timer)
        v.phases["under"] = under
        must = under.detection.must
        v.diagnostics += [f"under: {n}" for n in under.detection.notes]
        if must:
            v.status, v.reports = "race", must
            v.timings = timer.timings
            return v
        may = under.detection.reports
        if cfg.mode == "under" and may:
            v.diagnostics += [f"under: possible race on {r.base} at lines {r.first.line} and {r.second.line}" for r in may]
    if cfg.mode in ("over", "combined"):
        over = analyse_mode(p, "over", cfg, timer)
        v.phases["over"] = over
        det = over.detection
        v.diagnostics += [f"over: {n}" for n in det.notes]
        if not det.reports and not det.unresolved_shared:
            v.status = "race_free"
        else:
            v.reports = det.reports
            if det.unresolved_shared and not det.reports:
                v.diagnostics.append("over: accesses through unresolved pointers in concurrent code")
    v.timings = timer.timings
    return v


EXIT_CODES = {"race_free": 0, "race": 1, "unknown": 2}
EXIT_ERROR = 3
