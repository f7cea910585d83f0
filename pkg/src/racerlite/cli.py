"""Command line interface: ``racerlite analyze|corpus|oracle``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .backends import BACKENDS
from .conc import format_locksets
from .corpus import run_corpus
from .frontend import ConcurrencyConfig, ConfigError, ParseError, SourceProgram, parse_program
from .oracle import Bounds, enumerate as explore
from .pipeline import EXIT_CODES, EXIT_ERROR, MODES, RunConfig, run
from .report import emit_report


def _config_args(ap: argparse.ArgumentParser):
    ap.add_argument("--mode", choices=MODES, default="combined")
    ap.add_argument("--backend", choices=sorted(BACKENDS), default="interp")
    ap.add_argument("--context-depth", type=int, default=1, metavar="N")
    ap.add_argument("--unfold", type=int, default=1, metavar="K")
    ap.add_argument("--lock-threshold", type=int, default=3, metavar="T")
    ap.add_argument("--config", metavar="FILE", help="concurrency function configuration (JSON)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="racerlite", description="Static data race detection for small C programs.")
    ap.add_argument("--version", action="version", version=f"racerlite {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyse one program")
    a.add_argument("file", nargs="+")
    _config_args(a)
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--timings", action="store_true", help="include phase timings in the report")
    a.add_argument("--dump-thread-graph", metavar="FILE", help="write the thread-creation graph (DOT)")
    a.add_argument("--dump-locksets", metavar="FILE", help="write per-context locksets")

    c = sub.add_parser("corpus", help="run and score an annotated corpus")
    c.add_argument("directory")
    _config_args(c)
    c.add_argument("--format", choices=("text", "json"), default="text")
    c.add_argument("--jobs", type=int, default=1)

    o = sub.add_parser("oracle", help="explore all interleavings of a program")
    o.add_argument("file")
    o.add_argument("--config", metavar="FILE")
    o.add_argument("--max-steps", type=int, default=200)
    o.add_argument("--max-threads", type=int, default=8)
    return ap


def _run_config(ns) -> RunConfig:
    return RunConfig(
        mode=ns.mode,
        backend=ns.backend,
        context_depth=ns.context_depth,
        unfold=ns.unfold,
        threshold=ns.lock_threshold,
        config=ns.config,
        format=getattr(ns, "format", "text"),
    )


def _setup_logging():
    level = os.environ.get("RACERLITE_LOG")
    if level:
        logging.basicConfig(
            level=getattr(logging, level.upper(), logging.INFO), format="%(name)s: %(message)s", stream=sys.stderr
        )


def cmd_analyze(ns) -> int:
    cfg = _run_config(ns)
    src = SourceProgram.from_paths(ns.file, cfg.concurrency_config())
    v = run(cfg, src)
    sys.stdout.buffer.write(emit_report(v, cfg.format, ns.timings))
    phase = v.phases.get("over") or v.phases.get("under")
    if ns.dump_thread_graph and phase is not None:
        Path(ns.dump_thread_graph).write_text(phase.threads.dot(), encoding="utf-8")
    if ns.dump_locksets and phase is not None:
        Path(ns.dump_locksets).write_text(format_locksets(phase.program, phase.locksets), encoding="utf-8")
    return EXIT_CODES[v.status]


def cmd_corpus(ns) -> int:
    res = run_corpus(ns.directory, _run_config(ns), ns.jobs)
    if ns.format == "json":
        print(json.dumps(res.to_dict(), indent=2))
    else:
        sys.stdout.write(res.table())
    return res.exit_code


def cmd_oracle(ns) -> int:
    conf = ConcurrencyConfig.load(ns.config) if ns.config else ConcurrencyConfig.default()
    p = parse_program(SourceProgram.from_paths([ns.file], conf))
    v = explore(p, Bounds(max_steps=ns.max_steps, max_threads=ns.max_threads))
    print(json.dumps(v.to_dict(), indent=2))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    _setup_logging()
    ns = build_parser().parse_args(argv)
    try:
        return {"analyze": cmd_analyze, "corpus": cmd_corpus, "oracle": cmd_oracle}[ns.command](ns)
    except (ParseError, ConfigError, ValueError, OSError) as exc:
        print(f"racerlite: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except RecursionError:
        print("racerlite: error: program too deeply nested", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
