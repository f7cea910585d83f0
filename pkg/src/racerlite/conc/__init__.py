"""Happens-in-parallel helper analyses: locksets and active threads."""

from .active import ActiveThreadsAnalysis, resolve_thread_id, run_active_threads_analysis
from .engine import FactOverflow, ForkingAnalysis
from .lockset import (
    Lock,
    LocksetAnalysis,
    format_locksets,
    guarded_intersection,
    lockset_transfer,
    run_lockset_analysis,
)

__all__ = [
    "ActiveThreadsAnalysis",
    "FactOverflow",
    "ForkingAnalysis",
    "Lock",
    "LocksetAnalysis",
    "format_locksets",
    "guarded_intersection",
    "lockset_transfer",
    "resolve_thread_id",
    "run_active_threads_analysis",
    "run_lockset_analysis",
]
