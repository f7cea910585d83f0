"""Lockset analysis: which locks may or must be held at each context."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from ..absdomain import TOP, Address, Base, IntIv, Pointers, var_base
from ..backends.base import Backend, BackendResult, Context
from ..frontend.ir import Call, Cast, IRProgram, Stmt, Var
from .engine import FactOverflow, ForkingAnalysis

log = logging.getLogger(__name__)

LOCK_THRESHOLD = 3
FACT_CAP = 64


@dataclass(frozen=True)
class Lock:
    """A held lock.  ``guard`` is set for locks taken by a non-blocking
    function: the variable receiving its result and the success value."""

    address: Address
    mode: str = "plain"  # read | write | plain
    guard: Optional[Tuple[Optional[Base], int]] = None

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def sort_key(self):
        return (self.address.base.sort_key(), str(self.address.offset), self.mode)

    @property
    def exclusive(self) -> bool:
        return self.mode in ("write", "plain")

    def __str__(self):
        s = str(self.address.base) if self.address.offset.lo == 0 == self.address.offset.hi else str(self.address)
        if self.mode == "read":
            s += ":read"
        elif self.mode == "write":
            s += ":write"
        if self.guard is not None:
            s += "?"
        return s


Lockset = FrozenSet[Lock]
EMPTY: Lockset = frozenset()


def select_locks(targets: Iterable[Address], threshold: int = LOCK_THRESHOLD) -> List[Address]:
    """Deterministic choice of at most ``threshold`` lock targets."""
    return sorted(targets, key=lambda a: (a.base.sort_key(), str(a.offset)))[:threshold]


def _guard_base(lhs) -> Optional[Base]:
    while isinstance(lhs, Cast):
        lhs = lhs.operand
    if isinstance(lhs, Var) and lhs.scope != "func":
        return var_base(lhs)
    return None


def lockset_transfer(backend: Backend, r: BackendResult, c: Context, L: Lockset, stmt: Stmt,
                     threshold: int = LOCK_THRESHOLD) -> FrozenSet[Lockset]:
    if not (isinstance(stmt, Call) and stmt.role in ("lock", "unlock")):
        return frozenset({L})
    bind = stmt.binding
    if bind.lock >= len(stmt.args):
        return frozenset({L})
    targets = backend.value_ptr(r, c, stmt.args[bind.lock])
    if not targets:
        log.debug("line %d: %s on an unknown lock", stmt.line, stmt.role)
        return frozenset({L})
    chosen = select_locks(targets, threshold)
    if stmt.role == "lock":
        guard = None if bind.blocking else (_guard_base(stmt.lhs), bind.success)
        out = set()
        for a in chosen:
            kept = frozenset(l for l in L if not (l.address == a and l.mode == bind.mode))
            out.add(kept | {Lock(a, bind.mode, guard)})
        return frozenset(out)
    return frozenset(frozenset(l for l in L if l.address != a) for a in chosen)


def guarded_intersection(a: Iterable[Lock], b: Iterable[Lock]) -> FrozenSet[Address]:
    """Lock addresses held on both sides, at least once exclusively."""
    a, b = list(a), list(b)
    out = set()
    for x in a:
        for y in b:
            if x.address == y.address and (x.exclusive or y.exclusive):
                out.add(x.address)
    return frozenset(out)


class LocksetAnalysis:
    """Statement summaries of one thread plus the may/must queries."""

    def __init__(self, p: IRProgram, backend: Backend, r: BackendResult, threshold: int = LOCK_THRESHOLD, cap: int = FACT_CAP):
        self.p = p
        self.backend = backend
        self.r = r
        self.thread = r.thread
        self.threshold = threshold
        self.overflow = False
        self.facts: Dict[Context, Set[Lockset]] = {}
        eng = ForkingAnalysis(p, backend, r, lambda c, L, s: lockset_transfer(backend, r, c, L, s, threshold), cap)
        try:
            self.facts = eng.run(EMPTY)
        except FactOverflow as exc:
            log.info("%s; lockset precision reduced to may-only", exc)
            self.overflow = True
            self._fallback()

    def _fallback(self):
        """Every lock the thread may ever take, at every context."""
        locks: Set[Lock] = set()
        for c in self.backend.contexts(self.r):
            s = self.p.stmts[c.stmt]
            if isinstance(s, Call) and s.role == "lock" and s.binding.lock < len(s.args):
                for a in self.backend.value_ptr(self.r, c, s.args[s.binding.lock]):
                    locks.add(Lock(a, s.binding.mode, None))
        everything = frozenset(locks)
        self.facts = {c: {everything} for c in self.backend.contexts(self.r)}

    # -- trylock filtering ----------------------------------------------------
    def _guard(self, c: Context, lock: Lock) -> Tuple[bool, bool]:
        """(possibly held, surely held)."""
        if lock.guard is None:
            return True, True
        base, success = lock.guard
        if base is None:
            return True, False
        v = self.backend.state(self.r, c).get(base)
        if isinstance(v, IntIv):
            return success in v, v.lo == v.hi == success
        return v is TOP, False

    def reachable(self, c: Context) -> bool:
        return bool(self.facts.get(c))

    def may_ls(self, c: Context) -> Lockset:
        sets = self.facts.get(c)
        if not sets:
            return EMPTY
        union = frozenset().union(*sets)
        return frozenset(l for l in union if self._guard(c, l)[0])

    def must_ls(self, c: Context) -> Lockset:
        sets = self.facts.get(c)
        if not sets or self.overflow:
            return EMPTY
        inter = frozenset.intersection(*sets)
        return frozenset(l for l in inter if l.address.base.kind != "unknown" and self._guard(c, l)[1])

    def entries(self, c: Context) -> Set[Lockset]:
        return set(self.facts.get(c, ()))


def run_lockset_analysis(p: IRProgram, backend: Backend, results: Dict[str, BackendResult],
                         threshold: int = LOCK_THRESHOLD) -> Dict[str, LocksetAnalysis]:
    return {t: LocksetAnalysis(p, backend, r, threshold) for t, r in sorted(results.items())}


def format_locksets(p: IRProgram, analyses: Dict[str, LocksetAnalysis]) -> str:
    """Stable text dump of per-context may/must locksets."""
    lines = []
    for t in sorted(analyses):
        a = analyses[t]
        for c in sorted(a.facts):
            s = p.stmts[c.stmt]
            may = ", ".join(sorted(map(str, a.may_ls(c))))
            must = ", ".join(sorted(map(str, a.must_ls(c))))
            lines.append(f"{c}\tline {s.line}\t{s}\tmay={{{may}}}\tmust={{{must}}}")
    return "\n".join(lines) + ("\n" if lines else "")
