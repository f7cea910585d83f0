"""Data race detection over the results of the thread, lockset and
active-threads analyses.

Accesses are clustered by base; each cluster runs through a small state
machine that discards bases only one thread touches or that are only read.
The surviving pairs are classified as may- or must-races.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from .absdomain import Base, IntIv, Pointers, decl_base, offsets_may_overlap, offsets_must_overlap
from .backends.alias import AliasBackend
from .backends.base import Access, AccessPair, Backend, Context, strip_addr, unconditional_nodes
from .backends.syntactic import SyntacticBackend, address_taken
from .conc.active import ActiveThreadsAnalysis
from .conc.lockset import Lock, LocksetAnalysis, guarded_intersection
from .frontend.ir import Call, IRProgram, Stmt
from .threads import ThreadAnalysis


@dataclass(frozen=True)
class AccessEvent:
    context: Context
    base: Base
    offset: IntIv
    size: Optional[int]
    kind: str  # read | write
    atomic: bool = False
    single_base: bool = True  # the only base read (written) in its context
    line: int = 0
    file: str = ""
    origin: int = -1  # statement the access stems from, before loop peeling

    @property
    def thread(self) -> str:
        return self.context.thread

    @property
    def stmt(self) -> int:
        return self.context.stmt

    def sort_key(self):
        return (self.context, self.kind, str(self.offset))


# --------------------------------------------------------------------------
# base state machine


class Kind(Enum):
    FRESH = "Fresh"
    READ_ONLY = "ReadOnly"
    EXCLUSIVE = "Exclusive"
    SHARED = "Shared"
    SHARED_MOD = "SharedMod"


@dataclass(frozen=True)
class BaseState:
    kind: Kind
    owner: Optional[str] = None

    def __str__(self):
        return f"{self.kind.value}({self.owner})" if self.owner else self.kind.value


FRESH = BaseState(Kind.FRESH)
SHARED = BaseState(Kind.SHARED)
SHARED_MOD = BaseState(Kind.SHARED_MOD)

# (state kind, access kind, same owner?) -> (next kind, keep owner?)
# ``None`` for the same-owner flag means the owner is irrelevant.
TRANSITIONS: Dict[Tuple[Kind, str, Optional[bool]], Tuple[Kind, bool]] = {
    (Kind.FRESH, "read", None): (Kind.READ_ONLY, True),
    (Kind.FRESH, "write", None): (Kind.EXCLUSIVE, True),
    (Kind.READ_ONLY, "read", True): (Kind.READ_ONLY, True),
    (Kind.READ_ONLY, "write", True): (Kind.EXCLUSIVE, True),
    (Kind.READ_ONLY, "read", False): (Kind.SHARED, False),
    (Kind.READ_ONLY, "write", False): (Kind.SHARED_MOD, False),
    (Kind.EXCLUSIVE, "read", True): (Kind.EXCLUSIVE, True),
    (Kind.EXCLUSIVE, "write", True): (Kind.EXCLUSIVE, True),
    (Kind.EXCLUSIVE, "read", False): (Kind.SHARED_MOD, False),
    (Kind.EXCLUSIVE, "write", False): (Kind.SHARED_MOD, False),
    (Kind.SHARED, "read", None): (Kind.SHARED, False),
    (Kind.SHARED, "write", None): (Kind.SHARED_MOD, False),
    (Kind.SHARED_MOD, "read", None): (Kind.SHARED_MOD, False),
    (Kind.SHARED_MOD, "write", None): (Kind.SHARED_MOD, False),
}


def update_base_state(s: BaseState, thread: str, kind: str, unique: Mapping[str, bool]) -> BaseState:
    """One step of the base state machine.  Accesses by a thread that may
    run in several instances never count as the owner's own."""
    if s.kind in (Kind.FRESH, Kind.SHARED, Kind.SHARED_MOD):
        same = None
    else:
        same = s.owner == thread and unique.get(thread, True)
    nxt, keep = TRANSITIONS[(s.kind, kind, same)]
    if not keep:
        return BaseState(nxt)
    return BaseState(nxt, s.owner if s.owner is not None else thread)


def final_base_state(events: Iterable[AccessEvent], unique: Mapping[str, bool]) -> BaseState:
    s = FRESH
    for e in events:
        s = update_base_state(s, e.thread, e.kind, unique)
    return s


# --------------------------------------------------------------------------
# access collection


def _decl_flags(p: IRProgram) -> Dict[Tuple, Tuple[bool, bool]]:
    return {(d.scope, d.fn, d.name): (d.atomic, d.thread_local) for d in p.all_decls()}


def collect_accesses(ta: ThreadAnalysis, unresolved: Optional[List[AccessEvent]] = None) -> Tuple[List[AccessEvent], List[str]]:
    """Events for every access of every context, minus those that can never
    race: thread-local storage and unresolved targets.  The latter are
    appended to ``unresolved`` when given."""
    p, backend = ta.program, ta.backend
    flags = _decl_flags(p)
    events: List[AccessEvent] = []
    notes: Set[str] = set()
    for t in sorted(ta.results):
        r = ta.results[t]
        for c in backend.contexts(r):
            s = p.stmts[c.stmt]
            pair = backend.accesses(r, c, s)
            for kind, accs, bases in (("read", pair.reads, pair.read_bases), ("write", pair.writes, pair.write_bases)):
                for a in accs:
                    b = a.base
                    if b.kind == "unknown":
                        notes.add(f"line {s.line}: access through an unresolved pointer ignored")
                        if unresolved is not None:
                            unresolved.append(AccessEvent(c, b, a.offset, a.size, kind, False, False, s.line, s.file))
                        continue
                    if not b.is_memory:
                        continue
                    atomic, tls = flags.get((b.kind, b.fn, b.name), (False, False)) if b.kind != "dynamic" else (False, False)
                    if tls:
                        continue
                    events.append(AccessEvent(
                        c, b, a.offset, a.size, kind, atomic,
                        single_base=len(bases) == 1 and not a.ambiguous,
                        line=s.line, file=s.file, origin=s.origin if s.origin >= 0 else s.sid,
                    ))
    events.sort(key=AccessEvent.sort_key)
    return events, sorted(notes)


# --------------------------------------------------------------------------
# escape analysis


class EscapeAnalysis:
    """Which bases other threads can reach."""

    def __init__(self, ta: ThreadAnalysis):
        self.ta = ta
        p, backend = ta.program, ta.backend
        self.taken = address_taken(p)
        self.syntactic = type(backend) is SyntacticBackend
        self.escaped: Set[Base] = set()
        if self.syntactic:
            return
        if isinstance(backend, AliasBackend):
            self._alias(backend)
        else:
            self._interp()

    def _create_args(self):
        p, backend = self.ta.program, self.ta.backend
        for t, r in self.ta.results.items():
            for c in backend.contexts(r):
                s = p.stmts[c.stmt]
                if isinstance(s, Call) and s.role == "create" and s.binding.arg is not None and s.binding.arg < len(s.args):
                    yield r, c, s.args[s.binding.arg]

    def _interp(self):
        p, backend = self.ta.program, self.ta.backend
        edges: Dict[Base, Set[Base]] = {}
        for r in self.ta.results.values():
            for st in r.payload.states.values():
                for b, v in st.values.items():
                    if isinstance(v, Pointers):
                        edges.setdefault(b, set()).update(a.base for a in v.addrs)
        roots: Set[Base] = {decl_base(g) for g in p.globals}
        for r, c, arg in self._create_args():
            roots |= {a.base for a in backend.value_ptr(r, c, arg)}
        self.escaped = _reach(roots, edges)

    def _alias(self, backend: AliasBackend):
        p, uf = self.ta.program, backend.uf
        edges: Dict[Base, Set[Base]] = {}
        for b, n in list(uf.node_of.items()):
            edges[b] = set(uf.class_members(uf.pts(n)))
        roots: Set[Base] = {decl_base(g) for g in p.globals}
        for r, c, arg in self._create_args():
            roots |= {a.base for a in backend.value_ptr(r, c, arg)}
        self.escaped = _reach(roots, edges)

    def escapes(self, b: Base) -> bool:
        if b.kind == "global":
            return True
        if self.syntactic:
            if b.kind == "dynamic":
                return True
            return (b.kind, b.fn, b.name) in self.taken
        if b.kind in ("local", "formal") and (b.kind, b.fn, b.name) not in self.taken:
            return False
        return b in self.escaped


def _reach(roots: Set[Base], edges: Dict[Base, Set[Base]]) -> Set[Base]:
    seen = set(roots)
    work = list(roots)
    while work:
        b = work.pop()
        for n in edges.get(b, ()):
            if n not in seen:
                seen.add(n)
                work.append(n)
    return seen


def escapes(b: Base, ta: ThreadAnalysis) -> bool:
    return EscapeAnalysis(ta).escapes(b)


# --------------------------------------------------------------------------
# clustering and classification


def candidate_clusters(events: Iterable[AccessEvent], unique: Mapping[str, bool],
                       escape: Optional[EscapeAnalysis] = None) -> Dict[Base, List[AccessEvent]]:
    by_base: Dict[Base, List[AccessEvent]] = {}
    for e in events:
        if e.atomic:
            continue
        by_base.setdefault(e.base, []).append(e)
    out = {}
    for b in sorted(by_base, key=Base.sort_key):
        evs = by_base[b]
        st = final_base_state(evs, unique)
        keep = st.kind is Kind.SHARED_MOD or (st.kind is Kind.EXCLUSIVE and not unique.get(st.owner, True))
        if keep and (escape is None or escape.escapes(b)):
            out[b] = evs
    return out


@dataclass
class RaceReport:
    base: Base
    first: AccessEvent
    second: AccessEvent
    classification: str  # must | may
    witness: Dict[str, object] = field(default_factory=dict)

    def sort_key(self):
        return (self.base.sort_key(), self.first.sort_key(), self.second.sort_key())


class RaceChecker:
    """Pairwise race conditions over one analysed program."""

    def __init__(self, ta: ThreadAnalysis, locksets: Dict[str, LocksetAnalysis], active: ActiveThreadsAnalysis):
        self.ta = ta
        self.locksets = locksets
        self.active = active
        self.unique = ta.unique
        self._fn_threads: Dict[str, Set[str]] = {}
        for t, r in ta.results.items():
            for c in ta.backend.contexts(r):
                fn = c.calls[-1][1] if c.calls else c.thread
                self._fn_threads.setdefault(fn, set()).add(t)
        self._uncond: Dict[str, Set[int]] = {}
        self._site_threads: Dict[int, Set[str]] = {}
        for t, r in ta.results.items():
            for c in ta.backend.contexts(r):
                self._site_threads.setdefault(c.stmt, set()).add(t)

    def may_ls(self, c: Context) -> FrozenSet[Lock]:
        a = self.locksets.get(c.thread)
        return a.may_ls(c) if a else frozenset()

    def must_ls(self, c: Context) -> FrozenSet[Lock]:
        a = self.locksets.get(c.thread)
        return a.must_ls(c) if a else frozenset()

    def distinct(self, e1: AccessEvent, e2: AccessEvent) -> bool:
        return e1.thread != e2.thread or not self.unique.get(e1.thread, True)

    def may_race(self, e1: AccessEvent, e2: AccessEvent) -> bool:
        if e1.base != e2.base or (e1.atomic and e2.atomic):
            return False
        if "write" not in (e1.kind, e2.kind):
            return False
        if not self.distinct(e1, e2):
            return False
        if not offsets_may_overlap(_addr(e1), _addr(e2), (e1.size, e2.size)):
            return False
        if guarded_intersection(self.must_ls(e1.context), self.must_ls(e2.context)):
            return False
        return self.active.may_parallel(e1.context, e2.context)

    def _replicated(self, b: Base) -> bool:
        """Is the base created by code a non-unique thread runs?"""
        if b.kind == "dynamic":
            threads = self._site_threads.get(b.site, set())
        elif b.kind in ("local", "formal"):
            threads = self._fn_threads.get(b.fn, set())
        else:
            return False
        return any(not self.unique.get(t, True) for t in threads) or len(threads) > 1

    def _surely_executed(self, c: Context) -> bool:
        """Every call site of ``c`` and its statement run on all paths."""
        p = self.ta.program
        for sid in [site for site, _ in c.calls] + [c.stmt]:
            fn = p.stmts[sid].fn
            if fn not in self._uncond:
                self._uncond[fn] = unconditional_nodes(p.functions[fn])
            if sid not in self._uncond[fn]:
                return False
        return True

    def must_race(self, e1: AccessEvent, e2: AccessEvent) -> bool:
        if e1.base != e2.base or e1.atomic or e2.atomic:
            return False
        if "write" not in (e1.kind, e2.kind) or not self.distinct(e1, e2):
            return False
        if not offsets_must_overlap(_addr(e1), _addr(e2), (e1.size, e2.size)):
            return False
        if guarded_intersection(self.may_ls(e1.context), self.may_ls(e2.context)):
            return False
        if not self.active.must_parallel(e1.context, e2.context):
            return False
        b = e1.base
        if b.weak or self._replicated(b):
            return False
        for e in (e1, e2):
            if not _fits(e, b) or not e.single_base:
                return False
            if not self.ta.backend.decides_branches and not self._surely_executed(e.context):
                return False
        return self.may_race(e1, e2)

    def witness(self, e1: AccessEvent, e2: AccessEvent) -> Dict[str, object]:
        return {
            "lockset_may": [sorted(map(str, self.may_ls(e.context))) for e in (e1, e2)],
            "lockset_must": [sorted(map(str, self.must_ls(e.context))) for e in (e1, e2)],
            "active": [sorted(self.active.union(e.context)) for e in (e1, e2)],
            "offsets": [str(e1.offset), str(e2.offset)],
        }


def _addr(e: AccessEvent):
    from .absdomain import Address

    return Address(e.base, e.offset)


def _fits(e: AccessEvent, b: Base) -> bool:
    """The access stays within one element of the base's type."""
    elem = b.elem_size
    if e.size is None or elem is None or not e.offset.is_singleton:
        return False
    return e.size <= elem


def check_may_race(checker: RaceChecker, e1: AccessEvent, e2: AccessEvent) -> bool:
    return checker.may_race(e1, e2)


def check_must_race(checker: RaceChecker, e1: AccessEvent, e2: AccessEvent) -> bool:
    return checker.must_race(e1, e2)


@dataclass
class Detection:
    reports: List[RaceReport]
    events: List[AccessEvent]
    clusters: Dict[Base, List[AccessEvent]]
    notes: List[str]
    unresolved: List[AccessEvent] = field(default_factory=list)
    # unresolved accesses that another thread may run alongside
    unresolved_shared: List[AccessEvent] = field(default_factory=list)

    @property
    def must(self) -> List[RaceReport]:
        return [r for r in self.reports if r.classification == "must"]

    @property
    def may(self) -> List[RaceReport]:
        return list(self.reports)


def detect_races(ta: ThreadAnalysis, locksets: Dict[str, LocksetAnalysis], active: ActiveThreadsAnalysis) -> Detection:
    """All may-races, each classified ``must`` when the stricter conditions
    also hold.  Over-approximated states cannot back a must claim, so every
    over-mode report is a may-race.  One report per base and unordered
    statement pair."""
    unresolved: List[AccessEvent] = []
    events, notes = collect_accesses(ta, unresolved)
    clusters = candidate_clusters(events, ta.unique, EscapeAnalysis(ta))
    checker = RaceChecker(ta, locksets, active)
    best: Dict[Tuple, RaceReport] = {}
    for b, evs in clusters.items():
        for i, e1 in enumerate(evs):
            for e2 in evs[i:]:
                if not checker.may_race(e1, e2):
                    continue
                cls = "must" if ta.mode == "under" and checker.must_race(e1, e2) else "may"
                key = (b, frozenset({e1.stmt, e2.stmt}))
                old = best.get(key)
                if old is None or (old.classification == "may" and cls == "must"):
                    best[key] = RaceReport(b, e1, e2, cls, checker.witness(e1, e2))
    reports = sorted(best.values(), key=RaceReport.sort_key)
    shared = [e for e in unresolved if active.trivial or e.thread in active.imprecise
              or active.union(e.context) or not ta.unique.get(e.thread, True)]
    return Detection(reports, events, clusters, notes, unresolved, shared)
