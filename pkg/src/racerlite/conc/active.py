"""Active-threads analysis: which other threads may or must be running at
each context."""

from __future__ import annotations

import logging

import networkx as nx
from typing import Dict, FrozenSet, Iterable, Optional, Set

from ..backends.base import Backend, BackendResult, Context, strip_addr
from ..frontend.ir import Call, Expr, Index, Deref, IRProgram, Stmt, walk
from ..threads import ThreadGraph
from .engine import FactOverflow, ForkingAnalysis

log = logging.getLogger(__name__)

ActiveSet = FrozenSet[str]
FACT_CAP = 64


def _tid_expr(call: Call) -> Optional[Expr]:
    b = call.binding
    if b is None or b.tid is None or b.tid >= len(call.args):
        return None
    return strip_addr(call.args[b.tid])


def _ambiguous(e: Expr) -> bool:
    """Identifiers that may denote different cells on different executions."""
    for x in walk(e):
        if isinstance(x, Deref):
            return True
        if isinstance(x, Index) and not _const(x.index):
            return True
    return False


def _const(e: Expr) -> bool:
    from ..backends.base import const_int

    return const_int(e) is not None


def resolve_thread_id(p: IRProgram, g: ThreadGraph, join: Call) -> FrozenSet[str]:
    """Threads whose create stored its identifier through the same
    identifier expression as ``join`` uses; empty when that is ambiguous."""
    e = _tid_expr(join)
    if e is None or _ambiguous(e):
        return frozenset()
    out: Set[str] = set()
    for s in p.stmts.values():
        if isinstance(s, Call) and s.role == "create" and _tid_expr(s) == e:
            out |= {c for _, sid, c in g.edges if sid == s.sid}
    return frozenset(out)


class ActiveThreadsAnalysis:
    """Per-thread active sets, computed in creation order."""

    def __init__(self, p: IRProgram, backend: Backend, results: Dict[str, BackendResult], graph: ThreadGraph,
                 unique: Dict[str, bool], cap: int = FACT_CAP):
        self.p = p
        self.backend = backend
        self.graph = graph
        self.unique = unique
        self.facts: Dict[str, Dict[Context, Set[ActiveSet]]] = {}
        self.imprecise: Set[str] = set()
        self.trivial = not graph.is_acyclic()
        self.self_active: Set[str] = set()
        self.init: Dict[str, ActiveSet] = {}
        if self.trivial:
            log.info("cyclic thread creation: active-threads analysis skipped")
            return
        self._joins: Dict[int, FrozenSet[str]] = {}
        for t in graph.topological_order():
            if t not in results:
                continue
            init = self._initial(t)
            if init is None:
                continue
            self.init[t] = init
            r = results[t]
            eng = ForkingAnalysis(p, backend, r, lambda c, A, s, t=t: self.transfer(t, c, A, s), cap)
            try:
                self.facts[t] = eng.run(init)
            except FactOverflow as exc:
                log.info("%s; active-thread answers for it are trivial", exc)
                self.imprecise.add(t)
                self.facts[t] = {c: {init} for c in backend.contexts(r)}

    def transfer(self, t: str, c: Context, A: ActiveSet, s: Stmt) -> FrozenSet[ActiveSet]:
        if not isinstance(s, Call):
            return frozenset({A})
        if s.role == "create":
            kids = self.graph.creates_at(t, s.sid)
            if not kids:
                return frozenset({A})
            return frozenset(A | {k} for k in kids)
        if s.role == "join":
            ids = self._joins.get(s.sid)
            if ids is None:
                ids = self._joins[s.sid] = resolve_thread_id(self.p, self.graph, s)
            if not ids:
                return frozenset({A})
            out = set()
            for k in ids:
                out.add(A - {k})
                if not self.unique.get(k, True):
                    out.add(A)  # another instance may still run
            return frozenset(out)
        return frozenset({A})

    def _initial(self, t: str) -> Optional[ActiveSet]:
        if t == "main" and not self.graph.incoming(t):
            return frozenset()
        parents = self.graph.incoming(t)
        acc: Set[str] = set()
        found = False
        for parent, sid, _ in parents:
            pf = self.facts.get(parent)
            if pf is None:
                continue
            for c, sets in pf.items():
                if c.stmt == sid:
                    found = found or bool(sets)
                    if any(t in A for A in sets):
                        self.self_active.add(t)
                for A in sets:
                    if t in A:
                        acc |= A
                        found = True
            acc.add(parent)
        if not found:
            return None
        acc |= self._spawned_by(acc, t)
        if t not in self.self_active:
            acc.discard(t)
        else:
            acc.add(t)
        return frozenset(acc)

    def _spawned_by(self, members: Iterable[str], t: str) -> Set[str]:
        """Threads that members of an active set may have created since:
        descendants of every member that is neither ``t`` nor its ancestor."""
        ancestors = nx.ancestors(self.graph.nx(), t)
        out: Set[str] = set()
        for s in members:
            if s != t and s not in ancestors:
                out |= self.graph.descendants(s)
        return out

    # -- queries --------------------------------------------------------------
    def sets(self, c: Context) -> Set[ActiveSet]:
        return self.facts.get(c.thread, {}).get(c, set())

    def union(self, c: Context) -> ActiveSet:
        s = self.sets(c)
        return frozenset().union(*s) if s else frozenset()

    def intersection(self, c: Context) -> ActiveSet:
        s = self.sets(c)
        return frozenset.intersection(*s) if s else frozenset()

    def may_parallel(self, c1: Context, c2: Context) -> bool:
        if self.trivial or c1.thread in self.imprecise or c2.thread in self.imprecise:
            return True
        if not self.sets(c1) or not self.sets(c2):
            return False
        u1, u2 = self.union(c1), self.union(c2)
        u1 = u1 | self._spawned_by(u1, c1.thread)
        u2 = u2 | self._spawned_by(u2, c2.thread)
        return c2.thread in u1 and c1.thread in u2

    def must_parallel(self, c1: Context, c2: Context) -> bool:
        if self.trivial or c1.thread in self.imprecise or c2.thread in self.imprecise:
            return False
        if not self.sets(c1) or not self.sets(c2):
            return False
        return c2.thread in self.intersection(c1) and c1.thread in self.intersection(c2)


def run_active_threads_analysis(p, backend, results, graph, unique) -> ActiveThreadsAnalysis:
    return ActiveThreadsAnalysis(p, backend, results, graph, unique)
