"""Forward dataflow over one thread with forking on ambiguous transfers.

Facts are hashable values; a transfer function maps one fact to a set of
facts, and every element is propagated separately.  Functions are handled
with summaries keyed by (function, call string, entry fact); the analysis
records, for every context, the set of facts that reach it (the statement
summaries).
"""

from __future__ import annotations

from typing import Callable, Dict, FrozenSet, Hashable, List, Set, Tuple

from ..backends.base import Backend, BackendResult, CallString, Context, push_call
from ..frontend.ir import Call, IRProgram, Stmt

Fact = Hashable
Transfer = Callable[[Context, Fact, Stmt], FrozenSet[Fact]]


class FactOverflow(Exception):
    """Too many facts reached one statement."""


class ForkingAnalysis:
    def __init__(self, p: IRProgram, backend: Backend, result: BackendResult, transfer: Transfer, cap: int = 64):
        self.p = p
        self.backend = backend
        self.result = result
        self.thread = result.thread
        self.transfer = transfer
        self.cap = cap
        self.facts: Dict[Context, Set[Fact]] = {}
        self.summaries: Dict[Tuple[str, CallString, Fact], FrozenSet[Fact]] = {}

    def run(self, init: Fact) -> Dict[Context, Set[Fact]]:
        self.function(self.thread, (), init, (self.thread,))
        return self.facts

    def function(self, fn: str, cs: CallString, entry: Fact, stack: Tuple[str, ...]) -> FrozenSet[Fact]:
        key = (fn, cs, entry)
        if key in self.summaries:
            return self.summaries[key]
        f = self.p.functions[fn]
        seen: Set[Tuple[int, Fact]] = set()
        work: List[Tuple[int, Fact]] = [(f.entry, entry)]
        exits: Set[Fact] = set()
        per_node: Dict[int, int] = {}
        while work:
            n, fact = work.pop()
            if (n, fact) in seen:
                continue
            seen.add((n, fact))
            c = Context(self.thread, cs, n)
            if not self.backend.reachable(self.result, c):
                continue
            bucket = self.facts.setdefault(c, set())
            bucket.add(fact)
            per_node[n] = per_node.get(n, 0) + 1
            if len(bucket) > self.cap or per_node[n] > self.cap:
                raise FactOverflow(f"{self.thread}: more than {self.cap} facts at line {self.p.stmts[n].line}")
            if n == f.exit:
                exits.add(fact)
                continue
            stmt = self.p.stmts[n]
            outs = self.step(c, fact, stmt, cs, stack)
            for m in f.succ[n]:
                for o in outs:
                    if (m, o) not in seen:
                        work.append((m, o))
        out = frozenset(exits)
        self.summaries[key] = out
        return out

    def step(self, c: Context, fact: Fact, stmt: Stmt, cs: CallString, stack) -> FrozenSet[Fact]:
        if isinstance(stmt, Call) and stmt.role is None:
            targets = self.backend.callees(self.result, c, stmt)
            if not targets:
                return frozenset({fact})
            outs: Set[Fact] = set()
            for g in sorted(targets):
                if g in stack:
                    outs.add(fact)
                    continue
                outs |= self.function(g, push_call(cs, stmt.sid, g, self.backend.n), fact, stack + (g,))
            return frozenset(outs)
        return self.transfer(c, fact, stmt)
