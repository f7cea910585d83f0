"""Thread-creation graph construction and the thread initial-state equations.

The graph and the initial states are built together: analyse the known
threads, discover the threads they may create, rebuild the equations for the
larger graph, solve them, and repeat until the graph no longer grows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

import networkx as nx

from .absdomain import (
    TOP,
    AbstractState,
    Base,
    Value,
    convert,
    decl_base,
    join,
    join_state,
    widen_state,
)
from .backends.base import Backend, BackendResult, Context, in_cycle_nodes, multi_invoked_functions
from .backends.syntactic import address_taken
from .frontend.ir import Call, IRProgram

log = logging.getLogger(__name__)

Edge = Tuple[str, int, str]  # parent, create sid, child


@dataclass
class ThreadGraph:
    vertices: Set[str] = field(default_factory=lambda: {"main"})
    edges: Set[Edge] = field(default_factory=set)

    def key(self):
        return (frozenset(self.vertices), frozenset(self.edges))

    def children(self, t: str) -> Set[str]:
        return {c for p, _, c in self.edges if p == t}

    def incoming(self, t: str) -> List[Edge]:
        return sorted(e for e in self.edges if e[2] == t)

    def creates_at(self, parent: str, sid: int) -> Set[str]:
        return {c for p, s, c in self.edges if p == parent and s == sid}

    def nx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from((p, c) for p, _, c in self.edges)
        return g

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.nx())

    def topological_order(self) -> List[str]:
        """Threads with parents before children; ties broken by name."""
        g = self.nx()
        if not nx.is_directed_acyclic_graph(g):
            return sorted(self.vertices, key=lambda t: (t != "main", t))
        return list(nx.lexicographical_topological_sort(g, key=lambda t: (t != "main", t)))

    def descendants(self, t: str) -> Set[str]:
        return nx.descendants(self.nx(), t)

    def to_dot(self, program: Optional[IRProgram] = None, unique: Optional[Dict[str, bool]] = None) -> str:
        lines = ["digraph threads {"]
        for v in sorted(self.vertices):
            style = "" if unique is None or unique.get(v, True) else " [style=dashed]"
            lines.append(f'  "{v}"{style};')
        for p, s, c in sorted(self.edges):
            label = f"line {program.stmts[s].line}" if program is not None and s in program.stmts else f"s{s}"
            lines.append(f'  "{p}" -> "{c}" [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


InitMap = Dict[str, AbstractState]
ResultMap = Dict[str, BackendResult]


@dataclass
class EquationSystem:
    """Right-hand sides of the initial-state equations for one graph."""

    graph: ThreadGraph
    mode: str
    globals: AbstractState

    def rhs(self, t: str, p: IRProgram, backend: Backend, results: ResultMap) -> AbstractState:
        out = self._creation_states(t, p, backend, results)
        if self.mode == "under" or not out.reachable:
            return out
        # over: every shared cell may hold anything any thread ever stored
        taken = address_taken(p)
        states = [backend.state(r, c) for t2 in sorted(self.graph.vertices) if (r := results.get(t2)) is not None
                  for c in backend.contexts(r)]
        shared = {b for st in states + [out] for b in st.values if _shared(b, taken)}
        for b in sorted(shared, key=lambda b: b.sort_key()):
            v = out.get(b)
            for st in states:
                if st.reachable:
                    v = join(v, st.get(b))
            out = out.set(b, v)
        return out

    def _creation_states(self, t, p, backend, results) -> AbstractState:
        if t == "main":
            return self.globals
        out = AbstractState.unreachable()
        for parent, sid, _ in self.graph.incoming(t):
            r = results.get(parent)
            if r is None:
                continue
            for c in _contexts_at(backend, r, sid):
                st = backend.state(r, c)
                if st.reachable:
                    out = join_state(out, _bind_arg(p, backend, r, c, t, st))
        return out


def _shared(b: Base, taken) -> bool:
    if b.kind in ("global", "dynamic"):
        return not b.thread_local
    return b.kind in ("local", "formal") and (b.kind, b.fn, b.name) in taken


def construct_equations(g: ThreadGraph, mode: str, globals_state: Optional[AbstractState] = None) -> EquationSystem:
    if mode not in ("under", "over"):
        raise ValueError(f"unknown mode {mode!r}")
    if not g.vertices:
        raise ValueError("empty thread graph")
    return EquationSystem(g, mode, globals_state if globals_state is not None else AbstractState())


def _contexts_at(backend: Backend, r: BackendResult, sid: int) -> List[Context]:
    return [c for c in backend.contexts(r) if c.stmt == sid]


def _bind_arg(p: IRProgram, backend: Backend, r: BackendResult, c: Context, child: str, st: AbstractState) -> AbstractState:
    f = p.functions[child]
    if not f.formals:
        return st
    call: Call = p.stmts[c.stmt]
    bind = call.binding
    formal = f.formals[0]
    if bind.arg is not None and bind.arg < len(call.args):
        v: Value = convert(backend.value(r, c, call.args[bind.arg]), formal.ty)
    else:
        v = TOP
    return st.set(decl_base(formal), v)


class Solver:
    """Evaluates equation systems, caching thread analyses by initial state."""

    def __init__(self, p: IRProgram, backend: Backend):
        self.p = p
        self.backend = backend
        self.cache: Dict[Tuple[str, AbstractState], BackendResult] = {}
        self.sweeps = 0
        self.per_entry: Dict[str, int] = {}

    def analyse(self, t: str, init: AbstractState) -> BackendResult:
        key = (t, init)
        r = self.cache.get(key)
        if r is None:
            self.per_entry[t] = self.per_entry.get(t, 0) + 1
            r = self.backend.analyse_thread(t, init)
            self.cache[key] = r
        return r


def solve_equations(eqs: EquationSystem, prev: InitMap, solver: Solver, max_sweeps: int = 10_000) -> Tuple[InitMap, ResultMap]:
    """Chaotic iteration; initial-state entries are joined for two rounds and
    widened afterwards."""
    g = eqs.graph
    p = solver.p
    order = g.topological_order()
    init: InitMap = {t: prev.get(t, AbstractState.unreachable()) for t in order}
    init["main"] = join_state(init["main"], eqs.globals) if eqs.mode == "over" else eqs.globals
    results: ResultMap = {}
    if eqs.mode == "under" and g.is_acyclic():
        solver.sweeps += 1
        for t in order:
            if t != "main":
                init[t] = eqs.rhs(t, p, solver.backend, results)
            results[t] = solver.analyse(t, init[t])
        return init, results
    rounds: Dict[str, int] = {t: 0 for t in order}
    for _ in range(max_sweeps):
        solver.sweeps += 1
        results = {t: solver.analyse(t, init[t]) for t in order}
        changed = False
        new_init = dict(init)
        for t in order:
            if eqs.mode == "under" and t == "main":
                continue
            rhs = eqs.rhs(t, p, solver.backend, results)
            j = join_state(init[t], rhs)
            if j != init[t]:
                rounds[t] += 1
                nxt = widen_state(init[t], j) if rounds[t] > 2 else j
                new_init[t] = nxt
                changed = True
        init = new_init
        if not changed:
            return init, results
    raise RuntimeError("thread equation solver did not converge")


def discover_edges(p: IRProgram, backend: Backend, results: ResultMap) -> Set[Edge]:
    edges: Set[Edge] = set()
    for t, r in results.items():
        for c in backend.contexts(r):
            s = p.stmts[c.stmt]
            if not (isinstance(s, Call) and s.role == "create"):
                continue
            if not backend.reachable(r, c):
                continue
            targets = backend.functions(r, c, s.args[s.binding.entry])
            if not targets:
                log.warning("line %d: unresolved thread entry in create", s.line)
            for child in targets:
                edges.add((t, s.sid, child))
    return edges


def uniqueness(p: IRProgram, g: ThreadGraph) -> Dict[str, bool]:
    """A thread is unique when it is created exactly once: one create edge,
    the create outside any loop and outside functions that run several
    times, its parent unique, and no creation cycle through it."""
    multi = multi_invoked_functions(p)
    cyc_cache: Dict[str, Set[int]] = {}

    def in_loop(sid: int) -> bool:
        fn = p.stmts[sid].fn
        if fn not in cyc_cache:
            cyc_cache[fn] = in_cycle_nodes(p.functions[fn])
        return sid in cyc_cache[fn]

    gx = g.nx()
    on_cycle = set()
    for comp in nx.strongly_connected_components(gx):
        if len(comp) > 1 or any(gx.has_edge(x, x) for x in comp):
            on_cycle |= comp
    unique = {t: True for t in g.vertices}
    for t in g.vertices:
        inc = g.incoming(t)
        if t == "main":
            unique[t] = not inc
            continue
        if len(inc) != 1 or t in on_cycle:
            unique[t] = False
            continue
        (_, sid, _), = inc
        if in_loop(sid) or p.stmts[sid].fn in multi:
            unique[t] = False
    for t in g.topological_order():
        if any(not unique[par] for par, _, _ in g.incoming(t)):
            unique[t] = False
    # propagate through descendants (cyclic graphs need a fixpoint)
    changed = True
    while changed:
        changed = False
        for par, _, c in g.edges:
            if not unique[par] and unique[c]:
                unique[c] = False
                changed = True
    return unique


@dataclass
class ThreadAnalysis:
    program: IRProgram
    backend: Backend
    mode: str
    graph: ThreadGraph
    results: ResultMap
    init: InitMap
    unique: Dict[str, bool]
    iterations: int = 0
    sweeps: int = 0
    per_entry_calls: Dict[str, int] = field(default_factory=dict)
    per_iteration_calls: List[Dict[str, int]] = field(default_factory=list)

    def dot(self) -> str:
        return self.graph.to_dot(self.program, self.unique)


def build_thread_analysis(p: IRProgram, globals_state: AbstractState, mode: str, backend: Backend) -> ThreadAnalysis:
    if "main" not in p.functions:
        raise ValueError("program has no main")
    solver = Solver(p, backend)
    g = ThreadGraph({"main"}, set())
    init: InitMap = {"main": globals_state}
    results: ResultMap = {"main": solver.analyse("main", globals_state)}
    per_iter: List[Dict[str, int]] = []
    it = 0
    while True:
        it += 1
        edges = discover_edges(p, backend, results)
        g_new = ThreadGraph(g.vertices | {c for _, _, c in edges} | {pa for pa, _, _ in edges}, g.edges | edges)
        if it > 1 and g_new.key() == g.key():
            break
        g = g_new
        before = dict(solver.per_entry)
        eqs = construct_equations(g, mode, globals_state)
        init, results = solve_equations(eqs, init, solver)
        per_iter.append({t: solver.per_entry.get(t, 0) - before.get(t, 0) for t in solver.per_entry})
        if not edges and it == 1:
            break
    return ThreadAnalysis(
        p, backend, mode, g, results, init, uniqueness(p, g), it, solver.sweeps, dict(solver.per_entry), per_iter
    )
