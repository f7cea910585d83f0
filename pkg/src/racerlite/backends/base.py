"""Query interface shared by all backends, plus helpers they have in common."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from ..absdomain import (
    TOP,
    TOP_INT,
    ZERO,
    AbstractState,
    Address,
    Base,
    IntIv,
    NULL,
    Value,
    convert,
    decl_base,
    eval_expr,
    iv_add,
    iv_join,
    iv_mul,
    var_base,
)
from ..frontend.ctypes import ArrayType, FunctionType, PointerType, is_thread_entry_type
from ..frontend.ir import (
    AddrOf,
    Alloc,
    Assign,
    Binary,
    Call,
    Cast,
    Cond,
    Const,
    Deref,
    Expr,
    Free,
    If,
    Index,
    IRProgram,
    NondetAssign,
    Return,
    Stmt,
    Unary,
    Var,
)

CallString = Tuple[Tuple[int, str], ...]


@dataclass(frozen=True, order=True)
class Context:
    """A statement in a thread under a bounded call string."""

    thread: str
    calls: CallString
    stmt: int

    def __str__(self):
        cs = "".join(f"{sid}>{fn}/" for sid, fn in self.calls)
        return f"{self.thread}:{cs}{self.stmt}"


def push_call(calls: CallString, site: int, callee: str, n: int) -> CallString:
    if n <= 0:
        return ()
    return (calls + ((site, callee),))[-n:]


def context_fn(p: IRProgram, c: Context) -> str:
    return c.calls[-1][1] if c.calls else c.thread


@dataclass(frozen=True)
class Access:
    """One memory access: an address, its width in bytes, and whether the
    backend could not pin down a single target for the lvalue."""

    addr: Address
    size: Optional[int]
    ambiguous: bool = False

    @property
    def base(self) -> Base:
        return self.addr.base

    @property
    def offset(self) -> IntIv:
        return self.addr.offset


@dataclass(frozen=True)
class AccessPair:
    reads: FrozenSet[Access] = frozenset()
    writes: FrozenSet[Access] = frozenset()

    @property
    def read_bases(self) -> FrozenSet[Base]:
        return frozenset(a.base for a in self.reads)

    @property
    def write_bases(self) -> FrozenSet[Base]:
        return frozenset(a.base for a in self.writes)


EMPTY_ACCESSES = AccessPair()


@dataclass
class BackendResult:
    """Per-thread analysis result.  ``payload`` is backend specific."""

    thread: str
    init: AbstractState
    payload: object = None
    contexts: Tuple[Context, ...] = ()
    notes: List[str] = field(default_factory=list)


class Backend(ABC):
    """The sequential-analysis interface consumed by the thread analysis and
    the race detector."""

    name = "abstract"
    # whether reachability answers reflect branch conditions; without that a
    # statement under an ``if`` may be dead code the backend cannot rule out
    decides_branches = False

    def __init__(self, program: IRProgram, context_depth: int = 1):
        if context_depth < 0:
            raise ValueError("context depth must be non-negative")
        self.program = program
        self.n = context_depth
        self.calls = 0  # number of analyse_thread invocations
        self.weak_sites = weak_alloc_sites(program)
        self._access_cache: Dict[Tuple[int, Context], AccessPair] = {}

    @abstractmethod
    def analyse_thread(self, entry: str, init: AbstractState) -> BackendResult: ...

    @abstractmethod
    def state(self, r: BackendResult, c: Context) -> AbstractState: ...

    @abstractmethod
    def value(self, r: BackendResult, c: Context, e: Expr) -> Value: ...

    @abstractmethod
    def value_ptr(self, r: BackendResult, c: Context, e: Expr) -> FrozenSet[Address]: ...

    @abstractmethod
    def functions(self, r: BackendResult, c: Context, e: Expr) -> FrozenSet[str]: ...

    @abstractmethod
    def accesses(self, r: BackendResult, c: Context, s: Stmt) -> AccessPair: ...

    def callees(self, r: BackendResult, c: Context, call: Call) -> FrozenSet[str]:
        """Program functions an ordinary call may invoke."""
        return syntactic_callees(self.program, call)

    def contexts(self, r: BackendResult) -> Tuple[Context, ...]:
        """All contexts of the thread the backend considers reachable."""
        return r.contexts

    def reachable(self, r: BackendResult, c: Context) -> bool:
        return True


# --------------------------------------------------------------------------
# syntactic helpers


def function_pointer_targets(p: IRProgram, ftype: Optional[FunctionType] = None, thread_entry: bool = False) -> FrozenSet[str]:
    """Every program function whose address is taken or assigned somewhere,
    filtered by signature."""
    names: Set[str] = set()
    for s in p.stmts.values():
        for e in stmt_exprs(s):
            for x in _walk_no_callee(e):
                if isinstance(x, Var) and x.scope == "func" and x.name in p.functions:
                    names.add(x.name)
    for g in p.globals:
        if isinstance(g.init, Expr):
            for x in _walk_no_callee(g.init):
                if isinstance(x, Var) and x.scope == "func" and x.name in p.functions:
                    names.add(x.name)
    out = set()
    for n in names:
        ft = p.functions[n].ftype
        if thread_entry:
            if not is_thread_entry_type(ft, p.config.strict_thread_signature):
                continue
        elif ftype is not None and len(ft.params) != len(ftype.params):
            continue
        out.add(n)
    return frozenset(out)


def _walk_no_callee(e: Expr):
    yield e
    for c in e.children():
        yield from _walk_no_callee(c)


def stmt_exprs(s: Stmt) -> List[Expr]:
    """Expressions of a statement other than a direct callee name."""
    if isinstance(s, (Assign, NondetAssign)):
        return [s.lhs, s.rhs]
    if isinstance(s, Call):
        out = [] if isinstance(s.callee, Var) else [s.callee]
        if s.lhs is not None:
            out.append(s.lhs)
        return out + list(s.args)
    if isinstance(s, If):
        return [s.cond]
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    if isinstance(s, Alloc):
        return [s.lhs, s.size]
    if isinstance(s, Free):
        return [s.ptr]
    return []


def strip_addr(e: Expr) -> Expr:
    while isinstance(e, (Cast, AddrOf)):
        e = e.operand
    return e


def syntactic_callees(p: IRProgram, call: Call) -> FrozenSet[str]:
    """Program functions a call may invoke, without any value analysis."""
    if call.role is not None:
        return frozenset()
    callee = strip_addr(call.callee)
    if isinstance(callee, Var) and callee.scope == "func":
        return frozenset({callee.name}) if callee.name in p.functions else frozenset()
    ft = call.callee.ty.target if isinstance(call.callee.ty, PointerType) else None
    return function_pointer_targets(p, ft if isinstance(ft, FunctionType) else None)


def syntactic_create_targets(p: IRProgram, call: Call) -> FrozenSet[str]:
    e = strip_addr(call.args[call.binding.entry])
    if isinstance(e, Var) and e.scope == "func":
        return frozenset({e.name}) if e.name in p.functions else frozenset()
    return function_pointer_targets(p, thread_entry=True)


def enumerate_contexts(
    p: IRProgram, thread: str, n: int, callees: Callable[[CallString, Call], Iterable[str]]
) -> Tuple[Context, ...]:
    """Contexts reachable in the call graph from ``thread``, ignoring guards."""
    seen: Set[Tuple[CallString, str]] = set()
    out: List[Context] = []
    stack: List[Tuple[CallString, str]] = [((), thread)]
    while stack:
        cs, fn = stack.pop()
        if (cs, fn) in seen:
            continue
        seen.add((cs, fn))
        f = p.functions[fn]
        for sid in f.nodes:
            out.append(Context(thread, cs, sid))
            s = p.stmts[sid]
            if isinstance(s, Call) and s.role is None:
                for g in sorted(callees(cs, s)):
                    stack.append((push_call(cs, sid, g, n), g))
    return tuple(sorted(set(out)))


def call_graph(p: IRProgram) -> Dict[str, Set[Tuple[int, str]]]:
    """fn -> {(call sid, callee)} using syntactic resolution."""
    g: Dict[str, Set[Tuple[int, str]]] = {f: set() for f in p.functions}
    for s in p.stmts.values():
        if isinstance(s, Call) and s.fn in g:
            for c in syntactic_callees(p, s):
                g[s.fn].add((s.sid, c))
    return g


def in_cycle_nodes(fn) -> Set[int]:
    """Nodes of ``fn`` that lie on some CFG cycle."""
    import networkx as nx

    g = nx.DiGraph()
    g.add_nodes_from(fn.nodes)
    for n in fn.nodes:
        for m in fn.succ[n]:
            g.add_edge(n, m)
    out: Set[int] = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1:
            out |= comp
        else:
            (x,) = comp
            if x in fn.succ.get(x, ()):
                out.add(x)
    return out


def unconditional_nodes(fn) -> Set[int]:
    """Nodes of ``fn`` on every path from entry to exit (the post-dominators
    of the entry).  Empty when the exit cannot be reached."""
    import networkx as nx

    g = nx.DiGraph()
    g.add_nodes_from(fn.nodes)
    for n in fn.nodes:
        for m in fn.succ[n]:
            g.add_edge(m, n)
    idom = nx.immediate_dominators(g, fn.exit)
    if fn.entry not in idom:
        return set()
    out, n = {fn.entry}, fn.entry
    while n != fn.exit:
        n = idom[n]
        out.add(n)
    return out


def multi_invoked_functions(p: IRProgram) -> Set[str]:
    """Functions whose body may run more than once within one thread: called
    from a loop, from several call sites, recursively, or from such a
    function.  Thread entries used by several creates are handled by the
    uniqueness analysis instead."""
    import networkx as nx

    cg = call_graph(p)
    sites: Dict[str, int] = {f: 0 for f in p.functions}
    multi: Set[str] = set()
    cyc = {f: in_cycle_nodes(p.functions[f]) for f in p.functions}
    g = nx.DiGraph()
    g.add_nodes_from(p.functions)
    for f, edges in cg.items():
        for sid, c in edges:
            sites[c] += 1
            g.add_edge(f, c)
            if sid in cyc[f]:
                multi.add(c)
    for f, k in sites.items():
        if k > 1:
            multi.add(f)
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(g.has_edge(x, x) for x in comp):
            multi |= comp
    changed = True
    while changed:
        changed = False
        for f in list(multi):
            for c in g.successors(f):
                if c not in multi:
                    multi.add(c)
                    changed = True
    return multi


def weak_alloc_sites(p: IRProgram) -> FrozenSet[int]:
    """Allocation sites that may execute more than once per thread run."""
    multi = multi_invoked_functions(p)
    out = set()
    for name, fn in p.functions.items():
        cyc = in_cycle_nodes(fn)
        for sid in fn.nodes:
            if isinstance(p.stmts[sid], Alloc) and (sid in cyc or name in multi):
                out.add(sid)
    return frozenset(out)


def initial_globals(p: IRProgram) -> AbstractState:
    """Values of globals before ``main`` starts (zero unless initialised)."""
    vals = {}
    empty = AbstractState()
    for g in p.globals:
        b = decl_base(g)
        elem = g.ty.elem if isinstance(g.ty, ArrayType) else g.ty
        while isinstance(elem, ArrayType):
            elem = elem.elem
        zero = NULL if elem.is_pointer else ZERO
        if g.init is None:
            v = zero
        elif isinstance(g.init, list):
            flat = _flatten(g.init)
            v = None
            for e in flat:
                x = convert(eval_expr(empty, e), elem)
                v = x if v is None else _join(v, x)
            if v is None or (isinstance(g.ty, ArrayType) and len(flat) < _array_len(g.ty)):
                v = zero if v is None else _join(v, zero)
        else:
            v = convert(eval_expr(empty, g.init), elem)
            if isinstance(g.ty, ArrayType):
                v = _join(v, zero)
        vals[b] = v
    return AbstractState(vals)


def _flatten(xs):
    out = []
    for x in xs:
        out.extend(_flatten(x) if isinstance(x, list) else [x])
    return out


def _array_len(t) -> int:
    n = 1
    while isinstance(t, ArrayType):
        n *= t.length or 0
        t = t.elem
    return n


def _join(a, b):
    from ..absdomain import join

    return join(a, b)


# --------------------------------------------------------------------------
# access extraction


Resolver = Callable[[Expr], Tuple[FrozenSet[Address], bool]]


class AccessCollector:
    """Walks a statement and classifies memory accesses by position.

    ``resolve(lv)`` maps a dereferencing lvalue (``*e`` or ``e[i]``) to the
    addresses it may denote and an ambiguity flag; plain variables are always
    exact.
    """

    def __init__(self, resolve: Resolver):
        self.resolve = resolve
        self.reads: Set[Access] = set()
        self.writes: Set[Access] = set()

    def lvalue(self, lv: Expr, into: Set[Access]):
        if isinstance(lv, Cast):
            self.lvalue(lv.operand, into)
            return
        if isinstance(lv.ty, (ArrayType, FunctionType)):
            self.lvalue_operands(lv)
            return
        size = lv.ty.size()
        if isinstance(lv, Var):
            if lv.scope != "func":
                into.add(Access(Address(var_base(lv)), size))
        else:
            addrs, amb = self.resolve(lv)
            for a in addrs:
                into.add(Access(a, size, amb or len(addrs) > 1))
        self.lvalue_operands(lv)

    def lvalue_operands(self, lv: Expr):
        if isinstance(lv, Deref):
            self.rvalue(lv.operand)
        elif isinstance(lv, Index):
            if isinstance(lv.base.ty, ArrayType):
                self.lvalue_operands(lv.base)
            else:
                self.rvalue(lv.base)
            self.rvalue(lv.index)
        elif isinstance(lv, Cast):
            self.lvalue_operands(lv.operand)

    def rvalue(self, e: Expr):
        if isinstance(e, (Var, Deref, Index)):
            self.lvalue(e, self.reads)
        elif isinstance(e, AddrOf):
            self.lvalue_operands(e.operand)
        else:
            for c in e.children():
                self.rvalue(c)

    def stmt(self, s: Stmt) -> AccessPair:
        if isinstance(s, (Assign, NondetAssign)):
            self.lvalue(s.lhs, self.writes)
            self.rvalue(s.rhs)
        elif isinstance(s, Alloc):
            self.lvalue(s.lhs, self.writes)
            self.rvalue(s.size)
        elif isinstance(s, Call):
            if s.lhs is not None:
                self.lvalue(s.lhs, self.writes)
            if s.role is None:
                if not (isinstance(s.callee, Var) and s.callee.scope == "func"):
                    self.rvalue(s.callee)
                for a in s.args:
                    self.rvalue(a)
        elif isinstance(s, If):
            self.rvalue(s.cond)
        elif isinstance(s, Return):
            if s.value is not None:
                self.rvalue(s.value)
        elif isinstance(s, Free):
            self.rvalue(s.ptr)
        return AccessPair(frozenset(self.reads), frozenset(self.writes))


def collect_accesses(s: Stmt, resolve: Resolver) -> AccessPair:
    return AccessCollector(resolve).stmt(s)


def index_offset(lv: Index, base_offset: IntIv, idx: Value) -> IntIv:
    scale = lv.ty.size() or 1
    i = idx if isinstance(idx, IntIv) else TOP_INT
    return iv_add(base_offset, iv_mul(i, IntIv(scale, scale)))


def const_int(e: Expr) -> Optional[int]:
    while isinstance(e, Cast):
        e = e.operand
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Unary) and e.op == "-":
        v = const_int(e.operand)
        return -v if v is not None else None
    return None


def static_index_range(lv: Index) -> IntIv:
    """Offset range of ``a[i]`` relative to ``a`` without value analysis."""
    elem = lv.ty.size() or 1
    c = const_int(lv.index)
    if c is not None:
        return IntIv(c * elem, c * elem)
    bt = lv.base.ty
    if isinstance(bt, ArrayType) and bt.length:
        return IntIv(0, (bt.length - 1) * elem, elem)
    return TOP_INT
