"""Syntactic backend: no value analysis, addresses read off the program text."""

from __future__ import annotations

from typing import Dict, FrozenSet, Optional, Set, Tuple

from ..absdomain import (
    TOP,
    TOP_INT,
    ZERO,
    AbstractState,
    Address,
    IntIv,
    UNKNOWN_BASE,
    Value,
    alloc_base,
    iv_add,
    var_base,
)
from ..frontend.ctypes import ArrayType
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
    Index,
    NondetAssign,
    Stmt,
    Var,
)
from .base import (
    AccessPair,
    Backend,
    BackendResult,
    Context,
    collect_accesses,
    const_int,
    enumerate_contexts,
    function_pointer_targets,
    static_index_range,
    syntactic_callees,
)

UNKNOWN_ADDR = Address(UNKNOWN_BASE, TOP_INT)
Targets = Tuple[FrozenSet[Address], bool]  # addresses, ambiguous


def address_taken(p) -> Set[Tuple]:
    """Keys (scope, fn, name) of variables whose address is taken."""
    from .base import stmt_exprs

    out = set()

    def visit(e):
        if isinstance(e, AddrOf):
            x = e.operand
            while isinstance(x, (Index, Cast)):
                x = x.base if isinstance(x, Index) else x.operand
            if isinstance(x, Var):
                out.add((x.scope, x.fn, x.name))
        if isinstance(e, Var) and isinstance(e.ty, ArrayType):
            out.add((e.scope, e.fn, e.name))
        for c in e.children():
            visit(c)

    for s in p.stmts.values():
        for e in stmt_exprs(s):
            visit(e)
    for g in p.globals:
        for e in _init_exprs(g.init):
            visit(e)
    return out


def _init_exprs(init):
    if init is None:
        return []
    if isinstance(init, list):
        out = []
        for x in init:
            out.extend(_init_exprs(x))
        return out
    return [init]


def _strip(e: Expr) -> Expr:
    while isinstance(e, Cast):
        e = e.operand
    return e


class SyntacticBackend(Backend):
    """Answers value queries with Top and extracts addresses syntactically.

    A pointer variable is resolved through a flow-insensitive one-level
    points-to relation when every assignment to it is ``&x``, an allocation
    or NULL and its own address is never taken; every other dereference goes
    to the distinguished unknown base.
    """

    name = "syntactic"

    def __init__(self, program, context_depth: int = 1):
        super().__init__(program, context_depth)
        self.taken = address_taken(program)
        self._pts = self._points_to()

    # -- one-level points-to ------------------------------------------------
    def _points_to(self) -> Dict[Tuple, Optional[FrozenSet[Address]]]:
        p = self.program
        pts: Dict[Tuple, Optional[Set[Address]]] = {}

        def add(v: Var, addrs: Optional[Set[Address]]):
            key = (v.scope, v.fn, v.name)
            if key in pts and pts[key] is None:
                return
            if addrs is None:
                pts[key] = None
            else:
                pts.setdefault(key, set()).update(addrs)

        def simple(e: Expr) -> Optional[Set[Address]]:
            e = _strip(e)
            if isinstance(e, Const) and e.value == 0:
                return set()
            if isinstance(e, Var) and isinstance(e.ty, ArrayType):
                return {Address(var_base(e))}
            if isinstance(e, Var) and e.scope == "func":
                return {Address(var_base(e))}
            if isinstance(e, AddrOf):
                x = _strip(e.operand)
                if isinstance(x, Var):
                    return {Address(var_base(x))}
                if isinstance(x, Index) and isinstance(_strip(x.base), Var) and isinstance(x.base.ty, ArrayType):
                    return {Address(var_base(_strip(x.base)), static_index_range(x))}
            return None

        for s in p.stmts.values():
            if isinstance(s, (Assign, NondetAssign)) and isinstance(_strip(s.lhs), Var):
                v = _strip(s.lhs)
                if v.ty.is_pointer:
                    add(v, simple(s.rhs))
            elif isinstance(s, Alloc) and isinstance(_strip(s.lhs), Var):
                add(_strip(s.lhs), {Address(alloc_base(s, s.sid in self.weak_sites))})
            elif isinstance(s, Call) and s.lhs is not None and isinstance(_strip(s.lhs), Var):
                add(_strip(s.lhs), None)
        for g in p.globals:
            if g.ty.is_pointer:
                v = Var(g.name, "global", None, g.ty)
                add(v, simple(g.init) if g.init is not None and not isinstance(g.init, list) else set())
        out = {}
        for key, addrs in pts.items():
            if key[0] == "formal" or key in self.taken:
                out[key] = None
            else:
                out[key] = frozenset(addrs) if addrs is not None else None
        return out

    def var_points_to(self, v: Var) -> Targets:
        if v.scope == "formal":
            return frozenset({UNKNOWN_ADDR}), True
        got = self._pts.get((v.scope, v.fn, v.name))
        if got is None:
            return frozenset({UNKNOWN_ADDR}), True
        return got, len(got) > 1

    def deref_targets(self, e: Expr) -> Targets:
        """Addresses held by the pointer value of ``*e``-style expressions
        this backend cannot see through."""
        return frozenset({UNKNOWN_ADDR}), True

    # -- address extraction ---------------------------------------------------
    def pointer_targets(self, e: Expr) -> Targets:
        """Addresses a pointer-valued expression may hold."""
        e = _strip(e)
        if isinstance(e, Const):
            return frozenset(), False
        if isinstance(e, AddrOf):
            return self.lvalue_targets(e.operand)
        if isinstance(e, Var):
            if e.scope == "func" or isinstance(e.ty, ArrayType):
                return frozenset({Address(var_base(e))}), False
            return self.var_points_to(e)
        if isinstance(e, Binary) and e.op in ("+", "-") and e.ty.is_pointer:
            ptr, other = (e.left, e.right) if e.left.ty.is_pointer or isinstance(e.left.ty, ArrayType) else (e.right, e.left)
            addrs, amb = self.pointer_targets(ptr)
            c = const_int(other)
            scale = (e.ty.target.size() if hasattr(e.ty, "target") else 1) or 1
            if c is None:
                delta = TOP_INT
            else:
                c = -c if e.op == "-" else c
                delta = IntIv(c * scale, c * scale)
            return frozenset(_shift(a, delta) for a in addrs), amb
        if isinstance(e, Cond):
            a1, m1 = self.pointer_targets(e.then)
            a2, m2 = self.pointer_targets(e.other)
            u = a1 | a2
            return u, m1 or m2 or len(u) > 1
        return self.deref_targets(e)

    def lvalue_targets(self, lv: Expr) -> Targets:
        lv = _strip(lv)
        if isinstance(lv, Var):
            return frozenset({Address(var_base(lv))}), False
        if isinstance(lv, Deref):
            return self.pointer_targets(lv.operand)
        if isinstance(lv, Index):
            if isinstance(lv.base.ty, ArrayType):
                addrs, amb = self.lvalue_targets(lv.base)
            else:
                addrs, amb = self.pointer_targets(lv.base)
            delta = static_index_range(lv)
            if not isinstance(lv.base.ty, ArrayType) and const_int(lv.index) is None:
                delta = TOP_INT
            return frozenset(_shift(a, delta) for a in addrs), amb
        return frozenset({UNKNOWN_ADDR}), True

    # -- interface -----------------------------------------------------------
    def analyse_thread(self, entry: str, init: AbstractState) -> BackendResult:
        self.calls += 1
        ctxs = enumerate_contexts(self.program, entry, self.n, lambda cs, call: syntactic_callees(self.program, call))
        return BackendResult(entry, init, None, ctxs)

    def state(self, r, c) -> AbstractState:
        return AbstractState.top()

    def value(self, r, c, e) -> Value:
        return TOP

    def value_ptr(self, r, c, e) -> FrozenSet[Address]:
        return self.pointer_targets(e)[0]

    def functions(self, r, c, e) -> FrozenSet[str]:
        e = _strip(e)
        while isinstance(e, AddrOf):
            e = _strip(e.operand)
        if isinstance(e, Var) and e.scope == "func":
            return frozenset({e.name}) if e.name in self.program.functions else frozenset()
        return function_pointer_targets(self.program, thread_entry=True)

    def accesses(self, r, c, s: Stmt) -> AccessPair:
        key = (s.sid, c)
        hit = self._access_cache.get(key)
        if hit is None:
            hit = collect_accesses(s, self.lvalue_targets)
            self._access_cache[key] = hit
        return hit


def _shift(a: Address, delta: IntIv) -> Address:
    if a.base is UNKNOWN_BASE or a.base.kind == "unknown":
        return a
    try:
        return Address(a.base, iv_add(a.offset, delta))
    except ArithmeticError:
        return Address(a.base, TOP_INT)
