"""Abstract-interpreter backend: flow- and context-sensitive value analysis of
one thread as a sequential program."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from ..absdomain import (
    BOTTOM,
    TOP,
    ZERO,
    AbstractState,
    Address,
    IntIv,
    Pointers,
    TransferContext,
    Value,
    assign,
    convert,
    decl_base,
    eval_expr,
    eval_lvalue,
    filter_cond,
    iv_join,
    join,
    join_state,
    ret_base,
    targets_of,
    transfer_stmt,
    type_top,
    widen_state,
    write,
)
from ..frontend.ctypes import FunctionType, PointerType, VoidType
from ..frontend.ir import Call, Expr, GuardedCall, If, Return, Stmt, Var
from .base import (
    EMPTY_ACCESSES,
    AccessPair,
    Backend,
    BackendResult,
    CallString,
    Context,
    collect_accesses,
    function_pointer_targets,
    push_call,
)

TRYLOCK_FAILURE = 16  # EBUSY


@dataclass
class InterpPayload:
    states: Dict[Context, AbstractState]
    exit: AbstractState


def trylock_result(success: int) -> IntIv:
    return iv_join(IntIv(success, success), IntIv(TRYLOCK_FAILURE, TRYLOCK_FAILURE))


class InterpBackend(Backend):
    name = "interp"
    decides_branches = True

    def __init__(self, program, context_depth: int = 1):
        super().__init__(program, context_depth)
        self._rpo: Dict[str, Tuple[Dict[int, int], Set[int]]] = {}
        self._tctx = TransferContext(self.weak_sites)

    # -- analysis ----------------------------------------------------------
    def analyse_thread(self, entry: str, init: AbstractState) -> BackendResult:
        self.calls += 1
        run = _Run(self, entry)
        exit_state = run.function(entry, init, (), (entry,))
        states = {c: s for c, s in run.states.items()}
        contexts = tuple(sorted(c for c, s in states.items() if s.reachable))
        return BackendResult(entry, init, InterpPayload(states, exit_state), contexts, run.notes)

    def order(self, fn: str):
        if fn not in self._rpo:
            f = self.program.functions[fn]
            post: List[int] = []
            seen = set()
            stack = [(f.entry, iter(f.succ[f.entry]))]
            seen.add(f.entry)
            while stack:
                n, it = stack[-1]
                for m in it:
                    if m not in seen:
                        seen.add(m)
                        stack.append((m, iter(f.succ[m])))
                        break
                else:
                    stack.pop()
                    post.append(n)
            rpo = {n: i for i, n in enumerate(reversed(post))}
            heads = {m for n in rpo for m in f.succ[n] if rpo[m] <= rpo[n]}
            self._rpo[fn] = (rpo, heads)
        return self._rpo[fn]

    def resolve_callees(self, s: AbstractState, call: Call) -> FrozenSet[str]:
        cal = call.callee
        if isinstance(cal, Var) and cal.scope == "func":
            return frozenset({cal.name}) if cal.name in self.program.functions else frozenset()
        return self._functions_of(eval_expr(s, cal), cal.ty)

    def _functions_of(self, v: Value, ty, thread_entry: bool = False) -> FrozenSet[str]:
        if isinstance(v, Pointers):
            return frozenset(a.base.name for a in v.addrs if a.base.kind == "func" and a.base.name in self.program.functions)
        if v is BOTTOM:
            return frozenset()
        ft = ty.target if isinstance(ty, PointerType) else None
        return function_pointer_targets(self.program, ft if isinstance(ft, FunctionType) else None, thread_entry)

    # -- queries -----------------------------------------------------------
    def state(self, r: BackendResult, c: Context) -> AbstractState:
        return r.payload.states.get(c, AbstractState.unreachable())

    def reachable(self, r: BackendResult, c: Context) -> bool:
        return self.state(r, c).reachable

    def value(self, r, c, e: Expr) -> Value:
        return eval_expr(self.state(r, c), e)

    def value_ptr(self, r, c, e: Expr) -> FrozenSet[Address]:
        s = self.state(r, c)
        if not s.reachable:
            return frozenset()
        return targets_of(eval_expr(s, e))

    def functions(self, r, c, e: Expr) -> FrozenSet[str]:
        if isinstance(e, Var) and e.scope == "func":
            return frozenset({e.name}) if e.name in self.program.functions else frozenset()
        s = self.state(r, c)
        if not s.reachable:
            return frozenset()
        return self._functions_of(eval_expr(s, e), e.ty, thread_entry=True)

    def callees(self, r, c, call: Call) -> FrozenSet[str]:
        s = self.state(r, c)
        return self.resolve_callees(s, call) if s.reachable else frozenset()

    def accesses(self, r, c, s: Stmt) -> AccessPair:
        key = (id(r), c)
        hit = self._access_cache.get(key)
        if hit is not None:
            return hit
        st = self.state(r, c)
        if not st.reachable:
            out = EMPTY_ACCESSES
        else:
            out = collect_accesses(s, lambda lv: (eval_lvalue(st, lv), False))
        self._access_cache[key] = out
        return out


class _Run:
    """One thread analysis: inline-style interprocedural fixpoint."""

    def __init__(self, backend: InterpBackend, thread: str):
        self.b = backend
        self.p = backend.program
        self.thread = thread
        self.states: Dict[Context, AbstractState] = {}
        self.memo: Dict[Tuple[str, CallString, AbstractState], AbstractState] = {}
        self.notes: List[str] = []

    def record(self, c: Context, s: AbstractState):
        old = self.states.get(c)
        self.states[c] = s if old is None else join_state(old, s)

    def function(self, fn: str, entry_state: AbstractState, cs: CallString, stack: Tuple[str, ...]) -> AbstractState:
        key = (fn, cs, entry_state)
        if key in self.memo:
            return self.memo[key]
        f = self.p.functions[fn]
        rpo, heads = self.b.order(fn)
        pre: Dict[int, AbstractState] = {f.entry: _uninitialised(f, entry_state)}
        visits: Dict[int, int] = {}
        heap = [(rpo[f.entry], f.entry)]
        queued = {f.entry}
        while heap:
            _, n = heapq.heappop(heap)
            queued.discard(n)
            for m, st in self.step(fn, n, pre[n], cs, stack):
                if not st.reachable:
                    continue
                old = pre.get(m)
                if old is None:
                    new = st
                else:
                    new = join_state(old, st)
                    if m in heads:
                        visits[m] = visits.get(m, 0) + 1
                        if visits[m] > 2:
                            new = widen_state(old, new)
                if old is None or new != old:
                    pre[m] = new
                    if m not in queued:
                        queued.add(m)
                        heapq.heappush(heap, (rpo[m], m))
        for n, st in pre.items():
            self.record(Context(self.thread, cs, n), st)
        out = pre.get(f.exit, AbstractState.unreachable())
        self.memo[key] = out
        return out

    def step(self, fn: str, n: int, s: AbstractState, cs: CallString, stack):
        stmt = self.p.stmts[n]
        succ = self.p.functions[fn].succ[n]
        if isinstance(stmt, If):
            return [(succ[0], filter_cond(s, stmt.cond, True)), (succ[1], filter_cond(s, stmt.cond, False))]
        if isinstance(stmt, Return):
            out = s
            if stmt.value is not None:
                ret_ty = self.p.functions[fn].ftype.ret
                out = s.set(ret_base(fn), convert(eval_expr(s, stmt.value), ret_ty))
            return [(m, out) for m in succ]
        if isinstance(stmt, Call):
            out = self.call(stmt, s, cs, stack)
            if isinstance(stmt, GuardedCall):
                out = join_state(out, s)
            return [(m, out) for m in succ]
        out = transfer_stmt(s, stmt, self.b._tctx)
        return [(m, out) for m in succ]

    # -- calls ---------------------------------------------------------------
    def call(self, stmt: Call, s: AbstractState, cs: CallString, stack) -> AbstractState:
        if stmt.role is not None:
            return self.role_call(stmt, s)
        targets = self.b.resolve_callees(s, stmt)
        if not targets:
            return self.extern_call(stmt, s)
        res = AbstractState.unreachable()
        for g in sorted(targets):
            gf = self.p.functions[g]
            if len(gf.formals) != len(stmt.args):
                continue
            if g in stack:
                self.notes.append(f"recursive call to {g} at line {stmt.line}: state havocked")
                out = havoc(s)
                v: Value = TOP
            else:
                entry = s
                for formal, arg in zip(gf.formals, stmt.args):
                    entry = entry.set(decl_base(formal), convert(eval_expr(s, arg), formal.ty))
                ex = self.function(g, entry, push_call(cs, stmt.sid, g, self.b.n), stack + (g,))
                v = ex.get(ret_base(g)) if not isinstance(gf.ftype.ret, VoidType) else TOP
                out = ex.drop(lambda b, g=g: b.kind in ("local", "formal", "ret") and b.fn == g)
            if stmt.lhs is not None and out.reachable:
                out = assign(out, stmt.lhs, v)
            res = join_state(res, out)
        return res

    def extern_call(self, stmt: Call, s: AbstractState) -> AbstractState:
        out = s
        for a in stmt.args:
            v = eval_expr(s, a)
            if isinstance(v, Pointers):
                for addr in v.addrs:
                    if addr.base.is_memory:
                        out = out.set(addr.base, join(out.get(addr.base), TOP))
        if stmt.lhs is not None:
            out = assign(out, stmt.lhs, type_top(stmt.lhs.ty) if stmt.lhs.ty.is_integer else TOP)
        return out

    def role_call(self, stmt: Call, s: AbstractState) -> AbstractState:
        role, bind = stmt.role, stmt.binding
        if role == "atomic":
            return self.extern_call(stmt, s)
        out = s
        if role == "create" and bind.tid is not None and bind.tid != bind.entry:
            targets = eval_lvalue(s, _deref(stmt.args[bind.tid]))
            out = write(out, targets, TOP)
        if stmt.lhs is not None:
            if role == "lock" and not bind.blocking:
                v: Value = trylock_result(bind.success)
            else:
                v = ZERO
            out = assign(out, stmt.lhs, v)
        return out


def _deref(e: Expr) -> Expr:
    from ..frontend.ir import AddrOf, Deref

    if isinstance(e, AddrOf):
        return e.operand
    ty = e.ty.target if isinstance(e.ty, PointerType) else e.ty
    return Deref(e, ty)


def _uninitialised(f, s: AbstractState) -> AbstractState:
    """Pointer locals hold no address before their first assignment."""
    for d in f.locals.values():
        b = decl_base(d)
        if isinstance(d.ty, PointerType) and b not in s.values:
            s = s.set(b, BOTTOM)
    return s


def havoc(s: AbstractState) -> AbstractState:
    if not s.reachable:
        return s
    return AbstractState({b: (join(v, TOP) if b.kind == "dynamic" else TOP) for b, v in s.values.items()})
