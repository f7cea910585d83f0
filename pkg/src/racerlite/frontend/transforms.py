"""Source-level preprocessing: loop peeling and the extensivity transform."""

from __future__ import annotations

from dataclasses import replace
from typing import Dict, List, Set

from .ir import (
    AddrOf,
    Alloc,
    Assign,
    Call,
    Function,
    GuardedCall,
    If,
    IRProgram,
    NondetAssign,
    Skip,
    Var,
)

_CONCURRENCY_ROLES = ("create", "join", "lock", "unlock")


def loop_heads(fn: Function, stmts) -> List[int]:
    return [n for n in fn.nodes if isinstance(stmts[n], Skip) and stmts[n].kind == "loop"]


def loop_nodes(fn: Function, head: int) -> Set[int]:
    """Nodes of the natural loop headed by ``head``: reachable from the head
    and able to reach it again."""
    forward: Set[int] = set()
    stack = list(fn.succ[head])
    while stack:
        n = stack.pop()
        if n in forward or n == head:
            continue
        forward.add(n)
        stack.extend(fn.succ[n])
    preds = fn.preds()
    backward: Set[int] = set()
    stack = [p for p in preds[head] if p in forward]
    while stack:
        n = stack.pop()
        if n in backward or n == head:
            continue
        backward.add(n)
        stack.extend(preds[n])
    return (forward & backward) | {head}


def unfold_loops(p: IRProgram, k: int) -> IRProgram:
    """Peel every loop ``k`` times in front of the residual loop.

    Each peeled copy keeps the loop guard, so behaviour is unchanged.  Inner
    loops are peeled first; copies of the header become plain skips and all
    copied statements get fresh sids (``origin`` is preserved).
    """
    if k < 0:
        raise ValueError("unfold count must be non-negative")
    if k == 0:
        return p
    q = p.copy()
    for fn in q.functions.values():
        heads = loop_heads(fn, q.stmts)
        heads.sort(key=lambda h: len(loop_nodes(fn, h)))
        for head in heads:
            for _ in range(k):
                _peel(q, fn, head)
    q.transforms = p.transforms + (f"unfold({k})",)
    return q


def _peel(q: IRProgram, fn: Function, head: int) -> None:
    body = loop_nodes(fn, head)
    preds = fn.preds()
    outside = [n for n in preds[head] if n not in body]
    order = [n for n in fn.nodes if n in body]
    copy: Dict[int, int] = {}
    for n in order:
        sid = q.fresh_sid()
        old = q.stmts[n]
        new = replace(old, sid=sid)
        if n == head:
            new = Skip(kind="skip", sid=sid, fn=old.fn, line=old.line, file=old.file, origin=old.origin)
        q.stmts[sid] = new
        copy[n] = sid
    for n in order:
        # edges back to the header go to the residual loop
        fn.succ[copy[n]] = tuple(head if m == head else copy.get(m, m) for m in fn.succ[n])
    for n in outside:
        fn.succ[n] = tuple(copy[head] if m == head else m for m in fn.succ[n])
    # keep copies in front of the loop in the node order
    at = fn.nodes.index(head)
    fn.nodes[at:at] = [copy[n] for n in order]
    if fn.entry == head:
        fn.entry = copy[head]


def _by_reference(call: Call) -> bool:
    return any(isinstance(a, AddrOf) or a.ty.is_pointer for a in call.args)


def make_extensive(p: IRProgram) -> IRProgram:
    """Rewrite every instruction so its post-states include its pre-states.

    ``x = e`` becomes ``x = (*) ? x : e`` and calls that may modify memory
    become skippable.  Concurrency calls and branch guards are untouched.
    """
    if "extensive" in p.transforms:
        raise ValueError("program already transformed")
    q = p.copy()
    for sid, s in list(q.stmts.items()):
        if isinstance(s, Assign):
            q.stmts[sid] = NondetAssign(
                lhs=s.lhs, rhs=s.rhs, sid=s.sid, fn=s.fn, line=s.line, file=s.file, origin=s.origin
            )
        elif isinstance(s, Alloc):
            q.stmts[sid] = replace(s, keep_old=True)
        elif isinstance(s, Call) and not isinstance(s, GuardedCall):
            if s.role in _CONCURRENCY_ROLES:
                continue
            if s.lhs is not None or _by_reference(s):
                q.stmts[sid] = GuardedCall(
                    lhs=s.lhs, callee=s.callee, args=s.args, role=s.role, binding=s.binding,
                    hoisted=s.hoisted, sid=s.sid, fn=s.fn, line=s.line, file=s.file, origin=s.origin,
                )
    q.transforms = p.transforms + ("extensive",)
    return q



def detect_active_waiting(p: IRProgram) -> bool:
    """True when some loop has an empty body (only the guard and skips)."""
    for fn in p.functions.values():
        for head in loop_heads(fn, p.stmts):
            body = loop_nodes(fn, head) - {head}
            if all(
                isinstance(p.stmts[n], (If, Skip)) or (isinstance(p.stmts[n], Call) and p.stmts[n].hoisted)
                for n in body
            ):
                return True
    return False
