"""Alias backend: the syntactic backend refined by Steensgaard's
unification-based points-to analysis."""

from __future__ import annotations

from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from ..absdomain import (
    TOP_INT,
    ZERO,
    AbstractState,
    Address,
    Base,
    Pointers,
    UNKNOWN_BASE,
    alloc_base,
    decl_base,
    ret_base,
    var_base,
)
from ..frontend.ctypes import ArrayType, is_thread_entry_type
from ..frontend.ir import (
    AddrOf,
    Alloc,
    Assign,
    Binary,
    Call,
    Cast,
    Cond,
    Deref,
    Expr,
    Index,
    NondetAssign,
    Return,
    Unary,
    Var,
)
from .base import BackendResult, stmt_exprs, syntactic_callees, syntactic_create_targets
from .syntactic import UNKNOWN_ADDR, SyntacticBackend, Targets, _init_exprs, _strip


class UnionFind:
    """Steensgaard equivalence classes of abstract locations.  Each class
    has at most one pointee class, created lazily."""

    def __init__(self):
        self.parent: List[int] = []
        self.rank: List[int] = []
        self.pointee: Dict[int, int] = {}
        self.members: Dict[int, Set[Base]] = {}
        self.inexact: Set[int] = set()
        self.node_of: Dict[Base, int] = {}

    def fresh(self) -> int:
        n = len(self.parent)
        self.parent.append(n)
        self.rank.append(0)
        self.members[n] = set()
        return n

    def node(self, b: Base) -> int:
        n = self.node_of.get(b)
        if n is None:
            n = self.fresh()
            self.node_of[b] = n
            self.members[n].add(b)
        return n

    def find(self, n: int) -> int:
        root = n
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[n] != root:
            self.parent[n], n = root, self.parent[n]
        return root

    def pts(self, n: int) -> int:
        r = self.find(n)
        if r not in self.pointee:
            self.pointee[r] = self.fresh()
        return self.find(self.pointee[r])

    def union(self, a: int, b: int) -> int:
        work = [(a, b)]
        while work:
            x, y = work.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            if self.rank[rx] < self.rank[ry]:
                rx, ry = ry, rx
            self.parent[ry] = rx
            if self.rank[rx] == self.rank[ry]:
                self.rank[rx] += 1
            self.members[rx] |= self.members.pop(ry)
            if ry in self.inexact:
                self.inexact.add(rx)
            px, py = self.pointee.pop(rx, None), self.pointee.pop(ry, None)
            if px is not None and py is not None:
                self.pointee[rx] = px
                work.append((px, py))
            elif px is not None or py is not None:
                self.pointee[rx] = px if px is not None else py
        return self.find(a)

    def class_members(self, n: int) -> FrozenSet[Base]:
        return frozenset(self.members.get(self.find(n), ()))

    def same_class(self, a: Base, b: Base) -> bool:
        return a in self.node_of and b in self.node_of and self.find(self.node_of[a]) == self.find(self.node_of[b])

    def mark_inexact(self, n: int):
        self.inexact.add(self.find(n))

    def is_inexact(self, n: int) -> bool:
        return self.find(n) in self.inexact


def steensgaard_saturate(uf: UnionFind, bindings: Iterable[Tuple[Base, Address]]) -> UnionFind:
    """Unify each thread formal with the address passed for it."""
    for formal, actual in bindings:
        uf.union(uf.pts(uf.node(formal)), uf.node(actual.base))
    return uf


class _Builder:
    """Generates Steensgaard constraints from the whole program."""

    def __init__(self, p, weak_sites):
        self.p = p
        self.uf = UnionFind()
        self.weak_sites = weak_sites

    def val(self, e: Expr) -> Optional[int]:
        """Class of the locations e's value may point to."""
        uf = self.uf
        if isinstance(e, Cast):
            return self.val(e.operand)
        if isinstance(e, Var):
            if e.scope == "func" or isinstance(e.ty, ArrayType):
                return uf.node(var_base(e))
            return uf.pts(uf.node(var_base(e)))
        if isinstance(e, AddrOf):
            return self.loc(e.operand)
        if isinstance(e, (Deref, Index)):
            n = self.loc(e)
            return n if isinstance(e.ty, ArrayType) else uf.pts(n)
        if isinstance(e, Binary):
            parts = [self.val(x) for x in (e.left, e.right) if x.ty.is_pointer or isinstance(x.ty, ArrayType)]
            parts = [x for x in parts if x is not None]
            if not parts:
                return None
            n = parts[0]
            for x in parts[1:]:
                n = uf.union(n, x)
            if e.op in ("+", "-") and e.ty.is_pointer:
                uf.mark_inexact(n)
            return n
        if isinstance(e, Cond):
            a, b = self.val(e.then), self.val(e.other)
            if a is None or b is None:
                return a if b is None else b
            return uf.union(a, b)
        if isinstance(e, Unary):
            return None
        return None

    def loc(self, lv: Expr) -> int:
        uf = self.uf
        if isinstance(lv, Cast):
            return self.loc(lv.operand)
        if isinstance(lv, Var):
            return uf.node(var_base(lv))
        if isinstance(lv, Deref):
            n = self.val(lv.operand)
            return n if n is not None else uf.fresh()
        if isinstance(lv, Index):
            self.val(lv.index)
            n = self.loc(lv.base) if isinstance(lv.base.ty, ArrayType) else self.val(lv.base)
            if n is None:
                n = uf.fresh()
            uf.mark_inexact(n)
            return n
        return uf.fresh()

    def assign(self, lhs: Expr, rhs_val: Optional[int]):
        target = self.uf.pts(self.loc(lhs))
        if rhs_val is not None:
            self.uf.union(target, rhs_val)

    def run(self) -> UnionFind:
        p, uf = self.p, self.uf
        for g in p.globals:
            uf.node(decl_base(g))
            if g.init is not None:
                for e in _init_exprs(g.init):
                    v = self.val(e)
                    if v is not None:
                        uf.union(uf.pts(uf.node(decl_base(g))), v)
        for fn in p.functions.values():
            for d in list(fn.formals) + list(fn.locals.values()):
                uf.node(decl_base(d))
        for sid in sorted(p.stmts):
            s = p.stmts[sid]
            if s.fn not in p.functions:
                continue
            for e in stmt_exprs(s):
                self.val(e)  # nested dereferences create their classes
            if isinstance(s, (Assign, NondetAssign)):
                self.assign(s.lhs, self.val(s.rhs))
            elif isinstance(s, Alloc):
                self.assign(s.lhs, uf.node(alloc_base(s, s.sid in self.weak_sites)))
            elif isinstance(s, Return) and s.value is not None:
                uf.union(uf.pts(uf.node(ret_base(s.fn))), self.val(s.value) or uf.fresh())
            elif isinstance(s, Call):
                self.call(s)
        return uf

    def call(self, s: Call):
        uf = self.uf
        if s.role == "create":
            b = s.binding
            if b.arg is not None and b.arg < len(s.args):
                v = self.val(s.args[b.arg])
                for t in syntactic_create_targets(self.p, s):
                    f = self.p.functions[t]
                    if f.formals and v is not None:
                        uf.union(uf.pts(uf.node(decl_base(f.formals[0]))), v)
            return
        if s.role is not None:
            return
        for g in syntactic_callees(self.p, s):
            f = self.p.functions[g]
            for formal, arg in zip(f.formals, s.args):
                v = self.val(arg)
                if v is not None:
                    uf.union(uf.pts(uf.node(decl_base(formal))), v)
            if s.lhs is not None:
                self.assign(s.lhs, uf.pts(uf.node(ret_base(g))))


def _rep_key(b: Base, vulnerable: bool):
    rank = 0 if vulnerable else (1 if b.kind == "dynamic" else 2)
    return (rank,) + b.sort_key()


class AliasBackend(SyntacticBackend):
    """Value queries answer Top, as in the syntactic backend; pointers are
    resolved to the memory members of their Steensgaard class."""

    name = "alias"

    def __init__(self, program, context_depth: int = 1):
        super().__init__(program, context_depth)
        self.uf = _Builder(program, self.weak_sites).run()
        self._builder_cache: Dict[Expr, Targets] = {}

    def _vulnerable(self, b: Base) -> bool:
        if b.kind in ("global", "dynamic"):
            return True
        return b.kind in ("local", "formal") and (b.kind, b.fn, b.name) in self.taken

    def class_targets(self, n: int) -> Targets:
        members = sorted(
            (b for b in self.uf.class_members(n) if b.is_memory),
            key=lambda b: _rep_key(b, self._vulnerable(b)),
        )
        if not members:
            return frozenset({UNKNOWN_ADDR}), True
        chosen = [b for b in members if self._vulnerable(b)] or members[:1]
        off = TOP_INT if self.uf.is_inexact(n) else ZERO
        return frozenset(Address(b, off) for b in chosen), len(members) > 1

    def canonical(self, n: int) -> Optional[Base]:
        """Representative of a class: race-vulnerable first, then dynamic,
        then the least by name."""
        members = [b for b in self.uf.class_members(n) if b.is_memory]
        if not members:
            return None
        return min(members, key=lambda b: _rep_key(b, self._vulnerable(b)))

    def var_points_to(self, v: Var) -> Targets:
        b = var_base(v)
        if b not in self.uf.node_of:
            return frozenset({UNKNOWN_ADDR}), True
        return self.class_targets(self.uf.pts(self.uf.node_of[b]))

    def deref_targets(self, e: Expr) -> Targets:
        hit = self._builder_cache.get(e)
        if hit is None:
            b = _Builder(self.program, self.weak_sites)
            b.uf = self.uf
            n = b.val(e)
            hit = self.class_targets(n) if n is not None else (frozenset({UNKNOWN_ADDR}), True)
            self._builder_cache[e] = hit
        return hit

    def analyse_thread(self, entry: str, init: AbstractState) -> BackendResult:
        f = self.program.functions[entry]
        bindings = []
        for formal in f.formals:
            v = init.get(decl_base(formal))
            if isinstance(v, Pointers):
                bindings.extend((decl_base(formal), a) for a in v.addrs if a.base.is_memory)
        if bindings:
            steensgaard_saturate(self.uf, bindings)
            self._builder_cache.clear()
            self._access_cache.clear()
        return super().analyse_thread(entry, init)

    def functions(self, r, c, e) -> FrozenSet[str]:
        x = _strip(e)
        while isinstance(x, AddrOf):
            x = _strip(x.operand)
        if isinstance(x, Var) and x.scope == "func":
            return frozenset({x.name}) if x.name in self.program.functions else frozenset()
        b = _Builder(self.program, self.weak_sites)
        b.uf = self.uf
        n = b.val(e)
        if n is None:
            return frozenset()
        strict = self.program.config.strict_thread_signature
        return frozenset(
            m.name
            for m in self.uf.class_members(n)
            if m.kind == "func" and m.name in self.program.functions
            and is_thread_entry_type(self.program.functions[m.name].ftype, strict)
        )
