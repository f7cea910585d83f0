"""Type-check the syntax tree and lower it to per-function CFGs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import ast as A
from .config import ConcurrencyConfig, ConfigError, ThreadFn
from .ctypes import (
    ATOMIC_TYPE_NAMES,
    BUILTIN_TYPES,
    INT,
    LONG,
    THREAD_ID,
    VOID,
    VOID_PTR,
    ArrayType,
    CType,
    FunctionType,
    IntType,
    OpaqueType,
    PointerType,
    VoidType,
    is_lock_type,
)
from .ir import (
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
    Function,
    If,
    Index,
    IRProgram,
    Nondet,
    Return,
    Skip,
    Stmt,
    Unary,
    Var,
    VarDecl,
    is_lvalue,
)
from .parser import ParseError


class SemanticError(ParseError):
    """Unknown identifiers, type errors and other non-syntactic problems."""


# Functions that need no declaration.  Values are (return type, behaviour).
_NONDET_FNS = {
    "__VERIFIER_nondet_int", "__VERIFIER_nondet_uint", "__VERIFIER_nondet_bool",
    "__VERIFIER_nondet_char", "__VERIFIER_nondet_long", "rand", "nondet",
}
_ALLOC_FNS = {"malloc", "calloc", "alloca"}
_EXIT_FNS = {"pthread_exit", "exit", "abort", "__VERIFIER_error", "reach_error"}
_EXTERN_FNS = {
    "assert": INT, "__VERIFIER_assert": VOID, "__VERIFIER_assume": VOID, "assume": VOID,
    "printf": INT, "puts": INT, "usleep": INT, "sleep": INT, "sched_yield": INT,
    "pthread_mutex_init": INT, "pthread_mutex_destroy": INT, "pthread_rwlock_init": INT,
    "pthread_rwlock_destroy": INT, "pthread_attr_init": INT, "pthread_attr_destroy": INT,
    "pthread_self": THREAD_ID, "pthread_detach": INT,
}


@dataclass
class _FnBuilder:
    name: str
    ftype: FunctionType
    formals: List[VarDecl]
    file: str
    locals: Dict[str, VarDecl] = field(default_factory=dict)
    scopes: List[Dict[str, VarDecl]] = field(default_factory=list)
    nodes: List[int] = field(default_factory=list)
    succ: Dict[int, List[Optional[int]]] = field(default_factory=dict)
    pending: List[Tuple[int, int]] = field(default_factory=list)
    breaks: List[List[Tuple[int, int]]] = field(default_factory=list)
    continues: List[List[Tuple[int, int]]] = field(default_factory=list)
    returns: List[int] = field(default_factory=list)
    ntemps: int = 0


class Lowering:
    def __init__(self, units: Sequence[Tuple[str, A.TranslationUnit]], config: ConcurrencyConfig):
        self.units = units
        self.config = config
        self.stmts: Dict[int, Stmt] = {}
        self.next_sid = 0
        self.globals: Dict[str, VarDecl] = {}
        self.fsigs: Dict[str, FunctionType] = {}
        self.defs: Dict[str, A.FuncDef] = {}
        self.externs: Dict[str, FunctionType] = {}
        self.fb: Optional[_FnBuilder] = None
        self.file = ""
        self._hoisting = False

    # ------------------------------------------------------------------
    def error(self, msg: str, node: Optional[A.Node] = None):
        line = node.line if node is not None else 0
        col = node.col if node is not None else 0
        raise SemanticError(msg, line, col, self.file)

    def ctype(self, t: A.TypeSpec) -> CType:
        if t.base not in BUILTIN_TYPES:
            self.error(f"unknown type {t.base!r}", t)
        base = BUILTIN_TYPES[t.base]
        if t.fn_params is not None:
            ret = base
            for _ in range(t.fn_ret_pointers):
                ret = PointerType(ret)
            ft = FunctionType(ret, tuple(self.ctype(p) for p in t.fn_params))
            return PointerType(ft)
        ty: CType = base
        for _ in range(t.pointers):
            ty = PointerType(ty)
        for d in reversed(t.dims):
            ty = ArrayType(ty, d)
        if isinstance(ty, VoidType):
            return ty
        return ty

    def is_atomic(self, t: A.TypeSpec) -> bool:
        return "_Atomic" in t.qualifiers or (t.base in ATOMIC_TYPE_NAMES and t.pointers == 0)

    def is_thread_local(self, t: A.TypeSpec) -> bool:
        return "_Thread_local" in t.qualifiers or "__thread" in t.qualifiers

    # ------------------------------------------------------------------
    def run(self) -> IRProgram:
        # collect declarations first so functions can be used before definition
        for file, tu in self.units:
            self.file = file
            for item in tu.items:
                if isinstance(item, A.FuncDef):
                    ret = self.ctype(item.ret)
                    ft = FunctionType(ret, tuple(self.ctype(p.ty) for p in item.params))
                    if item.body is not None:
                        if item.name in self.defs:
                            what = "multiple definitions of 'main'" if item.name == "main" else f"function {item.name!r} defined twice"
                            self.error(what, item)
                        self.defs[item.name] = item
                    self.fsigs.setdefault(item.name, ft)
                elif isinstance(item, A.GlobalDecl):
                    d = item.decl
                    if d.name in self.globals:
                        continue  # tentative definitions
                    self.globals[d.name] = VarDecl(
                        d.name, self.ctype(d.ty), "global", None,
                        self.is_atomic(d.ty), self.is_thread_local(d.ty), d.line,
                    )
        if "main" not in self.defs:
            self.error("program has no 'main' function")
        for name, ft in self.fsigs.items():
            if name not in self.defs:
                self.externs[name] = ft
        # global initialisers
        for file, tu in self.units:
            self.file = file
            for item in tu.items:
                if isinstance(item, A.GlobalDecl) and item.decl.init is not None:
                    d = self.globals[item.decl.name]
                    init = self.global_init(item.decl.init, d.ty)
                    self.globals[d.name] = VarDecl(d.name, d.ty, "global", None, d.atomic, d.thread_local, d.line, init)
        functions: Dict[str, Function] = {}
        for name, fdef in self.defs.items():
            self.file = fdef.file
            functions[name] = self.lower_function(fdef)
        return IRProgram(
            functions=functions,
            globals=list(self.globals.values()),
            stmts=self.stmts,
            config=self.config,
            externs=dict(self.externs),
            next_sid=self.next_sid,
        )

    def global_init(self, node: A.Node, ty: CType):
        if isinstance(node, A.EInitList):
            elem = ty.elem if isinstance(ty, ArrayType) else ty
            return [self.global_init(i, elem) for i in node.items]
        e = self.expr(node, allow_calls=False)
        ok = all(isinstance(x, (Const, AddrOf, Var, Cast, Unary, Binary, Index)) for x in _walk(e))
        bad_var = any(isinstance(x, Var) and x.scope not in ("global", "func") for x in _walk(e))
        if not ok or bad_var:
            self.error("global initialiser must be constant", node)
        return e

    # ------------------------------------------------------------------
    def new_sid(self) -> int:
        sid = self.next_sid
        self.next_sid += 1
        return sid

    def emit(self, make, node: Optional[A.Node], nsucc: int = 1, link: bool = True) -> int:
        fb = self.fb
        sid = self.new_sid()
        stmt = make(sid=sid, fn=fb.name, line=node.line if node is not None else 0, file=self.file, origin=sid)
        self.stmts[sid] = stmt
        fb.nodes.append(sid)
        fb.succ[sid] = [None] * nsucc
        if link:
            for src, slot in fb.pending:
                fb.succ[src][slot] = sid
            fb.pending = [(sid, 0)] if nsucc else []
        return sid

    def link(self, pending: List[Tuple[int, int]], target: int):
        for src, slot in pending:
            self.fb.succ[src][slot] = target

    def lower_function(self, fdef: A.FuncDef) -> Function:
        ft = self.fsigs[fdef.name]
        formals = []
        for p, pty in zip(fdef.params, ft.params):
            if p.name is None:
                self.error("unnamed parameter in function definition", p)
            formals.append(VarDecl(p.name, pty, "formal", fdef.name, self.is_atomic(p.ty), False, p.line))
        fb = _FnBuilder(fdef.name, ft, formals, fdef.file)
        fb.scopes.append({f.name: f for f in formals})
        self.fb = fb
        entry = self.emit(lambda **kw: Skip(kind="entry", **kw), fdef)
        self.block(fdef.body)
        if fb.pending:  # falling off the end returns
            fb.returns.append(self.emit(lambda **kw: Return(value=None, **kw), fdef))
            fb.pending = []
        exit_sid = self.emit(lambda **kw: Skip(kind="exit", **kw), fdef, nsucc=0, link=False)
        self.link(fb.pending, exit_sid)
        fb.pending = []
        for r in fb.returns:
            fb.succ[r][0] = exit_sid
        # prune nodes unreachable from the entry (code after return/break)
        seen = {entry}
        stack = [entry]
        while stack:
            n = stack.pop()
            for m in fb.succ[n]:
                if m is not None and m not in seen:
                    seen.add(m)
                    stack.append(m)
        seen.add(exit_sid)
        nodes = [n for n in fb.nodes if n in seen]
        for n in fb.nodes:
            if n not in seen:
                del self.stmts[n]
        succ = {n: tuple(m for m in fb.succ[n] if m is not None) for n in nodes}
        for n in nodes:
            if isinstance(self.stmts[n], If) and len(succ[n]) != 2:
                raise AssertionError("branch without two successors")
        self.fb = None
        return Function(fdef.name, ft, formals, fb.locals, entry, exit_sid, nodes, succ, fdef.line)

    # ------------------------------------------------------------------
    # statements
    def block(self, b: A.SBlock):
        self.fb.scopes.append({})
        for s in b.body:
            self.statement(s)
        self.fb.scopes.pop()

    def statement(self, s: A.Node):
        fb = self.fb
        if isinstance(s, A.SBlock):
            self.block(s)
        elif isinstance(s, A.SEmpty):
            pass
        elif isinstance(s, A.SDecl):
            self.local_decl(s)
        elif isinstance(s, A.SExpr):
            self.expr_statement(s.expr, s)
        elif isinstance(s, A.SIf):
            cond = self.condition(s.cond)
            br = self.emit(lambda **kw: If(cond=cond, **kw), s, nsucc=2)
            fb.pending = [(br, 0)]
            self.scoped(s.then)
            after_then = fb.pending
            fb.pending = [(br, 1)]
            if s.other is not None:
                self.scoped(s.other)
            fb.pending = after_then + fb.pending
        elif isinstance(s, A.SWhile):
            head = self.emit(lambda **kw: Skip(kind="loop", **kw), s)
            cond = self.condition(s.cond, hoisted=True)
            br = self.emit(lambda **kw: If(cond=cond, **kw), s, nsucc=2)
            fb.pending = [(br, 0)]
            fb.breaks.append([])
            fb.continues.append([])
            self.scoped(s.body)
            self.link(fb.pending + fb.continues.pop(), head)
            fb.pending = [(br, 1)] + fb.breaks.pop()
        elif isinstance(s, A.SDoWhile):
            head = self.emit(lambda **kw: Skip(kind="loop", **kw), s)
            fb.breaks.append([])
            fb.continues.append([])
            self.scoped(s.body)
            fb.pending = fb.pending + fb.continues.pop()
            cond = self.condition(s.cond, hoisted=True)
            br = self.emit(lambda **kw: If(cond=cond, **kw), s, nsucc=2)
            self.link([(br, 0)], head)
            fb.pending = [(br, 1)] + fb.breaks.pop()
        elif isinstance(s, A.SFor):
            fb.scopes.append({})
            if isinstance(s.init, A.SDecl):
                self.local_decl(s.init)
            elif s.init is not None:
                self.expr_statement(s.init, s)
            head = self.emit(lambda **kw: Skip(kind="loop", **kw), s)
            exits: List[Tuple[int, int]] = []
            if s.cond is not None:
                cond = self.condition(s.cond, hoisted=True)
                br = self.emit(lambda **kw: If(cond=cond, **kw), s, nsucc=2)
                fb.pending = [(br, 0)]
                exits = [(br, 1)]
            fb.breaks.append([])
            fb.continues.append([])
            self.scoped(s.body)
            fb.pending = fb.pending + fb.continues.pop()
            if s.step is not None:
                self.expr_statement(s.step, s)
            self.link(fb.pending, head)
            fb.pending = exits + fb.breaks.pop()
            fb.scopes.pop()
        elif isinstance(s, A.SReturn):
            value = None
            if s.value is not None:
                value = self.coerce(self.expr(s.value), self.fb.ftype.ret)
            r = self.emit(lambda **kw: Return(value=value, **kw), s)
            fb.returns.append(r)
            fb.pending = []
        elif isinstance(s, A.SBreak):
            if not fb.breaks:
                self.error("break outside loop", s)
            fb.breaks[-1].extend(fb.pending)
            fb.pending = []
        elif isinstance(s, A.SContinue):
            if not fb.continues:
                self.error("continue outside loop", s)
            fb.continues[-1].extend(fb.pending)
            fb.pending = []
        else:
            self.error(f"unsupported statement {type(s).__name__}", s)

    def scoped(self, s: A.Node):
        self.fb.scopes.append({})
        self.statement(s)
        self.fb.scopes.pop()

    def local_decl(self, d: A.SDecl):
        fb = self.fb
        ty = self.ctype(d.ty)
        if isinstance(ty, VoidType):
            self.error("variable declared void", d)
        name = d.name
        if name in fb.locals or any(f.name == name for f in fb.formals):
            k = 1
            while f"{d.name}.{k}" in fb.locals:
                k += 1
            name = f"{d.name}.{k}"
        decl = VarDecl(name, ty, "local", fb.name, self.is_atomic(d.ty), self.is_thread_local(d.ty), d.line)
        fb.locals[name] = decl
        fb.scopes[-1][d.name] = decl
        if d.init is None:
            return
        target = Var(name, "local", fb.name, ty)
        if isinstance(d.init, A.EInitList):
            if not isinstance(ty, ArrayType):
                self.error("initialiser list for non-array", d)
            for i, item in enumerate(d.init.items):
                lhs = Index(target, Const(i), ty.elem)
                self.assign(lhs, item, d)
            return
        self.assign(target, d.init, d)

    def expr_statement(self, e: A.Node, node: A.Node):
        if isinstance(e, A.EAssign):
            lhs = self.lvalue(e.target)
            if e.op == "=":
                self.assign(lhs, e.value, node, lhs_done=True)
            else:
                op = e.op[:-1]
                rhs = self.binop(op, lhs, self.expr(e.value), e)
                self.emit_assign(lhs, rhs, node)
        elif isinstance(e, A.EIncDec):
            lhs = self.lvalue(e.target)
            rhs = self.binop("+" if e.op == "++" else "-", lhs, Const(1), e)
            self.emit_assign(lhs, rhs, node)
        elif isinstance(e, A.ECall):
            self.call(e, None, node)
        else:
            # expression evaluated for its reads only
            value = self.expr(e)
            tmp = self.temp(value.ty if not isinstance(value.ty, (ArrayType, VoidType)) else INT)
            self.emit_assign(tmp, value, node)

    def assign(self, lhs, value: A.Node, node: A.Node, lhs_done: bool = False):
        if not lhs_done and not isinstance(lhs, Expr):
            lhs = self.lvalue(lhs)
        inner = value
        while isinstance(inner, A.ECast):
            inner = inner.operand
        if isinstance(inner, A.ECall):
            self.call(inner, lhs, node)
            return
        self.emit_assign(lhs, self.coerce(self.expr(value), lhs.ty), node)

    def emit_assign(self, lhs: Expr, rhs: Expr, node: A.Node):
        if isinstance(lhs.ty, ArrayType):
            self.error("cannot assign to an array", node)
        self.emit(lambda **kw: Assign(lhs=lhs, rhs=rhs, **kw), node)

    def condition(self, c: A.Node, hoisted: bool = False) -> Expr:
        self._hoisting = hoisted
        try:
            e = self.expr(c)
        finally:
            self._hoisting = False
        if isinstance(e.ty, (ArrayType, VoidType)):
            self.error("invalid condition", c)
        return e

    # ------------------------------------------------------------------
    # calls
    def call(self, e: A.ECall, lhs: Optional[Expr], node: A.Node):
        fb = self.fb
        callee_node = e.callee
        if isinstance(callee_node, A.EName) and self.lookup_var(callee_node.name) is None:
            name = callee_node.name
            if name in _ALLOC_FNS:
                size = self.expr(e.args[0]) if e.args else Const(0)
                if name == "calloc" and len(e.args) == 2:
                    size = Binary("*", size, self.expr(e.args[1]), LONG)
                if lhs is None:
                    lhs = self.temp(VOID_PTR)
                if not lhs.ty.is_pointer:
                    self.error("allocation assigned to a non-pointer", node)
                self.emit(lambda **kw: Alloc(lhs=lhs, size=size, **kw), node)
                return lhs
            if name == "free":
                ptr = self.expr(e.args[0])
                self.emit(lambda **kw: Free(ptr=ptr, **kw), node)
                return None
            if name in _NONDET_FNS and name not in self.fsigs:
                if lhs is not None:
                    self.emit_assign(lhs, Nondet(lhs.ty if lhs.ty.is_integer else INT), node)
                    return lhs
                return None
            if name in _EXIT_FNS and name not in self.defs:
                args = tuple(self.expr(a) for a in e.args)
                r = self.emit(lambda **kw: Return(value=None, **kw), node)
                fb.returns.append(r)
                fb.pending = []
                return None
        if (
            isinstance(callee_node, A.EName)
            and self.lookup_var(callee_node.name) is None
            and callee_node.name not in self.fsigs
            and (self.config.role_of(callee_node.name)[0] or callee_node.name in _EXTERN_FNS)
        ):
            ret = _EXTERN_FNS.get(callee_node.name, INT)
            callee = Var(callee_node.name, "func", None, FunctionType(ret, ()))
        else:
            callee = self.expr(callee_node)
        role, binding = None, None
        if isinstance(callee, Var) and callee.scope == "func":
            name = callee.name
            role, binding = self.config.role_of(name)
            ftype = callee.ty
            if role is not None:
                try:
                    self.config.check_arity(name, len(e.args))
                except ConfigError as exc:
                    self.error(str(exc), node)
        else:
            cty = callee.ty
            if isinstance(cty, PointerType) and isinstance(cty.target, FunctionType):
                ftype = cty.target
            else:
                self.error("called object is not a function", e)
        args = []
        for i, a in enumerate(e.args):
            arg = self.expr(a)
            if role in ("lock", "unlock") and i == binding.lock and is_lock_type(arg.ty):
                arg = AddrOf(arg, PointerType(arg.ty))
            elif i < len(ftype.params):
                arg = self.coerce(arg, ftype.params[i])
            args.append(arg)
        if role is None and isinstance(callee, Var) and callee.name in self.defs:
            if len(args) != len(ftype.params):
                self.error(f"{callee.name}: expected {len(ftype.params)} arguments, got {len(args)}", e)
        if lhs is not None and isinstance(ftype.ret, VoidType):
            self.error("void value used in assignment", node)
        hoisted = self._hoisting
        self.emit(
            lambda **kw: Call(lhs=lhs, callee=callee, args=tuple(args), role=role, binding=binding, hoisted=hoisted, **kw),
            node,
        )
        return lhs

    def temp(self, ty: CType) -> Var:
        fb = self.fb
        fb.ntemps += 1
        name = f"__tmp{fb.ntemps}"
        fb.locals[name] = VarDecl(name, ty, "local", fb.name)
        return Var(name, "local", fb.name, ty)

    # ------------------------------------------------------------------
    # expressions
    def lookup_var(self, name: str) -> Optional[VarDecl]:
        if self.fb is not None:
            for scope in reversed(self.fb.scopes):
                if name in scope:
                    return scope[name]
        return self.globals.get(name)

    def lvalue(self, node: A.Node) -> Expr:
        e = self.expr(node)
        if not is_lvalue(e):
            self.error("expression is not assignable", node)
        return e

    def coerce(self, e: Expr, ty: CType) -> Expr:
        if ty.is_pointer and isinstance(e, Const) and e.value == 0:
            return Const(0, ty)
        return e

    def expr(self, n: A.Node, allow_calls: bool = True) -> Expr:
        if isinstance(n, A.EConst):
            return Const(n.value)
        if isinstance(n, A.ENondet):
            return Nondet()
        if isinstance(n, A.EName):
            if n.name == "NULL":
                return Const(0, VOID_PTR)
            if n.name in ("PTHREAD_MUTEX_INITIALIZER", "PTHREAD_RWLOCK_INITIALIZER", "true"):
                return Const(1 if n.name == "true" else 0)
            if n.name == "false":
                return Const(0)
            d = self.lookup_var(n.name)
            if d is not None:
                return Var(d.name, d.scope, d.fn, d.ty)
            if n.name in self.fsigs:
                return Var(n.name, "func", None, self.fsigs[n.name])
            self.error(f"unknown identifier {n.name!r}", n)
        if isinstance(n, A.EUnary):
            if n.op == "&":
                inner = self.expr(n.operand)
                if isinstance(inner, Var) and inner.scope == "func":
                    return inner
                if not is_lvalue(inner):
                    self.error("cannot take the address of an rvalue", n)
                return AddrOf(inner, PointerType(inner.ty))
            if n.op == "*":
                inner = self.expr(n.operand)
                t = inner.ty
                if isinstance(t, PointerType):
                    if isinstance(t.target, FunctionType):
                        return inner
                    if isinstance(t.target, VoidType):
                        self.error("dereferencing a void pointer", n)
                    return Deref(inner, t.target)
                if isinstance(t, ArrayType):
                    return Index(inner, Const(0), t.elem)
                if isinstance(inner, Var) and inner.scope == "func":
                    return inner
                self.error("dereferencing a non-pointer", n)
            inner = self.expr(n.operand)
            if not (inner.ty.is_integer or (n.op == "!" and inner.ty.is_pointer)):
                self.error(f"invalid operand to unary {n.op}", n)
            return Unary(n.op, inner, INT if n.op == "!" else inner.ty)
        if isinstance(n, A.EBinary):
            return self.binop(n.op, self.expr(n.left), self.expr(n.right), n)
        if isinstance(n, A.ECond):
            test = self.expr(n.test)
            then = self.expr(n.then)
            other = self.expr(n.other)
            ty = then.ty if not (isinstance(then, Const) and other.ty.is_pointer) else other.ty
            return Cond(test, self.coerce(then, ty), self.coerce(other, ty), ty)
        if isinstance(n, A.EIndex):
            base = self.expr(n.base)
            idx = self.expr(n.index)
            if not idx.ty.is_integer:
                self.error("array index is not an integer", n)
            if isinstance(base.ty, ArrayType):
                return Index(base, idx, base.ty.elem)
            if isinstance(base.ty, PointerType) and not isinstance(base.ty.target, (VoidType, FunctionType)):
                return Index(base, idx, base.ty.target)
            self.error("subscripted value is not an array or pointer", n)
        if isinstance(n, A.ECast):
            ty = self.ctype(n.ty)
            inner = self.expr(n.operand)
            if isinstance(inner, Const) and ty.is_pointer and inner.value == 0:
                return Const(0, ty)
            if isinstance(inner, Const) and ty.is_integer:
                return Const(inner.value, ty)
            return Cast(inner, ty)
        if isinstance(n, A.ESizeof):
            ty = self.ctype(n.ty) if n.ty is not None else self.expr(n.operand).ty
            size = ty.size()
            if size is None:
                self.error("sizeof applied to an incomplete type", n)
            return Const(size, LONG)
        if isinstance(n, A.ECall):
            if not allow_calls or self.fb is None:
                self.error("function call not allowed here", n)
            callee = n.callee
            ret = INT
            if isinstance(callee, A.EName):
                if callee.name in _ALLOC_FNS:
                    ret = VOID_PTR
                elif callee.name in self.fsigs:
                    ret = self.fsigs[callee.name].ret
                elif callee.name in _EXTERN_FNS:
                    ret = _EXTERN_FNS[callee.name]
                elif self.config.role_of(callee.name)[0] is not None:
                    ret = INT
                elif callee.name in _NONDET_FNS:
                    return Nondet()
                elif self.lookup_var(callee.name) is None and callee.name not in _EXIT_FNS:
                    self.error(f"unknown identifier {callee.name!r}", callee)
            if isinstance(ret, VoidType):
                self.error("void value used in expression", n)
            tmp = self.temp(ret)
            self.call(n, tmp, n)
            return tmp
        if isinstance(n, (A.EAssign, A.EIncDec)):
            self.error("assignments inside expressions are not supported", n)
        if isinstance(n, A.EInitList):
            self.error("unexpected initialiser list", n)
        self.error(f"unsupported expression {type(n).__name__}", n)

    def binop(self, op: str, l: Expr, r: Expr, node: A.Node) -> Expr:
        lt, rt = _decay(l.ty), _decay(r.ty)
        if op in ("==", "!=", "<", "<=", ">", ">=", "&&", "||"):
            if lt.is_pointer and isinstance(r, Const):
                r = Const(r.value, lt)
            if rt.is_pointer and isinstance(l, Const):
                l = Const(l.value, rt)
            for t in (lt, rt):
                if not (t.is_integer or t.is_pointer):
                    self.error(f"invalid operands to {op}", node)
            return Binary(op, l, r, INT)
        if op in ("+", "-") and lt.is_pointer and rt.is_integer:
            return Binary(op, l, r, lt)
        if op == "+" and lt.is_integer and rt.is_pointer:
            return Binary(op, r, l, rt)
        if op == "-" and lt.is_pointer and rt.is_pointer:
            return Binary(op, l, r, LONG)
        if not (lt.is_integer and rt.is_integer):
            self.error(f"invalid operands to {op}", node)
        ty = lt if lt.size() >= rt.size() else rt
        return Binary(op, l, r, ty)


def _decay(t: CType) -> CType:
    if isinstance(t, ArrayType):
        return PointerType(t.elem)
    if isinstance(t, FunctionType):
        return PointerType(t)
    return t


def _walk(e: Expr):
    yield e
    for c in e.children():
        yield from _walk(c)
