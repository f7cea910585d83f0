"""Control-flow-graph IR produced by the frontend.

Expressions are immutable trees annotated with their C type.  Statements are
the nodes of per-function control-flow graphs and carry globally unique
``sid`` numbers.  ``origin`` is the ``sid`` of the statement a node was copied
from (loop peeling keeps it stable so reports and oracles can be compared
across transformed programs).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Tuple

from .ctypes import CType, FunctionType, INT


# --------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Expr:
    def children(self) -> Tuple["Expr", ...]:
        return ()


@dataclass(frozen=True)
class Const(Expr):
    value: int
    ty: CType = INT

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var(Expr):
    """A resolved variable or function designator.

    ``scope`` is one of ``global``, ``local``, ``formal`` or ``func``; ``fn``
    is the enclosing function for locals and formals.
    """

    name: str
    scope: str
    fn: Optional[str]
    ty: CType

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Nondet(Expr):
    ty: CType = INT

    def __str__(self):
        return "(*)"


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr
    ty: CType

    def children(self):
        return (self.operand,)

    def __str__(self):
        return f"{self.op}{_paren(self.operand)}"


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    ty: CType

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"{_paren(self.left)} {self.op} {_paren(self.right)}"


@dataclass(frozen=True)
class Cond(Expr):
    test: Expr
    then: Expr
    other: Expr
    ty: CType

    def children(self):
        return (self.test, self.then, self.other)

    def __str__(self):
        return f"{_paren(self.test)} ? {_paren(self.then)} : {_paren(self.other)}"


@dataclass(frozen=True)
class AddrOf(Expr):
    operand: Expr
    ty: CType

    def children(self):
        return (self.operand,)

    def __str__(self):
        return f"&{_paren(self.operand)}"


@dataclass(frozen=True)
class Deref(Expr):
    operand: Expr
    ty: CType

    def children(self):
        return (self.operand,)

    def __str__(self):
        return f"*{_paren(self.operand)}"


@dataclass(frozen=True)
class Index(Expr):
    base: Expr
    index: Expr
    ty: CType

    def children(self):
        return (self.base, self.index)

    def __str__(self):
        return f"{_paren(self.base)}[{self.index}]"


@dataclass(frozen=True)
class Cast(Expr):
    operand: Expr
    ty: CType

    def children(self):
        return (self.operand,)

    def __str__(self):
        return f"({self.ty}){_paren(self.operand)}"


def _paren(e: Expr) -> str:
    if isinstance(e, (Const, Var, Nondet, Index)):
        return str(e)
    return f"({e})"


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    for c in e.children():
        yield from walk(c)


def is_lvalue(e: Expr) -> bool:
    return isinstance(e, (Deref, Index)) or (isinstance(e, Var) and e.scope != "func")


# --------------------------------------------------------------------------
# statements


@dataclass(frozen=True, kw_only=True)
class Stmt:
    sid: int = -1
    fn: str = ""
    line: int = 0
    file: str = ""
    origin: int = -1

    @property
    def loc(self) -> str:
        return f"{self.file}:{self.line}" if self.file else str(self.line)


@dataclass(frozen=True, kw_only=True)
class Skip(Stmt):
    """No-op node.  ``kind`` is ``loop`` for loop headers, ``entry``/``exit``
    for function boundaries and ``skip`` otherwise."""

    kind: str = "skip"

    def __str__(self):
        return {"loop": "loop:", "entry": "entry:", "exit": "exit:"}.get(self.kind, ";")


@dataclass(frozen=True, kw_only=True)
class Assign(Stmt):
    lhs: Expr
    rhs: Expr

    def __str__(self):
        return f"{self.lhs} = {self.rhs};"


@dataclass(frozen=True, kw_only=True)
class NondetAssign(Stmt):
    """``lhs = (*) ? lhs : rhs`` -- the extensive form of an assignment."""

    lhs: Expr
    rhs: Expr

    def __str__(self):
        return f"{self.lhs} = (*) ? {self.lhs} : {self.rhs};"


@dataclass(frozen=True, kw_only=True)
class Call(Stmt):
    """A call.  ``role`` is the concurrency role from the configuration
    (``create``, ``join``, ``lock``, ``unlock``, ``atomic``) or ``None``;
    ``binding`` is the matching configuration entry."""

    lhs: Optional[Expr]
    callee: Expr
    args: Tuple[Expr, ...]
    role: Optional[str] = None
    binding: object = None
    hoisted: bool = False

    def call_text(self) -> str:
        args = ", ".join(str(a) for a in self.args)
        callee = self.callee if isinstance(self.callee, Var) else f"({self.callee})"
        text = f"{callee}({args})"
        return f"{self.lhs} = {text}" if self.lhs is not None else text

    def __str__(self):
        return self.call_text() + ";"


@dataclass(frozen=True, kw_only=True)
class GuardedCall(Call):
    """A call that may be non-deterministically skipped."""

    def __str__(self):
        return f"if (*) {self.call_text()};"


@dataclass(frozen=True, kw_only=True)
class If(Stmt):
    """Branch node; successor 0 is the then-edge, successor 1 the else-edge."""

    cond: Expr

    def __str__(self):
        return f"if ({self.cond})"


@dataclass(frozen=True, kw_only=True)
class Return(Stmt):
    value: Optional[Expr] = None

    def __str__(self):
        return "return;" if self.value is None else f"return {self.value};"


@dataclass(frozen=True, kw_only=True)
class Alloc(Stmt):
    """``lhs = malloc(size)``; ``keep_old`` marks the extensive variant."""

    lhs: Expr
    size: Expr
    keep_old: bool = False

    def __str__(self):
        if self.keep_old:
            return f"{self.lhs} = (*) ? {self.lhs} : malloc({self.size});"
        return f"{self.lhs} = malloc({self.size});"


@dataclass(frozen=True, kw_only=True)
class Free(Stmt):
    ptr: Expr

    def __str__(self):
        return f"free({self.ptr});"


# --------------------------------------------------------------------------
# program


@dataclass(frozen=True)
class VarDecl:
    name: str
    ty: CType
    scope: str  # global | local | formal
    fn: Optional[str] = None
    atomic: bool = False
    thread_local: bool = False
    line: int = 0
    init: object = None  # globals only: Expr, list of Expr, or None

    @property
    def key(self) -> Tuple[str, Optional[str], str]:
        return (self.scope, self.fn, self.name)


@dataclass
class Function:
    name: str
    ftype: FunctionType
    formals: List[VarDecl]
    locals: Dict[str, VarDecl]
    entry: int
    exit: int
    nodes: List[int]
    succ: Dict[int, Tuple[int, ...]]
    line: int = 0

    @property
    def exits(self) -> Tuple[int, ...]:
        return (self.exit,)

    def preds(self) -> Dict[int, List[int]]:
        out: Dict[int, List[int]] = {n: [] for n in self.nodes}
        for n in self.nodes:
            for m in self.succ[n]:
                out[m].append(n)
        return out

    def variable(self, name: str) -> Optional[VarDecl]:
        if name in self.locals:
            return self.locals[name]
        for f in self.formals:
            if f.name == name:
                return f
        return None


@dataclass
class IRProgram:
    functions: Dict[str, Function]
    globals: List[VarDecl]
    stmts: Dict[int, Stmt]
    config: object
    externs: Dict[str, FunctionType] = field(default_factory=dict)
    next_sid: int = 0
    transforms: Tuple[str, ...] = ()

    def stmt(self, sid: int) -> Stmt:
        return self.stmts[sid]

    def global_decl(self, name: str) -> Optional[VarDecl]:
        for g in self.globals:
            if g.name == name:
                return g
        return None

    def decl_of(self, v: Var) -> Optional[VarDecl]:
        if v.scope == "global":
            return self.global_decl(v.name)
        fn = self.functions.get(v.fn or "")
        return fn.variable(v.name) if fn else None

    def all_decls(self) -> Iterator[VarDecl]:
        yield from self.globals
        for f in self.functions.values():
            yield from f.formals
            yield from f.locals.values()

    def fresh_sid(self) -> int:
        sid = self.next_sid
        self.next_sid += 1
        return sid

    def copy(self) -> "IRProgram":
        """Shallow structural copy whose functions and statement table may be
        edited without affecting ``self``."""
        funcs = {
            name: replace(f, nodes=list(f.nodes), succ=dict(f.succ), locals=dict(f.locals))
            for name, f in self.functions.items()
        }
        return replace(self, functions=funcs, stmts=dict(self.stmts))

    def function_of(self, sid: int) -> Function:
        return self.functions[self.stmts[sid].fn]

    def calls(self) -> Iterator[Call]:
        for s in self.stmts.values():
            if isinstance(s, Call):
                yield s


def role_calls(p: IRProgram, role: str) -> List[Call]:
    return [c for c in p.calls() if c.role == role]
