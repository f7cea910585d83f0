"""Untyped syntax tree produced by the parser, plus a C pretty-printer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple


@dataclass
class Node:
    line: int = field(default=0, kw_only=True)
    col: int = field(default=0, kw_only=True)


# ---- type syntax


@dataclass
class TypeSpec(Node):
    """Declared type: base name, pointer depth, array dimensions and
    qualifiers.  Function pointer declarators set ``fn_params``."""

    base: str
    pointers: int = 0
    dims: Tuple[int, ...] = ()
    qualifiers: Tuple[str, ...] = ()
    fn_params: Optional[List["TypeSpec"]] = None
    fn_ret_pointers: int = 0


# ---- expressions


@dataclass
class EConst(Node):
    value: int


@dataclass
class EName(Node):
    name: str


@dataclass
class ENondet(Node):
    pass


@dataclass
class EUnary(Node):
    op: str  # - ! ~ * &
    operand: Node


@dataclass
class EBinary(Node):
    op: str
    left: Node
    right: Node


@dataclass
class ECond(Node):
    test: Node
    then: Node
    other: Node


@dataclass
class ECall(Node):
    callee: Node
    args: List[Node]


@dataclass
class EIndex(Node):
    base: Node
    index: Node


@dataclass
class ECast(Node):
    ty: TypeSpec
    operand: Node


@dataclass
class ESizeof(Node):
    ty: Optional[TypeSpec] = None
    operand: Optional[Node] = None


@dataclass
class EAssign(Node):
    op: str  # = += -= *= ...
    target: Node
    value: Node


@dataclass
class EIncDec(Node):
    op: str  # ++ or --
    target: Node
    prefix: bool = False


@dataclass
class EInitList(Node):
    items: List[Node]


# ---- statements


@dataclass
class SDecl(Node):
    ty: TypeSpec
    name: str
    init: Optional[Node] = None


@dataclass
class SExpr(Node):
    expr: Node


@dataclass
class SBlock(Node):
    body: List[Node]


@dataclass
class SIf(Node):
    cond: Node
    then: Node
    other: Optional[Node] = None


@dataclass
class SWhile(Node):
    cond: Node
    body: Node


@dataclass
class SDoWhile(Node):
    body: Node
    cond: Node


@dataclass
class SFor(Node):
    init: Optional[Node]
    cond: Optional[Node]
    step: Optional[Node]
    body: Node


@dataclass
class SReturn(Node):
    value: Optional[Node] = None


@dataclass
class SBreak(Node):
    pass


@dataclass
class SContinue(Node):
    pass


@dataclass
class SEmpty(Node):
    pass


# ---- top level


@dataclass
class Param(Node):
    ty: TypeSpec
    name: Optional[str]


@dataclass
class FuncDef(Node):
    ret: TypeSpec
    name: str
    params: List[Param]
    body: Optional[SBlock]  # None for prototypes
    file: str = ""


@dataclass
class GlobalDecl(Node):
    decl: SDecl
    file: str = ""


@dataclass
class TranslationUnit(Node):
    items: List[Node]


# --------------------------------------------------------------------------
# printing

_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "&": 5, "==": 6, "!=": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7, "<<": 8, ">>": 8,
    "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}


def type_text(t: TypeSpec, name: str = "") -> str:
    quals = "".join(q + " " for q in t.qualifiers)
    if t.fn_params is not None:
        params = ", ".join(type_text(p) for p in t.fn_params) or "void"
        stars = "*" * t.fn_ret_pointers
        return f"{quals}{t.base} {stars}(*{name})({params})"
    dims = "".join(f"[{d}]" for d in t.dims)
    stars = "*" * t.pointers
    sep = " " if name or stars else ""
    return f"{quals}{t.base}{sep}{stars}{name}{dims}".rstrip()


def expr_text(e: Node, prec: int = 0) -> str:
    if isinstance(e, EConst):
        return str(e.value) if e.value >= 0 else f"({e.value})"
    if isinstance(e, EName):
        return e.name
    if isinstance(e, ENondet):
        return "(*)"
    if isinstance(e, EUnary):
        return _wrap(f"{e.op}{expr_text(e.operand, 12)}", 11, prec)
    if isinstance(e, EBinary):
        p = _PREC[e.op]
        return _wrap(f"{expr_text(e.left, p)} {e.op} {expr_text(e.right, p + 1)}", p, prec)
    if isinstance(e, ECond):
        s = f"{expr_text(e.test, 1)} ? {expr_text(e.then, 1)} : {expr_text(e.other, 0)}"
        return _wrap(s, 0, prec if prec == 0 else prec)
    if isinstance(e, ECall):
        args = ", ".join(expr_text(a) for a in e.args)
        return f"{expr_text(e.callee, 12)}({args})"
    if isinstance(e, EIndex):
        return f"{expr_text(e.base, 12)}[{expr_text(e.index)}]"
    if isinstance(e, ECast):
        return _wrap(f"({type_text(e.ty)}){expr_text(e.operand, 11)}", 11, prec)
    if isinstance(e, ESizeof):
        inner = type_text(e.ty) if e.ty is not None else expr_text(e.operand)
        return f"sizeof({inner})"
    if isinstance(e, EAssign):
        return f"{expr_text(e.target)} {e.op} {expr_text(e.value)}"
    if isinstance(e, EIncDec):
        t = expr_text(e.target, 12)
        return f"{e.op}{t}" if e.prefix else f"{t}{e.op}"
    if isinstance(e, EInitList):
        return "{" + ", ".join(expr_text(i) for i in e.items) + "}"
    raise TypeError(f"cannot print {type(e).__name__}")


def _wrap(s: str, own: int, ctx: int) -> str:
    return f"({s})" if own < ctx else s


def stmt_lines(s: Node, indent: int = 0) -> List[str]:
    pad = "  " * indent
    if isinstance(s, SBlock):
        out = [pad + "{"]
        for b in s.body:
            out += stmt_lines(b, indent + 1)
        return out + [pad + "}"]
    if isinstance(s, SDecl):
        init = f" = {expr_text(s.init)}" if s.init is not None else ""
        return [f"{pad}{type_text(s.ty, s.name)}{init};"]
    if isinstance(s, SExpr):
        return [f"{pad}{expr_text(s.expr)};"]
    if isinstance(s, SIf):
        out = [f"{pad}if ({expr_text(s.cond)})"] + stmt_lines(_block(s.then), indent)
        if s.other is not None:
            out += [pad + "else"] + stmt_lines(_block(s.other), indent)
        return out
    if isinstance(s, SWhile):
        return [f"{pad}while ({expr_text(s.cond)})"] + stmt_lines(_block(s.body), indent)
    if isinstance(s, SDoWhile):
        return [pad + "do"] + stmt_lines(_block(s.body), indent) + [f"{pad}while ({expr_text(s.cond)});"]
    if isinstance(s, SFor):
        init = ""
        if isinstance(s.init, SDecl):
            init = stmt_lines(s.init)[0].rstrip(";")
        elif s.init is not None:
            init = expr_text(s.init)
        cond = expr_text(s.cond) if s.cond is not None else ""
        step = expr_text(s.step) if s.step is not None else ""
        return [f"{pad}for ({init}; {cond}; {step})"] + stmt_lines(_block(s.body), indent)
    if isinstance(s, SReturn):
        return [pad + ("return;" if s.value is None else f"return {expr_text(s.value)};")]
    if isinstance(s, SBreak):
        return [pad + "break;"]
    if isinstance(s, SContinue):
        return [pad + "continue;"]
    if isinstance(s, SEmpty):
        return [pad + ";"]
    raise TypeError(f"cannot print {type(s).__name__}")


def _block(s: Node) -> SBlock:
    return s if isinstance(s, SBlock) else SBlock([s])


def print_unit(tu: TranslationUnit) -> str:
    out: List[str] = []
    for item in tu.items:
        if isinstance(item, GlobalDecl):
            out += stmt_lines(item.decl)
        elif isinstance(item, FuncDef):
            params = ", ".join(type_text(p.ty, p.name or "") for p in item.params) or "void"
            head = f"{type_text(item.ret, item.name)}({params})"
            if item.body is None:
                out.append(head + ";")
            else:
                out.append(head)
                out += stmt_lines(item.body)
    return "\n".join(out) + "\n"
