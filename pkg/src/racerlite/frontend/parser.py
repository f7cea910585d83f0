"""Lexer and recursive-descent parser for the mini-C subset.

Grammar (informally)::

    unit     := (global-decl | function | prototype)*
    type     := qualifier* base-type '*'*
    function := type name '(' params ')' block
    stmt     := block | decl | expr ';' | if | while | do-while | for
              | return | break | continue | ';'

Expressions follow C precedence.  ``(*)`` denotes a non-deterministic value.
Preprocessor lines (``#include`` ...) are ignored.  Structs, unions, goto,
switch and variadic functions are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from . import ast as A
from .ctypes import BUILTIN_TYPES


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0, file: str = ""):
        self.line, self.col, self.file = line, col, file
        where = f"{file}:" if file else ""
        super().__init__(f"{where}{line}:{col}: {message}")


@dataclass
class Token:
    kind: str  # num, id, op, eof
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<pp>\#[^\n]*)
  | (?P<num>0[xX][0-9a-fA-F]+|\d+)[uUlL]*
  | (?P<char>'(?:\\.|[^'\\])')
  | (?P<str>"(?:\\.|[^"\\])*")
  | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op><<=|>>=|\+\+|--|->|&&|\|\||==|!=|<=|>=|<<|>>|\+=|-=|\*=|/=|%=|&=|\|=|\^=|[-+*/%&|^!~<>=?:;,.(){}\[\]])
    """,
    re.VERBOSE | re.DOTALL,
)

QUALIFIERS = {"const", "volatile", "static", "extern", "_Atomic", "_Thread_local", "__thread", "register", "inline", "unsigned", "signed"}
UNSUPPORTED = {"struct", "union", "goto", "switch", "enum", "typedef"}


def tokenize(text: str, file: str = "") -> List[Token]:
    toks: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, file)
        kind = m.lastgroup
        col = pos - line_start + 1
        s = m.group(0)
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind in ("comment", "str"):
            line += s.count("\n")
            if "\n" in s:
                line_start = pos + s.rindex("\n") + 1
            if kind == "str":
                toks.append(Token("str", s, line, col))
        elif kind == "num":
            toks.append(Token("num", m.group("num"), line, col))
        elif kind == "char":
            body = s[1:-1]
            value = ord(body[-1]) if not body.startswith("\\") else {"n": 10, "t": 9, "0": 0}.get(body[1], ord(body[1]))
            toks.append(Token("num", str(value), line, col))
        elif kind in ("id", "op"):
            toks.append(Token(kind, s, line, col))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


class Parser:
    def __init__(self, text: str, file: str = ""):
        self.file = file
        self.toks = tokenize(text, file)
        self.i = 0
        self.typedefs = set(BUILTIN_TYPES)

    # ---- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col, self.file)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "id")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            got = self.tok.text or "end of input"
            self.error(f"expected {text!r}, got {got!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Token:
        if self.tok.kind != "id" or self.tok.text in self.typedefs or self.tok.text in QUALIFIERS:
            self.error(f"expected identifier, got {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def pos(self, t: Optional[Token] = None):
        t = t or self.tok
        return {"line": t.line, "col": t.col}

    # ---- types
    def starts_type(self, k: int = 0) -> bool:
        t = self.peek(k) if k else self.tok
        return t.kind == "id" and (t.text in self.typedefs or t.text in QUALIFIERS)

    def type_spec(self) -> A.TypeSpec:
        start = self.tok
        quals: List[str] = []
        base = None
        unsigned = False
        while self.tok.kind == "id":
            text = self.tok.text
            if text in UNSUPPORTED:
                self.error(f"unsupported construct {text!r}")
            if text in QUALIFIERS:
                if text == "unsigned":
                    unsigned = True
                elif text not in ("signed", "register", "inline", "const", "volatile", "static", "extern"):
                    quals.append(text)
                self.i += 1
            elif text in self.typedefs and base is None:
                base = text
                self.i += 1
                if base == "long" and self.at("long"):
                    self.i += 1
                if base in ("long", "short") and self.at("int"):
                    self.i += 1
            else:
                break
        if base is None:
            if unsigned:
                base = "int"
            else:
                self.error("expected a type", start)
        if unsigned:
            base = "size_t" if base == "long" else "unsigned"
        pointers = 0
        while self.accept("*"):
            pointers += 1
            while self.tok.text in ("const", "volatile", "restrict"):
                self.i += 1
        return A.TypeSpec(base, pointers, (), tuple(quals), **self.pos(start))

    def declarator(self, spec: A.TypeSpec) -> Tuple[A.TypeSpec, Token]:
        """Name and array / function-pointer suffix following a type."""
        extra = 0
        while self.accept("*"):
            extra += 1
        if self.at("(") and self.peek().text == "*":
            # function pointer: ret (*name)(params)
            self.expect("(")
            self.expect("*")
            name = self.ident()
            self.expect(")")
            params = self.param_types()
            ty = A.TypeSpec(spec.base, 0, (), spec.qualifiers, params, spec.pointers + extra, **self.pos(name))
            return ty, name
        name = self.ident()
        dims: List[int] = []
        while self.accept("["):
            if self.tok.kind != "num":
                self.error("array dimension must be an integer literal")
            dims.append(int(self.tok.text, 0))
            self.i += 1
            self.expect("]")
        ty = A.TypeSpec(spec.base, spec.pointers + extra, tuple(dims), spec.qualifiers, **self.pos(name))
        return ty, name

    def param_types(self) -> List[A.TypeSpec]:
        self.expect("(")
        out: List[A.TypeSpec] = []
        if self.accept(")"):
            return out
        if self.at("void") and self.peek().text == ")":
            self.i += 2
            return out
        while True:
            spec = self.type_spec()
            if self.tok.kind == "id" and not self.starts_type():
                spec, _ = self.declarator(spec)
            out.append(spec)
            if not self.accept(","):
                break
        self.expect(")")
        return out

    # ---- top level
    def unit(self) -> A.TranslationUnit:
        items: List[A.Node] = []
        while self.tok.kind != "eof":
            if self.accept(";"):
                continue
            items.extend(self.external())
        return A.TranslationUnit(items)

    def external(self) -> List[A.Node]:
        spec = self.type_spec()
        ty, name = self.declarator(spec)
        if self.at("(") and ty.fn_params is None and not ty.dims:
            return [self.function(ty, name)]
        decls = [self.finish_decl(ty, name)]
        while self.accept(","):
            ty2, name2 = self.declarator(A.TypeSpec(spec.base, spec.pointers, (), spec.qualifiers))
            decls.append(self.finish_decl(ty2, name2))
        self.expect(";")
        return [A.GlobalDecl(d, self.file, line=d.line, col=d.col) for d in decls]

    def finish_decl(self, ty: A.TypeSpec, name: Token) -> A.SDecl:
        init = None
        if self.accept("="):
            init = self.initializer()
        return A.SDecl(ty, name.text, init, **self.pos(name))

    def initializer(self) -> A.Node:
        if self.at("{"):
            t = self.expect("{")
            items: List[A.Node] = []
            while not self.at("}"):
                items.append(self.initializer())
                if not self.accept(","):
                    break
            self.expect("}")
            return A.EInitList(items, **self.pos(t))
        return self.assignment_expr()

    def function(self, ret: A.TypeSpec, name: Token) -> A.FuncDef:
        self.expect("(")
        params: List[A.Param] = []
        if self.at("void") and self.peek().text == ")":
            self.i += 1
        elif not self.at(")"):
            while True:
                if self.at("..."):
                    self.error("variadic functions are not supported")
                pstart = self.tok
                spec = self.type_spec()
                pname = None
                if self.tok.kind == "id" or self.at("(") or self.at("*"):
                    spec, ptok = self.declarator(spec)
                    pname = ptok.text
                if self.accept("["):
                    self.expect("]")
                    spec = A.TypeSpec(spec.base, spec.pointers + 1, (), spec.qualifiers)
                params.append(A.Param(spec, pname, **self.pos(pstart)))
                if not self.accept(","):
                    break
        if self.at("."):
            self.error("variadic functions are not supported")
        self.expect(")")
        if self.accept(";"):
            return A.FuncDef(ret, name.text, params, None, self.file, **self.pos(name))
        body = self.block()
        return A.FuncDef(ret, name.text, params, body, self.file, **self.pos(name))

    # ---- statements
    def block(self) -> A.SBlock:
        t = self.expect("{")
        body: List[A.Node] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block")
            body.extend(self.statement())
        self.expect("}")
        return A.SBlock(body, **self.pos(t))

    def statement(self) -> List[A.Node]:
        t = self.tok
        if t.kind == "id" and t.text in UNSUPPORTED:
            self.error(f"unsupported construct {t.text!r}")
        if self.at("{"):
            return [self.block()]
        if self.accept(";"):
            return [A.SEmpty(**self.pos(t))]
        if self.starts_type():
            return self.local_decls()
        if self.accept("if"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.single_statement()
            other = self.single_statement() if self.accept("else") else None
            return [A.SIf(cond, then, other, **self.pos(t))]
        if self.accept("while"):
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            return [A.SWhile(cond, self.single_statement(), **self.pos(t))]
        if self.accept("do"):
            body = self.single_statement()
            self.expect("while")
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            self.expect(";")
            return [A.SDoWhile(body, cond, **self.pos(t))]
        if self.accept("for"):
            self.expect("(")
            init: Optional[A.Node] = None
            if self.starts_type():
                decls = self.local_decls()
                if len(decls) != 1:
                    self.error("only one declaration allowed in for-initialiser", t)
                init = decls[0]
            else:
                if not self.at(";"):
                    init = self.expression()
                self.expect(";")
            cond = None if self.at(";") else self.expression()
            self.expect(";")
            step = None if self.at(")") else self.expression()
            self.expect(")")
            return [A.SFor(init, cond, step, self.single_statement(), **self.pos(t))]
        if self.accept("return"):
            value = None if self.at(";") else self.expression()
            self.expect(";")
            return [A.SReturn(value, **self.pos(t))]
        if self.accept("break"):
            self.expect(";")
            return [A.SBreak(**self.pos(t))]
        if self.accept("continue"):
            self.expect(";")
            return [A.SContinue(**self.pos(t))]
        e = self.expression()
        self.expect(";")
        return [A.SExpr(e, **self.pos(t))]

    def single_statement(self) -> A.Node:
        stmts = self.statement()
        return stmts[0] if len(stmts) == 1 else A.SBlock(stmts, **self.pos())

    def local_decls(self) -> List[A.Node]:
        spec = self.type_spec()
        out: List[A.Node] = []
        while True:
            ty, name = self.declarator(spec)
            out.append(self.finish_decl(ty, name))
            if not self.accept(","):
                break
            spec = A.TypeSpec(spec.base, 0, (), spec.qualifiers)
        self.expect(";")
        return out

    # ---- expressions
    def expression(self) -> A.Node:
        e = self.assignment_expr()
        if self.at(","):
            self.error("comma expressions are not supported")
        return e

    def assignment_expr(self) -> A.Node:
        lhs = self.conditional()
        t = self.tok
        if t.kind == "op" and t.text in ("=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="):
            self.i += 1
            rhs = self.assignment_expr()
            return A.EAssign(t.text, lhs, rhs, **self.pos(t))
        return lhs

    def conditional(self) -> A.Node:
        test = self.binary(1)
        if self.at("?"):
            t = self.expect("?")
            then = self.assignment_expr()
            self.expect(":")
            other = self.conditional()
            return A.ECond(test, then, other, **self.pos(t))
        return test

    _LEVELS = [
        None,
        ("||",), ("&&",), ("|",), ("^",), ("&",), ("==", "!="),
        ("<", "<=", ">", ">="), ("<<", ">>"), ("+", "-"), ("*", "/", "%"),
    ]

    def binary(self, level: int) -> A.Node:
        if level >= len(self._LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        while self.tok.kind == "op" and self.tok.text in self._LEVELS[level]:
            t = self.tok
            self.i += 1
            right = self.binary(level + 1)
            left = A.EBinary(t.text, left, right, **self.pos(t))
        return left

    def unary(self) -> A.Node:
        t = self.tok
        if t.kind == "op" and t.text in ("-", "!", "~", "*", "&", "+"):
            self.i += 1
            operand = self.unary()
            if t.text == "+":
                return operand
            return A.EUnary(t.text, operand, **self.pos(t))
        if t.kind == "op" and t.text in ("++", "--"):
            self.i += 1
            return A.EIncDec(t.text, self.unary(), True, **self.pos(t))
        if self.at("sizeof"):
            self.i += 1
            if self.at("(") and self.starts_type(1):
                self.expect("(")
                spec = self.type_spec()
                self.expect(")")
                return A.ESizeof(spec, None, **self.pos(t))
            return A.ESizeof(None, self.unary(), **self.pos(t))
        if self.at("(") and self.peek().text == "*" and self.peek(2).text == ")":
            self.i += 3
            return self.postfix(A.ENondet(**self.pos(t)))
        if self.at("(") and self.starts_type(1):
            self.expect("(")
            spec = self.type_spec()
            self.expect(")")
            return A.ECast(spec, self.unary(), **self.pos(t))
        return self.postfix(self.primary())

    def primary(self) -> A.Node:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return A.EConst(int(t.text, 0), **self.pos(t))
        if t.kind == "str":
            self.i += 1
            return A.EConst(0, **self.pos(t))
        if t.kind == "id" and t.text not in self.typedefs and t.text not in QUALIFIERS:
            if t.text in UNSUPPORTED:
                self.error(f"unsupported construct {t.text!r}")
            self.i += 1
            return A.EName(t.text, **self.pos(t))
        if self.accept("("):
            e = self.expression()
            self.expect(")")
            return e
        self.error(f"unexpected {t.text or 'end of input'!r}")

    def postfix(self, e: A.Node) -> A.Node:
        while True:
            t = self.tok
            if self.accept("("):
                args: List[A.Node] = []
                if not self.at(")"):
                    while True:
                        args.append(self.assignment_expr())
                        if not self.accept(","):
                            break
                self.expect(")")
                e = A.ECall(e, args, **self.pos(t))
            elif self.accept("["):
                idx = self.expression()
                self.expect("]")
                e = A.EIndex(e, idx, **self.pos(t))
            elif t.kind == "op" and t.text in ("++", "--"):
                self.i += 1
                e = A.EIncDec(t.text, e, False, **self.pos(t))
            elif t.text in (".", "->"):
                self.error("structs are not supported")
            else:
                return e


def parse_text(text: str, file: str = "") -> A.TranslationUnit:
    return Parser(text, file).unit()
